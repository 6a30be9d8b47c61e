#include "ailsrs/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace ailsrs::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("ailsrs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
    ::setenv("AILSRS_THREADS", "2", 1);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string riccati_policy() const {
    const EnvSpec spec = env_spec("lqr2d");
    const RiccatiSolution sol = riccati_optimal(spec);
    save_policy({spec.name, sol.policy, sol.normalizer}, path("riccati.json"));
    return path("riccati.json");
  }

  std::string riccati_demos(int episodes) const {
    const Outcome o = invoke({"record", "--env", "lqr2d", "--policy", riccati_policy(), "--episodes",
                              std::to_string(episodes), "--seed", "3", "--out", path("demos.jsonl")});
    EXPECT_EQ(o.code, kExitOk) << o.err;
    return path("demos.jsonl");
  }

  void write(const std::string& name, const std::string& text) const { write_text_file(path(name), text); }
};

TEST_F(Cli, HelpAndMissingSubcommand) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
}

TEST_F(Cli, TrainExpertWritesPolicyDeterministically) {
  const std::vector<std::string> base{"train-expert", "--env", "lqr2d", "--iters", "20", "--n-dirs", "4", "--seed", "1", "--out"};
  auto a = base;
  a.push_back(path("a.json"));
  auto b = base;
  b.push_back(path("b.json"));
  const Outcome first = invoke(a);
  ASSERT_EQ(first.code, kExitOk) << first.err;
  EXPECT_NE(first.out.find(" ± "), std::string::npos);
  ASSERT_EQ(invoke(b).code, kExitOk);
  EXPECT_EQ(read_text_file(path("a.json")), read_text_file(path("b.json")));
  EXPECT_NO_THROW(load_policy(path("a.json"), env_spec("lqr2d")));
}

TEST_F(Cli, TrainExpertUsageErrors) {
  EXPECT_EQ(invoke({"train-expert", "--iters", "5", "--out", path("x.json")}).code, kExitUsage);
  EXPECT_EQ(invoke({"train-expert", "--env", "nope", "--out", path("x.json")}).code, kExitUsage);
  EXPECT_EQ(invoke({"train-expert", "--env", "lqr2d", "--iters", "abc", "--out", path("x.json")}).code, kExitUsage);
}

TEST_F(Cli, RecordWritesLoadableDemos) {
  const std::string demos = riccati_demos(50);
  const std::string text = read_text_file(demos);
  EXPECT_NE(text.substr(0, text.find('\n')).find("\"episodes\":50"), std::string::npos);
  EXPECT_EQ(load_trajectories(demos).episodes(), 50u);
}

TEST_F(Cli, RecordMissingPolicyIsRuntimeError) {
  const Outcome o = invoke({"record", "--env", "lqr2d", "--policy", path("absent.json"), "--out", path("d.jsonl")});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_NE(o.err.find("absent.json"), std::string::npos);
}

TEST_F(Cli, BehaviorCloningModes) {
  const std::string demos = riccati_demos(5);
  const Outcome ridge = invoke({"bc", "--demos", demos, "--ridge", "1e-8", "--out", path("bc.json")});
  ASSERT_EQ(ridge.code, kExitOk) << ridge.err;
  const PolicyFile pf = load_policy(path("bc.json"), env_spec("lqr2d"));
  EXPECT_FALSE(pf.normalizer.centered);
  EXPECT_EQ(pf.normalizer.count(), 500);
  const Outcome adam = invoke({"bc", "--demos", demos, "--epochs", "50", "--lr", "0.01", "--out", path("bc2.json")});
  EXPECT_EQ(adam.code, kExitOk) << adam.err;
  EXPECT_EQ(invoke({"bc", "--demos", demos, "--ridge", "1e-8", "--epochs", "5", "--out", path("bc3.json")}).code,
            kExitUsage);
}

TEST_F(Cli, BehaviorCloningOnEmptyDemosFails) {
  write("empty.jsonl", "");
  EXPECT_EQ(invoke({"bc", "--demos", path("empty.jsonl"), "--ridge", "0", "--out", path("bc.json")}).code, kExitRuntime);
}

TEST_F(Cli, TrainIsDeterministicAndWritesMetrics) {
  const std::string demos = riccati_demos(3);
  write("cfg.txt", "# tiny run\nn_directions = 4\nmax_iterations = 4\neval_every = 2 # inline comment\neval_episodes = 2\n");
  auto args = [&](const std::string& tag) {
    return std::vector<std::string>{"train", "--env", "lqr2d", "--demos", demos, "--config", path("cfg.txt"),
                                    "--seed", "5", "--out", path(tag + ".json"), "--metrics", path(tag + ".csv"),
                                    "--disc-out", path(tag + ".disc.json")};
  };
  const Outcome a = invoke(args("a"));
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ::setenv("AILSRS_THREADS", "0", 1);
  ASSERT_EQ(invoke(args("b")).code, kExitOk);
  EXPECT_EQ(read_text_file(path("a.json")), read_text_file(path("b.json")));
  EXPECT_EQ(read_text_file(path("a.csv")), read_text_file(path("b.csv")));
  const std::string csv = read_text_file(path("a.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "iteration,mean_disc_return,sigma_r,disc_loss,eval_env_return_mean,eval_env_return_std,wall_ms");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NO_THROW(load_discriminator(path("a.disc.json")));
}

TEST_F(Cli, TrainFlagsOverrideConfig) {
  const std::string demos = riccati_demos(2);
  write("cfg.txt", "n_directions = 4\nmax_iterations = 50\neval_every = 1\neval_episodes = 1\n");
  const Outcome o = invoke({"train", "--env", "lqr2d", "--demos", demos, "--config", path("cfg.txt"), "--iters", "2",
                            "--out", path("p.json"), "--metrics", path("m.csv"), "--record-wall-time"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string csv = read_text_file(path("m.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.back(), ',');
}

TEST_F(Cli, TrainWithInitPolicy) {
  const std::string demos = riccati_demos(2);
  ASSERT_EQ(invoke({"bc", "--demos", demos, "--ridge", "1e-8", "--out", path("bc.json")}).code, kExitOk);
  const Outcome o = invoke({"train", "--env", "lqr2d", "--demos", demos, "--init", path("bc.json"), "--iters", "1",
                            "--n-dirs", "2", "--out", path("p.json")});
  EXPECT_EQ(o.code, kExitOk) << o.err;
}

TEST_F(Cli, TrainRejectsMismatchedDemos) {
  const std::string demos = riccati_demos(2);
  const Outcome o = invoke({"train", "--env", "pendulum", "--demos", demos, "--iters", "1", "--n-dirs", "2", "--out",
                            path("p.json")});
  EXPECT_EQ(o.code, kExitRuntime);
}

TEST_F(Cli, TrainRejectsBadConfig) {
  const std::string demos = riccati_demos(1);
  write("bad_key.txt", "learning_rate = 3\n");
  write("bad_value.txt", "alpha = fast\n");
  write("bad_line.txt", "alpha 0.1\n");
  for (const char* name : {"bad_key.txt", "bad_value.txt", "bad_line.txt"}) {
    const Outcome o =
        invoke({"train", "--env", "lqr2d", "--demos", demos, "--config", path(name), "--out", path("p.json")});
    EXPECT_EQ(o.code, kExitUsage) << name;
    EXPECT_NE(o.err.find("config"), std::string::npos) << o.err;
  }
}

TEST_F(Cli, EvalMatchesRiccatiEstimate) {
  const std::string policy = riccati_policy();
  const Outcome o = invoke({"eval", "--env", "lqr2d", "--policy", policy, "--episodes", "100", "--seed", "0"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const double printed = std::stod(o.out.substr(0, o.out.find(' ')));
  EXPECT_EQ(printed, riccati_optimal(env_spec("lqr2d"), 0, 100).optimal_return);
  const Outcome single = invoke({"eval", "--env", "lqr2d", "--policy", policy, "--episodes", "1"});
  EXPECT_NE(single.out.find(" ± 0\n"), std::string::npos) << single.out;
  EXPECT_EQ(invoke({"eval", "--env", "cartpole", "--policy", policy}).code, kExitUsage);
  EXPECT_EQ(invoke({"eval", "--env", "pendulum", "--policy", policy}).code, kExitRuntime);
}

TEST(Config, ParsesEveryKey) {
  TrainerConfig c;
  apply_config_text(c,
                    "alpha = 0.05\nnu = 0.1\nn_directions = 7\nmax_iterations = 9\nrollout_max_steps = 50\n"
                    "disc_lr = 0.001\ndisc_iters = 2\ndisc_batch = 33\neval_every = 4\neval_episodes = 6\n"
                    "seed = 18446744073709551615\ntarget_frac = 0.9\ncenter_observations = true\n"
                    "record_wall_time = 1\n\n   # blank and comment lines\n");
  EXPECT_EQ(c.ars.alpha, 0.05);
  EXPECT_EQ(c.ars.nu, 0.1);
  EXPECT_EQ(c.ars.n_directions, 7);
  EXPECT_EQ(c.max_iterations, 9);
  EXPECT_EQ(c.rollout_max_steps, 50);
  EXPECT_EQ(c.disc_lr, 0.001);
  EXPECT_EQ(c.disc_iters, 2);
  EXPECT_EQ(c.disc_batch, 33);
  EXPECT_EQ(c.eval_every, 4);
  EXPECT_EQ(c.eval_episodes, 6);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.target_frac, 0.9);
  EXPECT_TRUE(c.center_observations);
  EXPECT_TRUE(c.record_wall_time);
}

TEST(Config, RejectsInvalidValues) {
  TrainerConfig c;
  EXPECT_THROW(apply_config_text(c, "n_directions = 2.5\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "nu = -1\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "center_observations = maybe\n"), ConfigError);
  EXPECT_THROW(apply_config_value(c, "unknown", "1"), ConfigError);
}

TEST(Threads, FromEnvironment) {
  ::setenv("AILSRS_THREADS", "3", 1);
  EXPECT_EQ(threads_from_environment(), 3u);
  ::setenv("AILSRS_THREADS", "0", 1);
  EXPECT_EQ(threads_from_environment(), 0u);
  ::setenv("AILSRS_THREADS", "lots", 1);
  EXPECT_THROW(threads_from_environment(), ConfigError);
  ::unsetenv("AILSRS_THREADS");
  EXPECT_GE(threads_from_environment(), 1u);
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(-6.5), "-6.5");
  EXPECT_EQ(format_real(0.0), "0");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_real(x)), x);
}

}  // namespace
}  // namespace ailsrs::cli
