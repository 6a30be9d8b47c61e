#include "ailsrs/cli.hpp"

#include "ailsrs/demo_io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

namespace ailsrs::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

EnvSpec spec_or_usage(const std::string& name) { return env_spec(name); }

BcDataset<double> dataset_from(const TrajectorySet& set) {
  const Matrix rows = state_action_rows(set);
  return {rows.leftCols(set.state_dim), rows.rightCols(set.action_dim)};
}

void print_eval(std::ostream& out, const char* label, const EvalResult& e) {
  out << label << format_real(e.mean) << " ± " << format_real(e.std) << "\n";
}

// ---------------------------------------------------------------------------

struct TrainExpertArgs {
  std::string env;
  int iters = 500;
  int n_dirs = ArsConfig{}.n_directions;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
};

int train_expert_cmd(const TrainExpertArgs& a, std::ostream& out) {
  const EnvSpec spec = spec_or_usage(a.env);
  TrainerConfig config;
  if (!a.config.empty()) apply_config_text(config, read_text_file(a.config));
  config.ars.n_directions = a.n_dirs;
  config.seed = a.seed;
  config.threads = threads_from_environment();
  const ExpertResult result = train_expert(spec, config, a.iters);
  save_policy({spec.name, result.trained.policy, result.trained.normalizer}, a.out);
  print_eval(out, "final eval: ", result.final_eval);
  return kExitOk;
}

struct RecordArgs {
  std::string env;
  std::string policy;
  int episodes = 50;
  std::uint64_t seed = 1;
  std::string out;
};

int record_cmd(const RecordArgs& a, std::ostream& out) {
  const EnvSpec spec = spec_or_usage(a.env);
  const PolicyFile pf = load_policy(a.policy, spec);
  const TrajectorySet set = record(pf.policy, pf.normalizer, spec, a.episodes, a.seed);
  save_trajectories(set, a.out);
  out << "recorded " << set.episodes() << " episodes, mean return " << format_real(mean_env_return(set)) << "\n";
  return kExitOk;
}

struct BcArgs {
  std::string demos;
  std::string out;
  std::optional<double> ridge;
  std::optional<int> epochs;
  std::optional<double> lr;
  long batch_size = 0;
  std::uint64_t seed = 1;
  bool centered = false;
};

int bc_cmd(const BcArgs& a, std::ostream& out) {
  const TrajectorySet set = load_trajectories(a.demos);
  const EnvSpec spec = env_spec(set.env_name);
  if (set.state_dim != spec.state_dim || set.action_dim != spec.action_dim)
    throw DimensionError("demonstrations do not match environment " + spec.name);
  const BcDataset<double> data = dataset_from(set);
  ObservationNormalizer<double> normalizer(spec.state_dim, a.centered);
  for (Eigen::Index r = 0; r < data.states.rows(); ++r) normalizer.observe(data.states.row(r).transpose());

  LinearPolicy<double> policy;
  if (a.ridge) {
    policy = bc_closed_form(data, normalizer, *a.ridge);
  } else {
    BcFitOptions options;
    if (a.epochs) options.epochs = *a.epochs;
    if (a.lr) options.lr = *a.lr;
    options.batch_size = a.batch_size;
    Rng rng = rng_new(a.seed, {stream::kBehaviorCloning});
    policy = bc_fit(data, normalizer, options, rng).policy;
  }
  save_policy({spec.name, policy, normalizer}, a.out);
  out << "bc loss " << format_real(bc_loss(policy.theta, normalizer.whiten_rows(data.states), data.actions)) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string env;
  std::string demos;
  std::string config;
  std::string init;
  std::string out;
  std::string metrics;
  std::string disc_out;
  std::optional<std::uint64_t> seed;
  std::optional<double> target_frac;
  std::optional<int> iters;
  std::optional<int> n_dirs;
  bool wall_time = false;
};

int train_cmd(const TrainArgs& a, std::ostream& out) {
  const EnvSpec spec = spec_or_usage(a.env);
  TrainerConfig config;
  if (!a.config.empty()) apply_config_text(config, read_text_file(a.config));
  if (a.seed) config.seed = *a.seed;
  if (a.target_frac) config.target_frac = *a.target_frac;
  if (a.iters) config.max_iterations = *a.iters;
  if (a.n_dirs) config.ars.n_directions = *a.n_dirs;
  if (a.wall_time) config.record_wall_time = true;
  config.threads = threads_from_environment();

  const TrajectorySet demos = load_trajectories(a.demos);
  std::optional<TrainedPolicy> init;
  if (!a.init.empty()) {
    const PolicyFile pf = load_policy(a.init, spec);
    init = TrainedPolicy{pf.policy, pf.normalizer};
  }
  const AilsrsResult result = train_ailsrs(spec, demos, config, init);
  save_policy({spec.name, result.trained.policy, result.trained.normalizer}, a.out);
  if (!a.metrics.empty()) write_text_file(a.metrics, format_metrics_csv(result.metrics));
  if (!a.disc_out.empty()) save_discriminator(result.disc, a.disc_out);
  out << "iterations " << result.metrics.size();
  if (result.target_reached_at) out << " (target reached at " << *result.target_reached_at << ")";
  out << "\n";
  print_eval(out, "final eval: ", result.final_eval);
  return kExitOk;
}

struct EvalArgs {
  std::string env;
  std::string policy;
  int episodes = 100;
  std::uint64_t seed = 0;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  const EnvSpec spec = spec_or_usage(a.env);
  const PolicyFile pf = load_policy(a.policy, spec);
  print_eval(out, "", evaluate(pf.policy, pf.normalizer, spec, a.episodes, a.seed));
  return kExitOk;
}

}  // namespace

void apply_config_value(TrainerConfig& c, std::string_view key, std::string_view value) {
  if (key == "alpha") c.ars.alpha = parse_number<double>(key, value);
  else if (key == "nu") c.ars.nu = parse_number<double>(key, value);
  else if (key == "n_directions") c.ars.n_directions = parse_number<int>(key, value);
  else if (key == "max_iterations") c.max_iterations = parse_number<int>(key, value);
  else if (key == "rollout_max_steps") c.rollout_max_steps = parse_number<int>(key, value);
  else if (key == "disc_lr") c.disc_lr = parse_number<double>(key, value);
  else if (key == "disc_iters") c.disc_iters = parse_number<int>(key, value);
  else if (key == "disc_batch") c.disc_batch = parse_number<int>(key, value);
  else if (key == "eval_every") c.eval_every = parse_number<int>(key, value);
  else if (key == "eval_episodes") c.eval_episodes = parse_number<int>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "target_frac") c.target_frac = parse_number<double>(key, value);
  else if (key == "center_observations") c.center_observations = parse_bool(key, value);
  else if (key == "record_wall_time") c.record_wall_time = parse_bool(key, value);
  else throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

void apply_config_text(TrainerConfig& config, std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

unsigned threads_from_environment() {
  const char* raw = std::getenv("AILSRS_THREADS");
  if (raw == nullptr || *raw == '\0') return std::max(1u, std::thread::hardware_concurrency());
  const std::string_view value(raw);
  unsigned n = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), n);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError("AILSRS_THREADS must be a non-negative integer");
  return n;
}

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial imitation learning with augmented random search over linear policies", "ailsrs"};
  app.require_subcommand(1);
  const auto env_check = CLI::IsMember(env_names());

  TrainExpertArgs te;
  auto* train_expert_sub = app.add_subcommand("train-expert", "Train an expert policy with plain ARS");
  train_expert_sub->add_option("--env", te.env, "Environment")->required()->check(env_check);
  train_expert_sub->add_option("--iters", te.iters, "ARS iterations")->check(CLI::PositiveNumber);
  train_expert_sub->add_option("--n-dirs", te.n_dirs, "Directions per iteration")->check(CLI::PositiveNumber);
  train_expert_sub->add_option("--seed", te.seed, "Root seed");
  train_expert_sub->add_option("--config", te.config, "key = value config file");
  train_expert_sub->add_option("--out", te.out, "Output policy file")->required();

  RecordArgs rec;
  auto* record_sub = app.add_subcommand("record", "Record demonstrations from a policy");
  record_sub->add_option("--env", rec.env, "Environment")->required()->check(env_check);
  record_sub->add_option("--policy", rec.policy, "Policy file")->required();
  record_sub->add_option("--episodes", rec.episodes, "Episodes to record")->check(CLI::PositiveNumber);
  record_sub->add_option("--seed", rec.seed, "Root seed");
  record_sub->add_option("--out", rec.out, "Output demonstrations file")->required();

  BcArgs bc;
  auto* bc_sub = app.add_subcommand("bc", "Behavior cloning from demonstrations");
  bc_sub->add_option("--demos", bc.demos, "Demonstrations file")->required();
  bc_sub->add_option("--out", bc.out, "Output policy file")->required();
  auto* ridge_opt = bc_sub->add_option("--ridge", bc.ridge, "Closed-form least squares with this ridge");
  auto* epochs_opt = bc_sub->add_option("--epochs", bc.epochs, "Adam epochs");
  auto* lr_opt = bc_sub->add_option("--lr", bc.lr, "Adam learning rate");
  auto* batch_opt = bc_sub->add_option("--batch-size", bc.batch_size, "Minibatch size (0 = full batch)");
  bc_sub->add_option("--seed", bc.seed, "Seed for minibatch shuffling");
  bc_sub->add_flag("--centered", bc.centered, "Mean-subtract states in the normalizer");
  ridge_opt->excludes(epochs_opt)->excludes(lr_opt)->excludes(batch_opt);

  TrainArgs tr;
  auto* train_sub = app.add_subcommand("train", "Adversarial imitation from demonstrations");
  train_sub->add_option("--env", tr.env, "Environment")->required()->check(env_check);
  train_sub->add_option("--demos", tr.demos, "Demonstrations file")->required();
  train_sub->add_option("--config", tr.config, "key = value config file");
  train_sub->add_option("--init", tr.init, "Initial policy file (e.g. from bc)");
  train_sub->add_option("--out", tr.out, "Output policy file")->required();
  train_sub->add_option("--metrics", tr.metrics, "Metrics CSV output");
  train_sub->add_option("--disc-out", tr.disc_out, "Discriminator checkpoint output");
  train_sub->add_option("--seed", tr.seed, "Root seed");
  train_sub->add_option("--target-frac", tr.target_frac, "Stop at this fraction of the expert return");
  train_sub->add_option("--iters", tr.iters, "Maximum iterations")->check(CLI::PositiveNumber);
  train_sub->add_option("--n-dirs", tr.n_dirs, "Directions per iteration")->check(CLI::PositiveNumber);
  train_sub->add_flag("--record-wall-time", tr.wall_time, "Fill the wall_ms metrics column");

  EvalArgs ev;
  auto* eval_sub = app.add_subcommand("eval", "Evaluate a policy on the environment reward");
  eval_sub->add_option("--env", ev.env, "Environment")->required()->check(env_check);
  eval_sub->add_option("--policy", ev.policy, "Policy file")->required();
  eval_sub->add_option("--episodes", ev.episodes, "Episodes")->check(CLI::PositiveNumber);
  eval_sub->add_option("--seed", ev.seed, "Root seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_expert_sub) return train_expert_cmd(te, out);
    if (*record_sub) return record_cmd(rec, out);
    if (*bc_sub) return bc_cmd(bc, out);
    if (*train_sub) return train_cmd(tr, out);
    if (*eval_sub) return eval_cmd(ev, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ailsrs::cli
