#include "ailsrs/demo_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ailsrs {
namespace {

using Json = nlohmann::ordered_json;

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

// Decoding helpers carry a context string for error messages.
double real_from(const Json& j, const std::string& where) {
  if (j.is_null()) throw IoError(IoErrorKind::kNonFinite, where + ": non-finite value");
  if (!j.is_number()) throw IoError(IoErrorKind::kParse, where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw IoError(IoErrorKind::kNonFinite, where + ": non-finite value");
  return x;
}

Vector vector_from(const Json& j, Eigen::Index expected_len, const std::string& where) {
  if (!j.is_array()) throw IoError(IoErrorKind::kParse, where + ": expected an array");
  if (expected_len >= 0 && static_cast<Eigen::Index>(j.size()) != expected_len)
    throw IoError(IoErrorKind::kDimension, where + ": expected length " + std::to_string(expected_len) + ", got " +
                                               std::to_string(j.size()));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = real_from(j[k], where);
  return v;
}

Matrix matrix_from(const Json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (!j.is_array()) throw IoError(IoErrorKind::kParse, where + ": expected an array of rows");
  if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows)
    throw IoError(IoErrorKind::kDimension,
                  where + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r)
    m.row(static_cast<Eigen::Index>(r)) = vector_from(j[r], cols, where + " row " + std::to_string(r)).transpose();
  return m;
}

template <typename T>
T field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw IoError(IoErrorKind::kParse, where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoErrorKind::kParse, where + ": field '" + key + "': " + e.what());
  }
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw IoError(IoErrorKind::kParse, where + ": missing field '" + key + "'");
  return obj.at(key);
}

void check_version(const Json& obj, const std::string& where) {
  const int version = field<int>(obj, "format_version", where);
  if (version != kFormatVersion)
    throw IoError(IoErrorKind::kVersion, where + ": unsupported format_version " + std::to_string(version));
}

Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoErrorKind::kParse, where + ": " + e.what());
  }
}

Eigen::Index positive_dim(const Json& obj, const char* key, const std::string& where) {
  const auto v = field<std::int64_t>(obj, key, where);
  if (v < 1) throw IoError(IoErrorKind::kDimension, where + ": " + key + " must be >= 1");
  return static_cast<Eigen::Index>(v);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError(IoErrorKind::kIo, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Trajectories

Matrix state_action_rows(const TrajectorySet& set) {
  Eigen::Index total = 0;
  for (const auto& t : set.trajectories) total += t.length();
  Matrix rows(total, set.state_dim + set.action_dim);
  Eigen::Index offset = 0;
  for (const auto& t : set.trajectories) {
    rows.middleRows(offset, t.length()) << t.states, t.actions;
    offset += t.length();
  }
  return rows;
}

double mean_env_return(const TrajectorySet& set) {
  if (set.trajectories.empty()) throw std::invalid_argument("mean_env_return: empty trajectory set");
  double total = 0.0;
  for (const auto& t : set.trajectories) total += t.env_rewards.sum();
  return total / static_cast<double>(set.trajectories.size());
}

TrajectorySet record(const LinearPolicy<double>& policy, const ObservationNormalizer<double>& normalizer,
                     const EnvSpec& spec, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("record: episodes must be >= 1");
  TrajectorySet set{spec.name, spec.state_dim, spec.action_dim, {}};
  set.trajectories.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng = rng_new(seed, {stream::kEvaluation, static_cast<std::uint64_t>(ep)});
    set.trajectories.push_back(rollout(spec, policy, normalizer, RewardSource::environment(), rng, true).trajectory);
  }
  return set;
}

std::string format_trajectories(const TrajectorySet& set) {
  Json meta;
  meta["format_version"] = kFormatVersion;
  meta["env"] = set.env_name;
  meta["state_dim"] = set.state_dim;
  meta["action_dim"] = set.action_dim;
  meta["episodes"] = set.trajectories.size();
  std::string out = meta.dump() + "\n";
  for (const auto& t : set.trajectories) {
    if (!t.states.allFinite() || !t.actions.allFinite() || !t.env_rewards.allFinite())
      throw IoError(IoErrorKind::kNonFinite, "format_trajectories: trajectory contains non-finite values");
    Json line;
    line["states"] = to_json(t.states);
    line["actions"] = to_json(t.actions);
    line["env_rewards"] = to_json(t.env_rewards);
    out += line.dump();
    out += "\n";
  }
  return out;
}

TrajectorySet parse_trajectories(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw IoError(IoErrorKind::kParse, "line 1: missing metadata");
  const Json meta = parse_json(line, "line 1");
  check_version(meta, "line 1");
  TrajectorySet set;
  set.env_name = field<std::string>(meta, "env", "line 1");
  set.state_dim = positive_dim(meta, "state_dim", "line 1");
  set.action_dim = positive_dim(meta, "action_dim", "line 1");
  const auto episodes = field<std::int64_t>(meta, "episodes", "line 1");
  if (episodes < 1) throw IoError(IoErrorKind::kDimension, "line 1: episodes must be >= 1");

  for (std::int64_t ep = 0; ep < episodes; ++ep) {
    const std::string where = "line " + std::to_string(ep + 2);
    if (!std::getline(in, line) || line.empty())
      throw IoError(IoErrorKind::kParse, where + ": missing trajectory (file truncated)");
    const Json obj = parse_json(line, where);
    if (!obj.is_object()) throw IoError(IoErrorKind::kParse, where + ": expected a trajectory object");
    Trajectory t;
    t.states = matrix_from(member(obj, "states", where), -1, set.state_dim, where + " states");
    const Eigen::Index length = t.states.rows();
    if (length < 1) throw IoError(IoErrorKind::kDimension, where + ": empty trajectory");
    t.actions =
        matrix_from(member(obj, "actions", where), length, set.action_dim, where + " actions");
    t.env_rewards =
        vector_from(member(obj, "env_rewards", where), length, where + " env_rewards");
    set.trajectories.push_back(std::move(t));
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw IoError(IoErrorKind::kParse, "trailing data after " + std::to_string(episodes) + " trajectories");
  }
  return set;
}

void save_trajectories(const TrajectorySet& set, const std::filesystem::path& path) {
  write_text_file(path, format_trajectories(set));
}

TrajectorySet load_trajectories(const std::filesystem::path& path) {
  try {
    return parse_trajectories(read_text_file(path));
  } catch (const IoError& e) {
    if (e.kind() == IoErrorKind::kIo) throw;
    throw IoError(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Policy

std::string format_policy(const PolicyFile& file) {
  const auto& norm = file.normalizer;
  if (!file.policy.theta.allFinite() || !norm.stats.mean.allFinite() || !norm.stats.m2.allFinite())
    throw IoError(IoErrorKind::kNonFinite, "format_policy: non-finite parameters");
  Json j;
  j["format_version"] = kFormatVersion;
  j["env"] = file.env_name;
  j["state_dim"] = file.policy.state_dim();
  j["action_dim"] = file.policy.action_dim();
  j["theta"] = to_json(file.policy.theta);
  j["mu"] = to_json(norm.stats.mean);
  j["var"] = to_json(norm.stats.variance());
  j["count"] = norm.stats.count;
  j["centered"] = norm.centered;
  // Raw sum of squared deviations, so reloaded statistics resume bit-exactly.
  j["m2"] = to_json(norm.stats.m2);
  return j.dump() + "\n";
}

PolicyFile parse_policy(const std::string& text) {
  const std::string where = "policy";
  const Json j = parse_json(text, where);
  check_version(j, where);
  PolicyFile file;
  file.env_name = field<std::string>(j, "env", where);
  const Eigen::Index n = positive_dim(j, "state_dim", where);
  const Eigen::Index p = positive_dim(j, "action_dim", where);
  file.policy = LinearPolicy<double>(matrix_from(member(j, "theta", where), p, n, "theta"));
  const auto count = field<std::int64_t>(j, "count", where);
  if (count < 0) throw IoError(IoErrorKind::kDimension, where + ": count must be >= 0");
  RunningStats<double> stats(n);
  stats.count = count;
  stats.mean = vector_from(member(j, "mu", where), n, "mu");
  const Vector var = vector_from(member(j, "var", where), n, "var");
  if ((var.array() < 0.0).any()) throw IoError(IoErrorKind::kDimension, where + ": negative variance");
  stats.m2 = j.contains("m2") ? vector_from(j.at("m2"), n, "m2") : Vector(var * static_cast<double>(count));
  file.normalizer.stats = std::move(stats);
  file.normalizer.centered = j.contains("centered") ? field<bool>(j, "centered", where) : true;
  return file;
}

void save_policy(const PolicyFile& file, const std::filesystem::path& path) {
  write_text_file(path, format_policy(file));
}

PolicyFile load_policy(const std::filesystem::path& path) { return parse_policy(read_text_file(path)); }

PolicyFile load_policy(const std::filesystem::path& path, const EnvSpec& expected) {
  PolicyFile file = load_policy(path);
  if (file.env_name != expected.name || file.policy.state_dim() != expected.state_dim ||
      file.policy.action_dim() != expected.action_dim)
    throw IoError(IoErrorKind::kEnvMismatch, "policy '" + path.string() + "' is for " + file.env_name + " (" +
                                                 std::to_string(file.policy.state_dim()) + "x" +
                                                 std::to_string(file.policy.action_dim()) + "), not " + expected.name);
  return file;
}

// ---------------------------------------------------------------------------
// Discriminator

std::string format_discriminator(const MlpDiscriminator<double>& disc) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["input_dim"] = disc.input_dim();
  j["hidden"] = disc.hidden();
  j["layers"] = Json::array({
      Json{{"rows", disc.w1.rows()}, {"cols", disc.w1.cols()}, {"weights", to_json(disc.w1)}, {"bias", to_json(disc.b1)}},
      Json{{"rows", disc.w2.rows()}, {"cols", disc.w2.cols()}, {"weights", to_json(disc.w2)}, {"bias", to_json(disc.b2)}},
      Json{{"rows", 1},
           {"cols", disc.w3.size()},
           {"weights", to_json(Matrix(disc.w3.transpose()))},
           {"bias", Json::array({disc.b3})}},
  });
  return j.dump() + "\n";
}

MlpDiscriminator<double> parse_discriminator(const std::string& text) {
  const std::string where = "discriminator";
  const Json j = parse_json(text, where);
  check_version(j, where);
  const Eigen::Index input = positive_dim(j, "input_dim", where);
  const Eigen::Index hidden = positive_dim(j, "hidden", where);
  const Json& layers = member(j, "layers", where);
  if (!layers.is_array() || layers.size() != 3) throw IoError(IoErrorKind::kParse, where + ": expected three layers");
  auto d = MlpDiscriminator<double>::zeros(input, hidden);
  d.w1 = matrix_from(member(layers[0], "weights", where), hidden, input, "layer 0 weights");
  d.b1 = vector_from(member(layers[0], "bias", where), hidden, "layer 0 bias");
  d.w2 = matrix_from(member(layers[1], "weights", where), hidden, hidden, "layer 1 weights");
  d.b2 = vector_from(member(layers[1], "bias", where), hidden, "layer 1 bias");
  d.w3 = matrix_from(member(layers[2], "weights", where), 1, hidden, "layer 2 weights").row(0).transpose();
  d.b3 = vector_from(member(layers[2], "bias", where), 1, "layer 2 bias")[0];
  return d;
}

void save_discriminator(const MlpDiscriminator<double>& disc, const std::filesystem::path& path) {
  write_text_file(path, format_discriminator(disc));
}

MlpDiscriminator<double> load_discriminator(const std::filesystem::path& path) {
  return parse_discriminator(read_text_file(path));
}

}  // namespace ailsrs
