#pragma once

#include "ailsrs/discriminator.hpp"
#include "ailsrs/envs.hpp"
#include "ailsrs/policy.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace ailsrs {

/// Expert demonstrations for one environment.
struct TrajectorySet {
  std::string env_name;
  Eigen::Index state_dim = 0;
  Eigen::Index action_dim = 0;
  std::vector<Trajectory> trajectories;

  std::size_t episodes() const { return trajectories.size(); }
  bool operator==(const TrajectorySet&) const = default;
};

/// All (state, action) pairs of the set as rows of [s, a].
Matrix state_action_rows(const TrajectorySet& set);

/// Mean summed environment reward of the stored trajectories.
double mean_env_return(const TrajectorySet& set);

/// `episodes` environment-reward rollouts with a frozen normalizer; episode k
/// uses the same stream as evaluation episode k of `seed`.
TrajectorySet record(const LinearPolicy<double>& policy, const ObservationNormalizer<double>& normalizer,
                     const EnvSpec& spec, int episodes, std::uint64_t seed);

enum class IoErrorKind { kIo, kParse, kVersion, kDimension, kNonFinite, kEnvMismatch };

class IoError : public std::runtime_error {
 public:
  IoError(IoErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  IoErrorKind kind() const { return kind_; }

 private:
  IoErrorKind kind_;
};

inline constexpr int kFormatVersion = 1;

// Line-oriented: a metadata object, then one trajectory object per line.
std::string format_trajectories(const TrajectorySet& set);
TrajectorySet parse_trajectories(const std::string& text);
void save_trajectories(const TrajectorySet& set, const std::filesystem::path& path);
TrajectorySet load_trajectories(const std::filesystem::path& path);

struct PolicyFile {
  std::string env_name;
  LinearPolicy<double> policy;
  ObservationNormalizer<double> normalizer;
};

std::string format_policy(const PolicyFile& file);
PolicyFile parse_policy(const std::string& text);
void save_policy(const PolicyFile& file, const std::filesystem::path& path);
PolicyFile load_policy(const std::filesystem::path& path);
/// Also rejects a policy whose env or dimensions differ from `expected`.
PolicyFile load_policy(const std::filesystem::path& path, const EnvSpec& expected);

std::string format_discriminator(const MlpDiscriminator<double>& disc);
MlpDiscriminator<double> parse_discriminator(const std::string& text);
void save_discriminator(const MlpDiscriminator<double>& disc, const std::filesystem::path& path);
MlpDiscriminator<double> load_discriminator(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ailsrs
