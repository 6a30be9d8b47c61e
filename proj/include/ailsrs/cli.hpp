#pragma once

#include "ailsrs/trainer.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ailsrs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sets one TrainerConfig field from its textual value; unknown keys and
/// ill-typed values throw ConfigError.
void apply_config_value(TrainerConfig& config, std::string_view key, std::string_view value);

/// Applies `key = value` lines; `#` starts a comment.
void apply_config_text(TrainerConfig& config, std::string_view text);

/// Worker count from AILSRS_THREADS (0 = serial); hardware concurrency when unset.
unsigned threads_from_environment();

/// Shortest round-trip decimal.
std::string format_real(double x);

/// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ailsrs::cli
