#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace hidden {

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs one subcommand (simulate, fit, bins, predict, backtest, chainladder)
/// and writes its artifacts into `out_dir`. Returns the JSON summary that was
/// also written to disk. Throws ConfigError / DataError / FitError.
nlohmann::json run_command(const std::string& command, const nlohmann::json& config,
                           const std::string& out_dir);

/// Exit-code mapping used by the CLI: 0 ok, 2 config, 3 data, 4 fit.
int run_cli(int argc, char** argv);

}  // namespace hidden
