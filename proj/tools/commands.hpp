#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurolock/sl_eval.hpp"

namespace neurolock::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kReject = 4 };

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Config file (if any), then NEUROLOCK_SEED, then `--a.b=value` overrides.
nlohmann::json resolve_config(const std::string& config_file,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

struct SlxSummary {
  std::vector<PitfallRow> mean_rows;              // averaged over seeds
  std::vector<std::vector<PitfallRow>> per_seed;
  double far_authentication = 0.0;                // first authentication row, mean over seeds
  double far_classification = 0.0;                // first classification row, mean over seeds
  std::size_t seeds_authentication_lower = 0;
  bool leak_classification = false;               // true when any seed leaks
  bool leak_authentication = false;
};

/// Pitfall table over `seeds` seeds; data from the extracted features or
/// from fresh Gaussian clusters per seed.
SlxSummary run_slx(const nlohmann::json& cfg);

}  // namespace neurolock::cli
