#pragma once

#include <ostream>
#include <stdexcept>
#include <string>

#include "run_config.hpp"

namespace gradlens::cli {

// Missing, unreadable or incompatible weights; maps to exit code 3.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitData = 2, kExitModel = 3, kExitUsage = 4 };

void cmd_preprocess(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_explain(const RunConfig& config, std::ostream& log);
void cmd_bench(const RunConfig& config, std::ostream& log);

// Runs one subcommand and maps its failure to an exit code, printing the
// message to `err`.
int run_command(const std::string& name, const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace gradlens::cli
