#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bwe::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kNumericError = 3 };

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct ExtendArgs {
  std::filesystem::path model;
  std::filesystem::path in;
  std::filesystem::path out;
  std::optional<std::filesystem::path> features;  // external conditions
};

struct EvalArgs {
  std::filesystem::path ref;  // manifest file or directory of WAVs
  std::filesystem::path deg;  // directory with <id>.wav
  std::filesystem::path report;  // text table; CSV goes to <report>.csv
  std::optional<std::filesystem::path> config;  // eval.* keys
  int threads = 1;
};

struct FeaturesArgs {
  std::filesystem::path in;
  std::filesystem::path out;
  std::string type = "mfcc";
};

struct LatencyArgs {
  std::filesystem::path config;
};

// Commands throw bwe::Error subclasses; run() maps them to exit codes.
int cmd_train(const TrainArgs& args, std::ostream& out);
int cmd_extend(const ExtendArgs& args, std::ostream& out);
int cmd_eval(const EvalArgs& args, std::ostream& out);
int cmd_features(const FeaturesArgs& args, std::ostream& out);
int cmd_latency(const LatencyArgs& args, std::ostream& out);

int exit_code_for(const std::exception& e);

// --threads if given, else BWE_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

// Full command line: `bwe <command> [options]`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bwe::cli
