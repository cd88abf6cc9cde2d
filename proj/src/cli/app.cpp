#include <CLI11.hpp>

#include "bwe/cli/cli.hpp"
#include "bwe/error.hpp"

namespace bwe::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech bandwidth extension with hierarchical recurrent networks", "bwe"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: BWE_THREADS, else 1)");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a model from a config file");
  c_train->add_option("--config", train.config, "run config")->required();
  c_train->add_option("--out", train.out, "checkpoint to write")->required();

  ExtendArgs extend;
  auto* c_extend = app.add_subcommand("extend", "extend an 8 kHz WAV to 16 kHz");
  c_extend->add_option("--model", extend.model, "checkpoint")->required();
  c_extend->add_option("--in", extend.in, "narrowband WAV")->required();
  c_extend->add_option("--out", extend.out, "wideband WAV to write")->required();
  c_extend->add_option("--features", extend.features, "condition features for external-feature models");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "objective metrics of extended speech");
  c_eval->add_option("--ref", eval.ref, "reference manifest or directory")->required();
  c_eval->add_option("--deg", eval.deg, "directory of outputs named <id>.wav")->required();
  c_eval->add_option("--report", eval.report, "report path; CSV goes to <report>.csv")->required();
  c_eval->add_option("--config", eval.config, "run config with eval.* settings");

  FeaturesArgs feats;
  auto* c_feats = app.add_subcommand("features", "extract condition features from an 8 kHz WAV");
  c_feats->add_option("--in", feats.in, "narrowband WAV")->required();
  c_feats->add_option("--out", feats.out, "feature file to write")->required();
  c_feats->add_option("--type", feats.type, "feature type")->default_val("mfcc");

  LatencyArgs lat;
  auto* c_lat = app.add_subcommand("latency", "print the model's maximal latency");
  c_lat->add_option("--config", lat.config, "run config")->required();

  // CLI11 parses argv-style input in reverse order.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    eval.threads = resolve_threads(threads);
    if (*c_train) return cmd_train(train, out);
    if (*c_extend) return cmd_extend(extend, out);
    if (*c_eval) return cmd_eval(eval, out);
    if (*c_feats) return cmd_features(feats, out);
    if (*c_lat) return cmd_latency(lat, out);
  } catch (const std::exception& e) {
    err << "bwe: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kConfigError;
}

}  // namespace bwe::cli
