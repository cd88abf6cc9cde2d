#include <charconv>
#include <cstdlib>
#include <map>
#include <set>

#include "bwe/cli/cli.hpp"
#include "bwe/data/corpus.hpp"
#include "bwe/data/io.hpp"
#include "bwe/dsp/fir.hpp"
#include "bwe/dsp/mfcc.hpp"
#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"
#include "bwe/eval/report.hpp"
#include "bwe/train/trainer.hpp"

namespace bwe::cli {

namespace fs = std::filesystem;

namespace {

void require_output_dir(const fs::path& out) {
  const auto dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw DataError("output directory does not exist: " + dir.string());
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Reference utterances as (id, path), from a manifest or a directory.
std::vector<std::pair<std::string, fs::path>> reference_list(const fs::path& ref) {
  std::vector<std::pair<std::string, fs::path>> out;
  if (fs::is_directory(ref)) {
    for (const auto& e : fs::directory_iterator(ref))
      if (e.is_regular_file() && e.path().extension() == ".wav")
        out.emplace_back(e.path().stem().string(), e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw DataError("no .wav files in " + ref.string());
  } else {
    for (const auto& e : load_manifest(ref, "reference").entries) out.emplace_back(e.id, e.wav);
    if (out.empty()) throw DataError("empty manifest " + ref.string());
  }
  return out;
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out) {
  const RunConfig cfg = RunConfig::load(args.config);
  if (cfg.data.train.empty()) throw ConfigError("data.train is required for training");
  if (cfg.data.valid.empty()) throw ConfigError("data.valid is required for training");
  require_output_dir(args.out);
  // Every referenced file is checked before any work starts.
  const auto train_m = load_manifest(cfg.data.train, "train");
  const auto valid_m = load_manifest(cfg.data.valid, "valid");
  const auto train_set = load_corpus(train_m, cfg.model);
  const auto valid_set = load_corpus(valid_m, cfg.model);
  out << "training " << to_string(cfg.model.kind) << " on " << train_set.size()
      << " utterances, validating on " << valid_set.size() << "\n";
  const auto result = train(cfg, train_set, valid_set, [&](const EpochStats& s) {
    out << "epoch " << s.epoch << "  train_ce " << fixed(s.train_ce, 4) << "  valid_ce "
        << fixed(s.valid_ce, 4) << "  valid_acc " << fixed(s.valid_accuracy, 2) << "%"
        << (s.improved ? "  *" : "") << "\n"
        << std::flush;
  });
  save_checkpoint(args.out, result.best);
  out << "best epoch " << result.best.epoch << ", valid_ce " << fixed(result.best.best_valid_ce, 4)
      << ", wrote " << args.out.string() << "\n";
  return kOk;
}

int cmd_extend(const ExtendArgs& args, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(args.model);
  const ModelConfig& mc = ck.config.model;
  require_output_dir(args.out);
  const Waveform nb = load_wav(args.in);
  if (nb.sample_rate() != kNarrowbandRate)
    throw DataError(args.in.string() + ": expected an 8 kHz narrowband WAV, got " +
                    std::to_string(nb.sample_rate()) + " Hz");
  if (nb.empty()) throw DataError(args.in.string() + ": no samples");
  std::optional<ConditionTrack> cond;
  switch (mc.condition) {
    case ConditionSource::None: break;
    case ConditionSource::Mfcc: cond = mfcc(nb, MfccConfig::narrowband()); break;
    case ConditionSource::External:
      if (!args.features)
        throw DataError("model is conditioned on external features; pass --features");
      cond = load_features(*args.features);
      break;
  }
  if (cond && cond->empty()) throw DataError("input too short for condition features");
  const auto model = ck.make_model<float>();
  const QuantizedWaveform x = mulaw_encode(upsample2(nb));
  const QuantizedWaveform y = generate(*model, x, cond ? &*cond : nullptr);
  const Waveform wide = reconstruct_wideband(nb, y, mc.strategy, mc.hf_gain);
  save_wav(args.out, wide);
  out << "wrote " << args.out.string() << " (" << wide.size() << " samples at 16 kHz)\n";
  return kOk;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
  EvalOptions opts;
  if (args.config) {
    const RunConfig cfg = RunConfig::load(*args.config);
    opts.lsd = {static_cast<std::size_t>(cfg.eval.lsd_frame),
                static_cast<std::size_t>(cfg.eval.lsd_shift), cfg.eval.lsd_epsilon};
    opts.snr_cap_db = cfg.eval.snr_cap_db;
  }
  require_output_dir(args.report);
  if (!fs::is_directory(args.deg)) throw DataError("not a directory: " + args.deg.string());
  const auto refs = reference_list(args.ref);

  std::set<std::string> ref_ids, deg_ids;
  for (const auto& [id, p] : refs) ref_ids.insert(id);
  for (const auto& e : fs::directory_iterator(args.deg))
    if (e.is_regular_file() && e.path().extension() == ".wav")
      deg_ids.insert(e.path().stem().string());
  std::string problems;
  for (const auto& id : ref_ids)
    if (!deg_ids.count(id)) problems += "\n  missing output for '" + id + "'";
  for (const auto& id : deg_ids)
    if (!ref_ids.count(id)) problems += "\n  output '" + id + "' has no reference";
  if (!problems.empty()) throw DataError("utterance ids do not match:" + problems);

  std::vector<std::string> ids;
  std::vector<Waveform> ref_w, deg_w;
  for (const auto& [id, p] : refs) {
    ids.push_back(id);
    ref_w.push_back(load_wav(p));
    deg_w.push_back(load_wav(args.deg / (id + ".wav")));
    if (ref_w.back().sample_rate() != deg_w.back().sample_rate() ||
        ref_w.back().size() != deg_w.back().size())
      throw DataError("utterance '" + id + "': reference and output differ in rate or length");
  }
  const auto report = evaluate_corpus(ids, ref_w, deg_w, opts, args.threads);
  const std::string text = report.text(), csv = report.csv();
  write_file_atomic(args.report, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  fs::path csv_path = args.report;
  csv_path += ".csv";
  write_file_atomic(csv_path, {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  out << text;
  return kOk;
}

int cmd_features(const FeaturesArgs& args, std::ostream& out) {
  if (args.type != "mfcc") throw ConfigError("unsupported feature type '" + args.type + "'");
  require_output_dir(args.out);
  const Waveform w = load_wav(args.in);
  if (w.sample_rate() != kNarrowbandRate)
    throw DataError(args.in.string() + ": expected 8 kHz input, got " +
                    std::to_string(w.sample_rate()) + " Hz");
  const ConditionTrack t = mfcc(w, MfccConfig::narrowband());
  if (t.empty()) throw DataError(args.in.string() + ": too short for one analysis frame");
  save_features(args.out, t);
  out << "wrote " << t.n_frames() << " frames of dimension " << t.dim << " to "
      << args.out.string() << "\n";
  return kOk;
}

int cmd_latency(const LatencyArgs& args, std::ostream& out) {
  const RunConfig cfg = RunConfig::load(args.config);
  out << "max latency: " << shortest(max_latency_ms(cfg.model, kWidebandRate)) << " ms\n";
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
  return kDataError;
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("BWE_THREADS"); env && *env) {
    int n = 0;
    const std::string s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || p != s.data() + s.size() || n < 1)
      throw ConfigError("BWE_THREADS must be a positive integer, got '" + s + "'");
    return n;
  }
  return 1;
}

}  // namespace bwe::cli
