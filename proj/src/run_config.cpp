#include "bwe/run_config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "bwe/data/io.hpp"
#include "bwe/dsp/mfcc.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace fs = std::filesystem;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "model.kind",          "model.frame_sizes",      "model.concat",
      "model.hidden",        "model.embed_dim",        "model.sample_ff_layers",
      "model.lstm_layers",   "model.srnn_lstm_layers", "model.srnn_ff_layers",
      "model.strategy",      "model.hf_gain",          "model.forget_bias",
      "model.condition",     "model.condition_dim",    "model.condition_window_ms",
      "train.lr",            "train.batch_size",       "train.max_epochs",
      "train.patience",      "train.seed",             "train.clip_norm",
      "train.chunk_len",     "data.train",             "data.valid",
      "data.test",           "eval.lsd_frame",         "eval.lsd_shift",
      "eval.snr_cap_db",     "eval.lsd_epsilon"};
  return keys;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key + ": cannot parse '" + v + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError(key + ": value must be finite");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw ConfigError(key + ": empty list element");
    out.push_back(parse_number<int>(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

// Typed access that remembers what was consumed.
class Reader {
 public:
  explicit Reader(const TextConfig& t) : t_(t) {}
  template <typename T>
  void num(const std::string& key, T& out) {
    if (auto v = t_.get(key)) out = parse_number<T>(key, *v);
  }
  void str(const std::string& key, std::string& out) {
    if (auto v = t_.get(key)) out = *v;
  }
  std::optional<std::string> opt(const std::string& key) const { return t_.get(key); }

 private:
  const TextConfig& t_;
};

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("train.lr must be >= 0");
  if (batch_size <= 0) throw ConfigError("train.batch_size must be positive");
  if (max_epochs <= 0) throw ConfigError("train.max_epochs must be positive");
  if (patience <= 0 || patience > max_epochs)
    throw ConfigError("train.patience must be in [1, train.max_epochs]");
  if (!(clip_norm > 0.0)) throw ConfigError("train.clip_norm must be positive");
  if (chunk_len <= 0) throw ConfigError("train.chunk_len must be positive");
}

void EvalConfig::validate() const {
  if (lsd_frame <= 0 || lsd_shift <= 0 || lsd_shift > lsd_frame)
    throw ConfigError("eval LSD framing needs 0 < lsd_shift <= lsd_frame");
  if (!(lsd_epsilon > 0.0)) throw ConfigError("eval.lsd_epsilon must be positive");
  if (!(snr_cap_db > 0.0)) throw ConfigError("eval.snr_cap_db must be positive");
}

ModelConfig RunConfig::desk_model() { return ModelConfig::full_hrnn(32, 16); }

RunConfig RunConfig::full() {
  RunConfig r;
  r.model = ModelConfig::full_hrnn();
  r.train.batch_size = 64;
  return r;
}

RunConfig RunConfig::from_text(const TextConfig& text, const fs::path& base_dir) {
  for (const auto& [k, v] : text.entries())
    if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");
  Reader r(text);
  RunConfig rc;

  std::string kind = "hrnn";
  r.str("model.kind", kind);
  int hidden = 32, embed = 16, ff_layers = 2, lstm_layers = 1;
  r.num("model.hidden", hidden);
  r.num("model.embed_dim", embed);
  r.num("model.sample_ff_layers", ff_layers);
  r.num("model.lstm_layers", lstm_layers);
  std::string cond = "none";
  r.str("model.condition", cond);
  ModelConfig& m = rc.model;
  if (kind == "srnn") {
    m = ModelConfig::full_srnn(hidden, embed);
    for (const char* k : {"model.frame_sizes", "model.concat"})
      if (text.has(k)) throw ConfigError(std::string(k) + " does not apply to model.kind = srnn");
  } else if (kind == "hrnn") {
    std::vector<int> sizes{16, 4, 1}, concat{2, 2, 4};
    if (auto v = r.opt("model.frame_sizes")) sizes = parse_int_list("model.frame_sizes", *v);
    if (auto v = r.opt("model.concat")) concat = parse_int_list("model.concat", *v);
    m = ModelConfig::hrnn(sizes, concat, hidden, embed);
    m.tiers.front().layers = ff_layers;
    for (std::size_t k = 1; k < m.tiers.size(); ++k) m.tiers[k].layers = lstm_layers;
    if (cond != "none") m.tiers.back().kind = TierKind::Conditional;
  } else {
    throw ConfigError("model.kind must be 'hrnn' or 'srnn', got '" + kind + "'");
  }
  r.num("model.srnn_lstm_layers", m.srnn_lstm_layers);
  r.num("model.srnn_ff_layers", m.srnn_ff_layers);
  std::string strategy = "hf";
  r.str("model.strategy", strategy);
  if (strategy == "hf")
    m.strategy = Strategy::HighFrequency;
  else if (strategy == "wb")
    m.strategy = Strategy::Wideband;
  else
    throw ConfigError("model.strategy must be 'hf' or 'wb', got '" + strategy + "'");
  r.num("model.hf_gain", m.hf_gain);
  r.num("model.forget_bias", m.forget_bias);
  if (cond == "none") {
    m.condition = ConditionSource::None;
  } else if (cond == "mfcc") {
    const auto mc = MfccConfig::narrowband();
    m.condition = ConditionSource::Mfcc;
    m.condition_dim = mc.dim();
    m.condition_window_ms = mc.window_ms();
  } else if (cond == "external") {
    m.condition = ConditionSource::External;
  } else {
    throw ConfigError("model.condition must be none, mfcc or external, got '" + cond + "'");
  }
  r.num("model.condition_dim", m.condition_dim);
  r.num("model.condition_window_ms", m.condition_window_ms);
  if (m.condition == ConditionSource::Mfcc && m.condition_dim != MfccConfig::narrowband().dim())
    throw ConfigError("model.condition_dim must be 39 for MFCC conditions");

  TrainConfig& t = rc.train;
  r.num("train.lr", t.lr);
  r.num("train.batch_size", t.batch_size);
  r.num("train.max_epochs", t.max_epochs);
  r.num("train.patience", t.patience);
  r.num("train.seed", t.seed);
  r.num("train.clip_norm", t.clip_norm);
  r.num("train.chunk_len", t.chunk_len);

  auto path = [&](const char* key, fs::path& out) {
    if (auto v = r.opt(key)) {
      out = fs::path(*v);
      if (!out.empty() && out.is_relative() && !base_dir.empty()) out = base_dir / out;
    }
  };
  path("data.train", rc.data.train);
  path("data.valid", rc.data.valid);
  path("data.test", rc.data.test);

  r.num("eval.lsd_frame", rc.eval.lsd_frame);
  r.num("eval.lsd_shift", rc.eval.lsd_shift);
  r.num("eval.snr_cap_db", rc.eval.snr_cap_db);
  r.num("eval.lsd_epsilon", rc.eval.lsd_epsilon);
  rc.validate();
  return rc;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  const auto bytes = read_file(path);
  return from_text(TextConfig::parse(std::string(bytes.begin(), bytes.end()), path.string()),
                   path.parent_path());
}

TextConfig RunConfig::to_text() const {
  TextConfig t;
  const ModelConfig& m = model;
  t.set("model.kind", to_string(m.kind));
  if (m.kind == ModelKind::Hrnn) {
    std::vector<int> sizes, concat;
    for (auto it = m.tiers.rbegin(); it != m.tiers.rend(); ++it) {
      sizes.push_back(it->frame_size);
      concat.push_back(it->concat);
    }
    t.set("model.frame_sizes", join(sizes));
    t.set("model.concat", join(concat));
    t.set("model.sample_ff_layers", std::to_string(m.tiers.front().layers));
    t.set("model.lstm_layers", std::to_string(m.tiers.back().layers));
  }
  t.set("model.hidden", std::to_string(m.kind == ModelKind::Hrnn ? m.tiers.front().hidden : m.hidden));
  t.set("model.embed_dim", std::to_string(m.embed_dim));
  t.set("model.srnn_lstm_layers", std::to_string(m.srnn_lstm_layers));
  t.set("model.srnn_ff_layers", std::to_string(m.srnn_ff_layers));
  t.set("model.strategy", to_string(m.strategy));
  t.set("model.hf_gain", fmt(m.hf_gain));
  t.set("model.forget_bias", fmt(m.forget_bias));
  t.set("model.condition", to_string(m.condition));
  t.set("model.condition_dim", std::to_string(m.condition_dim));
  t.set("model.condition_window_ms", fmt(m.condition_window_ms));
  t.set("train.lr", fmt(train.lr));
  t.set("train.batch_size", std::to_string(train.batch_size));
  t.set("train.max_epochs", std::to_string(train.max_epochs));
  t.set("train.patience", std::to_string(train.patience));
  t.set("train.seed", std::to_string(train.seed));
  t.set("train.clip_norm", fmt(train.clip_norm));
  t.set("train.chunk_len", std::to_string(train.chunk_len));
  if (!data.train.empty()) t.set("data.train", data.train.string());
  if (!data.valid.empty()) t.set("data.valid", data.valid.string());
  if (!data.test.empty()) t.set("data.test", data.test.string());
  t.set("eval.lsd_frame", std::to_string(eval.lsd_frame));
  t.set("eval.lsd_shift", std::to_string(eval.lsd_shift));
  t.set("eval.snr_cap_db", fmt(eval.snr_cap_db));
  t.set("eval.lsd_epsilon", fmt(eval.lsd_epsilon));
  return t;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  eval.validate();
  if (model.condition == ConditionSource::Mfcc &&
      model.top().frame_size != static_cast<int>(MfccConfig{}.frame_shift_samples))
    throw ConfigError("MFCC conditions need a conditional tier with frame size 160");
}

}  // namespace bwe
