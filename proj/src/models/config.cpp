#include "bwe/models/config.hpp"

#include <algorithm>

#include "bwe/error.hpp"

namespace bwe {

std::string to_string(ModelKind k) { return k == ModelKind::Srnn ? "srnn" : "hrnn"; }

std::string to_string(Strategy s) { return s == Strategy::Wideband ? "wb" : "hf"; }

std::string to_string(TierKind k) {
  switch (k) {
    case TierKind::Sample: return "sample";
    case TierKind::Intermediate: return "intermediate";
    case TierKind::Top: return "top";
    case TierKind::Conditional: return "conditional";
  }
  return "?";
}

std::string to_string(ConditionSource c) {
  switch (c) {
    case ConditionSource::None: return "none";
    case ConditionSource::Mfcc: return "mfcc";
    case ConditionSource::External: return "external";
  }
  return "?";
}

ModelConfig ModelConfig::hrnn(std::vector<int> frame_sizes_top_down,
                              std::vector<int> concat_top_down, int hidden,
                              int embed_dim) {
  if (frame_sizes_top_down.size() != concat_top_down.size())
    throw ConfigError("frame size and concat lists differ in length");
  ModelConfig cfg;
  cfg.kind = ModelKind::Hrnn;
  cfg.hidden = hidden;
  cfg.embed_dim = embed_dim;
  const auto n = frame_sizes_top_down.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = n - 1 - i;  // bottom-up
    TierSpec t;
    t.frame_size = frame_sizes_top_down[src];
    t.concat = concat_top_down[src];
    t.hidden = hidden;
    if (i == 0) {
      t.kind = TierKind::Sample;
      t.layers = 2;
    } else {
      t.kind = i + 1 == n ? TierKind::Top : TierKind::Intermediate;
      t.layers = 1;
    }
    cfg.tiers.push_back(t);
  }
  return cfg;
}

ModelConfig ModelConfig::full_hrnn(int hidden, int embed_dim) {
  return hrnn({16, 4, 1}, {2, 2, 4}, hidden, embed_dim);
}

ModelConfig ModelConfig::full_srnn(int hidden, int embed_dim) {
  ModelConfig cfg;
  cfg.kind = ModelKind::Srnn;
  cfg.hidden = hidden;
  cfg.embed_dim = embed_dim;
  return cfg;
}

ModelConfig ModelConfig::full_chrnn(int condition_dim, double window_ms, int hidden,
                                     int embed_dim) {
  ModelConfig cfg = hrnn({160, 16, 4, 1}, {1, 2, 2, 4}, hidden, embed_dim);
  cfg.tiers.back().kind = TierKind::Conditional;
  cfg.condition = ConditionSource::External;
  cfg.condition_dim = condition_dim;
  cfg.condition_window_ms = window_ms;
  return cfg;
}

int ModelConfig::step_samples() const {
  return kind == ModelKind::Srnn || tiers.empty() ? 1 : tiers.back().frame_size;
}

int ModelConfig::lookahead_samples() const {
  if (kind == ModelKind::Srnn) return 0;
  int la = 0;
  for (const auto& t : tiers)
    if (t.kind != TierKind::Conditional) la = std::max(la, (t.concat - 1) * t.frame_size);
  return la;
}

void ModelConfig::validate() const {
  if (embed_dim <= 0) throw ConfigError("model.embed_dim must be positive");
  if (!(hf_gain >= 1.0)) throw ConfigError("model.hf_gain must be >= 1");
  if (kind == ModelKind::Srnn) {
    if (hidden <= 0 || srnn_lstm_layers <= 0 || srnn_ff_layers <= 0)
      throw ConfigError("SRNN widths and layer counts must be positive");
    if (condition != ConditionSource::None)
      throw ConfigError("SRNN does not take condition features");
    return;
  }
  const auto n = tiers.size();
  if (n < 2) throw ConfigError("HRNN needs at least two tiers");
  for (std::size_t k = 0; k < n; ++k) {
    const auto& t = tiers[k];
    const std::string where = "tier " + std::to_string(k + 1);
    if (t.frame_size <= 0 || t.concat <= 0 || t.hidden <= 0 || t.layers <= 0)
      throw ConfigError(where + ": sizes must be positive");
    if (k == 0) {
      if (t.kind != TierKind::Sample || t.frame_size != 1)
        throw ConfigError("tier 1 must be the sample tier with frame size 1");
      continue;
    }
    if (t.kind == TierKind::Sample)
      throw ConfigError(where + ": only the bottom tier may be a sample tier");
    const bool is_top = k + 1 == n;
    if (is_top && t.kind == TierKind::Intermediate)
      throw ConfigError(where + ": top tier must be 'top' or 'conditional'");
    if (!is_top && t.kind != TierKind::Intermediate)
      throw ConfigError(where + ": '" + to_string(t.kind) +
                        "' tier is only allowed at the top");
    const auto& below = tiers[k - 1];
    if (t.frame_size <= below.frame_size || t.frame_size % below.frame_size != 0)
      throw ConfigError(where + ": frame size " + std::to_string(t.frame_size) +
                        " must be a larger multiple of " +
                        std::to_string(below.frame_size));
  }
  if (conditional()) {
    if (top().concat != 1) throw ConfigError("conditional tier uses concat = 1");
    if (condition == ConditionSource::None || condition_dim <= 0)
      throw ConfigError("conditional tier needs a condition source and dimension");
    if (condition_window_ms < 0.0) throw ConfigError("condition window must be >= 0");
  } else if (condition != ConditionSource::None) {
    throw ConfigError("condition features configured without a conditional tier");
  }
}

double max_latency_ms(const ModelConfig& cfg, int sample_rate_hz) {
  if (cfg.kind == ModelKind::Srnn) return 0.0;
  int samples = 0;
  for (const auto& t : cfg.tiers)
    if (t.kind != TierKind::Conditional)
      samples = std::max(samples, t.concat * t.frame_size - 1);
  const double ms = 1000.0 * samples / sample_rate_hz;
  return cfg.conditional() ? std::max(ms, cfg.condition_window_ms) : ms;
}

}  // namespace bwe
