#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bwe/dsp/waveform.hpp"
#include "bwe/eval/metrics.hpp"

namespace bwe {

enum class Metric { Acc, Snr, SnrV, SnrU, Lsd, LsdV, LsdU };
inline constexpr std::array<Metric, 7> kAllMetrics{Metric::Acc, Metric::Snr,  Metric::SnrV,
                                                   Metric::SnrU, Metric::Lsd, Metric::LsdV,
                                                   Metric::LsdU};
const char* metric_name(Metric m);  // csv column name

struct UtteranceMetrics {
  std::string id;
  std::array<std::optional<double>, 7> values;  // indexed by Metric

  std::optional<double> get(Metric m) const { return values[static_cast<std::size_t>(m)]; }
  void set(Metric m, std::optional<double> v) { values[static_cast<std::size_t>(m)] = v; }
};

struct MetricSummary {
  std::size_t n = 0;
  std::optional<double> mean;
  // 95% two-sided Student-t half-width; absent for fewer than two values.
  std::optional<double> half_width;
};

struct EvalOptions {
  LsdConfig lsd;
  double snr_cap_db = kSnrCapDb;
};

// All metrics of one utterance. Voicing is decided on the reference with
// the LSD framing; accuracy compares the mu-law levels of both signals.
UtteranceMetrics evaluate_utterance(const std::string& id, const Waveform& reference,
                                    const Waveform& degraded, const EvalOptions& opts = {});

class MetricsReport {
 public:
  void add(UtteranceMetrics row) { rows_.push_back(std::move(row)); }
  const std::vector<UtteranceMetrics>& rows() const { return rows_; }

  // Mean and confidence over utterances where the metric is present.
  MetricSummary summary(Metric m) const;

  // Aligned table with a mean row and a 95% CI row; PESQ is listed as n/a.
  std::string text() const;
  // Header `id,acc,snr,snr_v,snr_u,lsd,lsd_v,lsd_u`, one row per utterance
  // and a final `mean` row. Absent values are empty fields.
  std::string csv() const;

 private:
  std::vector<UtteranceMetrics> rows_;
};

// Evaluates pairs on up to `threads` workers; rows keep input order.
MetricsReport evaluate_corpus(const std::vector<std::string>& ids,
                              const std::vector<Waveform>& references,
                              const std::vector<Waveform>& degraded, const EvalOptions& opts,
                              int threads = 1);

}  // namespace bwe
