#include "bwe/eval/report.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "bwe/dsp/mulaw.hpp"
#include "bwe/dsp/vuv.hpp"
#include "bwe/error.hpp"

namespace bwe {

namespace {

std::string num(std::optional<double> v, const char* format = "%.4f") {
  if (!v) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, format, *v);
  return buf;
}

}  // namespace

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Acc: return "acc";
    case Metric::Snr: return "snr";
    case Metric::SnrV: return "snr_v";
    case Metric::SnrU: return "snr_u";
    case Metric::Lsd: return "lsd";
    case Metric::LsdV: return "lsd_v";
    case Metric::LsdU: return "lsd_u";
  }
  return "?";
}

UtteranceMetrics evaluate_utterance(const std::string& id, const Waveform& ref,
                                    const Waveform& deg, const EvalOptions& opts) {
  UtteranceMetrics u;
  u.id = id;
  u.set(Metric::Acc, accuracy(mulaw_encode(deg), mulaw_encode(ref)));
  u.set(Metric::Snr, snr_db(ref, deg, opts.snr_cap_db));
  u.set(Metric::Lsd, lsd_db(ref, deg, opts.lsd));
  const auto voiced = frame_vuv(ref, opts.lsd.frame_len, opts.lsd.frame_shift);
  const auto split = split_metrics(ref, deg, voiced, opts.lsd, opts.snr_cap_db);
  u.set(Metric::SnrV, split.snr_v);
  u.set(Metric::SnrU, split.snr_u);
  u.set(Metric::LsdV, split.lsd_v);
  u.set(Metric::LsdU, split.lsd_u);
  return u;
}

MetricSummary MetricsReport::summary(Metric m) const {
  std::vector<double> v;
  for (const auto& r : rows_)
    if (auto x = r.get(m)) v.push_back(*x);
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    const boost::math::students_t dist(static_cast<double>(v.size() - 1));
    s.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

std::string MetricsReport::csv() const {
  std::string out = "id";
  for (Metric m : kAllMetrics) out += std::string(",") + metric_name(m);
  out += "\n";
  auto line = [&](const std::string& id, auto value_of) {
    out += id;
    for (Metric m : kAllMetrics) out += "," + num(value_of(m));
    out += "\n";
  };
  for (const auto& r : rows_) line(r.id, [&](Metric m) { return r.get(m); });
  line("mean", [&](Metric m) { return summary(m).mean; });
  return out;
}

std::string MetricsReport::text() const {
  const char* headers[] = {"Acc(%)", "SNR", "SNR-V", "SNR-U", "LSD", "LSD-V", "LSD-U", "PESQ"};
  std::size_t id_w = 4;
  for (const auto& r : rows_) id_w = std::max(id_w, r.id.size());
  std::string out;
  char buf[64];
  auto cell = [&](const std::string& s) {
    std::snprintf(buf, sizeof buf, "%10s", s.c_str());
    out += buf;
  };
  auto id_cell = [&](const std::string& s) {
    out += s + std::string(id_w + 2 - s.size(), ' ');
  };
  auto or_na = [](const std::string& s) { return s.empty() ? std::string("n/a") : s; };
  id_cell("id");
  for (const char* h : headers) cell(h);
  out += "\n" + std::string(id_w + 2 + 10 * std::size(headers), '-') + "\n";
  for (const auto& r : rows_) {
    id_cell(r.id);
    for (Metric m : kAllMetrics) cell(or_na(num(r.get(m), "%.2f")));
    cell("n/a");
    out += "\n";
  }
  id_cell("mean");
  for (Metric m : kAllMetrics) cell(or_na(num(summary(m).mean, "%.2f")));
  cell("n/a");
  out += "\n";
  id_cell("95% CI");
  for (Metric m : kAllMetrics) {
    const auto hw = summary(m).half_width;
    cell(hw ? "+-" + num(hw, "%.2f") : "n/a");
  }
  cell("n/a");
  out += "\n";
  return out;
}

MetricsReport evaluate_corpus(const std::vector<std::string>& ids,
                              const std::vector<Waveform>& refs,
                              const std::vector<Waveform>& degs, const EvalOptions& opts,
                              int threads) {
  if (ids.size() != refs.size() || refs.size() != degs.size())
    throw ParameterError("evaluate_corpus: ids, references and outputs differ in count");
  std::vector<UtteranceMetrics> rows(ids.size());
  std::vector<std::exception_ptr> errors(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < ids.size();) {
      try {
        rows[i] = evaluate_utterance(ids[i], refs[i], degs[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(n_workers, ids.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  MetricsReport report;
  for (auto& r : rows) report.add(std::move(r));
  return report;
}

}  // namespace bwe
