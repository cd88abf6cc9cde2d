#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "bwe/dsp/fir.hpp"
#include "bwe/dsp/mulaw.hpp"
#include "bwe/error.hpp"
#include "bwe/eval/metrics.hpp"
#include "bwe/eval/report.hpp"
#include "signals.hpp"

using namespace bwe;
using bwe::testing::band_energy;
using bwe::testing::sine;
using bwe::testing::uniform_noise;

namespace {

Waveform wb(std::vector<double> x) { return Waveform(std::move(x), kWidebandRate); }

Waveform scaled(const Waveform& w, double g) {
  auto x = w.vec();
  for (auto& v : x) v *= g;
  return wb(std::move(x));
}

// Straight-line LSD: direct DFT per frame in long double.
double lsd_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t L = 512, S = 256, bins = 257;
  const std::size_t frames = (a.size() - L) / S + 1;
  long double total = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    long double acc = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<long double> A = 0, B = 0;
      for (std::size_t n = 0; n < L; ++n) {
        const long double w = 0.5L - 0.5L * std::cos(2 * std::numbers::pi_v<long double> * n / (L - 1));
        const auto e = std::polar(1.0L, -2 * std::numbers::pi_v<long double> * ((k * n) % L) / L);
        A += a[f * S + n] * w * e;
        B += b[f * S + n] * w * e;
      }
      const long double d = 20 * std::log10(std::abs(A) + 1e-10L) - 20 * std::log10(std::abs(B) + 1e-10L);
      acc += d * d;
    }
    total += std::sqrt(acc / bins);
  }
  return static_cast<double>(total / frames);
}

}  // namespace

TEST_SUITE("snr") {
  TEST_CASE("cap, silence and analytic noise power") {
    const auto x = wb(sine(440.0, 0.5, kWidebandRate, 16000));
    CHECK(snr_db(x, x) == kSnrCapDb);
    CHECK(snr_db(x, Waveform::zeros(x.size(), kWidebandRate)) == doctest::Approx(0.0));

    // 0.5-amplitude sine over whole periods: power 0.125. Uniform noise on
    // [-a, a]: power a^2 / 3.
    const std::size_t n = 160000;
    const double a = 0.05;
    auto ref = sine(1000.0, 0.5, kWidebandRate, n);
    auto noise = uniform_noise(n, a, 17);
    std::vector<double> deg(n);
    for (std::size_t i = 0; i < n; ++i) deg[i] = ref[i] + noise[i];
    const double analytic = 10.0 * std::log10(0.125 / (a * a / 3.0));
    CHECK(std::abs(snr_db(wb(ref), wb(deg)) - analytic) < 0.1);
  }

  TEST_CASE("scalar scaling gives -20 log10(delta)") {
    const auto x = wb(uniform_noise(5000, 0.8, 2));
    for (double delta : {0.5, 0.1, 0.01, 0.37, 0.999}) {
      // x (1 - delta) leaves error delta * x.
      CHECK(std::abs(snr_db(x, scaled(x, 1.0 - delta)) + 20.0 * std::log10(delta)) < 1e-9);
    }
  }

  TEST_CASE("mismatched inputs") {
    CHECK_THROWS_AS(snr_db(wb({0.1, 0.2}), wb({0.1})), ParameterError);
    CHECK_THROWS_AS(snr_db(wb({0.1}), Waveform({0.1}, kNarrowbandRate)), ParameterError);
  }
}

TEST_SUITE("lsd") {
  TEST_CASE("identity and halving") {
    const auto x = wb(uniform_noise(8000, 0.5, 3));
    CHECK(lsd_db(x, x) == 0.0);
    const auto frames = lsd_per_frame(x, scaled(x, 0.5));
    CHECK(frames.size() == 30);
    for (double f : frames) CHECK(std::abs(f - 20.0 * std::log10(2.0)) < 0.01);
  }

  TEST_CASE("symmetric") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto a = wb(uniform_noise(6000, 0.6, 10 + s));
      const auto b = wb(uniform_noise(6000, 0.3, 20 + s));
      CHECK(std::abs(lsd_db(a, b) - lsd_db(b, a)) < 1e-9);
    }
  }

  TEST_CASE("matches a direct long-double implementation") {
    const auto a = uniform_noise(512 + 3 * 256 + 100, 0.7, 31);
    auto b = sine(2500.0, 0.3, kWidebandRate, a.size());
    const auto n = uniform_noise(a.size(), 0.01, 32);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += n[i];
    CHECK(std::abs(lsd_db(wb(a), wb(b)) - lsd_oracle(a, b)) < 1e-6);
  }

  TEST_CASE("band restriction") {
    // Distortion confined to 5-6 kHz shows up only in bands covering it.
    const auto a = wb(uniform_noise(8000, 0.3, 40));
    auto bx = a.vec();
    const auto t = sine(5500.0, 0.4, kWidebandRate, bx.size());
    for (std::size_t i = 0; i < bx.size(); ++i) bx[i] += t[i];
    const auto b = wb(bx);
    CHECK(band_lsd_db(a, b, 0.0, 3500.0) < 0.2);
    CHECK(band_lsd_db(a, b, 4000.0, 8000.0) > 1.0);
    CHECK_THROWS_AS(band_lsd_db(a, b, 3000.0, 2000.0), ParameterError);
  }

  TEST_CASE("too short") {
    CHECK_THROWS_AS(lsd_db(wb(std::vector<double>(511, 0.1)), wb(std::vector<double>(511, 0.1))),
                    ParameterError);
  }
}

TEST_SUITE("split metrics") {
  const std::size_t n = 256 * 40;

  TEST_CASE("all voiced equals the overall metric") {
    const auto a = wb(uniform_noise(n, 0.5, 1));
    const auto b = wb(uniform_noise(n, 0.5, 2));
    const std::vector<bool> flags(39, true);
    const auto m = split_metrics(a, b, flags);
    REQUIRE(m.snr_v);
    CHECK(*m.snr_v == doctest::Approx(snr_db(a, b)).epsilon(1e-12));
    CHECK(*m.lsd_v == doctest::Approx(lsd_db(a, b)).epsilon(1e-12));
    CHECK_FALSE(m.snr_u);
    CHECK_FALSE(m.lsd_u);
  }

  TEST_CASE("distortion in the unvoiced half only") {
    const auto ref = uniform_noise(n, 0.5, 5);
    const auto noise = uniform_noise(n, 0.05, 6);
    auto deg = ref;
    for (std::size_t i = n / 2; i < n; ++i) deg[i] += noise[i];
    std::vector<bool> flags(39);
    for (std::size_t j = 0; j < flags.size(); ++j) flags[j] = j * 256 < n / 2;
    const auto m = split_metrics(wb(ref), wb(deg), flags);
    CHECK(*m.snr_v == kSnrCapDb);
    CHECK(*m.snr_v >= *m.snr_u);
    CHECK(*m.snr_u < 30.0);

    auto inverted = flags;
    inverted.flip();
    const auto s = split_metrics(wb(ref), wb(deg), inverted);
    CHECK(*s.snr_v == *m.snr_u);
    CHECK(*s.snr_u == *m.snr_v);
    CHECK(*s.lsd_v == *m.lsd_u);
    CHECK(*s.lsd_u == *m.lsd_v);
  }

  TEST_CASE("flag count must match the framing") {
    const auto a = wb(uniform_noise(n, 0.5, 1));
    CHECK_THROWS_AS(split_metrics(a, a, std::vector<bool>(38, true)), ParameterError);
  }
}

TEST_SUITE("accuracy") {
  QuantizedWaveform q(std::vector<std::uint8_t> v) { return {std::move(v), kWidebandRate}; }

  TEST_CASE("identity, off by one and half") {
    std::mt19937_64 rng(8);
    std::vector<std::uint8_t> a(1000);
    for (auto& v : a) v = static_cast<std::uint8_t>(rng() % 255);
    auto off = a;
    for (auto& v : off) ++v;
    auto half = a;
    for (std::size_t i = 0; i < 500; ++i) ++half[i];
    CHECK(accuracy(q(a), q(a)) == 100.0);
    CHECK(accuracy(q(off), q(a)) == 0.0);
    CHECK(accuracy(q(half), q(a)) == 50.0);
    std::vector<std::uint8_t> mask(1000, 0);
    for (std::size_t i = 500; i < 1000; ++i) mask[i] = 1;
    CHECK(accuracy(q(half), q(a), mask) == 100.0);
  }

  TEST_CASE("invariant under a shared permutation") {
    std::mt19937_64 rng(9);
    std::vector<std::uint8_t> a(777), b(777), m(777);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<std::uint8_t>(rng() % 4);
      b[i] = static_cast<std::uint8_t>(rng() % 4);
      m[i] = rng() % 3 != 0;
    }
    const double base = accuracy(q(a), q(b), m);
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::uint8_t> pa(a.size()), pb(a.size()), pm(a.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
      pm[i] = m[perm[i]];
    }
    CHECK(accuracy(q(pa), q(pb), pm) == base);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(accuracy(q({1, 2}), q({1})), ParameterError);
    const std::vector<std::uint8_t> none(2, 0);
    CHECK_THROWS_AS(accuracy(q({1, 2}), q({1, 2}), none), ParameterError);
  }
}

TEST_SUITE("reconstruct") {
  Waveform speechlike_narrowband(std::size_t n, std::uint64_t seed) {
    // Lowpassed noise plus a tone, comfortably inside 0-4 kHz.
    auto x = uniform_noise(2 * n, 0.3, seed);
    x = filter(x, resample_lowpass());
    const auto t = sine(700.0, 0.3, kWidebandRate, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += t[i];
    return downsample2(wb(x));
  }

  TEST_CASE("zero-level generation adds nothing") {
    const auto nb = speechlike_narrowband(2000, 1);
    const QuantizedWaveform silent(std::vector<std::uint8_t>(4000, kZeroLevel), kWidebandRate);
    const auto up = upsample2(nb);
    for (Strategy s : {Strategy::HighFrequency, Strategy::Wideband})
      CHECK(snr_db(up, reconstruct_wideband(nb, silent, s, 4.0)) >= 40.0);
  }

  TEST_CASE("true amplified HF restores the wideband signal") {
    std::vector<double> w = sine(1000.0, 0.5, kWidebandRate, 8000);
    const auto hf = sine(6000.0, 0.1, kWidebandRate, 8000);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += hf[i];
    const auto wide = wb(w);
    const auto nb = downsample2(wide);
    const auto gen = mulaw_encode(make_hf_target(wide, 4.0));
    const auto out = reconstruct_wideband(nb, gen, Strategy::HighFrequency, 4.0);
    CHECK(out.size() == wide.size());
    CHECK(snr_db(wide, out) >= 30.0);
  }

  TEST_CASE("low band untouched by any generated content") {
    const auto nb = speechlike_narrowband(2000, 2);
    std::mt19937_64 rng(3);
    std::vector<std::uint8_t> levels(4000);
    for (auto& v : levels) v = static_cast<std::uint8_t>(rng());
    const QuantizedWaveform gen(levels, kWidebandRate);
    const auto up = upsample2(nb);
    for (Strategy s : {Strategy::HighFrequency, Strategy::Wideband}) {
      const auto out = reconstruct_wideband(nb, gen, s, 4.0);
      std::vector<double> diff(out.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = out[i] - up[i];
      const double e_diff = band_energy(diff, kWidebandRate, 0.0, 3500.0);
      const double e_up = band_energy(up.vec(), kWidebandRate, 0.0, 3500.0);
      CHECK(10.0 * std::log10(e_diff / e_up) <= -35.0);
    }
  }

  TEST_CASE("linear in the HF component") {
    // Level 128 decodes to a tiny positive bin centre, so HF contributions
    // are measured against the all-128 output.
    const auto nb = speechlike_narrowband(1500, 4);
    const auto silent_nb = Waveform::zeros(nb.size(), kNarrowbandRate);
    std::mt19937_64 rng(5);
    std::vector<std::uint8_t> levels(3000);
    for (auto& v : levels) v = static_cast<std::uint8_t>(100 + rng() % 56);
    const QuantizedWaveform gen(levels, kWidebandRate);
    const QuantizedWaveform zero(std::vector<std::uint8_t>(3000, kZeroLevel), kWidebandRate);
    auto hf = [&](const Waveform& n, double gain) {
      const auto a = reconstruct_wideband(n, gen, Strategy::HighFrequency, gain);
      const auto b = reconstruct_wideband(n, zero, Strategy::HighFrequency, gain);
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
      return d;
    };
    const auto with_nb = hf(nb, 4.0);
    const auto hf4 = hf(silent_nb, 4.0);
    const auto hf2 = hf(silent_nb, 2.0);
    for (std::size_t i = 0; i < hf4.size(); ++i) {
      CHECK(std::abs(with_nb[i] - hf4[i]) < 1e-12);
      CHECK(std::abs(hf2[i] - 2.0 * hf4[i]) < 1e-12);
    }
  }

  TEST_CASE("length and rate checks") {
    const auto nb = Waveform::zeros(100, kNarrowbandRate);
    const QuantizedWaveform ok(std::vector<std::uint8_t>(199, kZeroLevel), kWidebandRate);
    CHECK(reconstruct_wideband(nb, ok, Strategy::Wideband, 1.0).size() == 199);
    const QuantizedWaveform bad(std::vector<std::uint8_t>(150, kZeroLevel), kWidebandRate);
    CHECK_THROWS_AS(reconstruct_wideband(nb, bad, Strategy::Wideband, 1.0), ParameterError);
    CHECK_THROWS_AS(reconstruct_wideband(Waveform::zeros(100, kWidebandRate), ok, Strategy::Wideband, 1.0),
                    ParameterError);
  }
}

TEST_SUITE("report") {
  TEST_CASE("reference against itself") {
    const auto x = wb(uniform_noise(8000, 0.4, 12));
    const auto u = evaluate_utterance("a", x, x);
    CHECK(*u.get(Metric::Snr) == kSnrCapDb);
    CHECK(*u.get(Metric::Lsd) == 0.0);
    CHECK(*u.get(Metric::Acc) == 100.0);
  }

  TEST_CASE("summary statistics") {
    MetricsReport r;
    const double vals[] = {1.0, 2.0, 4.0, 8.0, 16.0};
    for (int i = 0; i < 5; ++i) {
      UtteranceMetrics u;
      u.id = "u" + std::to_string(i);
      u.set(Metric::Snr, vals[i]);
      if (i < 2) u.set(Metric::SnrU, 3.0);
      r.add(u);
    }
    const auto s = r.summary(Metric::Snr);
    CHECK(s.n == 5);
    CHECK(*s.mean == doctest::Approx(6.2));
    CHECK(*s.mean >= 1.0);
    CHECK(*s.mean <= 16.0);
    // t(0.975, 4) = 2.7764451051977987; sample sd of vals = sqrt(37.2).
    CHECK(*s.half_width == doctest::Approx(2.7764451051977987 * std::sqrt(37.2) / std::sqrt(5.0)));
    CHECK(*r.summary(Metric::SnrU).half_width == 0.0);
    CHECK_FALSE(r.summary(Metric::Lsd).mean);

    const auto csv = r.csv();
    CHECK(csv.rfind("id,acc,snr,snr_v,snr_u,lsd,lsd_v,lsd_u\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 + 1);
    CHECK(csv.find("\nmean,,6.2000,,3.0000,,,\n") != std::string::npos);
    CHECK(r.text().find("PESQ") != std::string::npos);
  }

  TEST_CASE("single utterance has no confidence interval") {
    MetricsReport r;
    const auto x = wb(uniform_noise(8000, 0.4, 13));
    r.add(evaluate_utterance("only", x, scaled(x, 0.9)));
    CHECK_FALSE(r.summary(Metric::Snr).half_width);
    const auto text = r.text();
    const auto ci = text.substr(text.find("95% CI"));
    CHECK(ci.find("+-") == std::string::npos);
    CHECK(ci.find("n/a") != std::string::npos);
  }

  TEST_CASE("threaded evaluation matches sequential") {
    std::vector<std::string> ids;
    std::vector<Waveform> refs, degs;
    for (int i = 0; i < 6; ++i) {
      ids.push_back("u" + std::to_string(i));
      refs.push_back(wb(uniform_noise(3000 + 500 * i, 0.4, 50 + i)));
      degs.push_back(scaled(refs.back(), 0.8));
    }
    const auto a = evaluate_corpus(ids, refs, degs, {}, 1);
    const auto b = evaluate_corpus(ids, refs, degs, {}, 4);
    CHECK(a.csv() == b.csv());
    CHECK(a.rows().size() == 6);
  }
}
