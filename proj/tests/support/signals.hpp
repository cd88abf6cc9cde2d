#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace bwe::testing {

inline std::vector<double> sine(double freq_hz, double amp, int rate, std::size_t n,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate +
                          phase);
  return x;
}

inline double rms(std::span<const double> x, std::size_t skip = 0) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i, ++n) s += x[i] * x[i];
  return n ? std::sqrt(s / static_cast<double>(n)) : 0.0;
}

// Straight-line DFT magnitude of a real sequence at an arbitrary frequency.
inline double dft_magnitude(std::span<const double> x, double freq_hz, int rate) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n)
    acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * freq_hz * static_cast<double>(n) /
                                      rate);
  return std::abs(acc);
}

// Energy of x in [lo, hi) Hz from a direct DFT over all bins.
inline double band_energy(std::span<const double> x, int rate, double lo, double hi) {
  const std::size_t n = x.size();
  double e = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(n);
    if (f < lo || f >= hi) continue;
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % n) /
                                        static_cast<double>(n));
    e += std::norm(acc);
  }
  return e;
}

inline std::vector<double> uniform_noise(std::size_t n, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace bwe::testing
