#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace optistat {

/// SplitMix64 counter generator. Output i of stream (seed, stream) is
/// mix(key + (i + 1) * gamma), so any substream is reproducible on its own.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream * kGamma + 0xD1B54A32D192ED03ULL))) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix(key_ + (++counter_) * kGamma); }
  std::uint64_t counter() const { return counter_; }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2 * uniform() - 1;
      v = 2 * uniform() - 1;
      s = u * u + v * v;
    } while (s >= 1 || s == 0);
    double f = std::sqrt(-2 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the U^(1/a) boost.
  double gamma(double shape) {
    if (shape <= 0) return 0;
    if (shape < 1) {
      double g = gamma(shape + 1);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1 + c * x;
      } while (v <= 0);
      v = v * v * v;
      double u = uniform();
      if (u < 1 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1 - v + std::log(v))) return d * v;
    }
  }

  /// One Dirichlet draw; zero concentrations give exact zeros.
  void dirichlet(const std::vector<double>& alpha, std::vector<double>& out) {
    out.resize(alpha.size());
    double s = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += out[i] = gamma(alpha[i]);
    if (s > 0) {
      for (auto& v : out) v /= s;
    } else {
      // Every gamma variate underflowed: fall back to the largest concentration.
      auto it = std::max_element(alpha.begin(), alpha.end());
      std::fill(out.begin(), out.end(), 0.0);
      out[static_cast<std::size_t>(it - alpha.begin())] = 1.0;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0;
};

/// Draws per substream. Fixed so results do not depend on the thread count.
inline constexpr std::size_t kPartitionSize = 4096;

/// Runs body(rng, begin, end) over fixed partitions of [0, total); partition p
/// uses substream (seed, p). Partitions are spread over `threads` workers.
inline void for_each_partition(std::size_t total, std::uint64_t seed, unsigned threads,
                               const std::function<void(CounterRng&, std::size_t, std::size_t)>& body) {
  std::size_t parts = (total + kPartitionSize - 1) / kPartitionSize;
  auto run = [&](std::size_t first_part, std::size_t stride) {
    for (std::size_t p = first_part; p < parts; p += stride) {
      CounterRng rng(seed, p);
      body(rng, p * kPartitionSize, std::min(total, (p + 1) * kPartitionSize));
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(parts, 1))));
  if (threads == 1) {
    run(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
  for (auto& th : pool) th.join();
}

/// count Dirichlet draws with the given concentrations.
inline std::vector<std::vector<double>> dirichlet_sample(const std::vector<double>& weights,
                                                         std::size_t count, std::uint64_t seed,
                                                         unsigned threads = 1) {
  if (weights.empty()) throw EmptyInputError("Dirichlet needs at least one concentration");
  bool positive = false;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw ValueError("Dirichlet concentrations must be finite and >= 0");
    positive = positive || w > 0;
  }
  if (!positive) throw DegenerateError("all Dirichlet concentrations are zero");
  if (count < 1) throw ValueError("Dirichlet sample count must be >= 1");
  std::vector<std::vector<double>> out(count);
  for_each_partition(count, seed, threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) rng.dirichlet(weights, out[i]);
  });
  return out;
}

}  // namespace optistat
