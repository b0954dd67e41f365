#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "seqpred/errors.hpp"

namespace seqpred {

// All sampling in the library goes through this wrapper so that a (seed, n)
// pair regenerates identical values on any platform with the same libm.
// std::mt19937_64 is fully specified by the standard; the distribution
// transforms below are spelled out here instead of using std::*_distribution,
// whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Identity string reported in effective configs.
  static constexpr std::string_view identity() {
    return "mt19937_64/u53/polar-normal";
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool next_bit() { return (engine_() >> 63) != 0; }

  // Marsaglia polar method. No state is cached: the spare value is
  // discarded so that the draw count per call is data-independent only in
  // distribution, while regeneration stays exact for a fixed seed.
  double next_normal() {
    for (;;) {
      const double u = 2.0 * next_uniform01() - 1.0;
      const double v = 2.0 * next_uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  // Inverse-CDF draw over explicit weights. Weights must be nonnegative;
  // the walk uses partial sums in listed order, so the index is a pure
  // function of the uniform and the weight vector.
  std::size_t next_index(std::span<const double> weights) {
    if (weights.empty()) throw InputError("next_index: empty weight vector");
    const double u = next_uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace seqpred
