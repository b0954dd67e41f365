#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seqpred {

// Dyadic mid-tread quantizer. Level k splits the line into cells of width
// 2^-k; the cell around zero is (-2^-k, 2^-k) and maps to index 0, positive
// cells [i 2^-k, (i+1) 2^-k) map to +i, negative cells (-(i+1) 2^-k, -i 2^-k]
// map to -i. Equivalently index = sign(x) * floor(|x| * 2^k), which is exact
// in binary floating point because scaling by 2^k never rounds.

inline constexpr int kMaxQuantizerLevel = 30;
inline constexpr double kMaxQuantizerIndex = 9007199254740992.0;  // 2^53

struct QuantizedValue {
  int level = 0;
  std::int64_t index = 0;
  friend bool operator==(const QuantizedValue&, const QuantizedValue&) = default;
};

struct QuantizedPattern {
  int level = 0;
  std::vector<std::int64_t> indices;
  friend bool operator==(const QuantizedPattern&, const QuantizedPattern&) = default;
};

QuantizedValue quantize(double x, int level);
double dequantize(const QuantizedValue& q);
QuantizedPattern quantize_segment(std::span<const double> segment, int level);

// True when x and y fall in the same level-k cell. Unlike quantize() this
// never materializes the index, so it works at any nonnegative level: once
// cells are finer than the spacing of doubles, cell equality degenerates to
// bit equality and is answered that way.
bool same_cell(double x, double y, std::int64_t level);

}  // namespace seqpred
