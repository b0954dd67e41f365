#include "seqpred/quantizer.hpp"

#include <cmath>

#include "seqpred/errors.hpp"

namespace seqpred {

QuantizedValue quantize(double x, int level) {
  if (!std::isfinite(x)) throw InputError("quantize: value must be finite");
  if (level < 0 || level > kMaxQuantizerLevel)
    throw RangeError("quantize: level out of range [0, 30]");
  double scaled = std::ldexp(std::fabs(x), level);
  if (scaled >= kMaxQuantizerIndex)
    throw RangeError("quantize: |x| * 2^level exceeds 2^53");
  auto magnitude = static_cast<std::int64_t>(std::floor(scaled));
  QuantizedValue q;
  q.level = level;
  q.index = x < 0.0 ? -magnitude : magnitude;
  return q;
}

double dequantize(const QuantizedValue& q) {
  if (q.level < 0 || q.level > kMaxQuantizerLevel)
    throw RangeError("dequantize: level out of range [0, 30]");
  return std::ldexp(static_cast<double>(q.index), -q.level);
}

QuantizedPattern quantize_segment(std::span<const double> segment, int level) {
  if (segment.empty())
    throw InputError("quantize_segment: segment must be nonempty");
  QuantizedPattern p;
  p.level = level;
  p.indices.reserve(segment.size());
  for (double x : segment) p.indices.push_back(quantize(x, level).index);
  return p;
}

bool same_cell(double x, double y, std::int64_t level) {
  if (level < 0) throw RangeError("same_cell: level must be nonnegative");
  if (x == y) return true;
  // ldexp saturates to +inf for huge exponents; inf >= 2^53 so both the
  // overflow and the genuinely-large case land in the bit-equality branch,
  // which x == y already answered.
  int e = level > 100000 ? 100000 : static_cast<int>(level);
  double a = std::ldexp(std::fabs(x), e);
  double b = std::ldexp(std::fabs(y), e);
  if (a >= kMaxQuantizerIndex || b >= kMaxQuantizerIndex) return false;
  double fa = std::floor(a);
  double fb = std::floor(b);
  if (fa != fb) return false;
  if (fa == 0.0) return true;
  return (x > 0.0) == (y > 0.0);
}

}  // namespace seqpred
