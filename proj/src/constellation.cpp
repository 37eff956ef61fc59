#include "treedet/constellation.hpp"

#include <cmath>

namespace treedet {

Constellation::Constellation(int bits_per_symbol) : q_(bits_per_symbol) {
  if (q_ < 2 || q_ % 2 != 0 || q_ > 12) {
    throw ParamError("Constellation: bits_per_symbol must be even in [2, 12]");
  }
  const int m = 1 << (q_ / 2);
  // Mean square of the odd grid {+-1, +-3, ...} is (m^2 - 1)/3 per axis.
  norm_ = std::sqrt(2.0 * (static_cast<double>(m) * m - 1.0) / 3.0);

  points_.resize(static_cast<std::size_t>(1) << q_);
  const int half = q_ / 2;
  const int mask = m - 1;
  for (int label = 0; label < static_cast<int>(points_.size()); ++label) {
    const int gre = (label >> half) & mask;
    const int gim = label & mask;
    points_[static_cast<std::size_t>(label)] =
        cplx(axis_amplitude(gray_decode(gre)), axis_amplitude(gray_decode(gim)));
  }
}

double Constellation::axis_amplitude(int level) const {
  const int m = axis_levels();
  return (2.0 * level - (m - 1)) / norm_;
}

int Constellation::gray_decode(int g) {
  int b = g;
  for (int shift = 1; shift < 16; shift <<= 1) b ^= b >> shift;
  return b;
}

}  // namespace treedet
