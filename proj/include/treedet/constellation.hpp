#pragma once

#include <vector>

#include "treedet/types.hpp"

namespace treedet {

// Square QAM with independent binary-reflected Gray labels per axis.
// A symbol label packs its Q bits MSB-first: the first Q/2 bits select the
// real-axis level, the last Q/2 the imaginary one. Levels are the odd grid
// {-(m-1), ..., m-1}/P with m = 2^(Q/2) and P chosen for unit average energy
// (sqrt(2), sqrt(10), sqrt(42) for Q = 2, 4, 6).
class Constellation {
 public:
  explicit Constellation(int bits_per_symbol);

  int bits() const { return q_; }
  int size() const { return static_cast<int>(points_.size()); }
  double normalizer() const { return norm_; }

  cplx point(int label) const { return points_[static_cast<std::size_t>(label)]; }
  const std::vector<cplx>& points() const { return points_; }

  // i-th bit (0 = first/MSB) of a label; 0 or 1.
  int bit(int label, int i) const { return (label >> (q_ - 1 - i)) & 1; }
  int flip_bit(int label, int i) const { return label ^ (1 << (q_ - 1 - i)); }

  int axis_levels() const { return 1 << (q_ / 2); }
  // Amplitude of axis level l in [0, 2^(Q/2)).
  double axis_amplitude(int level) const;
  // Gray value -> axis level (binary-reflected decode).
  static int gray_decode(int g);

  template <typename It>
  int label_from_bits(It first) const {
    int label = 0;
    for (int i = 0; i < q_; ++i) label = (label << 1) | (*first++ & 1);
    return label;
  }

 private:
  int q_;
  double norm_;
  std::vector<cplx> points_;
};

}  // namespace treedet
