#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "treedet/types.hpp"

namespace treedet {

// Rate-1/2 recursive systematic convolutional code, feedback 1 + D + D^2,
// feedforward 1 + D^2 (4 states). State packs the shift register as
// (newest << 1) | oldest-but-one... concretely s = s1*2 + s2 with s1 the most
// recent register bit. Trellis is unterminated.
struct Trellis {
  static constexpr int kStates = 4;
  std::array<std::array<int, 2>, kStates> next;    // next[state][info]
  std::array<std::array<int, 2>, kStates> parity;  // parity[state][info]

  static const Trellis& instance();
};

// Soft-in soft-out max-log BCJR pass over one frame.
// coded_in holds 2K channel LLRs ordered [sys0, par0, sys1, par1, ...] with
// positive LLR meaning bit 1. Forward recursion starts in state 0; the
// backward one is uniform (no termination).
struct DecoderIO {
  RVec coded_in;
  RVec coded_extrinsic;             // out: posterior - input, per coded bit
  RVec coded_posterior;             // out
  RVec info_posterior;              // out, K systematic posteriors
  std::vector<std::uint8_t> info_hard;  // out, positive posterior -> 1
};

void maxlog_map_decode(DecoderIO& io);

}  // namespace treedet
