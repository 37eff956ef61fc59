#pragma once

#include <cstdint>
#include <vector>

#include "treedet/comms.hpp"
#include "treedet/detector.hpp"
#include "treedet/types.hpp"

namespace treedet {

enum class DetectorKind { kIssma, kConventionalMa, kMmsePic };

// One simulated link: rate-1/2 RSC encoding, random interleaving, gray-mapped
// square QAM over an n-stream flat channel with l receive antennas, iterative
// exchange of extrinsic LLRs between detector and max-log decoder. The tree
// detectors derive their metric from `detector` (look-ahead vs causal);
// search.metric is ignored. Fast fading draws a fresh channel per symbol
// vector; block_fading holds one channel per frame.
struct IddConfig {
  int n = 4;
  int l = 4;
  int q = 2;
  std::vector<double> snr_db = {6.0};
  int iterations = 7;
  std::uint64_t info_bits = 200000;  // minimum budget per SNR point
  int interleaver_bits = 12000;      // coded bits per frame
  DetectorKind detector = DetectorKind::kIssma;
  SearchConfig search;
  ChannelModel channel = ChannelModel::iid(4, 4);
  bool block_fading = false;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct IddCell {
  std::uint64_t info_errors = 0;
  std::uint64_t info_bits = 0;
  std::uint64_t coded_errors = 0;
  std::uint64_t coded_bits = 0;
  std::uint64_t symbol_periods = 0;
  std::uint64_t frames = 0;
  MulCount mults;

  double info_ber() const {
    return info_bits ? static_cast<double>(info_errors) / static_cast<double>(info_bits) : 0.0;
  }
  double coded_ber() const {
    return coded_bits ? static_cast<double>(coded_errors) / static_cast<double>(coded_bits)
                      : 0.0;
  }
  double mults_per_symbol() const {
    return symbol_periods ? static_cast<double>(mults.total()) /
                                static_cast<double>(symbol_periods)
                          : 0.0;
  }
  IddCell& operator+=(const IddCell& o) {
    info_errors += o.info_errors;
    info_bits += o.info_bits;
    coded_errors += o.coded_errors;
    coded_bits += o.coded_bits;
    symbol_periods += o.symbol_periods;
    frames += o.frames;
    mults += o.mults;
    return *this;
  }
};

struct IddResult {
  std::vector<double> snr_db;
  int iterations = 0;
  std::vector<std::vector<IddCell>> cells;  // [snr index][iteration - 1]
};

// Throws ConfigError naming the offending field; performs no work.
void validate_idd(const IddConfig& cfg);

// Validates cfg and runs the link at every SNR point. All tallies are
// integers and every frame has its own derived RNG stream, so the result is
// identical for any worker count.
IddResult run_idd(const IddConfig& cfg);

}  // namespace treedet
