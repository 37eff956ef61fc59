#pragma once

#include <cstdint>

#include "treedet/detector.hpp"
#include "treedet/types.hpp"

namespace treedet {

// Uncoded correct-path-loss measurement: the transmitted vector is lost when
// the breadth-first search prunes its partial path at some level, i.e. when
// the true vector is absent from the final candidate list. No ordering, zero
// priors, iid channel; one derived RNG stream per trial.
struct CplConfig {
  int n = 5;
  int l = 5;
  int q = 2;
  double snr_db = 12.0;
  int m = 1;
  int n_l = 5;
  Metric metric = Metric::kLookahead;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
};

struct CplPoint {
  double rate = 0.0;
  double std_error = 0.0;
  std::uint64_t losses = 0;
  std::uint64_t trials = 0;
};

CplPoint simulate_cpl(const CplConfig& cfg);

// Channel-averaged union bounds on the loss probability, 1 - prod_k(1 - p_k)
// over the pruning levels k = 2..n with unit prior variances. `exact` uses the
// full look-ahead SINR per level, `loose` the SINR lower bound.
struct CplCurvePoint {
  double exact = 0.0;
  double exact_se = 0.0;
  double loose = 0.0;
  double loose_se = 0.0;
};

CplCurvePoint cpl_union_average(int n, int l, int q, double sigma2,
                                std::uint64_t samples, std::uint64_t seed);

}  // namespace treedet
