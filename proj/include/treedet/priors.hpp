#pragma once

#include <vector>

#include "treedet/constellation.hpp"
#include "treedet/types.hpp"

namespace treedet {

// LLR magnitudes at or above this are treated as certain (tanh has saturated
// well past double precision there); keeps downstream log-probabilities exact
// at 0 / -inf instead of denormal garbage.
inline constexpr double kCertainLlr = 30.0;

// Pr(bit = sign | llr) with sign in {-1, +1} and llr = ln Pr(+1)/Pr(-1).
double bit_prob_from_llr(double llr, int sign);

struct SymbolStats {
  cplx mean;   // prior symbol mean
  double var;  // prior symbol variance, in [0, 1]
};

// Prior mean/variance of one symbol from its Q bit LLRs. All-zero LLRs give
// exactly {0, 1}.
SymbolStats symbol_stats(const double* llr, const Constellation& c);

// Per-symbol-vector prior summary used by detection.
struct PriorStats {
  RVec llr;       // n*q a priori LLRs, bit (k, i) at k*q + i
  RVec bit_prob;  // Pr(bit = +1) per bit
  CVec sym_mean;  // length n
  RVec sym_var;   // length n

  int n() const { return static_cast<int>(sym_mean.size()); }

  static PriorStats zero(int n, const Constellation& c);
};

PriorStats prior_stats_from_llrs(const RVec& llrs, const Constellation& c,
                                 MulCount* mc = nullptr);

// Reorders streams so that stats[level] describes original stream perm[level].
PriorStats permute_priors(const PriorStats& s, const std::vector<int>& perm, int q);

}  // namespace treedet
