#pragma once

#include <vector>

#include "treedet/constellation.hpp"
#include "treedet/priors.hpp"
#include "treedet/types.hpp"

namespace treedet {

// One triangularized detection instance: y = R x + n in detection order,
// R upper triangular with real non-negative diagonal. c_const is the energy
// removed by the QR projection, so cost(x) = ||y - R x||^2 + prior costs
// satisfies cost + c_const = -sigma2 * log-APP up to the prior normalizer.
// xi(k, s) caches the prior cost -sigma2 * sum_i ln Pr(bit_i(s)) of symbol s
// at level k+1; +inf marks symbols excluded by a certain prior.
struct DetectionProblem {
  CMat r;
  CVec y;
  double sigma2 = 1.0;
  double c_const = 0.0;
  const Constellation* constellation = nullptr;
  CVec sym_mean;
  RVec sym_var;
  RVec prior_llr;  // n*q, detection order
  RMat xi;         // n x 2^q

  int n() const { return static_cast<int>(r.rows()); }
};

DetectionProblem make_problem(CMat r, CVec y, double sigma2, double c_const,
                              const Constellation& c, const PriorStats& priors,
                              MulCount* mc = nullptr);

// Partial path: levels `level`..n carry decided symbols. residual holds the
// first level-1 rows of y - R * (decided symbols, prior means elsewhere), i.e.
// exactly the vector the look-ahead bias multiplies. Root sits at level n+1.
struct PathNode {
  int level = 0;
  double causal = 0.0;  // accumulated per-branch cost of decided rows
  double bias = 0.0;    // look-ahead estimate of the undecided rows' cost
  CVec residual;
  std::vector<int> syms;  // size n, -1 where undecided

  double metric() const { return causal + bias; }
};

PathNode make_root(const DetectionProblem& p, MulCount* mc = nullptr);

// Shrinkage matrices Z_k = sigma2 * (R11 Lambda R11^H + sigma2 I)^-1 for
// levels k = 2..n, truncated to the trailing `lookahead` undecided symbols.
// Built by rank-style block extension; no matrix inversion anywhere.
struct ZSequence {
  int n = 0;
  int lookahead = 0;   // effective depth in [0, n-1]
  std::vector<CMat> z; // index k-2 holds the level-k matrix

  int window(int level) const { return std::min(level - 1, lookahead); }
  const CMat& at_level(int level) const { return z[static_cast<std::size_t>(level - 2)]; }
};

ZSequence compute_z_sequence(const DetectionProblem& p, int lookahead,
                             MulCount* mc = nullptr);

// Extends parent by one symbol at the next level down, updating the residual
// recursively and adding |v|^2 plus the prior cost to the causal metric. When
// zs is given (and the child is above level 1) the look-ahead bias
// ||Z * tail(residual)||^2 is filled in; otherwise bias stays 0.
void extend_node(const DetectionProblem& p, const PathNode& parent, int symbol,
                 const ZSequence* zs, PathNode& child, MulCount* mc = nullptr);

// Direct (non-recursive) per-row branch cost of row `level`, requiring
// syms[level-1 .. n-1] decided. Oracle-friendly form of the same quantity the
// recursion accumulates.
double branch_metric(const DetectionProblem& p, int level, const std::vector<int>& syms,
                     MulCount* mc = nullptr);

// Full-path cost ||y - R x||^2 + prior costs = causal metric at level 1.
double direct_cost(const DetectionProblem& p, const std::vector<int>& syms,
                   MulCount* mc = nullptr);

// Exact completion cost: minimum over every assignment of the undecided
// levels of the remaining rows' branch costs. Branch-and-bound over the
// alphabet; throws TooLargeError when (level-1)*q exceeds 20 bits.
double oracle_completion_bias(const DetectionProblem& p, const PathNode& node,
                              MulCount* mc = nullptr);

inline double oracle_metric(const DetectionProblem& p, const PathNode& node,
                            MulCount* mc = nullptr) {
  return node.causal + oracle_completion_bias(p, node, mc);
}

}  // namespace treedet
