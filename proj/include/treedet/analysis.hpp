#pragma once

#include <cstdint>
#include <vector>

#include "treedet/types.hpp"

namespace treedet {

// Per-level context for SINR / correct-path-loss analysis at tree level k
// (k in [2, n]): the strictly-upper part of column k, the diagonal entry, the
// prior variances of the k-1 undecided symbols and the resulting covariance
// Sigma = R11 Lambda R11^H + sigma2 I of the residual interference.
struct LevelContext {
  int k = 2;
  CMat r11;       // (k-1) x (k-1) upper triangular
  RVec lambda;    // k-1 prior variances
  CVec r_col;     // R[0..k-2, k-1]
  double r_diag = 0.0;
  double sigma2 = 1.0;
  CMat sigma;     // cached covariance
  double lambda_min = 1.0, lambda_max = 1.0;
};

LevelContext make_level_context(const CMat& r, const RVec& lambda, double sigma2, int k);

// Exact post-combining SINR of the scalar decision channel seen by level k
// when the undecided rows are shrunk by Z = sigma2 * Sigma^-1:
// (1/sigma2) * (r^H sigma2^2 Sigma^-2 r + d^2)^2 / (r^H sigma2^3 Sigma^-3 r + d^2).
double lookahead_sinr(const LevelContext& ctx);

struct SinrBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Sandwich: sigma2 r^H Sigma^-2 r + d^2/sigma2 <= SINR <= r^H Sigma^-1 r + d^2/sigma2.
SinrBounds sinr_bounds(const LevelContext& ctx);

// Looser deterministic-equivalent-friendly bounds that replace Lambda by its
// extreme values: upper B = r^H (sigma2 I + lambda_min R11 R11^H)^-1 r,
// lower B = sigma2 ||(sigma2 I + lambda_max R11 R11^H)^-1 r||^2.
double finite_upper_bound(const LevelContext& ctx);
double finite_lower_bound(const LevelContext& ctx);

// G(x, b) = sqrt(1 + 2(1+b)x + (1-b)^2 x^2).
double g_function(double x, double b);

struct AsymptoticBounds {
  double upper = 0.0;
  double lower = 0.0;
};

// Large-system limits of the two bounds above at aspect ratio beta = n/l and
// level fraction gamma = (k-1)/n (so the interference dimension ratio is
// gamma*beta).
AsymptoticBounds asymptotic_bounds(double gamma, double beta, double lambda_min,
                                   double lambda_max, double sigma2);

// Small-noise limit of the asymptotic upper curve (exercised at lambda = 1).
double small_noise_limit(double lambda_min, double gamma_beta);

// Marcenko-Pastur density with ratio c on [(1-sqrt(c))^2, (1+sqrt(c))^2].
double marcenko_pastur_density(double x, double c);

double qfunc(double x);
// Minimum-distance SNR scale of square 2^q-QAM: 3/(2^q - 1).
double qam_gap_constant(int q);
// Nearest-neighbor multiplicity prefactor 4(1 - 1/sqrt(2^q)).
double qam_prefactor(int q);

// Per-level correct-path-loss bound: prefactor * Q(sqrt(gap * SINR)).
double cpl_from_sinr(double sinr, int q);

enum class SinrVariant { kExact, kLowerBound };
double cpl_level_bound(const LevelContext& ctx, int q, SinrVariant variant);

struct CplTotal {
  double product_form = 0.0;  // 1 - prod(1 - p_k)
  double first_order = 0.0;   // sum p_k
};
CplTotal cpl_total(const std::vector<double>& per_level);

// E[Q(sqrt(gap * r_kk^2 / sigma2))] over the chi-square distributed diagonal
// of the QR of an iid CN(0,1) channel; closed form with diversity l - k + 1.
double chi_square_q_average(int l, int k, int q, double sigma2);

struct ScalingGain {
  double value = 1.0;
  double std_error = 0.0;
  bool stable = true;  // false when the MC error exceeds 3-digit stability
  std::uint64_t samples = 0;
};

// MC estimate of E[prod_i 1/(1 + (gap/2) sigma2 / (lambda_max eta_i + sigma2)^2)]
// over the k-1 eigenvalues eta of an L x (k-1) iid CN(0,1) Wishart matrix:
// the average shrinkage the look-ahead bias applies to the top-level error
// rate relative to the causal metric.
ScalingGain scaling_gain(int l, int k, int q, double sigma2, double lambda_max,
                         std::uint64_t samples, std::uint64_t seed);

struct AvgCpl {
  double lookahead = 0.0;
  double causal = 0.0;
  double lookahead_std_error = 0.0;
};

// Dominant (top-level, k = n) term of the channel-averaged CPL probability.
AvgCpl avg_cpl_dominant(int l, int n, int q, double sigma2, double lambda_max,
                        std::uint64_t samples, std::uint64_t seed);

}  // namespace treedet
