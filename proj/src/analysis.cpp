#include "treedet/analysis.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "treedet/linalg.hpp"
#include "treedet/rng.hpp"

namespace treedet {

LevelContext make_level_context(const CMat& r, const RVec& lambda, double sigma2, int k) {
  const int n = static_cast<int>(r.rows());
  if (k < 2 || k > n) throw ParamError("make_level_context: k must be in [2, n]");
  if (lambda.size() < k - 1) throw ShapeError("make_level_context: lambda too short");
  if (!(sigma2 > 0.0)) throw ParamError("make_level_context: sigma2 must be positive");

  LevelContext ctx;
  ctx.k = k;
  ctx.r11 = r.topLeftCorner(k - 1, k - 1).triangularView<Eigen::Upper>();
  ctx.lambda = lambda.head(k - 1);
  ctx.r_col = r.block(0, k - 1, k - 1, 1);
  ctx.r_diag = r(k - 1, k - 1).real();
  ctx.sigma2 = sigma2;
  ctx.sigma = ctx.r11 * ctx.lambda.asDiagonal() * ctx.r11.adjoint();
  ctx.sigma.diagonal().array() += sigma2;
  ctx.lambda_min = ctx.lambda.minCoeff();
  ctx.lambda_max = ctx.lambda.maxCoeff();
  return ctx;
}

double lookahead_sinr(const LevelContext& ctx) {
  const double d2 = ctx.r_diag * ctx.r_diag;
  if (ctx.r_col.size() == 0) return d2 / ctx.sigma2;
  const CMat s1 = hermitian_solve(ctx.sigma, ctx.r_col);
  const CMat s2 = hermitian_solve(ctx.sigma, s1);
  const CMat s3 = hermitian_solve(ctx.sigma, s2);
  const double q2 = ctx.r_col.col(0).dot(s2.col(0)).real();
  const double q3 = ctx.r_col.col(0).dot(s3.col(0)).real();
  const double s4 = ctx.sigma2 * ctx.sigma2;
  const double a = s4 * q2 + d2;
  const double b = s4 * ctx.sigma2 * q3 + d2;
  return a * a / (ctx.sigma2 * b);
}

SinrBounds sinr_bounds(const LevelContext& ctx) {
  const double d2 = ctx.r_diag * ctx.r_diag;
  if (ctx.r_col.size() == 0) {
    const double v = d2 / ctx.sigma2;
    return {v, v};
  }
  const CMat s1 = hermitian_solve(ctx.sigma, ctx.r_col);
  const CMat s2 = hermitian_solve(ctx.sigma, s1);
  const double q1 = ctx.r_col.col(0).dot(s1.col(0)).real();
  const double q2 = ctx.r_col.col(0).dot(s2.col(0)).real();
  return {ctx.sigma2 * q2 + d2 / ctx.sigma2, q1 + d2 / ctx.sigma2};
}

double finite_upper_bound(const LevelContext& ctx) {
  if (ctx.r_col.size() == 0) return 0.0;
  CMat a = ctx.lambda_min * (ctx.r11 * ctx.r11.adjoint());
  a.diagonal().array() += ctx.sigma2;
  const CMat s = hermitian_solve(a, ctx.r_col);
  return ctx.r_col.col(0).dot(s.col(0)).real();
}

double finite_lower_bound(const LevelContext& ctx) {
  if (ctx.r_col.size() == 0) return 0.0;
  CMat a = ctx.lambda_max * (ctx.r11 * ctx.r11.adjoint());
  a.diagonal().array() += ctx.sigma2;
  const CMat s = hermitian_solve(a, ctx.r_col);
  return ctx.sigma2 * s.col(0).squaredNorm();
}

double g_function(double x, double b) {
  if (x < 0.0 || b < 0.0) throw ParamError("g_function: arguments must be non-negative");
  const double om = 1.0 - b;
  return std::sqrt(1.0 + 2.0 * (1.0 + b) * x + om * om * x * x);
}

AsymptoticBounds asymptotic_bounds(double gamma, double beta, double lambda_min,
                                   double lambda_max, double sigma2) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParamError("asymptotic_bounds: gamma in (0,1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw ParamError("asymptotic_bounds: beta in (0,1]");
  if (!(lambda_min > 0.0 && lambda_max >= lambda_min)) {
    throw ParamError("asymptotic_bounds: need 0 < lambda_min <= lambda_max");
  }
  if (!(sigma2 > 0.0)) throw ParamError("asymptotic_bounds: sigma2 must be positive");

  const double gb = gamma * beta;
  AsymptoticBounds out;
  {
    const double x = lambda_min / sigma2;
    out.upper = (-1.0 - (1.0 - gb) * x + g_function(x, gb)) / (2.0 * lambda_min);
  }
  {
    const double x = lambda_max / sigma2;
    const double om = 1.0 - gb;
    out.lower = (-om + (1.0 + gb + om * om * x) / g_function(x, gb)) / (2.0 * sigma2);
  }
  return out;
}

double small_noise_limit(double lambda_min, double gamma_beta) {
  if (!(gamma_beta > 0.0 && gamma_beta < 1.0)) {
    throw ParamError("small_noise_limit: gamma*beta in (0,1)");
  }
  return lambda_min * gamma_beta / (1.0 - gamma_beta);
}

double marcenko_pastur_density(double x, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw ParamError("marcenko_pastur_density: ratio in (0,1]");
  const double sq = std::sqrt(c);
  const double lo = (1.0 - sq) * (1.0 - sq);
  const double hi = (1.0 + sq) * (1.0 + sq);
  if (x <= lo || x >= hi) return 0.0;
  return std::sqrt((x - lo) * (hi - x)) / (2.0 * M_PI * c * x);
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qam_gap_constant(int q) {
  if (q < 1) throw ParamError("qam_gap_constant: q must be positive");
  return 3.0 / (std::pow(2.0, q) - 1.0);
}

double qam_prefactor(int q) {
  if (q < 1) throw ParamError("qam_prefactor: q must be positive");
  return 4.0 * (1.0 - 1.0 / std::sqrt(std::pow(2.0, q)));
}

double cpl_from_sinr(double sinr, int q) {
  if (sinr < 0.0) throw ParamError("cpl_from_sinr: sinr must be non-negative");
  return qam_prefactor(q) * qfunc(std::sqrt(qam_gap_constant(q) * sinr));
}

double cpl_level_bound(const LevelContext& ctx, int q, SinrVariant variant) {
  const double sinr =
      variant == SinrVariant::kExact ? lookahead_sinr(ctx) : sinr_bounds(ctx).lower;
  return cpl_from_sinr(sinr, q);
}

CplTotal cpl_total(const std::vector<double>& per_level) {
  CplTotal t;
  double keep = 1.0;
  for (const double p : per_level) {
    if (p < 0.0) throw ParamError("cpl_total: negative probability");
    keep *= 1.0 - std::min(p, 1.0);
    t.first_order += p;
  }
  t.product_form = 1.0 - keep;
  return t;
}

double chi_square_q_average(int l, int k, int q, double sigma2) {
  if (k < 1 || l < k) throw ParamError("chi_square_q_average: need 1 <= k <= l");
  if (!(sigma2 > 0.0)) throw ParamError("chi_square_q_average: sigma2 must be positive");
  const double gap = qam_gap_constant(q);
  const double mu = std::sqrt(gap / (gap + 2.0 * sigma2));
  const int m = l - k + 1;  // diversity branches
  const double pm = 0.5 * (1.0 - mu);
  const double pp = 0.5 * (1.0 + mu);
  // sum_{t=0}^{m-1} C(m-1+t, t) pp^t, with the binomial built iteratively
  double sum = 0.0;
  double coef = 1.0;
  double ppt = 1.0;
  for (int t = 0; t < m; ++t) {
    if (t > 0) {
      coef *= static_cast<double>(m - 1 + t) / static_cast<double>(t);
      ppt *= pp;
    }
    sum += coef * ppt;
  }
  return std::pow(pm, m) * sum;
}

ScalingGain scaling_gain(int l, int k, int q, double sigma2, double lambda_max,
                         std::uint64_t samples, std::uint64_t seed) {
  if (k < 1 || l < k) throw ParamError("scaling_gain: need 1 <= k <= l");
  if (!(sigma2 > 0.0) || !(lambda_max > 0.0)) {
    throw ParamError("scaling_gain: sigma2 and lambda_max must be positive");
  }
  ScalingGain g;
  g.samples = samples;
  if (k == 1) {  // empty interference block: no shrinkage
    g.std_error = 0.0;
    return g;
  }
  if (samples == 0) throw ParamError("scaling_gain: samples must be positive");

  const double gap = qam_gap_constant(q);
  const int dim = k - 1;
  Rng rng(Rng::derive(seed, 0xA11A));
  double acc = 0.0, acc2 = 0.0;
  CMat h1(l, dim);
  for (std::uint64_t it = 0; it < samples; ++it) {
    for (int j = 0; j < dim; ++j) {
      for (int i = 0; i < l; ++i) h1(i, j) = rng.cgaussian(1.0);
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(h1.adjoint() * h1);
    double prod = 1.0;
    for (int i = 0; i < dim; ++i) {
      const double denom = lambda_max * std::max(es.eigenvalues()[i], 0.0) + sigma2;
      prod /= 1.0 + 0.5 * gap * sigma2 / (denom * denom);
    }
    acc += prod;
    acc2 += prod * prod;
  }
  const double mean = acc / static_cast<double>(samples);
  const double var = std::max(0.0, acc2 / static_cast<double>(samples) - mean * mean);
  g.value = mean;
  g.std_error = std::sqrt(var / static_cast<double>(samples));
  g.stable = g.std_error <= 1e-3 * std::max(mean, 1e-12);
  return g;
}

AvgCpl avg_cpl_dominant(int l, int n, int q, double sigma2, double lambda_max,
                        std::uint64_t samples, std::uint64_t seed) {
  AvgCpl out;
  const double base = chi_square_q_average(l, n, q, sigma2) * qam_prefactor(q);
  const ScalingGain g = scaling_gain(l, n, q, sigma2, lambda_max, samples, seed);
  out.causal = base;
  out.lookahead = base * g.value;
  out.lookahead_std_error = base * g.std_error;
  return out;
}

}  // namespace treedet
