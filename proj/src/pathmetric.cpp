#include "treedet/pathmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace treedet {

DetectionProblem make_problem(CMat r, CVec y, double sigma2, double c_const,
                              const Constellation& c, const PriorStats& priors,
                              MulCount* mc) {
  const int n = static_cast<int>(r.rows());
  if (r.cols() != n || y.size() != n) throw ShapeError("make_problem: R/y shape mismatch");
  if (priors.n() != n) throw ShapeError("make_problem: prior stream count mismatch");
  if (!(sigma2 > 0.0)) throw ParamError("make_problem: sigma2 must be positive");
  if (c_const < 0.0) throw ParamError("make_problem: c_const must be non-negative");

  DetectionProblem p;
  p.r = std::move(r);
  p.y = std::move(y);
  p.sigma2 = sigma2;
  p.c_const = c_const;
  p.constellation = &c;
  p.sym_mean = priors.sym_mean;
  p.sym_var = priors.sym_var;
  p.prior_llr = priors.llr;

  const int q = c.bits();
  const int sz = c.size();
  p.xi.resize(n, sz);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < sz; ++s) {
      double lp = 0.0;
      for (int i = 0; i < q; ++i) {
        const double pb = c.bit(s, i) ? priors.bit_prob[k * q + i]
                                      : 1.0 - priors.bit_prob[k * q + i];
        lp += std::log(pb);  // -inf when the prior rules the bit out
      }
      p.xi(k, s) = -sigma2 * lp;
    }
  }
  bump(mc, &MulCount::prior, static_cast<std::uint64_t>(n) * sz);
  return p;
}

PathNode make_root(const DetectionProblem& p, MulCount* mc) {
  const int n = p.n();
  PathNode root;
  root.level = n + 1;
  root.syms.assign(static_cast<std::size_t>(n), -1);
  if (p.sym_mean.isZero(0.0)) {
    root.residual = p.y;
  } else {
    root.residual = p.y - p.r.triangularView<Eigen::Upper>() * p.sym_mean;
    bump(mc, &MulCount::metric, static_cast<std::uint64_t>(n) * (n + 1) / 2);
  }
  return root;
}

namespace {

// One block-extension step: given Z for a window and the next column's
// in-window part u, diagonal d and prior variance lam, produce the window
// grown by one. Mirrors the Schur-complement identity for
// sigma2 * (R Lambda R^H + sigma2 I)^-1.
CMat z_extend(const CMat& z, const CVec& u, double d, double lam, double sigma2,
              MulCount* mc) {
  const Eigen::Index t = z.rows();
  CMat out(t + 1, t + 1);
  const CVec zu = z * u;
  const double s = u.dot(zu).real();
  const double kk = 1.0 / (lam * (s + d * d) + sigma2);
  out.topLeftCorner(t, t) = z - (kk * lam) * (zu * zu.adjoint());
  out.topRightCorner(t, 1) = (-kk * lam * d) * zu;
  out.bottomLeftCorner(1, t) = out.topRightCorner(t, 1).adjoint();
  out(t, t) = kk * (lam * s + sigma2);
  bump(mc, &MulCount::zprep, static_cast<std::uint64_t>(2 * t * t + 3 * t + 4));
  return out;
}

// Z for the window of `len` columns starting at 0-based column c0.
CMat z_window(const CMat& r, const RVec& lambda, double sigma2, int c0, int len,
              MulCount* mc) {
  CMat z(1, 1);
  const double d0 = r(c0, c0).real();
  z(0, 0) = sigma2 / (lambda[c0] * d0 * d0 + sigma2);
  bump(mc, &MulCount::zprep, 2);
  for (int t = 1; t < len; ++t) {
    z = z_extend(z, r.block(c0, c0 + t, t, 1), r(c0 + t, c0 + t).real(), lambda[c0 + t],
                 sigma2, mc);
  }
  return z;
}

}  // namespace

ZSequence compute_z_sequence(const DetectionProblem& p, int lookahead, MulCount* mc) {
  const int n = p.n();
  ZSequence zs;
  zs.n = n;
  zs.lookahead = std::clamp(lookahead, 0, n - 1);
  if (zs.lookahead == 0 || n < 2) return zs;

  zs.z.resize(static_cast<std::size_t>(n - 1));
  // Shared prefix: while the window still covers every undecided symbol the
  // matrices chain by plain extension.
  CMat z = z_window(p.r, p.sym_var, p.sigma2, 0, 1, mc);
  zs.z[0] = z;
  for (int level = 3; level <= n; ++level) {
    const int m = zs.window(level);
    if (m == level - 1) {
      z = z_extend(z, p.r.block(0, level - 2, level - 2, 1), p.r(level - 2, level - 2).real(),
                   p.sym_var[level - 2], p.sigma2, mc);
      zs.z[static_cast<std::size_t>(level - 2)] = z;
    } else {
      // Truncated: rebuild on the repartitioned trailing block. Cost is
      // O(n_l^3) per level and sits outside the per-node search loop.
      zs.z[static_cast<std::size_t>(level - 2)] =
          z_window(p.r, p.sym_var, p.sigma2, level - 1 - m, m, mc);
    }
  }
  return zs;
}

void extend_node(const DetectionProblem& p, const PathNode& parent, int symbol,
                 const ZSequence* zs, PathNode& child, MulCount* mc) {
  const int k = parent.level - 1;
  child.level = k;
  child.syms = parent.syms;
  child.syms[static_cast<std::size_t>(k - 1)] = symbol;

  const cplx delta = p.constellation->point(symbol) - p.sym_mean[k - 1];
  CVec t = parent.residual;
  if (delta != cplx(0.0, 0.0)) {
    t.noalias() -= p.r.col(k - 1).head(k) * delta;
    bump(mc, &MulCount::metric, static_cast<std::uint64_t>(k));
  }
  const double v2 = std::norm(t[k - 1]);
  bump(mc, &MulCount::metric, 1);
  child.residual = t.head(k - 1);
  child.causal = parent.causal + v2 + p.xi(k - 1, symbol);
  child.bias = 0.0;

  if (zs != nullptr && k >= 2) {
    const int m = zs->window(k);
    if (m > 0) {
      const CVec zv = zs->at_level(k) * child.residual.tail(m);
      child.bias = zv.squaredNorm();
      bump(mc, &MulCount::bias, static_cast<std::uint64_t>(m) * m);
      bump(mc, &MulCount::metric, static_cast<std::uint64_t>(m));
    }
  }
}

double branch_metric(const DetectionProblem& p, int level, const std::vector<int>& syms,
                     MulCount* mc) {
  const int n = p.n();
  if (level < 1 || level > n) throw ParamError("branch_metric: level out of range");
  cplx acc = p.y[level - 1];
  for (int j = level; j <= n; ++j) {
    const int s = syms[static_cast<std::size_t>(j - 1)];
    if (s < 0) throw ParamError("branch_metric: undecided symbol in row support");
    acc -= p.r(level - 1, j - 1) * p.constellation->point(s);
  }
  bump(mc, &MulCount::app, static_cast<std::uint64_t>(n - level + 2));
  return std::norm(acc) + p.xi(level - 1, syms[static_cast<std::size_t>(level - 1)]);
}

double direct_cost(const DetectionProblem& p, const std::vector<int>& syms, MulCount* mc) {
  const int n = p.n();
  double total = 0.0;
  for (int i = 1; i <= n; ++i) total += branch_metric(p, i, syms, mc);
  return total;
}

namespace {

// Depth-first minimum over all assignments of levels depth..1 given the
// residual rows above a partial path. Cost increments are non-negative
// (|v|^2 and prior costs), so pruning against the incumbent is exact.
struct OracleDfs {
  const DetectionProblem& p;
  MulCount* mc;
  double best = std::numeric_limits<double>::infinity();

  void run(int depth, const CVec& acc, double cost) {
    const int sz = p.constellation->size();
    for (int s = 0; s < sz; ++s) {
      // acc is centered on the prior means, so extend by the delta only.
      const cplx dx = p.constellation->point(s) - p.sym_mean[depth - 1];
      const cplx v = acc[depth - 1] - p.r(depth - 1, depth - 1) * dx;
      const double c2 = cost + std::norm(v) + p.xi(depth - 1, s);
      bump(mc, &MulCount::bias, static_cast<std::uint64_t>(depth) + 1);
      if (!(c2 < best)) continue;
      if (depth == 1) {
        best = c2;
        continue;
      }
      const CVec acc2 = acc.head(depth - 1) - p.r.col(depth - 1).head(depth - 1) * dx;
      run(depth - 1, acc2, c2);
    }
  }
};

}  // namespace

double oracle_completion_bias(const DetectionProblem& p, const PathNode& node,
                              MulCount* mc) {
  const int k = std::min(node.level, p.n() + 1);
  const int undecided = k - 1;
  if (undecided == 0) return 0.0;
  if (undecided * p.constellation->bits() > 20) {
    throw TooLargeError("oracle_completion_bias: completion alphabet exceeds 2^20");
  }
  OracleDfs dfs{p, mc};
  dfs.run(undecided, node.residual, 0.0);
  return dfs.best;
}

}  // namespace treedet
