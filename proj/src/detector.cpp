#include "treedet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "treedet/linalg.hpp"

namespace treedet {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<int> vblast_order(const CMat& h, double sigma2) {
  const int n = static_cast<int>(h.cols());
  std::vector<int> remaining(static_cast<std::size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> perm(static_cast<std::size_t>(n), -1);

  for (int level = n; level >= 1; --level) {
    const int m = static_cast<int>(remaining.size());
    CMat hs(h.rows(), m);
    for (int j = 0; j < m; ++j) hs.col(j) = h.col(remaining[static_cast<std::size_t>(j)]);
    CMat gram = hs.adjoint() * hs;
    gram.diagonal().array() += sigma2;
    CMat inv;
    try {
      inv = hermitian_solve(gram, CMat::Identity(m, m));
    } catch (const NotPositiveDefiniteError&) {
      static bool warned = false;
      if (!warned) {
        std::cerr << "vblast_order: Gram matrix not invertible, falling back to "
                     "column-norm ordering\n";
        warned = true;
      }
      // Strongest column to the highest open level, then descend.
      std::sort(remaining.begin(), remaining.end(), [&](int a, int b) {
        const double na = h.col(a).squaredNorm();
        const double nb = h.col(b).squaredNorm();
        return na != nb ? na < nb : a < b;
      });
      for (int lvl = 1; lvl <= level; ++lvl) {
        perm[static_cast<std::size_t>(lvl - 1)] = remaining[static_cast<std::size_t>(lvl - 1)];
      }
      return perm;
    }
    // Smallest diagonal of the inverse = largest post-MMSE SINR. Ties keep
    // the larger stream index (makes ordering of I the identity).
    int pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      const double val = inv(j, j).real();
      if (val <= best) {
        best = val;
        pick = j;
      }
    }
    perm[static_cast<std::size_t>(level - 1)] = remaining[static_cast<std::size_t>(pick)];
    remaining.erase(remaining.begin() + pick);
  }
  return perm;
}

CandidateList m_search(const DetectionProblem& p, const SearchConfig& cfg, MulCount* mc) {
  const int n = p.n();
  if (cfg.m < 1) throw ParamError("m_search: m must be >= 1");
  const int sz = p.constellation->size();

  ZSequence zs;
  const ZSequence* zp = nullptr;
  if (cfg.metric == Metric::kLookahead && cfg.n_l > 0 && n >= 2) {
    zs = compute_z_sequence(p, cfg.n_l, mc);
    if (zs.lookahead > 0) zp = &zs;
  }

  std::vector<PathNode> survivors;
  survivors.push_back(make_root(p, mc));
  std::vector<PathNode> children;

  for (int level = n; level >= 1; --level) {
    children.clear();
    children.reserve(survivors.size() * static_cast<std::size_t>(sz));
    for (const PathNode& parent : survivors) {
      for (int s = 0; s < sz; ++s) {
        PathNode child;
        extend_node(p, parent, s, level >= 2 ? zp : nullptr, child, mc);
        if (cfg.metric == Metric::kOracle && level >= 2) {
          child.bias = oracle_completion_bias(p, child, mc);
        }
        children.push_back(std::move(child));
      }
    }
    if (level == 1) {
      survivors = std::move(children);
      break;
    }
    // Children were generated parent-major then symbol order, so a stable
    // sort on the metric realizes the (parent rank, symbol) tie-break.
    std::stable_sort(children.begin(), children.end(),
                     [](const PathNode& a, const PathNode& b) { return a.metric() < b.metric(); });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), children.size());
    survivors.assign(std::make_move_iterator(children.begin()),
                     std::make_move_iterator(children.begin() + static_cast<std::ptrdiff_t>(keep)));
  }

  CandidateList list;
  list.entries.reserve(survivors.size());
  for (const PathNode& node : survivors) {
    Candidate cand;
    cand.syms = node.syms;
    cand.cost = node.causal;  // at level 1 this is the full-path cost
    cand.psi = -(cand.cost + p.c_const) / p.sigma2;
    list.entries.push_back(std::move(cand));
  }
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  return list;
}

DetectorOutput extend_and_compute_llrs(const DetectionProblem& p, const SearchConfig& cfg,
                                       const CandidateList& list, MulCount* mc) {
  const int n = p.n();
  const int q = p.constellation->bits();
  if (static_cast<int>(list.perm.size()) != n) {
    throw ShapeError("extend_and_compute_llrs: permutation size mismatch");
  }

  DetectorOutput out;
  out.extrinsic.resize(n * q);
  out.posterior.resize(n * q);
  out.list_size = static_cast<int>(list.entries.size());

  const int flip_count = std::min<int>(cfg.j, out.list_size);
  for (int level = 1; level <= n; ++level) {
    const int orig = list.perm[static_cast<std::size_t>(level - 1)];
    for (int i = 0; i < q; ++i) {
      double best[2] = {kNegInf, kNegInf};
      for (const Candidate& e : list.entries) {
        const int b = p.constellation->bit(e.syms[static_cast<std::size_t>(level - 1)], i);
        if (e.psi > best[b]) best[b] = e.psi;
      }
      if ((best[0] == kNegInf || best[1] == kNegInf) && flip_count > 0) {
        ++out.flips;
        for (int t = 0; t < flip_count; ++t) {
          std::vector<int> syms = list.entries[static_cast<std::size_t>(t)].syms;
          int& sym = syms[static_cast<std::size_t>(level - 1)];
          sym = p.constellation->flip_bit(sym, i);
          const double cost = direct_cost(p, syms, mc);
          const double psi = -(cost + p.c_const) / p.sigma2;
          const int b = p.constellation->bit(sym, i);
          if (psi > best[b]) best[b] = psi;
        }
      }
      // The clip bounds the fresh information. Clipping the posterior instead
      // would cancel a saturated prior and starve the decoder.
      const double lpri = p.prior_llr[(level - 1) * q + i];
      double lext;
      if (best[0] == kNegInf && best[1] == kNegInf) {
        lext = 0.0;  // degenerate: every hypothesis excluded by priors
      } else if (best[1] == kNegInf) {
        lext = -cfg.llr_clip;
      } else if (best[0] == kNegInf) {
        lext = cfg.llr_clip;
      } else {
        lext = std::clamp(best[1] - best[0] - lpri, -cfg.llr_clip, cfg.llr_clip);
      }
      out.posterior[orig * q + i] = lpri + lext;
      out.extrinsic[orig * q + i] = lext;
    }
  }
  if (mc) out.mults = *mc;
  return out;
}

Preprocessed preprocess(const CMat& h, const CVec& y_o, double sigma2,
                        const SearchConfig& cfg) {
  const int n = static_cast<int>(h.cols());
  if (y_o.size() != h.rows()) throw ShapeError("preprocess: y/H shape mismatch");
  Preprocessed pre;
  pre.sigma2 = sigma2;
  if (cfg.ordering == Ordering::kVblast) {
    pre.perm = vblast_order(h, sigma2);
  } else {
    pre.perm.resize(static_cast<std::size_t>(n));
    std::iota(pre.perm.begin(), pre.perm.end(), 0);
  }
  CMat hp(h.rows(), n);
  for (int j = 0; j < n; ++j) hp.col(j) = h.col(pre.perm[static_cast<std::size_t>(j)]);
  const QrThin qr = thin_qr(hp);
  pre.r = qr.r;
  pre.y = qr.q.adjoint() * y_o;
  pre.c_const = std::max(0.0, y_o.squaredNorm() - pre.y.squaredNorm());
  return pre;
}

DetectorOutput detect_prepared(const Preprocessed& pre, const PriorStats& priors,
                               const Constellation& c, const SearchConfig& cfg) {
  MulCount mc;
  const PriorStats permuted = permute_priors(priors, pre.perm, c.bits());
  const DetectionProblem p =
      make_problem(pre.r, pre.y, pre.sigma2, pre.c_const, c, permuted, &mc);
  CandidateList list = m_search(p, cfg, &mc);
  list.perm = pre.perm;
  return extend_and_compute_llrs(p, cfg, list, &mc);
}

DetectorOutput detect(const CMat& h, const CVec& y_o, double sigma2,
                      const PriorStats& priors, const Constellation& c,
                      const SearchConfig& cfg) {
  return detect_prepared(preprocess(h, y_o, sigma2, cfg), priors, c, cfg);
}

DetectorOutput mmse_pic_detect(const CMat& h, const CVec& y_o, double sigma2,
                               const PriorStats& priors, const Constellation& c,
                               double llr_clip) {
  const int l = static_cast<int>(h.rows());
  const int n = static_cast<int>(h.cols());
  const int q = c.bits();
  if (y_o.size() != l) throw ShapeError("mmse_pic_detect: y/H shape mismatch");
  if (priors.n() != n) throw ShapeError("mmse_pic_detect: prior stream count mismatch");
  if (!(sigma2 > 0.0)) throw ParamError("mmse_pic_detect: sigma2 must be positive");

  MulCount mc;
  DetectorOutput out;
  out.extrinsic.resize(n * q);
  out.posterior.resize(n * q);

  // Base covariance with prior variances; per-stream filters restore that
  // stream to unit variance via a rank-1 correction.
  CMat cov = sigma2 * CMat::Identity(l, l);
  for (int k = 0; k < n; ++k) {
    cov.noalias() += priors.sym_var[k] * (h.col(k) * h.col(k).adjoint());
  }
  mc.metric += static_cast<std::uint64_t>(n) * l * l;
  const CMat cov_inv = hermitian_solve(cov, CMat::Identity(l, l));
  mc.metric += static_cast<std::uint64_t>(l) * l * l;

  const CVec resid = y_o - h * priors.sym_mean;
  mc.metric += static_cast<std::uint64_t>(l) * n;

  for (int k = 0; k < n; ++k) {
    const CVec hk = h.col(k);
    const CVec s = cov_inv * hk;
    mc.metric += static_cast<std::uint64_t>(l) * l;
    const double alpha = 1.0 - priors.sym_var[k];
    // Sherman-Morrison: (cov + alpha hk hk^H)^-1 hk
    const CVec w = s / (1.0 + alpha * hk.dot(s).real());
    const cplx z = w.dot(resid + hk * priors.sym_mean[k]);
    mc.metric += static_cast<std::uint64_t>(2 * l);
    const double mu = std::clamp(w.dot(hk).real(), 1e-12, 1.0 - 1e-12);
    const cplx zeff = z / mu;
    const double nvar = (1.0 - mu) / mu;  // unbiased scalar channel noise power

    // Max-log demap with the other bits' priors in the hypothesis score.
    for (int i = 0; i < q; ++i) {
      double best[2] = {kNegInf, kNegInf};
      for (int sidx = 0; sidx < c.size(); ++sidx) {
        double score = -std::norm(zeff - c.point(sidx)) / nvar;
        for (int ii = 0; ii < q; ++ii) {
          if (ii == i) continue;
          const double lp = priors.llr[k * q + ii];
          score += (c.bit(sidx, ii) ? 0.5 : -0.5) * lp;
        }
        const int b = c.bit(sidx, i);
        if (score > best[b]) best[b] = score;
      }
      mc.app += static_cast<std::uint64_t>(c.size());
      const double lpri = priors.llr[k * q + i];
      double lext;
      if (best[0] == kNegInf && best[1] == kNegInf) {
        lext = 0.0;
      } else {
        // score omits bit i's own prior, so the difference is already extrinsic
        lext = std::clamp(best[1] - best[0], -llr_clip, llr_clip);
      }
      out.posterior[k * q + i] = lpri + lext;
      out.extrinsic[k * q + i] = lext;
    }
  }
  out.mults = mc;
  out.list_size = 0;
  return out;
}

}  // namespace treedet
