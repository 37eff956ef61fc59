#include "treedet/priors.hpp"

#include <cmath>

namespace treedet {

double bit_prob_from_llr(double llr, int sign) {
  if (sign != 1 && sign != -1) throw ParamError("bit_prob_from_llr: sign must be +-1");
  if (std::isnan(llr)) throw ParamError("bit_prob_from_llr: llr is NaN");
  if (llr >= kCertainLlr) return sign > 0 ? 1.0 : 0.0;
  if (llr <= -kCertainLlr) return sign > 0 ? 0.0 : 1.0;
  return 0.5 * (1.0 + sign * std::tanh(0.5 * llr));
}

SymbolStats symbol_stats(const double* llr, const Constellation& c) {
  const int q = c.bits();
  bool all_zero = true;
  for (int i = 0; i < q; ++i) {
    if (llr[i] != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) return {cplx(0.0, 0.0), 1.0};  // uniform prior, unit-energy alphabet

  double pb[2 * 12];  // q <= 12
  for (int i = 0; i < q; ++i) {
    pb[2 * i] = bit_prob_from_llr(llr[i], -1);
    pb[2 * i + 1] = bit_prob_from_llr(llr[i], +1);
  }

  const int sz = c.size();
  double prob[1 << 12];
  cplx mean(0.0, 0.0);
  for (int s = 0; s < sz; ++s) {
    double p = 1.0;
    for (int i = 0; i < q; ++i) p *= pb[2 * i + c.bit(s, i)];
    prob[s] = p;
    mean += p * c.point(s);
  }
  double var = 0.0;
  for (int s = 0; s < sz; ++s) var += prob[s] * std::norm(c.point(s) - mean);
  return {mean, var};
}

PriorStats PriorStats::zero(int n, const Constellation& c) {
  PriorStats s;
  const int q = c.bits();
  s.llr = RVec::Zero(n * q);
  s.bit_prob = RVec::Constant(n * q, 0.5);
  s.sym_mean = CVec::Zero(n);
  s.sym_var = RVec::Ones(n);
  return s;
}

PriorStats prior_stats_from_llrs(const RVec& llrs, const Constellation& c, MulCount* mc) {
  const int q = c.bits();
  if (llrs.size() % q != 0) throw ShapeError("prior_stats_from_llrs: llr count not n*q");
  const int n = static_cast<int>(llrs.size()) / q;

  PriorStats s;
  s.llr = llrs;
  s.bit_prob.resize(n * q);
  s.sym_mean.resize(n);
  s.sym_var.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < q; ++i) {
      s.bit_prob[k * q + i] = bit_prob_from_llr(llrs[k * q + i], +1);
    }
    const SymbolStats st = symbol_stats(llrs.data() + k * q, c);
    s.sym_mean[k] = st.mean;
    s.sym_var[k] = st.var;
  }
  // Product-of-probabilities per point plus the moment sums, counted as real
  // multiplications.
  bump(mc, &MulCount::prior, static_cast<std::uint64_t>(n) * c.size() * (q + 2));
  return s;
}

PriorStats permute_priors(const PriorStats& s, const std::vector<int>& perm, int q) {
  const int n = s.n();
  if (static_cast<int>(perm.size()) != n) throw ShapeError("permute_priors: perm size");
  PriorStats p;
  p.llr.resize(n * q);
  p.bit_prob.resize(n * q);
  p.sym_mean.resize(n);
  p.sym_var.resize(n);
  for (int lvl = 0; lvl < n; ++lvl) {
    const int src = perm[static_cast<std::size_t>(lvl)];
    p.sym_mean[lvl] = s.sym_mean[src];
    p.sym_var[lvl] = s.sym_var[src];
    p.llr.segment(lvl * q, q) = s.llr.segment(src * q, q);
    p.bit_prob.segment(lvl * q, q) = s.bit_prob.segment(src * q, q);
  }
  return p;
}

}  // namespace treedet
