#include "treedet/cpl.hpp"

#include <cmath>
#include <vector>

#include "treedet/analysis.hpp"
#include "treedet/comms.hpp"
#include "treedet/constellation.hpp"
#include "treedet/linalg.hpp"
#include "treedet/rng.hpp"

namespace treedet {

CplPoint simulate_cpl(const CplConfig& cfg) {
  if (cfg.n < 1 || cfg.l < cfg.n) throw ParamError("simulate_cpl: need 1 <= n <= l");
  if (cfg.trials == 0) throw ParamError("simulate_cpl: trials must be positive");
  if (cfg.m < 1) throw ParamError("simulate_cpl: m must be positive");

  const Constellation c(cfg.q);
  const double sigma2 = noise_variance_for_snr_db(cfg.snr_db, cfg.n);
  const ChannelModel model = ChannelModel::iid(cfg.l, cfg.n);
  const PriorStats zero = PriorStats::zero(cfg.n, c);

  SearchConfig sc;
  sc.m = cfg.m;
  sc.j = 0;
  sc.n_l = cfg.n_l;
  sc.metric = cfg.metric;
  sc.ordering = Ordering::kNone;

  CplPoint out;
  out.trials = cfg.trials;
  std::vector<int> truth(cfg.n);
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(Rng::derive(cfg.seed, t));
    const CMat h = sample_channel(model, rng);
    CVec x(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      truth[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.size())));
      x[i] = c.point(truth[i]);
    }
    const CVec y_o = add_awgn(h * x, sigma2, rng);

    const QrThin qr = thin_qr(h);
    const DetectionProblem p =
        make_problem(qr.r, qr.q.adjoint() * y_o, sigma2, 0.0, c, zero);
    const CandidateList list = m_search(p, sc);

    bool found = false;
    for (const Candidate& cand : list.entries) {
      if (cand.syms == truth) {
        found = true;
        break;
      }
    }
    if (!found) ++out.losses;
  }
  out.rate = static_cast<double>(out.losses) / static_cast<double>(out.trials);
  out.std_error =
      std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(out.trials));
  return out;
}

CplCurvePoint cpl_union_average(int n, int l, int q, double sigma2,
                                std::uint64_t samples, std::uint64_t seed) {
  if (n < 2 || l < n) throw ParamError("cpl_union_average: need 2 <= n <= l");
  if (samples == 0) throw ParamError("cpl_union_average: samples must be positive");
  if (!(sigma2 > 0.0)) throw ParamError("cpl_union_average: sigma2 must be positive");

  const ChannelModel model = ChannelModel::iid(l, n);
  const RVec ones = RVec::Ones(n);
  double se[2] = {0.0, 0.0};
  double acc[2] = {0.0, 0.0};
  double acc2[2] = {0.0, 0.0};
  std::vector<double> exact_terms, loose_terms;
  for (std::uint64_t s = 0; s < samples; ++s) {
    Rng rng(Rng::derive(seed, 0xC0DA + s));
    const QrThin qr = thin_qr(sample_channel(model, rng));
    exact_terms.clear();
    loose_terms.clear();
    for (int k = 2; k <= n; ++k) {
      const LevelContext ctx = make_level_context(qr.r, ones, sigma2, k);
      exact_terms.push_back(cpl_level_bound(ctx, q, SinrVariant::kExact));
      loose_terms.push_back(cpl_level_bound(ctx, q, SinrVariant::kLowerBound));
    }
    const double e = cpl_total(exact_terms).product_form;
    const double b = cpl_total(loose_terms).product_form;
    acc[0] += e;
    acc2[0] += e * e;
    acc[1] += b;
    acc2[1] += b * b;
  }
  for (int i = 0; i < 2; ++i) {
    const double mean = acc[i] / static_cast<double>(samples);
    const double var = std::max(0.0, acc2[i] / static_cast<double>(samples) - mean * mean);
    acc[i] = mean;
    se[i] = std::sqrt(var / static_cast<double>(samples));
  }
  CplCurvePoint out;
  out.exact = acc[0];
  out.exact_se = se[0];
  out.loose = acc[1];
  out.loose_se = se[1];
  return out;
}

}  // namespace treedet
