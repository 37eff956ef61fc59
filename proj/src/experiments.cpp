#include "treedet/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "treedet/analysis.hpp"
#include "treedet/comms.hpp"
#include "treedet/cpl.hpp"
#include "treedet/idd.hpp"
#include "treedet/linalg.hpp"
#include "treedet/rng.hpp"

namespace treedet {

namespace {

ResultTable ber_sweep(const ExperimentConfig& cfg) {
  const IddResult r = run_idd(cfg.idd);
  ResultTable t;
  t.columns = {"snr_db", "iteration", "ber_info", "ber_coded", "mult_per_symbol",
               "frames"};
  for (std::size_t si = 0; si < r.snr_db.size(); ++si) {
    for (int it = 0; it < r.iterations; ++it) {
      const IddCell& c = r.cells[si][static_cast<std::size_t>(it)];
      t.rows.push_back({r.snr_db[si], static_cast<double>(it + 1), c.info_ber(),
                        c.coded_ber(), c.mults_per_symbol(),
                        static_cast<double>(c.frames)});
    }
  }
  return t;
}

ResultTable cpl_sweep(const ExperimentConfig& cfg) {
  const CplSweepConfig& c = cfg.cpl;
  ResultTable t;
  t.columns = {"snr_db", "cpl_simulated", "cpl_eq49", "cpl_eq50_bound"};
  for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
    CplConfig cc;
    cc.n = c.n;
    cc.l = c.l;
    cc.q = c.q;
    cc.snr_db = c.snr_db[i];
    cc.m = c.m;
    cc.n_l = c.n_l;
    cc.metric = c.metric;
    cc.trials = c.trials;
    cc.seed = Rng::derive(cfg.seed, 0xCC00 + i);
    const CplPoint p = simulate_cpl(cc);
    const double sigma2 = noise_variance_for_snr_db(c.snr_db[i], c.n);
    const CplCurvePoint b = cpl_union_average(c.n, c.l, c.q, sigma2, c.bound_samples,
                                              Rng::derive(cfg.seed, 0xBB00 + i));
    t.rows.push_back({c.snr_db[i], p.rate, b.exact, b.loose});
  }
  return t;
}

ResultTable scaling_sweep(const ExperimentConfig& cfg) {
  const ScalingConfig& c = cfg.scaling;
  ResultTable t;
  t.columns = {"n", "l", "snr_db", "gain", "std_error", "samples"};
  std::uint64_t idx = 0;
  for (const int n : c.n_list) {
    for (const double snr : c.snr_db) {
      const double sigma2 = noise_variance_for_snr_db(snr, n);
      const ScalingGain g = scaling_gain(n, n, c.q, sigma2, c.lambda_max, c.samples,
                                         Rng::derive(cfg.seed, 0x5CA0 + idx));
      ++idx;
      t.rows.push_back({static_cast<double>(n), static_cast<double>(n), snr, g.value,
                        g.std_error, static_cast<double>(g.samples)});
    }
  }
  return t;
}

ResultTable sinr_sweep(const ExperimentConfig& cfg) {
  const SinrConfig& c = cfg.sinr;
  const ChannelModel model = ChannelModel::iid(c.l, c.n);
  const RVec ones = RVec::Ones(c.n);
  ResultTable t;
  t.columns = {"snr_db", "sample", "k", "sinr", "lower", "upper", "causal"};
  for (std::size_t si = 0; si < c.snr_db.size(); ++si) {
    const double sigma2 = noise_variance_for_snr_db(c.snr_db[si], c.n);
    for (int s = 0; s < c.samples; ++s) {
      Rng rng(Rng::derive(cfg.seed, 0x51B0 + si * static_cast<std::size_t>(c.samples) +
                                        static_cast<std::size_t>(s)));
      const QrThin qr = thin_qr(sample_channel(model, rng));
      for (int k = 2; k <= c.n; ++k) {
        const LevelContext ctx = make_level_context(qr.r, ones, sigma2, k);
        const SinrBounds b = sinr_bounds(ctx);
        t.rows.push_back({c.snr_db[si], static_cast<double>(s), static_cast<double>(k),
                          lookahead_sinr(ctx), b.lower, b.upper,
                          ctx.r_diag * ctx.r_diag / sigma2});
      }
    }
  }
  return t;
}

ResultTable complexity_report(const ExperimentConfig& cfg) {
  const ComplexityConfig& c = cfg.complexity;
  const Constellation cons(c.q);
  const ChannelModel model = ChannelModel::iid(c.l, c.n);
  const PriorStats zero = PriorStats::zero(c.n, cons);
  const double sigma2 = noise_variance_for_snr_db(c.snr_db, c.n);

  ResultTable t;
  t.columns = {"n",        "m",        "n_l",        "lookahead", "vectors",
               "mult_metric", "mult_bias", "mult_zprep", "mult_app",  "mult_prior",
               "mult_total",  "mult_per_vector"};

  // Same channel/noise instances for every row so the deltas isolate the
  // metric configuration.
  auto measure = [&](Metric metric, int n_l) {
    SearchConfig sc;
    sc.m = c.m;
    sc.j = std::min(16, (1 << c.q) * c.m);
    sc.n_l = n_l;
    sc.metric = metric;
    sc.ordering = Ordering::kNone;
    MulCount total;
    for (int v = 0; v < c.vectors; ++v) {
      Rng rng(Rng::derive(cfg.seed, 0xC0DE + static_cast<std::uint64_t>(v)));
      const CMat h = sample_channel(model, rng);
      CVec x(c.n);
      for (int i = 0; i < c.n; ++i) {
        x[i] = cons.point(static_cast<int>(rng.below(static_cast<std::uint64_t>(cons.size()))));
      }
      const CVec y = add_awgn(h * x, sigma2, rng);
      const DetectorOutput d = detect(h, y, sigma2, zero, cons, sc);
      total += d.mults;
    }
    const bool lookahead = metric == Metric::kLookahead && n_l > 0;
    t.rows.push_back({static_cast<double>(c.n), static_cast<double>(c.m),
                      static_cast<double>(n_l), lookahead ? 1.0 : 0.0,
                      static_cast<double>(c.vectors),
                      static_cast<double>(total.metric), static_cast<double>(total.bias),
                      static_cast<double>(total.zprep), static_cast<double>(total.app),
                      static_cast<double>(total.prior), static_cast<double>(total.total()),
                      static_cast<double>(total.total()) / c.vectors});
  };

  measure(Metric::kCausal, 0);
  for (const int n_l : c.n_l_list) measure(Metric::kLookahead, n_l);
  return t;
}

ResultTable asymptotics_sweep(const ExperimentConfig& cfg) {
  const AsymptoticsConfig& c = cfg.asym;
  ResultTable t;
  t.columns = {"gamma",  "beta",  "lambda_min", "lambda_max",
               "sigma2", "upper", "lower",      "small_noise_limit"};
  const double limit = small_noise_limit(c.lambda_min, c.gamma * c.beta);
  for (const double s2 : c.sigma2) {
    const AsymptoticBounds b =
        asymptotic_bounds(c.gamma, c.beta, c.lambda_min, c.lambda_max, s2);
    t.rows.push_back(
        {c.gamma, c.beta, c.lambda_min, c.lambda_max, s2, b.upper, b.lower, limit});
  }
  return t;
}

void atomic_write(const std::string& path, const std::string& body) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << body;
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move results into place at " + path);
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "ber_sweep") return ber_sweep(cfg);
  if (cfg.experiment == "cpl_sweep") return cpl_sweep(cfg);
  if (cfg.experiment == "scaling_gain") return scaling_sweep(cfg);
  if (cfg.experiment == "sinr_bounds") return sinr_sweep(cfg);
  if (cfg.experiment == "complexity_report") return complexity_report(cfg);
  if (cfg.experiment == "asymptotics") return asymptotics_sweep(cfg);
  throw ConfigError("experiment: unknown kind " + cfg.experiment);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv_atomic(const std::string& path, const ResultTable& t) {
  std::string body;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) body += ',';
    body += t.columns[i];
  }
  body += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw Error("result row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) body += ',';
      body += format_number(row[i]);
    }
    body += '\n';
  }
  atomic_write(path, body);
}

void write_metadata(const std::string& csv_path, const ExperimentConfig& cfg,
                    double elapsed_seconds, std::size_t rows) {
  nlohmann::json meta{{"config", cfg.resolved},
                      {"config_hash", config_hash(cfg.resolved)},
                      {"seed", cfg.seed},
                      {"version", kVersion},
                      {"elapsed_seconds", elapsed_seconds},
                      {"rows", rows}};
  atomic_write(csv_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace treedet
