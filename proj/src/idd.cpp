#include "treedet/idd.hpp"

#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include "treedet/decoder.hpp"
#include "treedet/priors.hpp"

namespace treedet {

void validate_idd(const IddConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("idd.n: must be >= 1");
  if (cfg.l < cfg.n) throw ConfigError("idd.l: must be >= idd.n");
  if (cfg.q < 2 || cfg.q > 12 || cfg.q % 2 != 0) {
    throw ConfigError("idd.q: must be an even bit count in [2, 12]");
  }
  if (cfg.snr_db.empty()) throw ConfigError("idd.snr_db: must be non-empty");
  if (cfg.iterations < 1) throw ConfigError("idd.iterations: must be >= 1");
  if (cfg.info_bits == 0) throw ConfigError("idd.info_bits: must be positive");
  if (cfg.interleaver_bits < 2 || cfg.interleaver_bits % 2 != 0) {
    throw ConfigError("idd.interleaver_bits: must be a positive even count");
  }
  if (cfg.interleaver_bits % (cfg.n * cfg.q) != 0) {
    throw ConfigError("idd.interleaver_bits: must be divisible by n*q");
  }
  if (cfg.search.m < 1) throw ConfigError("idd.m: must be >= 1");
  if (cfg.search.j < 0) throw ConfigError("idd.j: must be >= 0");
  if (cfg.search.j > (1 << cfg.q) * cfg.search.m) {
    throw ConfigError("idd.j: must satisfy j <= 2^q * m");
  }
  if (cfg.search.n_l < 0) throw ConfigError("idd.n_l: must be >= 0");
  if (!(cfg.search.llr_clip > 0.0)) throw ConfigError("idd.llr_clip: must be positive");
  if (cfg.channel.rx != cfg.l || cfg.channel.tx != cfg.n) {
    throw ConfigError("idd.channel: dimensions must match (l, n)");
  }
  if (cfg.workers < 1) throw ConfigError("idd.workers: must be >= 1");
}

namespace {

std::vector<IddCell> run_frame(const IddConfig& cfg, const Constellation& c,
                               const Interleaver& il, double sigma2,
                               std::uint64_t frame_seed) {
  const int cbits = cfg.interleaver_bits;
  const int kinfo = cbits / 2;
  const int vq = cfg.n * cfg.q;
  const int vectors = cbits / vq;

  Rng rng(frame_seed);
  std::vector<std::uint8_t> info(static_cast<std::size_t>(kinfo));
  for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
  const std::vector<std::uint8_t> coded = rsc_encode(info);
  const CVec x = qam_map(il.interleave(coded), c);

  SearchConfig sc = cfg.search;
  sc.metric = cfg.detector == DetectorKind::kConventionalMa ? Metric::kCausal
                                                            : Metric::kLookahead;

  // Channel and observations are drawn once; iterations revisit the same
  // received frame with refined priors.
  std::vector<CMat> hs;
  std::vector<CVec> ys(static_cast<std::size_t>(vectors));
  std::vector<Preprocessed> pres;
  const bool pic = cfg.detector == DetectorKind::kMmsePic;
  CMat hblock;
  if (cfg.block_fading) hblock = sample_channel(cfg.channel, rng);
  for (int v = 0; v < vectors; ++v) {
    const CMat h = cfg.block_fading ? hblock : sample_channel(cfg.channel, rng);
    const CVec y = add_awgn(h * x.segment(v * cfg.n, cfg.n), sigma2, rng);
    ys[static_cast<std::size_t>(v)] = y;
    if (pic) {
      hs.push_back(h);
    } else {
      pres.push_back(preprocess(h, y, sigma2, sc));
    }
  }

  std::vector<IddCell> cells(static_cast<std::size_t>(cfg.iterations));
  RVec prior = RVec::Zero(cbits);
  RVec det_ext(cbits);
  for (int it = 0; it < cfg.iterations; ++it) {
    IddCell& cell = cells[static_cast<std::size_t>(it)];
    for (int v = 0; v < vectors; ++v) {
      const RVec seg = prior.segment(v * vq, vq);
      MulCount pmc;
      const PriorStats ps = prior_stats_from_llrs(seg, c, &pmc);
      cell.mults += pmc;
      const std::size_t vi = static_cast<std::size_t>(v);
      const DetectorOutput d = pic
          ? mmse_pic_detect(hs[vi], ys[vi], sigma2, ps, c, sc.llr_clip)
          : detect_prepared(pres[vi], ps, c, sc);
      cell.mults += d.mults;
      for (int i = 0; i < vq; ++i) {
        if (std::abs(d.posterior[i] - d.extrinsic[i] - seg[i]) > 1e-9) {
          throw ModelError("run_idd: detector extrinsic does not separate from the prior");
        }
      }
      det_ext.segment(v * vq, vq) = d.extrinsic;
    }
    cell.symbol_periods += static_cast<std::uint64_t>(vectors);

    DecoderIO io;
    io.coded_in = il.deinterleave(det_ext);
    maxlog_map_decode(io);
    for (int i = 0; i < kinfo; ++i) {
      cell.info_errors += io.info_hard[static_cast<std::size_t>(i)] !=
                          info[static_cast<std::size_t>(i)];
    }
    cell.info_bits += static_cast<std::uint64_t>(kinfo);
    for (int i = 0; i < cbits; ++i) {
      const bool hard = io.coded_posterior[i] > 0.0;
      cell.coded_errors += hard != (coded[static_cast<std::size_t>(i)] != 0);
    }
    cell.coded_bits += static_cast<std::uint64_t>(cbits);
    cell.frames += 1;
    // Both exchanged messages live in the same +-llr_clip window: the
    // detector clips its extrinsic, the decoder's is clipped here.
    prior = il.interleave(io.coded_extrinsic)
                .cwiseMax(-sc.llr_clip)
                .cwiseMin(sc.llr_clip);
  }
  return cells;
}

}  // namespace

IddResult run_idd(const IddConfig& cfg) {
  validate_idd(cfg);
  const Constellation c(cfg.q);
  const Interleaver il(static_cast<std::size_t>(cfg.interleaver_bits),
                       Rng::derive(cfg.seed, 0x17EA));

  const std::uint64_t kinfo = static_cast<std::uint64_t>(cfg.interleaver_bits) / 2;
  const std::uint64_t frames = (cfg.info_bits + kinfo - 1) / kinfo;

  IddResult res;
  res.snr_db = cfg.snr_db;
  res.iterations = cfg.iterations;
  res.cells.assign(cfg.snr_db.size(),
                   std::vector<IddCell>(static_cast<std::size_t>(cfg.iterations)));

  for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
    const double sigma2 = noise_variance_for_snr_db(cfg.snr_db[si], cfg.n);
    const std::uint64_t point_seed = Rng::derive(cfg.seed, 0x5EED00 + si);

    const int workers = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.workers), frames));
    std::vector<std::vector<IddCell>> partial(
        static_cast<std::size_t>(workers),
        std::vector<IddCell>(static_cast<std::size_t>(cfg.iterations)));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    auto work = [&](int w) {
      try {
        for (std::uint64_t f = static_cast<std::uint64_t>(w); f < frames;
             f += static_cast<std::uint64_t>(workers)) {
          const std::vector<IddCell> frame_cells =
              run_frame(cfg, c, il, sigma2, Rng::derive(point_seed, f));
          for (int it = 0; it < cfg.iterations; ++it) {
            partial[static_cast<std::size_t>(w)][static_cast<std::size_t>(it)] +=
                frame_cells[static_cast<std::size_t>(it)];
          }
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    };

    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (int w = 0; w < workers; ++w) {
      for (int it = 0; it < cfg.iterations; ++it) {
        res.cells[si][static_cast<std::size_t>(it)] +=
            partial[static_cast<std::size_t>(w)][static_cast<std::size_t>(it)];
      }
    }
  }
  return res;
}

}  // namespace treedet
