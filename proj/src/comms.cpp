#include "treedet/comms.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "treedet/decoder.hpp"

namespace treedet {

std::vector<std::uint8_t> rsc_encode(const std::vector<std::uint8_t>& info) {
  const Trellis& tr = Trellis::instance();
  std::vector<std::uint8_t> out;
  out.reserve(info.size() * 2);
  int state = 0;
  for (const std::uint8_t u : info) {
    const int b = u & 1;
    out.push_back(static_cast<std::uint8_t>(b));
    out.push_back(static_cast<std::uint8_t>(tr.parity[state][b]));
    state = tr.next[state][b];
  }
  return out;
}

Interleaver::Interleaver(std::size_t size, std::uint64_t seed) {
  perm_.resize(size);
  std::iota(perm_.begin(), perm_.end(), 0u);
  Rng rng(seed);
  // Fisher-Yates with the library's own bounded sampler, for stable output.
  for (std::size_t i = size; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm_[i - 1], perm_[j]);
  }
}

RVec Interleaver::interleave(const RVec& in) const {
  check(static_cast<std::size_t>(in.size()));
  RVec out(in.size());
  for (Eigen::Index i = 0; i < in.size(); ++i) out[i] = in[perm_[static_cast<std::size_t>(i)]];
  return out;
}

RVec Interleaver::deinterleave(const RVec& in) const {
  check(static_cast<std::size_t>(in.size()));
  RVec out(in.size());
  for (Eigen::Index i = 0; i < in.size(); ++i) out[perm_[static_cast<std::size_t>(i)]] = in[i];
  return out;
}

ChannelModel ChannelModel::iid(int rx, int tx) {
  if (rx < 1 || tx < 1) throw ParamError("ChannelModel::iid: dims must be positive");
  ChannelModel m;
  m.kind = Kind::kIid;
  m.rx = rx;
  m.tx = tx;
  return m;
}

ChannelModel ChannelModel::kronecker(const CMat& r_rx, const CMat& r_tx) {
  ChannelModel m;
  m.kind = Kind::kKronecker;
  m.rx = static_cast<int>(r_rx.rows());
  m.tx = static_cast<int>(r_tx.rows());
  if (m.rx < 1 || m.tx < 1) throw ParamError("ChannelModel::kronecker: dims must be positive");
  m.sqrt_rx = hermitian_sqrt(r_rx);
  m.sqrt_tx = hermitian_sqrt(r_tx);
  return m;
}

CMat sample_channel(const ChannelModel& model, Rng& rng) {
  CMat g(model.rx, model.tx);
  for (int j = 0; j < model.tx; ++j) {
    for (int i = 0; i < model.rx; ++i) g(i, j) = rng.cgaussian(1.0);
  }
  if (model.kind == ChannelModel::Kind::kIid) return g;
  // Identity roots short-circuit so kronecker(I, I) matches iid bit-for-bit.
  if (model.sqrt_rx.size() > 0 && !model.sqrt_rx.isIdentity(0.0)) g = model.sqrt_rx * g;
  if (model.sqrt_tx.size() > 0 && !model.sqrt_tx.isIdentity(0.0)) g = g * model.sqrt_tx;
  return g;
}

CVec add_awgn(const CVec& y, double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) throw ParamError("add_awgn: sigma2 must be positive");
  CVec out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = y[i] + rng.cgaussian(sigma2);
  return out;
}

CVec qam_map(const std::vector<std::uint8_t>& bits, const Constellation& c) {
  const int q = c.bits();
  if (bits.size() % static_cast<std::size_t>(q) != 0) {
    throw ShapeError("qam_map: bit count not a multiple of bits_per_symbol");
  }
  const std::size_t n = bits.size() / static_cast<std::size_t>(q);
  CVec out(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    out[static_cast<Eigen::Index>(s)] = c.point(c.label_from_bits(bits.begin() + s * q));
  }
  return out;
}

double noise_variance_for_snr_db(double snr_db, int n_tx) {
  if (n_tx < 1) throw ParamError("noise_variance_for_snr_db: n_tx must be positive");
  return static_cast<double>(n_tx) / std::pow(10.0, snr_db / 10.0);
}

CMat exponential_correlation(int n, double rho) {
  if (n < 1) throw ParamError("exponential_correlation: n must be positive");
  if (!(std::abs(rho) < 1.0)) throw ParamError("exponential_correlation: need |rho| < 1");
  CMat r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
  }
  return r;
}

CMat hermitian_sqrt(const CMat& a) {
  if (a.rows() != a.cols()) throw ModelError("hermitian_sqrt: matrix must be square");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ModelError("hermitian_sqrt: matrix not hermitian");
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(a(i, i).real() - 1.0) > 1e-9) {
      throw ModelError("hermitian_sqrt: correlation diagonal must be 1");
    }
  }
  if (a.isIdentity(0.0)) return a;
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) throw ModelError("hermitian_sqrt: eigensolver failed");
  RVec ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-9) throw ModelError("hermitian_sqrt: matrix not PSD");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace treedet
