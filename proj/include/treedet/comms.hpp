#pragma once

#include <cstdint>
#include <vector>

#include "treedet/constellation.hpp"
#include "treedet/rng.hpp"
#include "treedet/types.hpp"

namespace treedet {

// Encodes info bits with the fixed rate-1/2 RSC code (see decoder.hpp for the
// trellis). Output interleaves systematic and parity: [u0, p0, u1, p1, ...].
std::vector<std::uint8_t> rsc_encode(const std::vector<std::uint8_t>& info);

// Uniform random permutation, fixed by (size, seed). out[i] = in[perm[i]].
class Interleaver {
 public:
  Interleaver(std::size_t size, std::uint64_t seed);

  std::size_t size() const { return perm_.size(); }
  const std::vector<std::uint32_t>& permutation() const { return perm_; }

  template <typename T>
  std::vector<T> interleave(const std::vector<T>& in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm_[i]];
    return out;
  }
  template <typename T>
  std::vector<T> deinterleave(const std::vector<T>& in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[perm_[i]] = in[i];
    return out;
  }
  RVec interleave(const RVec& in) const;
  RVec deinterleave(const RVec& in) const;

 private:
  void check(std::size_t n) const {
    if (n != perm_.size()) throw ShapeError("Interleaver: length mismatch");
  }
  std::vector<std::uint32_t> perm_;
};

// Flat MIMO channel sampler: iid CN(0,1) entries, or the separable correlated
// form R_rx^(1/2) G R_tx^(1/2). Correlation roots are computed once at model
// construction (ModelError if a matrix is not hermitian PSD with unit
// diagonal).
struct ChannelModel {
  enum class Kind { kIid, kKronecker };
  Kind kind = Kind::kIid;
  int rx = 0, tx = 0;
  CMat sqrt_rx, sqrt_tx;

  static ChannelModel iid(int rx, int tx);
  static ChannelModel kronecker(const CMat& r_rx, const CMat& r_tx);
};

CMat sample_channel(const ChannelModel& model, Rng& rng);

// y + CN(0, sigma2) per component. sigma2 must be positive.
CVec add_awgn(const CVec& y, double sigma2, Rng& rng);

// Groups bits Q at a time (MSB first) into constellation symbols.
CVec qam_map(const std::vector<std::uint8_t>& bits, const Constellation& c);

// SNR definition used throughout: SNR_dB = 10 log10(n_tx / sigma2).
double noise_variance_for_snr_db(double snr_db, int n_tx);

// Exponential correlation profile, entry (i, j) = rho^|i-j|.
CMat exponential_correlation(int n, double rho);

// Hermitian PSD square root (eigenvalue clamp at -1e-9 tolerance).
CMat hermitian_sqrt(const CMat& a);

}  // namespace treedet
