#include "treedet/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace treedet {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

const Trellis& Trellis::instance() {
  static const Trellis t = [] {
    Trellis tr{};
    for (int s = 0; s < kStates; ++s) {
      const int s1 = (s >> 1) & 1;
      const int s2 = s & 1;
      for (int u = 0; u < 2; ++u) {
        const int f = u ^ s1 ^ s2;  // feedback 1 + D + D^2
        tr.parity[s][u] = f ^ s2;   // feedforward 1 + D^2
        tr.next[s][u] = (f << 1) | s1;
      }
    }
    return tr;
  }();
  return t;
}

void maxlog_map_decode(DecoderIO& io) {
  if (io.coded_in.size() % 2 != 0) throw ShapeError("maxlog_map_decode: odd coded length");
  const int k = static_cast<int>(io.coded_in.size()) / 2;
  const Trellis& tr = Trellis::instance();
  constexpr int ns = Trellis::kStates;

  // Branch correlation: (sign(sys)*Ls + sign(par)*Lp) / 2 in max-log units.
  auto gamma = [&](int t, int u, int p) {
    const double ls = io.coded_in[2 * t];
    const double lp = io.coded_in[2 * t + 1];
    return 0.5 * ((u ? ls : -ls) + (p ? lp : -lp));
  };

  RMat alpha(k + 1, ns);
  alpha.setConstant(kNegInf);
  alpha(0, 0) = 0.0;
  for (int t = 0; t < k; ++t) {
    for (int s = 0; s < ns; ++s) {
      const double a = alpha(t, s);
      if (a == kNegInf) continue;
      for (int u = 0; u < 2; ++u) {
        const int nxt = tr.next[s][u];
        const double cand = a + gamma(t, u, tr.parity[s][u]);
        if (cand > alpha(t + 1, nxt)) alpha(t + 1, nxt) = cand;
      }
    }
  }

  RMat beta(k + 1, ns);
  beta.row(k).setZero();  // unterminated: uniform tail
  for (int t = k - 1; t >= 0; --t) {
    for (int s = 0; s < ns; ++s) {
      double best = kNegInf;
      for (int u = 0; u < 2; ++u) {
        const double cand = gamma(t, u, tr.parity[s][u]) + beta(t + 1, tr.next[s][u]);
        if (cand > best) best = cand;
      }
      beta(t, s) = best;
    }
  }

  io.coded_posterior.resize(2 * k);
  io.coded_extrinsic.resize(2 * k);
  io.info_posterior.resize(k);
  io.info_hard.assign(static_cast<std::size_t>(k), 0);

  for (int t = 0; t < k; ++t) {
    double sys[2] = {kNegInf, kNegInf};
    double par[2] = {kNegInf, kNegInf};
    for (int s = 0; s < ns; ++s) {
      const double a = alpha(t, s);
      if (a == kNegInf) continue;
      for (int u = 0; u < 2; ++u) {
        const int p = tr.parity[s][u];
        const double m = a + gamma(t, u, p) + beta(t + 1, tr.next[s][u]);
        if (m > sys[u]) sys[u] = m;
        if (m > par[p]) par[p] = m;
      }
    }
    const double lsys = sys[1] - sys[0];
    const double lpar = par[1] - par[0];
    io.coded_posterior[2 * t] = lsys;
    io.coded_posterior[2 * t + 1] = lpar;
    io.coded_extrinsic[2 * t] = lsys - io.coded_in[2 * t];
    io.coded_extrinsic[2 * t + 1] = lpar - io.coded_in[2 * t + 1];
    io.info_posterior[t] = lsys;
    io.info_hard[static_cast<std::size_t>(t)] = lsys > 0.0 ? 1 : 0;
  }
}

}  // namespace treedet
