#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "treedet/linalg.hpp"
#include "treedet/pathmetric.hpp"
#include "treedet/rng.hpp"

using namespace treedet;

namespace {

struct Instance {
  DetectionProblem p;
  std::vector<int> truth;
};

Instance random_instance(int n, const Constellation& c, double sigma2, Rng& rng,
                         bool with_priors) {
  CMat h(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) h(i, j) = rng.cgaussian(1.0);
  const QrThin qr = thin_qr(h);

  Instance inst;
  inst.truth.resize(static_cast<std::size_t>(n));
  CVec x(n);
  for (int k = 0; k < n; ++k) {
    inst.truth[static_cast<std::size_t>(k)] = static_cast<int>(rng.below(c.size()));
    x[k] = c.point(inst.truth[static_cast<std::size_t>(k)]);
  }
  CVec y = qr.r * x;
  for (int i = 0; i < n; ++i) y[i] += rng.cgaussian(sigma2);

  RVec llrs = RVec::Zero(n * c.bits());
  if (with_priors) {
    for (int i = 0; i < n * c.bits(); ++i) llrs[i] = 8.0 * (rng.uniform01() - 0.5);
  }
  const PriorStats ps = prior_stats_from_llrs(llrs, c);
  inst.p = make_problem(qr.r, y, sigma2, 0.3, c, ps);
  return inst;
}

PathNode walk(const DetectionProblem& p, const std::vector<int>& syms, int down_to,
              const ZSequence* zs) {
  PathNode node = make_root(p);
  for (int level = p.n(); level >= down_to; --level) {
    PathNode child;
    extend_node(p, node, syms[static_cast<std::size_t>(level - 1)], zs, child);
    node = child;
  }
  return node;
}

CMat sigma_matrix(const DetectionProblem& p, int k) {
  const CMat r11 = p.r.topLeftCorner(k - 1, k - 1);
  const CMat lam = p.sym_var.head(k - 1).asDiagonal();
  return r11 * lam * r11.adjoint() + p.sigma2 * CMat::Identity(k - 1, k - 1);
}

}  // namespace

TEST_CASE("make_problem: input validation") {
  const Constellation c(2);
  const PriorStats ps = PriorStats::zero(3, c);
  const CMat r = CMat::Identity(3, 3);
  const CVec y = CVec::Zero(3);
  CHECK_THROWS_AS(make_problem(CMat::Identity(3, 2), y, 1.0, 0.0, c, ps), ShapeError);
  CHECK_THROWS_AS(make_problem(r, CVec::Zero(2), 1.0, 0.0, c, ps), ShapeError);
  CHECK_THROWS_AS(make_problem(r, y, 1.0, 0.0, c, PriorStats::zero(2, c)), ShapeError);
  CHECK_THROWS_AS(make_problem(r, y, 0.0, 0.0, c, ps), ParamError);
  CHECK_THROWS_AS(make_problem(r, y, 1.0, -0.1, c, ps), ParamError);
}

TEST_CASE("make_problem: uniform priors give the flat prior cost") {
  const Constellation c(2);
  const double sigma2 = 0.7;
  const DetectionProblem p = make_problem(CMat::Identity(3, 3), CVec::Zero(3), sigma2, 0.0,
                                          c, PriorStats::zero(3, c));
  const double expect = sigma2 * 2.0 * std::log(2.0);
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 4; ++s) CHECK(p.xi(k, s) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("make_problem: certain prior excludes half the alphabet") {
  const Constellation c(2);
  RVec llrs = RVec::Zero(4);
  llrs[0] = 40.0;  // stream 0, first bit pinned to 1
  const DetectionProblem p = make_problem(CMat::Identity(2, 2), CVec::Zero(2), 1.0, 0.0, c,
                                          prior_stats_from_llrs(llrs, c));
  for (int s = 0; s < 4; ++s) {
    if (c.bit(s, 0) == 0) {
      CHECK(std::isinf(p.xi(0, s)));
    } else {
      CHECK(std::isfinite(p.xi(0, s)));
    }
    CHECK(std::isfinite(p.xi(1, s)));
  }
}

TEST_CASE("make_root: residual centers y on the prior means") {
  const Constellation c(2);
  Rng rng(11);
  const Instance zero = random_instance(4, c, 0.5, rng, false);
  const PathNode r0 = make_root(zero.p);
  CHECK(r0.level == 5);
  CHECK((r0.residual - zero.p.y).cwiseAbs().maxCoeff() == 0.0);
  for (int s : r0.syms) CHECK(s == -1);

  const Instance inst = random_instance(4, c, 0.5, rng, true);
  const PathNode root = make_root(inst.p);
  const CVec expect =
      inst.p.y - inst.p.r.triangularView<Eigen::Upper>() * inst.p.sym_mean;
  CHECK((root.residual - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("causal recursion equals the direct row-sum cost") {
  Rng rng(21);
  for (int q : {2, 4}) {
    const Constellation c(q);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(5));
      const Instance inst = random_instance(n, c, 0.8, rng, trial % 2 == 1);
      std::vector<int> syms(static_cast<std::size_t>(n));
      for (auto& s : syms) s = static_cast<int>(rng.below(c.size()));

      const PathNode leaf = walk(inst.p, syms, 1, nullptr);
      const double direct = direct_cost(inst.p, syms);
      CHECK(leaf.causal == doctest::Approx(direct).epsilon(1e-10));

      // partial sums match too
      for (int k = n; k >= 1; --k) {
        const PathNode node = walk(inst.p, syms, k, nullptr);
        double partial = 0.0;
        for (int i = k; i <= n; ++i) partial += branch_metric(inst.p, i, syms);
        CHECK(node.causal == doctest::Approx(partial).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("residual tracks the mean-completed reconstruction") {
  const Constellation c(4);
  Rng rng(22);
  const int n = 5;
  const Instance inst = random_instance(n, c, 0.4, rng, true);
  std::vector<int> syms(static_cast<std::size_t>(n));
  for (auto& s : syms) s = static_cast<int>(rng.below(c.size()));
  for (int k = n; k >= 1; --k) {
    const PathNode node = walk(inst.p, syms, k, nullptr);
    CVec mix = inst.p.sym_mean;
    for (int j = k; j <= n; ++j) mix[j - 1] = c.point(syms[static_cast<std::size_t>(j - 1)]);
    const CVec expect =
        (inst.p.y - inst.p.r.triangularView<Eigen::Upper>() * mix).head(k - 1);
    REQUIRE(node.residual.size() == k - 1);
    if (k > 1) CHECK((node.residual - expect).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("z sequence: full window equals the direct inverse") {
  const Constellation c(2);
  Rng rng(33);
  const int n = 7;
  const Instance inst = random_instance(n, c, 0.6, rng, true);
  const ZSequence zs = compute_z_sequence(inst.p, n - 1);
  CHECK(zs.lookahead == n - 1);
  for (int k = 2; k <= n; ++k) {
    CHECK(zs.window(k) == k - 1);
    const CMat direct =
        inst.p.sigma2 * hermitian_solve(sigma_matrix(inst.p, k), CMat::Identity(k - 1, k - 1));
    CHECK((zs.at_level(k) - direct).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("z sequence: truncated window equals the inverse on the trailing block") {
  const Constellation c(4);
  Rng rng(34);
  const int n = 7, n_l = 2;
  const Instance inst = random_instance(n, c, 0.6, rng, true);
  const ZSequence zs = compute_z_sequence(inst.p, n_l);
  for (int k = 2; k <= n; ++k) {
    const int m = std::min(k - 1, n_l);
    CHECK(zs.window(k) == m);
    const int c0 = k - 1 - m;
    const CMat rt = inst.p.r.block(c0, c0, m, m);
    const CMat lam = inst.p.sym_var.segment(c0, m).asDiagonal();
    const CMat sig = rt * lam * rt.adjoint() + inst.p.sigma2 * CMat::Identity(m, m);
    const CMat direct = inst.p.sigma2 * hermitian_solve(sig, CMat::Identity(m, m));
    CHECK((zs.at_level(k) - direct).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("z sequence: shrinkage spectrum stays in (0, 1]") {
  const Constellation c(2);
  Rng rng(35);
  const Instance inst = random_instance(6, c, 0.3, rng, true);
  const ZSequence zs = compute_z_sequence(inst.p, 5);
  for (int k = 2; k <= 6; ++k) {
    Eigen::SelfAdjointEigenSolver<CMat> es(zs.at_level(k));
    REQUIRE(es.info() == Eigen::Success);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("z sequence: zero depth disables the bias") {
  const Constellation c(2);
  Rng rng(36);
  const Instance inst = random_instance(4, c, 0.5, rng, true);
  const ZSequence zs = compute_z_sequence(inst.p, 0);
  CHECK(zs.lookahead == 0);
  std::vector<int> syms = {1, 2, 0, 3};
  const PathNode with_zs = walk(inst.p, syms, 2, &zs);
  const PathNode without = walk(inst.p, syms, 2, nullptr);
  CHECK(with_zs.bias == 0.0);
  CHECK(with_zs.causal == doctest::Approx(without.causal).epsilon(1e-14));
}

TEST_CASE("bias equals the closed form on the residual") {
  Rng rng(41);
  for (int q : {2, 4}) {
    const Constellation c(q);
    for (int trial = 0; trial < 15; ++trial) {
      const int n = 3 + static_cast<int>(rng.below(4));
      const Instance inst = random_instance(n, c, 0.7, rng, true);
      const ZSequence zs = compute_z_sequence(inst.p, n - 1);
      std::vector<int> syms(static_cast<std::size_t>(n));
      for (auto& s : syms) s = static_cast<int>(rng.below(c.size()));
      for (int k = 2; k <= n; ++k) {
        const PathNode node = walk(inst.p, syms, k, &zs);
        const CMat sig = sigma_matrix(inst.p, k);
        const CMat inv_a = hermitian_solve(sig, node.residual);
        const double s4 = inst.p.sigma2 * inst.p.sigma2;
        const double direct = s4 * inv_a.squaredNorm();
        CHECK(node.bias >= 0.0);
        CHECK(node.bias == doctest::Approx(direct).epsilon(1e-9));
      }
      const PathNode leaf = walk(inst.p, syms, 1, &zs);
      CHECK(leaf.bias == 0.0);
    }
  }
}

TEST_CASE("oracle completion equals brute-force enumeration") {
  const Constellation c(2);
  Rng rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3;
    const Instance inst = random_instance(n, c, 0.9, rng, trial % 2 == 1);
    std::vector<int> syms(static_cast<std::size_t>(n));
    for (auto& s : syms) s = static_cast<int>(rng.below(c.size()));
    const PathNode node = walk(inst.p, syms, 3, nullptr);

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> full = syms;
    for (int s1 = 0; s1 < 4; ++s1) {
      for (int s2 = 0; s2 < 4; ++s2) {
        full[0] = s1;
        full[1] = s2;
        const double cost = branch_metric(inst.p, 1, full) + branch_metric(inst.p, 2, full);
        best = std::min(best, cost);
      }
    }
    const double oracle = oracle_completion_bias(inst.p, node);
    CHECK(oracle == doctest::Approx(best).epsilon(1e-10));
    CHECK(node.causal + oracle <=
          doctest::Approx(direct_cost(inst.p, full)).epsilon(1e-10));
  }
}

TEST_CASE("oracle completion rejects oversized alphabets") {
  const Constellation c(2);
  Rng rng(52);
  const Instance inst = random_instance(12, c, 1.0, rng, false);
  const PathNode root = make_root(inst.p);
  CHECK_THROWS_AS(oracle_completion_bias(inst.p, root), TooLargeError);
}

TEST_CASE("branch_metric validates its inputs") {
  const Constellation c(2);
  Rng rng(53);
  const Instance inst = random_instance(3, c, 1.0, rng, false);
  std::vector<int> syms = {-1, 2, 1};
  CHECK_THROWS_AS(branch_metric(inst.p, 0, syms), ParamError);
  CHECK_THROWS_AS(branch_metric(inst.p, 4, syms), ParamError);
  CHECK_THROWS_AS(branch_metric(inst.p, 1, syms), ParamError);
  CHECK(branch_metric(inst.p, 2, syms) >= 0.0);
}
