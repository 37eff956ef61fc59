#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "treedet/comms.hpp"
#include "treedet/decoder.hpp"
#include "treedet/rng.hpp"

using namespace treedet;

namespace {

// Sequence-domain reference: max-log bit posteriors as a max over all 2^K
// info words of the codeword correlation score.
struct Reference {
  RVec info_post;
  RVec coded_post;
};

Reference brute_decode(const RVec& coded_in) {
  const int k = static_cast<int>(coded_in.size()) / 2;
  Reference ref;
  ref.info_post = RVec::Constant(k, 0.0);
  ref.coded_post = RVec::Constant(2 * k, 0.0);
  RVec info1 = RVec::Constant(k, -1e300), info0 = RVec::Constant(k, -1e300);
  RVec coded1 = RVec::Constant(2 * k, -1e300), coded0 = RVec::Constant(2 * k, -1e300);

  std::vector<std::uint8_t> u(static_cast<std::size_t>(k));
  for (int word = 0; word < (1 << k); ++word) {
    for (int j = 0; j < k; ++j) u[static_cast<std::size_t>(j)] = (word >> j) & 1;
    const auto cw = rsc_encode(u);
    double score = 0.0;
    for (int i = 0; i < 2 * k; ++i) {
      score += 0.5 * coded_in[i] * (cw[static_cast<std::size_t>(i)] ? 1.0 : -1.0);
    }
    for (int j = 0; j < k; ++j) {
      auto& slot = u[static_cast<std::size_t>(j)] ? info1[j] : info0[j];
      slot = std::max(slot, score);
    }
    for (int i = 0; i < 2 * k; ++i) {
      auto& slot = cw[static_cast<std::size_t>(i)] ? coded1[i] : coded0[i];
      slot = std::max(slot, score);
    }
  }
  ref.info_post = info1 - info0;
  ref.coded_post = coded1 - coded0;
  return ref;
}

}  // namespace

TEST_CASE("trellis: transition and parity tables") {
  const Trellis& tr = Trellis::instance();
  const int expect_next[4][2] = {{0, 2}, {2, 0}, {3, 1}, {1, 3}};
  const int expect_parity[4][2] = {{0, 1}, {0, 1}, {1, 0}, {1, 0}};
  for (int s = 0; s < 4; ++s) {
    for (int u = 0; u < 2; ++u) {
      CHECK(tr.next[s][u] == expect_next[s][u]);
      CHECK(tr.parity[s][u] == expect_parity[s][u]);
    }
  }
}

TEST_CASE("decoder: all-zero input yields all-zero soft output") {
  DecoderIO io;
  io.coded_in = RVec::Zero(40);
  maxlog_map_decode(io);
  REQUIRE(io.info_posterior.size() == 20);
  REQUIRE(io.coded_posterior.size() == 40);
  REQUIRE(io.coded_extrinsic.size() == 40);
  REQUIRE(io.info_hard.size() == 20);
  CHECK(io.info_posterior.cwiseAbs().maxCoeff() == 0.0);
  CHECK(io.coded_extrinsic.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoder: confident channel LLRs reproduce the frame") {
  Rng rng(81);
  std::vector<std::uint8_t> info(64);
  for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
  const auto coded = rsc_encode(info);
  DecoderIO io;
  io.coded_in.resize(static_cast<Eigen::Index>(coded.size()));
  for (std::size_t i = 0; i < coded.size(); ++i) {
    io.coded_in[static_cast<Eigen::Index>(i)] = coded[i] ? 10.0 : -10.0;
  }
  maxlog_map_decode(io);
  CHECK(io.info_hard == info);
  for (std::size_t i = 0; i < coded.size(); ++i) {
    CHECK((io.coded_posterior[static_cast<Eigen::Index>(i)] > 0) == (coded[i] == 1));
  }
}

TEST_CASE("decoder: matches the sequence-domain reference on random inputs") {
  Rng rng(82);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 10;
    DecoderIO io;
    io.coded_in.resize(2 * k);
    for (int i = 0; i < 2 * k; ++i) io.coded_in[i] = 6.0 * (rng.uniform01() - 0.5);
    maxlog_map_decode(io);
    const Reference ref = brute_decode(io.coded_in);
    for (int j = 0; j < k; ++j) {
      CHECK(io.info_posterior[j] == doctest::Approx(ref.info_post[j]).epsilon(1e-9));
      CHECK(io.info_hard[static_cast<std::size_t>(j)] == (ref.info_post[j] > 0 ? 1 : 0));
    }
    for (int i = 0; i < 2 * k; ++i) {
      CHECK(io.coded_posterior[i] == doctest::Approx(ref.coded_post[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("decoder: extrinsic decomposition is exact per bit") {
  Rng rng(83);
  DecoderIO io;
  io.coded_in.resize(120);
  for (int i = 0; i < 120; ++i) io.coded_in[i] = 8.0 * (rng.uniform01() - 0.5);
  maxlog_map_decode(io);
  CHECK((io.coded_posterior - io.coded_in - io.coded_extrinsic).cwiseAbs().maxCoeff()
        < 1e-12);
}

TEST_CASE("decoder: positive scaling leaves hard decisions unchanged") {
  Rng rng(84);
  DecoderIO a, b;
  a.coded_in.resize(80);
  for (int i = 0; i < 80; ++i) a.coded_in[i] = 5.0 * (rng.uniform01() - 0.5);
  b.coded_in = 2.0 * a.coded_in;
  maxlog_map_decode(a);
  maxlog_map_decode(b);
  CHECK(a.info_hard == b.info_hard);
  // max-log is scale-equivariant
  CHECK((b.info_posterior - 2.0 * a.info_posterior).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("decoder: coding gain over raw systematic decisions") {
  Rng rng(85);
  const int k = 2000;
  std::vector<std::uint8_t> info(static_cast<std::size_t>(k));
  for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
  const auto coded = rsc_encode(info);
  const double amp = 1.0;  // about 0 dB per coded bit
  DecoderIO io;
  io.coded_in.resize(2 * k);
  int raw_errors = 0;
  for (int i = 0; i < 2 * k; ++i) {
    const double bpsk = coded[static_cast<std::size_t>(i)] ? amp : -amp;
    io.coded_in[i] = 2.0 * (bpsk + rng.gaussian()) / 1.0;
  }
  for (int j = 0; j < k; ++j) {
    raw_errors += (io.coded_in[2 * j] > 0) != (info[static_cast<std::size_t>(j)] == 1);
  }
  maxlog_map_decode(io);
  int dec_errors = 0;
  for (int j = 0; j < k; ++j) {
    dec_errors += io.info_hard[static_cast<std::size_t>(j)] != info[static_cast<std::size_t>(j)];
  }
  CHECK(dec_errors < raw_errors);
}

TEST_CASE("decoder: odd-length input is rejected") {
  DecoderIO io;
  io.coded_in = RVec::Zero(7);
  CHECK_THROWS_AS(maxlog_map_decode(io), ShapeError);
}
