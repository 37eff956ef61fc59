#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace treedet {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Error taxonomy. Every throwing site in the library uses one of these so
// callers can tell configuration mistakes from numerical failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ParamError : Error {
  using Error::Error;
};
struct ModelError : Error {
  using Error::Error;
};
struct RankDeficientError : Error {
  using Error::Error;
};
struct NotPositiveDefiniteError : Error {
  using Error::Error;
};
struct TooLargeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Complex-multiplication tallies for the detection pipeline. Counts are
// analytic per operation performed (a dim-m mat-vec adds m*m), not literal
// FLOP traps. "bias" isolates the look-ahead Z*a products so their N_l^2
// scaling can be checked independently of everything else.
struct MulCount {
  std::uint64_t metric = 0;  // residual updates and |v|^2 terms
  std::uint64_t bias = 0;    // look-ahead Z*a matrix-vector products
  std::uint64_t zprep = 0;   // Z recursion precompute per detection
  std::uint64_t app = 0;     // list APP evaluation and bit-flip re-costing
  std::uint64_t prior = 0;   // symbol statistics and prior-cost tables (real)

  std::uint64_t total() const { return metric + bias + zprep + app + prior; }
  MulCount& operator+=(const MulCount& o) {
    metric += o.metric;
    bias += o.bias;
    zprep += o.zprep;
    app += o.app;
    prior += o.prior;
    return *this;
  }
};

inline void bump(MulCount* mc, std::uint64_t MulCount::* field, std::uint64_t n) {
  if (mc) mc->*field += n;
}

}  // namespace treedet
