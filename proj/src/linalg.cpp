#include "treedet/linalg.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace treedet {

QrThin thin_qr(const CMat& h) {
  const Eigen::Index l = h.rows();
  const Eigen::Index n = h.cols();
  if (n < 1 || l < n) {
    throw ShapeError("thin_qr: need rows >= cols >= 1, got " + std::to_string(l) + "x" +
                     std::to_string(n));
  }

  Eigen::HouseholderQR<CMat> qr(h);
  QrThin out;
  out.q = qr.householderQ() * CMat::Identity(l, n);
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  // Rotate each row/column pair so the diagonal is real >= 0.
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx d = out.r(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) {
      const cplx phase = d / mag;
      out.r.row(i) *= std::conj(phase);
      out.q.col(i) *= phase;
    }
    out.r(i, i) = cplx(mag, 0.0);
  }

  double dmax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) dmax = std::max(dmax, out.r(i, i).real());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.r(i, i).real() < 1e-12 * dmax || dmax == 0.0) {
      throw RankDeficientError("thin_qr: diagonal entry " + std::to_string(i) +
                               " below rank tolerance");
    }
  }
  return out;
}

CMat hermitian_solve(const CMat& a, const CMat& b) {
  if (a.rows() != a.cols()) throw ShapeError("hermitian_solve: A must be square");
  if (a.rows() != b.rows()) throw ShapeError("hermitian_solve: A and B row mismatch");
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("hermitian_solve: Cholesky failed");
  }
  return llt.solve(b);
}

}  // namespace treedet
