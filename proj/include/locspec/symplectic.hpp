#pragma once

// Lagrangian frames (Q,P), their real symplectic companions, Williamson's
// normal form and admissibility of Gaussian covariance matrices.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <numeric>
#include <sstream>
#include <string>

#include "core.hpp"

namespace locspec::symplectic {

using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double frame_tol = 1e-8;
inline constexpr double symplectic_tol = 1e-10;

inline RMat J(int d) {
  RMat j = RMat::Zero(2 * d, 2 * d);
  j.topRightCorner(d, d).setIdentity();
  j.bottomLeftCorner(d, d) = -RMat::Identity(d, d);
  return j;
}

struct LagrangianFrame {
  CMat Q, P;
  int dim() const { return static_cast<int>(Q.rows()); }
};

struct FrameReport {
  bool valid = false;
  bool q_singular = false, p_singular = false;
  double symmetric_residual = 0.0;  // ||Q^T P - P^T Q||
  double hermitian_residual = 0.0;  // ||Q^* P - P^* Q - 2i Id||
  std::string message;
};

namespace detail {
inline bool near_singular(const CMat& A) {
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  return s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0));
}
}  // namespace detail

inline FrameReport check_frame(const CMat& Q, const CMat& P) {
  FrameReport r;
  if (Q.rows() != Q.cols() || P.rows() != P.cols() || Q.rows() != P.rows() || Q.rows() == 0) {
    r.message = "Q and P must be square matrices of equal size";
    return r;
  }
  const int d = static_cast<int>(Q.rows());
  r.q_singular = detail::near_singular(Q);
  r.p_singular = detail::near_singular(P);
  r.symmetric_residual = (Q.transpose() * P - P.transpose() * Q).norm();
  r.hermitian_residual =
      (Q.adjoint() * P - P.adjoint() * Q - cplx(0, 2) * CMat::Identity(d, d)).norm();
  std::ostringstream msg;
  if (r.q_singular) msg << "Q is singular; ";
  if (r.p_singular) msg << "P is singular; ";
  if (r.symmetric_residual > frame_tol) msg << "Q^T P - P^T Q residual " << r.symmetric_residual << "; ";
  if (r.hermitian_residual > frame_tol) msg << "Q^* P - P^* Q - 2i Id residual " << r.hermitian_residual << "; ";
  r.message = msg.str();
  r.valid = r.message.empty();
  if (r.valid) r.message = "ok";
  return r;
}

inline LagrangianFrame validate_frame(const CMat& Q, const CMat& P) {
  FrameReport r = check_frame(Q, P);
  if (!r.valid) throw config_error("invalid Lagrangian frame: " + r.message);
  return {Q, P};
}

inline LagrangianFrame standard_frame(int d) {
  return {CMat::Identity(d, d), cplx(0, 1) * CMat::Identity(d, d)};
}

struct SymplecticMatrix {
  RMat T;
  int dim() const { return static_cast<int>(T.rows() / 2); }
  RMat A() const { return T.topLeftCorner(dim(), dim()); }
  RMat B() const { return T.topRightCorner(dim(), dim()); }
  RMat C() const { return T.bottomLeftCorner(dim(), dim()); }
  RMat D() const { return T.bottomRightCorner(dim(), dim()); }
  // T^{-1} = -J T^T J for symplectic T.
  RMat inverse() const {
    const RMat j = J(dim());
    return -j * T.transpose() * j;
  }
};

inline double symplectic_residual(const RMat& T) {
  if (T.rows() != T.cols() || T.rows() % 2) return std::numeric_limits<double>::infinity();
  const RMat j = J(static_cast<int>(T.rows() / 2));
  return (T.transpose() * j * T - j).norm();
}

inline SymplecticMatrix frame_to_symplectic(const LagrangianFrame& f) {
  const int d = f.dim();
  SymplecticMatrix s{RMat(2 * d, 2 * d)};
  s.T << f.Q.real(), f.Q.imag(), f.P.real(), f.P.imag();
  const double res = symplectic_residual(s.T);
  if (res > symplectic_tol * std::max(1.0, s.T.squaredNorm()))
    throw tolerance_error("frame_to_symplectic: T^T J T != J (residual " + std::to_string(res) + ")");
  return s;
}

inline LagrangianFrame symplectic_to_frame(const SymplecticMatrix& s) {
  if (s.T.rows() != s.T.cols() || s.T.rows() % 2)
    throw config_error("symplectic_to_frame: T must be 2d x 2d");
  const double res = symplectic_residual(s.T);
  if (res > symplectic_tol * std::max(1.0, s.T.squaredNorm()))
    throw config_error("symplectic_to_frame: matrix is not symplectic (residual " + std::to_string(res) + ")");
  const cplx i(0, 1);
  return {s.A().cast<cplx>() + i * s.B().cast<cplx>(), s.C().cast<cplx>() + i * s.D().cast<cplx>()};
}

struct WilliamsonForm {
  SymplecticMatrix T;
  RVec k;  // symplectic eigenvalues, ascending
  RMat K() const {
    const int d = static_cast<int>(k.size());
    RMat out = RMat::Zero(2 * d, 2 * d);
    for (int j = 0; j < d; ++j) out(j, j) = out(d + j, d + j) = k(j);
    return out;
  }
};

inline void require_spd(const RMat& M, const char* who) {
  if (M.rows() != M.cols() || M.rows() % 2 || M.rows() == 0)
    throw config_error(std::string(who) + ": matrix must be 2d x 2d");
  if ((M - M.transpose()).norm() > 1e-12 * std::max(1.0, M.norm()))
    throw config_error(std::string(who) + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(M);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw config_error(std::string(who) + ": matrix is not positive definite");
}

// M = T K T^T. With S = M^{-1/2}, the skew matrix S J S has eigenvalues
// +-i/k_j; its eigenvectors give an orthogonal O with O (J K^{-1}) O^T = SJS,
// and T = M^{1/2} O K^{-1/2}.
inline WilliamsonForm williamson(const RMat& M_in) {
  require_spd(M_in, "williamson");
  const RMat M = 0.5 * (M_in + M_in.transpose());
  const int n = static_cast<int>(M.rows()), d = n / 2;
  Eigen::SelfAdjointEigenSolver<RMat> es(M);
  const RVec ev = es.eigenvalues();
  const RMat V = es.eigenvectors();
  const RMat Mh = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
  const RMat Mmh = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  const RMat A = Mmh * J(d) * Mmh;
  const CMat H = cplx(0, 1) * A.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> hs(0.5 * (H + H.adjoint()));
  // Positive eigenvalues are the last d (ascending order), i.e. 1/k_j with
  // the largest first; walk them backwards to get k_j ascending.
  RVec k(d);
  RMat O(n, n);
  for (int j = 0; j < d; ++j) {
    const int col = n - 1 - j;
    const double mu = hs.eigenvalues()(col);
    Eigen::VectorXcd v = hs.eigenvectors().col(col);
    // Fix the free phase so that O is as close to the identity as possible.
    const cplx w = v(d + j) - cplx(0, 1) * v(j);
    if (std::abs(w) > 1e-12) v *= std::conj(w) / std::abs(w);
    k(j) = 1.0 / mu;
    O.col(j) = std::sqrt(2.0) * v.imag();
    O.col(d + j) = std::sqrt(2.0) * v.real();
  }
  RMat Kmh = RMat::Zero(n, n);
  for (int j = 0; j < d; ++j) Kmh(j, j) = Kmh(d + j, d + j) = 1.0 / std::sqrt(k(j));
  WilliamsonForm out{SymplecticMatrix{Mh * O * Kmh}, k};
  return out;
}

inline bool gaussian_admissible(const RMat& M) {
  require_spd(M, "gaussian_admissible");
  const int d = static_cast<int>(M.rows() / 2);
  CMat H = M.cast<cplx>() + cplx(0, 1.0 / (4.0 * pi)) * J(d).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (H + H.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

// Zero-diagonal frame Q = [[q1, q1 e^{-i theta}], [q2 e^{-i theta}, q2]]
// (so Q^{-1} conj(Q) has zero diagonal), completed by P = i (Q^*)^{-1}.
// That completion is Lagrangian exactly when Q Q^* is real.
inline LagrangianFrame zero_diagonal_frame(double q1, double q2, double theta) {
  CMat Q(2, 2);
  const cplx e = std::polar(1.0, -theta);
  Q << q1, q1 * e, q2 * e, q2;
  CMat P = cplx(0, 1) * Q.adjoint().inverse();
  return validate_frame(Q, P);
}

// The frame with q1 = q2 = 1, theta = pi/4 and P = (i - 1) Id.
inline LagrangianFrame zero_diagonal_example() {
  CMat Q(2, 2);
  const cplx e = std::polar(1.0, -pi / 4);
  Q << 1.0, e, e, 1.0;
  CMat P = cplx(-1, 1) * CMat::Identity(2, 2);
  return validate_frame(Q, P);
}

}  // namespace locspec::symplectic
