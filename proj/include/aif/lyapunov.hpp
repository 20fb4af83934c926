#ifndef AIF_LYAPUNOV_HPP
#define AIF_LYAPUNOV_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "aif/errors.hpp"

namespace aif {

inline Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw NumericError("eigenvalues of a non-square matrix");
  if (!M.allFinite()) throw NumericError("matrix has non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
  return solver.eigenvalues();
}

/// Eigenvalue with the largest real part.
inline std::complex<double> rightmost_eigenvalue(const Eigen::MatrixXd& M) {
  const auto ev = eigenvalues(M);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i).real() > ev(best).real()) best = i;
  return ev(best);
}

/// Stability margin used by is_hurwitz: 1e-9 scaled by the largest entry magnitude (at least 1).
inline double hurwitz_tolerance(const Eigen::MatrixXd& M) {
  return 1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

/// All eigenvalues have real part below -hurwitz_tolerance(M).
inline bool is_hurwitz(const Eigen::MatrixXd& M) {
  return rightmost_eigenvalue(M).real() < -hurwitz_tolerance(M);
}

/// ||R S + S R^T + Q||_F / (||R|| ||S|| + ||Q||), Frobenius norms.
inline double lyapunov_residual(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Sigma) {
  const double scale = R.norm() * Sigma.norm() + Q.norm();
  const double res = (R * Sigma + Sigma * R.transpose() + Q).norm();
  return scale > 0 ? res / scale : res;
}

/// Solves R S + S R^T + Q = 0 through the n^2 x n^2 Kronecker-sum system
/// (I (x) R + R (x) I) vec(S) = -vec(Q). Refuses non-Hurwitz R.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = R.rows();
  if (R.cols() != n || Q.rows() != n || Q.cols() != n) throw NumericError("solve_lyapunov: dimension mismatch");
  const auto lead = rightmost_eigenvalue(R);
  if (!(lead.real() < -hurwitz_tolerance(R))) {
    std::ostringstream os;
    os << "approximation outside validity domain: R is not Hurwitz (eigenvalue " << lead.real()
       << (lead.imag() < 0 ? " - " : " + ") << std::abs(lead.imag()) << "i)";
    throw DomainError(os.str(), lead);
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  // Column-major vec: vec(R S) = (I (x) R) vec(S), vec(S R^T) = (R (x) I) vec(S).
  for (Eigen::Index b = 0; b < n; ++b) {
    K.block(b * n, b * n, n, n) += R;
    for (Eigen::Index a = 0; a < n; ++a) {
      K.block(a * n, b * n, n, n).diagonal().array() += R(a, b);
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  Eigen::MatrixXd Sigma = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
  Sigma = 0.5 * (Sigma + Sigma.transpose()).eval();
  if (!Sigma.allFinite()) throw NumericError("Lyapunov solve produced non-finite entries");
  return Sigma;
}

}  // namespace aif

#endif  // AIF_LYAPUNOV_HPP
