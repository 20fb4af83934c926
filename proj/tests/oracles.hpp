#ifndef AIF_TESTS_ORACLES_HPP
#define AIF_TESTS_ORACLES_HPP

// Independent reference computations for the tests. Deliberately naive: plain
// vectors, no Eigen, no reuse of library code.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Mat A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (A[piv][c] == 0.0) throw std::runtime_error("singular");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

/// R S + S R^T + Q = 0 solved over the n(n+1)/2 unknowns S_ij, i <= j.
inline Mat lyapunov(const Mat& R, const Mat& Q) {
  const std::size_t n = R.size();
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  std::vector<std::vector<std::size_t>> pos(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      pos[i][j] = pos[j][i] = idx.size();
      idx.emplace_back(i, j);
    }
  const std::size_t m = idx.size();
  Mat A(m, std::vector<double>(m, 0.0));
  std::vector<double> b(m);
  for (std::size_t e = 0; e < m; ++e) {
    auto [i, j] = idx[e];
    for (std::size_t k = 0; k < n; ++k) {
      A[e][pos[k][j]] += R[i][k];
      A[e][pos[i][k]] += R[j][k];
    }
    b[e] = -Q[i][j];
  }
  const auto s = gauss_solve(A, b);
  Mat S(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S[i][j] = s[pos[i][j]];
  return S;
}

/// Two-pass sample covariance (n - 1 denominator).
inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

/// R for the gene expression closed loop written out by hand.
inline Mat gene_R(double kp, double gr, double gp, double theta, double k, double beta) {
  return {{-gr, -beta, k}, {kp, -gp, 0.0}, {0.0, -theta, 0.0}};
}

/// R for the maturation closed loop written out by hand.
inline Mat maturation_R(double kp, double gr, double gp, double km, double gm, double theta, double k, double beta) {
  return {{-gr, 0.0, -beta, k}, {kp, -gp - km, 0.0, 0.0}, {0.0, km, -gm, 0.0}, {0.0, 0.0, -theta, 0.0}};
}

}  // namespace oracle

#endif
