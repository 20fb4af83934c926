#ifndef AIF_MOMENT_ANALYSIS_HPP
#define AIF_MOMENT_ANALYSIS_HPP

#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "aif/controller.hpp"
#include "aif/crn.hpp"
#include "aif/errors.hpp"
#include "aif/lyapunov.hpp"

namespace aif {

/// Moment-closure matrices for the closed loop with state (X_1..X_d, Z1-Z2).
struct AnalysisMatrices {
  Eigen::MatrixXd R;  // (d+1) x (d+1)
  Eigen::MatrixXd Q;  // (d+1) x (d+1)
  Eigen::VectorXd D;  // diagonal of diag(W E[X] + w0), length K
  double c = 0.0;     // nominal input u*
  double beta = 0.0;
  Eigen::VectorXd stationary_mean;  // d
};

/// Stationary mean of the open-loop species under integral control:
/// m = -(SW)^-1 (S w0 + c e_a), so that m_l = mu/theta.
inline Eigen::VectorXd closed_loop_stationary_mean(const LinearPropensityStructure& lin, std::size_t controlled,
                                                   double mu, double theta, std::size_t actuated = 0) {
  const double c = nominal_input(lin, controlled, mu, theta, actuated);
  const auto d = static_cast<Eigen::Index>(lin.dimension());
  const Eigen::VectorXd rhs = lin.Sw0() + c * Eigen::VectorXd::Unit(d, static_cast<Eigen::Index>(actuated));
  return -lin.SW().fullPivLu().solve(rhs);
}

/// [SW - beta e_a e_l^T, k e_a; -theta e_l^T, 0]. Also the system matrix of the
/// deterministic PI loop.
inline Eigen::MatrixXd closed_loop_matrix(const LinearPropensityStructure& lin, std::size_t controlled,
                                          std::size_t actuated, double theta, double k, double beta) {
  const auto d = static_cast<Eigen::Index>(lin.dimension());
  const auto l = static_cast<Eigen::Index>(controlled);
  const auto a = static_cast<Eigen::Index>(actuated);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d + 1, d + 1);
  R.topLeftCorner(d, d) = lin.SW();
  R(a, l) -= beta;
  R(a, d) = k;
  R(d, l) = -theta;
  return R;
}

inline AnalysisMatrices build_R_Q(const LinearPropensityStructure& lin, std::size_t controlled, std::size_t actuated,
                                  double mu, double theta, double k, double beta) {
  if (controlled >= lin.dimension() || actuated >= lin.dimension()) throw StructuralError("species index out of range");
  const auto d = static_cast<Eigen::Index>(lin.dimension());
  AnalysisMatrices out;
  out.c = nominal_input(lin, controlled, mu, theta, actuated);
  out.beta = beta;
  out.stationary_mean = closed_loop_stationary_mean(lin, controlled, mu, theta, actuated);
  out.D = lin.W * out.stationary_mean + lin.w0;
  out.R = closed_loop_matrix(lin, controlled, actuated, theta, k, beta);

  const Eigen::MatrixXd S = lin.S.cast<double>();
  out.Q = Eigen::MatrixXd::Zero(d + 1, d + 1);
  out.Q.topLeftCorner(d, d) = S * out.D.asDiagonal() * S.transpose();
  out.Q(static_cast<Eigen::Index>(actuated), static_cast<Eigen::Index>(actuated)) += out.c;
  out.Q(d, d) = 2.0 * mu;
  return out;
}

/// Approximate stationary covariance of (X, Z1-Z2). Throws DomainError when R is not Hurwitz.
inline Eigen::MatrixXd approximate_covariance(const AnalysisMatrices& m) { return solve_lyapunov(m.R, m.Q); }

// ---------------------------------------------------------------------------
// Gene expression: 0 -> X1 (input), X1 -> X1 + X2 (k_p), X1 -> 0 (gamma_r), X2 -> 0 (gamma_p)

struct GeneExpressionParams {
  double translation = 0.0;          // k_p
  double mrna_degradation = 0.0;     // gamma_r
  double protein_degradation = 0.0;  // gamma_p
};

/// Left-hand side of the Hurwitz condition for the gene expression R:
/// 1 - k theta k_p / (g_r g_p (g_r + g_p)) + beta k_p / (g_r g_p).
inline double gene_stability_margin(const GeneExpressionParams& p, double theta, double k, double beta) {
  const double kp = p.translation, gr = p.mrna_degradation, gp = p.protein_degradation;
  return 1.0 - k * theta * kp / (gr * gp * (gr + gp)) + beta * kp / (gr * gp);
}

inline bool gene_is_stable(const GeneExpressionParams& p, double theta, double k, double beta) {
  return k > 0.0 && gene_stability_margin(p, theta, k, beta) > 0.0;
}

inline double gene_openloop_variance(const GeneExpressionParams& p, double mu, double theta) {
  return mu / theta * (1.0 + p.translation / (p.mrna_degradation + p.protein_degradation));
}

/// Closed-form Sigma_22 under PI control (antithetic integral + proportional gain beta).
inline double gene_variance_closed_form(const GeneExpressionParams& p, double mu, double theta, double k, double beta) {
  const double kp = p.translation, gr = p.mrna_degradation, gp = p.protein_degradation;
  const double den = gene_stability_margin(p, theta, k, beta);
  if (!(den > 0.0)) throw DomainError("gene expression closed form outside validity domain (R not Hurwitz)");
  const double num = 1.0 + kp / (gr + gp) + k * kp / (gr * gp) + beta * kp / (gr * (gr + gp));
  return mu / theta * num / den;
}

inline double gene_integral_variance(const GeneExpressionParams& p, double mu, double theta, double k) {
  return gene_variance_closed_form(p, mu, theta, k, 0.0);
}

inline double gene_variance_ratio(const GeneExpressionParams& p, double mu, double theta, double k) {
  return gene_integral_variance(p, mu, theta, k) / gene_openloop_variance(p, mu, theta);
}

/// beta -> infinity limit of the closed form: (mu/theta) g_p / (g_r + g_p).
inline double gene_variance_large_beta_limit(const GeneExpressionParams& p, double mu, double theta) {
  return mu / theta * p.protein_degradation / (p.mrna_degradation + p.protein_degradation);
}

// ---------------------------------------------------------------------------
// Maturation: gene expression plus X2 -> X3 (k_p'), X3 -> 0 (gamma_p')

struct MaturationParams {
  double translation = 0.0;          // k_p
  double mrna_degradation = 0.0;     // gamma_r
  double protein_degradation = 0.0;  // gamma_p
  double maturation = 0.0;           // k_p'
  double mature_degradation = 0.0;   // gamma_p'
};

inline double maturation_openloop_variance(const MaturationParams& p, double mu, double theta) {
  const double kp = p.translation, gr = p.mrna_degradation, gp = p.protein_degradation;
  const double km = p.maturation, gm = p.mature_degradation;
  return mu / theta * (1.0 + kp * km * (km + gr + gp + gm) / ((gr + gm) * (gr + gp + km) * (gp + gm + km)));
}

/// Hurwitz conditions for the maturation R:
///   beta < beta_bound
///   quad_a beta^2 + sigma1 beta + sigma0 < 0
struct MaturationStabilityCoefficients {
  double beta_bound;
  double quad_a;
  double sigma1;
  double sigma0;
};

inline MaturationStabilityCoefficients maturation_stability_coefficients(const MaturationParams& p, double theta,
                                                                         double k) {
  const double kp = p.translation, gr = p.mrna_degradation, gp = p.protein_degradation;
  const double km = p.maturation, gm = p.mature_degradation;
  const double s = gr + gp + gm + km;
  const double pairs = gr * gp + gr * gm + gp * gm + gr * km + gm * km;
  const double c = gr * gm * (gp + km);
  return {
      (s * pairs - c) / (kp * km),
      kp * kp * km * km,
      -kp * km * s * pairs + 2.0 * c * kp * km,
      -c * s * pairs + c * c + k * kp * km * theta * s * s,
  };
}

inline bool maturation_stability(const MaturationParams& p, double theta, double k, double beta) {
  if (!(k > 0.0)) return false;
  const auto co = maturation_stability_coefficients(p, theta, k);
  return beta < co.beta_bound && co.quad_a * beta * beta + co.sigma1 * beta + co.sigma0 < 0.0;
}

/// Stable beta interval (intersected with (0, inf)) for fixed k, or nullopt if empty.
inline std::optional<std::pair<double, double>> maturation_beta_interval(const MaturationParams& p, double theta,
                                                                         double k) {
  if (!(k > 0.0)) return std::nullopt;
  const auto co = maturation_stability_coefficients(p, theta, k);
  const double disc = co.sigma1 * co.sigma1 - 4.0 * co.quad_a * co.sigma0;
  if (disc <= 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  double lo = (-co.sigma1 - r) / (2.0 * co.quad_a);
  double hi = (-co.sigma1 + r) / (2.0 * co.quad_a);
  lo = std::max(lo, 0.0);
  hi = std::min(hi, co.beta_bound);
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

/// Closed-form Sigma_33 for the maturation network.
inline double maturation_variance_closed_form(const MaturationParams& p, double mu, double theta, double k,
                                              double beta) {
  if (!maturation_stability(p, theta, k, beta)) {
    throw DomainError("maturation closed form outside validity domain (R not Hurwitz)");
  }
  const double kp = p.translation, gr = p.mrna_degradation, gp = p.protein_degradation;
  const double km = p.maturation, gm = p.mature_degradation;
  const double s = gr + gp + gm + km;

  const double xi_d = gr * gm * (gr + gm) * (gp + km) * (gr + gp + km) * (gp + gm + km);
  const double xi_k = -kp * km * theta * s * s;
  const double xi_b = kp * km *
                      (gr * gr * gp + gr * gr * gm + gr * gr * km + gr * gp * gp + gr * gp * gm + 2 * gr * gp * km +
                       gr * gm * gm + gr * gm * km + gr * km * km + gp * gp * gm + gp * gm * gm + 2 * gp * gm * km +
                       gm * gm * km + gm * km * km);
  const double xi_bb = -kp * kp * km * km;

  const double zeta_k = kp * km *
                        (gr * gr * gp + gr * gr * gm + gr * gr * km + gr * gp * gp + 2 * gr * gp * gm +
                         2 * gr * gp * km + gr * gm * gm + 2 * gr * gm * km - theta * gr * gm + gr * km * km +
                         gp * gp * gm + gp * gm * gm + 2 * gp * gm * km - theta * gp * gm + gm * gm * km -
                         theta * gm * gm + gm * km * km - theta * gm * km);
  const double zeta_b = gm * kp * km *
                        (gr * gr + gr * gp + gr * km + gm * gr + gp * gp + 2 * gp * km + gm * gp + km * km + gm * km);
  const double zeta_kb = -kp * kp * km * km;
  const double zeta_d = xi_d;

  const double num = theta / mu * maturation_openloop_variance(p, mu, theta) + zeta_k / zeta_d * k +
                     zeta_b / zeta_d * beta + zeta_kb / zeta_d * k * beta;
  const double den = 1.0 + xi_k / xi_d * k + xi_b / xi_d * beta + xi_bb / xi_d * beta * beta;
  return mu / theta * num / den;
}

}  // namespace aif

#endif  // AIF_MOMENT_ANALYSIS_HPP
