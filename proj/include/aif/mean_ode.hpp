#ifndef AIF_MEAN_ODE_HPP
#define AIF_MEAN_ODE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "aif/crn.hpp"
#include "aif/ensemble.hpp"
#include "aif/errors.hpp"
#include "aif/lyapunov.hpp"
#include "aif/moment_analysis.hpp"

namespace aif {

/// d/dt [x; I] = A [x; I] + input * mu + drift, output y = x_l.
/// A is the moment-closure R; input = [beta/theta e_a; 1]; drift = [S w0; 0].
struct LinearClosedLoop {
  Eigen::MatrixXd A;
  Eigen::VectorXd input;
  Eigen::VectorXd drift;
  double mu = 0.0;
  double theta = 0.0;
  std::size_t output = 0;
  Eigen::VectorXd x0;

  double set_point() const { return mu / theta; }
  Eigen::VectorXd rhs(const Eigen::VectorXd& x) const { return A * x + input * mu + drift; }
};

inline LinearClosedLoop make_linear_closed_loop(const LinearPropensityStructure& lin, std::size_t controlled,
                                                std::size_t actuated, double mu, double theta, double k,
                                                double beta) {
  const auto d = static_cast<Eigen::Index>(lin.dimension());
  LinearClosedLoop sys;
  sys.A = closed_loop_matrix(lin, controlled, actuated, theta, k, beta);
  sys.input = Eigen::VectorXd::Zero(d + 1);
  sys.input(static_cast<Eigen::Index>(actuated)) = beta / theta;
  sys.input(d) = 1.0;
  sys.drift = Eigen::VectorXd::Zero(d + 1);
  sys.drift.head(d) = lin.Sw0();
  sys.mu = mu;
  sys.theta = theta;
  sys.output = controlled;
  sys.x0 = Eigen::VectorXd::Zero(d + 1);
  return sys;
}

/// Fixed point A x* + input mu + drift = 0.
inline Eigen::VectorXd steady_state(const LinearClosedLoop& sys) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.A);
  if (!lu.isInvertible()) throw DomainError("closed-loop matrix is singular; no unique steady state");
  return lu.solve(-(sys.input * sys.mu + sys.drift));
}

struct MeanTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  std::vector<double> component(std::size_t i) const {
    std::vector<double> out;
    for (const auto& s : states) out.push_back(s(static_cast<Eigen::Index>(i)));
    return out;
  }
};

namespace detail {

template <class F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Substeps per interval: at least 10, and enough that h * ||A||_inf <= 0.5.
inline int substeps(double dt, double scale) {
  return std::max(10, static_cast<int>(std::ceil(dt * scale / 0.5)));
}

}  // namespace detail

/// Classical RK4 from sys.x0 at t = grid[0], landing exactly on every grid point.
inline MeanTrajectory integrate_mean(const LinearClosedLoop& sys, std::span<const double> grid) {
  MeanTrajectory out;
  if (grid.empty()) return out;
  const double scale = sys.A.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::VectorXd x = sys.x0;
  out.times.push_back(grid[0]);
  out.states.push_back(x);
  auto f = [&](const Eigen::VectorXd& v) { return sys.rhs(v); };
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double dt = grid[g] - grid[g - 1];
    const int steps = detail::substeps(dt, scale);
    const double h = dt / steps;
    for (int s = 0; s < steps; ++s) x = detail::rk4_step(f, x, h);
    out.times.push_back(grid[g]);
    out.states.push_back(x);
  }
  return out;
}

/// Zero of the error-feedback PI law (beta/theta) s + k = 0, i.e. s = -k theta / beta.
inline std::optional<double> pi_zero(double k, double beta, double theta) {
  if (beta == 0.0) return std::nullopt;
  return -k * theta / beta;
}

/// Settling time of the output x_l(t) for the 1 +- band around mu/theta.
/// The horizon covers 40 time constants of the slowest mode.
inline std::optional<double> settling_time_ode(const LinearClosedLoop& sys, double band = 0.02,
                                               std::size_t resolution = 20000) {
  const auto lead = rightmost_eigenvalue(sys.A);
  if (!(lead.real() < -hurwitz_tolerance(sys.A))) {
    throw DomainError("settling time requires a Hurwitz closed-loop matrix", lead);
  }
  const double horizon = 40.0 / -lead.real();
  std::vector<double> grid(resolution + 1);
  for (std::size_t i = 0; i <= resolution; ++i) grid[i] = horizon * static_cast<double>(i) / static_cast<double>(resolution);
  const auto traj = integrate_mean(sys, grid);
  const auto y = traj.component(sys.output);
  return settling_time(traj.times, y, sys.set_point(), band);
}

/// Transient covariance dS/dt = R S + S R^T + Q from S0, RK4 on the grid.
/// Uses the stationary-closure matrices, so it is only indicative away from
/// stationarity.
inline std::vector<Eigen::MatrixXd> integrate_covariance(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Q,
                                                         const Eigen::MatrixXd& S0, std::span<const double> grid) {
  std::vector<Eigen::MatrixXd> out;
  if (grid.empty()) return out;
  const double scale = 2.0 * R.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::Index n = R.rows();
  auto f = [&](const Eigen::VectorXd& v) {
    const Eigen::Map<const Eigen::MatrixXd> S(v.data(), n, n);
    Eigen::MatrixXd dS = R * S + S * R.transpose() + Q;
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(dS.data(), n * n));
  };
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(S0.data(), n * n);
  out.push_back(S0);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double dt = grid[g] - grid[g - 1];
    const int steps = detail::substeps(dt, scale);
    for (int s = 0; s < steps; ++s) v = detail::rk4_step(f, v, dt / steps);
    out.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n));
  }
  return out;
}

}  // namespace aif

#endif  // AIF_MEAN_ODE_HPP
