#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "aif/mean_ode.hpp"
#include "aif/presets.hpp"

using namespace aif;

namespace {

LinearClosedLoop gene_loop(double k, double beta) {
  return make_linear_closed_loop(linearize_propensities(gene_expression_network(kGeneParams)), 1, 0, 10, 2, k, beta);
}

LinearClosedLoop scalar_relaxation() {
  LinearClosedLoop s;
  s.A = -Eigen::MatrixXd::Identity(1, 1);
  s.input = Eigen::VectorXd::Ones(1);
  s.drift = Eigen::VectorXd::Zero(1);
  s.mu = 5.0;
  s.theta = 1.0;
  s.output = 0;
  s.x0 = Eigen::VectorXd::Zero(1);
  return s;
}

}  // namespace

TEST(MeanOde, SteadyStateHitsSetPoint) {
  for (double beta : {0.0, 1.0, 10.0}) {
    const auto sys = gene_loop(3, beta);
    const auto x = steady_state(sys);
    EXPECT_NEAR(x(1), 5.0, 5e-9);
    EXPECT_LT((sys.A * x + sys.input * sys.mu + sys.drift).norm(), 1e-9);
  }
  const auto mat = make_linear_closed_loop(linearize_propensities(maturation_network(kMaturationParams)), 2, 0, 10, 2, 3, 5);
  EXPECT_NEAR(steady_state(mat)(2), 5.0, 5e-9);
}

TEST(MeanOde, MatchesMatrixExponential) {
  auto sys = gene_loop(3, 2);
  const Eigen::VectorXd b = sys.input * sys.mu + sys.drift;
  const Eigen::VectorXd xs = -sys.A.fullPivLu().solve(b);
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> u(0.1, 15.0);
  std::vector<double> grid{0.0};
  for (int i = 0; i < 5; ++i) grid.push_back(u(g));
  std::sort(grid.begin(), grid.end());
  const auto traj = integrate_mean(sys, grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const Eigen::MatrixXd E = (sys.A * grid[i]).exp();
    const Eigen::VectorXd ref = E * (sys.x0 - xs) + xs;
    EXPECT_LT((traj.states[i] - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(MeanOde, FixedPointIsConstant) {
  auto sys = gene_loop(3, 1);
  sys.x0 = steady_state(sys);
  const auto traj = integrate_mean(sys, TimeGrid::uniform(10, 11).points);
  for (const auto& s : traj.states) EXPECT_LT((s - sys.x0).norm(), 1e-9);
  EXPECT_EQ(settling_time_ode(sys), 0.0);
}

TEST(MeanOde, ScalarSettlingTime) {
  const auto st = settling_time_ode(scalar_relaxation());
  ASSERT_TRUE(st);
  EXPECT_NEAR(*st, std::log(50.0), 0.01);
}

TEST(MeanOde, NonHurwitzIsDomainError) { EXPECT_THROW(settling_time_ode(gene_loop(40, 0)), DomainError); }

TEST(PiZero, Values) {
  EXPECT_DOUBLE_EQ(*pi_zero(3, 6, 2), -1.0);
  EXPECT_FALSE(pi_zero(3, 0, 2));
  EXPECT_LT(*pi_zero(3, 1e9, 2), 0.0);
  EXPECT_GT(*pi_zero(3, 1e9, 2), -1e-6);
}

TEST(MeanOde, SettlingTimeFallsThenRises) {
  std::vector<double> st;
  for (double beta : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) st.push_back(*settling_time_ode(gene_loop(3, beta)));
  const auto min = std::min_element(st.begin(), st.end());
  EXPECT_LT(*min, st.front());
  EXPECT_LT(*min, st.back());
}
