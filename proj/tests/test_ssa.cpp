#include <cmath>

#include <gtest/gtest.h>

#include "aif/ensemble.hpp"
#include "aif/moment_analysis.hpp"
#include "aif/presets.hpp"
#include "aif/ssa.hpp"
#include "oracles.hpp"

using namespace aif;

namespace {

Network birth_death(double birth, double death) {
  return Network({"X"}, {detail::reaction(1, {}, {{0, 1}}, MassAction{birth}),
                         detail::reaction(1, {{0, 1}}, {}, MassAction{death})});
}

State origin(const Network& net) { return {std::vector<Count>(net.dimension(), 0), 0.0}; }

}  // namespace

TEST(DirectMethod, SameSeedSameJumps) {
  const auto net = close_loop(gene_expression_network(kGeneParams), preset_controller(1)).network;
  const auto a = simulate(net, origin(net), 5.0, 42);
  const auto b = simulate(net, origin(net), 5.0, 42);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.reactions, b.reactions);
  EXPECT_GT(a.times.size(), 100u);
  const auto c = simulate(net, origin(net), 5.0, 43);
  EXPECT_NE(a.times, c.times);
}

TEST(DirectMethod, ZeroRatesStayAtInitialState) {
  const auto net = birth_death(0.0, 0.0);
  const auto tr = simulate(net, State{{7}, 0.0}, 10.0, 1);
  EXPECT_EQ(tr.states.size(), 1u);
  EXPECT_EQ(tr.at(9.0)[0], 7u);
}

TEST(DirectMethod, RejectsBadInitialState) {
  const auto net = birth_death(1.0, 1.0);
  EXPECT_THROW(simulate(net, State{{1, 2}, 0.0}, 1.0, 1), StructuralError);
  EXPECT_THROW(simulate(net, State{{1}, 0.0}, -1.0, 1), StructuralError);
}

TEST(DirectMethod, JumpTimesIncreaseAndCountsStayNonnegative) {
  const auto net = close_loop(dimerization_network(kDimerizationParams), preset_controller(2)).network;
  const auto tr = simulate(net, origin(net), 5.0, 9);
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  EXPECT_LE(tr.times.back(), 5.0);
}

TEST(Grid, LeftContinuousSampling) {
  const auto net = birth_death(3.0, 1.0);
  const auto tr = simulate(net, origin(net), 5.0, 5);
  ASSERT_GT(tr.times.size(), 3u);
  // Grid placed exactly on jump times must see the post-jump state.
  std::vector<double> grid{0.0, tr.times[1], tr.times[2], 0.5 * (tr.times[2] + tr.times[3]), 5.0};
  std::vector<Count> seen(grid.size());
  sample_on_grid(CompiledNetwork(net), {0}, 0.0, grid, 5, [&](std::size_t g, std::span<const Count> x) { seen[g] = x[0]; });
  for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_EQ(seen[g], tr.at(grid[g])[0]) << g;
}

TEST(Welford, MatchesTwoPassOnTenTrajectories) {
  const auto net = close_loop(gene_expression_network(kGeneParams), preset_controller(1)).network;
  const auto grid = TimeGrid::uniform(10.0, 11);
  const SeedPlan plan{77};
  const auto stats = run_ensemble(net, origin(net), grid, species_observables(net), EnsembleOptions{10, plan, 1});
  std::vector<Trajectory> trs;
  for (std::uint64_t i = 0; i < 10; ++i) trs.push_back(simulate(net, origin(net), 10.0, plan.stream_seed(i)));
  for (std::size_t g = 0; g < grid.points.size(); ++g) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        std::vector<double> va, vb;
        for (const auto& tr : trs) {
          va.push_back(static_cast<double>(tr.at(grid.points[g])[a]));
          vb.push_back(static_cast<double>(tr.at(grid.points[g])[b]));
        }
        const double ref = oracle::covariance(va, vb);
        EXPECT_NEAR(stats.points[g].covariance(a, b), ref, 1e-9 * (1.0 + std::abs(ref)));
      }
    }
  }
}

TEST(Welford, TwoSampleIdentity) {
  CovarianceAccumulator acc(1);
  acc.add(std::vector<double>{3.0});
  acc.add(std::vector<double>{8.0});
  EXPECT_DOUBLE_EQ(acc.variance(0), 12.5);
}

TEST(Welford, MergeEqualsSequential) {
  CovarianceAccumulator all(2), left(2), right(2);
  std::mt19937_64 g(1);
  std::normal_distribution<double> n(3.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x{n(g), n(g)};
    all.add(x);
    (i < 70 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  EXPECT_NEAR(left.covariance(0, 1), all.covariance(0, 1), 1e-12);
  EXPECT_NEAR(left.variance(1), all.variance(1), 1e-12);
}

TEST(Ensemble, PoissonBirthDeath) {
  const auto net = birth_death(5.0, 1.0);
  const auto stats = run_ensemble(net, origin(net), TimeGrid::uniform(20.0, 81), species_observables(net),
                                  EnsembleOptions{10000, SeedPlan{3}, 1});
  const auto& last = stats.points.back();
  const double se_mean = std::sqrt(5.0 / 10000.0);
  const double se_var = 5.0 * std::sqrt(2.0 / 9999.0 + 1.0 / (5.0 * 10000.0));
  EXPECT_NEAR(last.mean(0), 5.0, 3.0 * se_mean);
  EXPECT_NEAR(last.variance(0), 5.0, 3.0 * se_var);
  const auto est = stationary_stats(stats, 0.25);
  EXPECT_NEAR(est.mean_of(0), 5.0, 3.0 * se_mean);
}

TEST(Ensemble, FullWindowAgreesWithTailWindowWhenSettled) {
  const auto net = birth_death(5.0, 1.0);
  const auto stats = run_ensemble(net, State{{5}, 0.0}, TimeGrid::uniform(20.0, 81), species_observables(net),
                                  EnsembleOptions{4000, SeedPlan{4}, 1});
  EXPECT_NEAR(stationary_stats(stats, 1.0).mean_of(0), stationary_stats(stats, 0.25).mean_of(0), 0.1);
}

TEST(Ensemble, ThreadCountDoesNotChangeResults) {
  const auto cl = close_loop(gene_expression_network(kGeneParams), preset_controller(1));
  const auto obs = closed_loop_observables(cl, true);
  auto run = [&](unsigned threads) {
    return run_ensemble(cl.network, origin(cl.network), TimeGrid::uniform(5.0, 11), obs,
                        EnsembleOptions{300, SeedPlan{5}, threads});
  };
  const auto a = run(1), b = run(2), c = run(8);
  for (std::size_t g = 0; g < a.points.size(); ++g) {
    for (std::size_t i = 0; i < obs.size(); ++i) {
      EXPECT_EQ(a.points[g].mean(i), b.points[g].mean(i));
      EXPECT_EQ(a.points[g].mean(i), c.points[g].mean(i));
      for (std::size_t j = 0; j < obs.size(); ++j) EXPECT_EQ(a.points[g].covariance(i, j), c.points[g].covariance(i, j));
    }
  }
}

TEST(Ensemble, RejectsTinyEnsembleAndBadGrid) {
  const auto net = birth_death(1.0, 1.0);
  EXPECT_THROW(run_ensemble(net, origin(net), TimeGrid::uniform(1.0, 5), species_observables(net),
                            EnsembleOptions{1, SeedPlan{1}, 1}),
               ConfigError);
  TimeGrid bad{1.0, {0.0, 0.5, 0.25}};
  EXPECT_THROW(run_ensemble(net, origin(net), bad, species_observables(net), EnsembleOptions{10, SeedPlan{1}, 1}),
               ConfigError);
}

TEST(Ensemble, GeneClosedLoopStationaryMoments) {
  auto ctl = preset_controller(1);
  const auto cl = close_loop(gene_expression_network(kGeneParams), ctl);
  const auto stats = run_ensemble(cl.network, origin(cl.network), TimeGrid::uniform(40.0, 161),
                                  closed_loop_observables(cl, false), EnsembleOptions{3000, SeedPlan{21}, 1});
  const auto est = stationary_stats(stats);
  EXPECT_NEAR(est.mean_of(1), 5.0, 0.15);
  const double formula = gene_variance_closed_form(kGeneParams, 10, 2, 3, 0);
  EXPECT_LT(std::abs(est.variance(1) - formula) / est.variance(1), 0.15);
  EXPECT_EQ(estimate_beta(est, stats.find("F"), 1), 0.0);
}

TEST(Stationary, ConstantSeriesEqualsAnyPoint) {
  EnsembleStats s;
  s.names = {"A"};
  for (int g = 0; g < 8; ++g) {
    s.times.push_back(g);
    CovarianceAccumulator acc(1);
    acc.add(std::vector<double>{1.0});
    acc.add(std::vector<double>{3.0});
    s.points.push_back(acc);
  }
  s.batches = {s.points, s.points};
  const auto est = stationary_stats(s);
  EXPECT_DOUBLE_EQ(est.mean_of(0), 2.0);
  EXPECT_DOUBLE_EQ(est.variance(0), 2.0);
  s.times.resize(1);
  s.points.resize(1);
  EXPECT_THROW(stationary_stats(s), ConfigError);
}

TEST(Beta, ZeroVarianceIsNumericError) {
  StationaryEstimate est;
  est.mean = Eigen::VectorXd::Zero(2);
  est.covariance = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(estimate_beta(est, 1, 0), NumericError);
  est.covariance(0, 0) = 2.0;
  EXPECT_EQ(estimate_beta(est, 1, 0), 0.0);  // constant F
  est.covariance(0, 1) = est.covariance(1, 0) = -3.0;
  EXPECT_DOUBLE_EQ(estimate_beta(est, 1, 0), 1.5);
}

TEST(SettlingTime, Cases) {
  std::vector<double> t, flat, never, relax;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(i * 0.01);
    flat.push_back(5.0);
    never.push_back(0.0);
    relax.push_back(5.0 * (1.0 - std::exp(-t.back())));
  }
  EXPECT_EQ(settling_time(t, flat, 5.0, 0.02), 0.0);
  EXPECT_FALSE(settling_time(t, never, 5.0, 0.02));
  const auto st = settling_time(t, relax, 5.0, 0.02);
  ASSERT_TRUE(st);
  EXPECT_NEAR(*st, std::log(50.0), 0.01);
}

TEST(GrowthTest, DetectsLinearDrift) {
  auto make = [](double slope) {
    EnsembleStats s;
    s.names = {"Z2"};
    std::mt19937_64 g(2);
    std::normal_distribution<double> noise(0.0, 1.0);
    s.batches.resize(8);
    for (int i = 0; i <= 100; ++i) {
      s.times.push_back(i);
      CovarianceAccumulator all(1);
      for (auto& b : s.batches) {
        CovarianceAccumulator acc(1);
        for (int r = 0; r < 5; ++r) acc.add(std::vector<double>{slope * i + noise(g)});
        b.push_back(acc);
        all.merge(acc);
      }
      s.points.push_back(all);
    }
    return growth_test(s, 0, 0.5);
  };
  EXPECT_TRUE(make(0.5).growing);
  EXPECT_FALSE(make(0.0).growing);
}
