#ifndef AIF_ENSEMBLE_HPP
#define AIF_ENSEMBLE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aif/controller.hpp"
#include "aif/crn.hpp"
#include "aif/errors.hpp"
#include "aif/rng.hpp"
#include "aif/ssa.hpp"
#include "aif/welford.hpp"

namespace aif {

struct TimeGrid {
  double t_end = 0.0;
  std::vector<double> points;

  /// `count` equally spaced points on [0, t_end].
  static TimeGrid uniform(double t_end, std::size_t count) {
    if (!(t_end > 0.0) || count < 2) throw ConfigError("time grid needs t_end > 0 and at least two points");
    TimeGrid g{t_end, std::vector<double>(count)};
    for (std::size_t i = 0; i < count; ++i) {
      g.points[i] = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return g;
  }

  void validate() const {
    if (points.empty()) throw ConfigError("time grid is empty");
    if (points.front() != 0.0) throw ConfigError("time grid must start at 0");
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i] > points[i - 1])) throw ConfigError("time grid must be strictly increasing");
    }
    if (points.back() > t_end) throw ConfigError("time grid extends past t_end");
  }
};

/// Scalar function of the state tracked by an ensemble.
class Observable {
 public:
  struct SpeciesCount {
    std::size_t index;
  };
  struct Difference {
    std::size_t plus, minus;
  };
  /// prod_i x_{index_i}^{power_i}
  struct Monomial {
    std::vector<std::pair<std::size_t, unsigned>> factors;
  };
  /// Propensity of a reaction, e.g. the feedback F(X_l).
  struct RatePropensity {
    Reaction reaction;
  };
  using Kind = std::variant<SpeciesCount, Difference, Monomial, RatePropensity>;

  Observable(std::string name, Kind kind) : name_(std::move(name)), kind_(std::move(kind)) {}

  static Observable species(const Network& net, std::size_t i) { return {net.species_names().at(i), SpeciesCount{i}}; }

  const std::string& name() const noexcept { return name_; }
  const Kind& kind() const noexcept { return kind_; }

  double operator()(std::span<const Count> x) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, SpeciesCount>) {
            return static_cast<double>(x[k.index]);
          } else if constexpr (std::is_same_v<T, Difference>) {
            return static_cast<double>(x[k.plus]) - static_cast<double>(x[k.minus]);
          } else if constexpr (std::is_same_v<T, Monomial>) {
            double v = 1.0;
            for (auto [i, p] : k.factors)
              for (unsigned j = 0; j < p; ++j) v *= static_cast<double>(x[i]);
            return v;
          } else {
            return propensity(k.reaction, x);
          }
        },
        kind_);
  }

 private:
  std::string name_;
  Kind kind_;
};

inline std::vector<Observable> species_observables(const Network& net) {
  std::vector<Observable> out;
  for (std::size_t i = 0; i < net.dimension(); ++i) out.push_back(Observable::species(net, i));
  return out;
}

/// Species counts, Z1-Z2 and F(X_l) (if a feedback is attached). With
/// `invariants`, also Z1*Z2, Z1^2*Z2, Z1*Z2^2 and X_l*Z2.
inline std::vector<Observable> closed_loop_observables(const ClosedLoopNetwork& cl, bool invariants) {
  auto out = species_observables(cl.network);
  const std::size_t z1 = cl.z1(), z2 = cl.z2(), l = cl.config.controlled;
  out.emplace_back("Z1-Z2", Observable::Difference{z1, z2});
  if (auto fb = cl.feedback_reaction()) out.emplace_back("F", Observable::RatePropensity{cl.network.reaction(*fb)});
  if (invariants) {
    using M = Observable::Monomial;
    out.emplace_back("Z1*Z2", M{{{z1, 1}, {z2, 1}}});
    out.emplace_back("Z1^2*Z2", M{{{z1, 2}, {z2, 1}}});
    out.emplace_back("Z1*Z2^2", M{{{z1, 1}, {z2, 2}}});
    out.emplace_back(cl.network.species_names()[l] + "*Z2", M{{{l, 1}, {z2, 1}}});
  }
  return out;
}

/// Per-grid-point ensemble moments. `points` is the full ensemble; `batches`
/// holds the same moments for disjoint, fixed trajectory blocks, which gives
/// batch-means standard errors for any derived estimate.
struct EnsembleStats {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<CovarianceAccumulator> points;
  std::vector<std::vector<CovarianceAccumulator>> batches;

  std::size_t trajectories() const { return points.empty() ? 0 : points.front().count(); }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }

  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ConfigError("no observable named '" + std::string(name) + "'");
  }

  std::vector<double> mean_series(std::size_t obs) const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.mean(obs));
    return out;
  }

  std::vector<double> variance_series(std::size_t obs) const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.variance(obs));
    return out;
  }
};

struct EnsembleOptions {
  std::size_t n = 10000;
  SeedPlan plan{};
  unsigned threads = 1;
  /// Trajectories are split into min(n, max_batches) contiguous blocks. The
  /// block layout depends only on n, which makes results thread-count invariant.
  std::size_t max_batches = 32;
};

/// Simulates n trajectories from x0 and accumulates the observables on the
/// grid. Trajectory i always uses plan.stream_seed(i); blocks are merged in
/// block order, so the result is bit-identical for any thread count.
inline EnsembleStats run_ensemble(const Network& network, const State& x0, const TimeGrid& grid,
                                  const std::vector<Observable>& observables, const EnsembleOptions& options) {
  if (options.n < 2) throw ConfigError("ensemble size must be at least 2");
  grid.validate();
  check_initial_state(x0, network.dimension(), grid.t_end);
  if (observables.empty()) throw ConfigError("no observables requested");

  const CompiledNetwork compiled(network);
  const std::size_t m = observables.size();
  const std::size_t P = grid.points.size();
  const std::size_t B = std::max<std::size_t>(1, std::min(options.n, options.max_batches));

  EnsembleStats stats;
  stats.times = grid.points;
  for (const auto& o : observables) stats.names.push_back(o.name());
  stats.batches.assign(B, std::vector<CovarianceAccumulator>(P, CovarianceAccumulator(m)));
  std::vector<std::exception_ptr> errors(B);

  auto run_batch = [&](std::size_t b) {
    auto& acc = stats.batches[b];
    std::vector<double> values(m);
    const std::size_t first = b * options.n / B;
    const std::size_t last = (b + 1) * options.n / B;
    std::size_t i = first;
    try {
      for (; i < last; ++i) {
        sample_on_grid(compiled, x0.counts, 0.0, grid.points, options.plan.stream_seed(i),
                       [&](std::size_t g, std::span<const Count> x) {
                         for (std::size_t o = 0; o < m; ++o) values[o] = observables[o](x);
                         acc[g].add(values);
                       });
      }
    } catch (const NumericError& e) {
      errors[b] = std::make_exception_ptr(NumericError("trajectory " + std::to_string(i) + ": " + e.what()));
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(B)));
  if (workers == 1) {
    for (std::size_t b = 0; b < B; ++b) run_batch(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < B; b = next++) run_batch(b);
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  stats.points = stats.batches.front();
  for (std::size_t b = 1; b < B; ++b)
    for (std::size_t g = 0; g < P; ++g) stats.points[g].merge(stats.batches[b][g]);
  return stats;
}

/// Tail time-average of ensemble means and covariances.
struct StationaryEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t grid_points = 0;

  double variance(std::size_t i) const { return covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)); }
  double cov(std::size_t i, std::size_t j) const {
    return covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double mean_of(std::size_t i) const { return mean(static_cast<Eigen::Index>(i)); }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> tail_range(const std::vector<double>& times, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw ConfigError("stationary window must lie in (0, 1]");
  const double t0 = times.front(), t1 = times.back();
  const double start = t1 - window * (t1 - t0);
  std::size_t first = 0;
  while (first < times.size() && times[first] < start - 1e-12 * std::max(1.0, std::abs(t1))) ++first;
  if (times.size() - first < 2) throw ConfigError("stationary window selects fewer than two grid points");
  return {first, times.size()};
}

inline StationaryEstimate tail_average(const std::vector<CovarianceAccumulator>& pts, std::size_t first,
                                       std::size_t last) {
  const auto m = static_cast<Eigen::Index>(pts.front().dimension());
  StationaryEstimate est{Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, m), last - first};
  for (std::size_t g = first; g < last; ++g) {
    est.mean += pts[g].mean_vector();
    est.covariance += pts[g].covariance_matrix();
  }
  est.mean /= static_cast<double>(last - first);
  est.covariance /= static_cast<double>(last - first);
  return est;
}

}  // namespace detail

/// Averages the grid-point moments over the final `window` fraction of the grid.
inline StationaryEstimate stationary_stats(const EnsembleStats& stats, double window = 0.25) {
  auto [first, last] = detail::tail_range(stats.times, window);
  return detail::tail_average(stats.points, first, last);
}

/// The same tail average evaluated separately on every trajectory block.
inline std::vector<StationaryEstimate> batch_stationary_stats(const EnsembleStats& stats, double window = 0.25) {
  auto [first, last] = detail::tail_range(stats.times, window);
  std::vector<StationaryEstimate> out;
  for (const auto& b : stats.batches) {
    if (b.front().count() >= 2) out.push_back(detail::tail_average(b, first, last));
  }
  return out;
}

/// Batch-means standard error: sd(values) / sqrt(#values). NaN below two values.
inline double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return NAN;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
}

template <class F>
double batch_standard_error(const std::vector<StationaryEstimate>& batches, F&& f) {
  std::vector<double> v;
  for (const auto& b : batches) v.push_back(f(b));
  return standard_error(v);
}

/// Effective proportional gain -Cov(F, X_l) / Var(X_l). Without a feedback
/// observable F is identically zero and beta = 0.
inline double estimate_beta(const StationaryEstimate& est, std::optional<std::size_t> feedback_obs,
                            std::size_t controlled_obs) {
  const double var = est.variance(controlled_obs);
  if (!(var > 0.0)) throw NumericError("cannot estimate beta: stationary variance of the controlled species is zero");
  if (!feedback_obs) return 0.0;
  return 0.0 - est.cov(*feedback_obs, controlled_obs) / var;
}

/// Smallest grid time after which the series stays within
/// set_point * (1 +- band) through the last point; nullopt if the last point is outside.
inline std::optional<double> settling_time(std::span<const double> times, std::span<const double> values,
                                           double set_point, double band) {
  if (!(band > 0.0)) throw ConfigError("settling band must be positive");
  const double tol = std::abs(set_point) * band;
  std::optional<double> out;
  for (std::size_t i = times.size(); i-- > 0;) {
    if (std::abs(values[i] - set_point) > tol) break;
    out = times[i];
  }
  return out;
}

/// Least-squares slope of y against t.
inline double fitted_slope(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sty = 0, stt = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sty += (t[i] - mt) * (y[i] - my);
    stt += (t[i] - mt) * (t[i] - mt);
  }
  return stt > 0 ? sty / stt : 0.0;
}

struct GrowthTest {
  double slope = 0.0;
  double standard_error = 0.0;
  bool growing = false;
};

/// Linear-growth test on the ensemble mean of one observable over the tail
/// window: growing when the fitted slope exceeds 3 standard errors above zero.
/// The standard error comes from per-batch slopes.
inline GrowthTest growth_test(const EnsembleStats& stats, std::size_t obs, double window = 0.25) {
  auto [first, last] = detail::tail_range(stats.times, window);
  std::span<const double> t(stats.times.data() + first, last - first);
  auto slope_of = [&](const std::vector<CovarianceAccumulator>& pts) {
    std::vector<double> y;
    for (std::size_t g = first; g < last; ++g) y.push_back(pts[g].mean(obs));
    return fitted_slope(t, y);
  };
  GrowthTest out;
  out.slope = slope_of(stats.points);
  std::vector<double> slopes;
  for (const auto& b : stats.batches) slopes.push_back(slope_of(b));
  out.standard_error = standard_error(slopes);
  out.growing = out.slope > 0.0 && out.slope > 3.0 * out.standard_error;
  return out;
}

struct InvariantRow {
  std::string name;
  double measured = 0.0;
  double predicted = 0.0;
  double relative_deviation = 0.0;
};

/// Compares the antithetic controller's stationary invariants with their
/// predicted values:
///   Cov(X_l, Z1-Z2) = mu/theta
///   E[Z1 Z2]        = mu/eta
///   E[Z1^2 Z2]      = (mu/eta)(1 + E[Z1])
///   E[Z1 Z2^2]      = (mu + theta E[X_l Z2]) / eta
/// Requires the observables of closed_loop_observables(cl, true).
inline std::vector<InvariantRow> invariant_report(const EnsembleStats& stats, const ClosedLoopNetwork& cl,
                                                  double window = 0.25) {
  const auto est = stationary_stats(stats, window);
  const auto& c = cl.config;
  const auto& names = cl.network.species_names();
  const std::size_t xl = stats.index_of(names[c.controlled]);
  const std::size_t z1 = stats.index_of("Z1");
  const std::size_t zd = stats.index_of("Z1-Z2");
  const std::size_t z1z2 = stats.index_of("Z1*Z2");
  const std::size_t z1sq = stats.index_of("Z1^2*Z2");
  const std::size_t z2sq = stats.index_of("Z1*Z2^2");
  const std::size_t xlz2 = stats.index_of(names[c.controlled] + "*Z2");

  auto row = [](std::string name, double measured, double predicted) {
    return InvariantRow{std::move(name), measured, predicted, std::abs(measured - predicted) / std::abs(predicted)};
  };
  return {
      row("Cov(" + names[c.controlled] + ",Z1-Z2)", est.cov(xl, zd), c.mu / c.theta),
      row("E[Z1*Z2]", est.mean_of(z1z2), c.mu / c.eta),
      row("E[Z1^2*Z2]", est.mean_of(z1sq), c.mu / c.eta * (1.0 + est.mean_of(z1))),
      row("E[Z1*Z2^2]", est.mean_of(z2sq), (c.mu + c.theta * est.mean_of(xlz2)) / c.eta),
  };
}

}  // namespace aif

#endif  // AIF_ENSEMBLE_HPP
