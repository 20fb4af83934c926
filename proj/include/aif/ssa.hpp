#ifndef AIF_SSA_HPP
#define AIF_SSA_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <span>
#include <vector>

#include "aif/crn.hpp"
#include "aif/errors.hpp"
#include "aif/rng.hpp"

namespace aif {

/// Flat, dispatch-free form of a Network for the inner simulation loop.
/// Propensities evaluate exactly as aif::propensity does.
class CompiledNetwork {
 public:
  explicit CompiledNetwork(const Network& network) : dim_(network.dimension()) {
    for (const auto& r : network.reactions()) {
      Entry e;
      e.reactant_begin = reactants_.size();
      for (std::size_t i = 0; i < dim_; ++i) {
        if (r.reactants[i] != 0) reactants_.push_back({i, r.reactants[i]});
      }
      e.reactant_end = reactants_.size();
      e.change_begin = changes_.size();
      const auto change = r.net_change();
      for (std::size_t i = 0; i < dim_; ++i) {
        if (change[i] != 0) changes_.push_back({i, change[i]});
      }
      e.change_end = changes_.size();
      std::visit(
          [&](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, MassAction>) {
              e.kind = Kind::MassAction;
              e.rate = law.rate;
            } else if constexpr (std::is_same_v<T, OnOffProportional>) {
              e.kind = Kind::OnOff;
              e.rate = law.gain;
              e.mu = law.mu;
              e.theta = law.theta;
              e.target = law.target;
            } else {
              e.kind = Kind::Hill;
              e.rate = law.gain;
              e.target = law.target;
            }
          },
          r.law);
      entries_.push_back(e);
    }
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t reaction_count() const noexcept { return entries_.size(); }

  double propensity(std::size_t k, std::span<const Count> x) const noexcept {
    const Entry& e = entries_[k];
    switch (e.kind) {
      case Kind::MassAction: {
        double a = e.rate;
        for (std::size_t p = e.reactant_begin; p < e.reactant_end; ++p) {
          a *= detail::falling_factorial(x[reactants_[p].species], reactants_[p].order);
        }
        return a;
      }
      case Kind::OnOff:
        return e.rate * std::max(0.0, e.mu - e.theta * static_cast<double>(x[e.target]));
      case Kind::Hill:
        return e.rate / (1.0 + static_cast<double>(x[e.target]));
    }
    return 0.0;
  }

  /// Applies reaction k. Returns false (leaving x untouched) if a count would go negative.
  bool apply(std::size_t k, std::span<Count> x) const noexcept {
    const Entry& e = entries_[k];
    for (std::size_t p = e.change_begin; p < e.change_end; ++p) {
      const auto& c = changes_[p];
      if (c.delta < 0 && x[c.species] < static_cast<Count>(-c.delta)) return false;
    }
    for (std::size_t p = e.change_begin; p < e.change_end; ++p) {
      const auto& c = changes_[p];
      x[c.species] = static_cast<Count>(static_cast<std::int64_t>(x[c.species]) + c.delta);
    }
    return true;
  }

 private:
  enum class Kind : std::uint8_t { MassAction, OnOff, Hill };
  struct Term {
    std::size_t species;
    Count order;
  };
  struct Change {
    std::size_t species;
    std::int64_t delta;
  };
  struct Entry {
    Kind kind = Kind::MassAction;
    double rate = 0.0, mu = 0.0, theta = 0.0;
    std::size_t target = 0;
    std::size_t reactant_begin = 0, reactant_end = 0, change_begin = 0, change_end = 0;
  };

  std::size_t dim_;
  std::vector<Entry> entries_;
  std::vector<Term> reactants_;
  std::vector<Change> changes_;
};

namespace detail {

inline std::string format_state(std::span<const Count> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace detail

struct Event {
  double time;
  std::size_t reaction;
};

/// Gillespie direct method. Each step consumes exactly two uniforms: the
/// waiting time first, then the reaction choice.
class DirectMethod {
 public:
  DirectMethod(const CompiledNetwork& network, std::uint64_t seed)
      : net_(&network), rng_(seed), props_(network.reaction_count(), 0.0) {}

  /// Next event after time t from state x, or nullopt when every propensity is zero.
  std::optional<Event> next(std::span<const Count> x, double t) {
    double total = 0.0;
    for (std::size_t k = 0; k < props_.size(); ++k) {
      props_[k] = net_->propensity(k, x);
      total += props_[k];
    }
    if (!std::isfinite(total)) {
      throw NumericError("non-finite total propensity at state " + detail::format_state(x));
    }
    if (total <= 0.0) return std::nullopt;
    const double tau = rng_.exponential(total);
    const double target = rng_.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = props_.size();
    for (std::size_t k = 0; k < props_.size(); ++k) {
      if (props_[k] <= 0.0) continue;
      chosen = k;
      acc += props_[k];
      if (target < acc) break;
    }
    return Event{t + tau, chosen};
  }

  void fire(std::size_t reaction, std::span<Count> x) const {
    if (!net_->apply(reaction, x)) {
      throw NumericError("reaction " + std::to_string(reaction) + " would drive a count negative at state " +
                         detail::format_state(x));
    }
  }

 private:
  const CompiledNetwork* net_;
  Rng rng_;
  std::vector<double> props_;
};

/// Piecewise-constant path: states[j] holds on [times[j], times[j+1]).
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Count>> states;
  std::vector<std::size_t> reactions;  // reactions[j] produced states[j + 1]
  double t_end = 0.0;

  /// State at the last jump <= t.
  const std::vector<Count>& at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto j = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return states[j];
  }
};

inline void check_initial_state(const State& x0, std::size_t dim, double t_end) {
  if (x0.counts.size() != dim) {
    throw StructuralError("initial state has " + std::to_string(x0.counts.size()) + " entries, network has " +
                          std::to_string(dim) + " species");
  }
  if (!(t_end > x0.time) || !std::isfinite(t_end)) throw StructuralError("t_end must be finite and after the start time");
}

inline Trajectory simulate(const Network& network, const State& x0, double t_end, std::uint64_t seed) {
  check_initial_state(x0, network.dimension(), t_end);
  const CompiledNetwork compiled(network);
  DirectMethod method(compiled, seed);
  Trajectory out;
  out.t_end = t_end;
  std::vector<Count> x = x0.counts;
  double t = x0.time;
  out.times.push_back(t);
  out.states.push_back(x);
  while (auto ev = method.next(x, t)) {
    if (ev->time > t_end) break;
    method.fire(ev->reaction, x);
    t = ev->time;
    out.times.push_back(t);
    out.states.push_back(x);
    out.reactions.push_back(ev->reaction);
  }
  return out;
}

/// Runs one trajectory and calls sink(grid_index, state) for every grid point,
/// using the state at the last jump <= grid time. Grid must be increasing.
template <class Sink>
void sample_on_grid(const CompiledNetwork& network, std::vector<Count> x, double t0, std::span<const double> grid,
                    std::uint64_t seed, Sink&& sink) {
  DirectMethod method(network, seed);
  double t = t0;
  std::size_t g = 0;
  const double t_last = grid.empty() ? t0 : grid.back();
  while (g < grid.size()) {
    auto ev = method.next(x, t);
    const double next_time = ev ? ev->time : INFINITY;
    while (g < grid.size() && grid[g] < next_time) sink(g++, std::span<const Count>(x));
    if (!ev || next_time > t_last) break;
    method.fire(ev->reaction, x);
    t = next_time;
  }
  while (g < grid.size()) sink(g++, std::span<const Count>(x));
}

}  // namespace aif

#endif  // AIF_SSA_HPP
