#ifndef AIF_CRN_HPP
#define AIF_CRN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aif/errors.hpp"

namespace aif {

/// Molecule copy number.
using Count = std::uint64_t;

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct Species {
  std::string name;
  std::size_t index = 0;
};

/// rho * prod_i x_i! / (x_i - reactant_i)!
struct MassAction {
  double rate = 0.0;
};

/// gain * max(0, mu - theta * x_target)
struct OnOffProportional {
  double gain = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  std::size_t target = 0;
};

/// gain / (1 + x_target), non-cooperative repression.
struct Hill {
  double gain = 0.0;
  std::size_t target = 0;
};

using RateLaw = std::variant<MassAction, OnOffProportional, Hill>;

struct Reaction {
  std::vector<Count> reactants;
  std::vector<Count> products;
  RateLaw law;

  /// Jump applied to the state when the reaction fires.
  std::vector<std::int64_t> net_change() const {
    std::vector<std::int64_t> out(reactants.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::int64_t>(products[i]) - static_cast<std::int64_t>(reactants[i]);
    }
    return out;
  }

  Count order() const {
    Count total = 0;
    for (Count r : reactants) total += r;
    return total;
  }
};

namespace detail {

/// x (x-1) ... (x-order+1); zero when x < order.
inline double falling_factorial(Count x, Count order) {
  if (x < order) return 0.0;
  double out = 1.0;
  for (Count j = 0; j < order; ++j) out *= static_cast<double>(x - j);
  return out;
}

inline void check_rate(double value, const char* what) {
  if (!std::isfinite(value) || value < 0.0) {
    throw StructuralError(std::string(what) + " must be finite and nonnegative");
  }
}

}  // namespace detail

/// Species plus reactions. Immutable once constructed; validated on construction.
class Network {
 public:
  Network(std::vector<std::string> species, std::vector<Reaction> reactions,
          std::string name = {}, std::string description = {})
      : names_(std::move(species)),
        reactions_(std::move(reactions)),
        name_(std::move(name)),
        description_(std::move(description)) {
    validate();
  }

  std::size_t dimension() const noexcept { return names_.size(); }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }

  const std::vector<std::string>& species_names() const noexcept { return names_; }
  Species species(std::size_t i) const { return {names_.at(i), i}; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  const Reaction& reaction(std::size_t k) const { return reactions_.at(k); }
  const std::string& name() const noexcept { return name_; }
  const std::string& description() const noexcept { return description_; }

  std::optional<std::size_t> find(std::string_view species_name) const {
    auto it = std::find(names_.begin(), names_.end(), species_name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t index_of(std::string_view species_name) const {
    if (auto i = find(species_name)) return *i;
    throw StructuralError("unknown species '" + std::string(species_name) + "'");
  }

 private:
  void validate() const {
    if (names_.empty()) throw StructuralError("network has no species");
    if (reactions_.empty()) throw StructuralError("network has no reactions");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw StructuralError("empty species name");
      if (!seen.insert(n).second) throw StructuralError("duplicate species '" + n + "'");
    }
    const std::size_t d = names_.size();
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
      const auto& r = reactions_[k];
      if (r.reactants.size() != d || r.products.size() != d) {
        throw StructuralError("reaction " + std::to_string(k) + " stoichiometry length differs from species count");
      }
      std::visit(
          [&](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, MassAction>) {
              detail::check_rate(law.rate, "mass-action rate");
            } else if constexpr (std::is_same_v<T, OnOffProportional>) {
              detail::check_rate(law.gain, "feedback gain");
              detail::check_rate(law.mu, "on/off mu");
              detail::check_rate(law.theta, "on/off theta");
              if (law.target >= d) throw StructuralError("on/off target out of range");
            } else {
              detail::check_rate(law.gain, "feedback gain");
              if (law.target >= d) throw StructuralError("hill target out of range");
            }
          },
          r.law);
    }
  }

  std::vector<std::string> names_;
  std::vector<Reaction> reactions_;
  std::string name_;
  std::string description_;
};

struct State {
  std::vector<Count> counts;
  double time = 0.0;
};

/// Evaluates the reaction's rate law at `x`. Mass-action uses the falling
/// factorial without symmetry factor, so 2X -> ... at count x gives rho x (x-1).
inline double propensity(const Reaction& reaction, std::span<const Count> x) {
  if (x.size() != reaction.reactants.size()) {
    throw StructuralError("state dimension " + std::to_string(x.size()) + " does not match reaction dimension " +
                          std::to_string(reaction.reactants.size()));
  }
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, MassAction>) {
          double a = law.rate;
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (reaction.reactants[i] != 0) a *= detail::falling_factorial(x[i], reaction.reactants[i]);
          }
          return a;
        } else if constexpr (std::is_same_v<T, OnOffProportional>) {
          return law.gain * std::max(0.0, law.mu - law.theta * static_cast<double>(x[law.target]));
        } else {
          return law.gain / (1.0 + static_cast<double>(x[law.target]));
        }
      },
      reaction.law);
}

inline double propensity(const Reaction& reaction, const State& state) {
  return propensity(reaction, std::span<const Count>(state.counts));
}

/// d x K matrix whose column k is products_k - reactants_k.
inline IntMatrix stoichiometric_matrix(const Network& network) {
  const auto d = static_cast<Eigen::Index>(network.dimension());
  const auto K = static_cast<Eigen::Index>(network.reaction_count());
  IntMatrix S(d, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto change = network.reaction(static_cast<std::size_t>(k)).net_change();
    for (Eigen::Index i = 0; i < d; ++i) S(i, k) = change[static_cast<std::size_t>(i)];
  }
  return S;
}

/// Every reaction is mass-action of total order at most one.
inline bool is_unimolecular(const Network& network) {
  return std::all_of(network.reactions().begin(), network.reactions().end(), [](const Reaction& r) {
    return std::holds_alternative<MassAction>(r.law) && r.order() <= 1;
  });
}

/// lambda(x) = W x + w0 together with the stoichiometric matrix S.
struct LinearPropensityStructure {
  Eigen::MatrixXd W;   // K x d
  Eigen::VectorXd w0;  // K
  IntMatrix S;         // d x K

  std::size_t dimension() const { return static_cast<std::size_t>(W.cols()); }

  Eigen::MatrixXd SW() const { return S.cast<double>() * W; }
  Eigen::VectorXd Sw0() const { return S.cast<double>() * w0; }

  Eigen::VectorXd propensities(std::span<const Count> x) const {
    Eigen::VectorXd xv(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) xv(static_cast<Eigen::Index>(i)) = static_cast<double>(x[i]);
    return W * xv + w0;
  }
};

inline LinearPropensityStructure linearize_propensities(const Network& network) {
  if (!is_unimolecular(network)) {
    throw AnalysisError("unsupported structure: network '" + network.name() +
                        "' is not unimolecular mass-action, so lambda(x) = W x + w0 does not exist");
  }
  const auto d = static_cast<Eigen::Index>(network.dimension());
  const auto K = static_cast<Eigen::Index>(network.reaction_count());
  LinearPropensityStructure out{Eigen::MatrixXd::Zero(K, d), Eigen::VectorXd::Zero(K), stoichiometric_matrix(network)};
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& r = network.reaction(static_cast<std::size_t>(k));
    const double rate = std::get<MassAction>(r.law).rate;
    auto it = std::find(r.reactants.begin(), r.reactants.end(), Count{1});
    if (it == r.reactants.end()) {
      out.w0(k) = rate;
    } else {
      out.W(k, it - r.reactants.begin()) = rate;
    }
  }
  return out;
}

}  // namespace aif

#endif  // AIF_CRN_HPP
