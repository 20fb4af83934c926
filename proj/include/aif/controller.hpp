#ifndef AIF_CONTROLLER_HPP
#define AIF_CONTROLLER_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aif/crn.hpp"
#include "aif/errors.hpp"

namespace aif {

enum class FeedbackKind { None, OnOff, Hill };

inline const char* to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::None: return "none";
    case FeedbackKind::OnOff: return "on_off";
    case FeedbackKind::Hill: return "hill";
  }
  return "none";
}

struct Feedback {
  FeedbackKind kind = FeedbackKind::None;
  double gain = 0.0;  // K_p
};

/// Antithetic controller parameters. Indices refer to the open-loop network.
struct ClosedLoopConfig {
  double mu = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  double k = 0.0;
  Feedback feedback;
  std::size_t controlled = 0;
  std::size_t actuated = 0;

  double set_point() const { return mu / theta; }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) throw StructuralError(std::string(what) + " must be positive and finite");
    };
    positive(mu, "mu");
    positive(theta, "theta");
    positive(eta, "eta");
    positive(k, "k");
    if (!(feedback.gain >= 0.0) || !std::isfinite(feedback.gain)) throw StructuralError("K_p must be nonnegative");
  }
};

/// Open-loop species followed by Z1 (actuating) and Z2 (sensing). Reactions:
/// open-loop reactions, then reference, measurement, comparison, actuation,
/// and optionally one feedback reaction.
struct ClosedLoopNetwork {
  Network network;
  ClosedLoopConfig config;
  std::size_t open_loop_dim = 0;
  std::size_t open_loop_reactions = 0;

  std::size_t z1() const { return open_loop_dim; }
  std::size_t z2() const { return open_loop_dim + 1; }
  std::size_t reference_reaction() const { return open_loop_reactions; }
  std::size_t measurement_reaction() const { return open_loop_reactions + 1; }
  std::size_t comparison_reaction() const { return open_loop_reactions + 2; }
  std::size_t actuation_reaction() const { return open_loop_reactions + 3; }
  bool has_feedback() const { return network.reaction_count() > open_loop_reactions + 4; }
  std::optional<std::size_t> feedback_reaction() const {
    if (!has_feedback()) return std::nullopt;
    return open_loop_reactions + 4;
  }
};

namespace detail {

inline std::vector<Reaction> widen(const std::vector<Reaction>& reactions, std::size_t extra) {
  std::vector<Reaction> out = reactions;
  for (auto& r : out) {
    r.reactants.resize(r.reactants.size() + extra, 0);
    r.products.resize(r.products.size() + extra, 0);
  }
  return out;
}

inline RateLaw feedback_law(const ClosedLoopConfig& config, FeedbackKind kind, double gain) {
  if (kind == FeedbackKind::OnOff) return OnOffProportional{gain, config.mu, config.theta, config.controlled};
  return Hill{gain, config.controlled};
}

}  // namespace detail

/// Appends Z1, Z2 and the reference, measurement, comparison and actuation
/// reactions. Any feedback requested in `config` is ignored here; see
/// attach_feedback / close_loop.
inline ClosedLoopNetwork attach_antithetic(const Network& network, ClosedLoopConfig config) {
  config.validate();
  const std::size_t d = network.dimension();
  if (config.controlled >= d) throw StructuralError("controlled species index out of range");
  if (config.actuated >= d) throw StructuralError("actuated species index out of range");
  for (const char* z : {"Z1", "Z2"}) {
    if (network.find(z)) throw StructuralError(std::string("open-loop network already has a species named ") + z);
  }

  auto species = network.species_names();
  species.push_back("Z1");
  species.push_back("Z2");
  const std::size_t n = d + 2;
  const std::size_t z1 = d;
  const std::size_t z2 = d + 1;
  auto reactions = detail::widen(network.reactions(), 2);

  auto make = [n](std::vector<std::pair<std::size_t, Count>> in, std::vector<std::pair<std::size_t, Count>> out,
                  double rate) {
    Reaction r{std::vector<Count>(n, 0), std::vector<Count>(n, 0), MassAction{rate}};
    for (auto [i, c] : in) r.reactants[i] = c;
    for (auto [i, c] : out) r.products[i] = c;
    return r;
  };
  const std::size_t l = config.controlled;
  const std::size_t a = config.actuated;
  reactions.push_back(make({}, {{z1, 1}}, config.mu));                          // reference
  reactions.push_back(make({{l, 1}}, {{l, 1}, {z2, 1}}, config.theta));         // measurement
  reactions.push_back(make({{z1, 1}, {z2, 1}}, {}, config.eta));                // comparison
  reactions.push_back(make({{z1, 1}}, {{z1, 1}, {a, 1}}, config.k));            // actuation

  config.feedback = {};
  std::string name = network.name().empty() ? std::string("closed-loop") : network.name() + "+antithetic";
  return ClosedLoopNetwork{Network(std::move(species), std::move(reactions), std::move(name), network.description()),
                           config, d, network.reaction_count()};
}

/// Adds the reaction 0 -> X_actuated with propensity F(X_controlled).
inline ClosedLoopNetwork attach_feedback(const ClosedLoopNetwork& closed, FeedbackKind kind, double gain) {
  if (closed.has_feedback()) throw StructuralError("a feedback reaction is already attached");
  if (kind == FeedbackKind::None) throw StructuralError("attach_feedback requires on_off or hill");
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw StructuralError("K_p must be nonnegative");

  const std::size_t n = closed.network.dimension();
  auto reactions = closed.network.reactions();
  Reaction r{std::vector<Count>(n, 0), std::vector<Count>(n, 0), detail::feedback_law(closed.config, kind, gain)};
  r.products[closed.config.actuated] = 1;
  reactions.push_back(std::move(r));

  ClosedLoopNetwork out{Network(closed.network.species_names(), std::move(reactions), closed.network.name(),
                                closed.network.description()),
                        closed.config, closed.open_loop_dim, closed.open_loop_reactions};
  out.config.feedback = {kind, gain};
  return out;
}

/// attach_antithetic followed by attach_feedback when config.feedback asks for one.
inline ClosedLoopNetwork close_loop(const Network& network, const ClosedLoopConfig& config) {
  auto closed = attach_antithetic(network, config);
  if (config.feedback.kind != FeedbackKind::None) {
    closed = attach_feedback(closed, config.feedback.kind, config.feedback.gain);
  }
  return closed;
}

/// Constant production rate of the actuated species for which the open-loop
/// stationary mean of X_controlled equals mu/theta:
///   c = -(mu/theta + e_l^T (SW)^-1 S w0) / (e_l^T (SW)^-1 e_a)
inline double nominal_input(const LinearPropensityStructure& lin, std::size_t controlled, double mu, double theta,
                            std::size_t actuated = 0) {
  const Eigen::Index d = static_cast<Eigen::Index>(lin.dimension());
  if (controlled >= lin.dimension() || actuated >= lin.dimension()) throw StructuralError("species index out of range");
  const Eigen::MatrixXd SW = lin.SW();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(SW);
  if (!lu.isInvertible()) throw AnalysisError("open loop has no unique stationary mean (SW is singular)");
  const Eigen::VectorXd ea = Eigen::VectorXd::Unit(d, static_cast<Eigen::Index>(actuated));
  const Eigen::VectorXd gain_path = lu.solve(ea);
  const Eigen::VectorXd basal = lu.solve(lin.Sw0());
  const double g = gain_path(static_cast<Eigen::Index>(controlled));
  if (g == 0.0) throw AnalysisError("actuated species does not reach the controlled species");
  return -(mu / theta + basal(static_cast<Eigen::Index>(controlled))) / g;
}

struct GuardResult {
  bool ok = true;
  std::string message;
};

/// Conservative ergodicity condition: K_p < u*/mu (on/off), K_p < u* (Hill).
/// A failed guard is a warning; simulation remains allowed.
inline GuardResult ergodicity_guard(FeedbackKind kind, double gain, double u_star, double mu) {
  if (kind == FeedbackKind::None || gain == 0.0) return {};
  const double bound = kind == FeedbackKind::OnOff ? u_star / mu : u_star;
  if (gain < bound) return {};
  std::ostringstream os;
  os << "K_p=" << gain << " violates the sufficient ergodicity condition K_p < " << bound << " ("
     << (kind == FeedbackKind::OnOff ? "u*/mu" : "u*") << "); the closed loop may lose ergodicity";
  return {false, os.str()};
}

}  // namespace aif

#endif  // AIF_CONTROLLER_HPP
