#ifndef AIF_PRESETS_HPP
#define AIF_PRESETS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aif/controller.hpp"
#include "aif/crn.hpp"
#include "aif/moment_analysis.hpp"

namespace aif {

namespace detail {

/// Builds a reaction from sparse (species, count) lists.
inline Reaction reaction(std::size_t d, std::vector<std::pair<std::size_t, Count>> in,
                         std::vector<std::pair<std::size_t, Count>> out, RateLaw law) {
  Reaction r{std::vector<Count>(d, 0), std::vector<Count>(d, 0), law};
  for (auto [i, c] : in) r.reactants[i] = c;
  for (auto [i, c] : out) r.products[i] = c;
  return r;
}

}  // namespace detail

/// Open-loop gene expression plant without the transcription input:
/// X1 -> X1 + X2 (k_p), X1 -> 0 (g_r), X2 -> 0 (g_p).
inline Network gene_expression_network(const GeneExpressionParams& p) {
  using detail::reaction;
  return Network({"X1", "X2"},
                 {reaction(2, {{0, 1}}, {{0, 1}, {1, 1}}, MassAction{p.translation}),
                  reaction(2, {{0, 1}}, {}, MassAction{p.mrna_degradation}),
                  reaction(2, {{1, 1}}, {}, MassAction{p.protein_degradation})},
                 "gene", "gene expression: X1 mRNA, X2 protein");
}

/// Gene expression plus X2 -> X3 (k_p') and X3 -> 0 (g_p').
inline Network maturation_network(const MaturationParams& p) {
  using detail::reaction;
  return Network({"X1", "X2", "X3"},
                 {reaction(3, {{0, 1}}, {{0, 1}, {1, 1}}, MassAction{p.translation}),
                  reaction(3, {{0, 1}}, {}, MassAction{p.mrna_degradation}),
                  reaction(3, {{1, 1}}, {}, MassAction{p.protein_degradation}),
                  reaction(3, {{1, 1}}, {{2, 1}}, MassAction{p.maturation}),
                  reaction(3, {{2, 1}}, {}, MassAction{p.mature_degradation})},
                 "maturation", "gene expression with protein maturation: X3 mature protein");
}

struct DimerizationParams {
  double translation = 0.0;          // k_p
  double mrna_degradation = 0.0;     // gamma_r
  double protein_degradation = 0.0;  // gamma_p
  double dimerization = 0.0;         // k_d
  double dissociation = 0.0;         // gamma_d
  double dimer_degradation = 0.0;    // gamma_d'
};

/// Gene expression plus X2 + X2 -> X3 (k_d), X3 -> X2 + X2 (g_d), X3 -> 0 (g_d').
inline Network dimerization_network(const DimerizationParams& p) {
  using detail::reaction;
  return Network({"X1", "X2", "X3"},
                 {reaction(3, {{0, 1}}, {{0, 1}, {1, 1}}, MassAction{p.translation}),
                  reaction(3, {{0, 1}}, {}, MassAction{p.mrna_degradation}),
                  reaction(3, {{1, 1}}, {}, MassAction{p.protein_degradation}),
                  reaction(3, {{1, 2}}, {{2, 1}}, MassAction{p.dimerization}),
                  reaction(3, {{2, 1}}, {{1, 2}}, MassAction{p.dissociation}),
                  reaction(3, {{2, 1}}, {}, MassAction{p.dimer_degradation})},
                 "dimerization", "gene expression with protein homodimerization: X3 dimer");
}

/// Published parameter sets with their antithetic controller defaults (k = 3, no feedback).
struct Preset {
  std::string name;
  Network plant;
  ClosedLoopConfig controller;
  std::optional<GeneExpressionParams> gene;
  std::optional<MaturationParams> maturation;
  std::optional<DimerizationParams> dimerization;
};

inline constexpr GeneExpressionParams kGeneParams{2.0, 2.0, 7.0};
inline constexpr MaturationParams kMaturationParams{1.0, 2.0, 1.0, 3.0, 1.0};
inline constexpr DimerizationParams kDimerizationParams{1.0, 2.0, 1.0, 3.0, 1.0, 1.0};

inline ClosedLoopConfig preset_controller(std::size_t controlled) {
  ClosedLoopConfig c;
  c.mu = 10.0;
  c.theta = 2.0;
  c.eta = 100.0;
  c.k = 3.0;
  c.controlled = controlled;
  c.actuated = 0;
  return c;
}

inline std::vector<std::string> preset_names() { return {"gene", "maturation", "dimerization"}; }

inline std::optional<Preset> find_preset(std::string_view name) {
  if (name == "gene") {
    return Preset{"gene", gene_expression_network(kGeneParams), preset_controller(1), kGeneParams, {}, {}};
  }
  if (name == "maturation") {
    return Preset{"maturation", maturation_network(kMaturationParams), preset_controller(2), {}, kMaturationParams, {}};
  }
  if (name == "dimerization") {
    return Preset{"dimerization", dimerization_network(kDimerizationParams), preset_controller(2), {}, {},
                  kDimerizationParams};
  }
  return std::nullopt;
}

}  // namespace aif

#endif  // AIF_PRESETS_HPP
