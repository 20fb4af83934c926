#include <gtest/gtest.h>

#include "aif/controller.hpp"
#include "aif/presets.hpp"

using namespace aif;

TEST(Antithetic, GeneExpressionShape) {
  const auto cl = close_loop(gene_expression_network(kGeneParams), preset_controller(1));
  EXPECT_EQ(cl.network.dimension(), 4u);
  EXPECT_EQ(cl.network.reaction_count(), 7u);  // plant has no input reaction; the controller supplies it
  EXPECT_EQ(cl.network.species_names()[cl.z1()], "Z1");
  EXPECT_EQ(cl.network.species_names()[cl.z2()], "Z2");
  EXPECT_FALSE(cl.has_feedback());

  // With the constitutive input present the count is 4 + 4.
  auto reactions = gene_expression_network(kGeneParams).reactions();
  reactions.push_back(detail::reaction(2, {}, {{0, 1}}, MassAction{35.0}));
  const auto cl8 = close_loop(Network({"X1", "X2"}, reactions), preset_controller(1));
  EXPECT_EQ(cl8.network.reaction_count(), 8u);
}

TEST(Antithetic, ControllerPropensities) {
  const auto cl = close_loop(gene_expression_network(kGeneParams), preset_controller(1));
  EXPECT_DOUBLE_EQ(propensity(cl.network.reaction(cl.measurement_reaction()), std::vector<Count>{0, 5, 0, 0}), 10.0);
  EXPECT_DOUBLE_EQ(propensity(cl.network.reaction(cl.comparison_reaction()), std::vector<Count>{0, 0, 1, 1}), 100.0);
  EXPECT_DOUBLE_EQ(propensity(cl.network.reaction(cl.reference_reaction()), std::vector<Count>{0, 0, 0, 0}), 10.0);
  EXPECT_DOUBLE_EQ(propensity(cl.network.reaction(cl.actuation_reaction()), std::vector<Count>{0, 0, 2, 0}), 6.0);
  const auto S = stoichiometric_matrix(cl.network);
  EXPECT_EQ(S(0, static_cast<Eigen::Index>(cl.actuation_reaction())), 1);
  EXPECT_EQ(S(3, static_cast<Eigen::Index>(cl.measurement_reaction())), 1);
  EXPECT_EQ(S(1, static_cast<Eigen::Index>(cl.measurement_reaction())), 0);
}

TEST(Antithetic, RejectsBadConfig) {
  const auto plant = gene_expression_network(kGeneParams);
  auto c = preset_controller(1);
  c.controlled = 5;
  EXPECT_THROW(attach_antithetic(plant, c), StructuralError);
  c = preset_controller(1);
  c.mu = -1.0;
  EXPECT_THROW(attach_antithetic(plant, c), StructuralError);
}

TEST(Feedback, OnOffAndHill) {
  const auto base = attach_antithetic(gene_expression_network(kGeneParams), preset_controller(1));
  const auto zero = attach_feedback(base, FeedbackKind::OnOff, 0.0);
  for (Count x : {0u, 3u, 10u})
    EXPECT_EQ(propensity(zero.network.reaction(*zero.feedback_reaction()), std::vector<Count>{0, x, 0, 0}), 0.0);
  const auto on_off = attach_feedback(base, FeedbackKind::OnOff, 20.0);
  EXPECT_DOUBLE_EQ(propensity(on_off.network.reaction(*on_off.feedback_reaction()), std::vector<Count>{0, 0, 0, 0}), 200.0);
  const auto hill = attach_feedback(base, FeedbackKind::Hill, 35.0);
  EXPECT_DOUBLE_EQ(propensity(hill.network.reaction(*hill.feedback_reaction()), std::vector<Count>{0, 4, 0, 0}), 7.0);
  EXPECT_THROW(attach_feedback(hill, FeedbackKind::Hill, 1.0), StructuralError);
  EXPECT_THROW(attach_feedback(base, FeedbackKind::Hill, -1.0), StructuralError);
}

TEST(NominalInput, Presets) {
  EXPECT_NEAR(nominal_input(linearize_propensities(gene_expression_network(kGeneParams)), 1, 10, 2), 35.0, 1e-12);
  EXPECT_NEAR(nominal_input(linearize_propensities(maturation_network(kMaturationParams)), 2, 10, 2), 40.0 / 3.0, 1e-12);
  const Network bd({"X"}, {detail::reaction(1, {{0, 1}}, {}, MassAction{1.0})});
  EXPECT_NEAR(nominal_input(linearize_propensities(bd), 0, 10, 2), 5.0, 1e-12);
}

TEST(NominalInput, UnreachableSetPointIsAnalysisError) {
  // X2 is not downstream of X1.
  const Network net({"X1", "X2"}, {detail::reaction(2, {{0, 1}}, {}, MassAction{1.0}),
                                   detail::reaction(2, {{1, 1}}, {}, MassAction{1.0})});
  EXPECT_THROW(nominal_input(linearize_propensities(net), 1, 10, 2), AnalysisError);
}

TEST(ErgodicityGuard, Bounds) {
  EXPECT_TRUE(ergodicity_guard(FeedbackKind::OnOff, 3.0, 35.0, 10.0).ok);
  const auto warn = ergodicity_guard(FeedbackKind::OnOff, 4.0, 35.0, 10.0);
  EXPECT_FALSE(warn.ok);
  EXPECT_FALSE(warn.message.empty());
  EXPECT_TRUE(ergodicity_guard(FeedbackKind::Hill, 34.0, 35.0, 10.0).ok);
  EXPECT_FALSE(ergodicity_guard(FeedbackKind::Hill, 36.0, 35.0, 10.0).ok);
  EXPECT_TRUE(ergodicity_guard(FeedbackKind::OnOff, 0.0, 35.0, 10.0).ok);
  EXPECT_TRUE(ergodicity_guard(FeedbackKind::Hill, 0.0, 35.0, 10.0).ok);
}
