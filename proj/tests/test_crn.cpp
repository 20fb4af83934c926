#include <random>

#include <gtest/gtest.h>

#include "aif/crn.hpp"
#include "aif/model_json.hpp"
#include "aif/presets.hpp"

using namespace aif;

namespace {

Reaction rx(std::size_t d, std::vector<std::pair<std::size_t, Count>> in, std::vector<std::pair<std::size_t, Count>> out,
            RateLaw law) {
  return detail::reaction(d, std::move(in), std::move(out), law);
}

}  // namespace

TEST(Propensity, MassActionFirstOrder) {
  const auto r = rx(1, {{0, 1}}, {}, MassAction{2.0});
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{4}), 8.0);
}

TEST(Propensity, MassActionHeterodimer) {
  const auto r = rx(2, {{0, 1}, {1, 1}}, {}, MassAction{100.0});
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{3, 2}), 600.0);
}

TEST(Propensity, MassActionHomodimerUsesFallingFactorial) {
  const auto r = rx(2, {{0, 2}}, {{1, 1}}, MassAction{3.0});
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{4, 0}), 36.0);
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{0, 0}), 0.0);
}

TEST(Propensity, OnOffClipsAtSetPoint) {
  const auto r = rx(1, {}, {{0, 1}}, OnOffProportional{1.0, 10.0, 2.0, 0});
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{3}), 4.0);
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{6}), 0.0);
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{5}), 0.0);
}

TEST(Propensity, Hill) {
  const auto r = rx(1, {}, {{0, 1}}, Hill{8.0, 0});
  EXPECT_DOUBLE_EQ(propensity(r, std::vector<Count>{3}), 2.0);
}

TEST(Propensity, DimensionMismatchIsStructuralError) {
  const auto r = rx(2, {{0, 1}}, {}, MassAction{1.0});
  EXPECT_THROW(propensity(r, std::vector<Count>{1}), StructuralError);
}

TEST(Propensity, NeverNegativeOnRandomStates) {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<Count> u(0, 50);
  const auto net = dimerization_network(kDimerizationParams);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Count> x{u(g), u(g), u(g)};
    for (const auto& r : net.reactions()) EXPECT_GE(propensity(r, x), 0.0);
  }
}

TEST(Network, RejectsNegativeAndNonFiniteRates) {
  EXPECT_THROW(Network({"X"}, {rx(1, {{0, 1}}, {}, MassAction{-1.0})}), StructuralError);
  EXPECT_THROW(Network({"X"}, {rx(1, {{0, 1}}, {}, MassAction{NAN})}), StructuralError);
  EXPECT_THROW(Network({"X", "X"}, {rx(2, {{0, 1}}, {}, MassAction{1.0})}), StructuralError);
}

TEST(Stoichiometry, Columns) {
  const Network net({"X1", "X2"}, {rx(2, {}, {{0, 1}}, MassAction{1.0}), rx(2, {{0, 1}}, {{1, 1}}, MassAction{1.0}),
                                   rx(2, {{0, 1}}, {{0, 1}, {1, 1}}, MassAction{1.0})});
  const auto S = stoichiometric_matrix(net);
  EXPECT_EQ(S(0, 0), 1);
  EXPECT_EQ(S(1, 0), 0);
  EXPECT_EQ(S(0, 1), -1);
  EXPECT_EQ(S(1, 1), 1);
  EXPECT_EQ(S(0, 2), 0);
  EXPECT_EQ(S(1, 2), 1);
}

TEST(Unimolecular, Presets) {
  EXPECT_TRUE(is_unimolecular(gene_expression_network(kGeneParams)));
  EXPECT_TRUE(is_unimolecular(maturation_network(kMaturationParams)));
  EXPECT_FALSE(is_unimolecular(dimerization_network(kDimerizationParams)));
  EXPECT_FALSE(is_unimolecular(Network({"X"}, {rx(1, {}, {{0, 1}}, Hill{1.0, 0})})));
}

TEST(Linearize, SingleReactions) {
  auto birth = linearize_propensities(Network({"X1", "X2"}, {rx(2, {}, {{0, 1}}, MassAction{5.0})}));
  EXPECT_EQ(birth.W.row(0).norm(), 0.0);
  EXPECT_EQ(birth.w0(0), 5.0);
  auto death = linearize_propensities(Network({"X1", "X2"}, {rx(2, {{0, 1}}, {}, MassAction{2.0})}));
  EXPECT_EQ(death.W(0, 0), 2.0);
  EXPECT_EQ(death.W(0, 1), 0.0);
  EXPECT_EQ(death.w0(0), 0.0);
}

TEST(Linearize, ReproducesPropensitiesOnRandomStates) {
  auto reactions = gene_expression_network(kGeneParams).reactions();
  reactions.push_back(rx(2, {}, {{0, 1}}, MassAction{35.0}));
  const Network net({"X1", "X2"}, reactions);
  const auto lin = linearize_propensities(net);
  std::mt19937_64 g(11);
  std::uniform_int_distribution<Count> u(0, 1000);
  for (int i = 0; i < 100; ++i) {
    std::vector<Count> x{u(g), u(g)};
    const auto lam = lin.propensities(x);
    for (std::size_t k = 0; k < net.reaction_count(); ++k) {
      EXPECT_EQ(lam(static_cast<Eigen::Index>(k)), propensity(net.reaction(k), x));
    }
  }
}

TEST(Linearize, RefusesBimolecular) {
  EXPECT_THROW(linearize_propensities(dimerization_network(kDimerizationParams)), AnalysisError);
}

TEST(ModelJson, RoundTrip) {
  for (const auto& name : preset_names()) {
    const auto net = find_preset(name)->plant;
    const auto j = network_to_json(net);
    EXPECT_EQ(network_to_json(network_from_json(j)), j) << name;
  }
  const Network fb({"X"}, {rx(1, {}, {{0, 1}}, OnOffProportional{2.0, 10.0, 2.0, 0}), rx(1, {}, {{0, 1}}, Hill{3.0, 0})});
  EXPECT_EQ(network_to_json(network_from_json(network_to_json(fb))), network_to_json(fb));
}

TEST(ModelJson, ErrorsCarryPaths) {
  auto j = nlohmann::json::parse(R"({"species":["X"],"reactions":[{"reactants":{"Y":1},"products":{},
                                      "rate":{"kind":"mass_action","value":1}}]})");
  try {
    network_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/reactions/0"), std::string::npos) << e.what();
  }
  j["reactions"][0]["reactants"] = {{"X", 1}};
  j["reactions"][0]["rate"]["kind"] = "bogus";
  EXPECT_THROW(network_from_json(j), ConfigError);
}
