#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "sequtil/ordinal.hpp"
#include "sequtil/representation.hpp"
#include "support/generators.hpp"
#include "support/models.hpp"

using namespace sequtil;
using namespace sequtil::testing;
using Rational = boost::multiprecision::cpp_rational;

namespace {

// Chain A → B → C with u(⟨AB⟩) = 1, u(⟨BC⟩) = −1, u(⟨AB,BC⟩) = −1.
UtilityTable chain_m2_table() {
  UtilityTable table(2);
  table.set(path({0, 1}), 1);
  table.set(path({1, 2}), -1);
  table.set(path({0, 1, 2}), -1);
  return table;
}

RewardSpec detour_rewards(double hat1, double plain1, double hat3, double plain3) {
  return rewards({{step(s0, s1_hat), hat1},
                  {step(s0, s1), plain1},
                  {step(s1_hat, s2), 0},
                  {step(s1, s2), 0},
                  {step(s2, s3_hat), hat3},
                  {step(s2, s3), plain3}});
}

bool has_kind(const ConsistencyReport& report, WitnessKind kind) {
  for (const auto& w : report.witnesses) {
    if (w.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(ExtractAffine, ExactRoundTripInRationals) {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Cmp cmp = random_cmp(rng, {});
    BasicRewardSpec<Rational> r;
    BasicMultiplierSpec<Rational> m;
    for (const auto& t : cmp.legal_transitions()) {
      r.values.emplace(t, Rational(static_cast<long>(pick(rng, 0, 20)) - 10, 3));
      m.values.emplace(t, Rational(static_cast<long>(pick(rng, 1, 12)), 4));
    }
    const auto table = table_from_armdp(cmp, r, m, 3);
    const auto ex = extract_affine(cmp, table);
    EXPECT_TRUE(ex.report.consistent());
    EXPECT_EQ(ex.rewards, r);
    for (const auto& [t, value] : m.values) {
      if (!ex.multipliers.undetermined.count(t)) {
        EXPECT_EQ(ex.multipliers.at(t), value);
      }
    }
  }
}

TEST(ExtractAffine, FloatingRoundTrip) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Cmp cmp = random_cmp(rng, {});
    const RewardSpec r = random_rewards(rng, cmp);
    const MultiplierSpec m = random_multipliers(rng, cmp);
    const auto ex = extract_affine(cmp, table_from_armdp(cmp, r, m, 4));
    EXPECT_TRUE(ex.report.consistent());
    for (const auto& [t, value] : r.values) EXPECT_NEAR(ex.rewards.at(t), value, 1e-9);
    for (const auto& [t, value] : m.values) {
      if (!ex.multipliers.undetermined.count(t)) {
        EXPECT_NEAR(ex.multipliers.at(t), value, 1e-9);
      }
    }
  }
}

TEST(ExtractAffine, ZeroTableLeavesMultipliersUndetermined) {
  const Cmp cmp = detour();
  const auto ex = extract_affine(cmp, table_from_armdp(cmp, detour_rewards(0, 0, 0, 0), MultiplierSpec::ones(cmp), 3));
  EXPECT_TRUE(ex.report.consistent());
  EXPECT_EQ(ex.multipliers.undetermined.size(), cmp.legal_transitions().size());
  for (const auto& [t, value] : ex.rewards.values) EXPECT_EQ(value, 0);
  for (const auto& [t, value] : ex.multipliers.values) EXPECT_EQ(value, 1);
}

TEST(ExtractAffine, ChainSolvesSlopeTwo) {
  const auto ex = extract_affine(chain(3), chain_m2_table());
  EXPECT_TRUE(ex.report.consistent());
  EXPECT_EQ(ex.rewards.at(step(0, 1)), 1);
  EXPECT_EQ(ex.multipliers.at(step(0, 1)), 2);
  EXPECT_TRUE(ex.multipliers.undetermined.count(step(1, 2)));
}

TEST(ExtractAffine, IncompleteTableNamesTrajectory) {
  UtilityTable table = chain_m2_table();
  UtilityTable missing(2);
  missing.set(path({0, 1}), 1);
  missing.set(path({1, 2}), -1);
  try {
    extract_affine(chain(3), missing);
    FAIL() << "expected IncompleteTable";
  } catch (const IncompleteTable& e) {
    EXPECT_EQ(e.trajectory, path({0, 1, 2}));
    EXPECT_NE(std::string(e.what()).find("A -go-> B -go-> C"), std::string::npos);
  }
  table.set_horizon(1);
  EXPECT_THROW(extract_affine(chain(3), table), std::invalid_argument);
}

TEST(ExtractAffine, NonpositiveSlopeIsAViolation) {
  UtilityTable table = chain_m2_table();
  table.set(path({0, 1, 2}), 2);  // m(AB) = (2 − 1)/(−1) = −1
  const auto ex = extract_affine(chain(3), table);
  ASSERT_FALSE(ex.report.consistent());
  EXPECT_EQ(ex.report.witnesses[0].kind, WitnessKind::nonpositive_multiplier);
  EXPECT_EQ(ex.multipliers.at(step(0, 1)), -1);
}

// Affinely generated detour table with ⟨s0ŝ1s2⟩ ≻ ⟨s0s1s2⟩ and
// ⟨s2ŝ3⟩ ≻ ⟨s2s3⟩: prefixing keeps the second preference.
TEST(Memorylessness, DetourImplications) {
  const Cmp cmp = detour();
  const RewardSpec r = detour_rewards(2, 1, 1, 0.5);
  MultiplierSpec m = MultiplierSpec::ones(cmp);
  m.values[step(s0, s1_hat)] = 0.5;
  m.values[step(s0, s1)] = 3;
  const UtilityTable table = table_from_armdp(cmp, r, m, 3);
  ASSERT_GT(table.at(path({s0, s1_hat, s2})), table.at(path({s0, s1, s2})));
  ASSERT_GT(table.at(path({s2, s3_hat})), table.at(path({s2, s3})));
  EXPECT_TRUE(check_memorylessness(cmp, table).consistent());
  EXPECT_GT(table.at(path({s0, s1_hat, s2, s3_hat})), table.at(path({s0, s1_hat, s2, s3})));
  EXPECT_GT(table.at(path({s0, s1, s2, s3_hat})), table.at(path({s0, s1, s2, s3})));
}

TEST(Memorylessness, OrderingFlipIsWitnessed) {
  const Cmp cmp = detour();
  UtilityTable table = table_from_armdp(cmp, detour_rewards(2, 1, 1, 0.5), MultiplierSpec::ones(cmp), 3);
  // After ŝ1 the agent now prefers s3 over ŝ3.
  table.set(path({s1_hat, s2, s3}), 5);
  const auto report = check_memorylessness(cmp, table);
  ASSERT_FALSE(report.consistent());
  bool found = false;
  for (const auto& w : report.witnesses) {
    if (w.kind != WitnessKind::ordering_flip) continue;
    if (w.trajectories[0] == path({s1_hat, s2}) && w.trajectories[1] == path({s2, s3_hat}) &&
        w.trajectories[2] == path({s2, s3})) {
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Memorylessness, ForwardTablesAreConsistent) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Cmp cmp = random_cmp(rng, {});
    const auto table = table_from_armdp(cmp, random_rewards(rng, cmp), random_multipliers(rng, cmp), 3);
    EXPECT_TRUE(check_memorylessness(cmp, table).consistent());
  }
}

TEST(Additivity, UnitMultiplierTablesPass) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Cmp cmp = random_cmp(rng, {});
    const auto table = table_from_armdp(cmp, random_rewards(rng, cmp), MultiplierSpec::ones(cmp), 4);
    EXPECT_TRUE(check_additivity(cmp, table).consistent());
  }
}

TEST(Additivity, ChainSlopeTwoFails) {
  const auto report = check_additivity(chain(3), chain_m2_table());
  ASSERT_FALSE(report.consistent());
  const auto& w = report.witnesses.front();
  EXPECT_EQ(w.kind, WitnessKind::multiplier_not_one);
  EXPECT_EQ(w.transition, step(0, 1));
  EXPECT_EQ(w.value, 2);
  EXPECT_TRUE(has_kind(report, WitnessKind::exchange_residual));
}

TEST(Additivity, ExchangeScanAloneCatchesNonAdditiveData) {
  // Memoryless-consistent but m ≠ 1 on a determined edge: the exchange
  // identity breaks as well.
  const Cmp cmp = detour();
  MultiplierSpec m = MultiplierSpec::ones(cmp);
  m.values[step(s1, s2)] = 2;
  const auto table = table_from_armdp(cmp, detour_rewards(1, 1, 1, -1), m, 3);
  const auto report = check_additivity(cmp, table);
  EXPECT_TRUE(has_kind(report, WitnessKind::exchange_residual));
}

TEST(Dominance, AdditiveTablesPass) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Cmp cmp = random_cmp(rng, {});
    const auto table = table_from_armdp(cmp, random_rewards(rng, cmp), MultiplierSpec::ones(cmp), 3);
    EXPECT_TRUE(check_dominance(table).consistent());
  }
}

TEST(Dominance, DetourPremisesCompose) {
  const Cmp cmp = detour();
  const auto table = table_from_armdp(cmp, detour_rewards(1, 0.25, 2, -1), MultiplierSpec::ones(cmp), 3);
  ASSERT_GE(table.at(path({s0, s1_hat, s2})), table.at(path({s0, s1, s2})));
  ASSERT_GE(table.at(path({s2, s3_hat})), table.at(path({s2, s3})));
  EXPECT_TRUE(check_dominance(table).consistent());
  EXPECT_GE(table.at(path({s0, s1_hat, s2, s3_hat})), table.at(path({s0, s1, s2, s3})));
}

// The ŝ1 branch wins the first leg but shrinks the future (m = 0.5) while the
// s1 branch doubles it; the composition reverses the premises.
TEST(Dominance, SlopeTwoTableBreaksComposition) {
  const Cmp cmp = detour();
  MultiplierSpec m = MultiplierSpec::ones(cmp);
  m.values[step(s0, s1_hat)] = 0.5;
  m.values[step(s0, s1)] = 2;
  const auto table = table_from_armdp(cmp, detour_rewards(1, 0, 1, 0.8), m, 3);
  const auto report = check_dominance(table);
  ASSERT_FALSE(report.consistent());
  bool found = false;
  for (const auto& w : report.witnesses) {
    found |= w.trajectories == std::vector<Trajectory>{path({s0, s1_hat, s2}), path({s2, s3_hat}),
                                                        path({s0, s1, s2}), path({s2, s3})};
  }
  EXPECT_TRUE(found);
}

TEST(Potential, TriangleRecovered) {
  const Cmp cmp = triangle();
  const auto ex = extract_potential(cmp, rewards({{step(0, 1), 1}, {step(1, 2), 2}, {step(2, 0), -3}}), 0);
  EXPECT_TRUE(ex.report.consistent());
  EXPECT_EQ(ex.potential.values, Eigen::Vector3d(0, 1, 3));
}

TEST(Potential, NonzeroCycleWitnessesClosingEdge) {
  const Cmp cmp = triangle();
  const auto ex = extract_potential(cmp, rewards({{step(0, 1), 1}, {step(1, 2), 2}, {step(2, 0), -2}}), 0);
  ASSERT_EQ(ex.report.witnesses.size(), 1u);
  const auto& w = ex.report.witnesses[0];
  EXPECT_EQ(w.transition, step(2, 0));
  EXPECT_NEAR(w.residual, 1, 1e-12);
  EXPECT_EQ(w.trajectories[0], path({0, 1, 2, 0}));
  EXPECT_EQ(w.trajectories[1], Trajectory(0));
}

TEST(Potential, DetourEqualPaths) {
  const Cmp cmp = detour();
  RewardSpec r = detour_rewards(1, 0.5, 2, -1);
  r.values[step(s1, s2)] = 0.5;  // both routes to s2 sum to 1
  const auto ex = extract_potential(cmp, r, s0);
  EXPECT_TRUE(ex.report.consistent());
  const auto table = table_from_armdp(cmp, r, MultiplierSpec::ones(cmp), 3);
  EXPECT_EQ(table.at(path({s0, s1_hat, s2})), table.at(path({s0, s1, s2})));
  EXPECT_TRUE(check_path_obliviousness(cmp, table, s0).consistent());
}

TEST(Potential, UnreachableStatesListed) {
  try {
    extract_potential(chain(3), rewards({{step(0, 1), 1}, {step(1, 2), 1}}), 1);
    FAIL() << "expected UnreachableStates";
  } catch (const UnreachableStates& e) {
    EXPECT_EQ(e.states, std::vector<StateIndex>{0});
  }
}

TEST(PathObliviousness, PotentialTablesPass) {
  Rng rng(7);
  CmpShape shape;
  shape.strongly_connected = true;
  for (int trial = 0; trial < 10; ++trial) {
    const Cmp cmp = random_cmp(rng, shape);
    const Eigen::VectorXd phi = Eigen::VectorXd::Random(static_cast<Eigen::Index>(cmp.num_states()));
    RewardSpec r;
    for (const auto& t : cmp.legal_transitions()) r.values.emplace(t, phi(t.to) - phi(t.from));
    const auto table = table_from_armdp(cmp, r, MultiplierSpec::ones(cmp), 3);
    EXPECT_TRUE(check_path_obliviousness(cmp, table, 0).consistent());
  }
}

TEST(PathObliviousness, StagesFollowStrength) {
  const Cmp tri = triangle();
  const auto cyclic = table_from_armdp(
      tri, rewards({{step(0, 1), 1}, {step(1, 2), 2}, {step(2, 0), -2}}), MultiplierSpec::ones(tri), 3);
  const auto at_potential = check_path_obliviousness(tri, cyclic, 0);
  EXPECT_FALSE(at_potential.consistent());
  EXPECT_EQ(at_potential.stage, "potential");

  const auto at_additive = check_path_obliviousness(chain(3), chain_m2_table(), 0);
  EXPECT_FALSE(at_additive.consistent());
  EXPECT_EQ(at_additive.stage, "additive");
}

// Passing a stronger check implies passing every weaker one.
TEST(PathObliviousness, StrengthOrderingOnMixedTables) {
  Rng rng(9);
  CmpShape shape;
  shape.strongly_connected = true;
  for (int trial = 0; trial < 30; ++trial) {
    const Cmp cmp = random_cmp(rng, shape);
    MultiplierSpec m = MultiplierSpec::ones(cmp);
    if (trial % 3 == 1) m = random_multipliers(rng, cmp);
    RewardSpec r = random_rewards(rng, cmp);
    if (trial % 3 == 2) {
      const Eigen::VectorXd phi = Eigen::VectorXd::Random(static_cast<Eigen::Index>(cmp.num_states()));
      for (auto& [t, v] : r.values) v = phi(t.to) - phi(t.from);
    }
    UtilityTable table = table_from_armdp(cmp, r, m, 3);
    if (trial % 5 == 0 && !table.entries().empty()) {
      const auto& [tau, u] = *table.entries().rbegin();
      table.set(tau, u + 0.5);
    }
    const bool po = check_path_obliviousness(cmp, table, 0).consistent();
    const bool add = check_additivity(cmp, table).consistent();
    const bool mem = check_memorylessness(cmp, table).consistent();
    EXPECT_TRUE(!po || add);
    EXPECT_TRUE(!add || mem);
  }
}

TEST(CompletePartial, ChainSubtraction) {
  UtilityTable partial(2);
  partial.set(path({0, 1}), 1);
  partial.set(path({0, 1, 2}), 3);
  const auto result = complete_partial(chain(3), partial, 0);
  ASSERT_TRUE(std::holds_alternative<UtilityTable>(result));
  const auto& table = std::get<UtilityTable>(result);
  EXPECT_EQ(table.at(path({1, 2})), 2);
  EXPECT_EQ(table.at(Trajectory(1)), 0);
}

TEST(CompletePartial, DetourConnectors) {
  const Cmp cmp = detour();
  const auto full = table_from_armdp(cmp, detour_rewards(1, 0.25, 2, -1), MultiplierSpec::ones(cmp), 3);
  UtilityTable partial(3);
  for (const auto& [tau, u] : full.entries()) {
    if (tau.start() == s0) partial.set(tau, u);
  }
  const auto ok = complete_partial(cmp, partial, s0);
  ASSERT_TRUE(std::holds_alternative<UtilityTable>(ok));
  EXPECT_EQ(std::get<UtilityTable>(ok).at(path({s2, s3_hat})), 2);

  partial.set(path({s0, s1, s2, s3_hat}), partial.at(path({s0, s1, s2, s3_hat})) + 0.5);
  const auto bad = complete_partial(cmp, partial, s0);
  ASSERT_TRUE(std::holds_alternative<ConsistencyReport>(bad));
  const auto& w = std::get<ConsistencyReport>(bad).witnesses.front();
  EXPECT_EQ(w.kind, WitnessKind::connector_mismatch);
  EXPECT_EQ(w.trajectories[0], path({s2, s3_hat}));
  EXPECT_EQ(w.trajectories[1], path({s0, s1_hat, s2}));
  EXPECT_EQ(w.trajectories[2], path({s0, s1, s2}));
  EXPECT_NEAR(w.residual, 0.5, 1e-12);
}

TEST(CompletePartial, RejectsForeignKeysAndShortHorizons) {
  UtilityTable foreign(2);
  foreign.set(path({1, 2}), 1);
  EXPECT_THROW(complete_partial(chain(3), foreign, 0), std::invalid_argument);
  UtilityTable short_table(1);
  short_table.set(path({0, 1}), 1);
  EXPECT_THROW(complete_partial(chain(3), short_table, 0), std::invalid_argument);
}

TEST(Canonicalize, DividesByLargestReward) {
  const auto c = canonicalize(rewards({{step(0, 1), 2}, {step(1, 2), -4}}));
  EXPECT_EQ(c.rewards.at(step(0, 1)), 0.5);
  EXPECT_EQ(c.rewards.at(step(1, 2)), -1);
  EXPECT_EQ(c.factor, 4);
  const auto zero = canonicalize(rewards({{step(0, 1), 0}}));
  EXPECT_EQ(zero.rewards.at(step(0, 1)), 0);
}

TEST(Canonicalize, ScaledTablesShareCanonicalForm) {
  Rng rng(10);
  const Cmp cmp = random_cmp(rng, {});
  const auto table = table_from_armdp(cmp, random_rewards(rng, cmp), random_multipliers(rng, cmp), 3);
  const auto a = extract_affine(cmp, table);
  const auto b = extract_affine(cmp, table.scaled(7.0));
  const auto ca = canonicalize(a.rewards, &a.multipliers);
  const auto cb = canonicalize(b.rewards, &b.multipliers);
  for (const auto& [t, v] : ca.rewards.values) EXPECT_NEAR(cb.rewards.at(t), v, 1e-12);
  for (const auto& [t, v] : ca.multipliers->values) EXPECT_NEAR(cb.multipliers->at(t), v, 1e-9);
  EXPECT_EQ(ca.multipliers->undetermined, cb.multipliers->undetermined);
}

TEST(Canonicalize, PotentialShiftedToRoot) {
  Potential phi;
  phi.values = Eigen::Vector3d(5, 6, 8);
  phi.root = 0;
  const auto c = canonicalize(rewards({{step(0, 1), 1}, {step(1, 2), 2}}), static_cast<const MultiplierSpec*>(nullptr), &phi);
  EXPECT_EQ(c.potential->values, Eigen::Vector3d(0, 0.5, 1.5));
}

TEST(Ordinal, PairwiseNecessaryConditions) {
  const Trajectory a = path({0, 1}), b = path({0, 1, 2}), c = Trajectory(0);
  EXPECT_TRUE(check_pairwise({{a, Relation::strict, b}, {b, Relation::strict, c}, {a, Relation::strict, c}})
                  .consistent());
  const auto missing = check_pairwise({{a, Relation::strict, b}, {b, Relation::strict, c}});
  EXPECT_TRUE(has_kind(missing, WitnessKind::incomparable));
  const auto cyclic = check_pairwise({{a, Relation::strict, b}, {b, Relation::strict, c}, {c, Relation::strict, a}});
  EXPECT_TRUE(has_kind(cyclic, WitnessKind::intransitive));
  const auto both = check_pairwise({{a, Relation::strict, b}, {b, Relation::indifferent, a}});
  EXPECT_TRUE(has_kind(both, WitnessKind::strict_conflict));
}
