#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heirs/channel/realization.hpp"
#include "heirs/estimation/dsd_mo.hpp"
#include "heirs/estimation/lemma1.hpp"
#include "heirs/estimation/rank_selection.hpp"
#include "test_support.hpp"

using namespace heirs;
using heirs::testing::random_matrix;
using heirs::testing::random_rank;

namespace {

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.n_bs = 8;
  cfg.n_ue = 4;
  cfg.users = 2;
  cfg.n_y = 4;
  cfg.n_z = 4;
  cfg.n_dte_y = 2;
  cfg.paths_g = 2;
  cfg.paths_h = 2;
  cfg.noise_power = 0.0;
  return cfg;
}

struct Scenario {
  SystemConfig cfg;
  ChannelRealization ch;
  Dictionaries dict;
  std::vector<PilotBlock> blocks;
};

Scenario make_scenario(const SystemConfig& cfg, Index t_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ChannelRealization ch = synthesize_channels(cfg, rng);
  CVector omega = heirs::testing::random_unit_modulus(cfg.n_ste(), rng);
  for (Index i = 0; i < omega.size(); ++i) omega(i) = nearest_level(omega(i), phase_set(cfg.phase_bits));
  std::vector<PilotBlock> blocks;
  for (int k = 0; k < cfg.users; ++k) {
    PilotBlock b = generate_pilot_block(cfg, k, t_len, omega, rng);
    observe(b, ch, rng);
    blocks.push_back(std::move(b));
  }
  return {cfg, std::move(ch), build_dictionaries(cfg), std::move(blocks)};
}

DsdTriple random_triple(const SystemConfig& cfg, std::mt19937_64& rng) {
  return {random_matrix(cfg.n_bs, cfg.n_dte(), rng), random_matrix(cfg.n_dte(), cfg.n_ue, rng),
          random_matrix(cfg.n_bs, cfg.n_ue, rng)};
}

// Objective by explicit per-pilot sums and element loops.
double loop_objective(const DsdTriple& x, const DsdData& d, const Dictionaries& dict,
                      const EstimationWeights& w) {
  double f = 0.0;
  for (Index t = 0; t < d.length(); ++t) {
    CVector hs = x.h_dte * d.symbols.col(t);
    CVector z(hs.size());
    for (Index i = 0; i < hs.size(); ++i) z(i) = d.dte_phases(i, t) * hs(i);
    CVector r = d.received.col(t) - x.g_dte * z - x.h_eq * d.symbols.col(t);
    for (Index i = 0; i < r.size(); ++i) f += std::norm(r(i));
  }
  auto l1 = [](const CMatrix& m) {
    double s = 0.0;
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
    return s;
  };
  const CMatrix one_ue = CMatrix::Ones(dict.a_ue.cols(), 1);
  const CMatrix one_bs = CMatrix::Ones(dict.a_bs.cols(), 1);
  f += w.g * l1(dict.a_bs.adjoint() * x.g_dte * dict.a_dte);
  f += w.h * l1(dict.a_dte.adjoint() * x.h_dte * dict.a_ue);
  f += w.row * l1(dict.a_bs.adjoint() * x.h_eq * dict.a_ue * one_ue);
  f += w.col * l1(one_bs.transpose() * dict.a_bs.adjoint() * x.h_eq * dict.a_ue);
  return f;
}

enum class Block { kG, kH, kEq };

// Central-difference check of 2 Re Tr(grad^H D) against the objective.
double gradient_error(const DsdTriple& x, const DsdData& d, const Dictionaries& dict,
                      const EstimationWeights& w, Block which, std::mt19937_64& rng) {
  const GradientWorkspace ws = GradientWorkspace::build(x, dict);
  CMatrix g;
  CMatrix dir;
  switch (which) {
    case Block::kG: g = grad_g_dte(x, d, dict, w, ws); break;
    case Block::kH: g = grad_h_dte(x, d, dict, w, ws); break;
    case Block::kEq: g = grad_h_eq_ste(x, d, dict, w, ws); break;
  }
  dir = random_matrix(g.rows(), g.cols(), rng);
  const double h = 1e-6;
  DsdTriple plus = x, minus = x;
  CMatrix* p = which == Block::kG ? &plus.g_dte : which == Block::kH ? &plus.h_dte : &plus.h_eq;
  CMatrix* m = which == Block::kG ? &minus.g_dte : which == Block::kH ? &minus.h_dte : &minus.h_eq;
  *p += h * dir;
  *m -= h * dir;
  const double fd = (dsd_objective(plus, d, dict, w) - dsd_objective(minus, d, dict, w)) / (2 * h);
  const double an = 2.0 * real_inner(g, dir);
  return std::abs(fd - an) / std::max(1.0, std::abs(an));
}

double nmse(const CMatrix& est, const CMatrix& truth) {
  return (est - truth).squaredNorm() / truth.squaredNorm();
}

}  // namespace

TEST(DsdObjective, MatchesPerPilotLoops) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 12, 1);
  std::mt19937_64 rng(2);
  DsdTriple x = random_triple(cfg, rng);
  DsdData d = DsdData::from_block(s.blocks[0]);
  EstimationWeights w{0.3, 0.2, 0.7, 0.11};
  const double a = dsd_objective(x, d, s.dict, w);
  EXPECT_NEAR(a, loop_objective(x, d, s.dict, w), 1e-10 * a);
}

TEST(DsdObjective, ZeroAtTrueChannelsWithoutNoise) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 12, 3);
  const PilotBlock& b = s.blocks[1];
  DsdTriple x{s.ch.g_dte(), s.ch.h_dte(1), s.ch.h_eq_ste(1, b.ste_phases)};
  EXPECT_LT(dsd_residual(x, DsdData::from_block(b)).norm(), 1e-12 * b.received.norm());
}

TEST(DsdGradient, ResidualTermsMatchFiniteDifferences) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 10, 4);
  std::mt19937_64 rng(5);
  DsdTriple x = random_triple(cfg, rng);
  DsdData d = DsdData::from_block(s.blocks[0]);
  for (Block b : {Block::kG, Block::kH, Block::kEq})
    EXPECT_LT(gradient_error(x, d, s.dict, {}, b, rng), 1e-5);
}

TEST(DsdGradient, WeightedTermsMatchFiniteDifferences) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 10, 6);
  std::mt19937_64 rng(7);
  DsdTriple x = random_triple(cfg, rng);  // generic point, away from |x| = 0 kinks
  DsdData d = DsdData::from_block(s.blocks[0]);
  EstimationWeights w{0.5, 0.4, 0.3, 0.2};
  for (Block b : {Block::kG, Block::kH, Block::kEq})
    EXPECT_LT(gradient_error(x, d, s.dict, w, b, rng), 1e-4);
}

TEST(DsdGradient, ResidualPartVanishesAtTruth) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 10, 8);
  const PilotBlock& b = s.blocks[0];
  DsdTriple x{s.ch.g_dte(), s.ch.h_dte(0), s.ch.h_eq_ste(0, b.ste_phases)};
  DsdData d = DsdData::from_block(b);
  GradientWorkspace ws = GradientWorkspace::build(x, s.dict);
  const double scale = b.received.norm() * b.symbols.norm();
  EXPECT_LT(grad_g_dte(x, d, s.dict, {}, ws).norm(), 1e-10 * scale);
  EXPECT_LT(grad_h_dte(x, d, s.dict, {}, ws).norm(), 1e-10 * scale * s.ch.g().norm());
  EXPECT_LT(grad_h_eq_ste(x, d, s.dict, {}, ws).norm(), 1e-10 * scale);
}

TEST(PhaseSign, UnitModulusOrZero) {
  CMatrix x(1, 3);
  x << Complex(3, 4), Complex(1e-12, 0), Complex(0, -2);
  CMatrix y = phase_sign(x, 1e-8);
  EXPECT_NEAR(std::abs(y(0, 0) - Complex(0.6, 0.8)), 0.0, 1e-15);
  EXPECT_EQ(y(0, 1), Complex(0, 0));
  EXPECT_NEAR(std::abs(y(0, 2) - Complex(0, -1)), 0.0, 1e-15);
}

TEST(CascadedRank, RankDeficientBelowFullTraining) {
  SystemConfig cfg = small_config();
  cfg.n_dte_y = cfg.n_y;
  const Index full = static_cast<Index>(cfg.n_ue) * cfg.n();
  Scenario s = make_scenario(cfg, full - 5, 9);
  LsCascadedResult r = ls_overall_cascaded(s.blocks[0]);
  EXPECT_EQ(r.rank, cfg.n_bs * (full - 5));
  EXPECT_EQ(r.deficiency, cfg.n_bs * 5);
  EXPECT_EQ(r.rank, numerical_rank(measurement_matrix(s.blocks[0], cfg.n_bs)));
}

TEST(CascadedRank, StaticSteCapsRankEvenWithLongTraining) {
  // A fixed STE configuration makes the STE columns of L_k a rank-1 block.
  SystemConfig cfg = small_config();
  const Index n_ue = cfg.n_ue;
  Scenario s = make_scenario(cfg, 4 * n_ue * cfg.n(), 10);
  LsCascadedResult r = ls_overall_cascaded(s.blocks[0]);
  EXPECT_EQ(r.rank, cfg.n_bs * n_ue * (cfg.n_dte() + 1));
  EXPECT_EQ(r.deficiency, cfg.n_bs * n_ue * (cfg.n_ste() - 1));
  EXPECT_GT(r.deficiency, 0);
}

TEST(CascadedRank, ExactRecoveryWithoutSte) {
  SystemConfig cfg = small_config();
  cfg.n_dte_y = cfg.n_y;
  Scenario s = make_scenario(cfg, 2 * cfg.n_ue * cfg.n(), 11);
  LsCascadedResult r = ls_overall_cascaded(s.blocks[0]);
  EXPECT_EQ(r.deficiency, 0);
  EXPECT_LT(nmse(r.h_ca, s.ch.cascaded(0)), 1e-20);
}

TEST(CascadedRank, UnobservedBlockThrows) {
  SystemConfig cfg = small_config();
  std::mt19937_64 rng(1);
  PilotBlock b = generate_pilot_block(cfg, 0, 4, CVector::Ones(cfg.n_ste()), rng);
  EXPECT_THROW(ls_overall_cascaded(b), DimensionError);
}

TEST(RankSelection, AddsMarginAndClamps) {
  EXPECT_EQ(select_rank(2, 1, 8, 8), 3);
  EXPECT_EQ(select_rank(5, 4, 6, 10), 6);
  EXPECT_THROW(select_rank(0, 1, 4, 4), std::invalid_argument);
  EXPECT_THROW(select_rank(1, -1, 4, 4), std::invalid_argument);
}

TEST(RankSelection, InflationStaysWithinEpsilon) {
  std::mt19937_64 rng(12);
  CMatrix h = random_rank(6, 5, 2, rng);
  FixedRankApproximation a = nearest_fixed_rank(h, 4, 1e-9);
  EXPECT_EQ(numerical_rank(a.matrix, 1e-14), 4);
  EXPECT_LT((a.matrix - h).norm(), 1e-9);
  EXPECT_NEAR((a.matrix - h).norm(), a.error, 1e-12);
}

TEST(RankSelection, TruncationErrorIsTail) {
  std::mt19937_64 rng(13);
  CMatrix h = random_matrix(6, 5, rng);
  RVector s = singular_values(h);
  FixedRankApproximation a = nearest_fixed_rank(h, 3);
  EXPECT_EQ(numerical_rank(a.matrix), 3);
  EXPECT_NEAR(a.error, std::sqrt(s(3) * s(3) + s(4) * s(4)), 1e-10);
  EXPECT_NEAR((a.matrix - h).norm(), a.error, 1e-10);
  EXPECT_EQ(nearest_fixed_rank(random_rank(6, 5, 3, rng), 3).error, 0.0);
  EXPECT_THROW(nearest_fixed_rank(h, 6), DimensionError);
}

TEST(DsdMo, ZeroIterationsReturnsInitialization) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 16, 14);
  EstimationOptions opt;
  opt.rank_g = opt.rank_h = 2;
  opt.max_outer = 0;
  UserEstimate e = estimate_user(s.blocks[0], s.dict, opt);
  EXPECT_EQ(e.outer_iterations, 0);
  ASSERT_EQ(e.objective_trace.size(), 1u);
  EXPECT_EQ(numerical_rank(e.g_dte), 2);
  EXPECT_EQ(numerical_rank(e.h_dte), 2);
  // The STE start is the rank-truncated least-squares fit.
  EXPECT_EQ(numerical_rank(e.h_eq_ste), 2);
}

TEST(DsdMo, ObjectiveTraceIsMonotone) {
  SystemConfig cfg = small_config();
  cfg.noise_power = 1e-3 * cfg.pilot_power * cfg.tau_bi() * cfg.tau_iu();
  Scenario s = make_scenario(cfg, 20, 15);
  EstimationOptions opt;
  opt.rank_g = opt.rank_h = 2;
  opt.max_outer = 5;
  UserEstimate e = estimate_user(s.blocks[0], s.dict, opt);
  ASSERT_FALSE(e.aborted) << e.diagnostic;
  for (std::size_t i = 1; i < e.objective_trace.size(); ++i)
    EXPECT_LE(e.objective_trace[i], e.objective_trace[i - 1] * (1 + 1e-12)) << i;
}

TEST(DsdMo, NoiselessRecoveryOfDteCascade) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 40, 16);
  EstimationOptions opt;
  opt.rank_g = opt.rank_h = 2;
  UserEstimate e = estimate_user(s.blocks[0], s.dict, opt);
  ASSERT_FALSE(e.aborted) << e.diagnostic;
  EXPECT_LT(nmse(e.h_ca_dte, s.ch.cascaded_dte(0)), 1e-3);
  EXPECT_LT(nmse(e.h_eq_ste, s.ch.h_eq_ste(0, s.blocks[0].ste_phases)), 1e-3);
}

TEST(DsdMo, ResultDoesNotDependOnUserOrder) {
  SystemConfig cfg = small_config();
  Scenario s = make_scenario(cfg, 16, 17);
  EstimationOptions opt;
  opt.rank_g = opt.rank_h = 2;
  opt.max_outer = 3;
  EstimationResult a = estimate_dsd_mo(s.blocks, s.dict, opt);
  std::vector<PilotBlock> swapped{s.blocks[1], s.blocks[0]};
  EstimationResult b = estimate_dsd_mo(swapped, s.dict, opt);
  EXPECT_EQ((a.users[0].h_ca_dte - b.users[1].h_ca_dte).norm(), 0.0);
  EXPECT_EQ((a.users[1].h_eq_ste - b.users[0].h_eq_ste).norm(), 0.0);
}

TEST(DsdMo, AllDteSurfaceSkipsSteBranch) {
  SystemConfig cfg = small_config();
  cfg.n_dte_y = cfg.n_y;
  Scenario s = make_scenario(cfg, 24, 18);
  EstimationOptions opt;
  opt.rank_g = opt.rank_h = 2;
  opt.max_outer = 4;
  UserEstimate e = estimate_user(s.blocks[0], s.dict, opt);
  EXPECT_EQ(e.h_eq_ste.norm(), 0.0);
  EXPECT_EQ(e.h_ca_dte.cols(), cfg.n());
}

TEST(DsdMo, RejectsUnobservedBlock) {
  SystemConfig cfg = small_config();
  std::mt19937_64 rng(1);
  PilotBlock b = generate_pilot_block(cfg, 0, 4, CVector::Ones(cfg.n_ste()), rng);
  EXPECT_THROW(estimate_user(b, build_dictionaries(cfg), {}), std::invalid_argument);
}
