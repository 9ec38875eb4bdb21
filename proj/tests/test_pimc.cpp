#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "locsf/pimc.hpp"

using namespace locsf;

namespace {
PIMCParams ideal(std::size_t N, double L, double beta, std::size_t P = 16) {
  PIMCParams p;
  p.domain = Domain::ring(L, 16);
  p.N = N;
  p.beta = beta;
  p.P = P;
  p.staging_length = P / 4;
  p.swap_length = P / 2;
  return p;
}

Worldlines synthetic(const Domain& dom, std::size_t N, std::size_t P, std::mt19937_64& rng) {
  auto w = empty_worldlines(dom, N, P);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<long> img(-2, 2);
  for (auto& x : w.x) x = {dom.length(0) * u(rng), dom.dim() > 1 ? dom.length(1) * u(rng) : 0.0};
  std::shuffle(w.succ.begin(), w.succ.end(), rng);
  for (auto& i : w.image) i = {img(rng), dom.dim() > 1 ? img(rng) : 0};
  return w;
}

// Heat-bath probability of reaching image n (per axis) of target t from A over k links, by direct summation.
double image_prob(double A, double t, long n, double L, double m, double s) {
  double z = 0.0;
  for (long q = -50; q <= 50; ++q) z += std::exp(-m * std::pow(t + q * L - A, 2) / (2 * s));
  return std::exp(-m * std::pow(t + n * L - A, 2) / (2 * s)) / z;
}
}  // namespace

TEST(InitWorldlines, SingleStraightPath) {
  const auto p = ideal(1, 4.0, 1.0);
  const auto w = init_worldlines(p, 3);
  EXPECT_EQ(w.succ[0], 0u);
  for (std::size_t t = 1; t < p.P; ++t) EXPECT_EQ(w.at(0, t)[0], w.at(0, 0)[0]);
}

TEST(InitWorldlines, DeterministicAndInside) {
  const auto p = ideal(3, 4.0, 1.0);
  const auto a = init_worldlines(p, 9), b = init_worldlines(p, 9);
  EXPECT_EQ(a.x, b.x);
  for (const auto& x : a.x) {
    EXPECT_GE(x[0], -2.0);
    EXPECT_LT(x[0], 2.0);
  }
}

TEST(WindingVector, Examples) {
  const Domain dom = Domain::ring(4.0, 16);
  const auto vf = VelocityField::constant(0.3);
  auto w = empty_worldlines(dom, 2, 8);
  EXPECT_EQ(winding_vector(w, vf, 0), 0.0);
  w.image[0] = {1, 0};
  EXPECT_NEAR(winding_vector(w, vf, 0), 0.3 * 4.0, 1e-14);
  w.image[1] = {-1, 0};
  EXPECT_NEAR(winding_vector(w, vf, 0), 0.0, 1e-14);
}

TEST(SwapMove, DetailedBalanceIdentity) {
  // P = 8 with one-link reconnection windows: the proposal is fully described by (a, c, images)
  auto p = ideal(3, 3.0, 0.8, 8);
  p.swap_length = 1;
  const auto m = ActionModel::from(p);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto w0 = synthetic(p.domain, 3, 8, rng);
    PimcChain ch(p, w0, std::mt19937_64(trial));
    const std::size_t a = trial % 3;
    const auto choice = ch.propose_swap(a);
    if (choice.c == a) continue;
    const auto w1 = ch.apply_swap(choice);
    const std::size_t b = choice.c, k = 1, t0 = 7;
    const double s = k * m.tau, L = 3.0;
    auto q = [&](const Worldlines& w, std::size_t c, long na, long nb) {
      // pick c for a, then image na, then image nb for b towards succ(a)
      double za = 0.0;
      for (std::size_t d = 0; d < 3; ++d)
        for (long n = -50; n <= 50; ++n)
          za += std::exp(-m.mass * std::pow(w.at(w.succ[d], 0)[0] + n * L - w.at(a, t0)[0], 2) / (2 * s));
      double pc = 0.0;
      for (long n = -50; n <= 50; ++n)
        pc += std::exp(-m.mass * std::pow(w.at(w.succ[c], 0)[0] + n * L - w.at(a, t0)[0], 2) / (2 * s));
      return (pc / za) * image_prob(w.at(a, t0)[0], w.at(w.succ[c], 0)[0], na, L, m.mass, s) *
             image_prob(w.at(c, t0)[0], w.at(w.succ[a], 0)[0], nb, L, m.mass, s);
    };
    const double fwd = q(w0, b, choice.image_a[0], choice.image_b[0]);
    const double rev = q(w1, b, w0.image[a][0], w0.image[b][0]);
    const double ratio = std::exp(m.action(w0) - m.action(w1)) * rev / fwd;
    EXPECT_NEAR(std::exp(choice.log_accept_kinetic) / ratio, 1.0, 1e-12);
  }
}

TEST(MoveInvariants, TimeRotationPreservesAction) {
  auto p = ideal(3, 3.0, 1.0, 8);
  std::mt19937_64 rng(1);
  const auto w0 = synthetic(p.domain, 3, 8, rng);
  PimcChain ch(p, w0, std::mt19937_64(2));
  const auto m = ActionModel::from(p);
  ch.rotate_time();
  EXPECT_NEAR(m.action(ch.config()), m.action(w0), 1e-9 * m.action(w0));
  EXPECT_EQ(total_winding(ch.config(), 0), total_winding(w0, 0));
}

TEST(MoveInvariants, SweepsKeepPermutationValid) {
  auto p = ideal(4, 4.0, 2.0);
  p.potential = PairPotential::gaussian_repulsive;
  p.g = 1.0;
  p.width = 0.4;
  PimcChain ch(p, chain_rng(7, 0));
  const auto m = ActionModel::from(p);
  for (int s = 0; s < 200; ++s) {
    ch.sweep();
    ASSERT_TRUE(worldlines_valid(ch.config()));
  }
  EXPECT_TRUE(std::isfinite(m.action(ch.config())));
  const auto& st = ch.stats();
  EXPECT_GT(st.staging_accepted, 0u);
  EXPECT_LT(st.staging_accepted, st.staging_tried);
  EXPECT_GT(st.translate_tried, 0u);
}

TEST(FreeParticle, LinkVarianceIsTauOverMass) {
  auto p = ideal(1, 10.0, 1.0, 16);
  p.mass = 0.7;
  PimcChain ch(p, chain_rng(11, 0));
  for (int s = 0; s < 200; ++s) ch.sweep();
  const int sweeps = 20000, nb = 40;
  std::vector<double> blocks(nb, 0.0);
  for (int s = 0; s < sweeps; ++s) {
    ch.sweep();
    double acc = 0.0;
    for (std::size_t t = 0; t < p.P; ++t) {
      const double d = ch.config().bead(0, t + 1)[0] - ch.config().bead(0, t)[0];
      acc += d * d;
    }
    blocks[s / (sweeps / nb)] += acc / p.P / (sweeps / nb);
  }
  double mean = 0.0, m2 = 0.0;
  for (double b : blocks) {
    mean += b / nb;
    m2 += b * b / nb;
  }
  const double err = std::sqrt((m2 - mean * mean) / (nb - 1));
  // P iid links of variance tau/m conditioned on a zero sum (winding sectors are e^{-35} here)
  EXPECT_NEAR(mean, p.tau() / p.mass * (1.0 - 1.0 / p.P), 3 * err);
  EXPECT_LT(err / mean, 0.02);
}

TEST(IdealGasOracle, Limits) {
  EXPECT_LT(ideal_gas_oracle(2, 10.0, 0.01, 1.0), 0.01);
  EXPECT_NEAR(ideal_gas_oracle(2, 4.0, 50.0, 1.0), 1.0, 1e-3);
  EXPECT_THROW(ideal_gas_oracle(7, 4.0, 1.0, 1.0), Error);
}

TEST(IdealGasOracle, SingleParticleThetaDual) {
  // <w^2> = 1/(2 alpha) - sum n^2 (pi^2/alpha^2) e^{-pi^2 n^2/alpha} / sum e^{-pi^2 n^2/alpha}, alpha = m L^2 / (2 beta)
  for (double beta : {0.5, 2.0, 8.0}) {
    const double m = 1.3, L = 2.5, alpha = m * L * L / (2 * beta);
    double num = 0.0, den = 0.0;
    for (long n = -40; n <= 40; ++n) {
      const double e = std::exp(-std::numbers::pi * std::numbers::pi * n * n / alpha);
      num += n * n * std::numbers::pi * std::numbers::pi / (alpha * alpha) * e;
      den += e;
    }
    const double w2 = 1.0 / (2 * alpha) - num / den;
    EXPECT_NEAR(ideal_gas_oracle(1, L, beta, m), m * L * L * w2 / beta, 1e-12);
  }
}

TEST(HighTemperature, PermutationsSuppressed) {
  auto p = ideal(2, 10.0, 0.05, 16);
  p.sweeps = 4000;
  p.thermalization = 200;
  const auto r = run_pimc(p, VelocityField::constant(0.1), 1);
  EXPECT_LT(MoveStats::rate(r.stats.swap_exchanges, r.stats.swap_tried), 0.01);
  EXPECT_LT(ideal_gas_oracle(2, 10.0, 0.05, 1.0), 1e-10);
  EXPECT_LT(superfluid_fraction_constant_v(r.acc).value, 1e-10);
}

TEST(Accumulator, DistinguishableHasNoWindingTerm) {
  auto p = ideal(3, 4.0, 1.0);
  p.cycle_length = 1;
  p.sweeps = 640;
  p.thermalization = 10;
  const double m = p.mass;
  const auto vf = VelocityField::linear(0.4);
  const auto r = run_pimc(p, vf, 1);
  for (std::size_t b = 0; b < r.acc.bin_count(); ++b) {
    EXPECT_EQ(r.acc.total().term2[b], 0.0);
    const double rho = r.acc.total().density[b];
    EXPECT_NEAR(r.acc.total().term1[b], 2 * m * rho, 1e-9 * std::max(1.0, rho));  // v = c x: d(v x)/v = 2
  }
}

TEST(Accumulator, ConstantVelocityTermTwoAggregates) {
  const Domain dom = Domain::ring(4.0, 16);
  const double m = 1.2, beta = 0.7;
  const auto vf = VelocityField::constant(0.37);
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const auto w = synthetic(dom, 4, 8, rng);
    EstimatorAccumulator acc(dom, 16, 1, m, beta, 4);
    accumulate_local_normal(w, vf, acc);
    double s = 0.0;
    for (auto t : acc.total().term2) s += t * acc.bin_volume();
    const double expected = -m * m * acc.total().w2[0] / beta;
    EXPECT_NEAR(s, expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Accumulator, SuperfluidFractionToyEnsemble) {
  const Domain dom = Domain::ring(3.0, 16);
  const double m = 1.5, beta = 0.5;
  EstimatorAccumulator acc(dom, 4, 2, m, beta, 1);
  auto w = empty_worldlines(dom, 1, 8);
  for (int n = 0; n < 8; ++n) {
    w.image[0] = {n % 2 ? 1 : -1, 0};
    accumulate_local_normal(w, VelocityField::constant(0.2), acc);
  }
  EXPECT_NEAR(superfluid_fraction_constant_v(acc).value, m * 9.0 / beta, 1e-12);

  EstimatorAccumulator zero(dom, 4, 2, m, beta, 1);
  w.image[0] = {0, 0};
  for (int n = 0; n < 4; ++n) accumulate_local_normal(w, VelocityField::constant(0.2), zero);
  EXPECT_EQ(superfluid_fraction_constant_v(zero).value, 0.0);

  EstimatorAccumulator few(dom, 4, 10, m, beta, 1);
  accumulate_local_normal(w, VelocityField::constant(0.2), few);
  EXPECT_THROW(superfluid_fraction_constant_v(few), Error);
}

TEST(AccumulatorProperty, MergeMatchesSerial) {
  const Domain dom = Domain::ring(4.0, 16);
  const auto vf = VelocityField::constant(0.2);
  std::mt19937_64 rng(8);
  std::vector<Worldlines> cfg;
  for (int n = 0; n < 12; ++n) cfg.push_back(synthetic(dom, 3, 8, rng));
  EstimatorAccumulator serial(dom, 8, 3, 1.0, 1.0, 3), a(dom, 8, 3, 1.0, 1.0, 3), b(dom, 8, 3, 1.0, 1.0, 3);
  for (int n = 0; n < 12; ++n) {
    accumulate_local_normal(cfg[n], vf, serial);
    accumulate_local_normal(cfg[n], vf, n < 6 ? a : b);
  }
  a.merge(b);
  EXPECT_EQ(a.blocks().size(), serial.blocks().size());
  EXPECT_NEAR(superfluid_fraction_constant_v(a).value, superfluid_fraction_constant_v(serial).value, 1e-12);
  EXPECT_NEAR(superfluid_fraction_constant_v(a).stderr_, superfluid_fraction_constant_v(serial).stderr_, 1e-12);
}

TEST(Pimc, SameSeedSameResult) {
  auto p = ideal(2, 4.0, 1.0);
  p.sweeps = 300;
  p.thermalization = 20;
  const auto a = run_pimc(p, VelocityField::constant(0.1), 2);
  const auto b = run_pimc(p, VelocityField::constant(0.1), 2, 2);
  EXPECT_EQ(a.acc.total().term2, b.acc.total().term2);
  EXPECT_EQ(a.acc.total().w2[0], b.acc.total().w2[0]);
}

TEST(Pimc, IdealGasMatchesOracleAndIsUniform) {
  auto p = ideal(2, 4.0, 1.0);
  p.sweeps = 20000;
  p.thermalization = 500;
  p.bins = 4;
  const auto vf = VelocityField::constant(0.1);
  const auto r = run_pimc(p, vf, 4, 4);
  const auto fs = superfluid_fraction_constant_v(r.acc);
  const double exact = ideal_gas_oracle(2, 4.0, 1.0, 1.0);
  EXPECT_NEAR(fs.value, exact, 3 * fs.stderr_);
  const double rho_n = (2.0 / 4.0) * (1.0 - exact);
  for (std::size_t b = 0; b < r.acc.bin_count(); ++b) {
    const auto e = local_normal_estimate(r.acc, b);
    EXPECT_NEAR(e.value, rho_n, 4 * e.stderr_) << "bin " << b;
  }
}
