#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "locsf/fock_oracle.hpp"
#include "locsf/rtqc.hpp"
#include "support.hpp"

using namespace locsf;
using locsf::testing::random_state;

namespace {
const Domain kRing = Domain::ring(1.0, 6);

double multinomial_entropy(std::size_t N, std::size_t M) {
  double h = 0.0;
  for (const auto& occ : occupation_patterns(M, N)) {
    double p = std::tgamma(N + 1.0);
    for (auto k : occ) p /= std::tgamma(k + 1.0);
    p /= std::pow(double(M), double(N));
    h -= p * std::log2(p);
  }
  return h;
}

void expect_density_matrix(const MarginalState& s) {
  const CMatrix& r = s.matrix;
  EXPECT_LT((r - r.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}
}  // namespace

TEST(RegionBasis, Dimensions) {
  EXPECT_EQ(RegionBasis({0, 1, 2}, 2, BasisMode::tuple).dim(), 9u);
  EXPECT_EQ(RegionBasis({0, 1, 2}, 2, BasisMode::occupation).dim(), 6u);
  EXPECT_THROW(RegionBasis({0, 0}, 1, BasisMode::tuple), Error);
}

TEST(RegionBasis, EmbeddingIsIsometry) {
  const RegionBasis B({0, 2, 3, 5}, 3, BasisMode::tuple);
  const CMatrix E = B.embedding();
  EXPECT_LT((E.adjoint() * E - CMatrix::Identity(E.cols(), E.cols())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MarginalState, FullySupportedIsPure) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.3), 1.0, {1, 2, 3}, 2);
  for (auto mode : {BasisMode::tuple, BasisMode::occupation}) {
    const auto r = coherence(marginal_state(st, {1, 2, 3}, 2, mode));
    EXPECT_NEAR(r.entropy, 0.0, 1e-10);
  }
}

TEST(MarginalState, ProductOfRegionsGivesFactor) {
  CVector u = CVector::Zero(6), w = CVector::Zero(6);
  u << cplx(0.6, 0.0), cplx(0.0, 0.8), 0, 0, 0, 0;
  w << 0, 0, 0, cplx(0.5, 0.5), 0, cplx(0.5, -0.5);
  const auto st = build_fragmented(make_fock_space(kRing, 2), {u, w}, {1, 1});
  const auto s = marginal_state(st, {0, 1}, 1, BasisMode::tuple);
  const CVector f = u.head(2);
  EXPECT_LT((s.matrix - f * f.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MarginalStateProperty, RandomStatesAreDensityMatrices) {
  const auto sp = make_fock_space(kRing, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto st = random_state(sp, seed);
    for (std::size_t n = 0; n <= 3; ++n)
      for (auto mode : {BasisMode::tuple, BasisMode::occupation}) expect_density_matrix(marginal_state(st, {0, 2, 3}, n, mode));
  }
}

TEST(MarginalState, ZeroProbabilitySectorFails) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.0), 1.0, {0, 1}, 2);
  EXPECT_THROW(marginal_state(st, {3, 4}, 1), Error);
}

TEST(MarginalState, EnsembleIsWeightedMixture) {
  const auto sp = make_fock_space(kRing, 2);
  const auto a = build_strong_sf(kRing, VelocityField::constant(0.0), 1.0, {0, 1}, 2);
  const auto b = random_state(sp, 4);
  // a has both particles in {0, 1}, so it drops out of the one-particle sector
  const auto sb = marginal_state(b, {0, 1}, 1);
  Ensemble ens{{0.3, a}, {0.7, b}};
  // sector probabilities for N_Omega = 1 particle in {0, 1}
  auto prob = [](const StateVector& st) {
    double p = 0.0;
    for (std::size_t q = 0; q < st.space().dim(); ++q) {
      const auto occ = st.space().occupation(q);
      if (occ[0] + occ[1] == 1) p += std::norm(st.amplitudes()[static_cast<Eigen::Index>(q)]);
    }
    return p;
  };
  ASSERT_NEAR(prob(a), 0.0, 1e-14);
  ASSERT_GT(prob(b), 0.0);
  const auto se = marginal_state(ens, {0, 1}, 1);
  EXPECT_LT((se.matrix - sb.matrix).cwiseAbs().maxCoeff(), 1e-13);
  const auto s2 = marginal_state(ens, {0, 1}, 2);
  EXPECT_NEAR(s2.matrix.trace().real(), 1.0, 1e-13);
}

TEST(Decohere, DiagonalUnchangedAndIdempotent) {
  const auto s = marginal_state(random_state(make_fock_space(kRing, 2), 8), {0, 1, 2}, 2);
  const auto d = decohere(s);
  EXPECT_EQ(decohere(d).matrix, d.matrix);
  EXPECT_NEAR(coherence(d).coherence, 0.0, 1e-14);
}

TEST(Decohere, UniformSuperpositionBecomesMaximallyMixed) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.0), 1.0, {0, 1, 2, 3}, 1);
  const auto d = decohere(marginal_state(st, {0, 1, 2, 3}, 1));
  EXPECT_LT((d.matrix - CMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Coherence, UniformSuperpositionIsLogK) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.0), 1.0, {0, 1, 2}, 1);
  EXPECT_NEAR(coherence(marginal_state(st, {0, 1, 2, 3}, 1)).coherence, std::log2(3.0), 1e-10);
}

TEST(Coherence, StrongSuperfluidTwoByTwo) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.4), 1.0, {2, 3}, 2);
  EXPECT_NEAR(coherence(marginal_state(st, {2, 3}, 2, BasisMode::tuple)).coherence, 2.0, 1e-10);
}

TEST(CoherenceProperty, StrongSuperfluidMaximality) {
  for (std::size_t M = 2; M <= 4; ++M)
    for (std::size_t N = 1; N <= 3; ++N) {
      std::vector<std::size_t> region;
      for (std::size_t s = 0; s < M; ++s) region.push_back(s + 1);
      const auto st = build_strong_sf(kRing, VelocityField::linear(0.5), 1.2, region, N);
      const double tuple = coherence(marginal_state(st, region, N, BasisMode::tuple)).coherence;
      const double occ = coherence(marginal_state(st, region, N, BasisMode::occupation)).coherence;
      EXPECT_NEAR(tuple, N * std::log2(double(M)), 1e-10);
      EXPECT_NEAR(occ, multinomial_entropy(N, M), 1e-10);
      if (N >= 2) {
        EXPECT_LT(occ, tuple - 1e-3);
      }
    }
}

TEST(CoherenceProperty, NonNegativeAndPhaseInvariant) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 6.283);
  const auto sp = make_fock_space(kRing, 2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = marginal_state(random_state(sp, seed), {0, 1, 4}, 2);
    std::vector<double> phi(s.basis.dim());
    for (auto& p : phi) p = u(rng);
    const double c = coherence(s).coherence;
    EXPECT_GT(c, 0.0);
    EXPECT_NEAR(coherence(rotate_phases(s, phi)).coherence, c, 1e-12);
    EXPECT_LE(coherence(decohere(s)).coherence, c);
  }
}

TEST(CoherenceProperty, LgtInvariance) {
  const auto sp = make_fock_space(kRing, 3);
  const auto vf = VelocityField::linear(0.8);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto st = random_state(sp, seed);
    for (auto mode : {BasisMode::tuple, BasisMode::occupation}) {
      const double a = coherence(marginal_state(st, {1, 2, 3}, 2, mode)).coherence;
      const double b = coherence(marginal_state(apply_lgt(st, vf, 1.1), {1, 2, 3}, 2, mode)).coherence;
      EXPECT_NEAR(a, b, 1e-12);
    }
  }
}

TEST(DistillationRate, StrongSuperfluidIsOne) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.2), 1.0, {0, 1, 2}, 2);
  EXPECT_EQ(distillation_rate(st, {0, 1, 2}, 2), 1);
}

TEST(DistillationRate, IncoherentIsZero) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.2), 1.0, {0, 1, 2}, 2);
  EXPECT_EQ(distillation_rate(decohere(marginal_state(st, {0, 1, 2}, 2))), 0);
}

TEST(DistillationRate, HalfDecoheredMixture) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.2), 1.0, {0, 1, 2, 3}, 1);
  const auto s = marginal_state(st, {0, 1, 2, 3}, 1);
  const auto mixed = mix(s, decohere(s), 0.5);
  // spectrum {5/8, 1/8, 1/8, 1/8}, diagonal uniform
  const double expected = 2.0 + (5.0 / 8) * std::log2(5.0 / 8) + (3.0 / 8) * std::log2(1.0 / 8);
  const auto r = coherence(mixed);
  EXPECT_NEAR(r.coherence, expected, 1e-12);
  EXPECT_EQ(distillation_rate(mixed), 0);
}

TEST(DistillationRate, SingleSiteRegionRejected) {
  const auto st = build_strong_sf(kRing, VelocityField::constant(0.2), 1.0, {0}, 1);
  EXPECT_THROW(distillation_rate(st, {0}, 1), Error);
}
