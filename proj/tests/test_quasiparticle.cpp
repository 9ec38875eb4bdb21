#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "locsf/quasiparticle.hpp"

using namespace locsf;

namespace {
QuasiparticleSpectrum phonon1d(double L, double c, double beta) {
  return QuasiparticleSpectrum(1, {L, 1.0}, choose_kmax(Dispersion::phonon, {c}, beta), Dispersion::phonon, {c});
}

QuasiparticleSpectrum roton2d() {
  return QuasiparticleSpectrum::tabulated(2, {20.0, 20.0}, 6.0,
                                          {{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.6}, {3.0, 0.9}, {4.0, 1.5}, {9.0, 6.0}});
}
}  // namespace

TEST(CriticalVelocity, Phonon) {
  EXPECT_NEAR(critical_velocity(phonon1d(50.0, 0.7, 1.0)), 0.7, 1e-14);
}

TEST(CriticalVelocity, FreeParticles) {
  const double L = 40.0, m = 1.5;
  QuasiparticleSpectrum sp(1, {L, 1.0}, 5.0, Dispersion::free, {m});
  EXPECT_NEAR(critical_velocity(sp), (2 * std::numbers::pi / L) / (2 * m), 1e-14);
}

TEST(CriticalVelocity, RotonDip) {
  const auto sp = roton2d();
  double best = 1e300;
  for (int n0 = -19; n0 <= 19; ++n0)
    for (int n1 = -19; n1 <= 19; ++n1) {
      const double k = 2 * std::numbers::pi / 20.0 * std::hypot(n0, n1);
      if (k == 0 || 2 * std::numbers::pi / 20.0 * std::max(std::abs(n0), std::abs(n1)) > 6.0) continue;
      double e;
      if (k <= 1) e = k;
      else if (k <= 2) e = 1 + 0.6 * (k - 1);
      else if (k <= 3) e = 1.6 - 0.7 * (k - 2);
      else if (k <= 4) e = 0.9 + 0.6 * (k - 3);
      else e = 1.5 + 0.9 * (k - 4);
      best = std::min(best, e / k);
    }
  EXPECT_NEAR(critical_velocity(sp), best, 1e-12);
  EXPECT_LT(critical_velocity(sp), 0.9 / 2.5);
}

TEST(MomentumDensityGibbs, ZeroBoostVanishes) {
  const auto sp = roton2d();
  const auto g = momentum_density_gibbs(BoostedGibbs(sp, 2.0, {0.0, 0.0}), sp.volume());
  EXPECT_NEAR(g[0], 0.0, 1e-14);
  EXPECT_NEAR(g[1], 0.0, 1e-14);
}

TEST(MomentumDensityGibbs, GappedLowTemperatureVanishes) {
  const auto sp = QuasiparticleSpectrum::tabulated(1, {30.0, 1.0}, 4.0, {{0.0, 1.0}, {5.0, 3.0}});
  const auto g = momentum_density_gibbs(BoostedGibbs(sp, 500.0, {0.05, 0.0}), sp.volume());
  EXPECT_LT(std::abs(g[0]), 1e-200);
  EXPECT_LT(landau_normal_tensor(sp, 500.0, sp.volume(), 0, 0), 1e-200);
}

TEST(MomentumDensityGibbs, LinearResponseMatchesLandau) {
  QuasiparticleSpectrum sp(1, {30.0, 1.0}, 12.0, Dispersion::free, {1.0});
  const double beta = 0.5;
  const double rho_n = landau_normal_tensor(sp, beta, sp.volume(), 0, 0);
  std::vector<double> err;
  for (double v : {0.004, 0.002}) {
    const double g = momentum_density_gibbs(BoostedGibbs(sp, beta, {v, 0.0}), sp.volume())[0];
    err.push_back(std::abs(g - v * rho_n) / (v * rho_n));
  }
  EXPECT_LT(err[0], 2e-3);
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.05);
}

TEST(MomentumDensityGibbs, BoostBeyondCriticalVelocityFails) {
  const auto sp = phonon1d(20.0, 1.0, 1.0);
  EXPECT_THROW(BoostedGibbs(sp, 1.0, {1.01, 0.0}), Error);
}

TEST(LandauTensor, PhononTemperatureSquared) {
  const double c = 1.0, L = 2.0e4;
  const auto sp = phonon1d(L, c, 1.0);
  const double t1 = landau_normal_tensor(sp, 1.0, L, 0, 0);
  const double t2 = landau_normal_tensor(sp, 0.5, L, 0, 0);
  EXPECT_NEAR(t2 / t1, 4.0, 4e-3);
}

TEST(LandauTensor, PhononContinuumValue) {
  // continuum limit pi / (3 beta^2 c^3)
  const double c = 0.8, beta = 2.0, L = 4.0e4;
  const auto sp = phonon1d(L, c, beta);
  const double expected = std::numbers::pi / (3 * beta * beta * c * c * c);
  EXPECT_NEAR(landau_normal_tensor(sp, beta, L, 0, 0) / expected, 1.0, 1e-3);
}

TEST(LandauTensor, IsotropicOffDiagonalVanishes) {
  QuasiparticleSpectrum sp(2, {15.0, 15.0}, 6.0, Dispersion::phonon, {1.0});
  EXPECT_LT(std::abs(landau_normal_tensor(sp, 1.0, sp.volume(), 0, 1)), 1e-12);
}

TEST(LandauTensorProperty, SymmetricAndPositive) {
  const auto sp = roton2d();
  for (double beta : {0.5, 1.0, 3.0}) {
    const double a = landau_normal_tensor(sp, beta, sp.volume(), 0, 1);
    const double b = landau_normal_tensor(sp, beta, sp.volume(), 1, 0);
    EXPECT_NEAR(a, b, 1e-12);
    EXPECT_GT(landau_normal_tensor(sp, beta, sp.volume(), 0, 0), 0.0);
    EXPECT_GT(landau_normal_tensor(sp, beta, sp.volume(), 1, 1), 0.0);
  }
}

TEST(LandauTensorProperty, CentredDifferenceConvergesQuadratically) {
  const auto sp = roton2d();
  const double beta = 1.5;
  const double rho_n = landau_normal_tensor(sp, beta, sp.volume(), 0, 0);
  auto fd = [&](double v) {
    const double gp = momentum_density_gibbs(BoostedGibbs(sp, beta, {v, 0.0}), sp.volume())[0];
    const double gm = momentum_density_gibbs(BoostedGibbs(sp, beta, {-v, 0.0}), sp.volume())[0];
    return (gp - gm) / (2 * v);
  };
  const double e1 = std::abs(fd(0.04) - rho_n), e2 = std::abs(fd(0.02) - rho_n);
  EXPECT_LT(e1 / rho_n, 2e-2);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
}

TEST(LandauTensor, GaplessZeroShellDiverges) {
  QuasiparticleSpectrum sp(1, {10.0, 1.0}, 4.0, Dispersion::free, {1.0}, true);
  EXPECT_THROW(landau_normal_tensor(sp, 1.0, 10.0, 0, 0), Error);
}

TEST(QuasiparticleSpectrum, GridIsSymmetric) {
  const auto sp = roton2d();
  for (const auto& k : sp.grid()) {
    bool found = false;
    for (const auto& q : sp.grid())
      if (q[0] == -k[0] && q[1] == -k[1]) found = true;
    EXPECT_TRUE(found);
  }
}
