#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "locsf/fock_oracle.hpp"
#include "locsf/generating.hpp"

using namespace locsf;

namespace {
// orthonormal random modes on M sites by QR
std::vector<CVector> random_modes(std::size_t M, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix A(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(count));
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) A(r, c) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(A);
  const CMatrix Q = qr.householderQ() * CMatrix::Identity(A.rows(), A.cols());
  std::vector<CVector> out;
  for (Eigen::Index c = 0; c < Q.cols(); ++c) out.push_back(Q.col(c));
  return out;
}
}  // namespace

TEST(GeneratingDensity, UniformCondensate) {
  const double L = 3.0;
  const std::vector<std::function<cplx(double)>> modes{[L](double) { return cplx(1.0 / std::sqrt(L)); }};
  for (std::size_t N = 1; N <= 8; ++N) EXPECT_NEAR(generating_density(modes, {N}, L, 0.4), N / L, 1e-12);
}

TEST(GeneratingDensity, TwoDistinctModesFirstQuantized) {
  // one particle in each of two orthonormal modes: |psi1|^2 + |psi2|^2
  const double L = 2.0;
  auto p1 = [L](double x) { return std::polar(1.0 / std::sqrt(L), 2 * std::numbers::pi * x / L); };
  auto p2 = [L](double x) { return cplx(std::sqrt(2.0 / L) * std::cos(4 * std::numbers::pi * x / L)); };
  for (double x : {-0.8, 0.1, 0.6})
    EXPECT_NEAR(generating_density({p1, p2}, {1, 1}, L, x), std::norm(p1(x)) + std::norm(p2(x)), 1e-10);
}

TEST(GeneratingDensity, NonOrthogonalPairFirstQuantized) {
  // |Phi> = a1^dag a2^dag |0>, first-quantized phi(x,y) = u(x)w(y) + w(x)u(y);
  // <n(x)> = 2 (|u|^2 |w|^2_int + |w|^2 |u|^2_int + 2 Re[conj(u) w <w|u>]) / norm,
  // norm = 2 (|u|^2_int |w|^2_int + |<u|w>|^2)
  const std::size_t M = 5;
  CVector u(5), w(5);
  u << 1.0, cplx(0.5, 0.2), 0.0, -0.3, 0.1;
  w << 0.2, 1.0, cplx(0.0, 0.4), 0.5, -0.6;
  const double uu = u.squaredNorm(), ww = w.squaredNorm();
  const cplx uw = u.dot(w);
  const double norm = 2 * (uu * ww + std::norm(uw));
  for (std::size_t s = 0; s < M; ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    const double num =
        2 * (std::norm(u(i)) * ww + std::norm(w(i)) * uu + 2 * (std::conj(u(i)) * w(i) * std::conj(uw)).real());
    EXPECT_NEAR(generating_density({u, w}, {1, 1}, s), num / norm, 1e-12);
  }
}

TEST(GeneratingDensity, MatchesFockFragmented) {
  const auto dom = Domain::ring(1.0, 5);
  for (std::size_t N = 1; N <= 4; ++N) {
    const auto sp = make_fock_space(dom, N);
    for (std::size_t nm = 1; nm <= 3; ++nm) {
      const auto modes = random_modes(5, nm, 100 * N + nm);
      for (const auto& occ : occupation_patterns(nm, N)) {
        const auto st = build_fragmented(sp, modes, occ);
        const auto n = occupations(st);
        for (std::size_t s = 0; s < 5; ++s) EXPECT_NEAR(generating_density(modes, occ, s), n[s], 1e-10);
      }
    }
  }
}

TEST(GeneratingDensityProperty, SumsToParticleNumber) {
  const auto modes = random_modes(6, 4, 3);
  for (const auto& occ : occupation_patterns(4, 8)) {
    double total = 0.0;
    for (std::size_t s = 0; s < 6; ++s) total += generating_density(modes, occ, s);
    EXPECT_NEAR(total, 8.0, 1e-9);
  }
}

TEST(GeneratingDensity, CapsEnforced) {
  const auto modes = random_modes(6, 4, 3);
  EXPECT_THROW(generating_density(modes, {3, 3, 2, 1}, 0), Error);
  const auto five = random_modes(6, 5, 3);
  EXPECT_THROW(generating_density(five, {1, 1, 1, 1, 1}, 0), Error);
}
