#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "locsf/domain.hpp"
#include "locsf/normal_fluid.hpp"
#include "locsf/velocity_field.hpp"

using namespace locsf;

TEST(Domain, SpacingAndVolume) {
  const Domain ring = Domain::ring(4.0, 8);
  EXPECT_DOUBLE_EQ(ring.spacing(0), 0.5);
  EXPECT_DOUBLE_EQ(ring.volume(), 4.0);
  EXPECT_DOUBLE_EQ(ring.coord(0)[0], -2.0);

  const Domain box(2, {2.0, 3.0}, {3, 4}, Boundary::open);
  EXPECT_DOUBLE_EQ(box.spacing(0), 1.0);
  EXPECT_DOUBLE_EQ(box.spacing(1), 1.0);
  EXPECT_DOUBLE_EQ(box.volume(), 6.0);
  EXPECT_EQ(box.site_count(), 12u);
  EXPECT_DOUBLE_EQ(box.coord(11)[0], 1.0);
  EXPECT_DOUBLE_EQ(box.coord(11)[1], 1.5);
}

TEST(Domain, RejectsBadInput) {
  EXPECT_THROW(Domain(1, {0.0, 1.0}, {4, 1}, Boundary::open), Error);
  EXPECT_THROW(Domain(1, {1.0, 1.0}, {1, 1}, Boundary::open), Error);
  EXPECT_THROW(Domain(3, {1.0, 1.0}, {4, 4}, Boundary::open), Error);
}

TEST(Domain, NeighboursWrapOnlyWhenPeriodic) {
  const Domain ring = Domain::ring(1.0, 5);
  EXPECT_EQ(*ring.neighbor(0, 0, -1), 4u);
  EXPECT_EQ(*ring.neighbor(4, 0, +1), 0u);
  EXPECT_TRUE(ring.on_seam(0, 0));
  const Domain line = Domain::interval(1.0, 5);
  EXPECT_FALSE(line.neighbor(0, 0, -1).has_value());
  EXPECT_TRUE(line.on_open_edge(4, 0));
  EXPECT_FALSE(line.on_open_edge(2, 0));
}

TEST(Domain, IndexRoundTrip) {
  const Domain box(2, {1.0, 1.0}, {5, 3}, Boundary::periodic);
  for (std::size_t s = 0; s < box.site_count(); ++s) EXPECT_EQ(box.site_index(box.multi_index(s)), s);
}

TEST(BoostPhase, Examples) {
  EXPECT_NEAR(eval_boost_phase(VelocityField::constant(0.3), 1.0, {2.0, 0.0}), 0.6, 1e-15);
  const auto rot = VelocityField::rotation(0.7);
  EXPECT_NEAR(eval_boost_phase(rot, 1.0, {0.3, -1.1}), 0.0, 1e-15);
  EXPECT_NEAR(eval_boost_phase(VelocityField::inverse_power(1, 1.0), 2.0, {0.5, 0.0}), 2.0, 1e-15);
}

TEST(BoostPhase, SingularRegion) {
  const auto f = VelocityField::inverse_power(1, 1.0, 1, 0.1);
  EXPECT_THROW(eval_boost_phase(f, 1.0, {0.05, 0.0}), Error);
  EXPECT_THROW(eval_boost_phase(f, 1.0, {0.0, 0.0}), Error);
  try {
    f.eval({0.0, 0.0});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular_point);
  }
}

TEST(GradientTerm, Examples) {
  const auto c = VelocityField::constant(2, {0.3, -0.2});
  EXPECT_DOUBLE_EQ(eval_gradient_term(c, 0, 0, {1.2, 3.0}), 0.3);
  EXPECT_DOUBLE_EQ(eval_gradient_term(c, 1, 1, {1.2, 3.0}), -0.2);
  EXPECT_DOUBLE_EQ(eval_gradient_term(c, 0, 1, {1.2, 3.0}), 0.0);
  EXPECT_DOUBLE_EQ(eval_gradient_term(VelocityField::rotation(0.4), 0, 0, {1.0, 0.0}), 0.0);
  EXPECT_NEAR(eval_gradient_term(VelocityField::linear(0.5), 0, 0, {1.3, 0.0}), 2 * 0.5 * 1.3, 1e-15);
}

TEST(GradientTerm, RotationDiagonalVanishesOnGrid) {
  const Domain box(2, {3.0, 2.0}, {7, 5}, Boundary::open);
  const auto rot = VelocityField::rotation(0.9);
  for (std::size_t s = 0; s < box.site_count(); ++s) {
    const Point x = box.coord(s);
    const auto J = rot.jacobian(x);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(x[j] * J[j][j], 0.0);
  }
}

namespace {
Jacobian fd_jacobian(const VelocityField& f, Point x, double h) {
  Jacobian J{};
  for (int i = 0; i < f.dim(); ++i) {
    Point p = x, m = x;
    p[i] += h;
    m[i] -= h;
    const auto vp = f.eval(p), vm = f.eval(m);
    for (int j = 0; j < f.dim(); ++j) J[i][j] = (vp[j] - vm[j]) / (2 * h);
  }
  return J;
}
}  // namespace

TEST(VelocityFieldProperty, AnalyticJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.3, 2.0), sgn(-1.0, 1.0);
  const std::vector<VelocityField> fields = {
      VelocityField::constant(2, {0.4, -0.1}), VelocityField::rotation(0.8),
      VelocityField::linear(2, {0.3, -0.7}), VelocityField::inverse_power(2, 0.6, 1, 0.1),
      VelocityField::inverse_power(2, 0.6, 2, 0.1), VelocityField::linear(0.2),
      VelocityField::inverse_power(1, -1.3)};
  for (const auto& f : fields) {
    for (int n = 0; n < 100; ++n) {
      Point x{u(rng) * (sgn(rng) < 0 ? -1 : 1), f.dim() > 1 ? u(rng) * (sgn(rng) < 0 ? -1 : 1) : 0.0};
      const auto J = f.jacobian(x);
      const auto F = fd_jacobian(f, x, 1e-5);
      for (int i = 0; i < f.dim(); ++i)
        for (int j = 0; j < f.dim(); ++j) {
          const double scale = std::max(std::abs(J[i][j]), 1e-3);
          EXPECT_LT(std::abs(J[i][j] - F[i][j]) / scale, 1e-6) << to_string(f.family());
        }
    }
  }
}

TEST(VelocityFieldProperty, ConstantGradientIsDeltaV) {
  const auto c = VelocityField::constant(2, {0.25, 1.5});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 0; n < 50; ++n) {
    const Point x{g(rng), g(rng)};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_EQ(eval_gradient_term(c, i, j, x), i == j ? c.eval(x)[j] : 0.0);
    EXPECT_EQ(c.jacobian(x)[0][1], 0.0);
  }
}

TEST(VelocityField, TabulatedReproducesSmoothField) {
  const Domain ring = Domain::ring(2 * M_PI, 64);
  std::vector<Point> samples;
  for (std::size_t s = 0; s < ring.site_count(); ++s) samples.push_back({std::sin(ring.coord(s)[0]), 0.0});
  const auto tab = VelocityField::tabulated(ring, samples);
  for (std::size_t s = 0; s < ring.site_count(); ++s) {
    const double x = ring.coord(s)[0];
    EXPECT_NEAR(tab.eval({x, 0.0})[0], std::sin(x), 1e-14);
    EXPECT_NEAR(tab.jacobian({x, 0.0})[0][0], std::cos(x), 1e-5);
  }
  EXPECT_NEAR(tab.eval({0.05, 0.0})[0], std::sin(0.05), 2e-3);
}

TEST(VelocityField, ScalingIsLinear) {
  const auto f = VelocityField::rotation(0.5).scaled(0.25);
  EXPECT_DOUBLE_EQ(f.eval({1.0, 2.0})[0], -0.25);
  EXPECT_DOUBLE_EQ(f.jacobian({1.0, 2.0})[0][1], 0.125);
}

TEST(VelocityField, InvalidParams) {
  EXPECT_THROW(VelocityField::from_params(FieldFamily::rotation, 1, {1.0}, 0, 0.0), Error);
  EXPECT_THROW(VelocityField::from_params(FieldFamily::inverse_power, 1, {1.0, 0.5}, 0, 0.0), Error);
  EXPECT_THROW(VelocityField::from_params(FieldFamily::constant, 2, {1.0}, 0, 0.0), Error);
  EXPECT_THROW(field_family_from_string("vortex"), Error);
}

TEST(NormalFluidField, CsvLayout) {
  std::vector<NormalFluidSite> sites(2);
  sites[0].x = {0.5, 0.0};
  sites[0].rho = 1.0;
  sites[0].rho_n[0][0] = 0.25;
  sites[1].masked = true;
  NormalFluidField f(1, sites, "test");
  f.add_component(0, 0);
  std::ostringstream os;
  f.write_csv(os);
  EXPECT_EQ(os.str(), "x1,i,j,rho,rho_n,stderr\n0.5,1,1,1,0.25,0\n0,1,1,0,nan,nan\n");
  EXPECT_DOUBLE_EQ(f.superfluid(0, 0, 0), 0.75);
}
