#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spiky/bounds.hpp"
#include "spiky/errors.hpp"
#include "spiky/geometry_oracle.hpp"
#include "spiky/spiky_body.hpp"

using namespace spiky;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> scaled(std::span<const double> v, double s) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x *= s;
  return out;
}

/// First E1-clean body for the given parameters, scanning seeds.
SpikyBody clean_body(int d, std::size_t n, double D, std::uint64_t master) {
  for (std::uint64_t s = 0;; ++s) {
    SpikyBody b = construct(d, n, D, SeedSpec{master, s});
    if (!check_e1(b).occurred) return b;
  }
}

/// Unit direction at angle t from `c`, rotated towards a random orthogonal direction.
UnitVector tilt(const UnitVector& c, double t, std::mt19937_64& gen) {
  auto r = oracle::random_unit(c.dim(), gen);
  const double rc = vec::dot(r, c.coords());
  for (int k = 0; k < c.dim(); ++k) r[k] -= rc * c[k];
  const double rn = vec::norm(r);
  std::vector<double> out(c.dim());
  for (int k = 0; k < c.dim(); ++k) out[k] = std::cos(t) * c[k] + std::sin(t) * r[k] / rn;
  return UnitVector::normalized(out);
}

}  // namespace

TEST(Support, Examples) {
  PointSet ps(2);
  ps.push_back(UnitVector::axis(2, 0));
  const SpikyBody b = SpikyBody::from_spikes(ps, 2.0);
  const std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(support(b, e1), 1.0);
  EXPECT_EQ(support(b, e2), 0.5);
  const std::vector<double> m{-1, 0};
  EXPECT_EQ(support(b, m), 1.0);
}

TEST(Support, PositivelyHomogeneous) {
  const SpikyBody b = construct(5, 30, 1.1, SeedSpec{1, 0});
  std::mt19937_64 gen(1);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> w(5);
    for (auto& x : w) x = 3 * g(gen);
    EXPECT_NEAR(support(b, scaled(w, 2.0)), 2 * support(b, w), 1e-14 * support(b, w));
  }
}

TEST(Margin, OriginMatchesDenseSweep) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const SpikyBody b2 = construct(2, 4 + s, 1.1, SeedSpec{2, s});
    const std::vector<double> o2(2, 0.0);
    const MarginResult m2 = membership_margin(b2, o2);
    EXPECT_TRUE(m2.exhaustive);
    EXPECT_EQ(m2.status, MarginStatus::CertifiedPositive);
    EXPECT_GE(m2.value, 1 / 1.1 - 1e-12);
    const double dense2 = oracle::dense_margin(b2, o2, 200000);
    EXPECT_LE(m2.value, dense2 + 1e-12);
    EXPECT_GE(m2.value, dense2 - 1e-4);

    const SpikyBody b3 = construct(3, 6 + s, 1.1, SeedSpec{3, s});
    const std::vector<double> o3(3, 0.0);
    const MarginResult m3 = membership_margin(b3, o3);
    const double dense3 = oracle::dense_margin(b3, o3, 400000);
    EXPECT_LE(m3.value, dense3 + 1e-12);
    EXPECT_GE(m3.value, dense3 - 1e-2);
  }
}

TEST(Margin, OriginEqualsInnerRadiusWhenSomeDirectionAvoidsSpikes) {
  // A single spike leaves the whole great circle orthogonal to it free.
  const SpikyBody b = construct(3, 1, 1.1, SeedSpec{4, 0});
  const std::vector<double> o(3, 0.0);
  EXPECT_NEAR(membership_margin(b, o).value, 1 / 1.1, 1e-12);
}

TEST(Margin, SpikeIsOnTheBoundary) {
  const SpikyBody b = clean_body(3, 5, 1.1, 5);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const MarginResult m = membership_margin(b, b.spikes[i]);
    EXPECT_NEAR(m.value, 0.0, 1e-9);
    EXPECT_EQ(m.status, MarginStatus::Ambiguous);
  }
}

TEST(Margin, OutsidePointIsCertifiedNegative) {
  const SpikyBody b = clean_body(3, 5, 1.1, 6);
  const auto p = scaled(b.spikes[0], 1.5);
  const MarginResult m = membership_margin(b, p);
  EXPECT_EQ(m.status, MarginStatus::CertifiedNegative);
  EXPECT_LT(m.value, -0.4);
  // The witness is re-checkable: <p, w> > h_K(w).
  const auto w = m.minimizer_direction.coords();
  EXPECT_GT(vec::dot(p, w), support(b, w));
  EXPECT_LT(angle(m.minimizer_direction, b.spike(0)), b.alpha());
}

TEST(Margin, ConcaveAlongSegments) {
  const SpikyBody b = construct(4, 12, 1.1, SeedSpec{7, 0});
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> a(4), c(4), mid(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = u(gen);
      c[j] = u(gen);
      mid[j] = 0.5 * (a[j] + c[j]);
    }
    const double ma = membership_margin(b, a).value;
    const double mc = membership_margin(b, c).value;
    EXPECT_GE(membership_margin(b, mid).value, 0.5 * (ma + mc) - 1e-9);
  }
}

TEST(Margin, CentralSymmetry) {
  const SpikyBody b = construct(3, 9, 1.1, SeedSpec{8, 0});
  std::mt19937_64 gen(8);
  for (int k = 0; k < 50; ++k) {
    const auto p = scaled(oracle::random_unit(3, gen), 0.3 + k * 0.02);
    EXPECT_NEAR(membership_margin(b, p).value, membership_margin(b, scaled(p, -1.0)).value, 1e-12);
    EXPECT_NEAR(gauge(b, p).value, gauge(b, scaled(p, -1.0)).value, 1e-12);
  }
}

TEST(Margin, LocalSearchAgreesWithEnumeration) {
  OracleOptions local;
  local.force_local = true;
  for (int d : {2, 3, 4}) {
    const SpikyBody b = construct(d, 8, 1.1, SeedSpec{9, static_cast<std::uint64_t>(d)});
    std::mt19937_64 gen(d);
    for (int k = 0; k < 20; ++k) {
      const auto p = scaled(oracle::random_unit(d, gen), 0.5 + 0.05 * k);
      const MarginResult exact = membership_margin(b, p);
      ASSERT_TRUE(exact.exhaustive);
      const MarginResult approx = membership_margin(b, p, local);
      EXPECT_FALSE(approx.exhaustive);
      EXPECT_GT(approx.restarts_used, 0);
      EXPECT_NEAR(approx.value, exact.value, 1e-7) << "d=" << d << " k=" << k;
    }
  }
}

TEST(Gauge, Examples) {
  const SpikyBody b = clean_body(3, 5, 1.1, 10);
  const std::vector<double> o(3, 0.0);
  EXPECT_EQ(gauge(b, o).value, 0.0);
  EXPECT_NEAR(gauge(b, b.spikes[0]).value, 1.0, 1e-12);
  EXPECT_NEAR(gauge(b, scaled(b.spikes[0], 2.0)).value, 2.0, 1e-12);
  std::mt19937_64 gen(10);
  for (int k = 0; k < 100; ++k) {
    const auto v = oracle::random_unit(3, gen);
    EXPECT_LE(gauge(b, scaled(v, 1 / 1.1)).value, 1.0 + 1e-12);
  }
}

TEST(Gauge, InnerSphereTouchesBoundaryOutsideSpikeCaps) {
  // (1/D) v lies on the boundary iff v is at angle >= arccos(1/D) = pi/2 - alpha
  // from every +-X_i: the tangents from X_i touch the inner circle there.
  PointSet ps(2);
  ps.push_back(std::vector<double>{1.0, 0.0});
  ps.push_back(std::vector<double>{std::cos(1.9), std::sin(1.9)});
  const SpikyBody b = SpikyBody::from_spikes(ps, 1.1);
  const double hidden = kPi / 2 - b.alpha();
  for (int k = 0; k < 720; ++k) {
    const double t = 2 * kPi * k / 720;
    const std::vector<double> v{std::cos(t), std::sin(t)};
    double nearest = kPi;
    for (std::size_t i = 0; i < 2; ++i) {
      nearest = std::min(nearest, angle(v, b.spikes[i]));
      nearest = std::min(nearest, kPi - angle(v, b.spikes[i]));
    }
    const double g = gauge(b, scaled(v, 1 / 1.1)).value;
    const double dense = oracle::dense_gauge(b, scaled(v, 1 / 1.1), 100000);
    EXPECT_GE(g, dense - 1e-12);
    EXPECT_LE(g, dense + 1e-4);
    if (nearest >= hidden + 1e-6) EXPECT_NEAR(g, 1.0, 1e-12) << t;
    if (nearest <= hidden - 1e-6) EXPECT_LT(g, 1.0 - 1e-12) << t;
  }
}

TEST(Gauge, DualityWithMargin) {
  const SpikyBody b = construct(4, 15, 1.1, SeedSpec{11, 0});
  std::mt19937_64 gen(11);
  for (int k = 0; k < 50; ++k) {
    const auto p = scaled(oracle::random_unit(4, gen), 0.2 + 0.05 * k);
    const double g = gauge(b, p).value;
    ASSERT_GT(g, 0.0);
    EXPECT_NEAR(membership_margin(b, scaled(p, 1 / g)).value, 0.0, 1e-7);
  }
}

TEST(Gauge, PolytopalCore) {
  const SpikyBody b = polytopal_variant(construct(3, 4, 1.1, SeedSpec{12, 0}), 0.3, SeedSpec{12, 1});
  std::mt19937_64 gen(12);
  for (int k = 0; k < 10; ++k) {
    const auto p = scaled(oracle::random_unit(3, gen), 0.7);
    const double g = gauge(b, p).value;
    EXPECT_NEAR(g, oracle::dense_gauge(b, p, 400000), 1e-3);
    EXPECT_NEAR(membership_margin(b, scaled(p, 1 / g)).value, 0.0, 1e-7);
  }
}

TEST(Illuminates, AntipodalAndOutward) {
  const SpikyBody b = clean_body(3, 5, 1.1, 13);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const IlluminationTrace in = illuminates(b, i, -b.spike(i));
    EXPECT_TRUE(in.illuminated);
    EXPECT_FALSE(in.ambiguous);
    EXPECT_GT(in.max_margin, 0.0);
    const IlluminationTrace out = illuminates(b, i, b.spike(i));
    EXPECT_FALSE(out.illuminated);
    EXPECT_LT(out.max_margin, 0.0);
    EXPECT_TRUE(illuminates(b, i, b.spike(i), {}, true).illuminated);
  }
}

TEST(Illuminates, FactCapNearBoundary) {
  std::mt19937_64 gen(14);
  for (double D : {1.05, 1.1}) {
    const SpikyBody b = clean_body(3, 6, D, 14);
    const double alpha = b.alpha();
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (bool neg : {false, true}) {
        const UnitVector c = neg ? b.spike(i) : -b.spike(i);
        const UnitVector inside = tilt(c, alpha - 0.05, gen);
        const UnitVector outside = tilt(c, alpha + 0.05, gen);
        EXPECT_TRUE(illuminates(b, i, inside, {}, neg).illuminated);
        EXPECT_TRUE(cap_predicate(b, i, inside, neg));
        EXPECT_FALSE(illuminates(b, i, outside, {}, neg).illuminated);
        EXPECT_FALSE(cap_predicate(b, i, outside, neg));
      }
    }
  }
}

TEST(Illuminates, FactCapRandomDirections) {
  std::mt19937_64 gen(15);
  std::size_t checked = 0;
  for (int d : {3, 4}) {
    const SpikyBody b = clean_body(d, 5, 1.1, 15);
    const double alpha = b.alpha();
    for (int k = 0; k < 100; ++k) {
      const std::size_t i = k % b.size();
      std::uniform_real_distribution<double> t(alpha - 0.4, alpha + 0.4);
      const double a = t(gen);
      if (std::abs(a - alpha) < 1e-3) continue;
      const UnitVector u = tilt(-b.spike(i), a, gen);
      EXPECT_EQ(illuminates(b, i, u).illuminated, cap_predicate(b, i, u)) << "d=" << d << " angle=" << a;
      ++checked;
    }
  }
  EXPECT_GE(checked, 190u);
}

TEST(CapPredicate, Examples) {
  PointSet ps(2);
  ps.push_back(std::vector<double>{1.0, 0.0});
  const SpikyBody b = SpikyBody::from_spikes(ps, 1.1);
  const double alpha = b.alpha();
  EXPECT_TRUE(cap_predicate(b, 0, UnitVector::axis(2, 0, -1.0)));
  EXPECT_FALSE(cap_predicate(b, 0, UnitVector::axis(2, 0)));
  EXPECT_TRUE(cap_predicate(b, 0, UnitVector::axis(2, 0), true));
  const UnitVector edge = UnitVector::normalized({-std::cos(alpha), std::sin(alpha)});
  EXPECT_FALSE(cap_predicate(b, 0, edge));
  const UnitVector just_in = UnitVector::normalized({-std::cos(alpha - 1e-9), std::sin(alpha - 1e-9)});
  EXPECT_TRUE(cap_predicate(b, 0, just_in));
}

TEST(Illuminates, SimplexLightsTheBall) {
  for (int d : {3, 4, 5}) {
    const SpikyBody ball = SpikyBody::unit_ball(d);
    const PointSet s = simplex_directions(d);
    ASSERT_EQ(s.size(), static_cast<std::size_t>(d + 1));
    const PointSet probes = uniform_cloud(d, 200, SeedSpec{16, static_cast<std::uint64_t>(d)});
    for (std::size_t k = 0; k < probes.size(); ++k) {
      bool lit = false;
      for (std::size_t j = 0; j < s.size() && !lit; ++j)
        lit = illuminates_at(ball, probes[k], s.unit(j)).illuminated;
      EXPECT_TRUE(lit) << "d=" << d << " probe " << k;
    }
  }
}

TEST(Illuminates, BallTangentDirectionIsNotIlluminating) {
  const SpikyBody ball = SpikyBody::unit_ball(3);
  const std::vector<double> b{1.0, 0.0, 0.0};
  EXPECT_FALSE(illuminates_at(ball, b, UnitVector::axis(3, 1)).illuminated);
  EXPECT_TRUE(illuminates_at(ball, b, UnitVector::normalized({-0.1, 1.0, 0.0})).illuminated);
}
