#include <doctest.h>

#include <cmath>
#include <random>

#include "expdyn/hair.hpp"
#include "expdyn/target.hpp"

using namespace expdyn;

namespace {

// Circle |w| = r against the line Im w = y, solved directly.
bool circle_oracle(double r, double delta, double y) {
  if (r < y) return false;
  return std::sqrt(r * r - y * y) >= r - delta;
}

TargetRect plain_rect(double a, double b, long K) { return {TowerReal::from_double(a), TowerReal::from_double(b), K}; }

Polyline refine(const Polyline& c, int times) {
  Polyline out{c.front()};
  for (std::size_t i = 1; i < c.size(); ++i)
    for (int j = 1; j <= times; ++j)
      out.push_back(c[i - 1] + (c[i] - c[i - 1]) * (static_cast<double>(j) / times));
  return out;
}

std::vector<XPoint> lift(const Polyline& c) {
  std::vector<XPoint> out;
  for (ComplexPoint z : c) out.push_back(XPoint::from(z));
  return out;
}

const TargetLadder& ladder30() {
  static const TargetLadder L = build_ladder(1.0, 30.0, 2, 1, 13);
  return L;
}

}  // namespace

TEST_CASE("ladder endpoints") {
  TargetLadder L = build_ladder(1.0, 20.0, 2, 1, 6);
  CHECK(L.b(0).to_double() == doctest::Approx(std::exp(20.0) + 1.0).epsilon(1e-12));
  CHECK(L.a(0) == TowerReal::from_double(20.0));
  CHECK(L.a(1) > L.a(0));
  // b_n = E(b_{n-1} - 1) + 1
  for (long n = 1; n <= 6; ++n) {
    TowerReal rec = add_const(exp_lambda(add_const(L.b(n - 1), -1.0), 1.0), 1.0);
    CHECK(L.b(n).level() == rec.level());
    CHECK(L.b(n).residual() == doctest::Approx(rec.residual()).epsilon(1e-14));
  }
  CHECK(L.family.size() == 11);
  for (long n = 0; n <= 6; ++n) CHECK(L.a(n) <= L.b(n));
}

TEST_CASE("ladder grows without bound") {
  const TargetLadder& L = ladder30();
  for (long n = 0; n + 1 < L.size(); ++n) CHECK(L.a(n) < L.a(n + 1));
  CHECK(L.a(L.size() - 1).level() > L.a(1).level() + 8);
  // first step measured on hairs equals the asymptotic form to double precision
  CHECK(L.a(1).to_double() == doctest::Approx(std::expm1(L.theta_min)).epsilon(1e-12));
}

TEST_CASE("delta-vertical circles") {
  double boundary = (kPi * kPi + 1.0) / 2.0;
  CHECK(is_delta_vertical(TowerReal::from_double(boundary), 1.0, kPi));
  CHECK(circle_oracle(boundary * (1 + 1e-15), 1.0, kPi));
  CHECK_FALSE(is_delta_vertical(TowerReal::from_double(5.0), 1.0, kPi));
  CHECK(is_delta_vertical(TowerReal::make(4, 1.2), 1.0, 1e100));

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    double delta = std::exp(U(rng) * 6 - 3);
    double r = delta * (1.0 + std::exp(U(rng) * 8));
    double y = std::exp(U(rng) * 6 - 2);
    double lhs = 2 * delta * r, rhs = y * y + delta * delta;
    if (std::fabs(lhs - rhs) <= 1e-12 * rhs) continue;
    bool got = is_delta_vertical(TowerReal::from_double(r), delta, y);
    if (got != circle_oracle(r, delta, y)) ++disagreements;
    // monotone in r
    if (got) CHECK(is_delta_vertical(TowerReal::from_double(r * 1.5), delta, y));
  }
  CHECK(disagreements == 0);
}

TEST_CASE("vertical growth constant") {
  CHECK(vertical_growth_constant(1) == doctest::Approx(std::log((9 * kPi * kPi + 1) / (kPi * kPi + 1))));
  CHECK(vertical_growth_constant(1) == doctest::Approx(2.112).epsilon(1e-3));
  CHECK(vertical_growth_constant(2) == doctest::Approx(std::log((25 * kPi * kPi + 1) / (kPi * kPi + 1))));
  CHECK_THROWS_AS(vertical_growth_constant(0), DomainError);
  for (long p = 1; p <= 3; ++p) {
    double q = vertical_growth_constant(p);
    for (long K = 0; K <= 50; ++K) {
      for (double f : {1.000001, 1.001, 1.5, 10.0, 1e6}) {
        double y = (2.0 * static_cast<double>(K) + 1.0) * kPi;
        TowerReal r = TowerReal::from_double(f * (y * y + 1.0) / 2.0);
        REQUIRE(is_delta_vertical(r, 1.0, y));
        double y2 = (2.0 * static_cast<double>(K + p) + 1.0) * kPi;
        CHECK(is_delta_vertical(mul_const(r, std::exp(q)), 1.0, y2));
      }
    }
  }
}

TEST_CASE("ladder verticality") {
  const TargetLadder& L = ladder30();
  for (long n = 0; n <= 12; ++n) CHECK(ladder_vertical(L, n));
}

TEST_CASE("covering certificates") {
  const TargetLadder& L = ladder30();
  Certificate c = covering_check(L, 0, 0);
  CHECK(c.pass);
  for (double m : c.margins) CHECK(m > 0);
  for (long n = 0; n <= 8; ++n)
    for (long k = 0; k <= 2; ++k) CHECK(covering_check(L, n, k).pass);
  CHECK(c.to_record().find("\"check\":\"covering\"") != std::string::npos);
  CHECK_THROWS_AS(covering_check(L, 12, 1), DomainError);

  TargetLadder tiny = build_ladder(1.0, 2.0, 2, 1, 3);
  Certificate t = covering_check(tiny, 0, 0);
  CHECK_FALSE(t.pass);
  bool negative = false;
  for (double m : t.margins) negative = negative || !(m > 0);
  CHECK(negative);
}

TEST_CASE("covering margins grow with zeta") {
  std::vector<TargetLadder> ls;
  for (double z : {20.0, 30.0, 40.0}) ls.push_back(build_ladder(1.0, z, 2, 1, 5));
  for (long n = 0; n <= 3; ++n) {
    for (long k = 0; k <= 1; ++k) {
      Certificate c0 = covering_check(ls[0], n, k), c1 = covering_check(ls[1], n, k), c2 = covering_check(ls[2], n, k);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(c0.margins[i] <= c1.margins[i] + 1e-12);
        CHECK(c1.margins[i] <= c2.margins[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("passes_twice on simple curves") {
  TargetRect V = plain_rect(10, 20, 0);  // band [9, 21], |Im| <= pi
  Polyline straight = {{0, 0}, {30, 0.5}};
  CHECK(passes_twice(straight, V) == 1);
  // left to right, turn outside, back right to left
  Polyline u = {{0, -1}, {30, -1}, {30, 1}, {0, 1}};
  CHECK(passes_twice(u, V) == 2);
  // three traversals separated by turns outside the band
  Polyline s = {{0, -2}, {30, -2}, {30, 0}, {0, 0}, {0, 2}, {30, 2}};
  CHECK(passes_twice(s, V) == 3);
  // same shape with every turn inside the band is a single arc
  Polyline inner = {{0, -2}, {21, -2}, {21, 0}, {9, 0}, {9, 2}, {30, 2}};
  CHECK(passes_twice(inner, V) == 1);
  Polyline left = {{0, 0}, {5, 3}, {8.9, -1}};
  CHECK(passes_twice(left, V) == 0);
  // leaving through the top splits the arc
  Polyline over = {{0, 0}, {15, 0}, {15, 5}, {15, 0}, {30, 0}};
  CHECK(passes_twice(over, V) == 0);
  Polyline single = {{15, 0}};
  CHECK(passes_twice(single, V) == 0);

  for (const Polyline* c : {&straight, &u, &s, &inner, &left, &over})
    CHECK(passes_twice(lift(refine(*c, 7)), V) == passes_twice(*c, V));
}

TEST_CASE("passes_twice ignores resampling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> X(-5.0, 35.0), Y(-5.0, 5.0);
  TargetRect V = plain_rect(10, 20, 0);
  for (int trial = 0; trial < 300; ++trial) {
    Polyline c;
    for (int i = 0; i < 12; ++i) c.push_back({X(rng), Y(rng)});
    int base = passes_twice(c, V);
    CHECK(passes_twice(refine(c, 3), V) == base);
    CHECK(passes_twice(refine(c, 10), V) == base);
  }
}

TEST_CASE("passes_twice beyond machine range") {
  TargetRect V{TowerReal::make(3, 1.2), TowerReal::make(5, 1.1), 1};
  auto xp = [](const TowerReal& re, double im) { return XPoint{XReal::from_tower(re), XReal::from_double(im)}; };
  std::vector<XPoint> c = {xp(TowerReal::from_double(40), -1), xp(TowerReal::make(6, 1.0), -1),
                           xp(TowerReal::make(6, 1.0), 1), xp(TowerReal::from_double(40), 1)};
  CHECK(passes_twice(c, V) == 2);
  // the double version cannot see an edge beyond machine range
  CHECK(passes_twice(Polyline{{40, -1}, {1e300, -1}}, V) == 0);
}

TEST_CASE("nested regions") {
  ItinerarySpec s = constant_itinerary({1});
  TargetLadder L = build_ladder(1.0, 30.0, 2, 1, 6, 8, s);
  std::vector<NestedRegion> R;
  for (long n = 1; n <= 4; ++n) R.push_back(nested_region(s, n, 0, L, 1024));

  const TargetRect outer = {TowerReal::from_double(30.0), L.b(0), L.M_at(0)};
  for (std::size_t i = 0; i < R.size(); ++i) {
    long n = static_cast<long>(i) + 1;
    for (const auto& ch : R[i].chains) {
      CHECK(chain_in_region(ch, s, n, 0, L));  // prefix s_0..s_{n-1}, endpoint in V
      CHECK(in_rect(ch.front(), outer));
    }
    CHECK(std::isfinite(R[i].max_gap));
    // decreasing family: the boundary of region n+1 lies in region n
    if (i + 1 < R.size())
      for (const auto& ch : R[i + 1].chains) CHECK(chain_in_region(ch, s, n, 0, L));
  }

  // the base segment of s lies in every region
  double th = find_theta(s, 30.0, 1.0);
  double th0 = find_theta(prepend_zeros(s, 1), 30.0, 1.0);
  double hi = std::expm1(th0) - 1.0;
  for (double f : {0.0, 0.01, 0.5, 1.0}) {
    double eta = th + 1e-6 + f * (hi - th - 1e-6);
    for (long n = 1; n <= 4; ++n) {
      std::vector<XPoint> chain;
      for (long j = 0; j <= n; ++j)
        chain.push_back(trace_point_x(shift(s, j), f_iter(TowerReal::from_double(eta), j), 1.0));
      CHECK(chain_in_region(chain, s, n, 0, L));
    }
  }
}
