#include <doctest.h>

#include <cmath>
#include <random>

#include "expdyn/xnum.hpp"

using namespace expdyn;

TEST_CASE("exp_map basics") {
  CHECK(std::abs(exp_map({0, 0}, 1.0) - ComplexPoint(1, 0)) < 1e-15);
  CHECK(std::abs(exp_map({0, kPi}, 1.0) - ComplexPoint(-1, 0)) < 1e-15);
  // 2e computed by hand: 2 * 2.718281828459045
  CHECK(exp_map({1, 0}, 2.0).real() == doctest::Approx(5.43656365691809).epsilon(1e-14));
  CHECK_THROWS_AS(exp_map({701, 0}, 1.0), OverflowToTower);
  CHECK_THROWS_AS(exp_map({0, 0}, 0.3), DomainError);
}

TEST_CASE("inverse_branch basics and errors") {
  for (double lam : {0.5, 1.0, 2.0, 7.0}) {
    CHECK(std::abs(inverse_branch({lam, 0}, 0, lam)) < 1e-15);
    ComplexPoint w = inverse_branch({lam, 0}, 3, lam);
    CHECK(std::abs(w - ComplexPoint(0, 6 * kPi)) < 1e-14);
  }
  CHECK(std::abs(inverse_branch({std::exp(1.0), 0}, 0, 1.0) - ComplexPoint(1, 0)) < 1e-15);
  CHECK_THROWS_AS(inverse_branch({0, 0}, 0, 1.0), DomainError);
  CHECK_THROWS_AS(inverse_branch({-2, 0}, 0, 1.0), BranchCut);
  CHECK_THROWS_AS(inverse_branch({-2, 1e-15}, 1, 1.0), BranchCut);
  CHECK_NOTHROW(inverse_branch({-2, 1e-10}, 0, 1.0));
}

TEST_CASE("strip index") {
  CHECK(strip_of(0.0) == 0);
  CHECK(strip_of(kPi) == 0);
  CHECK(strip_of(-kPi) == -1);
  CHECK(strip_of(kPi + 1e-9) == 1);
  CHECK(strip_of(6 * kPi) == 3);
}

TEST_CASE("round trip exp/log per strip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(-599, 599), im(-40, 40);
  for (double lam : {0.4, 1.0, 3.0}) {
    for (int i = 0; i < 2000; ++i) {
      ComplexPoint z(re(rng), im(rng));
      long k = strip_of(z.imag());
      ComplexPoint w = exp_map(z, lam);
      if (w.real() < 0 && std::fabs(w.imag()) <= 1e-14) continue;
      ComplexPoint back = inverse_branch(w, k, lam);
      CHECK(std::abs(back - z) < 1e-12 * std::max(1.0, std::fabs(z.imag())));
    }
  }
}

TEST_CASE("TowerReal normalization and f_iter") {
  CHECK(f_iter(TowerReal::from_double(0), 5).to_double() == 0.0);
  CHECK(f_iter(TowerReal::from_double(1), 1).to_double() == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-15));
  // oracle: plain double iteration of e^t - 1
  double v = 1.0;
  for (int i = 0; i < 3; ++i) v = std::expm1(v);
  TowerReal t3 = f_iter(TowerReal::from_double(1), 3);
  CHECK(t3.to_double() == doctest::Approx(v).epsilon(1e-13));
  CHECK(v == doctest::Approx(95.96).epsilon(1e-3));
  for (long L : {1, 2, 5, 40}) {
    TowerReal t = f_iter(TowerReal::from_double(0.3), L);
    if (t.level() > 0) {
      CHECK(t.residual() >= TowerReal::kBandLo);
      CHECK(t.residual() < TowerReal::kBandHi);
    }
  }
  TowerReal big = TowerReal::make(20, 1.5);
  CHECK(big.level() == 20);
  CHECK(std::isinf(big.to_double()));
  CHECK(TowerReal::parse_literal(big.literal()) == big);
  CHECK(TowerReal::parse_literal("12.5").to_double() == 12.5);
  CHECK_THROWS_AS(TowerReal::make(0, NAN), DomainError);
}

TEST_CASE("TowerReal order matches doubles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 1e6);
  for (int i = 0; i < 5000; ++i) {
    double a = u(rng), b = u(rng);
    if (i % 3 == 0) a = std::exp(std::uniform_real_distribution<double>(-3, 600)(rng));
    TowerReal ta = TowerReal::from_double(a), tb = TowerReal::from_double(b);
    CHECK((a < b) == (ta < tb));
    // residual rounding is amplified by roughly the product of the intermediate levels
    CHECK(ta.to_double() == doctest::Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("f_iter monotone") {
  for (int n = 0; n <= 10; ++n) {
    TowerReal prev;
    bool first = true;
    for (double x = 0.5; x <= 50.0; x += 0.37) {
      TowerReal cur = f_iter(TowerReal::from_double(x), n);
      if (!first) CHECK(prev < cur);
      prev = cur;
      first = false;
    }
  }
}

TEST_CASE("tower_ln") {
  CHECK(tower_ln(TowerReal::from_double(std::exp(1.0))).to_double() == doctest::Approx(1.0));
  CHECK(tower_ln(TowerReal::from_double(1.0)).to_double() == 0.0);
  TowerReal f2 = f_iter(TowerReal::from_double(3), 2);
  double direct = std::log(std::expm1(std::expm1(3.0)));
  CHECK(tower_ln(f2).to_double() == doctest::Approx(direct).epsilon(1e-12));
  CHECK(tower_ln(f2).to_double() == doctest::Approx(19.08553685).epsilon(1e-8));
  CHECK_THROWS_AS(tower_ln(TowerReal::from_double(0.0)), DomainError);
  CHECK_THROWS_AS(tower_ln(TowerReal::from_double(-1.0)), DomainError);
  // agreement with machine ln over a range of levels
  for (double r = 1.0; r < 1.7; r += 0.05) {
    for (long L = 1; L <= 4; ++L) {
      TowerReal x = TowerReal::make(L, r);
      double xd = x.to_double();
      if (!std::isfinite(xd)) continue;
      CHECK(tower_ln(x).to_double() == doctest::Approx(std::log(xd)).epsilon(1e-12));
    }
  }
  // deep level: ln F^L(r) = F^{L-1}(r) up to a vanishing correction
  TowerReal deep = TowerReal::make(9, 1.2);
  CHECK(tower_ln(deep) == TowerReal::make(8, 1.2));
}

TEST_CASE("tower arithmetic beyond machine range") {
  TowerReal a = TowerReal::make(5, 1.3);  // far past 1e300
  CHECK(!a.fits());
  CHECK(tower_exp(tower_ln(a)) == a);
  CHECK(add_const(a, 5.0) == a);
  CHECK(tower_sub(a, a).to_double() == 0.0);
  CHECK(tower_add(a, TowerReal::from_double(3)) == a);
  TowerReal two_a = tower_add(a, a);
  // ln 2 is invisible next to ln a at this height
  CHECK(two_a == a);
  // ln(2a) - ln(a) = ln 2 for a = e^{1000}
  TowerReal e1000 = tower_exp(TowerReal::from_double(1000));
  CHECK(tower_ln(tower_add(e1000, e1000)).to_double() == doctest::Approx(1000 + std::log(2.0)).epsilon(1e-14));
  CHECK(tower_ln(mul_const(e1000, 3.0)).to_double() == doctest::Approx(1000 + std::log(3.0)).epsilon(1e-14));
  CHECK(tower_ln(tower_sub(mul_const(e1000, 3.0), e1000)).to_double() ==
        doctest::Approx(1000 + std::log(2.0)).epsilon(1e-13));
  CHECK(tower_ln(exp_lambda(TowerReal::from_double(800), 2.0)).to_double() ==
        doctest::Approx(800 + std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(tower_sub(e1000, mul_const(e1000, 2.0)), DomainError);
}

TEST_CASE("STower and XReal") {
  STower a = STower::from_double(-3.5), b = STower::from_double(1.25);
  CHECK((a + b).to_double() == doctest::Approx(-2.25));
  CHECK((a - a).sign == 0);
  CHECK(compare(a, b) < 0);

  XReal x = XReal::from_double(3.0), y = XReal::from_double(-0.5);
  CHECK((x * y).to_double() == doctest::Approx(-1.5));
  CHECK((x / y).to_double() == doctest::Approx(-6.0));
  CHECK((x + y).to_double() == doctest::Approx(2.5));
  CHECK((x - x).sign() == 0);
  CHECK(y < x);

  // e^{-2000} and e^{2000}: product is 1, sum dominated by the larger
  XReal tiny = XReal::exp_of(STower::from_double(-2000));
  XReal huge = XReal::exp_of(STower::from_double(2000));
  CHECK(tiny.to_double() == 0.0);
  CHECK(std::isinf(huge.to_double()));
  CHECK((tiny * huge).to_double() == doctest::Approx(1.0));
  CHECK(compare((huge + tiny), huge) == 0);
  CHECK(((huge + huge).lg().to_double()) == doctest::Approx(2000 + std::log(2.0)));
  CHECK(tiny > XReal());
  CHECK(-tiny < XReal());
  XReal back = XReal::from_tower(huge.to_tower());
  CHECK(back.lg().to_double() == doctest::Approx(2000).epsilon(1e-14));
}

TEST_CASE("x maps agree with double maps in range") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-30, 30), im(-20, 20);
  for (int i = 0; i < 500; ++i) {
    ComplexPoint z(re(rng), im(rng));
    ComplexPoint e = exp_map(z, 1.5);
    ComplexPoint xe = x_exp_map(XPoint::from(z), 1.5).to_complex();
    CHECK(std::abs(e - xe) <= 1e-12 * std::abs(e));
    long k = strip_of(z.imag());
    if (e.real() < 0 && std::fabs(e.imag() / 1.5) <= 1e-14) continue;
    ComplexPoint l = inverse_branch(e, k, 1.5);
    ComplexPoint xl = x_inverse_branch(XPoint::from(e), k, 1.5).to_complex();
    CHECK(std::abs(l - xl) <= 1e-11 * std::max(1.0, std::abs(l)));
  }
}

TEST_CASE("x maps past machine range") {
  // log of (e^{5000}, e^{5000} * 1e-20): Re = 5000, Im ~ 1e-20
  XPoint z{XReal::exp_of(STower::from_double(5000)), XReal::exp_of(STower::from_double(5000 + std::log(1e-20)))};
  XPoint w = x_inverse_branch(z, 0, 1.0);
  CHECK(w.re.to_double() == doctest::Approx(5000));
  CHECK(w.im.to_double() == doctest::Approx(1e-20).epsilon(1e-10));
  // exp keeps tiny imaginary parts exactly proportional
  XPoint back = x_exp_map(w, 1.0);
  CHECK((back.im / back.re).to_double() == doctest::Approx(1e-20).epsilon(1e-10));
  CHECK_THROWS_AS(x_inverse_branch({XReal::from_double(-1), XReal()}, 0, 1.0), BranchCut);
}

TEST_CASE("fixed points") {
  FixedPointPair fp = find_fixed_points(1.0);
  CHECK(fp.q_plus.real() == doctest::Approx(0.3181315).epsilon(1e-6));
  CHECK(fp.q_plus.imag() == doctest::Approx(1.3372357).epsilon(1e-6));
  CHECK(fp.q_minus == std::conj(fp.q_plus));
  for (double lam : {0.4, 1.0, 2.0, 10.0}) {
    FixedPointPair f = find_fixed_points(lam);
    CHECK(std::abs(exp_map(f.q_plus, lam) - f.q_plus) < 1e-12);
    CHECK(std::abs(exp_map(f.q_minus, lam) - f.q_minus) < 1e-12);
    CHECK(f.q_plus.imag() > 0);
    CHECK(f.q_plus.imag() < kPi);
    CHECK(f.multiplier_modulus > 1.0);
    CHECK(f.multiplier_modulus == doctest::Approx(std::abs(f.q_plus)));
  }
  CHECK_THROWS_AS(find_fixed_points(0.2), DomainError);
}

TEST_CASE("F^n(y) > A F^n(x) when y = 1.01 A x") {
  for (double x : {2.1, 3.0, 5.0}) {
    for (double A : {2.1, 3.0, 5.0}) {
      double y = A * x * 1.01;
      for (int n = 1; n <= 6; ++n) {
        TowerReal fy = f_iter(TowerReal::from_double(y), n);
        TowerReal afx = mul_const(f_iter(TowerReal::from_double(x), n), A);
        CHECK(fy > afx);
      }
    }
  }
}

TEST_CASE("imaginary part bounded by derivative along orbit") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (double lam : {0.5, 1.0, 2.0}) {
    for (int trial = 0; trial < 300; ++trial) {
      ComplexPoint z(u(rng), u(rng));
      double deriv = 1.0;
      ComplexPoint w = z;
      for (int n = 1; n <= 6; ++n) {
        if (w.real() > 600) break;
        w = exp_map(w, lam);
        deriv *= std::abs(w);  // |E'(w_{n-1})| = |w_n|
        CHECK(std::fabs(w.imag()) <= deriv * (1 + 1e-12));
      }
    }
  }
}
