#include "expdyn/xnum.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

namespace expdyn {

namespace {

constexpr double kHuge = 1e300;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExpMax = 709.78;

void require_finite(double x, const char* where) {
  if (!std::isfinite(x)) throw DomainError(std::string(where) + ": non-finite input");
}

}  // namespace

long strip_of(double im) { return static_cast<long>(std::ceil((im - kPi) / kTwoPi)); }

// ---------------------------------------------------------------- TowerReal

TowerReal TowerReal::from_double(double x) { return make(0, x); }

TowerReal TowerReal::make(long level, double r) {
  require_finite(r, "TowerReal");
  if (level < 0) throw DomainError("TowerReal: negative level");
  while (r >= kBandHi) {
    r = std::log1p(r);
    ++level;
  }
  while (level > 0 && r < kBandLo) {
    r = std::expm1(r);
    --level;
  }
  TowerReal t;
  t.level_ = level;
  t.r_ = r;
  return t;
}

TowerReal TowerReal::parse_literal(std::string_view text) {
  std::string s(text);
  long level = 0;
  double r = 0.0;
  if (std::sscanf(s.c_str(), "F^%ld(%lf)", &level, &r) == 2) return make(level, r);
  char* end = nullptr;
  r = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw DomainError("bad tower literal '" + s + "'");
  return from_double(r);
}

double TowerReal::to_double() const {
  double v = r_;
  for (long i = 0; i < level_ && std::isfinite(v); ++i) v = std::expm1(v);
  return v;
}

bool TowerReal::fits() const {
  double v = to_double();
  return std::isfinite(v) && std::fabs(v) < kHuge;
}

std::string TowerReal::literal() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "F^%ld(%.17g)", level_, r_);
  return buf;
}

int compare(const TowerReal& a, const TowerReal& b) {
  if (a.level_ != b.level_) return a.level_ < b.level_ ? -1 : 1;
  if (a.r_ == b.r_) return 0;
  return a.r_ < b.r_ ? -1 : 1;
}

TowerReal f_iter(const TowerReal& x, long n) { return TowerReal::make(x.level() + n, x.residual()); }

TowerReal add_const(const TowerReal& a, double c) {
  require_finite(c, "add_const");
  if (c == 0.0) return a;
  if (a.fits()) return TowerReal::from_double(a.to_double() + c);
  // a = e^t - 1 with t huge: a + c = e^{t + log1p(c e^{-t})} - 1.
  TowerReal t = TowerReal::make(a.level() - 1, a.residual());
  double td = t.to_double();
  double x = std::copysign(std::exp(std::log(std::fabs(c)) - td), c);
  if (x == 0.0) return a;
  TowerReal t2 = add_const(t, std::log1p(x));
  return TowerReal::make(t2.level() + 1, t2.residual());
}

TowerReal mul_const(const TowerReal& a, double c) {
  if (!(c > 0.0)) throw DomainError("mul_const: factor must be positive");
  double v = a.to_double();
  if (std::isfinite(v) && std::fabs(v) * c < kHuge) return TowerReal::from_double(v * c);
  // c(e^t - 1) = F(t + ln c) + 1 - c
  TowerReal t = TowerReal::make(a.level() - 1, a.residual());
  TowerReal t2 = add_const(t, std::log(c));
  return add_const(TowerReal::make(t2.level() + 1, t2.residual()), 1.0 - c);
}

TowerReal tower_ln(const TowerReal& x) {
  if (x.level() == 0) {
    if (!(x.residual() > 0.0)) throw DomainError("tower_ln of non-positive value");
    return TowerReal::from_double(std::log(x.residual()));
  }
  // ln F(t) = t + ln(1 - e^{-t}), t = F^{L-1}(r) >= 1
  TowerReal t = TowerReal::make(x.level() - 1, x.residual());
  return add_const(t, std::log1p(-std::exp(-t.to_double())));
}

TowerReal tower_exp(const TowerReal& x) {
  if (x.level() == 0) {
    if (x.residual() < kExpMax) return TowerReal::from_double(std::exp(x.residual()));
  }
  return add_const(f_iter(x, 1), 1.0);
}

TowerReal exp_lambda(const TowerReal& x, double lambda) { return mul_const(tower_exp(x), lambda); }

TowerReal tower_add(const TowerReal& a, const TowerReal& b) {
  if (b.level() == 0) return add_const(a, b.residual());
  if (a.level() == 0) return add_const(b, a.residual());
  double ad = a.to_double(), bd = b.to_double();
  if (ad < kHuge && bd < kHuge) return TowerReal::from_double(ad + bd);
  const TowerReal& hi = a >= b ? a : b;
  const TowerReal& lo = a >= b ? b : a;
  TowerReal lhi = tower_ln(hi), llo = tower_ln(lo);
  double d = tower_sub(lhi, llo).to_double();
  double corr = std::log1p(std::exp(-d));
  if (corr == 0.0) return hi;
  return tower_exp(add_const(lhi, corr));
}

TowerReal tower_sub(const TowerReal& a, const TowerReal& b) {
  if (b.level() == 0) return add_const(a, -b.residual());
  double bd = b.to_double();
  if (a.level() == 0) {
    double v = a.residual() - bd;
    require_finite(v, "tower_sub");
    return TowerReal::from_double(v);
  }
  double ad = a.to_double();
  if (ad < kHuge && bd < kHuge) return TowerReal::from_double(ad - bd);
  int c = compare(a, b);
  if (c == 0) return TowerReal();
  if (c < 0) throw DomainError("tower_sub: negative result out of machine range");
  TowerReal la = tower_ln(a), lb = tower_ln(b);
  double d = tower_sub(la, lb).to_double();
  double corr = std::log1p(-std::exp(-d));
  if (corr == 0.0) return a;
  if (!std::isfinite(corr)) return TowerReal();
  return tower_exp(add_const(la, corr));
}

// ---------------------------------------------------------------- STower

STower STower::from_double(double x) {
  require_finite(x, "STower");
  if (x == 0.0) return {};
  return {x > 0 ? 1 : -1, TowerReal::from_double(std::fabs(x))};
}

STower STower::from_tower(const TowerReal& t) {
  if (t.level() == 0) return from_double(t.residual());
  return {1, t};
}

double STower::to_double() const { return sign == 0 ? 0.0 : sign * mag.to_double(); }

std::string STower::literal() const {
  if (sign == 0) return "0";
  return (sign < 0 ? "-" : "") + mag.literal();
}

int compare(const STower& a, const STower& b) {
  if (a.sign != b.sign) return a.sign < b.sign ? -1 : 1;
  if (a.sign == 0) return 0;
  int c = compare(a.mag, b.mag);
  return a.sign > 0 ? c : -c;
}

STower operator+(const STower& a, const STower& b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.mag.fits() && b.mag.fits()) return STower::from_double(a.to_double() + b.to_double());
  if (a.sign == b.sign) return {a.sign, tower_add(a.mag, b.mag)};
  int c = compare(a.mag, b.mag);
  if (c == 0) return {};
  const STower& big = c > 0 ? a : b;
  const STower& small = c > 0 ? b : a;
  TowerReal m = tower_sub(big.mag, small.mag);
  if (m.level() == 0 && m.residual() <= 0.0) return {};
  return {big.sign, m};
}

STower operator-(const STower& a, const STower& b) { return a + (-b); }

STower operator+(const STower& a, double c) {
  if (c == 0.0) return a;
  if (a.sign == 0 || a.mag.fits()) return STower::from_double(a.to_double() + c);
  if (a.sign > 0) return {1, add_const(a.mag, c)};
  return {-1, add_const(a.mag, -c)};
}

// ---------------------------------------------------------------- XReal

XReal XReal::from_double(double x) {
  require_finite(x, "XReal");
  if (x == 0.0) return {};
  return XReal(x > 0 ? 1 : -1, STower::from_double(std::log(std::fabs(x))));
}

XReal XReal::from_stower(const STower& v) {
  if (v.sign == 0) return {};
  return XReal(v.sign, STower::from_tower(tower_ln(v.mag)));
}

double XReal::to_double() const {
  if (sign_ == 0) return 0.0;
  double l = lg_.to_double();
  if (l > kExpMax) return sign_ * kInf;
  return sign_ * std::exp(l);
}

STower XReal::to_stower() const {
  if (sign_ == 0) return {};
  if (lg_.sign <= 0 || lg_.to_double() < kExpMax) return STower::from_double(to_double());
  return {sign_, tower_exp(lg_.mag)};
}

TowerReal XReal::to_tower() const {
  STower s = to_stower();
  if (s.sign >= 0) return s.mag;
  if (!s.mag.fits()) throw DomainError("XReal::to_tower: large negative value");
  return TowerReal::from_double(s.to_double());
}

std::string XReal::literal() const {
  if (sign_ == 0) return "0";
  return std::string(sign_ < 0 ? "-" : "") + "exp(" + lg_.literal() + ")";
}

XReal operator*(const XReal& a, const XReal& b) {
  if (a.sign_ == 0 || b.sign_ == 0) return {};
  return XReal(a.sign_ * b.sign_, a.lg_ + b.lg_);
}

XReal operator/(const XReal& a, const XReal& b) {
  if (b.sign_ == 0) throw DomainError("XReal division by zero");
  if (a.sign_ == 0) return {};
  return XReal(a.sign_ * b.sign_, a.lg_ - b.lg_);
}

XReal operator+(const XReal& a, const XReal& b) {
  if (a.sign_ == 0) return b;
  if (b.sign_ == 0) return a;
  double la = a.lg_.to_double(), lb = b.lg_.to_double();
  if (std::fabs(la) < 700.0 && std::fabs(lb) < 700.0) return XReal::from_double(a.to_double() + b.to_double());
  int c = compare(a.lg_, b.lg_);
  const XReal& big = c >= 0 ? a : b;
  const XReal& small = c >= 0 ? b : a;
  double d = (small.lg_ - big.lg_).to_double();  // <= 0
  if (a.sign_ == b.sign_) return XReal(big.sign_, big.lg_ + std::log1p(std::exp(d)));
  if (d == 0.0) return {};
  double corr = std::log1p(-std::exp(d));
  if (!std::isfinite(corr)) return {};
  return XReal(big.sign_, big.lg_ + corr);
}

int compare(const XReal& a, const XReal& b) {
  if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
  if (a.sign_ == 0) return 0;
  int c = compare(a.lg_, b.lg_);
  return a.sign_ > 0 ? c : -c;
}

// ---------------------------------------------------------------- maps

ComplexPoint exp_map(ComplexPoint z, double lambda) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  if (z.real() > kOverflowRe) throw OverflowToTower("Re(z) = " + std::to_string(z.real()));
  return lambda * std::exp(z);
}

ComplexPoint inverse_branch(ComplexPoint z, long k, double lambda) {
  if (z == ComplexPoint(0.0, 0.0)) throw DomainError("inverse branch at 0");
  ComplexPoint w = z / lambda;
  if (w.real() < 0.0 && std::fabs(w.imag()) <= 1e-14) throw BranchCut("point on the negative real ray");
  ComplexPoint l = std::log(w);
  return {l.real(), l.imag() + kTwoPi * static_cast<double>(k)};
}

XPoint x_exp_map(const XPoint& z, double lambda) {
  XReal mod = XReal::exp_of(z.re.to_stower() + std::log(lambda));
  double y = z.im.to_double();
  if (!std::isfinite(y) || std::fabs(y) > 1e15) throw DomainError("x_exp_map: imaginary part has no usable angle");
  if (std::fabs(y) < 1e-8) {
    // cos y = 1 to double precision; keep sin y ~ y exactly in extended range.
    return {mod, mod * z.im};
  }
  return {mod * XReal::from_double(std::cos(y)), mod * XReal::from_double(std::sin(y))};
}

XPoint x_inverse_branch(const XPoint& z, long k, double lambda) {
  const XReal& x = z.re;
  const XReal& y = z.im;
  if (x.sign() == 0 && y.sign() == 0) throw DomainError("inverse branch at 0");
  if (y.sign() == 0 && x.sign() < 0) throw BranchCut("point on the negative real ray");

  // ln|z| = ln max(|x|,|y|) + 0.5 log1p(ratio^2)
  STower lmax, lmin;
  bool has_min = x.sign() != 0 && y.sign() != 0;
  if (x.sign() == 0) {
    lmax = y.lg();
  } else if (y.sign() == 0) {
    lmax = x.lg();
  } else if (compare(x.lg(), y.lg()) >= 0) {
    lmax = x.lg();
    lmin = y.lg();
  } else {
    lmax = y.lg();
    lmin = x.lg();
  }
  double corr = 0.0;
  if (has_min) {
    double lr = (lmin - lmax).to_double();
    corr = 0.5 * std::log1p(std::exp(2.0 * lr));
  }
  XReal re = XReal::from_stower(lmax + (corr - std::log(lambda)));

  XReal arg;
  if (x.sign() == 0) {
    arg = XReal::from_double(y.sign() * kPi / 2);
  } else if (y.sign() == 0) {
    arg = XReal();  // x > 0
  } else {
    XReal q = y / x;
    double lq = q.lg().to_double();
    if (lq < std::log(1e-8)) {
      double qa = std::fabs(q.to_double());
      if (x.sign() > 0) {
        arg = q;  // atan(q) = q to double precision
      } else {
        arg = XReal::from_double(y.sign() * (kPi - qa));
      }
    } else if (lq > std::log(1e8)) {
      double inv = 1.0 / std::fabs(q.to_double());  // 0 if q overflowed
      arg = XReal::from_double(y.sign() * (kPi / 2 + (x.sign() > 0 ? -inv : inv)));
    } else {
      double qd = q.to_double();
      double a = std::atan(qd);
      if (x.sign() < 0) a += (y.sign() > 0 ? kPi : -kPi);
      arg = XReal::from_double(a);
    }
  }
  if (k != 0) arg = XReal::from_double(arg.to_double() + kTwoPi * static_cast<double>(k));
  return {re, arg};
}

FixedPointPair find_fixed_points(double lambda) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  auto newton = [lambda](ComplexPoint z) -> std::pair<bool, ComplexPoint> {
    for (int it = 0; it < 100; ++it) {
      ComplexPoint e = lambda * std::exp(z);
      ComplexPoint step = (e - z) / (e - 1.0);
      z -= step;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return {false, z};
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) return {true, z};
    }
    return {false, z};
  };
  auto good = [](ComplexPoint z) { return z.imag() > 0.0 && z.imag() < kPi; };
  ComplexPoint seed = lambda == 1.0 ? ComplexPoint(0.3, 1.3) : ComplexPoint(std::log(lambda), 1.3);
  auto [ok, q] = newton(seed);
  if (!ok || !good(q)) {
    // Continuation from lambda = 1 in small steps of log(lambda).
    q = ComplexPoint(0.3, 1.3);
    const int steps = 64;
    ok = true;
    for (int i = 1; i <= steps && ok; ++i) {
      double li = std::exp(std::log(lambda) * i / steps);
      ComplexPoint z = q;
      for (int it = 0; it < 100; ++it) {
        ComplexPoint e = li * std::exp(z);
        ComplexPoint step = (e - z) / (e - 1.0);
        z -= step;
        if (std::abs(step) < 1e-15) break;
      }
      ok = good(z);
      q = z;
    }
    if (ok) std::tie(ok, q) = newton(q);
    if (!ok || !good(q)) throw NoConvergence("fixed point Newton failed for lambda=" + std::to_string(lambda));
  }
  FixedPointPair out;
  out.q_plus = q;
  out.q_minus = std::conj(q);
  out.multiplier_modulus = std::abs(lambda * std::exp(q));
  return out;
}

}  // namespace expdyn
