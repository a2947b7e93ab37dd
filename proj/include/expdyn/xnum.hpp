#pragma once

#include <complex>
#include <string>
#include <string_view>

#include "expdyn/errors.hpp"

namespace expdyn {

using ComplexPoint = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
// Re(z) above this raises OverflowToTower in exp_map.
inline constexpr double kOverflowRe = 700.0;

// Index k of the strip R_k = {(2k-1)pi < Im <= (2k+1)pi}.
long strip_of(double im);

// F^level(residual), F(t) = e^t - 1. Level 0 holds any machine real below F(1);
// for level > 0 the residual lies in [1, F(1)), so every value >= F(1) has exactly
// one representation and ordering is lexicographic in (level, residual).
class TowerReal {
 public:
  static constexpr double kBandLo = 1.0;
  static constexpr double kBandHi = 1.71828182845904523536;  // F(1)

  TowerReal() = default;
  static TowerReal from_double(double x);
  // Normalizes F^level(r) for any finite r.
  static TowerReal make(long level, double r);
  // Accepts "F^L(r)" or a plain number.
  static TowerReal parse_literal(std::string_view text);

  long level() const { return level_; }
  double residual() const { return r_; }
  // Materializes the value; +inf once it leaves machine range.
  double to_double() const;
  bool fits() const;
  std::string literal() const;

  friend int compare(const TowerReal& a, const TowerReal& b);
  friend bool operator==(const TowerReal& a, const TowerReal& b) { return compare(a, b) == 0; }
  friend bool operator<(const TowerReal& a, const TowerReal& b) { return compare(a, b) < 0; }
  friend bool operator>(const TowerReal& a, const TowerReal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const TowerReal& a, const TowerReal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const TowerReal& a, const TowerReal& b) { return compare(a, b) >= 0; }

 private:
  long level_ = 0;
  double r_ = 0.0;
};

TowerReal f_iter(const TowerReal& x, long n);
TowerReal tower_ln(const TowerReal& x);
TowerReal tower_exp(const TowerReal& x);
TowerReal add_const(const TowerReal& a, double c);
TowerReal mul_const(const TowerReal& a, double c);  // c > 0
TowerReal tower_add(const TowerReal& a, const TowerReal& b);
// a - b; throws DomainError when the result is negative and outside machine range.
TowerReal tower_sub(const TowerReal& a, const TowerReal& b);
// E_lambda(x) = lambda * e^x on the real line.
TowerReal exp_lambda(const TowerReal& x, double lambda);

// Signed tower: sign * mag with mag >= 0.
struct STower {
  int sign = 0;
  TowerReal mag;

  static STower from_double(double x);
  static STower from_tower(const TowerReal& t);
  double to_double() const;
  std::string literal() const;
  STower operator-() const { return STower{-sign, mag}; }
};
STower operator+(const STower& a, const STower& b);
STower operator-(const STower& a, const STower& b);
STower operator+(const STower& a, double c);
int compare(const STower& a, const STower& b);

// sign * exp(lg): covers values far beyond machine range in both directions.
class XReal {
 public:
  XReal() = default;
  static XReal from_double(double x);
  static XReal from_stower(const STower& v);
  static XReal from_tower(const TowerReal& t) { return from_stower(STower::from_tower(t)); }
  // e^y
  static XReal exp_of(const STower& y) { return XReal(1, y); }

  int sign() const { return sign_; }
  const STower& lg() const { return lg_; }  // ln|x|, meaningless when sign() == 0
  double to_double() const;
  STower to_stower() const;
  TowerReal to_tower() const;
  std::string literal() const;

  XReal operator-() const { return XReal(-sign_, lg_); }
  XReal abs() const { return XReal(sign_ == 0 ? 0 : 1, lg_); }
  friend XReal operator*(const XReal& a, const XReal& b);
  friend XReal operator/(const XReal& a, const XReal& b);
  friend XReal operator+(const XReal& a, const XReal& b);
  friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }
  friend int compare(const XReal& a, const XReal& b);
  friend bool operator<(const XReal& a, const XReal& b) { return compare(a, b) < 0; }
  friend bool operator>(const XReal& a, const XReal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const XReal& a, const XReal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const XReal& a, const XReal& b) { return compare(a, b) >= 0; }

 private:
  XReal(int s, STower lg) : sign_(s), lg_(std::move(lg)) {}
  int sign_ = 0;
  STower lg_;
};

struct XPoint {
  XReal re;
  XReal im;
  static XPoint from(ComplexPoint z) { return {XReal::from_double(z.real()), XReal::from_double(z.imag())}; }
  ComplexPoint to_complex() const { return {re.to_double(), im.to_double()}; }
};

ComplexPoint exp_map(ComplexPoint z, double lambda);
ComplexPoint inverse_branch(ComplexPoint z, long k, double lambda);

// Extended-range versions. The imaginary part of x_exp_map's argument must be
// machine-sized (its angle is needed); huge real parts are fine.
XPoint x_exp_map(const XPoint& z, double lambda);
XPoint x_inverse_branch(const XPoint& z, long k, double lambda);

struct FixedPointPair {
  ComplexPoint q_plus;
  ComplexPoint q_minus;
  double multiplier_modulus = 0.0;
};

FixedPointPair find_fixed_points(double lambda);

}  // namespace expdyn
