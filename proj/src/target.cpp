#include "expdyn/target.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "expdyn/hair.hpp"

namespace expdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this F^n(theta) the ladder entry is measured on traced hairs; above it
// the remainder of the hair is far below double resolution.
constexpr double kTraceLimit = 1e8;

HairOptions relaxed_options() {
  HairOptions o;
  o.enforce_threshold = false;
  o.tolerance = 1e-6;
  return o;
}

double f_double(double x, long n) {
  for (long i = 0; i < n && std::isfinite(x); ++i) x = std::expm1(x);
  return x;
}

double margin_a(const TargetLadder& L, long n) {
  const LadderValue& lo = L.a_seq.at(static_cast<std::size_t>(n));
  const LadderValue& hi = L.a_seq.at(static_cast<std::size_t>(n) + 1);
  const double lnl = std::log(L.lambda);
  if (hi.n == 0) {
    double a1 = hi.value().to_double(), a0 = lo.value().to_double();
    if (!(a1 > 1.0)) return -kInf;
    return std::log(a1 - 1.0) - lnl - (a0 - 1.0);
  }
  // a_{n+1} - 1 = e^t + c' - 2 with t = F^{n'-1}(base)
  TowerReal t = f_iter(hi.base, hi.n - 1);
  double td = t.to_double();
  double corr = std::log1p((hi.c - 2.0) * std::exp(-td));
  if (lo.n == hi.n - 1 && lo.base == hi.base) return corr - lnl - lo.c + 1.0;
  if (!std::isfinite(td)) return kNaN;
  return td + corr - lnl - (lo.value().to_double() - 1.0);
}

double margin_b(const TargetLadder& L, long m) {
  // E(b_m + 1) = e^2 B with B = E^{m+2}(zeta) = b_{m+1} - 1
  TowerReal B = add_const(L.b(m + 1), -1.0);
  double inv = std::exp(-tower_ln(B).to_double());
  return 2.0 + std::log1p(-std::exp(-2.0) * inv) - std::log1p(2.0 * inv);
}

double margin_c(const TargetLadder& L, long n, long m) {
  double y = (2.0 * static_cast<double>(L.M_at(n + 1)) + 1.0) * kPi;
  return std::log(2.0) + std::log(L.lambda) + L.b(m).to_double() + 1.0 - std::log(y * y + 1.0);
}

std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return {};
}

}  // namespace

double tower_height(const TowerReal& x) {
  if (x.level() == 0) return std::max(0.0, x.residual() - 1.0) / (TowerReal::kBandHi - 1.0);
  return static_cast<double>(x.level()) + (x.residual() - 1.0) / (TowerReal::kBandHi - 1.0);
}

TowerReal from_tower_height(double h) {
  double lv = std::floor(h);
  double r = 1.0 + (h - lv) * (TowerReal::kBandHi - 1.0);
  return TowerReal::make(static_cast<long>(lv), r);
}

TargetLadder build_ladder(double lambda, double zeta, long M, long p, long n_max, int sample_budget,
                          const std::optional<ItinerarySpec>& extra, std::uint64_t seed) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  if (M < 1 || p < 0 || n_max < 0 || sample_budget < 0) throw DomainError("bad ladder parameters");
  TargetLadder L;
  L.lambda = lambda;
  L.zeta = zeta;
  L.M = M;
  L.p = p;

  std::vector<ItinerarySpec> candidates = {constant_itinerary({M}), constant_itinerary({-M}),
                                           constant_itinerary({M, -M})};
  for (int i = 0; i < sample_budget; ++i)
    candidates.push_back(random_linear_growth(M, p, 16, 4, seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i)));
  if (extra) candidates.push_back(*extra);

  const HairOptions opt = relaxed_options();
  for (const ItinerarySpec& s : candidates) {
    try {
      L.theta.push_back(find_theta(s, zeta, lambda, opt));
      L.family.push_back(s);
    } catch (const NoBracket&) {
      // a member without a crossing at this zeta has no base segment
    }
  }
  if (L.family.empty()) throw NoBracket("no family member reaches Re = zeta");
  L.theta_min = *std::min_element(L.theta.begin(), L.theta.end());

  const double lnl = std::log(lambda);
  L.a_seq.push_back({TowerReal::from_double(zeta), 0, 0.0});
  for (long n = 1; n <= n_max; ++n) {
    TowerReal t = f_iter(TowerReal::from_double(L.theta_min), n);
    if (t < TowerReal::from_double(kTraceLimit)) {
      // E^n(gamma_s(theta_s)) = gamma_{sigma^n s}(F^n(theta_s))
      double best = kInf;
      for (std::size_t i = 0; i < L.family.size(); ++i) {
        double eta = f_double(L.theta[i], n);
        if (!std::isfinite(eta)) continue;
        best = std::min(best, trace_point(shift(L.family[i], n), eta, kAutoDepth, lambda, opt).point.real());
      }
      L.a_seq.push_back({TowerReal::from_double(best), 0, 0.0});
    } else {
      L.a_seq.push_back({TowerReal::from_double(L.theta_min), n, -lnl});
    }
  }

  TowerReal e = TowerReal::from_double(zeta);
  for (long n = 0; n <= n_max + 1; ++n) {
    e = exp_lambda(e, lambda);
    L.b_seq.push_back(add_const(e, 1.0));
  }
  return L;
}

bool is_delta_vertical(const TowerReal& r, double delta, double y) {
  if (!(delta > 0) || !(y > 0)) throw DomainError("delta and y must be positive");
  return r >= TowerReal::from_double((y * y + delta * delta) / (2.0 * delta));
}

double vertical_growth_constant(long p, long /*M*/) {
  if (p < 1) throw DomainError("p must be at least 1");
  double w = 2.0 * static_cast<double>(p) + 1.0;
  return std::log((w * w * kPi * kPi + 1.0) / (kPi * kPi + 1.0));
}

bool ladder_vertical(const TargetLadder& ladder, long n) {
  double y = (2.0 * static_cast<double>(ladder.M_at(n + 1)) + 1.0) * kPi;
  return is_delta_vertical(exp_lambda(ladder.a(n), ladder.lambda), 1.0, y);
}

std::string Certificate::to_record() const {
  nlohmann::json j;
  j["check"] = check;
  j["n"] = n;
  j["k"] = k;
  j["margins"] = nlohmann::json::array();
  for (double m : margins) {
    std::string t = number_text(m);
    if (t.empty())
      j["margins"].push_back(m);
    else
      j["margins"].push_back(t);
  }
  j["pass"] = pass;
  return j.dump();
}

Certificate covering_check(const TargetLadder& ladder, long n, long k) {
  if (n < 0 || k < 0 || n + k + 1 >= ladder.size() || n + 1 >= ladder.size())
    throw DomainError("covering check outside the ladder range");
  Certificate c;
  c.check = "covering";
  c.n = n;
  c.k = k;
  c.margins = {margin_a(ladder, n), margin_b(ladder, n + k), margin_c(ladder, n, n + k)};
  c.pass = std::all_of(c.margins.begin(), c.margins.end(), [](double m) { return m > 0; });
  return c;
}

int passes_twice(const Polyline& curve, const TargetRect& rect) {
  if (curve.empty()) throw DomainError("empty curve");
  const double xl = rect.left().to_double(), xr = rect.right().to_double(), H = rect.height();
  if (!std::isfinite(xl) || !std::isfinite(xr)) return 0;  // an edge beyond machine range is never reached

  int count = 0;
  bool open = false, tl = false, tr = false;
  auto close = [&] {
    if (open && tl && tr) ++count;
    open = tl = tr = false;
  };
  auto touch = [&](ComplexPoint z) {
    tl = tl || z.real() <= xl;
    tr = tr || z.real() >= xr;
  };
  auto inside = [&](ComplexPoint z) {
    return z.real() >= xl && z.real() <= xr && std::fabs(z.imag()) <= H;
  };
  if (curve.size() == 1) {
    if (inside(curve[0])) {
      open = true;
      touch(curve[0]);
    }
    close();
    return count;
  }

  enum Edge { kNone, kLeft, kRight, kOther };
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    ComplexPoint P = curve[i], d = curve[i + 1] - curve[i];
    // Liang-Barsky clip against the closed rectangle.
    double t0 = 0, t1 = 1;
    Edge e0 = kNone, e1 = kNone;
    bool reject = false;
    const double pk[4] = {-d.real(), d.real(), -d.imag(), d.imag()};
    const double qk[4] = {P.real() - xl, xr - P.real(), P.imag() + H, H - P.imag()};
    const Edge ek[4] = {kLeft, kRight, kOther, kOther};
    for (int j = 0; j < 4 && !reject; ++j) {
      if (pk[j] == 0) {
        reject = qk[j] < 0;
        continue;
      }
      double t = qk[j] / pk[j];
      if (pk[j] < 0) {
        if (t > t0) t0 = t, e0 = ek[j];
      } else if (t < t1) {
        t1 = t, e1 = ek[j];
      }
    }
    if (reject || t0 > t1) {
      close();
      continue;
    }
    if (!(open && t0 == 0)) {
      close();
      open = true;
    }
    if (e0 == kNone)
      touch(P);
    else
      tl = tl || e0 == kLeft, tr = tr || e0 == kRight;
    if (e1 == kNone)
      touch(curve[i + 1]);
    else
      tl = tl || e1 == kLeft, tr = tr || e1 == kRight;
    if (t1 < 1) close();
  }
  close();
  return count;
}

int passes_twice(const std::vector<XPoint>& curve, const TargetRect& rect) {
  if (curve.empty()) throw DomainError("empty curve");
  const XReal xl = XReal::from_tower(rect.left()), xr = XReal::from_tower(rect.right());
  const XReal H = XReal::from_double(rect.height());
  enum Cls { kLft, kIn, kRgt, kOut };
  auto cls = [&](const XPoint& z) {
    if (z.im.abs() > H) return kOut;
    if (z.re < xl) return kLft;
    if (z.re > xr) return kRgt;
    return kIn;
  };
  int count = 0;
  bool open = false, tl = false, tr = false;
  auto close = [&] {
    if (open && tl && tr) ++count;
    open = tl = tr = false;
  };
  auto touch = [&](const XPoint& z) {
    tl = tl || compare(z.re, xl) == 0;
    tr = tr || compare(z.re, xr) == 0;
  };
  Cls prev = cls(curve[0]);
  if (prev == kIn) {
    open = true;
    touch(curve[0]);
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    Cls c = cls(curve[i]);
    switch (c) {
      case kOut:
        close();
        break;
      case kIn:
        if (!open) {
          open = true;
          tl = prev == kLft;
          tr = prev == kRgt;
        }
        touch(curve[i]);
        break;
      case kLft:
        if (open) {
          tl = true;
          close();
        } else if (prev == kRgt) {
          ++count;  // one segment spans the band
        }
        break;
      case kRgt:
        if (open) {
          tr = true;
          close();
        } else if (prev == kLft) {
          ++count;
        }
        break;
    }
    prev = c;
  }
  close();
  return count;
}

bool in_rect(const XPoint& z, const TargetRect& rect) {
  return z.re >= XReal::from_tower(rect.left()) && z.re <= XReal::from_tower(rect.right()) &&
         z.im.abs() <= XReal::from_double(rect.height());
}

Polyline NestedRegion::boundary() const {
  Polyline out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(c.front().to_complex());
  return out;
}

NestedRegion nested_region(const ItinerarySpec& s, long n, long k, const TargetLadder& ladder,
                           std::size_t max_points) {
  if (n < 1 || k < 0) throw DomainError("nested region needs n >= 1, k >= 0");
  if (n + k >= static_cast<long>(ladder.b_seq.size()) || n >= ladder.size())
    throw DomainError("nested region outside the ladder range");
  const TargetRect V = ladder.rect(n, n + k, n);
  const TowerReal A = V.left(), B = V.right();
  const double H = V.height();

  // Edge points are spaced uniformly in tower height along the horizontal edges,
  // which the n-fold logarithm maps to roughly uniform spacing after pullback.
  const std::size_t side = std::max<std::size_t>(16, max_points / 8);
  const std::size_t along = std::max<std::size_t>(16, (max_points - 2 * side) / 2);
  const double hA = tower_height(A), hB = tower_height(B);
  std::vector<XPoint> ring;
  auto at = [](const TowerReal& re, double im) { return XPoint{XReal::from_tower(re), XReal::from_double(im)}; };
  for (std::size_t i = 0; i < along; ++i) {  // bottom, left to right
    double h = hA + (hB - hA) * static_cast<double>(i) / static_cast<double>(along);
    ring.push_back(at(i == 0 ? A : from_tower_height(h), -H));
  }
  for (std::size_t i = 0; i < side; ++i) ring.push_back(at(B, -H + 2 * H * static_cast<double>(i) / static_cast<double>(side)));
  for (std::size_t i = 0; i < along; ++i) {  // top, right to left
    double h = hB - (hB - hA) * static_cast<double>(i) / static_cast<double>(along);
    ring.push_back(at(i == 0 ? B : from_tower_height(h), H));
  }
  for (std::size_t i = 0; i <= side; ++i) ring.push_back(at(A, H - 2 * H * static_cast<double>(i) / static_cast<double>(side)));

  NestedRegion out;
  out.n = n;
  out.k = k;
  const std::vector<Symbol> sym = s.take(n);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    std::vector<XPoint> chain(static_cast<std::size_t>(n) + 1);
    chain[static_cast<std::size_t>(n)] = ring[i];
    for (long j = n - 1; j >= 0; --j) {
      try {
        chain[static_cast<std::size_t>(j)] = x_inverse_branch(chain[static_cast<std::size_t>(j) + 1],
                                                              static_cast<long>(sym[static_cast<std::size_t>(j)]),
                                                              ladder.lambda);
      } catch (const BranchCut&) {
        throw BranchCut("rectangle meets a branch cut at pullback level " + std::to_string(j));
      }
    }
    out.chains.push_back(std::move(chain));
  }
  Polyline b = out.boundary();
  for (std::size_t i = 1; i < b.size(); ++i) out.max_gap = std::max(out.max_gap, std::abs(b[i] - b[i - 1]));
  if (!std::isfinite(out.max_gap)) out.max_gap = kInf;
  return out;
}

bool chain_in_region(const std::vector<XPoint>& chain, const ItinerarySpec& s, long m, long k,
                     const TargetLadder& ladder) {
  if (static_cast<long>(chain.size()) <= m) return false;
  for (long j = 0; j < m; ++j) {
    double im = chain[static_cast<std::size_t>(j)].im.to_double();
    if (!std::isfinite(im) || strip_of(im) != s.symbol_at(j)) return false;
  }
  if (m + k >= static_cast<long>(ladder.b_seq.size())) return false;
  return in_rect(chain[static_cast<std::size_t>(m)], ladder.rect(m, m + k, m));
}

}  // namespace expdyn
