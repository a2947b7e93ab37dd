#include <algorithm>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "expdyn/dynamics.hpp"
#include "expdyn/hair.hpp"
#include "expdyn/target.hpp"

namespace expdyn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_lambda(double lambda) {
  if (!(lambda > 1.0 / std::exp(1.0)) || !std::isfinite(lambda)) throw DomainError("lambda must exceed 1/e");
}

// E^k(0) in doubles; +inf once it leaves machine range.
double orbit0(long k, double lambda) {
  double x = 0.0;
  for (long i = 0; i < k && std::isfinite(x); ++i) x = x > kOverflowRe ? INFINITY : lambda * std::exp(x);
  return x;
}

TowerReal orbit0_tower(long k, double lambda) {
  TowerReal x = TowerReal::from_double(0.0);
  for (long i = 0; i < k; ++i) x = exp_lambda(x, lambda);
  return x;
}

// Distance from Im to the nearest strip boundary (2k+1) pi.
double strip_margin(double im) {
  double t = std::fmod(std::fabs(im) + kPi, kTwoPi);
  return std::min(t, kTwoPi - t);
}

std::string fmt(double v, int prec = 17) {
  std::ostringstream o;
  o << std::setprecision(prec) << v;
  return o.str();
}

std::string fmt_point(ComplexPoint z) { return "(" + fmt(z.real()) + "," + fmt(z.imag()) + ")"; }

// Runs of at least three steps following 0, E(0), E^2(0) within distance 1.
std::vector<long> shadow_runs(const std::vector<OrbitStep>& steps, double lambda) {
  std::vector<long> starts;
  const long n = static_cast<long>(steps.size());
  for (long k = 0; k < n;) {
    long len = 0;
    while (k + len < n && !steps[static_cast<std::size_t>(k + len)].marker) {
      double target = orbit0(len, lambda);
      if (!std::isfinite(target) || std::abs(steps[static_cast<std::size_t>(k + len)].point - target) >= 1.0) break;
      ++len;
    }
    if (len >= 3) {
      starts.push_back(k);
      k += len;
    } else {
      ++k;
    }
  }
  return starts;
}

// Longest run of consecutive T-level increases.
long level_increases(const std::vector<OrbitStep>& steps) {
  long best = 0, cur = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const auto &a = steps[i - 1].t_level, &b = steps[i].t_level;
    bool up = b && (!a || *b > *a);
    cur = up ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}

double diameter(const std::vector<ComplexPoint>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
  return d;
}

}  // namespace

std::string to_string(OrbitVerdict v) {
  switch (v) {
    case OrbitVerdict::Escaping: return "escaping";
    case OrbitVerdict::ShadowingOrbit0: return "shadowing_orbit0";
    case OrbitVerdict::BoundedWindow: return "bounded_window";
    case OrbitVerdict::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

std::string to_string(OmegaClass c) {
  switch (c) {
    case OmegaClass::Escaping: return "ESCAPING";
    case OmegaClass::Orbit0Infinity: return "ORBIT0_INFINITY";
    case OmegaClass::SingularCandidate: return "SINGULAR_CANDIDATE";
    case OmegaClass::Unresolved: return "UNRESOLVED";
  }
  return "?";
}

// ---------------------------------------------------------------- levels

TowerReal r_level(long n, double lambda) {
  check_lambda(lambda);
  if (n < 0) throw DomainError("negative level");
  if (n == 0) return TowerReal::from_double(-1.0);
  return add_const(orbit0_tower(n, lambda), -1.0);
}

std::optional<long> t_level(double x, double lambda) {
  check_lambda(lambda);
  if (!(x >= -1.0)) return std::nullopt;
  if (!std::isfinite(x)) return t_level(TowerReal::from_double(DBL_MAX), lambda);
  long n = 0;
  double next = lambda;  // E^{n+1}(0)
  while (next - 1.0 <= x) {
    ++n;
    next = next > kOverflowRe ? INFINITY : lambda * std::exp(next);
  }
  return n;
}

std::optional<long> t_level(const TowerReal& x, double lambda) {
  check_lambda(lambda);
  if (x.fits()) return t_level(x.to_double(), lambda);
  long n = 0;
  TowerReal next = TowerReal::from_double(lambda);
  while (add_const(next, -1.0) <= x) {
    ++n;
    next = exp_lambda(next, lambda);
  }
  return n;
}

// ---------------------------------------------------------------- orbit

void OrbitRecord::write_csv(std::ostream& os) const {
  os << "step,re,im,strip,t_level,marker\r\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const OrbitStep& s = steps[i];
    os << i << ',';
    if (s.marker) {
      os << (s.marker->sign < 0 ? "-" : "") << s.marker->magnitude().literal() << ",,";
    } else {
      os << fmt(s.point.real()) << ',' << fmt(s.point.imag()) << ',';
    }
    if (s.strip_known) os << s.strip;
    os << ',';
    if (s.t_level) os << *s.t_level;
    os << ',' << (s.marker ? 1 : 0) << "\r\n";
  }
}

OrbitRecord orbit(ComplexPoint z, double lambda, long n_max) {
  check_lambda(lambda);
  if (n_max < 0) throw DomainError("negative step budget");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("orbit start must be finite");

  OrbitRecord rec;
  rec.z0 = z;
  rec.lambda = lambda;

  const bool real_orbit = z.imag() == 0.0;
  OrbitStep cur;
  cur.point = z;
  cur.strip = strip_of(z.imag());
  cur.t_level = t_level(z.real(), lambda);
  cur.err = kEps * std::abs(z);
  rec.steps.push_back(cur);

  auto unresolved = [&](const OrbitStep& s) {
    if (real_orbit) return false;
    if (s.marker) return s.marker->strip_unknown;
    return s.err >= 0.1 || s.err >= strip_margin(s.point.imag());
  };

  for (long k = 0; k < n_max; ++k) {
    const OrbitStep& prev = rec.steps.back();
    if (unresolved(prev)) {
      if (rec.precision_horizon < 0) rec.precision_horizon = static_cast<long>(rec.steps.size()) - 1;
      if (!prev.marker || prev.marker->sign > 0) break;  // nothing about the next angle survives
    }
    OrbitStep next;
    if (prev.marker) {
      if (prev.marker->sign < 0) {
        // lambda e^{-huge}: below every double, angle irrelevant
        next.point = 0.0;
        next.err = DBL_MIN;
        next.strip = 0;
      } else {
        TowerMarker m;
        TowerReal mag = exp_lambda(prev.marker->magnitude(), lambda);
        m.level = mag.level();
        m.residual = mag.residual();
        m.strip_unknown = false;  // real orbit
        next.marker = m;
        next.strip = 0;
      }
    } else if (prev.point.real() > kOverflowRe) {
      double x = prev.point.real(), y = prev.point.imag();
      double c = std::cos(y);
      if (!real_orbit && prev.err >= std::fabs(c)) {
        if (rec.precision_horizon < 0) rec.precision_horizon = static_cast<long>(rec.steps.size());
        break;
      }
      TowerMarker m;
      m.sign = c < 0 ? -1 : 1;
      TowerReal mag = exp_lambda(TowerReal::from_double(x + std::log(std::fabs(c))), lambda);
      m.level = mag.level();
      m.residual = mag.residual();
      m.strip_unknown = !real_orbit;
      next.marker = m;
      next.strip_known = real_orbit;
      next.strip = 0;
    } else {
      next.point = exp_map(prev.point, lambda);
      if (real_orbit) next.point.imag(0.0);
      double mod = std::abs(next.point);
      next.err = mod * std::expm1(prev.err) + 2.0 * kEps * mod;
      next.strip = strip_of(next.point.imag());
    }
    if (next.marker) {
      if (next.marker->sign > 0) next.t_level = t_level(next.marker->magnitude(), lambda);
    } else {
      next.t_level = t_level(next.point.real(), lambda);
      if (unresolved(next)) next.strip_known = false;
    }
    rec.steps.push_back(next);
  }
  if (rec.precision_horizon < 0 && unresolved(rec.steps.back()))
    rec.precision_horizon = static_cast<long>(rec.steps.size()) - 1;

  rec.shadow_starts = shadow_runs(rec.steps, lambda);
  if (level_increases(rec.steps) >= 10) {
    rec.verdict = OrbitVerdict::Escaping;
  } else if (!rec.shadow_starts.empty()) {
    rec.verdict = OrbitVerdict::ShadowingOrbit0;
  } else {
    const double c = default_window(lambda);
    bool inside = rec.precision_horizon < 0;
    for (const OrbitStep& s : rec.steps) inside = inside && !s.marker && std::abs(s.point) <= c;
    rec.verdict = inside ? OrbitVerdict::BoundedWindow : OrbitVerdict::BudgetExhausted;
  }
  return rec;
}

// ---------------------------------------------------------------- shadowing

double log_rho(long j, long n, double lambda) {
  check_lambda(lambda);
  if (j < 0 || n < 0) throw DomainError("rho indices must be non-negative");
  double top = orbit0(n + 1, lambda);
  if (!std::isfinite(top)) return -INFINITY;
  double lr = std::log(lambda) - top / std::exp(1.0) + static_cast<double>(j + 1);
  // ln E^k(0) = ln(lambda) + E^{k-1}(0)
  for (long k = 1; k <= j; ++k) lr += std::log(lambda) + orbit0(k - 1, lambda);
  return lr;
}

double rho(long j, long n, double lambda) { return std::exp(log_rho(j, n, lambda)); }

long rho_threshold(double lambda) {
  for (long n = 0; n < 64; ++n) {
    bool ok = true;
    for (long j = 0; j <= n + 1 && ok; ++j) ok = log_rho(j, n, lambda) < 0.0;
    if (ok) return n;
  }
  throw NoConvergence("rho stays >= 1 for n < 64");
}

ShadowReport shadow_check(ComplexPoint z, long n, double lambda) {
  check_lambda(lambda);
  if (n < 0) throw DomainError("negative n");
  // E(r_n) = E^{n+1}(0) / e
  double er = orbit0(n + 1, lambda) / std::exp(1.0);
  if (!std::isfinite(er) || !std::isfinite(orbit0(n + 1, lambda)))
    throw HypothesisUnverifiable("E(r_" + std::to_string(n) + ") is beyond machine range");

  ShadowReport r;
  r.n = n;
  r.hypothesis = z.real() < -er + 1.0;
  r.all_within = true;
  ComplexPoint w = z;
  for (long j = 0; j <= n + 1; ++j) {
    if (w.real() > kOverflowRe) {
      r.all_within = false;
      return r;
    }
    w = exp_map(w, lambda);
    double rad = rho(j, n, lambda);
    double dist = std::abs(w - orbit0(j, lambda));
    r.radii.push_back(rad);
    r.distances.push_back(dist);
    r.all_within = r.all_within && dist < rad;
  }
  r.final_level = t_level(w.real(), lambda);  // w = E^{n+2}(z)
  return r;
}

long g_steps(long N, long m) {
  if (N < 0 || m < 0) throw DomainError("g needs non-negative arguments");
  return m * (N + 4) + m * (m - 1) / 2;
}

long vertical_ladder_threshold(double lambda, long M, long p, long m_check, long n_max) {
  check_lambda(lambda);
  if (M < 0 || p < 0 || m_check < 0) throw DomainError("bad ladder parameters");
  auto holds = [&](long N) {
    for (long m = 0; m <= m_check; ++m) {
      long g = g_steps(N, m);
      double y = (2.0 * static_cast<double>(M + (g + 1) * p) + 1.0) * kPi;
      if (!is_delta_vertical(exp_lambda(r_level(N + m, lambda), lambda), 1.0, y)) return false;
    }
    return true;
  };
  for (long N = 0; N <= n_max; ++N)
    if (holds(N) && holds(N + 1)) return N;
  throw NoConvergence("no ladder threshold below " + std::to_string(n_max));
}

long exp_inequality_threshold(double A, double B, long k, double lambda, long n_max) {
  check_lambda(lambda);
  if (!(A >= 0) || !(B >= 0) || k < 0 || !std::isfinite(A) || !std::isfinite(B))
    throw DomainError("exp inequality needs A, B >= 0 and k >= 0");
  std::vector<TowerReal> orb{TowerReal::from_double(0.0)};
  auto E = [&](long i) {
    while (static_cast<long>(orb.size()) <= i) orb.push_back(exp_lambda(orb.back(), lambda));
    return orb[static_cast<std::size_t>(i)];
  };
  auto holds = [&](long n) {
    TowerReal lhs = TowerReal::from_double(0.0);
    if (A > 0 && (n > 0 || k == 0)) {
      double lg = std::log(A) + static_cast<double>(k) * std::log(static_cast<double>(std::max(n, 1L)));
      lhs = lg < kOverflowRe ? TowerReal::from_double(std::exp(lg)) : tower_exp(TowerReal::from_double(lg));
    }
    if (B > 0) {
      TowerReal sum = TowerReal::from_double(0.0);
      for (long i = 0; i <= n; ++i) sum = tower_add(sum, E(i));
      lhs = tower_add(lhs, mul_const(sum, B));
    }
    return lhs < E(n + 1);
  };
  for (long N = 0; N <= n_max; ++N) {
    bool ok = true;
    for (long n = N; n <= N + 5 && ok; ++n) ok = holds(n);
    if (ok) return N;
  }
  throw NoConvergence("inequality not settled below " + std::to_string(n_max));
}

// ---------------------------------------------------------------- omega classification

double default_window(double lambda) {
  check_lambda(lambda);
  FixedPointPair q = find_fixed_points(lambda);
  // ln|w| over |w - q| <= 1 ranges over [ln(|q| - 1), ln(|q| + 1)]
  double r = std::abs(q.q_plus);
  double lo = r > 1.0 ? std::log(r - 1.0) : -INFINITY;
  double hi = std::log(r + 1.0);
  if (!std::isfinite(lo)) throw DomainError("unit disc around the fixed point contains 0");
  double extent = std::max(std::fabs(lo - std::log(lambda)), std::fabs(hi - std::log(lambda)));
  return extent + kTwoPi;
}

OmegaReport classify_omega(ComplexPoint z, const ItinerarySpec& s, double lambda, long budget,
                           std::optional<double> window) {
  check_lambda(lambda);
  if (budget < 1) throw DomainError("budget must be positive");
  const double c = window ? *window : default_window(lambda);

  OmegaReport rep;
  rep.orbit = orbit(z, lambda, budget);
  const auto& steps = rep.orbit.steps;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!steps[k].strip_known) continue;
    Symbol want = s.symbol_at(static_cast<long>(k));
    if (steps[k].strip != want)
      throw ItineraryMismatch("step " + std::to_string(k) + " lies in strip " + std::to_string(steps[k].strip) +
                              ", itinerary has " + std::to_string(want));
  }

  // Escape: sustained growth through the T_n, or the orbit reaches the tail of its hair.
  bool monotone = true;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const auto &a = steps[k - 1].t_level, &b = steps[k].t_level;
    if (a && (!b || *b < *a)) monotone = false;
  }
  if (level_increases(steps) >= 10) {
    rep.cls = OmegaClass::Escaping;
    rep.evidence = "10 consecutive T-level increases";
    return rep;
  }
  if (monotone) {
    for (long k = static_cast<long>(steps.size()) - 1; k >= 0; --k) {
      const OrbitStep& st = steps[static_cast<std::size_t>(k)];
      if (st.marker || !st.strip_known || st.err > 1e-6 || s.symbol_at(k) == 0) continue;
      ItinerarySpec sk = shift(s, k);
      double thr;
      try {
        thr = admissibility_threshold(sk, lambda);
      } catch (const Error&) {
        continue;
      }
      double eta = st.point.real() + std::log(lambda);
      if (!(eta >= thr) || eta > kOverflowRe) continue;
      HairOptions opt;
      opt.eta_star = thr;
      try {
        HairSample h;
        for (int it = 0; it < 6; ++it) {
          h = trace_point(sk, eta, kAutoDepth, lambda, opt);
          eta += st.point.real() - h.point.real();
          if (eta < thr) break;
        }
        double tol = 1e-6 * std::max(1.0, std::abs(st.point)) + st.err;
        if (std::abs(h.point - st.point) <= tol) {
          rep.cls = OmegaClass::Escaping;
          rep.evidence = "step " + std::to_string(k) + " lies on the hair tail at eta = " + fmt(eta, 10);
          return rep;
        }
      } catch (const Error&) {
      }
      break;
    }
  }

  // Returns to the window at every block marker reached while the orbit is resolved.
  long resolved = rep.orbit.precision_horizon < 0 ? static_cast<long>(steps.size()) : rep.orbit.precision_horizon;
  bool in_window = true;
  try {
    for (long j = 0;; ++j) {
      BlockMarkers bm = block_markers(s, j);
      if (bm.d >= resolved) break;
      const OrbitStep& st = steps[static_cast<std::size_t>(bm.d)];
      if (st.marker || std::fabs(st.point.real()) > c) {
        in_window = false;
        break;
      }
      ++rep.checked_markers;
    }
  } catch (const StructureError&) {
  }
  if (in_window && rep.checked_markers >= 2) {
    rep.cls = OmegaClass::SingularCandidate;
    rep.evidence = std::to_string(rep.checked_markers) + " block markers with |Re| <= " + fmt(c, 6);
    return rep;
  }

  const auto& runs = rep.orbit.shadow_starts;
  if (runs.size() >= 2) {
    long top = 0;
    for (const OrbitStep& st : steps)
      if (st.t_level) top = std::max(top, *st.t_level);
    if (top >= 3) {
      rep.cls = OmegaClass::Orbit0Infinity;
      rep.evidence = std::to_string(runs.size()) + " shadowing episodes, T-level up to " + std::to_string(top);
      return rep;
    }
  }
  rep.cls = OmegaClass::Unresolved;
  rep.evidence = runs.empty() ? "no decisive pattern"
                              : std::to_string(runs.size()) + " shadowing episode(s) before the precision horizon";
  return rep;
}

// ---------------------------------------------------------------- singular points

std::string SingularEstimate::to_record() const {
  std::ostringstream o;
  o << "singular-estimate\n"
    << "point " << fmt_point(point) << '\n'
    << "depth " << depth << '\n'
    << "window " << fmt(window) << '\n'
    << "diameter_bound " << fmt(diameter_bound) << '\n'
    << "measured_diameter " << fmt(measured_diameter) << '\n'
    << "certified_prefix " << certified_prefix << '\n'
    << "stage_diameters";
  for (double d : stage_diameters) o << ' ' << fmt(d, 6);
  o << '\n';
  return o.str();
}

SingularEstimate find_singular_point(const ItinerarySpec& s, double lambda, long depth, std::optional<double> window,
                                     std::optional<ComplexPoint> seed) {
  check_lambda(lambda);
  if (depth < 0) throw DomainError("negative depth");
  const double c = window ? *window : default_window(lambda);
  if (!(c > 0)) throw DomainError("window must be positive");

  std::vector<BlockMarkers> mk;
  for (long j = 0; j <= depth; ++j) mk.push_back(block_markers(s, j));
  const std::vector<Symbol> sym = s.take(mk.back().d + 1);

  auto window_of = [&](Symbol e) {
    double yc = kTwoPi * static_cast<double>(e);
    std::vector<ComplexPoint> pts;
    const int per = 24;
    for (int i = 0; i < per; ++i) {
      double t = static_cast<double>(i) / per;
      pts.emplace_back(-c + 2 * c * t, yc - kPi);
      pts.emplace_back(c, yc - kPi + kTwoPi * t);
      pts.emplace_back(c - 2 * c * t, yc + kPi);
      pts.emplace_back(-c, yc + kPi - kTwoPi * t);
    }
    return pts;
  };

  // Pulls a point from stage `from` back to stage 0; checks the window at each earlier marker.
  auto pull = [&](ComplexPoint w, long J, bool check) {
    for (long i = mk[static_cast<std::size_t>(J)].d - 1; i >= 0; --i) {
      w = inverse_branch(w, static_cast<long>(sym[static_cast<std::size_t>(i)]), lambda);
      if (!check) continue;
      for (long j = 0; j < J; ++j) {
        if (mk[static_cast<std::size_t>(j)].d == i && std::fabs(w.real()) > c)
          throw EmptyWindow("image leaves the window at block " + std::to_string(j) + " (Re = " + fmt(w.real(), 6) +
                            ")");
      }
    }
    return w;
  };

  SingularEstimate est;
  est.depth = depth;
  est.window = c;
  const double D = std::hypot(2 * c, kTwoPi);
  est.diameter_bound = D / std::pow(kPi, static_cast<double>(depth + 1));

  for (long J = 0; J <= depth; ++J) {
    std::vector<ComplexPoint> img;
    for (ComplexPoint w : window_of(mk[static_cast<std::size_t>(J)].e)) img.push_back(pull(w, J, true));
    est.stage_diameters.push_back(diameter(img));
  }
  est.measured_diameter = est.stage_diameters.back();

  const Symbol eJ = mk.back().e;
  ComplexPoint start = seed ? *seed : ComplexPoint(0.0, kTwoPi * static_cast<double>(eJ));
  if (std::fabs(start.real()) > c || strip_of(start.imag()) != eJ)
    throw DomainError("seed lies outside the window D_" + std::to_string(eJ));
  est.point = pull(start, depth, true);

  // Forward check of the itinerary prefix.
  OrbitRecord rec = orbit(est.point, lambda, mk.back().d);
  long ok = 0;
  for (std::size_t k = 0; k < rec.steps.size(); ++k) {
    if (!rec.steps[k].strip_known || rec.steps[k].strip != sym[k]) break;
    ++ok;
  }
  est.certified_prefix = ok;
  return est;
}

// ---------------------------------------------------------------- contraction

ContractionReport contraction_experiment(long n, double lambda, long m_max, Side side) {
  check_lambda(lambda);
  if (n < 0 || m_max < 0) throw DomainError("contraction needs n, m_max >= 0");
  const double X = orbit0(n + 1, lambda) / std::exp(1.0) - 1.0;
  if (!std::isfinite(X)) throw HypothesisUnverifiable("E(r_n) is beyond machine range");

  // Discs around E^{k-1}(0), k = 1..n+1, contain E^k(H(n)).
  struct Disc {
    double c, r;
  };
  std::vector<Disc> holes;
  for (long k = 1; k <= n + 1; ++k) holes.push_back({orbit0(k - 1, lambda), rho(k - 1, n, lambda)});
  auto in_hole = [&](ComplexPoint z) {
    for (const Disc& d : holes)
      if (std::abs(z - d.c) < d.r) return true;
    return false;
  };

  std::vector<ComplexPoint> pts;
  const int per_edge = 96;
  // asinh spacing resolves the holes near the origin on the wide horizontal edges
  const double ax = std::asinh(X);
  for (int i = 0; i <= per_edge; ++i) {
    double x = std::sinh(-ax + 2 * ax * i / per_edge);
    for (double y : {0.0, kPi}) {
      ComplexPoint z(x, y);
      if (!in_hole(z)) pts.push_back(z);
    }
    double y = kPi * i / per_edge;
    pts.emplace_back(-X, y);
    pts.emplace_back(X, y);
  }
  for (const Disc& d : holes) {
    const int arc = 32;
    for (int i = 0; i <= arc; ++i) {
      ComplexPoint z = d.c + std::polar(d.r, kPi * i / arc);
      if (std::fabs(z.real()) <= X && z.imag() <= kPi && !in_hole(z * (1.0 - 1e-12))) pts.push_back(z);
    }
  }
  if (side == Side::Minus)
    for (auto& z : pts) z = std::conj(z);  // signed zeros keep the negative axis on the lower side

  FixedPointPair fp = find_fixed_points(lambda);
  ContractionReport rep;
  rep.n = n;
  rep.side = side;
  rep.fixed_point = side == Side::Plus ? fp.q_plus : fp.q_minus;

  auto record = [&] {
    rep.diameters.push_back(diameter(pts));
    double dist = 0;
    for (ComplexPoint z : pts) dist = std::max(dist, std::abs(z - rep.fixed_point));
    rep.distances.push_back(dist);
  };
  record();
  for (long m = 1; m <= m_max; ++m) {
    for (auto& z : pts) z = std::log(z / lambda);
    record();
  }
  ComplexPoint sum = 0.0;
  for (ComplexPoint z : pts) sum += z;
  rep.terminal = sum / static_cast<double>(pts.size());

  // Strict decrease is only meaningful above rounding level.
  long last = static_cast<long>(rep.diameters.size()) - 1;
  while (last > 0 && rep.diameters[static_cast<std::size_t>(last)] < 1e-12) --last;
  long m0 = last;
  while (m0 > 0 && rep.diameters[static_cast<std::size_t>(m0)] < rep.diameters[static_cast<std::size_t>(m0 - 1)]) --m0;
  rep.m0 = m0;
  return rep;
}

}  // namespace expdyn
