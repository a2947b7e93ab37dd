#include "expdyn/hair.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace expdyn {

namespace {

// log(1 + u) without cancellation for small u.
ComplexPoint log1p_c(ComplexPoint u) {
  double x = u.real(), y = u.imag();
  if (1.0 + x < 0.0 && std::fabs(y) <= 1e-14) throw BranchCut("pullback crosses the negative real ray");
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

std::vector<double> f_orbit(double eta, int depth) {
  std::vector<double> t(static_cast<std::size_t>(depth) + 1);
  t[0] = eta;
  for (int j = 1; j <= depth; ++j) t[static_cast<std::size_t>(j)] = std::expm1(t[static_cast<std::size_t>(j) - 1]);
  return t;
}

std::vector<ComplexPoint> offsets(const ItinerarySpec& s, double eta, int depth, double lambda) {
  const double lnl = std::log(lambda);
  std::vector<Symbol> sym = s.take(depth + 1);
  std::vector<double> t = f_orbit(eta, depth);
  std::vector<ComplexPoint> w(static_cast<std::size_t>(depth) + 1);
  auto base = [&](int j) { return ComplexPoint(-lnl, kTwoPi * static_cast<double>(sym[static_cast<std::size_t>(j)])); };
  w[static_cast<std::size_t>(depth)] = base(depth);
  for (int j = depth; j >= 1; --j) {
    // z_j = F(t) + w_j = e^t (1 + u), u = (w_j - 1) e^{-t}, t = t_{j-1}
    ComplexPoint u = (w[static_cast<std::size_t>(j)] - 1.0) * std::exp(-t[static_cast<std::size_t>(j) - 1]);
    w[static_cast<std::size_t>(j) - 1] = base(j - 1) + log1p_c(u);
  }
  return w;
}

}  // namespace

double admissibility_threshold(const ItinerarySpec& s, double lambda) {
  auto w = exp_bounded_witness(s, 64);
  if (!w) throw HypothesisUnverifiable("no exponential-boundedness witness for " + print_itinerary(s));
  return w->x + 2.0 * std::log(std::log(lambda) + 3.0);
}

int default_depth(const TowerReal& eta) {
  static const TowerReal kTarget = f_iter(TowerReal::from_double(1.0), 3);
  int d = 0;
  TowerReal t = eta;
  while (t < kTarget && d < kMaxDepth) {
    t = f_iter(t, 1);
    ++d;
  }
  return std::min(d + 2, kMaxDepth);
}

std::vector<ComplexPoint> trace_offsets(const ItinerarySpec& s, double eta, int depth, double lambda) {
  if (depth == kAutoDepth) depth = default_depth(TowerReal::from_double(eta));
  if (depth < 0 || depth > kMaxDepth) throw DomainError("depth out of range");
  return offsets(s, eta, depth, lambda);
}

HairSample trace_point(const ItinerarySpec& s, double eta, int depth, double lambda, const HairOptions& opt) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  if (!std::isfinite(eta) || eta <= 0) throw DomainError("eta must be positive and finite");
  if (opt.enforce_threshold) {
    double star = opt.eta_star ? *opt.eta_star : admissibility_threshold(s, lambda);
    if (eta < star)
      throw DomainError("eta = " + std::to_string(eta) + " below admissibility threshold " + std::to_string(star));
  }
  if (depth == kAutoDepth) depth = default_depth(TowerReal::from_double(eta));
  if (depth < 0 || depth > kMaxDepth) throw DomainError("depth out of range");

  HairSample out;
  out.eta = eta;
  out.depth = depth;
  ComplexPoint w = offsets(s, eta, depth, lambda)[0];
  out.offset = w;
  out.point = ComplexPoint(eta, 0.0) + w;
  if (depth == 0) {
    // Remainder size of the bootstrap formula without the unknown universal constant.
    out.err_bound = 2.0 * std::exp(-eta) *
                    (std::fabs(std::log(lambda)) + 2.0 + kTwoPi * std::fabs(static_cast<double>(s.symbol_at(1))));
    return out;
  }
  ComplexPoint prev = ComplexPoint(eta, 0.0) + offsets(s, eta, depth - 1, lambda)[0];
  out.err_bound = std::abs(out.point - prev);
  if (out.err_bound > opt.tolerance * std::max(1.0, std::abs(out.point)))
    throw DepthInsufficient("depth " + std::to_string(depth) + " changes the point by " +
                            std::to_string(out.err_bound));
  return out;
}

ComplexPoint hair_image(const HairSample& h, double lambda) {
  if (h.eta > kOverflowRe) throw OverflowToTower("eta = " + std::to_string(h.eta));
  return lambda * std::exp(h.eta) * std::exp(h.offset);
}

XPoint trace_point_x(const ItinerarySpec& s, const TowerReal& eta, double lambda, int depth) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  if (eta.level() == 0 && !(eta.residual() > 0)) throw DomainError("eta must be positive");
  if (depth == kAutoDepth) {
    depth = default_depth(eta);
    // The deepest non-zero symbol that matters must be inside the chain.
    for (long j = 0; j < kMaxDepth; ++j) {
      if (s.symbol_at(j) != 0) {
        depth = std::max(depth, static_cast<int>(j) + 3);
        break;
      }
    }
    depth = std::min(depth, kMaxDepth);
  }
  const double lnl = std::log(lambda);
  std::vector<Symbol> sym = s.take(depth + 1);
  std::vector<TowerReal> t(static_cast<std::size_t>(depth) + 1);
  t[0] = eta;
  for (int j = 1; j <= depth; ++j) t[static_cast<std::size_t>(j)] = f_iter(t[static_cast<std::size_t>(j) - 1], 1);

  // offset w = (re, im): re is machine-sized, im may be tiny
  double w_re = -lnl;
  XReal w_im = XReal::from_double(kTwoPi * static_cast<double>(sym[static_cast<std::size_t>(depth)]));
  for (int j = depth; j >= 1; --j) {
    XReal decay = XReal::exp_of(-STower::from_tower(t[static_cast<std::size_t>(j) - 1]));
    double ru = (XReal::from_double(w_re - 1.0) * decay).to_double();
    XReal iu = w_im * decay;
    double log_re;
    XReal log_im;
    if (iu.sign() == 0 || iu.lg().to_double() < std::log(1e-8)) {
      if (1.0 + ru <= 0.0) throw BranchCut("pullback crosses the negative real ray");
      XReal q = iu * XReal::from_double(1.0 / (1.0 + ru));
      double qd = q.to_double();
      log_re = std::log1p(ru) + 0.5 * qd * qd;
      log_im = q;  // atan(q) = q to double precision
    } else {
      ComplexPoint l = log1p_c(ComplexPoint(ru, iu.to_double()));
      log_re = l.real();
      log_im = XReal::from_double(l.imag());
    }
    Symbol sj = sym[static_cast<std::size_t>(j) - 1];
    w_re = -lnl + log_re;
    w_im = sj == 0 ? log_im : XReal::from_double(kTwoPi * static_cast<double>(sj) + log_im.to_double());
  }
  XReal re = XReal::from_stower(STower::from_tower(eta) + w_re);
  return {re, w_im};
}

double find_theta(const ItinerarySpec& s, double zeta, double lambda, const HairOptions& opt) {
  HairOptions o = opt;
  double lo = 1.0;
  if (o.enforce_threshold) {
    if (!o.eta_star) o.eta_star = admissibility_threshold(s, lambda);
    lo = *o.eta_star;
  }
  auto g = [&](double eta) { return trace_point(s, eta, kAutoDepth, lambda, o).point.real() - zeta; };
  double hi = std::max(lo, zeta + std::log(lambda) + 10.0);
  for (int i = 0; i < 20 && g(hi) <= 0; ++i) hi += 10.0;
  if (g(hi) <= 0) throw NoBracket("Re gamma stays below zeta");
  double a = hi;
  for (;;) {
    double b = a - 0.5;
    if (b < lo) {
      b = lo;
      if (b >= a) throw NoBracket("no crossing of Re = zeta above eta = " + std::to_string(lo));
    }
    double gb;
    try {
      gb = g(b);
    } catch (const DepthInsufficient&) {
      throw NoBracket("trace failed before a crossing was found");
    }
    if (gb <= 0) {
      // crossing in [b, a]
      for (int it = 0; it < 64; ++it) {
        double m = 0.5 * (a + b);
        if (m <= b || m >= a) break;
        (g(m) <= 0 ? b : a) = m;
      }
      return 0.5 * (a + b);
    }
    if (b == lo) throw NoBracket("no crossing of Re = zeta above eta = " + std::to_string(lo));
    a = b;
  }
}

TailSegment tail_polyline(const ItinerarySpec& s, double zeta, double eta_max, double step, double lambda,
                          double max_gap) {
  if (!(step > 0)) throw DomainError("step must be positive");
  HairOptions o;
  o.eta_star = admissibility_threshold(s, lambda);
  TailSegment tail;
  tail.s = s;
  tail.zeta = zeta;
  tail.theta = find_theta(s, zeta, lambda, o);
  if (!(eta_max > tail.theta)) throw DomainError("eta_max must exceed theta_s");
  auto at = [&](double eta) { return trace_point(s, eta, kAutoDepth, lambda, o); };

  std::vector<HairSample>& out = tail.samples;
  out.push_back(at(tail.theta));
  // Depth-first refinement keeps eta increasing.
  auto refine = [&](auto& self, const HairSample& a, const HairSample& b, int level) -> void {
    if (std::abs(a.point - b.point) <= max_gap || level > 30) {
      out.push_back(b);
      return;
    }
    HairSample m = at(0.5 * (a.eta + b.eta));
    self(self, a, m, level + 1);
    self(self, m, b, level + 1);
  };
  for (double eta = tail.theta + step;; eta += step) {
    double e = std::min(eta, eta_max);
    refine(refine, out.back(), at(e), 0);
    if (e >= eta_max) break;
  }
  return tail;
}

void write_tail_csv(std::ostream& os, const TailSegment& t) {
  os << "eta,re,im,depth,err_bound\r\n";
  char buf[160];
  for (const HairSample& h : t.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.6g\r\n", h.eta, h.point.real(), h.point.imag(), h.depth,
                  h.err_bound);
    os << buf;
  }
}

BaseSegment base_segment(const ItinerarySpec& s, double zeta, int level, double lambda) {
  if (level < 0) throw DomainError("level must be non-negative");
  BaseSegment b;
  b.level = level;
  b.eta_lo = find_theta(s, zeta, lambda);
  ItinerarySpec hat = prepend_zeros(s, level + 1);
  double th = find_theta(hat, zeta, lambda);
  b.eta_hi = f_iter(TowerReal::from_double(th), level + 1);
  if (!(TowerReal::from_double(b.eta_lo) < b.eta_hi)) throw DomainError("empty base segment");
  return b;
}

}  // namespace expdyn
