#include <algorithm>
#include <cmath>

#include "expdyn/construct.hpp"
#include "expdyn/hair.hpp"

namespace expdyn {

namespace {

constexpr double kTiny = 1e-8;
constexpr int kGeoSamples = kDescentGeoSamples;
constexpr int kHeightSamples = kDescentHeightSamples;

XReal X(double v) { return XReal::from_double(v); }

XReal xmax(const XReal& a, const XReal& b) { return a > b ? a : b; }

// log(1 + v) for complex v with extended-range components.
XPoint log1p_x(const XPoint& v) {
  XReal ar = v.re.abs(), ai = v.im.abs();
  XReal d = xmax(ar, ai);
  if (d.sign() == 0) return {};
  if (d < X(kTiny)) {
    // Second-order terms in factored form: products like y * y are not resolvable
    // from y once ln|y| is itself a tower, so differences of them are avoided.
    double vr = v.re.to_double(), vi = v.im.to_double();
    XReal re = v.re * X(1.0 - 0.5 * vr);
    if (vi != 0.0) re = re + X(0.5 * vi * vi);
    return {re, v.im * X(1.0 - vr)};
  }
  if (d > X(1e15)) {
    if (v.re.sign() <= 0 || ai > ar) throw BranchCut("offset far from the positive axis");
    return {XReal::from_stower(v.re.lg()), v.im / v.re};
  }
  double vr = v.re.to_double(), vi = v.im.to_double();
  double base = 1.0 + vr;
  if (!(base > 0)) throw BranchCut("offset crosses the negative real axis");
  double q = vi / base;
  XReal re = X(std::log1p(vr) + 0.5 * std::log1p(q * q));
  XReal im = std::fabs(q) < kTiny ? v.im / X(base) : X(std::atan2(vi, base));
  return {re, im};
}

XReal expm1_x(const XReal& w) {
  if (w.sign() == 0) return {};
  if (w.abs() < X(kTiny)) return w + X(0.5) * w * w;
  if (w > X(700.0)) return XReal::exp_of(w.to_stower());
  if (w < X(-700.0)) return X(-1.0);
  return X(std::expm1(w.to_double()));
}

struct Sample {
  XReal key;                  // stage-0 offset from E^m(0); increasing along the curve
  std::vector<XPoint> chain;  // stages 0..m+2
};

// Samples of L_0^{m+2}(tail of 0_k u) near the orbit of 0, built in offset form.
class FoldSampler {
 public:
  FoldSampler(const ItinerarySpec& u, long k, double lambda, double zeta)
      : g_(descent_geometry(lambda, zeta)), tail_(prepend_zeros(u, k)), lambda_(lambda), zeta_(zeta) {
    XPoint p = trace_point_x(tail_, TowerReal::from_double(top() + std::log(lambda)), lambda);
    ystar_ = p.im;
  }

  const DescentGeometry& geometry() const { return g_; }
  double top() const { return g_.orbit[static_cast<std::size_t>(g_.m)]; }

  // Stage-m offset -> stage-0 offset.
  XReal back_map(const XReal& d) const {
    XReal w = d;
    for (int i = g_.m - 1; i >= 0; --i) w = X(g_.orbit[static_cast<std::size_t>(g_.m - i)]) * expm1_x(w);
    return w;
  }

  // Sample whose stage-m real offset is (approximately) d.
  std::optional<Sample> at_stage_m(const XReal& d) const { return at_offset(back_map(d)); }

  std::optional<Sample> at_offset(const XReal& delta) const {
    XPoint w0;
    if (delta.abs() < X(1.0)) {
      // within a unit window of E^m(0) the tail is level to far below double resolution
      w0 = {delta, ystar_};
    } else {
      XReal x0 = X(top()) + delta;
      if (x0 < X(zeta_)) return std::nullopt;
      XPoint p = trace_point_x(tail_, add_const(x0.to_tower(), std::log(lambda_)), lambda_);
      w0 = {p.re - X(top()), p.im};
    }
    Sample s;
    s.key = w0.re;
    s.chain = forward(w0);
    return s;
  }

  // Endpoint of the tail, Re close to zeta.
  std::optional<Sample> endpoint() const {
    XPoint p = trace_point_x(tail_, TowerReal::from_double(zeta_ + std::log(lambda_)), lambda_);
    XPoint w0{p.re - X(top()), p.im};
    Sample s;
    s.key = w0.re;
    s.chain = forward(w0);
    return s;
  }

 private:
  std::vector<XPoint> forward(XPoint w) const {
    const int m = g_.m;
    std::vector<XPoint> chain;
    chain.reserve(static_cast<std::size_t>(m) + 3);
    for (int i = 0; i < m; ++i) {
      XReal E = X(g_.orbit[static_cast<std::size_t>(m - i)]);
      chain.push_back({E + w.re, w.im});
      w = log1p_x({w.re / E, w.im / E});
    }
    chain.push_back(w);  // E^0(0) = 0
    XPoint z = w;
    for (int j = 0; j < 2; ++j) {
      z = x_inverse_branch(z, 0, lambda_);
      chain.push_back(z);
    }
    return chain;
  }

  DescentGeometry g_;
  ItinerarySpec tail_;
  double lambda_;
  double zeta_;
  XReal ystar_;
};

// Geometric grid on [1e-4, 1] followed by a grid uniform in tower height up to t_hi.
std::vector<XReal> t_grid(const TowerReal& t_hi) {
  std::vector<XReal> out;
  for (int i = 0; i < kGeoSamples; ++i)
    out.push_back(X(std::pow(10.0, -4.0 + 4.0 * i / static_cast<double>(kGeoSamples))));
  double h1 = tower_height(TowerReal::from_double(1.0)), h2 = tower_height(t_hi);
  if (h2 <= h1) {
    out.push_back(X(1.0));
    return out;
  }
  for (int i = 0; i <= kHeightSamples; ++i)
    out.push_back(XReal::from_tower(from_tower_height(h1 + (h2 - h1) * i / static_cast<double>(kHeightSamples))));
  return out;
}

enum class Leg { Neg, Pos, Main };

XReal leg_offset(Leg leg, const XReal& t, double lambda) {
  STower st = t.to_stower();
  switch (leg) {
    case Leg::Neg:
      return -(X(lambda) * XReal::exp_of(-st));
    case Leg::Pos:
      return X(lambda) * XReal::exp_of(-st);
    case Leg::Main:
      break;
  }
  return X(lambda) * XReal::exp_of(st);
}

void sort_unique(std::vector<Sample>& v) {
  std::sort(v.begin(), v.end(), [](const Sample& a, const Sample& b) { return a.key < b.key; });
  v.erase(std::unique(v.begin(), v.end(), [](const Sample& a, const Sample& b) { return compare(a.key, b.key) == 0; }),
          v.end());
}

void add(std::vector<Sample>& v, std::optional<Sample> s) {
  if (s) v.push_back(std::move(*s));
}

// -ln(y / lambda) as a tower, floored at 1.
TowerReal tip_depth(const XReal& y, double lambda) {
  if (y.sign() == 0) throw StageNotReached("nu_0 lies on the real axis at the sampled resolution");
  STower l = -(y.lg() + (-std::log(lambda)));
  if (l.sign <= 0 || l.mag < TowerReal::from_double(1.0)) return TowerReal::from_double(1.0);
  return l.mag;
}

bool in_closed_unit_disc(const XPoint& z) {
  if (z.re.abs() > X(1.0) || z.im.abs() > X(1.0)) return false;
  double x = z.re.to_double(), y = z.im.to_double();
  return x * x + y * y <= 1.0;
}

}  // namespace

double zeros_flatten_bound(long k, double zeta) {
  if (k < 1 || !(zeta > 0)) throw DomainError("need k >= 1 and zeta > 0");
  double r = kPi;
  for (long i = 1; i < k; ++i) r = std::atan(r / zeta);
  return r;
}

long min_flat_zeros(double zeta, double eps0) {
  if (!(zeta > 0) || !(eps0 > 0)) throw DomainError("need zeta > 0 and eps0 > 0");
  long k = 1;
  for (double r = kPi; r >= eps0; r = std::atan(r / zeta)) {
    if (++k > 100000) throw NoConvergence("flatness bound does not reach eps0");
  }
  return k;
}

DescentGeometry descent_geometry(double lambda, double zeta) {
  if (!(lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
  DescentGeometry g;
  g.lambda = lambda;
  g.zeta = zeta;
  g.orbit = {0.0};
  while (g.orbit.back() < zeta) {
    if (g.orbit.size() > 10000) throw NoConvergence("orbit of 0 does not pass zeta");
    g.orbit.push_back(lambda * std::exp(g.orbit.back()));
  }
  if (!std::isfinite(g.orbit.back())) throw OverflowToTower("orbit of 0 leaves machine range at zeta");
  g.m = static_cast<int>(g.orbit.size()) - 1;
  return g;
}

Polyline to_polyline(const std::vector<XPoint>& pts) {
  Polyline out;
  out.reserve(pts.size());
  for (const XPoint& p : pts) out.push_back(p.to_complex());
  return out;
}

DescentTrace descent_trace(const ItinerarySpec& u, long k, double zeta, double tau, double lambda) {
  if (!(tau < 0)) throw DomainError("tau must be negative");
  double eps = zeros_flatten_bound(k, zeta);
  if (eps >= kFlatnessEps0) throw FlatnessInsufficient("f^{k-1}(pi) = " + std::to_string(eps));

  FoldSampler fs(u, k, lambda, zeta);
  const int m = fs.geometry().m;
  const auto mi = static_cast<std::size_t>(m);

  std::optional<Sample> tip = fs.at_offset(XReal());
  if (!tip) throw StageNotReached("tail does not reach the orbit of 0");
  XReal ym = tip->chain[mi].im.abs();
  XReal cap = X(lambda) * XReal::exp_of(STower::from_double(tau));
  if (ym >= cap) throw StageNotReached("nu_0 passes too far from 0 for Re L(nu_0) = tau");

  std::vector<Sample> all{*tip};
  TowerReal t_main = TowerReal::from_double(std::max(-tau, std::exp(1.0)));
  TowerReal t_legs = from_tower_height(tower_height(tip_depth(ym, lambda)) + 0.3);
  for (const XReal& t : t_grid(t_legs)) {
    add(all, fs.at_stage_m(leg_offset(Leg::Neg, t, lambda)));
    add(all, fs.at_stage_m(leg_offset(Leg::Pos, t, lambda)));
  }
  for (const XReal& t : t_grid(t_main)) add(all, fs.at_stage_m(leg_offset(Leg::Main, t, lambda)));
  add(all, fs.endpoint());

  // offset at stage m where |z_m| = lambda e^tau, i.e. Re L(z_m) = tau
  double q = (ym / cap).to_double();
  XReal d_cap = cap * X(std::sqrt(1.0 - q * q));
  std::optional<Sample> cap_sample = fs.at_stage_m(d_cap);
  if (!cap_sample) throw StageNotReached("tau crossing not sampled");
  all.push_back(*cap_sample);
  sort_unique(all);

  DescentTrace tr;
  tr.k = k;
  tr.tau = tau;
  tr.eps = eps;
  tr.nu0_index = m;
  tr.Q_entry = -1;
  for (int i = 0; i <= m && tr.Q_entry < 0; ++i)
    for (const Sample& s : all)
      if (in_closed_unit_disc(s.chain[static_cast<std::size_t>(i)])) {
        tr.Q_entry = i;
        break;
      }
  if (tr.Q_entry < 0) throw StageNotReached("no stage meets the closed unit disc");
  tr.Q = tr.Q_entry - 1;
  tr.P = m - tr.Q - 1;

  tr.stages.assign(mi + 3, {});
  for (std::size_t i = 0; i < mi; ++i)
    for (const Sample& s : all) tr.stages[i].push_back(s.chain[i]);

  // nu_0: far end first, ending where the curve meets Re = 0 (the tip side)
  const double tol = 1e-9 * std::max(1.0, -tau);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (it->key.sign() < 0) break;
    tr.stages[mi].push_back(it->chain[mi]);
    if (it->chain[mi + 1].re >= X(tau - tol)) {
      tr.stages[mi + 1].push_back(it->chain[mi + 1]);
      tr.stages[mi + 2].push_back(it->chain[mi + 2]);
    }
  }
  if (tr.stages[mi + 1].empty()) throw StageNotReached("nu_1 is empty");
  return tr;
}

std::vector<XPoint> descent_curve(const ItinerarySpec& u, long K, const TargetRect& rect, double lambda,
                                  double zeta) {
  if (K < 0) throw DomainError("K must be non-negative");
  const DescentGeometry g = descent_geometry(lambda, zeta);
  const long N = g.stages();
  TowerReal x_hi = from_tower_height(tower_height(rect.right()) + 0.5);
  std::vector<XPoint> out;

  if (K < N + min_flat_zeros(zeta)) {
    // outgoing tail of 0_K u only
    ItinerarySpec s = prepend_zeros(u, K);
    double lnl = std::log(lambda);
    double h0 = tower_height(TowerReal::from_double(zeta + std::max(lnl, 0.0)));
    double h1 = tower_height(add_const(x_hi, std::max(lnl, 0.0)));
    const int n = 2 * kHeightSamples;
    for (int i = 0; i <= n; ++i) {
      TowerReal eta = from_tower_height(h0 + (h1 - h0) * i / static_cast<double>(n));
      out.push_back(trace_point_x(s, eta, lambda));
    }
    return out;
  }

  FoldSampler fs(u, K - N, lambda, zeta);
  std::vector<Sample> all;
  add(all, fs.at_offset(XReal()));
  add(all, fs.endpoint());
  TowerReal t_hi = exp_lambda(x_hi, lambda);
  for (const XReal& t : t_grid(t_hi))
    for (Leg leg : {Leg::Neg, Leg::Pos, Leg::Main}) add(all, fs.at_stage_m(leg_offset(leg, t, lambda)));
  sort_unique(all);
  const auto last = static_cast<std::size_t>(g.m) + 2;
  for (const Sample& s : all) out.push_back(s.chain[last]);
  return out;
}

int crossing_count(const ItinerarySpec& u, long K, const TargetRect& rect, double lambda, double zeta) {
  return passes_twice(descent_curve(u, K, rect, lambda, zeta), rect);
}

}  // namespace expdyn
