#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "expdyn/itinerary.hpp"
#include "expdyn/xnum.hpp"

namespace expdyn {

// Re(z) beyond machine range. Only the real part survives; Im is not resolved.
struct TowerMarker {
  int sign = 1;
  long level = 0;
  double residual = 0.0;
  bool strip_unknown = true;

  TowerReal magnitude() const { return TowerReal::make(level, residual); }
};

struct OrbitStep {
  ComplexPoint point;                 // meaningful when !marker
  std::optional<TowerMarker> marker;  // set once Re leaves machine range
  long strip = 0;                     // strip_of(Im), valid when strip_known
  bool strip_known = true;
  std::optional<long> t_level;        // n with Re in T_n = [r_n, r_{n+1})
  double err = 0.0;                   // absolute error bound on point
};

enum class OrbitVerdict { Escaping, ShadowingOrbit0, BoundedWindow, BudgetExhausted };
std::string to_string(OrbitVerdict v);

struct OrbitRecord {
  ComplexPoint z0;
  double lambda = 1.0;
  std::vector<OrbitStep> steps;  // steps[0] = z0
  OrbitVerdict verdict = OrbitVerdict::BudgetExhausted;
  // First step whose strip could not be resolved; -1 when the budget ran out first.
  long precision_horizon = -1;
  std::vector<long> shadow_starts;  // indices k with |E^{k+i}(z) - E^i(0)| < 1, i = 0, 1, 2

  void write_csv(std::ostream& os) const;
};

// r_n = E^n(0) - 1 as a tower.
TowerReal r_level(long n, double lambda);
// n with x in T_n; nullopt for x < r_0 = -1.
std::optional<long> t_level(double x, double lambda);
std::optional<long> t_level(const TowerReal& x, double lambda);

// Iterates E_lambda from z with an error bound. Real orbits continue as tower
// markers; complex orbits stop once the strip of the next point is not resolved.
OrbitRecord orbit(ComplexPoint z, double lambda, long n_max);

// ln rho_{j,n}: ln(lambda) - E^{n+1}(0)/e + (j+1) + sum_{k=1..j} ln E^k(0). -inf once E^{n+1}(0) overflows.
double log_rho(long j, long n, double lambda);
double rho(long j, long n, double lambda);
// Smallest n with rho_{j,n} < 1 for all j <= n+1.
long rho_threshold(double lambda);

struct ShadowReport {
  long n = 0;
  bool hypothesis = false;  // Re(z) < -E(r_n) + 1
  std::vector<double> radii;      // rho_{j,n}, j = 0..n+1
  std::vector<double> distances;  // |E^{j+1}(z) - E^j(0)|
  bool all_within = false;
  std::optional<long> final_level;  // T-level of Re E^{n+2}(z)
};

// Throws HypothesisUnverifiable when E(r_n) is beyond machine range.
ShadowReport shadow_check(ComplexPoint z, long n, double lambda);

// g(N, m) = m (N + 4) + m (m - 1) / 2.
long g_steps(long N, long m);

// Smallest N such that for N' in {N, N+1} and m <= m_check the circle kappa(E(r_{N'+m}))
// is 1-vertical at height (2 M_{g(N',m)+1} + 1) pi.
long vertical_ladder_threshold(double lambda, long M, long p, long m_check = 6, long n_max = 64);

// Smallest N with A n^k + B sum_{i<=n} E^i(0) < E^{n+1}(0) for n = N..N+5.
long exp_inequality_threshold(double A, double B, long k, double lambda, long n_max = 256);

enum class OmegaClass { Escaping, Orbit0Infinity, SingularCandidate, Unresolved };
std::string to_string(OmegaClass c);

// Window half-width c: largest |Re| over L_0(B(q_pm, 1)), plus 2 pi.
double default_window(double lambda);

struct OmegaReport {
  OmegaClass cls = OmegaClass::Unresolved;
  OrbitRecord orbit;
  long checked_markers = 0;  // block markers d_j inside the resolved orbit
  std::string evidence;
};

// Throws ItineraryMismatch when a resolved strip differs from s.
OmegaReport classify_omega(ComplexPoint z, const ItinerarySpec& s, double lambda, long budget,
                           std::optional<double> window = std::nullopt);

struct SingularEstimate {
  ComplexPoint point;
  long depth = 0;
  double diameter_bound = 0.0;  // diam(D) / pi^{depth+1}
  double measured_diameter = 0.0;
  double window = 0.0;
  long certified_prefix = 0;  // symbols s_0..s_{d_depth} matched by the forward orbit
  std::vector<double> stage_diameters;  // measured diameter after Phi_0 o ... o Phi_j

  std::string to_record() const;
};

// Pulls the window D_{e_depth} back through Phi_0 o ... o Phi_depth. `seed` selects the
// window point that is followed (the centre when absent).
SingularEstimate find_singular_point(const ItinerarySpec& s, double lambda, long depth,
                                     std::optional<double> window = std::nullopt,
                                     std::optional<ComplexPoint> seed = std::nullopt);

enum class Side { Plus, Minus };

struct ContractionReport {
  long n = 0;
  Side side = Side::Plus;
  std::vector<double> diameters;  // diam L_0^m(boundary samples), m = 0..m_max
  std::vector<double> distances;  // max distance to q_pm
  long m0 = -1;                   // diameters strictly decrease from m0 on
  ComplexPoint terminal;          // centre of the last image
  ComplexPoint fixed_point;
};

ContractionReport contraction_experiment(long n, double lambda, long m_max, Side side);

}  // namespace expdyn
