#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "expdyn/itinerary.hpp"
#include "expdyn/xnum.hpp"

namespace expdyn {

using Polyline = std::vector<ComplexPoint>;

// Continuous increasing coordinate on values >= 1: level plus position in the band.
double tower_height(const TowerReal& x);
TowerReal from_tower_height(double h);

// V(a, b, K) = [a - 1, b + 1] x [-(2K+1) pi, (2K+1) pi].
struct TargetRect {
  TowerReal a;
  TowerReal b;
  long K = 0;

  TowerReal left() const { return add_const(a, -1.0); }
  TowerReal right() const { return add_const(b, 1.0); }
  double height() const { return (2.0 * static_cast<double>(K) + 1.0) * kPi; }
};

// F^n(base) + c. Keeping the structure lets neighbouring ladder entries be
// compared without forming their (astronomically large) difference.
struct LadderValue {
  TowerReal base;
  long n = 0;
  double c = 0.0;

  TowerReal value() const { return add_const(f_iter(base, n), c); }
};

struct TargetLadder {
  double lambda = 1.0;
  double zeta = 0.0;
  long M = 0;
  long p = 0;
  std::vector<LadderValue> a_seq;
  std::vector<TowerReal> b_seq;     // E^{n+1}(zeta) + 1
  std::vector<ItinerarySpec> family;  // members whose base segments define a_n
  std::vector<double> theta;        // theta_s per family member
  double theta_min = 0.0;

  TowerReal a(long n) const { return a_seq.at(static_cast<std::size_t>(n)).value(); }
  const TowerReal& b(long n) const { return b_seq.at(static_cast<std::size_t>(n)); }
  long M_at(long l) const { return M + l * p; }
  long size() const { return static_cast<long>(a_seq.size()); }
  TargetRect rect(long n, long m, long l) const { return {a(n), b(m), M_at(l)}; }
};

// a_n over a finite witness family: constants +-M, the alternating [M -M], and
// sample_budget seeded random members of Sigma_M^p (plus `extra` when given).
// Entries n = 0..n_max.
TargetLadder build_ladder(double lambda, double zeta, long M, long p, long n_max, int sample_budget = 8,
                          const std::optional<ItinerarySpec>& extra = std::nullopt, std::uint64_t seed = 1);

// 2 delta r >= y^2 + delta^2: the circle |w| = r meets Im w = y at Re w >= r - delta.
bool is_delta_vertical(const TowerReal& r, double delta, double y);

// q with e^q = ((2p+1)^2 pi^2 + 1) / (pi^2 + 1).
double vertical_growth_constant(long p, long M = 0);

// Checks that kappa(E(a_n)) is 1-vertical at height (2 M_{n+1} + 1) pi.
bool ladder_vertical(const TargetLadder& ladder, long n);

struct Certificate {
  std::string check;
  long n = 0;
  long k = 0;
  std::vector<double> margins;
  bool pass = false;

  std::string to_record() const;
};

// Log-margins of the three sufficient inequalities for
// E(V(a_n, b_{n+k}, M_n)) containing V(a_{n+1}, b_{n+k+1}, M_{n+1}):
//   [0] ln(a_{n+1} - 1) - ln(lambda) - (a_n - 1)
//   [1] ln(E(b_{n+k} + 1) - 1) - ln(b_{n+k+1} + 1)
//   [2] ln(2 E(b_{n+k} + 1)) - ln(y^2 + 1), y = (2 M_{n+1} + 1) pi
// A margin that cannot be resolved is NaN and fails.
Certificate covering_check(const TargetLadder& ladder, long n, long k);

// Number of maximal sub-arcs of the curve inside the closed rectangle that touch
// both the left and the right edge.
int passes_twice(const Polyline& curve, const TargetRect& rect);
// Same count for extended-range samples; segments are classified by endpoints.
int passes_twice(const std::vector<XPoint>& curve, const TargetRect& rect);

struct NestedRegion {
  long n = 0;
  long k = 0;
  // chains[i][j]: stage j of boundary sample i; stage n lies on the boundary of
  // V(a_n, b_{n+k}, M_n) and stage j = L_{s_j}(stage j+1).
  std::vector<std::vector<XPoint>> chains;
  double max_gap = 0.0;  // largest stage-0 spacing (inf if not machine-sized)

  Polyline boundary() const;
};

// Boundary of L_{s_0} o ... o L_{s_{n-1}}(V(a_n, b_{n+k}, M_n)).
NestedRegion nested_region(const ItinerarySpec& s, long n, long k, const TargetLadder& ladder,
                           std::size_t max_points = 4096);

bool in_rect(const XPoint& z, const TargetRect& rect);

// Checks a chain forward: stage j lies in strip s_j and stage m in V(a_m, b_{m+k}, M_m).
bool chain_in_region(const std::vector<XPoint>& chain, const ItinerarySpec& s, long m, long k,
                     const TargetLadder& ladder);

}  // namespace expdyn
