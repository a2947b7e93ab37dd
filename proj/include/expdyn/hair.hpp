#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "expdyn/itinerary.hpp"
#include "expdyn/xnum.hpp"

namespace expdyn {

inline constexpr int kAutoDepth = -1;
inline constexpr int kMaxDepth = 64;

struct HairSample {
  double eta = 0;
  ComplexPoint point;
  ComplexPoint offset;  // point - eta before rounding the sum
  int depth = 0;
  double err_bound = 0;
};

struct HairOptions {
  // Reject eta below the admissibility threshold of the itinerary.
  bool enforce_threshold = true;
  // Precomputed threshold; computed from the itinerary when absent.
  std::optional<double> eta_star;
  // DepthInsufficient when the depth-to-depth change exceeds tol * max(1, |point|).
  double tolerance = 1e-9;
};

// x + 2 ln(ln lambda + 3) with x from exp_bounded_witness. Throws
// HypothesisUnverifiable when no witness exists on the grid.
double admissibility_threshold(const ItinerarySpec& s, double lambda);

// Smallest d with F^d(eta) >= F^3(1), plus 2, capped at kMaxDepth.
int default_depth(const TowerReal& eta);

// gamma_s(eta) by pulling back the bootstrap point F^d(eta) - ln(lambda) + 2 pi i s_d
// through L_{s_{d-1}}, ..., L_{s_0}. Coordinates are kept as offsets from F^j(eta),
// so huge real parts are never formed.
HairSample trace_point(const ItinerarySpec& s, double eta, int depth, double lambda, const HairOptions& opt = {});

// E_lambda(point) evaluated as lambda e^eta e^offset, which avoids the rounding
// of eta + offset (that rounding is amplified by |E'| = |E(point)|).
ComplexPoint hair_image(const HairSample& h, double lambda);

// Offsets w_j = z_j - F^j(eta), j = 0..depth, of the pullback chain.
std::vector<ComplexPoint> trace_offsets(const ItinerarySpec& s, double eta, int depth, double lambda);

// Extended-range variant: eta may be a tower and the imaginary part may be far
// below machine resolution relative to the real part (long zero runs).
XPoint trace_point_x(const ItinerarySpec& s, const TowerReal& eta, double lambda, int depth = kAutoDepth);

// Largest eta with Re gamma_s(eta) = zeta.
double find_theta(const ItinerarySpec& s, double zeta, double lambda, const HairOptions& opt = {});

struct TailSegment {
  ItinerarySpec s;
  double zeta = 0;
  double theta = 0;
  std::vector<HairSample> samples;
};

// gamma_s on [theta_s, eta_max], refined until consecutive points are <= max_gap apart.
TailSegment tail_polyline(const ItinerarySpec& s, double zeta, double eta_max, double step, double lambda,
                          double max_gap = 0.25);

void write_tail_csv(std::ostream& os, const TailSegment& t);

struct BaseSegment {
  double eta_lo = 0;   // theta_s
  TowerReal eta_hi;    // F^{level+1}(theta of 0_{level+1} s)
  int level = 0;
};

BaseSegment base_segment(const ItinerarySpec& s, double zeta, int level, double lambda);

}  // namespace expdyn
