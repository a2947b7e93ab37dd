#pragma once

#include <string>
#include <vector>

#include "expdyn/itinerary.hpp"
#include "expdyn/target.hpp"
#include "expdyn/xnum.hpp"

namespace expdyn {

// Flatness required before the descent is attempted.
inline constexpr double kFlatnessEps0 = 0.05;

// Descent sampling: a geometric grid on [1e-4, 1] plus a grid uniform in tower height.
inline constexpr int kDescentGeoSamples = 16;
inline constexpr int kDescentHeightSamples = 96;

// f^{k-1}(pi) with f(r) = atan(r / zeta): bound on |Im| along the tail of 0_k s.
double zeros_flatten_bound(long k, double zeta);

// Smallest k with zeros_flatten_bound(k, zeta) < eps0.
long min_flat_zeros(double zeta, double eps0 = kFlatnessEps0);

// Where the pulled-back tails pass the orbit of 0: the first m with E^m(0) >= zeta.
// The descent uses N = m + 2 applications of L_0; stage m (nu_0) crosses Re = 0.
struct DescentGeometry {
  double lambda = 1.0;
  double zeta = 0.0;
  int m = 0;
  std::vector<double> orbit;  // E^i(0), i = 0..m

  int stages() const { return m + 2; }
};

DescentGeometry descent_geometry(double lambda, double zeta);

struct DescentTrace {
  long k = 0;
  int Q_entry = 0;  // first stage meeting the closed unit disc
  int Q = 0;        // last stage before entry (exit convention)
  int P = 0;        // stages between Q and nu_0
  int nu0_index = 0;
  double tau = 0.0;
  double eps = 0.0;
  // [0] = tail of 0_k u, then L_0 images; [nu0_index] = nu_0, then nu_1, nu_2.
  std::vector<std::vector<XPoint>> stages;
};

Polyline to_polyline(const std::vector<XPoint>& pts);

// Throws FlatnessInsufficient when zeros_flatten_bound(k, zeta) >= eps0 and
// StageNotReached when nu_0 never comes close enough to 0 for Re L(nu_0) = tau.
DescentTrace descent_trace(const ItinerarySpec& u, long k, double zeta, double tau, double lambda);

// Lower bound on the number of passes of the hair of 0_K u through rect: counted on
// the sub-curve L_0^N(tail of 0_{K-N} u). For K < N + min_flat_zeros only the
// outgoing tail is sampled.
int crossing_count(const ItinerarySpec& u, long K, const TargetRect& rect, double lambda, double zeta);

// Final-stage samples of the sub-curve used by crossing_count, in curve order.
std::vector<XPoint> descent_curve(const ItinerarySpec& u, long K, const TargetRect& rect, double lambda,
                                  double zeta);

struct ZeroBlockResult {
  long k = 0;
  int count = 0;
  std::vector<int> persistence;  // counts at k+1, k+2
};

// Smallest k <= k_max whose hair passes twice and keeps doing so at k+1, k+2.
// Throws NotFound(k_max, best count) otherwise.
ZeroBlockResult min_zero_block_report(const ItinerarySpec& u, const TargetRect& rect, long k_max, double lambda,
                                      double zeta);
long min_zero_block(const ItinerarySpec& u, const TargetRect& rect, long k_max, double lambda, double zeta);

struct ConstructionCertificate {
  double lambda = 1.0;
  double zeta = 0.0;
  long M = 0;
  long p = 0;
  std::vector<Block> blocks;       // input literal blocks
  std::vector<long> lead_zeros;    // c_j
  std::vector<long> zero_lengths;  // n_0, n_1, ...
  std::vector<long> q_indices;     // q_j
  std::vector<TargetRect> targets;
  std::vector<int> crossing_counts;
  ItinerarySpec itinerary;
  bool truncated = false;
  std::string truncation_reason;

  std::string to_text() const;
};

struct AssembleOptions {
  double zeta = 30.0;
  long k_max = 96;
};

// Tower levels beyond this are not attempted.
inline constexpr long kMaxTowerLevel = 64;

ConstructionCertificate assemble_theorem_a(const std::vector<Block>& blocks, double lambda, long M, long p,
                                           long depth_j, const AssembleOptions& opt = {});

// Recounts crossings of sigma^{q_j}(s) against every recorded target.
std::vector<int> reverify(const ConstructionCertificate& cert, double lambda, double zeta);

}  // namespace expdyn
