#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expdyn/errors.hpp"

namespace expdyn {

using Symbol = long long;

struct Block {
  enum class Kind { Zeros, Literal };
  Kind kind = Kind::Literal;
  std::vector<Symbol> symbols;

  static Block zeros(long n);
  static Block literal(std::vector<Symbol> s);
  bool has_nonzero() const;
  std::size_t size() const { return symbols.size(); }
  friend bool operator==(const Block&, const Block&) = default;
};

enum class TailRule { Repeat, Arith, Period };

// Explicit prefix of groups followed by a tail rule:
//   Repeat: the last group cycles forever.
//   Arith:  continues v+1, v+2, ... where v is the last literal symbol (0 if none).
//   Period: the given block cycles forever.
struct ItinerarySpec {
  std::vector<Block> blocks;
  TailRule tail = TailRule::Repeat;
  std::vector<Symbol> period;  // used only by TailRule::Period
  long offset = 0;             // symbols consumed by shifts; not part of the value

  Symbol symbol_at(long j) const;
  std::vector<Symbol> take(long n) const;
  long prefix_length() const;
  // The cycling part for Repeat/Period tails.
  const std::vector<Symbol>& cycle() const;
  // v in the Arith rule.
  Symbol arith_base() const;
  bool same_value(const ItinerarySpec& o) const;
  friend bool operator==(const ItinerarySpec& a, const ItinerarySpec& b) {
    return a.blocks == b.blocks && a.tail == b.tail && a.period == b.period;
  }
};

ItinerarySpec parse_itinerary(std::string_view text);
std::string print_itinerary(const ItinerarySpec& s);

ItinerarySpec shift(const ItinerarySpec& s, long n);
// 0_n s
ItinerarySpec prepend_zeros(const ItinerarySpec& s, long n);
// Periodic itinerary with the given period, e.g. (1 1 1 ...).
ItinerarySpec constant_itinerary(std::vector<Symbol> period);

struct GrowthWitness {
  long M = 0;
  long p = 0;
  long checked_horizon = 0;
};

struct GrowthResult {
  std::optional<GrowthWitness> witness;
  long violation = -1;  // first j with |s_j| > M + jp, when refuted
  bool ok() const { return witness.has_value(); }
};

GrowthResult classify_linear_growth(const ItinerarySpec& s, long M, long p, long horizon);

struct ExpBound {
  double A = 0;
  double x = 0;
};

// First (A, x) on the fixed grid with |s_k| < A F^k(x) for all k, scanning A outermost.
std::optional<ExpBound> exp_bounded_witness(const ItinerarySpec& s, long horizon);

enum class Verdict { Pass, Fail, Unknown };

struct FastVerdict {
  long n = 0;
  Verdict verdict = Verdict::Unknown;
  long k = -1;  // witness when Pass
};

std::vector<FastVerdict> is_fast(const ItinerarySpec& s, double x, double A, long N, long horizon);

// Zero blocks 0_{n_p} inserted into s_k = k right after s_{l_p}, with l_p the first
// index past l_{p-1} where k >= F^{n_p + p}(1). The result is truncated to an
// arithmetic tail once it holds at least `horizon` symbols.
ItinerarySpec build_fast_itinerary(const std::function<long(long)>& zero_lengths, long horizon);

struct BlockMarkers {
  long a = 0;
  long d = 0;
  Symbol b = 0;
  Symbol e = 0;
};

// Markers of the j-th literal block containing a non-zero symbol.
BlockMarkers block_markers(const ItinerarySpec& s, long j);

// Member of Sigma_M^p: random prefix with |s_j| <= M + jp, then a random period
// bounded by M with at least one non-zero entry. Requires M >= 1.
ItinerarySpec random_linear_growth(long M, long p, int prefix_len, int period_len, std::uint64_t seed);

}  // namespace expdyn
