#include "expdyn/itinerary.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <random>
#include <sstream>

#include "expdyn/xnum.hpp"

namespace expdyn {

namespace {

Symbol sabs(Symbol v) { return v < 0 ? -v : v; }

bool any_nonzero(const std::vector<Symbol>& v) {
  return std::any_of(v.begin(), v.end(), [](Symbol x) { return x != 0; });
}

Symbol max_abs(const std::vector<Symbol>& v) {
  Symbol m = 0;
  for (Symbol x : v) m = std::max(m, sabs(x));
  return m;
}

class Parser {
 public:
  explicit Parser(std::string_view t) : t_(t) {}

  ItinerarySpec run() {
    ItinerarySpec s;
    for (;;) {
      ws();
      if (i_ >= t_.size()) throw ParseError(i_, "missing '|' and tail rule");
      if (t_[i_] == '|') break;
      if (t_.compare(i_, 2, "0^") == 0) {
        i_ += 2;
        std::size_t at = i_;
        Symbol n = integer(false);
        if (n < 1) throw ParseError(at, "zero block length must be positive");
        s.blocks.push_back(Block::zeros(static_cast<long>(n)));
      } else if (t_[i_] == '[') {
        s.blocks.push_back(Block::literal(int_list()));
      } else {
        throw ParseError(i_, "expected '0^n' or '[...]'");
      }
    }
    if (s.blocks.empty()) throw ParseError(i_, "at least one group is required");
    ++i_;
    ws();
    std::size_t at = i_;
    std::string word;
    while (i_ < t_.size() && std::isalpha(static_cast<unsigned char>(t_[i_]))) word += t_[i_++];
    if (word == "repeat") {
      s.tail = TailRule::Repeat;
      if (!s.blocks.back().has_nonzero()) throw ParseError(at, "repeated group is all zeros");
    } else if (word == "arith") {
      s.tail = TailRule::Arith;
    } else if (word == "period") {
      s.tail = TailRule::Period;
      ws();
      std::size_t p_at = i_;
      s.period = int_list();
      if (!any_nonzero(s.period)) throw ParseError(p_at, "period is all zeros");
    } else {
      throw ParseError(at, "unknown tail rule '" + word + "'");
    }
    ws();
    if (i_ != t_.size()) throw ParseError(i_, "trailing input");
    return s;
  }

 private:
  void ws() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }

  Symbol integer(bool allow_sign) {
    std::size_t start = i_;
    if (allow_sign && i_ < t_.size() && t_[i_] == '-') ++i_;
    while (i_ < t_.size() && std::isdigit(static_cast<unsigned char>(t_[i_]))) ++i_;
    Symbol v = 0;
    auto [ptr, ec] = std::from_chars(t_.data() + start, t_.data() + i_, v);
    if (ec != std::errc() || ptr != t_.data() + i_ || start == i_) throw ParseError(start, "expected integer");
    return v;
  }

  std::vector<Symbol> int_list() {
    if (i_ >= t_.size() || t_[i_] != '[') throw ParseError(i_, "expected '['");
    ++i_;
    std::vector<Symbol> out;
    for (;;) {
      ws();
      if (i_ >= t_.size()) throw ParseError(i_, "unterminated '['");
      if (t_[i_] == ']') break;
      out.push_back(integer(true));
    }
    if (out.empty()) throw ParseError(i_, "empty group");
    ++i_;
    return out;
  }

  std::string_view t_;
  std::size_t i_ = 0;
};

}  // namespace

Block Block::zeros(long n) {
  if (n < 1) throw DomainError("zero block length must be positive");
  return {Kind::Zeros, std::vector<Symbol>(static_cast<std::size_t>(n), 0)};
}

Block Block::literal(std::vector<Symbol> s) {
  if (s.empty()) throw DomainError("empty literal block");
  return {Kind::Literal, std::move(s)};
}

bool Block::has_nonzero() const { return any_nonzero(symbols); }

long ItinerarySpec::prefix_length() const {
  long n = 0;
  for (const Block& b : blocks) n += static_cast<long>(b.size());
  return n;
}

const std::vector<Symbol>& ItinerarySpec::cycle() const {
  if (tail == TailRule::Period) return period;
  if (tail == TailRule::Repeat) return blocks.back().symbols;
  throw StructureError("arithmetic tail has no period");
}

Symbol ItinerarySpec::arith_base() const {
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
    if (it->kind == Block::Kind::Literal) return it->symbols.back();
  return 0;
}

Symbol ItinerarySpec::symbol_at(long j) const {
  if (j < 0) throw DomainError("negative symbol index");
  long idx = j;
  for (const Block& b : blocks) {
    long n = static_cast<long>(b.size());
    if (idx < n) return b.symbols[static_cast<std::size_t>(idx)];
    idx -= n;
  }
  if (tail == TailRule::Arith) return arith_base() + 1 + idx;
  const auto& c = cycle();
  return c[static_cast<std::size_t>(idx % static_cast<long>(c.size()))];
}

std::vector<Symbol> ItinerarySpec::take(long n) const {
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, n)));
  for (const Block& b : blocks) {
    for (Symbol v : b.symbols) {
      if (static_cast<long>(out.size()) >= n) return out;
      out.push_back(v);
    }
  }
  if (tail == TailRule::Arith) {
    Symbol v = arith_base();
    for (long i = 0; static_cast<long>(out.size()) < n; ++i) out.push_back(v + 1 + i);
  } else {
    const auto& c = cycle();
    for (long i = 0; static_cast<long>(out.size()) < n; ++i) out.push_back(c[static_cast<std::size_t>(i) % c.size()]);
  }
  return out;
}

bool ItinerarySpec::same_value(const ItinerarySpec& o) const {
  long L = std::max(prefix_length(), o.prefix_length());
  long c1 = tail == TailRule::Arith ? 1 : static_cast<long>(cycle().size());
  long c2 = o.tail == TailRule::Arith ? 1 : static_cast<long>(o.cycle().size());
  long n = L + 2 * c1 * c2 + 2;
  return take(n) == o.take(n);
}

ItinerarySpec parse_itinerary(std::string_view text) { return Parser(text).run(); }

std::string print_itinerary(const ItinerarySpec& s) {
  std::ostringstream os;
  auto list = [&os](const std::vector<Symbol>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << ']';
  };
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    if (i) os << ' ';
    const Block& b = s.blocks[i];
    if (b.kind == Block::Kind::Zeros) {
      os << "0^" << b.size();
    } else {
      list(b.symbols);
    }
  }
  os << " | ";
  switch (s.tail) {
    case TailRule::Repeat: os << "repeat"; break;
    case TailRule::Arith: os << "arith"; break;
    case TailRule::Period:
      os << "period ";
      list(s.period);
      break;
  }
  return os.str();
}

ItinerarySpec shift(const ItinerarySpec& s, long n) {
  if (n < 0) throw DomainError("negative shift");
  if (n == 0) return s;
  ItinerarySpec r;
  r.offset = s.offset + n;
  long P = s.prefix_length();
  if (n < P) {
    long drop = n;
    bool last_cut = false;
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
      const Block& b = s.blocks[i];
      long len = static_cast<long>(b.size());
      if (drop >= len) {
        drop -= len;
        continue;
      }
      if (drop > 0) {
        if (i + 1 == s.blocks.size()) last_cut = true;
        if (b.kind == Block::Kind::Zeros) {
          r.blocks.push_back(Block::zeros(len - drop));
        } else {
          r.blocks.push_back(Block::literal({b.symbols.begin() + drop, b.symbols.end()}));
        }
        drop = 0;
      } else {
        r.blocks.push_back(b);
      }
    }
    r.tail = s.tail;
    r.period = s.period;
    if (s.tail == TailRule::Repeat && last_cut) {
      r.tail = TailRule::Period;
      r.period = s.blocks.back().symbols;
    }
    if (s.tail == TailRule::Arith && r.arith_base() != s.arith_base())
      r.blocks.push_back(Block::literal({s.arith_base() + 1}));
    return r;
  }
  long m = n - P;
  if (s.tail == TailRule::Arith) {
    r.blocks.push_back(Block::literal({s.symbol_at(n)}));
    r.tail = TailRule::Arith;
    return r;
  }
  std::vector<Symbol> c = s.cycle();
  std::rotate(c.begin(), c.begin() + (m % static_cast<long>(c.size())), c.end());
  r.blocks.push_back(Block::literal(std::move(c)));
  r.tail = TailRule::Repeat;
  return r;
}

ItinerarySpec prepend_zeros(const ItinerarySpec& s, long n) {
  if (n < 0) throw DomainError("negative zero count");
  if (n == 0) return s;
  ItinerarySpec r = s;
  if (r.blocks.front().kind == Block::Kind::Zeros && !(r.tail == TailRule::Repeat && r.blocks.size() == 1)) {
    r.blocks.front() = Block::zeros(static_cast<long>(r.blocks.front().size()) + n);
  } else {
    r.blocks.insert(r.blocks.begin(), Block::zeros(n));
  }
  return r;
}

ItinerarySpec constant_itinerary(std::vector<Symbol> period) {
  if (!any_nonzero(period)) throw DomainError("itinerary must have non-zero symbols");
  ItinerarySpec s;
  s.blocks.push_back(Block::literal(std::move(period)));
  s.tail = TailRule::Repeat;
  return s;
}

GrowthResult classify_linear_growth(const ItinerarySpec& s, long M, long p, long horizon) {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  long P = s.prefix_length();
  long span = s.tail == TailRule::Arith ? 1 : static_cast<long>(s.cycle().size());
  // The bound M + jp never decreases, so the first pass over the tail's period
  // (or the first arithmetic term) is the hardest case in the tail.
  long J = std::max(horizon, P + span);
  std::vector<Symbol> v = s.take(J);
  GrowthResult out;
  for (long j = 0; j < J; ++j) {
    if (sabs(v[static_cast<std::size_t>(j)]) > M + j * p) {
      out.violation = j;
      return out;
    }
  }
  if (s.tail == TailRule::Arith && p == 0) {
    // |v+1+i| grows without bound against a constant.
    Symbol base = s.arith_base() + 1;
    long i0 = sabs(base) > M ? 0 : static_cast<long>(std::max<Symbol>(0, M - base + 1));
    out.violation = P + i0;
    return out;
  }
  out.witness = GrowthWitness{M, p, J};
  return out;
}

namespace {

// Upper bound on |s_j| over all j >= from, given the prefix suffix maxima.
struct TailBound {
  const ItinerarySpec& s;
  std::vector<Symbol> suffix_max;  // over the prefix only
  long P;
  Symbol cycle_max = 0;

  explicit TailBound(const ItinerarySpec& spec) : s(spec), P(spec.prefix_length()) {
    std::vector<Symbol> pre = s.take(P);
    suffix_max.assign(static_cast<std::size_t>(P) + 1, 0);
    for (long j = P - 1; j >= 0; --j)
      suffix_max[static_cast<std::size_t>(j)] =
          std::max(suffix_max[static_cast<std::size_t>(j) + 1], sabs(pre[static_cast<std::size_t>(j)]));
    if (s.tail != TailRule::Arith) cycle_max = max_abs(s.cycle());
  }

  // For periodic tails: max over j >= from. For arithmetic tails: max over the
  // prefix part plus the bound |v+1| + (from - P)^+, which grows by at most 1 per index.
  double at(long from) const {
    Symbol pre = from < P ? suffix_max[static_cast<std::size_t>(from)] : 0;
    if (s.tail != TailRule::Arith) return static_cast<double>(std::max(pre, cycle_max));
    Symbol t = sabs(s.arith_base() + 1) + std::max(0L, from - P);
    return static_cast<double>(std::max(pre, t));
  }
};

// A F^j(x) >= |s_j| for every j >= from, given f = F at index `from`.
bool covers_rest(const TailBound& tb, long from, double f, double A, bool strict = false) {
  double bound = tb.at(from);
  if (strict ? !(A * f > bound) : !(A * f >= bound)) return false;
  // Arithmetic tails gain at most 1 per step; A F^k gains at least A f^2 / 2.
  if (tb.s.tail == TailRule::Arith) return f >= std::sqrt(2.0 / A);
  return true;
}

}  // namespace

std::optional<ExpBound> exp_bounded_witness(const ItinerarySpec& s, long horizon) {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  static const double kA[] = {1.0 / kTwoPi, 0.5, 1.0, 2.0, 4.0, 8.0};
  TailBound tb(s);
  long P = tb.P;
  long scan = std::max(horizon, P + 1);
  std::vector<Symbol> v = s.take(scan);
  for (double A : kA) {
    for (int xi = 1; xi <= 16; ++xi) {
      double x = 0.5 * xi;
      double f = x;
      bool ok = true;
      for (long k = 0;; ++k) {
        double sk = static_cast<double>(sabs(k < scan ? v[static_cast<std::size_t>(k)] : s.symbol_at(k)));
        if (!(sk < A * f)) {
          ok = false;
          break;
        }
        if (k + 1 >= scan && covers_rest(tb, k + 1, std::expm1(f), A, true)) break;
        if (k > 100000) {
          ok = false;
          break;
        }
        f = std::expm1(f);
      }
      if (ok) return ExpBound{A, x};
    }
  }
  return std::nullopt;
}

std::vector<FastVerdict> is_fast(const ItinerarySpec& s, double x, double A, long N, long horizon) {
  if (!(x > 0 && A > 0)) throw DomainError("is_fast needs x, A > 0");
  constexpr long kMaxK = 10000;
  TailBound tb(s);
  std::vector<Symbol> v = s.take(horizon + 64);
  auto sym = [&](long j) {
    return static_cast<double>(sabs(j < static_cast<long>(v.size()) ? v[static_cast<std::size_t>(j)] : s.symbol_at(j)));
  };
  std::vector<FastVerdict> out;
  for (long n = N; n < horizon; ++n) {
    FastVerdict fv{n, Verdict::Unknown, -1};
    double f = x;
    for (long k = 0; k <= kMaxK; ++k) {
      if (sym(n + k) > A * f) {
        fv.verdict = Verdict::Pass;
        fv.k = k;
        break;
      }
      double fn = std::expm1(f);
      if (covers_rest(tb, n + k + 1, fn, A)) {
        fv.verdict = Verdict::Fail;
        break;
      }
      f = fn;
    }
    out.push_back(fv);
  }
  return out;
}

ItinerarySpec build_fast_itinerary(const std::function<long(long)>& zero_lengths, long horizon) {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  auto zl = [&](long p) {
    long n = zero_lengths(p);
    if (n < 1) throw DomainError("zero block lengths must be positive");
    return n;
  };
  ItinerarySpec u;
  u.tail = TailRule::Arith;
  long n0 = zl(0);
  u.blocks.push_back(Block::zeros(n0));
  long total = n0;
  Symbol next = 0;
  auto emit_literal = [&](Symbol from, Symbol to) {
    std::vector<Symbol> b;
    for (Symbol k = from; k <= to; ++k) b.push_back(k);
    u.blocks.push_back(Block::literal(std::move(b)));
    total += static_cast<long>(to - from + 1);
  };
  for (long p = 1;; ++p) {
    long np = zl(p);
    TowerReal T = f_iter(TowerReal::from_double(1.0), np + p);
    Symbol lp = LLONG_MAX;
    double Td = T.to_double();
    if (Td < 4e18) lp = static_cast<Symbol>(std::ceil(Td));
    lp = std::max(lp, next);
    Symbol room = static_cast<Symbol>(horizon - total);
    if (lp - next + 1 >= room) {
      emit_literal(next, next + std::max<Symbol>(room, 1) - 1);
      return u;
    }
    emit_literal(next, lp);
    next = lp + 1;
    u.blocks.push_back(Block::zeros(np));
    total += np;
    if (total >= horizon) {
      // continue with l_p + 1, l_p + 2, ...
      return u;
    }
  }
}

BlockMarkers block_markers(const ItinerarySpec& s, long j) {
  if (j < 0) throw DomainError("negative block index");
  auto markers = [](const std::vector<Symbol>& sym, long start) {
    BlockMarkers m;
    long first = -1, last = -1;
    for (long i = 0; i < static_cast<long>(sym.size()); ++i) {
      if (sym[static_cast<std::size_t>(i)] != 0) {
        if (first < 0) first = i;
        last = i;
      }
    }
    m.a = start + first;
    m.d = start + last;
    m.b = sym[static_cast<std::size_t>(first)];
    m.e = sym[static_cast<std::size_t>(last)];
    return m;
  };
  long count = 0, idx = 0;
  for (const Block& b : s.blocks) {
    if (b.kind == Block::Kind::Literal && b.has_nonzero()) {
      if (count == j) return markers(b.symbols, idx);
      ++count;
    }
    idx += static_cast<long>(b.size());
  }
  if (s.tail == TailRule::Arith)
    throw StructureError("only " + std::to_string(count) + " literal blocks before an arithmetic tail");
  const auto& c = s.cycle();
  // For Repeat the first occurrence of the cycle was counted with the prefix.
  long rep = j - count;
  return markers(c, idx + rep * static_cast<long>(c.size()));
}

ItinerarySpec random_linear_growth(long M, long p, int prefix_len, int period_len, std::uint64_t seed) {
  if (M < 1 || p < 0 || prefix_len < 0 || period_len < 1) throw DomainError("bad random itinerary parameters");
  std::mt19937_64 rng(seed);
  ItinerarySpec s;
  std::vector<Symbol> pre;
  for (int j = 0; j < prefix_len; ++j) {
    Symbol b = M + static_cast<Symbol>(j) * p;
    pre.push_back(std::uniform_int_distribution<Symbol>(-b, b)(rng));
  }
  std::vector<Symbol> per;
  for (int j = 0; j < period_len; ++j) per.push_back(std::uniform_int_distribution<Symbol>(-M, M)(rng));
  if (!any_nonzero(per)) per[0] = 1;
  if (pre.empty()) return constant_itinerary(per);
  s.blocks.push_back(Block::literal(std::move(pre)));
  s.tail = TailRule::Period;
  s.period = std::move(per);
  return s;
}

}  // namespace expdyn
