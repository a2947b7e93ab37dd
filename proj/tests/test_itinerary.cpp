#include <doctest.h>

#include <cmath>
#include <random>

#include "expdyn/itinerary.hpp"
#include "expdyn/xnum.hpp"

using namespace expdyn;

namespace {

// Independent brute-force model of the DSL: expands to a long explicit list.
std::vector<Symbol> expand(const ItinerarySpec& s, long n) {
  std::vector<Symbol> v;
  for (long j = 0; j < n; ++j) v.push_back(s.symbol_at(j));
  return v;
}

ItinerarySpec random_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ng(1, 4), kind(0, 2), len(1, 4), sym(-6, 6), tail(0, 2);
  ItinerarySpec s;
  int groups = ng(rng);
  for (int g = 0; g < groups; ++g) {
    if (kind(rng) == 0) {
      s.blocks.push_back(Block::zeros(len(rng)));
    } else {
      std::vector<Symbol> lit;
      for (int i = 0, n = len(rng); i < n; ++i) lit.push_back(sym(rng));
      s.blocks.push_back(Block::literal(lit));
    }
  }
  switch (tail(rng)) {
    case 0:
      if (!s.blocks.back().has_nonzero()) s.blocks.push_back(Block::literal({sym(rng) | 1}));
      s.tail = TailRule::Repeat;
      break;
    case 1: s.tail = TailRule::Arith; break;
    default:
      s.tail = TailRule::Period;
      for (int i = 0, n = len(rng); i < n; ++i) s.period.push_back(sym(rng));
      s.period.push_back(sym(rng) | 1);
  }
  return s;
}

}  // namespace

TEST_CASE("parse grammar cases") {
  ItinerarySpec s = parse_itinerary("0^3 [1 -2] | repeat");
  CHECK(expand(s, 9) == std::vector<Symbol>{0, 0, 0, 1, -2, 1, -2, 1, -2});
  CHECK(print_itinerary(s) == "0^3 [1 -2] | repeat");

  ItinerarySpec a = parse_itinerary("[1] | arith");
  CHECK(expand(a, 5) == std::vector<Symbol>{1, 2, 3, 4, 5});

  ItinerarySpec p = parse_itinerary("  [4]   0^2|period [1 0 -1] ");
  CHECK(expand(p, 9) == std::vector<Symbol>{4, 0, 0, 1, 0, -1, 1, 0, -1});
  CHECK(print_itinerary(p) == "[4] 0^2 | period [1 0 -1]");

  CHECK(expand(parse_itinerary("0^2 | arith"), 4) == std::vector<Symbol>{0, 0, 1, 2});
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_itinerary("0^2 [5]"), ParseError);
  try {
    parse_itinerary("0^2 [5]");
  } catch (const ParseError& e) {
    CHECK(e.position() == 7);
  }
  CHECK_THROWS_AS(parse_itinerary("[1 2] 0^3 | repeat"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("[1] | period [0 0]"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("0^0 [1] | repeat"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("[] | repeat"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("| repeat"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("[1 x] | repeat"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("[1] | cycle"), ParseError);
  CHECK_THROWS_AS(parse_itinerary("[1] | repeat extra"), ParseError);
  try {
    parse_itinerary("[1 2] | bogus");
  } catch (const ParseError& e) {
    CHECK(e.position() == 8);
  }
}

TEST_CASE("printer round trip on random corpus") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    ItinerarySpec s = random_spec(rng);
    std::string text = print_itinerary(s);
    ItinerarySpec back = parse_itinerary(text);
    CHECK(back == s);
    CHECK(print_itinerary(back) == text);
  }
}

TEST_CASE("shift examples") {
  ItinerarySpec s = parse_itinerary("[1 2 3] | repeat");
  CHECK(shift(s, 0) == s);
  CHECK(shift(s, 1).symbol_at(0) == 2);
  CHECK(shift(shift(s, 2), 3).same_value(shift(s, 5)));
  CHECK(shift(s, 7).offset == 7);
  ItinerarySpec t = parse_itinerary("[5] 0^3 | arith");
  CHECK(expand(shift(t, 1), 5) == std::vector<Symbol>{0, 0, 0, 6, 7});
}

TEST_CASE("shift and symbol_at agree exhaustively") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    ItinerarySpec s = random_spec(rng);
    std::vector<Symbol> full = expand(s, 140);
    for (long n = 0; n <= 64; ++n) {
      ItinerarySpec sh = shift(s, n);
      for (long j = 0; j <= 64; ++j) CHECK(sh.symbol_at(j) == full[static_cast<std::size_t>(n + j)]);
      // shifted specs stay printable and parseable
      CHECK(parse_itinerary(print_itinerary(sh)).same_value(sh));
    }
  }
}

TEST_CASE("prepend zeros") {
  ItinerarySpec s = parse_itinerary("[1 -1] | repeat");
  ItinerarySpec z = prepend_zeros(s, 3);
  CHECK(expand(z, 7) == std::vector<Symbol>{0, 0, 0, 1, -1, 1, -1});
  CHECK(shift(z, 3).same_value(s));
  ItinerarySpec zz = prepend_zeros(z, 2);
  CHECK(zz.blocks.front().size() == 5);
}

TEST_CASE("linear growth classification") {
  ItinerarySpec id = parse_itinerary("[0] | arith");
  auto r = classify_linear_growth(id, 0, 1, 100);
  REQUIRE(r.ok());
  CHECK(r.witness->checked_horizon >= 100);

  auto c = classify_linear_growth(parse_itinerary("[5] | repeat"), 4, 0, 10);
  CHECK(!c.ok());
  CHECK(c.violation == 0);

  CHECK(classify_linear_growth(parse_itinerary("[0 1] | repeat"), 1, 0, 10).ok());

  // arithmetic tail against a constant bound fails past the horizon
  auto far = classify_linear_growth(parse_itinerary("[0] | arith"), 50, 0, 10);
  CHECK(!far.ok());
  CHECK(far.violation == 51);

  // periodic tail: the violation sits in the first period after the horizon
  auto late = classify_linear_growth(parse_itinerary("0^20 [9 1] | repeat"), 0, 0, 5);
  CHECK(late.violation == 20);
}

TEST_CASE("shift closure of linear growth") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    long M = 2, p = 1;
    ItinerarySpec s = random_linear_growth(M, p, 12, 3, seed);
    REQUIRE(classify_linear_growth(s, M, p, 50).ok());
    for (long n = 0; n < 20; ++n) CHECK(classify_linear_growth(shift(s, n), M + n * p, p, 50).ok());
  }
}

namespace {

// Brute-force oracle: scan the grid with plain doubles over a long window.
std::optional<ExpBound> grid_oracle(const ItinerarySpec& s, long window) {
  for (double A : {1.0 / (2 * kPi), 0.5, 1.0, 2.0, 4.0, 8.0}) {
    for (int xi = 1; xi <= 16; ++xi) {
      double x = 0.5 * xi, f = x;
      bool ok = true;
      for (long k = 0; k < window && ok; ++k) {
        ok = std::fabs(static_cast<double>(s.symbol_at(k))) < A * f;
        f = std::expm1(f);
      }
      if (ok) return ExpBound{A, x};
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("exponential boundedness witnesses") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ItinerarySpec s = random_linear_growth(3, 2, 10, 4, seed);
    auto w = exp_bounded_witness(s, 30);
    REQUIRE(w.has_value());
    auto o = grid_oracle(s, 400);
    REQUIRE(o.has_value());
    CHECK(w->A == o->A);
    CHECK(w->x == o->x);
    CHECK(w->A >= 1.0 / (2 * kPi));
  }
  ItinerarySpec lone = parse_itinerary("0^3 [1] 0^6 | period [0 0 0 0 0 0 0 1]");
  auto w = exp_bounded_witness(lone, 10);
  REQUIRE(w.has_value());
  auto o = grid_oracle(lone, 200);
  CHECK(w->A == o->A);
  CHECK(w->x == o->x);

  CHECK(!exp_bounded_witness(parse_itinerary("[1000] | repeat"), 10).has_value());
  auto dbl = exp_bounded_witness(parse_itinerary("[2 4 16 256 65536 4294967296] | repeat"), 6);
  REQUIRE(dbl.has_value());
  CHECK(dbl->A == 0.5);
  CHECK(dbl->x == 4.5);

  // arithmetic tails are dominated once F^k outruns the linear growth
  CHECK(exp_bounded_witness(parse_itinerary("[0] | arith"), 10).has_value());
}

TEST_CASE("is_fast verdicts") {
  auto bounded = is_fast(parse_itinerary("[3 -1 2] | repeat"), 2.5, 2.5, 0, 200);
  for (const auto& v : bounded) CHECK(v.verdict == Verdict::Fail);

  // s_j = j at x = A = 3: k = 0 wins once n > 9, earlier n fail
  auto lin = is_fast(parse_itinerary("[0] | arith"), 3, 3, 0, 50);
  int pass = 0, fail = 0;
  for (const auto& v : lin) {
    if (v.verdict == Verdict::Pass) ++pass;
    if (v.verdict == Verdict::Fail) ++fail;
    if (v.n > 9) CHECK(v.verdict == Verdict::Pass);
  }
  CHECK(pass > 0);
  CHECK(fail > 0);

  // x tiny and a long zero run: F^k(x) barely moves, so no decision within the budget
  auto stuck = is_fast(parse_itinerary("0^20000 [1] | repeat"), 1e-9, 1.0, 0, 1);
  CHECK(stuck[0].verdict == Verdict::Unknown);
}

TEST_CASE("fast itinerary generator") {
  ItinerarySpec u = build_fast_itinerary([](long) { return 1L; }, 300);
  // l_1 is the first integer >= F^2(1) = 4.574
  auto m0 = block_markers(u, 0);
  CHECK(m0.d == 1 + 5);
  CHECK(m0.e == 5);
  CHECK(u.blocks[0].kind == Block::Kind::Zeros);
  for (std::size_t i = 0; i < u.blocks.size(); ++i)
    CHECK(u.blocks[i].kind == (i % 2 == 0 ? Block::Kind::Zeros : Block::Kind::Literal));
  CHECK(classify_linear_growth(u, 0, 1, 300).ok());
  // l_2 >= F^3(1) = 96.02
  auto m1 = block_markers(u, 1);
  CHECK(m1.e == 97);
  CHECK(u.prefix_length() >= 300);
}

TEST_CASE("block markers") {
  ItinerarySpec s = parse_itinerary("0^2 [3] 0^4 [1 -5] | period [0 0 7]");
  auto m0 = block_markers(s, 0);
  CHECK(m0.a == 2);
  CHECK(m0.d == 2);
  CHECK(m0.b == 3);
  CHECK(m0.e == 3);
  auto m1 = block_markers(s, 1);
  CHECK(m1.a == 7);
  CHECK(m1.d == 8);
  CHECK(m1.b == 1);
  CHECK(m1.e == -5);
  auto m2 = block_markers(s, 2);
  CHECK(m2.a == 11);
  CHECK(s.symbol_at(m2.d) == m2.e);
  auto m3 = block_markers(s, 3);
  CHECK(m3.a == 14);
  CHECK_THROWS_AS(block_markers(parse_itinerary("0^2 [3] | arith"), 1), StructureError);

  ItinerarySpec r = parse_itinerary("0^1 [2 -3] | repeat");
  CHECK(block_markers(r, 0).a == 1);
  CHECK(block_markers(r, 1).a == 3);
  CHECK(block_markers(r, 2).e == -3);
  CHECK(block_markers(r, 2).d == 6);
}
