#pragma once

#include <stdexcept>
#include <string>

namespace expdyn {

// Base of every library error. `category` drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Parse, Numeric, Feasibility };
  Error(Category c, const std::string& what) : std::runtime_error(what), category_(c) {}
  Category category() const { return category_; }

 private:
  Category category_;
};

#define EXPDYN_ERROR(Name, Cat)                                                   \
  class Name : public Error {                                                     \
   public:                                                                        \
    explicit Name(const std::string& what) : Error(Category::Cat, #Name ": " + what) {} \
  };

EXPDYN_ERROR(OverflowToTower, Numeric)
EXPDYN_ERROR(BranchCut, Numeric)
EXPDYN_ERROR(DomainError, Numeric)
EXPDYN_ERROR(NoConvergence, Numeric)
EXPDYN_ERROR(DepthInsufficient, Numeric)
EXPDYN_ERROR(NoBracket, Numeric)
EXPDYN_ERROR(StructureError, Parse)
EXPDYN_ERROR(FlatnessInsufficient, Numeric)
EXPDYN_ERROR(StageNotReached, Numeric)
EXPDYN_ERROR(HypothesisUnverifiable, Numeric)
EXPDYN_ERROR(ItineraryMismatch, Numeric)
EXPDYN_ERROR(EmptyWindow, Numeric)
EXPDYN_ERROR(TowerInfeasible, Feasibility)

#undef EXPDYN_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t pos, const std::string& what)
      : Error(Category::Parse, "ParseError at " + std::to_string(pos) + ": " + what), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class NotFound : public Error {
 public:
  NotFound(int k_max, int best_count)
      : Error(Category::Numeric, "NotFound: no k <= " + std::to_string(k_max) +
                                     " passes twice (best count " + std::to_string(best_count) + ")"),
        k_max_(k_max), best_(best_count) {}
  int k_max() const { return k_max_; }
  int best_count() const { return best_; }

 private:
  int k_max_;
  int best_;
};

}  // namespace expdyn
