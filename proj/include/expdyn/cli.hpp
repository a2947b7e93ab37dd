#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "expdyn/xnum.hpp"

namespace expdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitFeasibility = 4;

struct RenderSpec {
  double re_min = 0, re_max = 1, im_min = 0, im_max = 1;
  int width = 512;
  int height = 512;
  double gamma = 0.5;

  void validate() const;  // throws DomainError
};

// "re_min,re_max,im_min,im_max" and "WxH".
RenderSpec parse_render_spec(std::string_view viewport, std::string_view res);

// Grayscale density: each pixel counts samples along the polyline, spaced at
// most half a pixel apart; intensity 255 (count / max)^gamma.
std::vector<std::uint8_t> render_density(const std::vector<ComplexPoint>& polyline, const RenderSpec& spec);

// Binary P6 with the comment line "# <comment>" in the header.
void write_ppm(std::ostream& os, const std::vector<std::uint8_t>& gray, const RenderSpec& spec,
               const std::string& comment);

// FNV-1a over the canonical configuration text, as 16 hex digits.
std::string config_digest(std::string_view canonical);

// "(x,y)" or "x,y".
ComplexPoint parse_point(std::string_view text);

// Full command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace expdyn::cli
