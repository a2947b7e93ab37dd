#include "expdyn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "expdyn/construct.hpp"
#include "expdyn/dynamics.hpp"
#include "expdyn/hair.hpp"
#include "expdyn/itinerary.hpp"

namespace expdyn::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
  return a == std::string_view::npos ? std::string() : std::string(s.substr(a, b - a + 1));
}

double parse_double(std::string_view text, std::size_t at) {
  std::string t = trim(text);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) throw ParseError(at, "expected a number");
  return v;
}

struct Settings {
  double lambda = 1.0;
  double zeta = 30.0;
  long M = 2;
  long p = 1;
  long depth = 1;
  std::optional<double> eta_max;
  double step = 0.5;
  std::string render;
  std::string viewport;
  std::string res = "512x512";
  double gamma = 0.5;
  std::string out;
  std::uint64_t seed = 1;

  std::string command;
  std::string positional;
  std::string mode;
  std::string z = "(0,0)";
  std::string itinerary;
  long n = 2;
  long m_max = 80;
  std::string side = "plus";
  long budget = 40;
  std::optional<double> window;

  std::string canonical() const {
    std::ostringstream o;
    o << "command=" << command << ";lambda=" << num(lambda) << ";zeta=" << num(zeta) << ";M=" << M << ";p=" << p
      << ";depth=" << depth << ";eta-max=" << (eta_max ? num(*eta_max) : "auto") << ";step=" << num(step)
      << ";seed=" << seed << ";args=" << positional;
    if (!render.empty()) o << ";viewport=" << viewport << ";res=" << res << ";gamma=" << num(gamma);
    if (command == "dynamics") {
      o << ";mode=" << mode << ";z=" << z << ";itinerary=" << itinerary << ";n=" << n << ";m-max=" << m_max
        << ";side=" << side << ";budget=" << budget << ";window=" << (window ? num(*window) : "auto");
    }
    return o.str();
  }
};

// Writes to --out when given, else to the command's stream.
void emit(const Settings& st, std::ostream& out, const std::string& text) {
  if (st.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(st.out, std::ios::binary);
  if (!f) throw DomainError("cannot open output file " + st.out);
  f << text;
}

std::string provenance(const Settings& st) {
  std::string c = st.canonical();
  return "config-digest " + config_digest(c) + " " + c;
}

int cmd_trace(Settings st, std::ostream& out) {
  ItinerarySpec s = parse_itinerary(st.positional);
  double eta_max = st.eta_max ? *st.eta_max : st.zeta + 10.0;
  if (!st.render.empty() && st.viewport.empty()) {
    double y0 = kTwoPi * static_cast<double>(s.symbol_at(0));
    st.viewport = num(st.zeta - 2.0) + "," + num(eta_max + 2.0) + "," + num(y0 - kPi) + "," + num(y0 + kPi);
  }
  TailSegment t = tail_polyline(s, st.zeta, eta_max, st.step, st.lambda);
  std::ostringstream o;
  o << "# " << provenance(st) << "\r\n";
  write_tail_csv(o, t);
  emit(st, out, o.str());

  if (!st.render.empty()) {
    RenderSpec spec = parse_render_spec(st.viewport, st.res);
    spec.gamma = st.gamma;
    spec.validate();
    std::vector<ComplexPoint> line;
    for (const HairSample& h : t.samples) line.push_back(h.point);
    std::ofstream f(st.render, std::ios::binary);
    if (!f) throw DomainError("cannot open render file " + st.render);
    write_ppm(f, render_density(line, spec), spec, provenance(st));
  }
  return kExitOk;
}

std::vector<Block> parse_blocks(const std::string& text) {
  ItinerarySpec s = parse_itinerary(text + " | repeat");
  for (const Block& b : s.blocks)
    if (b.kind != Block::Kind::Literal) throw ParseError(0, "blocks must be bracketed literals");
  return s.blocks;
}

int cmd_construct(const Settings& st, std::ostream& out) {
  std::vector<Block> blocks = parse_blocks(st.positional);
  AssembleOptions opt;
  opt.zeta = st.zeta;
  ConstructionCertificate cert;
  try {
    cert = assemble_theorem_a(blocks, st.lambda, st.M, st.p, st.depth, opt);
  } catch (const TowerInfeasible& e) {
    cert.lambda = st.lambda;
    cert.zeta = st.zeta;
    cert.M = st.M;
    cert.p = st.p;
    cert.blocks = blocks;
    cert.truncated = true;
    cert.truncation_reason = e.what();
  }
  emit(st, out, cert.to_text() + provenance(st) + "\n");
  return cert.truncated ? kExitFeasibility : kExitOk;
}

std::string omega_report(const Settings& st, const OmegaReport& r) {
  std::ostringstream o;
  o << "omega-report\n"
    << "z " << st.z << "\n"
    << "class " << to_string(r.cls) << "\n"
    << "evidence " << r.evidence << "\n"
    << "orbit_verdict " << to_string(r.orbit.verdict) << "\n"
    << "precision_horizon " << r.orbit.precision_horizon << "\n"
    << "shadow_episodes " << r.orbit.shadow_starts.size();
  for (long k : r.orbit.shadow_starts) o << ' ' << k;
  o << "\nchecked_markers " << r.checked_markers << "\n";
  return o.str();
}

int cmd_dynamics(const Settings& st, std::ostream& out) {
  std::ostringstream o;
  const std::string prov = provenance(st);
  if (st.mode == "orbit") {
    OrbitRecord r = orbit(parse_point(st.z), st.lambda, st.budget);
    o << "# " << prov << "\r\n# verdict " << to_string(r.verdict) << " precision_horizon " << r.precision_horizon
      << "\r\n";
    r.write_csv(o);
  } else if (st.mode == "shadow") {
    ShadowReport r = shadow_check(parse_point(st.z), st.n, st.lambda);
    o << "shadow-report\nn " << r.n << "\nhypothesis " << (r.hypothesis ? "yes" : "no") << "\nall_within "
      << (r.all_within ? "yes" : "no") << "\nfinal_level ";
    if (r.final_level) o << *r.final_level;
    o << "\n";
    for (std::size_t j = 0; j < r.radii.size(); ++j)
      o << "step " << j << " distance " << num(r.distances[j]) << " radius " << num(r.radii[j]) << "\n";
    o << prov << "\n";
  } else if (st.mode == "find-zs") {
    if (st.itinerary.empty()) throw ParseError(0, "find-zs needs --itinerary");
    SingularEstimate e = find_singular_point(parse_itinerary(st.itinerary), st.lambda, st.depth, st.window);
    o << e.to_record() << prov << "\n";
  } else if (st.mode == "contraction") {
    if (st.side != "plus" && st.side != "minus") throw ParseError(0, "side must be plus or minus");
    ContractionReport r = contraction_experiment(st.n, st.lambda, st.m_max, st.side == "plus" ? Side::Plus : Side::Minus);
    o << "# " << prov << "\r\n# m0 " << r.m0 << " terminal " << num(r.terminal.real()) << ","
      << num(r.terminal.imag()) << " fixed_point " << num(r.fixed_point.real()) << "," << num(r.fixed_point.imag())
      << "\r\nm,diameter,max_distance\r\n";
    for (std::size_t m = 0; m < r.diameters.size(); ++m)
      o << m << "," << num(r.diameters[m]) << "," << num(r.distances[m]) << "\r\n";
  } else if (st.mode == "omega") {
    ComplexPoint z = parse_point(st.z);
    ItinerarySpec s;
    if (!st.itinerary.empty()) {
      s = parse_itinerary(st.itinerary);
    } else {
      // the orbit's own resolved strips, then an arbitrary tail
      OrbitRecord pre = orbit(z, st.lambda, st.budget);
      std::vector<Symbol> sym;
      for (const OrbitStep& k : pre.steps) sym.push_back(k.strip_known ? k.strip : 0);
      s.blocks.push_back(Block::literal(sym));
      s.blocks.push_back(Block::literal({1}));
    }
    o << omega_report(st, classify_omega(z, s, st.lambda, st.budget, st.window)) << prov << "\n";
  } else {
    throw ParseError(0, "unknown dynamics mode " + st.mode);
  }
  emit(st, out, o.str());
  return kExitOk;
}

}  // namespace

void RenderSpec::validate() const {
  if (!(re_max > re_min) || !(im_max > im_min)) throw DomainError("empty viewport");
  if (width < 16 || height < 16) throw DomainError("resolution below 16x16");
  if (!(gamma > 0)) throw DomainError("gamma must be positive");
}

RenderSpec parse_render_spec(std::string_view viewport, std::string_view res) {
  RenderSpec r;
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    std::size_t c = viewport.find(',', start);
    v.push_back(parse_double(viewport.substr(start, c == std::string_view::npos ? c : c - start), start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  if (v.size() != 4) throw ParseError(0, "viewport needs re_min,re_max,im_min,im_max");
  r.re_min = v[0];
  r.re_max = v[1];
  r.im_min = v[2];
  r.im_max = v[3];
  std::size_t x = res.find('x');
  if (x == std::string_view::npos) throw ParseError(0, "resolution must be WxH");
  double w = parse_double(res.substr(0, x), 0), h = parse_double(res.substr(x + 1), x + 1);
  if (w != std::floor(w) || h != std::floor(h) || w > 1e5 || h > 1e5) throw ParseError(0, "bad resolution");
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  r.validate();
  return r;
}

std::vector<std::uint8_t> render_density(const std::vector<ComplexPoint>& polyline, const RenderSpec& spec) {
  spec.validate();
  const double dx = (spec.re_max - spec.re_min) / spec.width;
  const double dy = (spec.im_max - spec.im_min) / spec.height;
  std::vector<std::uint32_t> hits(static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height), 0);
  auto hit = [&](ComplexPoint z) {
    double fx = (z.real() - spec.re_min) / dx, fy = (spec.im_max - z.imag()) / dy;
    if (!(fx >= 0 && fx < spec.width && fy >= 0 && fy < spec.height)) return;
    ++hits[static_cast<std::size_t>(fy) * static_cast<std::size_t>(spec.width) + static_cast<std::size_t>(fx)];
  };
  const double h = 0.5 * std::min(dx, dy);
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    ComplexPoint a = polyline[i], b = polyline[i + 1];
    double len = std::abs(b - a);
    long n = std::max(1L, static_cast<long>(std::ceil(std::min(len / h, 1e6))));
    for (long k = 0; k < n; ++k) hit(a + (b - a) * (static_cast<double>(k) / static_cast<double>(n)));
  }
  if (!polyline.empty()) hit(polyline.back());

  std::uint32_t top = *std::max_element(hits.begin(), hits.end());
  std::vector<std::uint8_t> gray(hits.size(), 0);
  if (top == 0) return gray;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] == 0) continue;
    double v = std::pow(static_cast<double>(hits[i]) / top, spec.gamma);
    gray[i] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * v), 1L, 255L));
  }
  return gray;
}

void write_ppm(std::ostream& os, const std::vector<std::uint8_t>& gray, const RenderSpec& spec,
               const std::string& comment) {
  os << "P6\n# " << comment << "\n" << spec.width << " " << spec.height << "\n255\n";
  for (std::uint8_t g : gray) {
    char px[3] = {static_cast<char>(g), static_cast<char>(g), static_cast<char>(g)};
    os.write(px, 3);
  }
}

std::string config_digest(std::string_view canonical) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ComplexPoint parse_point(std::string_view text) {
  std::string t = trim(text);
  if (t.size() >= 2 && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
  std::size_t c = t.find(',');
  if (c == std::string::npos) throw ParseError(0, "point must be (re,im)");
  return {parse_double(std::string_view(t).substr(0, c), 0), parse_double(std::string_view(t).substr(c + 1), c + 1)};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings st;
  CLI::App app{"Hair traces, itinerary constructions and orbit diagnostics for lambda e^z", "expdyn"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--lambda", st.lambda, "lambda > 1/e");
  app.add_option("--zeta", st.zeta, "base height");
  app.add_option("--M", st.M, "symbol bound");
  app.add_option("--p", st.p, "symbol growth per step");
  app.add_option("--depth", st.depth, "blocks to certify / singular-point depth");
  app.add_option("--eta-max", st.eta_max, "largest eta on a traced tail");
  app.add_option("--step", st.step, "eta step");
  app.add_option("--render", st.render, "PPM output path");
  app.add_option("--viewport", st.viewport, "re_min,re_max,im_min,im_max");
  app.add_option("--res", st.res, "WxH");
  app.add_option("--gamma", st.gamma, "density shading exponent");
  app.add_option("--out", st.out, "output path (stdout when absent)");
  app.add_option("--seed", st.seed, "seed recorded in the config digest");

  CLI::App* trace = app.add_subcommand("trace", "trace the tail of a hair as CSV");
  trace->add_option("itinerary", st.positional, "itinerary, e.g. \"[1] | repeat\"")->required();

  CLI::App* construct = app.add_subcommand("construct", "assemble a construction certificate");
  construct->add_option("blocks", st.positional, "bracketed blocks, e.g. \"[1] [-1]\"")->required();

  CLI::App* dyn = app.add_subcommand("dynamics", "orbit diagnostics");
  dyn->add_option("mode", st.mode, "orbit | shadow | find-zs | contraction | omega")
      ->required()
      ->check(CLI::IsMember({"orbit", "shadow", "find-zs", "contraction", "omega"}));
  dyn->add_option("--z", st.z, "start point (re,im)");
  dyn->add_option("--itinerary", st.itinerary, "itinerary for find-zs and omega");
  dyn->add_option("--n", st.n, "level n for shadow and contraction");
  dyn->add_option("--m-max", st.m_max, "pullback iterations for contraction");
  dyn->add_option("--side", st.side, "plus | minus");
  dyn->add_option("--budget", st.budget, "orbit steps");
  dyn->add_option("--window", st.window, "window half-width c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (!(st.lambda > 1.0 / std::exp(1.0))) throw DomainError("lambda must exceed 1/e");
    if (!(st.step > 0) || !(st.zeta > 0)) throw DomainError("step and zeta must be positive");
    if (trace->parsed()) {
      st.command = "trace";
      return cmd_trace(st, out);
    }
    if (construct->parsed()) {
      st.command = "construct";
      return cmd_construct(st, out);
    }
    st.command = "dynamics";
    st.positional = st.mode;
    return cmd_dynamics(st, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    switch (e.category()) {
      case Error::Category::Parse: return kExitParse;
      case Error::Category::Feasibility: return kExitFeasibility;
      case Error::Category::Numeric: return kExitNumeric;
    }
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace expdyn::cli
