#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "expdyn/construct.hpp"

namespace expdyn {

namespace {

// Smallest c with |t[i]| <= M + (c + i) p for every i.
long lead_zeros_for(const Block& t, long M, long p) {
  long c = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    long need = std::llabs(t.symbols[i]) - M - static_cast<long>(i) * p;
    if (need <= 0) continue;
    if (p == 0) throw DomainError("block symbol exceeds M with p = 0");
    c = std::max(c, (need + p - 1) / p);
  }
  return c;
}

std::vector<Symbol> normalized(const Block& t, long c) {
  std::vector<Symbol> out(static_cast<std::size_t>(c), 0);
  out.insert(out.end(), t.symbols.begin(), t.symbols.end());
  return out;
}

// Normalized blocks from index `start`, cycled.
ItinerarySpec cycled_from(const std::vector<std::vector<Symbol>>& norm, std::size_t start) {
  std::vector<Symbol> cyc;
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const auto& b = norm[(start + i) % norm.size()];
    cyc.insert(cyc.end(), b.begin(), b.end());
  }
  ItinerarySpec s;
  s.blocks.push_back(Block::literal(std::move(cyc)));
  s.tail = TailRule::Repeat;
  return s;
}

std::string join(const std::vector<long>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

}  // namespace

ZeroBlockResult min_zero_block_report(const ItinerarySpec& u, const TargetRect& rect, long k_max, double lambda,
                                      double zeta) {
  if (k_max < 1) throw DomainError("k_max must be at least 1");
  int best = 0;
  for (long k = 1; k <= k_max; ++k) {
    int c = crossing_count(u, k, rect, lambda, zeta);
    best = std::max(best, c);
    if (c < 2) continue;
    ZeroBlockResult r{k, c, {}};
    bool holds = true;
    for (long j = 1; j <= 2 && holds; ++j) {
      r.persistence.push_back(crossing_count(u, k + j, rect, lambda, zeta));
      holds = r.persistence.back() >= 2;
    }
    if (holds) return r;
  }
  throw NotFound(static_cast<int>(k_max), best);
}

long min_zero_block(const ItinerarySpec& u, const TargetRect& rect, long k_max, double lambda, double zeta) {
  return min_zero_block_report(u, rect, k_max, lambda, zeta).k;
}

ConstructionCertificate assemble_theorem_a(const std::vector<Block>& blocks, double lambda, long M, long p,
                                           long depth_j, const AssembleOptions& opt) {
  if (blocks.empty()) throw DomainError("at least one block is required");
  if (M < 1 || p < 0 || depth_j < 1) throw DomainError("need M >= 1, p >= 0, depth >= 1");
  for (const Block& b : blocks)
    if (b.kind != Block::Kind::Literal || !b.has_nonzero()) throw DomainError("every block needs a non-zero term");

  ConstructionCertificate cert;
  cert.lambda = lambda;
  cert.zeta = opt.zeta;
  cert.M = M;
  cert.p = p;
  cert.blocks = blocks;
  std::vector<std::vector<Symbol>> norm;
  for (const Block& b : blocks) {
    long c = lead_zeros_for(b, M, p);
    cert.lead_zeros.push_back(c);
    norm.push_back(normalized(b, c));
  }
  const std::size_t B = norm.size();
  auto m_of = [&](long j) { return static_cast<long>(norm[static_cast<std::size_t>(j) % B].size()); };

  cert.zero_lengths = {0};
  long q = m_of(0);
  for (long j = 0; j < depth_j; ++j) {
    if (2 * q + 1 > kMaxTowerLevel) {
      if (j == 0) throw TowerInfeasible("b_{2q_0} is beyond tower level " + std::to_string(kMaxTowerLevel));
      cert.truncated = true;
      cert.truncation_reason = "b_{2q_" + std::to_string(j) + "} = b_" + std::to_string(2 * q) +
                               " exceeds tower level " + std::to_string(kMaxTowerLevel);
      break;
    }
    TargetLadder ladder = build_ladder(lambda, opt.zeta, M, p, 2 * q);
    TargetRect rect = ladder.rect(q, 2 * q, q);
    ItinerarySpec u = cycled_from(norm, static_cast<std::size_t>(j + 1) % B);
    ZeroBlockResult r;
    try {
      r = min_zero_block_report(u, rect, opt.k_max, lambda, opt.zeta);
    } catch (const NotFound& e) {
      if (j == 0) throw;
      cert.truncated = true;
      cert.truncation_reason = e.what();
      break;
    }
    cert.q_indices.push_back(q);
    cert.targets.push_back(rect);
    cert.zero_lengths.push_back(r.k);
    q += r.k + m_of(j + 1);
  }

  // s = t'_0 0_{n_1} t'_1 ... 0_{n_J}, then the normalized blocks cycle from t'_J on
  const std::size_t J = cert.q_indices.size();
  ItinerarySpec& s = cert.itinerary;
  for (std::size_t j = 0; j < J; ++j) {
    if (cert.lead_zeros[j % B] > 0) s.blocks.push_back(Block::zeros(cert.lead_zeros[j % B]));
    s.blocks.push_back(Block::literal(blocks[j % B].symbols));
    s.blocks.push_back(Block::zeros(cert.zero_lengths[j + 1]));
  }
  ItinerarySpec tail = cycled_from(norm, J % B);
  s.blocks.push_back(tail.blocks.front());
  s.tail = TailRule::Repeat;

  cert.crossing_counts = reverify(cert, lambda, opt.zeta);
  return cert;
}

std::vector<int> reverify(const ConstructionCertificate& cert, double lambda, double zeta) {
  std::vector<int> out;
  for (std::size_t j = 0; j < cert.q_indices.size(); ++j) {
    // sigma^{q_j}(s) = 0_{n_{j+1}} v
    long n = cert.zero_lengths.at(j + 1);
    ItinerarySpec v = shift(cert.itinerary, cert.q_indices[j] + n);
    out.push_back(crossing_count(v, n, cert.targets[j], lambda, zeta));
  }
  return out;
}

std::string ConstructionCertificate::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "expdyn-certificate 1\n";
  os << "lambda " << lambda << "\nzeta " << zeta << "\nM " << M << "\np " << p << "\n";
  os << "blocks";
  for (const Block& b : blocks) {
    os << " [";
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << b.symbols[i];
    os << ']';
  }
  os << "\nlead_zeros " << join(lead_zeros) << "\nzero_lengths " << join(zero_lengths) << "\nq_indices "
     << join(q_indices) << "\n";
  for (std::size_t j = 0; j < targets.size(); ++j)
    os << "target " << j << " a=" << targets[j].a.literal() << " b=" << targets[j].b.literal()
       << " K=" << targets[j].K << "\n";
  os << "crossing_counts";
  for (int c : crossing_counts) os << ' ' << c;
  os << "\nitinerary " << print_itinerary(itinerary) << "\n";
  std::ostringstream eps;
  eps << kFlatnessEps0;
  os << "sampling geometric=" << kDescentGeoSamples << " height=" << kDescentHeightSamples << " eps0=" << eps.str()
     << "\n";
  os << "truncated " << (truncated ? "yes" : "no") << "\n";
  if (truncated) os << "truncation_reason " << truncation_reason << "\n";
  return os.str();
}

}  // namespace expdyn
