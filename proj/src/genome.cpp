#include "evopde/genome.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "evopde/errors.hpp"

namespace evopde {

int Genome::length() const {
  int n = 0;
  for (const auto& m : modules) n += m.gene_count();
  return n;
}

void GenePool::validate() const {
  if (lhs_options.empty() || rhs_options.empty())
    throw ConfigError("gene pool options must be non-empty");
  for (int o : lhs_options)
    if (o < 1 || o > max_temporal_order)
      throw ConfigError("lhs option outside [1, max_temporal_order]");
  for (int o : rhs_options)
    if (o < 0 || o > max_spatial_order)
      throw ConfigError("rhs option outside [0, max_spatial_order]");
  if (max_initial_modules < 1 || max_genes_per_module < 1)
    throw ConfigError("initial genome size bounds must be >= 1");
}

Genome canonicalize(const Genome& g) {
  Genome out = g;
  for (auto& m : out.modules) std::sort(m.genes.begin(), m.genes.end());
  std::sort(out.modules.begin(), out.modules.end());
  out.modules.erase(std::unique(out.modules.begin(), out.modules.end()),
                    out.modules.end());
  return out;
}

bool is_canonical(const Genome& g) {
  for (const auto& m : g.modules)
    if (!std::is_sorted(m.genes.begin(), m.genes.end())) return false;
  if (!std::is_sorted(g.modules.begin(), g.modules.end())) return false;
  return std::adjacent_find(g.modules.begin(), g.modules.end()) ==
         g.modules.end();
}

void validate_genome(const Genome& g, const GenePool& pool) {
  if (g.lhs < 1 || g.lhs > pool.max_temporal_order)
    throw StructuralError("lhs gene outside [1, max_temporal_order]");
  if (g.modules.empty()) throw StructuralError("genome has no rhs modules");
  for (const auto& m : g.modules) {
    if (m.genes.empty()) throw StructuralError("empty module");
    for (int gene : m.genes)
      if (gene < 0 || gene > pool.max_spatial_order)
        throw StructuralError("gene outside [0, max_spatial_order]");
  }
}

Genome random_genome(const GenePool& pool, Rng& rng) {
  Genome g;
  g.lhs = pool.lhs_options[rng.below(pool.lhs_options.size())];
  const int n_modules = rng.uniform_int(1, pool.max_initial_modules);
  g.modules.reserve(n_modules);
  for (int i = 0; i < n_modules; ++i) {
    TermModule m;
    const int n_genes = rng.uniform_int(1, pool.max_genes_per_module);
    for (int k = 0; k < n_genes; ++k)
      m.genes.push_back(pool.rhs_options[rng.below(pool.rhs_options.size())]);
    g.modules.push_back(std::move(m));
  }
  return canonicalize(g);
}

std::string to_bracket(const Genome& g) {
  std::ostringstream os;
  os << '[' << g.lhs << "],{";
  for (std::size_t i = 0; i < g.modules.size(); ++i) {
    if (i) os << ',';
    os << '[';
    for (std::size_t k = 0; k < g.modules[i].genes.size(); ++k) {
      if (k) os << ',';
      os << g.modules[i].genes[k];
    }
    os << ']';
  }
  os << '}';
  return os.str();
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c))
      throw StructuralError("bracket genome parse error at position " +
                            std::to_string(pos) + " in '" + s + "'");
  }
  int integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw StructuralError("expected integer in '" + s + "'");
    return std::stoi(s.substr(start, pos - start));
  }
};

std::vector<int> parse_gene_list(Cursor& c) {
  c.expect('[');
  std::vector<int> genes;
  genes.push_back(c.integer());
  while (c.accept(',')) genes.push_back(c.integer());
  c.expect(']');
  return genes;
}

}  // namespace

Genome from_bracket(const std::string& text) {
  Cursor c{text};
  Genome g;
  auto lhs = parse_gene_list(c);
  if (lhs.size() != 1) throw StructuralError("lhs must hold exactly one gene");
  g.lhs = lhs[0];
  c.expect(',');
  c.expect('{');
  g.modules.push_back(TermModule{parse_gene_list(c)});
  while (c.accept(',')) g.modules.push_back(TermModule{parse_gene_list(c)});
  c.expect('}');
  c.skip_ws();
  if (c.pos != text.size())
    throw StructuralError("trailing characters in bracket genome '" + text + "'");
  return g;
}

std::string render_module(const TermModule& m) {
  std::string out;
  for (std::size_t i = 0; i < m.genes.size(); ++i) {
    if (i) out += '*';
    out += 'u';
    if (m.genes[i] > 0) {
      out += '_';
      out.append(static_cast<std::size_t>(m.genes[i]), 'x');
    }
  }
  return out;
}

std::string format_coefficient(double c) {
  if (c == 0.0) c = 0.0;  // normalize -0
  char buf[64];
  for (int decimals = 3; decimals <= 12; ++decimals) {
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, c);
    const double printed = std::strtod(buf, nullptr);
    if (std::abs(printed - c) <= 1e-4 * std::abs(c)) break;
  }
  return buf;
}

std::string render(const Genome& g, const std::vector<double>& coeffs) {
  if (coeffs.size() != g.modules.size())
    throw StructuralError("coefficient count does not match module count");
  std::string out = g.lhs == 1 ? "u_t" : g.lhs == 2 ? "u_tt" : "u_" + std::string(g.lhs, 't');
  out += " = ";
  for (std::size_t i = 0; i < g.modules.size(); ++i) {
    const double c = coeffs[i];
    if (i == 0) {
      out += format_coefficient(c);
    } else {
      out += c < 0 ? " - " : " + ";
      out += format_coefficient(std::abs(c));
    }
    out += '*';
    out += render_module(g.modules[i]);
  }
  return out;
}

namespace {

// One rendered term: "<mantissa>*u...*u_xx". Returns the module and the
// unsigned coefficient.
std::pair<TermModule, double> parse_term(const std::string& term) {
  const auto star = term.find('*');
  if (star == std::string::npos)
    throw StructuralError("term without coefficient: '" + term + "'");
  double coeff = 0.0;
  try {
    coeff = std::stod(term.substr(0, star));
  } catch (const std::exception&) {
    throw StructuralError("bad coefficient in term '" + term + "'");
  }
  TermModule m;
  std::size_t i = star + 1;
  while (i < term.size()) {
    if (term[i] != 'u') throw StructuralError("bad factor in term '" + term + "'");
    ++i;
    int order = 0;
    if (i < term.size() && term[i] == '_') {
      ++i;
      while (i < term.size() && term[i] == 'x') {
        ++order;
        ++i;
      }
      if (order == 0) throw StructuralError("bad subscript in term '" + term + "'");
    }
    m.genes.push_back(order);
    if (i < term.size()) {
      if (term[i] != '*') throw StructuralError("expected '*' in term '" + term + "'");
      ++i;
    }
  }
  if (m.genes.empty()) throw StructuralError("empty term '" + term + "'");
  return {m, coeff};
}

}  // namespace

std::pair<Genome, std::vector<double>> parse_equation(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw StructuralError("equation lacks '='");

  auto strip = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };

  const std::string lhs = strip(text.substr(0, eq));
  if (lhs.size() < 3 || lhs.substr(0, 2) != "u_")
    throw StructuralError("bad equation lhs '" + lhs + "'");
  Genome g;
  g.lhs = 0;
  for (std::size_t i = 2; i < lhs.size(); ++i) {
    if (lhs[i] != 't') throw StructuralError("bad equation lhs '" + lhs + "'");
    ++g.lhs;
  }

  // Split the rhs on top-level " + " / " - " separators.
  std::string rhs = strip(text.substr(eq + 1));
  std::vector<std::string> terms;
  std::vector<double> signs;
  std::size_t start = 0;
  double sign = 1.0;
  if (!rhs.empty() && rhs[0] == '+') start = 1;
  for (std::size_t i = start; i < rhs.size(); ++i) {
    if (i + 2 < rhs.size() && rhs[i] == ' ' && (rhs[i + 1] == '+' || rhs[i + 1] == '-') &&
        rhs[i + 2] == ' ') {
      terms.push_back(strip(rhs.substr(start, i - start)));
      signs.push_back(sign);
      sign = rhs[i + 1] == '-' ? -1.0 : 1.0;
      start = i + 3;
      i += 2;
    }
  }
  terms.push_back(strip(rhs.substr(start)));
  signs.push_back(sign);

  std::vector<std::pair<TermModule, double>> parsed;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [m, c] = parse_term(terms[i]);
    std::sort(m.genes.begin(), m.genes.end());
    parsed.emplace_back(std::move(m), signs[i] * c);
  }
  std::sort(parsed.begin(), parsed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> coeffs;
  for (auto& [m, c] : parsed) {
    g.modules.push_back(std::move(m));
    coeffs.push_back(c);
  }
  if (!is_canonical(g))
    throw StructuralError("rendered equation contains duplicate modules");
  return {g, coeffs};
}

}  // namespace evopde
