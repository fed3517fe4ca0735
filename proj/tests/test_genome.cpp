#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "evopde/errors.hpp"
#include "evopde/genome.hpp"

using namespace evopde;

TEST_CASE("canonicalize sorts genes within modules") {
  auto g = from_bracket("[1],{[1,0],[2]}");
  CHECK(to_bracket(canonicalize(g)) == "[1],{[0,1],[2]}");
}

TEST_CASE("canonicalize collapses duplicate modules") {
  auto g = from_bracket("[1],{[2],[2],[0,1]}");
  CHECK(to_bracket(canonicalize(g)) == "[1],{[0,1],[2]}");
}

TEST_CASE("the wave genome is already canonical") {
  auto g = from_bracket("[2],{[2]}");
  CHECK(canonicalize(g) == g);
}

TEST_CASE("canonicalize is idempotent on random genomes") {
  GenePool pool;
  pool.max_genes_per_module = 3;
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    Genome g = random_genome(pool, rng);
    CHECK(canonicalize(g) == g);
    CHECK(is_canonical(g));
  }
}

TEST_CASE("genome equality ignores gene and module order") {
  auto a = canonicalize(from_bracket("[1],{[3,1],[0,2]}"));
  auto b = canonicalize(from_bracket("[1],{[2,0],[1,3]}"));
  CHECK(a == b);
}

TEST_CASE("random_genome with a forced pool always yields the same genome") {
  GenePool pool;
  pool.lhs_options = {1};
  pool.rhs_options = {2};
  pool.max_initial_modules = 1;
  pool.max_genes_per_module = 1;
  Rng rng(3);
  for (int i = 0; i < 50; ++i)
    CHECK(to_bracket(random_genome(pool, rng)) == "[1],{[2]}");
}

TEST_CASE("random genomes respect the standard pool") {
  GenePool pool;  // lhs {1,2}, rhs {0..3}
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    Genome g = random_genome(pool, rng);
    CHECK((g.lhs == 1 || g.lhs == 2));
    CHECK(g.modules.size() >= 1);
    CHECK(g.modules.size() <= 3);
    for (const auto& m : g.modules) {
      CHECK(m.gene_count() >= 1);
      CHECK(m.gene_count() <= pool.max_genes_per_module);
      for (int gene : m.genes) {
        CHECK(gene >= 0);
        CHECK(gene <= 3);
      }
    }
    CHECK(is_canonical(g));
    CHECK_NOTHROW(validate_genome(g, pool));
  }
}

TEST_CASE("genome length counts all rhs genes") {
  CHECK(from_bracket("[1],{[0,1],[3]}").length() == 3);
  CHECK(from_bracket("[2],{[2]}").length() == 1);
}

TEST_CASE("render formats signed coefficients") {
  auto g = from_bracket("[1],{[1],[2]}");
  CHECK(render(g, {-1.0, 0.1}) == "u_t = -1.000*u_x + 0.100*u_xx");
}

TEST_CASE("render keeps enough digits for near-unit coefficients") {
  auto g = from_bracket("[2],{[2]}");
  CHECK(render(g, {0.9998}) == "u_tt = 0.9998*u_xx");
}

TEST_CASE("render keeps enough digits for small coefficients") {
  auto g = from_bracket("[1],{[0,1],[3]}");
  CHECK(render(g, {-0.993, -0.00248}) == "u_t = -0.993*u*u_x - 0.00248*u_xxx");
}

TEST_CASE("render rejects mismatched coefficient counts") {
  CHECK_THROWS_AS(render(from_bracket("[1],{[1]}"), {1.0, 2.0}), StructuralError);
}

TEST_CASE("bracket notation round trips") {
  for (const char* text : {"[1],{[0,1],[3]}", "[2],{[2]}", "[1],{[0],[0,0,0],[2]}"}) {
    CHECK(to_bracket(from_bracket(text)) == text);
  }
}

TEST_CASE("parse_equation inverts render on random genomes") {
  GenePool pool;
  pool.max_genes_per_module = 3;
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    Genome g = random_genome(pool, rng);
    std::vector<double> coeffs;
    for (std::size_t j = 0; j < g.modules.size(); ++j) {
      double c = rng.uniform(-3.0, 3.0);
      if (c == 0) c = 1.0;
      coeffs.push_back(c);
    }
    auto [parsed, parsed_coeffs] = parse_equation(render(g, coeffs));
    CHECK(parsed == g);
    REQUIRE(parsed_coeffs.size() == coeffs.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      CHECK(parsed_coeffs[j] == doctest::Approx(coeffs[j]).epsilon(2e-4));
  }
}

TEST_CASE("parse_equation handles the reference examples") {
  auto [g, c] = parse_equation("u_t = -0.993*u*u_x - 0.00248*u_xxx");
  CHECK(to_bracket(g) == "[1],{[0,1],[3]}");
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(-0.993));
  CHECK(c[1] == doctest::Approx(-0.00248));

  auto [g2, c2] = parse_equation("u_tt = 0.9998*u_xx");
  CHECK(to_bracket(g2) == "[2],{[2]}");
  CHECK(c2[0] == doctest::Approx(0.9998));
}

TEST_CASE("validate_genome rejects malformed genomes") {
  GenePool pool;
  CHECK_THROWS_AS(validate_genome(Genome{0, {TermModule{{1}}}}, pool), StructuralError);
  CHECK_THROWS_AS(validate_genome(Genome{1, {}}, pool), StructuralError);
  CHECK_THROWS_AS(validate_genome(Genome{1, {TermModule{{}}}}, pool), StructuralError);
  CHECK_THROWS_AS(validate_genome(Genome{1, {TermModule{{7}}}}, pool), StructuralError);
}
