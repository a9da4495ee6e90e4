#include <catch_amalgamated.hpp>

#include "cmut/stability.hpp"

using namespace cmut;

namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

template <class T>
Representation<T> random_rep(const std::vector<std::size_t>& dims, std::size_t arrows, const FieldSpec& f,
                             std::mt19937_64& rng) {
  Representation<T> r{f, dims, {}, {}};
  for (std::size_t v = 0; v < dims.size(); ++v) r.names.push_back("V" + std::to_string(v));
  std::uniform_int_distribution<std::size_t> pick(0, dims.size() - 1);
  while (r.arrows.size() < arrows) {
    auto s = pick(rng), t = pick(rng);
    if (s >= t) continue;
    r.arrows.push_back({s, t, random_matrix<T>(dims[t], dims[s], f, rng)});
  }
  return r;
}

// Random zero-sum weights for the given dims.
std::vector<Rational> random_weights(const std::vector<std::size_t>& dims, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-4, 4);
  std::vector<Rational> w;
  Rational s = 0;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    w.emplace_back(d(rng));
    s += w.back() * static_cast<long>(dims[i]);
  }
  w.push_back(-s / static_cast<long>(dims.back()));
  return w;
}

template <class T>
ChainSpace<T> morphism_p2(const FieldSpec& f, std::size_t n1) {
  auto ctx = projective_context<T>(2, {-2, -1, 0}, f);
  return morphism_setting(ctx, 0, 1, 2, 1, 1, n1).space;
}

// f1 entries are quadrics, f2 entries linear forms, one per copy of F1.
template <class T>
ChainPoint<T> morphism_point(const ChainSpace<T>& c, const std::vector<std::string>& f1,
                             const std::vector<std::string>& f2) {
  auto x = zero_chain(c);
  std::size_t n1 = c.terms[1][0].mult;
  for (std::size_t y = 0; y < n1; ++y) {
    set_entry_form(x.blocks[0][0][0], n1, y, 0, parse_form(c.ctx, 0, 2, f1.at(y)));
    set_entry_form(x.blocks[0][1][0], n1, y, 0, parse_form(c.ctx, 1, 2, f2.at(y)));
  }
  return x;
}

template <class T>
ChainSpace<T> p2_complex(const FieldSpec& f, std::size_t m1) {
  auto ctx = projective_context<T>(2, {-2, -1, 0, 1}, f);
  return complex3_setting(ctx, 0, 1, 2, 3, 1, m1, 1, 1);
}

template <class T>
ChainPoint<T> syzygy_point(const ChainSpace<T>& c) {
  auto x = zero_chain(c);
  std::vector<std::string> first{"x0", "x1", "x2"}, second{"x2^2", "-x1*x2", "x1^2 - x0*x2"};
  for (std::size_t j = 0; j < 3; ++j) {
    set_entry_form(x.blocks[0][0][0], 3, j, 0, parse_form(c.ctx, 0, 1, first[j]));
    set_entry_form(x.blocks[1][0][0], 1, 0, j, parse_form(c.ctx, 1, 3, second[j]));
  }
  set_entry_form(x.blocks[1][1][0], 1, 0, 0, parse_form(c.ctx, 2, 3, "x0"));
  return x;
}

}  // namespace

TEST_CASE("polarization transforms") {
  auto n = normalize_polarization(R(2), R(4), std::nullopt, 1, 1, 2);
  CHECK(n.weights == std::vector<Rational>{R(1, 3), R(2, 3), R(1, 2)});
  CHECK_THROWS_AS(normalize_polarization(R(1), R(1), R(5), 1, 1, 2), std::invalid_argument);
  CHECK(normalize_polarization(R(1), R(1), R(1), 1, 1, 2).weights[2] == R(1, 2));

  auto r = polarization_from_rho(R(3), 2, 1, 3);
  CHECK(r.weights[0] == R(1, 5));
  CHECK(r.weights[1] == R(3, 5));

  auto first = pol_first_mutation(R(1), R(1), R(10), R(-1), 3);
  CHECK(first.weights == std::vector<Rational>{R(1), R(7), R(1), R(-1)});
  CHECK(first.flags.empty());
  CHECK_FALSE(pol_first_mutation(R(1), R(1), R(2), R(-1), 3).flags.empty());

  auto second = pol_second_mutation(R(1), R(1), R(10), R(-1), 3, 3);
  CHECK(second.weights == std::vector<Rational>{R(4), R(1), R(1), R(-1)});
  CHECK_FALSE(pol_second_mutation(R(1), R(1), R(6), R(-1), 3, 3).flags.empty());

  auto direct = pol_direct_morphism(R(1), R(5), R(3), 3);
  CHECK(direct.weights == std::vector<Rational>{R(2), R(1), R(-3)});
  auto nd = normalize_polarization(R(1), R(5), R(3), 1, 1, 2);
  CHECK(pol_direct_morphism(nd.weights[0], nd.weights[1], nd.weights[2], 3).weights ==
        std::vector<Rational>{R(1, 3), R(1, 6), R(-1, 2)});

  // n = 2, λ2 = 1/2: dim Q1 = 3·1 + 1 = 4, ν1 = 1/(4·4·1/2)
  auto ind = pol_indirect_morphism(R(1, 2), R(1, 2), 3, 1, 1, 4);
  CHECK(ind.weights[0] == R(1, 4));
  CHECK(ind.weights[1] == R(1, 2));  // (a λ2 − λ1)/(dim Q1 λ2)
  CHECK(ind.weights[2] == R(1, 8));
  CHECK(pol_indirect_morphism(R(3, 4), R(1, 4), 3, 1, 1, 4).flags.size() == 1);
  CHECK(pol_indirect_morphism(R(9, 10), R(1, 10), 3, 1, 1, 4).flags.size() == 1);
}

TEST_CASE("singular values agree with an enumeration of dimension vectors") {
  CHECK(singular_values_ex2(2) == std::vector<Rational>{R(1, 3), R(1), R(3)});
  for (std::size_t n = 1; n <= 6; ++n) CHECK(singular_values_ex2(n) == dimension_walls(1, 1, n + 2));
  CHECK(singular_values_ex3(2, 4) == std::vector<Rational>{R(1, 4), R(1, 2)});
  CHECK(singular_values_ex3(5, 3) == std::vector<Rational>{R(1, 3), R(2, 3)});
  auto ch = chambers(singular_values_ex2(2));
  REQUIRE(ch.size() == 4);
  CHECK(ch[1].lower == R(1, 3));
  CHECK(ch[3].upper < 0);
}

TEST_CASE("pruned King search agrees with the naive product search") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto f = FieldSpec::prime(trial % 2 ? 2 : 3);
    std::size_t t = static_cast<std::size_t>(trial);
    std::vector<std::size_t> dims{1 + t % 2, 2, 1 + (t / 2) % 2};
    auto rep = random_rep<Fp>(dims, 1 + trial % 3, f, rng);
    auto w = random_weights(dims, rng);
    auto a = king_pruned(rep, w), b = king_naive(rep, w);
    INFO("trial " << trial);
    CHECK(a.verdict == b.verdict);
    CHECK(a.visited <= b.visited);
    if (a.witness) {
      CHECK(tuple_invariant(rep, *a.witness));
      CHECK(tuple_weight(w, *a.witness) == a.witness_weight);
    }
  }
}

TEST_CASE("King verdicts are invariant under positive scaling") {
  std::mt19937_64 rng(5);
  auto f = FieldSpec::prime(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> dims{1, 2, 2};
    auto rep = random_rep<Fp>(dims, 3, f, rng);
    auto w = random_weights(dims, rng);
    auto w3 = w;
    for (auto& x : w3) x *= R(7, 3);
    CHECK(king_pruned(rep, w).verdict == king_pruned(rep, w3).verdict);
  }
}

TEST_CASE("reductive verdicts are constant inside a chamber") {
  auto f = FieldSpec::prime(3);
  auto c = morphism_p2<Fp>(f, 4);
  auto walls = dimension_walls(1, 1, 4);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    auto x = random_chain_point(c, rng);
    for (const auto& ch : chambers(walls)) {
      Rational lo = ch.lower + (ch.upper < 0 ? R(1) : Rational((ch.upper - ch.lower) / 3));
      Rational hi = ch.upper < 0 ? Rational(ch.lower + 10) : Rational(ch.upper - (ch.upper - ch.lower) / 3);
      auto at = [&](const Rational& rho) {
        return is_semistable_red(c, x, morphism_weights(polarization_from_rho(rho, 1, 1, 4))).verdict;
      };
      CHECK(at(lo) == at(hi));
    }
  }
}

TEST_CASE("zero point is unstable and its witness checks out") {
  auto f = FieldSpec::prime(3);
  auto c = morphism_p2<Fp>(f, 4);
  auto x = zero_chain(c);
  auto w = morphism_weights(polarization_from_rho(R(2), 1, 1, 4));
  auto v = is_semistable_red(c, x, w);
  CHECK(v.verdict == Verdict::unstable);
  CHECK(witness_valid(c, x, w, v));
  auto g = is_semistable_G(c, x, w);
  CHECK(g.verdict == Verdict::unstable);
  CHECK(witness_valid(c, x, w, g));
}

TEST_CASE("fast G-level check agrees with exhaustive orbit enumeration") {
  auto f = FieldSpec::prime(2);
  std::mt19937_64 rng(9);
  SECTION("three-term complexes") {
    auto c = p2_complex<Fp>(f, 1);
    REQUIRE(c.unipotent_terms().size() == 1);
    for (int trial = 0; trial < 6; ++trial) {
      auto x = random_chain_point(c, rng);
      auto w = random_weights(c.vertex_dims(), rng);
      auto fast = semistable_G_fast(c, x, w);
      auto ex = semistable_G_exhaustive(c, x, w);
      INFO("trial " << trial);
      CHECK(fast.verdict == ex.verdict);
      CHECK(witness_valid(c, x, w, fast));
      CHECK(witness_valid(c, x, w, ex));
      // G-(semi)stability implies the reductive notion
      auto red = is_semistable_red(c, x, w).verdict;
      CHECK(static_cast<int>(red) <= static_cast<int>(fast.verdict));
    }
  }
  SECTION("morphisms") {
    auto c = morphism_p2<Fp>(f, 2);
    for (int trial = 0; trial < 6; ++trial) {
      auto x = random_chain_point(c, rng);
      for (auto rho : {R(1, 2), R(2), R(5)}) {
        auto w = morphism_weights(polarization_from_rho(rho, 1, 1, 2));
        CHECK(semistable_G_fast(c, x, w).verdict == semistable_G_exhaustive(c, x, w).verdict);
      }
    }
  }
}

TEST_CASE("syzygy complex on P2 is G-stable above the mutation threshold") {
  // a = 3, b = 3: the certified region is mu2 > 3 mu1 + 3 lambda1
  std::vector<Rational> w{R(1), R(1), R(7), R(-11)};
  for (auto p : {5u, 7u}) {
    auto f = FieldSpec::prime(p);
    auto c = p2_complex<Fp>(f, 3);
    auto x = syzygy_point(c);
    REQUIRE(chain_residual(c, x).ok);
    auto v = is_semistable_G(c, x, w);
    CHECK(v.method == "fast");
    CHECK(v.verdict == Verdict::stable);
    CHECK(is_semistable_red(c, x, w).verdict == Verdict::stable);
  }
  auto c = p2_complex<Rational>(FieldSpec::rationals(), 3);
  auto pv = semistable_G_over_primes(c, syzygy_point(c), w, {5, 7});
  REQUIRE(pv.agreed);
  CHECK(*pv.agreed == Verdict::stable);
}

TEST_CASE("morphism with a large stabilizer is still G-stable") {
  auto f = FieldSpec::prime(5);
  auto c = morphism_p2<Fp>(f, 4);
  auto x = morphism_point(c, {"x1^2", "x2^2", "x0^2", "x0*x1"}, {"x0", "x1", "0", "0"});
  CHECK(stabilizer_dimension(c, x) >= 2);
  auto w = morphism_weights(normalize_polarization(R(3, 5), R(2, 5), std::nullopt, 1, 1, 4));
  auto v = is_semistable_G(c, x, w);
  CHECK(v.verdict == Verdict::stable);
  CHECK(witness_valid(c, x, w, v));
}

TEST_CASE("complex with dependent quadrics is not G-stable") {
  std::vector<Rational> w{R(1), R(1), R(7), R(-11)};
  auto f = FieldSpec::prime(5);
  auto c = p2_complex<Fp>(f, 3);
  auto x = zero_chain(c);
  std::vector<std::string> first{"x0", "x1", "x2"}, second{"x1*x2", "-x0*x2", "0"};
  for (std::size_t j = 0; j < 3; ++j) {
    set_entry_form(x.blocks[0][0][0], 3, j, 0, parse_form(c.ctx, 0, 1, first[j]));
    set_entry_form(x.blocks[1][0][0], 1, 0, j, parse_form(c.ctx, 1, 3, second[j]));
  }
  set_entry_form(x.blocks[1][1][0], 1, 0, 0, parse_form(c.ctx, 2, 3, "x0"));
  REQUIRE(chain_residual(c, x).ok);
  auto v = is_semistable_G(c, x, w);
  CHECK(v.verdict != Verdict::stable);
  CHECK(witness_valid(c, x, w, v));
}

TEST_CASE("existence certificate for three-term complexes") {
  ComplexInput in;
  in.a = 3;
  in.b = 3;
  in.l1 = 1;
  in.m1 = 3;
  in.m2 = 1;
  in.n1 = 1;
  in.lambda1 = 1;
  in.mu1 = 1;
  in.constants = {{"c1", R(0)}, {"c2", R(1, 2)}, {"c", R(1)}};
  auto at = [&](const Rational& mu2) { return certify_complex(complex_input_at_mu2(in, mu2)); };
  CHECK(at(R(7)).certifies("first+second mutation"));
  CHECK_FALSE(at(R(6)).certifies("first+second mutation"));
  CHECK(at(R(7)).theorem("complex projective (2)").vacuous);
  auto b = mu2_boundary(in, "first+second mutation");
  REQUIRE(b);
  CHECK(b->value == R(6));  // (n+1) mu1 + n(n+1)/2 at n = 2
  CHECK_FALSE(b->holds_at_boundary);

  auto missing = in;
  missing.constants.erase("c");
  auto m = certify_complex(complex_input_at_mu2(missing, R(7)));
  CHECK(m.theorem("complex projective (2)").missing == std::vector<std::string>{"c"});
  CHECK_FALSE(m.certifies("first+second mutation"));
}

TEST_CASE("existence certificate for morphisms") {
  MorphismInput in;
  in.a = 3;
  in.h11 = 6;
  in.h12 = 3;
  in.a_prime = 3;
  in.m1 = 2;
  in.m2 = 1;
  in.n1 = 3;
  in.constants = {{"c0", R(0)}, {"c0p", R(9, 5)}, {"c1_534", R(0)}, {"c2_534", R(0)}};
  auto direct = rho_boundary(in, "direct");
  REQUIRE(direct);
  CHECK(direct->value == R(3));
  CHECK_FALSE(direct->holds_at_boundary);
  auto indirect = rho_boundary(in, "indirect transfer");
  REQUIRE(indirect);
  CHECK(indirect->value == R(3));  // c0p m1 / (n1 - c0p m2) = (18/5) / (6/5)
  CHECK(indirect->holds_at_boundary);
  auto cert = certify_morphism(morphism_input_at_rho(in, R(4)));
  CHECK(cert.certifies("direct"));
  CHECK(cert.certifies("indirect"));
  CHECK(cert.notes.empty());
  auto j = to_json(cert);
  CHECK(j["setting"] == "morphism");
  CHECK(j["theorems"].size() == cert.theorems.size());
}
