#include <catch_amalgamated.hpp>

#include "cmut/json_io.hpp"
#include "cmut/subspace.hpp"

using namespace cmut;

namespace {

const FieldSpec Q = FieldSpec::rationals();
const FieldSpec F2 = FieldSpec::prime(2);
const FieldSpec F3 = FieldSpec::prime(3);

using MQ = Matrix<Rational>;
using MF = Matrix<Fp>;

// Independent count: number of ordered independent k-tuples divided by |GL_k|.
std::uint64_t brute_gaussian(std::size_t n, std::size_t k, std::uint32_t p) {
  std::uint64_t ordered = 1, gl = 1, pn = 1, pk = 1;
  for (std::size_t i = 0; i < n; ++i) pn *= p;
  for (std::size_t i = 0; i < k; ++i) pk *= p;
  std::uint64_t pi = 1;
  for (std::size_t i = 0; i < k; ++i) {
    ordered *= pn - pi;
    gl *= pk - pi;
    pi *= p;
  }
  return ordered / gl;
}

}  // namespace

TEST_CASE("field parsing and arithmetic") {
  CHECK(parse_field("q") == Q);
  CHECK(parse_field("fp:5").p == 5);
  CHECK_THROWS_AS(parse_field("fp:6"), std::invalid_argument);
  CHECK_THROWS_AS(parse_field("fp:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_field("r"), std::invalid_argument);
  CHECK_THROWS_AS(FieldSpec::prime(1), std::invalid_argument);
  CHECK_NOTHROW(FieldSpec::prime(2147483647));
  Fp a(3, 7), b(5, 7);
  CHECK((a * b).v == 1);
  CHECK((a / b * b) == a);
  CHECK((-a + a).v == 0);
  for (std::uint32_t p : {2u, 3u, 5u, 101u})
    for (std::uint32_t x = 1; x < p; ++x) CHECK((Fp(x, p) * Fp(x, p).inverse()).v == 1);
  CHECK(rat_str(parse_rational("6/-4")) == "-3/2");
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
  CHECK(Scalar<Fp>::from_rational(Rational(1, 2), FieldSpec::prime(5)).v == 3);
}

TEST_CASE("rank") {
  CHECK(rank(MQ::identity(2, Q)) == 2);
  CHECK(rank(MQ(3, 4, Q)) == 0);
  CHECK(rank(MQ::from_ints({{1, 2}, {2, 4}}, Q)) == 1);
  CHECK(rank(MF::from_ints({{1, 1}, {1, 1}}, F2)) == 1);
  CHECK(rank(MF::from_ints({{1, 1}, {1, 2}}, F3)) == 2);
}

TEST_CASE("kernel and image bases") {
  auto k = kernel_basis(MQ::from_ints({{1, 0}}, Q));
  CHECK(k.basis() == MQ::from_ints({{0, 1}}, Q));
  CHECK(kernel_basis(MQ::from_ints({{1, 2}, {3, 4}}, Q)).dim() == 0);

  // Oracle: enumerate F_2^3 and keep the vectors annihilated by [1 1 1].
  auto m = MF::from_ints({{1, 1, 1}}, F2);
  auto ker = kernel_basis(m);
  std::size_t annihilated = 0;
  for (int x = 0; x < 8; ++x) {
    Vec<Fp> v{Fp(x & 1, 2), Fp((x >> 1) & 1, 2), Fp((x >> 2) & 1, 2)};
    bool zero = (m * v)[0].v == 0;
    annihilated += zero;
    CHECK(ker.contains(v) == zero);
  }
  CHECK(annihilated == 4);
  CHECK(ker.dim() == 2);
  CHECK(ker.contains(Vec<Fp>{Fp(1, 2), Fp(1, 2), Fp(0, 2)}));

  CHECK(image_basis(MQ::identity(3, Q)).is_full());
  CHECK(image_basis(MQ(2, 3, Q)).is_zero());
  CHECK(image_basis(MQ::from_ints({{1}, {2}}, Q)).basis() == MQ::from_ints({{1, 2}}, Q));
}

TEST_CASE("solve_linear") {
  auto x = solve_linear(MQ::identity(2, Q), Vec<Rational>{3, 5});
  REQUIRE(x);
  CHECK(*x == Vec<Rational>{3, 5});
  x = solve_linear(MQ::from_ints({{1, 1}}, Q), Vec<Rational>{4});
  REQUIRE(x);
  CHECK(*x == Vec<Rational>{4, 0});
  CHECK_FALSE(solve_linear(MQ::from_ints({{0}}, Q), Vec<Rational>{1}));
  CHECK_THROWS_AS(solve_linear(MQ::from_ints({{0}}, Q), Vec<Rational>{1, 2}), std::invalid_argument);
}

TEST_CASE("inverse and kron") {
  auto m = MQ::from_ints({{2, 1}, {1, 1}}, Q);
  auto inv = inverse(m);
  REQUIRE(inv);
  CHECK(*inv * m == MQ::identity(2, Q));
  CHECK_FALSE(inverse(MQ::from_ints({{1, 2}, {2, 4}}, Q)));
  auto k = kron(MQ::from_ints({{1, 2}}, Q), MQ::from_ints({{0, 1}, {1, 0}}, Q));
  CHECK(k == MQ::from_ints({{0, 1, 0, 2}, {1, 0, 2, 0}}, Q));
}

TEST_CASE("subspace enumeration counts") {
  CHECK(enumerate_subspaces<Fp>(2, 1, F2).size() == 3);
  CHECK(enumerate_subspaces<Fp>(3, 2, F2).size() == 7);
  CHECK(enumerate_subspaces<Fp>(4, 0, F3).size() == 1);
  for (std::size_t n = 0; n <= 4; ++n)
    for (std::size_t k = 0; k <= n; ++k)
      for (std::uint32_t p : {2u, 3u}) {
        auto all = enumerate_subspaces<Fp>(n, k, FieldSpec::prime(p));
        CHECK(all.size() == brute_gaussian(n, k, p));
        CHECK(gaussian_binomial(n, k, p) == brute_gaussian(n, k, p));
        std::set<std::string> distinct;
        for (const auto& s : all) {
          CHECK(s.dim() == k);
          distinct.insert(s.basis().str());
        }
        CHECK(distinct.size() == all.size());
      }
  CHECK(gaussian_binomial(4, 2, 3) == 130);
  CHECK(gl_order(2, 2) == 6);
  CHECK_THROWS_AS(enumerate_subspaces<Fp>(8, 4, F3, 1000), BudgetExceeded);
  try {
    enumerate_subspaces<Fp>(4, 2, F3, 10);
  } catch (const BudgetExceeded& e) {
    CHECK(e.needed() == 130);
  }
}

TEST_CASE("superspace enumeration") {
  auto base = Subspace<Fp>::span(MF::from_ints({{1, 1, 0, 0}}, F2));
  std::size_t n = 0;
  for_each_superspace<Fp>(base, 1, [&](const Subspace<Fp>& w) {
    CHECK(w.contains(base));
    CHECK(w.dim() == 2);
    ++n;
    return true;
  });
  CHECK(n == 7);  // planes of F_2^4 through a line = lines of F_2^3
}

TEST_CASE("subspace sampling") {
  auto a = sample_subspaces<Fp>(3, 1, F2, 100, 42);
  auto b = sample_subspaces<Fp>(3, 1, F2, 100, 42);
  CHECK(a.size() <= 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  auto full = sample_subspaces<Fp>(2, 2, F3, 20, 1);
  REQUIRE(full.size() == 1);
  CHECK(full[0].is_full());
  auto planes = sample_subspaces<Fp>(4, 2, F3, 10000, 7);
  auto all = enumerate_subspaces<Fp>(4, 2, F3);
  std::set<std::string> sampled, enumerated;
  for (const auto& s : planes) sampled.insert(s.basis().str());
  for (const auto& s : all) enumerated.insert(s.basis().str());
  CHECK(sampled == enumerated);
}

TEST_CASE("linear algebra properties on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 5;
    auto m = random_matrix<Fp>(r, c, F3, rng);
    auto ker = kernel_basis(m);
    CHECK(rank(m) + ker.dim() == c);
    CHECK((m * ker.basis().transpose()).is_zero());
    auto img = image_basis(m);
    CHECK(Subspace<Fp>::span(img.basis()) == img);
    CHECK(Subspace<Fp>::span(ker.basis()) == ker);
    auto b = m * random_matrix<Fp>(c, 1, F3, rng).col(0);
    auto x = solve_linear(m, b);
    REQUIRE(x);
    CHECK(m * *x == b);
  }
  // Same properties over Q with small integer entries.
  for (int trial = 0; trial < 50; ++trial) {
    MQ m(3, 4, Q);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) m(i, j) = Rational(static_cast<int>(rng() % 7) - 3);
    CHECK(rank(m) + kernel_basis(m).dim() == 4);
    Vec<Rational> b{1, 2, 3};
    if (auto x = solve_linear(m, b)) CHECK(m * *x == b);
  }
}

TEST_CASE("matrix json round trip") {
  auto m = MQ::from_rows({{Rational(1, 2), Rational(-3)}, {Rational(0), Rational(7, 3)}}, 2, Q);
  auto j = to_json(m);
  CHECK(j.dump() == R"([["1/2","-3"],["0","7/3"]])");
  CHECK(matrix_from_json<Rational>(j, Q, "m") == m);
  auto f = MF::from_ints({{1, 4}, {0, 2}}, FieldSpec::prime(5));
  CHECK(to_json(f).dump() == "[[1,4],[0,2]]");
  CHECK(matrix_from_json<Fp>(to_json(f), FieldSpec::prime(5), "f") == f);
  CHECK_THROWS_AS(matrix_from_json<Fp>(Json::parse("[[1],[2,3]]"), F2, 2, 1, "bad"), std::invalid_argument);
}
