#include <catch_amalgamated.hpp>

#include "cmut/abstract.hpp"

using namespace cmut;

namespace {

const FieldSpec Q = FieldSpec::rationals();

template <class T>
Type1Point<T> scalar_point(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d, const FieldSpec& f) {
  auto one = [&](std::int64_t v) { return Matrix<T>::from_ints({{v}}, f); };
  return {one(a), {Scalar<T>::from_int(b, f)}, one(c), {Scalar<T>::from_int(d, f)}};
}

template <class T>
GroupElement1<T> random_g1(const Type1Space<T>& s, std::mt19937_64& rng) {
  auto nz = [&] {
    T x;
    do x = random_element<T>(rng, s.field);
    while (Scalar<T>::is_zero(x));
    return x;
  };
  Matrix<T> gm;
  do gm = random_entries<T>(s.m, s.m, s.field, rng);
  while (rank(gm) < s.m);
  return {nz(), nz(), nz(), gm, random_entries<T>(s.h, s.m, s.field, rng)};
}

template <class T>
GroupElement2<T> random_g2(const Type2Space<T>& s, std::mt19937_64& rng) {
  auto nz = [&] {
    T x;
    do x = random_element<T>(rng, s.field);
    while (Scalar<T>::is_zero(x));
    return x;
  };
  Matrix<T> gn;
  do gn = random_entries<T>(s.n, s.n, s.field, rng);
  while (rank(gn) < s.n);
  Vec<T> k;
  for (std::size_t i = 0; i < s.k; ++i) k.push_back(random_element<T>(rng, s.field));
  return {gn, nz(), nz(), nz(), k};
}

template <class T>
Type2Point<T> random_type2_point(const Type2Space<T>& s, std::mt19937_64& rng) {
  // ψ3 = 0 makes both equations hold; then perturb ψ3 inside the joint kernel.
  Type2Point<T> y{random_entries<T>(s.z1, s.n, s.field, rng), random_entries<T>(s.y2, s.n, s.field, rng),
                  Matrix<T>(s.z3, s.n, s.field)};
  std::size_t nv = s.z3 * s.n;
  Matrix<T> eq(s.t + s.t2, nv, s.field);
  for (std::size_t i = 0; i < nv; ++i) {
    Matrix<T> e(s.z3, s.n, s.field);
    e(i / s.n, i % s.n) = e.one();
    auto [r1, r2] = type2_residuals(s, Type2Point<T>{y.psi1, y.psi2, e});
    for (std::size_t r = 0; r < s.t; ++r) eq(r, i) = r1[r];
    for (std::size_t r = 0; r < s.t2; ++r) eq(s.t + r, i) = r2[r];
  }
  auto ker = kernel_rows(eq);
  Vec<T> v(nv, Scalar<T>::from_int(0, s.field));
  for (std::size_t b = 0; b < ker.rows(); ++b) {
    T c = random_element<T>(rng, s.field);
    for (std::size_t i = 0; i < nv; ++i) v[i] += c * ker(b, i);
  }
  y.psi3 = unflatten(v, s.z3, s.n, s.field);
  return y;
}

}  // namespace

TEST_CASE("type-1 space validation") {
  auto s = scalar_type1<Rational>(Q);
  CHECK(s.valid());
  auto bad = s;
  bad.sigma = Matrix<Rational>(1, 1, Q);
  auto v = bad.violations();
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].what == "sigma is not surjective");
  CHECK(v[0].witness.find("[\"1\"]") != std::string::npos);
  // σ' = 0 fails injectivity, and (D) fails as soon as τ' disagrees with τ.
  bad = s;
  bad.sigma_p = Matrix<Rational>(1, 1, Q);
  bool inj = false, diag = false;
  for (const auto& x : bad.violations()) {
    inj |= x.what.find("injection") != std::string::npos;
    diag |= x.what.find("(D)") != std::string::npos;
  }
  CHECK(inj);
  CHECK(diag);
  bad = s;
  bad.tau_p = Matrix<Rational>::from_ints({{2}}, Q);
  REQUIRE(bad.violations().size() == 1);
  CHECK(bad.violations()[0].witness == "basis element z1[0]⊗h[0]⊗z4[0]");
  bad.tau = Matrix<Rational>(1, 2, Q);
  CHECK(bad.violations()[0].what == "tau has the wrong shape");
}

TEST_CASE("type-2 space validation") {
  Type2Space<Rational> s{Q, 1, 1, 0, 1, 1, 0, 2, Matrix<Rational>(1, 0, Q), Matrix<Rational>(1, 0, Q),
                         Matrix<Rational>(0, 1, Q), Matrix<Rational>::identity(1, Q)};
  CHECK(s.valid());
  auto bad = s;
  bad.t2 = 1;
  bad.lambda = Matrix<Rational>(1, 1, Q);
  bad.nu_p = Matrix<Rational>(1, 0, Q);
  bool found = false;
  for (const auto& x : bad.violations()) found |= x.what == "lambda is not surjective";
  CHECK(found);
}

TEST_CASE("random spaces are valid") {
  std::mt19937_64 rng(17);
  for (std::uint32_t p : {2u, 3u, 5u}) {
    auto f = FieldSpec::prime(p);
    for (int trial = 0; trial < 10; ++trial) {
      std::size_t z1 = 1 + rng() % 3, h = 1 + rng() % 2, z3 = 1 + rng() % 2;
      std::size_t z2 = 1 + rng() % (z1 * h), z4 = rng() % (h * z3 + 1);
      auto s = random_type1<Fp>(z1, z2, z3, z4, h, 1 + rng() % 2, rng() % 3, f, rng);
      CHECK(s.valid());
      std::size_t y2 = 1 + rng() % 2, z1b = 1 + rng() % 2;
      auto s2 = random_type2<Fp>(z1b, y2, rng() % (y2 + 1), 1, 1, rng() % (z1b * y2 + 1), y2 + rng() % 2, f, rng);
      CHECK(s2.valid());
    }
  }
  auto q = random_type1<Rational>(2, 1, 2, 1, 1, 1, 1, Q, rng);
  CHECK(q.valid());
  CHECK_THROWS_AS(random_type1<Rational>(1, 3, 1, 1, 1, 1, 1, Q, rng), std::invalid_argument);
}

TEST_CASE("point conditions") {
  auto s = scalar_type1<Rational>(Q);
  auto x = scalar_point<Rational>(1, 1, 1, -1, Q);
  CHECK(is_point(s, x).first);
  auto bad = scalar_point<Rational>(1, 1, 1, 1, Q);
  auto [ok, r] = is_point(s, bad);
  CHECK_FALSE(ok);
  CHECK(r == Vec<Rational>{2});
  Type1Point<Rational> wrong{Matrix<Rational>(2, 1, Q), {0}, Matrix<Rational>(1, 1, Q), {0}};
  CHECK_THROWS_AS(is_point(s, wrong), std::invalid_argument);
}

TEST_CASE("type-1 action by hand in the scalar case") {
  auto s = scalar_type1<Rational>(Q);
  auto id = identity1(s);
  auto x = scalar_point<Rational>(1, 1, 1, -1, Q);
  CHECK(act1(s, id, x) == x);
  auto g = id;
  g.phi = Matrix<Rational>::from_ints({{1}}, Q);
  // z2 ↦ σ(φ·φ1) + z2 = 2; g₁⁻¹ has lower corner -1, so φ3 ↦ φ3 - σ'(z4) = 2.
  auto y = act1(s, g, x);
  CHECK(y == scalar_point<Rational>(1, 2, 2, -1, Q));
  CHECK(is_point(s, y).first);
  // (1,0,1,-1) is not a point (value 1); the unipotent element keeps the value.
  auto w = scalar_point<Rational>(1, 0, 1, -1, Q);
  auto gw = act1(s, g, w);
  CHECK(gw.z2 == Vec<Rational>{1});
  CHECK(type1_value(s, gw) == type1_value(s, w));
  g.gm = Matrix<Rational>(1, 1, Q);
  CHECK_THROWS_AS(act1(s, g, x), std::invalid_argument);
}

TEST_CASE("type-1 action: group law, invariance, point preservation") {
  std::mt19937_64 rng(23);
  auto f = FieldSpec::prime(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = random_type1<Fp>(1 + rng() % 3, 1, 1 + rng() % 2, 1, 1 + rng() % 2, 1 + rng() % 2, 1 + rng() % 3, f, rng);
    auto x = random_type1_point(s, rng);
    auto g = random_g1(s, rng), h = random_g1(s, rng);
    CHECK(act1(s, g, act1(s, h, x)) == act1(s, compose1(g, h), x));
    CHECK(is_point(s, act1(s, g, x)).first == is_point(s, x).first);
    // G_1 alone leaves the value fixed; G_L and G_R scale it by g_L·g_R.
    auto g1 = g;
    g1.gl = g1.gr = Fp(1, 7);
    CHECK(type1_value(s, act1(s, g1, x)) == type1_value(s, x));
    auto v = type1_value(s, x);
    for (auto& e : v) e *= g.gl * g.gr;
    CHECK(type1_value(s, act1(s, g, x)) == v);
    // Off the point locus too.
    Type1Point<Fp> w{random_entries<Fp>(s.z1, s.m, f, rng), random_entries<Fp>(s.z2, 1, f, rng).col(0),
                     random_entries<Fp>(s.z3, s.m, f, rng), random_entries<Fp>(s.z4, 1, f, rng).col(0)};
    CHECK(type1_value(s, act1(s, g1, w)) == type1_value(s, w));
  }
  auto q = random_type1<Rational>(2, 2, 2, 1, 1, 1, 2, Q, rng);
  auto x = random_type1_point(q, rng);
  auto g = random_g1(q, rng), h = random_g1(q, rng);
  CHECK(act1(q, g, act1(q, h, x)) == act1(q, compose1(g, h), x));
}

TEST_CASE("type-1 points stay points under every group element over F2 and F3") {
  for (std::uint32_t p : {2u, 3u}) {
    auto f = FieldSpec::prime(p);
    auto s = scalar_type1<Fp>(f);
    std::vector<Type1Point<Fp>> pts;
    for_each_type1_point<Fp>(s, [&](const Type1Point<Fp>& x) { pts.push_back(x); });
    // Oracle count: φ1φ3 + z2z4 = 0 has p³ + p² - p solutions in F_p⁴.
    CHECK(pts.size() == p * p * p + p * p - p);
    for (std::uint32_t a = 1; a < p; ++a)
      for (std::uint32_t b = 1; b < p; ++b)
        for (std::uint32_t c = 0; c < p; ++c) {
          GroupElement1<Fp> g{Fp(a, p), Fp(b, p), Fp(1, p), Matrix<Fp>::from_ints({{a}}, f), Matrix<Fp>::from_ints({{c}}, f)};
          for (const auto& x : pts) CHECK(is_point(s, act1(s, g, x)).first);
        }
  }
}

TEST_CASE("type-2 action: group law and Q' preservation") {
  std::mt19937_64 rng(29);
  auto f = FieldSpec::prime(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t y2 = 1 + rng() % 2, z1 = 1 + rng() % 2;
    auto s = random_type2<Fp>(z1, y2, rng() % (y2 + 1), 1 + rng() % 2, 1, rng() % (z1 * y2 + 1), y2 + rng() % 2, f, rng);
    auto y = random_type2_point(s, rng);
    REQUIRE(is_point(s, y).first);
    auto g = random_g2(s, rng), h = random_g2(s, rng);
    CHECK(act2(s, g, act2(s, h, y)) == act2(s, compose2(g, h), y));
    CHECK(is_point(s, act2(s, g, y)).first);
    CHECK(act2(s, identity2(s), y) == y);
    CHECK(in_Q0(s, act2(s, g, y)) == in_Q0(s, y));
  }
}

TEST_CASE("in_Q0") {
  Type2Space<Rational> s{Q, 1, 1, 0, 1, 1, 0, 2, Matrix<Rational>(1, 0, Q), Matrix<Rational>(1, 0, Q),
                         Matrix<Rational>(0, 1, Q), Matrix<Rational>::identity(1, Q)};
  Type2Point<Rational> y{Matrix<Rational>(1, 2, Q), Matrix<Rational>::from_ints({{1, 0}}, Q), Matrix<Rational>(1, 2, Q)};
  CHECK(in_Q0(s, y));
  y.psi2 = Matrix<Rational>(1, 2, Q);
  CHECK_FALSE(in_Q0(s, y));
  y.psi2 = Matrix<Rational>::from_ints({{3, -2}}, Q);
  CHECK(in_Q0(s, y));
}

TEST_CASE("space and point json round trip") {
  std::mt19937_64 rng(31);
  auto f = FieldSpec::prime(3);
  auto s = random_type1<Fp>(2, 1, 2, 1, 1, 1, 1, f, rng);
  auto back = type1_from_json<Fp>(Json::parse(to_json(s).dump()), f);
  CHECK(to_json(back) == to_json(s));
  auto x = random_type1_point(s, rng);
  CHECK(type1_point_from_json(to_json(x), s) == x);
  auto s2 = random_type2<Rational>(2, 1, 1, 1, 1, 1, 2, Q, rng);
  CHECK(to_json(type2_from_json<Rational>(to_json(s2), Q)) == to_json(s2));
  Json broken = to_json(s);
  broken["sigma"] = Json::array({Json::array({1})});
  CHECK_THROWS_AS(type1_from_json<Fp>(broken, f), std::invalid_argument);
}
