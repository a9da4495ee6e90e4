#include <catch_amalgamated.hpp>

#include "cmut/context.hpp"

using namespace cmut;

namespace {

const FieldSpec Q = FieldSpec::rationals();

// Brute-force count of exponent vectors of n+1 variables summing to d.
std::size_t count_monomials(std::size_t n, int d) {
  if (d < 0) return 0;
  std::size_t count = 0;
  std::vector<int> e(n + 1, 0);
  while (true) {
    int s = 0;
    for (int x : e) s += x;
    if (s == d) ++count;
    std::size_t i = 0;
    while (i <= n && ++e[i] > d) e[i++] = 0;
    if (i > n) break;
  }
  return count;
}

// Rewrites every tensor after the basis change v' = P v on Hom(x,y).
template <class T>
CompositionContext<T> change_basis(const CompositionContext<T>& ctx, std::size_t x, std::size_t y,
                                   const Matrix<T>& P) {
  auto Pinv = *inverse(P);
  CompositionContext<T> out(ctx.field());
  for (std::size_t o = 0; o < ctx.size(); ++o) out.add_object(ctx.name(o), ctx.is_simple(o));
  for (std::size_t a = 0; a < ctx.size(); ++a)
    for (std::size_t b = 0; b < ctx.size(); ++b)
      if (ctx.defined(a, b)) out.set_hom(a, b, ctx.dim(a, b));
  for (std::size_t o = 0; o < ctx.size(); ++o)
    if (ctx.dim(o, o)) out.set_identity(o, (o == x && o == y) ? P * ctx.identity(o) : ctx.identity(o));
  for (const auto& [key, m] : ctx.compositions()) {
    auto [a, b, c] = key;
    if (m.cols() == 0) continue;
    std::size_t dab = ctx.dim(a, b), dbc = ctx.dim(b, c);
    auto left = (a == x && b == y) ? Pinv : Matrix<T>::identity(dab, ctx.field());
    auto right = (b == x && c == y) ? Pinv : Matrix<T>::identity(dbc, ctx.field());
    auto m2 = m * kron(left, right);
    if (a == x && c == y) m2 = P * m2;
    out.set_comp(a, b, c, m2);
  }
  return out;
}

}  // namespace

TEST_CASE("projective context dimensions") {
  for (std::size_t n = 1; n <= 4; ++n) {
    auto ctx = projective_context<Rational>(n, {-2, -1, 0, 1}, Q);
    for (std::size_t x = 0; x < ctx.size(); ++x)
      for (std::size_t y = 0; y < ctx.size(); ++y)
        CHECK(ctx.dim(x, y) == count_monomials(n, static_cast<int>(y) - static_cast<int>(x)));
    for (std::size_t x = 0; x < ctx.size(); ++x) CHECK(ctx.dim(x, x) == 1);
  }
  auto p2 = projective_context<Rational>(2, {-2, -1, 0, 1}, Q);
  CHECK(p2.dim(p2.object("O(-2)"), p2.object("O(-1)")) == 3);
  CHECK(p2.dim(p2.object("O(-2)"), p2.object("O(0)")) == 6);
  CHECK(p2.dim(p2.object("O(0)"), p2.object("O(-2)")) == 0);
  auto rep = validate_context(p2);
  CHECK(rep.ok);
  CHECK(rep.checked_triples > 0);
}

TEST_CASE("composition is polynomial multiplication") {
  auto ctx = projective_context<Rational>(2, {-1, 0, 1, 2}, Q);
  auto a = ctx.object("O(-1)"), b = ctx.object("O(0)"), c = ctx.object("O(2)");
  auto f = parse_form(ctx, a, b, "x0 + 2*x1");
  auto g = parse_form(ctx, b, c, "x2^2 - x0*x1");
  auto expected = parse_form(ctx, a, c, "x0*x2^2 - x0^2*x1 + 2*x1*x2^2 - 2*x0*x1^2");
  CHECK(ctx.compose(a, b, c, f, g) == expected);
  auto d = ctx.object("O(1)");
  // Commutativity: x0 then x1 equals x1 then x0.
  auto x0 = parse_form(ctx, a, b, "x0"), x1 = parse_form(ctx, b, d, "x1");
  auto y1 = parse_form(ctx, a, b, "x1"), y0 = parse_form(ctx, b, d, "x0");
  CHECK(ctx.compose(a, b, d, x0, x1) == ctx.compose(a, b, d, y1, y0));
  CHECK_THROWS_AS(parse_form(ctx, a, b, "x0^2"), std::invalid_argument);
}

TEST_CASE("validation catches broken tensors") {
  auto ctx = projective_context<Fp>(1, {0, 1, 2, 3}, FieldSpec::prime(5));
  std::mt19937_64 rng(3);
  auto c = random_matrix<Fp>(ctx.dim(0, 2), ctx.dim(0, 1) * ctx.dim(1, 2), ctx.field(), rng);
  ctx.set_comp(0, 1, 2, c);
  auto rep = validate_context(ctx);
  CHECK_FALSE(rep.ok);
  bool named = false;
  for (const auto& v : rep.violations) named |= v.find("(O(0),O(1),O(2))") != std::string::npos;
  CHECK(named);

  auto bad = projective_context<Rational>(2, {0, 1}, Q);
  bad.vanishing.emplace_back(0, 1);
  CHECK_FALSE(validate_context(bad).ok);
}

TEST_CASE("morphism-setting axioms on P2") {
  auto ctx = projective_context<Rational>(2, {-2, -1, 0}, Q);
  auto e1 = ctx.object("O(-2)"), e2 = ctx.object("O(-1)"), f1 = ctx.object("O(0)");
  ctx.vanishing = {{e2, e1}, {f1, e1}, {f1, e2}};
  auto rep = validate_context(ctx);
  CHECK(rep.ok);
  auto s = context_stats(ctx, e1, e2, f1);
  CHECK(s.a == 3);
  CHECK(s.h11 == 6);
  CHECK(s.h12 == 3);
  CHECK(s.a_prime == 3);
  for (std::size_t n = 2; n <= 5; ++n) {
    auto c = projective_context<Rational>(n, {-2, -1, 0}, Q);
    CHECK(context_stats(c, 0, 1, 2).a == n + 1);
  }
}

TEST_CASE("kernel objects") {
  for (std::size_t n = 2; n <= 5; ++n) {
    auto ctx = projective_context<Rational>(n, {-2, -1, 0, 1}, Q);
    auto e1 = ctx.object("O(-2)"), g = ctx.object("O(-1)"), h = ctx.object("O(0)");
    std::vector<std::size_t> targets{e1, g, h, ctx.object("O(1)")};
    auto ext = kernel_object(ctx, g, h, "H1", targets, {e1});
    auto k = ext.object("H1");
    std::size_t n1 = n + 1;
    CHECK(ext.dim(e1, k) == n1 * n1 - n1 * (n1 + 1) / 2);
    CHECK(ext.dim(e1, k) == n * (n + 1) / 2);
    CHECK(ext.dim(k, g) == ctx.dim(g, h));  // Hom(H1,Γ) is dual to Hom(Γ,G)
    CHECK(ext.dim(k, e1) == 0);
    CHECK(ext.dim(k, k) == 1);
    CHECK(ext.dim(g, k) == 0);
    if (n <= 3) CHECK(validate_context(ext).ok);
    auto s = context_stats(ext, g, h, ext.object("O(1)"), std::optional<std::size_t>{});
    CHECK(s.a == n1);
  }
  auto ctx = projective_context<Rational>(2, {-2, -1, 0}, Q);
  CHECK_THROWS_AS(kernel_object(ctx, 1, 2, "K", {0, 1, 2}, {2}), std::invalid_argument);
}

TEST_CASE("kernel composition respects the inclusion") {
  // Composing Hom(E1,K) with Hom(K,Γ) must reproduce the Γ⊗W-coordinates paired against W*.
  auto ctx = projective_context<Rational>(2, {-2, -1, 0}, Q);
  auto ext = kernel_object(ctx, 1, 2, "H1", {0, 1, 2}, {0});
  auto k = ext.object("H1");
  CHECK(validate_context(ext).ok);
  CHECK(ext.dim(k, 2) == 3 * 3 - 1);
  // Hom(K,Γ) has the basis id⊗e*_β; composing f ∈ Hom(E1,K) with it gives the β-component
  // of f inside Hom(E1,Γ)⊗W. Those components must be killed by evaluation and determine f.
  std::size_t w = ext.dim(1, 2);
  REQUIRE(ext.dim(k, 1) == w);
  Matrix<Rational> components(w * ext.dim(0, 1), ext.dim(0, k), Q);
  for (std::size_t a = 0; a < ext.dim(0, k); ++a) {
    auto f = ext.basis_vector(0, k, a);
    Vec<Rational> ev(ext.dim(0, 2), 0);
    for (std::size_t b = 0; b < w; ++b) {
      auto part = ext.compose(0, k, 1, f, ext.basis_vector(k, 1, b));
      for (std::size_t i = 0; i < part.size(); ++i) components(b * part.size() + i, a) = part[i];
      auto pushed = ext.compose(0, 1, 2, part, ext.basis_vector(1, 2, b));
      for (std::size_t i = 0; i < ev.size(); ++i) ev[i] += pushed[i];
    }
    CHECK(ev == Vec<Rational>(ext.dim(0, 2), 0));
  }
  CHECK(rank(components) == ext.dim(0, k));
}

TEST_CASE("cokernel object and dual context") {
  auto ctx = projective_context<Rational>(2, {-2, -1, 0}, Q);
  auto d = dual_context(ctx);
  CHECK(validate_context(d).ok);
  auto dd = dual_context(d);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) CHECK(dd.dim(x, y) == ctx.dim(x, y));
  for (const auto& [key, m] : ctx.compositions()) {
    auto [x, y, z] = key;
    CHECK(dd.comp(x, y, z) == m);
  }
  // Q = coker(O(-2) → O(-1) ⊗ Hom(O(-2),O(-1))*).
  auto ext = cokernel_object(ctx, 1, 0, "Q", {0, 1, 2}, {2});
  auto q = ext.object("Q");
  CHECK(ext.dim(q, 2) == 3 * 3 - 6);  // Hom(Q,O) = ker(Hom(O(-1),O)⊗W → Hom(O(-2),O))
  CHECK(ext.dim(0, q) == 3 * 3 - 1);
  CHECK(validate_context(ext).ok);
}

TEST_CASE("stats and validity are stable under change of basis") {
  auto ctx = projective_context<Fp>(2, {-2, -1, 0}, FieldSpec::prime(7));
  std::mt19937_64 rng(5);
  for (std::size_t trial = 0; trial < 5; ++trial) {
    auto P = random_invertible<Fp>(ctx.dim(0, 1), ctx.field(), rng);
    auto moved = change_basis(ctx, 0, 1, P);
    CHECK(validate_context(moved).ok);
    auto s1 = context_stats(ctx, 0, 1, 2), s2 = context_stats(moved, 0, 1, 2);
    CHECK(s1.a == s2.a);
    CHECK(s1.a_prime == s2.a_prime);
    auto e1 = kernel_object(moved, 1, 2, "H1", {0, 1, 2}, {0});
    CHECK(e1.dim(0, e1.object("H1")) == 3);
  }
}

TEST_CASE("context json round trip") {
  auto ctx = kernel_object(projective_context<Fp>(2, {-2, -1, 0}, FieldSpec::prime(3)), 1, 2, "H1", {0, 1, 2}, {0});
  auto j = context_to_json(ctx);
  auto back = context_from_json<Fp>(Json::parse(j.dump()), ctx.field());
  CHECK(context_to_json(back) == j);
  CHECK(validate_context(back).ok);
  Json broken = j;
  broken["compositions"][0]["entries"][0][0] = 99;
  CHECK_THROWS_AS(context_from_json<Fp>(broken, ctx.field()), std::invalid_argument);
}
