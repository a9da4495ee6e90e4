#pragma once

#include "cmut/context.hpp"
#include "cmut/json_io.hpp"
#include "cmut/subspace.hpp"

#include <map>
#include <optional>
#include <random>

namespace cmut {

// Bilinear map A⊗B → C as a C × (A·B) matrix; column a*B + b holds τ(e_a ⊗ e_b).
template <class T>
struct Tensor {
  std::size_t a = 0, b = 0, c = 0;
  Matrix<T> m;
  FieldSpec field() const { return m.field(); }
};

template <class T>
Tensor<T> make_tensor(std::size_t a, std::size_t b, std::size_t c, Matrix<T> m) {
  if (m.rows() != c || m.cols() != a * b) throw std::invalid_argument("tensor matrix has the wrong shape");
  return {a, b, c, std::move(m)};
}

// τ'(a⊗b) = P_C τ(P_A⁻¹ a ⊗ P_B⁻¹ b).
template <class T>
Tensor<T> change_basis(const Tensor<T>& t, const Matrix<T>& pa, const Matrix<T>& pb, const Matrix<T>& pc) {
  auto ia = inverse(pa), ib = inverse(pb);
  if (!ia || !ib || !inverse(pc)) throw std::invalid_argument("change of basis must be invertible");
  auto kr = kron(*ia, *ib);
  return {t.a, t.b, t.c, pc * t.m * kr};
}

enum class ConstantMode { exact, lower_bound };

struct ConstantPolicy {
  std::size_t exact_threshold = 6;  // max dim of B⊗F^k for exhaustive search (also bounded by budget)
  std::uint64_t budget = 2'000'000;
  std::size_t samples_per_dim = 200;
  std::uint64_t seed = 1;
  std::optional<ConstantMode> force;
};

template <class T>
struct ConstantResult {
  Rational value = 0;
  ConstantMode mode = ConstantMode::exact;
  std::optional<Matrix<T>> witness;  // rows span K ⊂ B⊗F^k, index b*k + j
  std::size_t k = 1;
  std::size_t ambient = 0;
  std::uint64_t visited = 0;
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  std::uint64_t p = 0;
  bool empty_family = false;
};

// K is not inside B⊗V for a proper V ⊂ F^k: the rows of all basis vectors, reshaped to B × k, span F^k.
template <class T>
bool side_condition(const Matrix<T>& kbasis, std::size_t bdim, std::size_t k) {
  if (kbasis.rows() == 0) return false;
  Matrix<T> rows(kbasis.rows() * bdim, k, kbasis.field());
  for (std::size_t r = 0; r < kbasis.rows(); ++r)
    for (std::size_t b = 0; b < bdim; ++b)
      for (std::size_t j = 0; j < k; ++j) rows(r * bdim + b, j) = kbasis(r, b * k + j);
  return rank(rows) == k;
}

// codim τ_k(A⊗K) / codim K.
template <class T>
Rational constant_ratio(const Tensor<T>& t, std::size_t k, const Matrix<T>& kbasis) {
  std::size_t bk = t.b * k, ck = t.c * k;
  auto dk = rank(kbasis);
  if (dk == 0 || dk >= bk) throw std::invalid_argument("K must be a proper nonzero subspace");
  Matrix<T> img(t.a * kbasis.rows(), ck, t.field());
  for (std::size_t r = 0; r < kbasis.rows(); ++r)
    for (std::size_t a = 0; a < t.a; ++a)
      for (std::size_t b = 0; b < t.b; ++b)
        for (std::size_t j = 0; j < k; ++j) {
          const auto& v = kbasis(r, b * k + j);
          if (Scalar<T>::is_zero(v)) continue;
          for (std::size_t c = 0; c < t.c; ++c) img(r * t.a + a, c * k + j) += v * t.m(c, a * t.b + b);
        }
  return Rational(static_cast<long>(ck - rank(img)), static_cast<long>(bk - dk));
}

// sup over K ∈ G_k of codim τ_k(A⊗K) / codim K; an empty family gives 0.
template <class T>
ConstantResult<T> c_constant(const Tensor<T>& t, std::size_t k, const ConstantPolicy& policy = {}) {
  require_prime(t.field(), "constant computation");
  if (k == 0) throw std::invalid_argument("k must be positive");
  std::size_t n = t.b * k;
  ConstantResult<T> res;
  res.k = k;
  res.ambient = n;
  res.budget = policy.budget;
  res.p = t.field().p;
  BigInt total = 0;
  for (std::size_t d = 1; d < n; ++d) total += gaussian_binomial(n, d, t.field().p);
  bool feasible = n <= policy.exact_threshold && total <= policy.budget;
  ConstantMode mode = policy.force.value_or(feasible ? ConstantMode::exact : ConstantMode::lower_bound);
  res.mode = mode;
  bool found = false;
  auto offer = [&](const Subspace<T>& s) {
    ++res.visited;
    if (!side_condition(s.basis(), t.b, k)) return;
    auto r = constant_ratio(t, k, s.basis());
    if (!found || r > res.value) {
      res.value = r;
      res.witness = s.basis();
      found = true;
    }
  };
  if (mode == ConstantMode::exact) {
    if (total > policy.budget) throw BudgetExceeded("exact constant enumeration", total);
    for (std::size_t d = 1; d < n; ++d)
      for_each_subspace<T>(n, d, t.field(), [&](const Subspace<T>& s) {
        offer(s);
        return true;
      }, policy.budget);
  } else {
    res.seed = policy.seed;
    for (std::size_t d = 1; d < n; ++d)
      for (const auto& s : sample_subspaces<T>(n, d, t.field(), policy.samples_per_dim, policy.seed + d)) offer(s);
  }
  res.empty_family = !found;
  return res;
}

// Re-evaluates a witness from scratch.
template <class T>
bool constant_witness_valid(const Tensor<T>& t, const ConstantResult<T>& r) {
  if (!r.witness) return r.empty_family && r.value == 0;
  const auto& w = *r.witness;
  if (w.cols() != t.b * r.k || rank(w) == 0 || rank(w) >= t.b * r.k) return false;
  return side_condition(w, t.b, r.k) && constant_ratio(t, r.k, w) == r.value;
}

// ---- Tensors built from a composition context ----

// Hom(x,z)*⊗Hom(x,y) → Hom(y,z)*, φ⊗f ↦ (g ↦ φ(g∘f)).
template <class T>
Tensor<T> dual_compose_right(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z) {
  std::size_t dxz = ctx.dim(x, z), dxy = ctx.dim(x, y), dyz = ctx.dim(y, z);
  const auto& c = ctx.comp(x, y, z);
  Matrix<T> m(dyz, dxz * dxy, ctx.field());
  for (std::size_t a = 0; a < dxz; ++a)
    for (std::size_t f = 0; f < dxy; ++f)
      for (std::size_t g = 0; g < dyz; ++g) m(g, a * dxy + f) = c(a, f * dyz + g);
  return {dxz, dxy, dyz, std::move(m)};
}

// Hom(y,z)⊗Hom(x,y) → Hom(x,z), g⊗f ↦ g∘f.
template <class T>
Tensor<T> composition_tensor(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z) {
  std::size_t dxz = ctx.dim(x, z), dxy = ctx.dim(x, y), dyz = ctx.dim(y, z);
  const auto& c = ctx.comp(x, y, z);
  Matrix<T> m(dxz, dyz * dxy, ctx.field());
  for (std::size_t g = 0; g < dyz; ++g)
    for (std::size_t f = 0; f < dxy; ++f) m.set_block(0, g * dxy + f, c.block(0, f * dyz + g, dxz, 1));
  return {dyz, dxy, dxz, std::move(m)};
}

enum class Contract { first, second };

// B = ker(Hom(x,y)⊗Hom(y,z) → Hom(x,z)) in its echelon basis. The dual of the chosen factor
// is paired with that factor; C is the other one.
template <class T>
Tensor<T> kernel_contraction(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z,
                             Contract which) {
  std::size_t dxy = ctx.dim(x, y), dyz = ctx.dim(y, z);
  auto ker = kernel_rows(ctx.comp(x, y, z));
  std::size_t a = which == Contract::first ? dxy : dyz, c = which == Contract::first ? dyz : dxy;
  Matrix<T> m(c, a * ker.rows(), ctx.field());
  for (std::size_t kb = 0; kb < ker.rows(); ++kb)
    for (std::size_t f = 0; f < dxy; ++f)
      for (std::size_t g = 0; g < dyz; ++g) {
        const auto& v = ker(kb, f * dyz + g);
        if (which == Contract::first)
          m(g, f * ker.rows() + kb) += v;
        else
          m(f, g * ker.rows() + kb) += v;
      }
  return {a, ker.rows(), c, std::move(m)};
}

// τ'' = τ∘(τ'⊗I): (Hom(e1,f1)*⊗Hom(f1,g1)*)⊗Hom(e1,h1) → Hom(f2,g1)*, where
// Hom(e1,h1) = ker(Hom(e1,f1)⊗Hom(f1,f2) → Hom(e1,f2)).
template <class T>
Tensor<T> double_contraction(const CompositionContext<T>& ctx, std::size_t e1, std::size_t f1, std::size_t f2,
                             std::size_t g1) {
  auto inner = kernel_contraction(ctx, e1, f1, f2, Contract::first);  // A1 = Hom(e1,f1)*, C1 = Hom(f1,f2)
  auto outer = dual_compose_right(ctx, f1, f2, g1);                   // Hom(f1,g1)*⊗Hom(f1,f2) → Hom(f2,g1)*
  std::size_t a1 = inner.a, a2 = outer.a, b = inner.b, c = outer.c;
  Matrix<T> m(c, a1 * a2 * b, ctx.field());
  for (std::size_t i = 0; i < a1; ++i)
    for (std::size_t kb = 0; kb < b; ++kb) {
      auto mid = inner.m.col(i * b + kb);
      for (std::size_t j = 0; j < a2; ++j)
        for (std::size_t h = 0; h < outer.b; ++h) {
          if (Scalar<T>::is_zero(mid[h])) continue;
          for (std::size_t r = 0; r < c; ++r) m(r, (i * a2 + j) * b + kb) += mid[h] * outer.m(r, j * outer.b + h);
        }
    }
  return {a1 * a2, b, c, std::move(m)};
}

// Left inverse of the transposed composition supported on its pivot rows.
template <class T>
Matrix<T> pivot_splitting(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z) {
  auto t = ctx.comp(x, y, z).transpose();
  if (rank(t) != t.cols()) throw std::invalid_argument("composition is not onto, no splitting exists");
  auto piv = rref(t.transpose()).pivots;
  Matrix<T> sq(piv.size(), t.cols(), t.field());
  for (std::size_t i = 0; i < piv.size(); ++i) sq.set_block(i, 0, t.block(piv[i], 0, 1, t.cols()));
  auto inv = *inverse(sq);
  Matrix<T> s(t.cols(), t.rows(), t.field());
  for (std::size_t i = 0; i < piv.size(); ++i) s.set_block(0, piv[i], inv.block(0, i, t.cols(), 1));
  return s;
}

// (TᵀT)⁻¹Tᵀ for T the transposed composition; symmetric under reordering of the Hom bases.
// Falls back to the pivot splitting when TᵀT is singular over the field.
template <class T>
Matrix<T> default_splitting(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z) {
  auto t = ctx.comp(x, y, z).transpose();
  if (rank(t) != t.cols()) throw std::invalid_argument("composition is not onto, no splitting exists");
  if (auto g = inverse(t.transpose() * t)) return *g * t.transpose();
  return pivot_splitting(ctx, x, y, z);
}

// σ: Hom(y,z)*⊗Hom(x,y)* → Hom(x,z)* from a splitting matrix.
template <class T>
Tensor<T> splitting_tensor(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z,
                           const Matrix<T>& sigma) {
  std::size_t dxz = ctx.dim(x, z), dxy = ctx.dim(x, y), dyz = ctx.dim(y, z);
  if (sigma.rows() != dxz || sigma.cols() != dxy * dyz) throw std::invalid_argument("splitting has the wrong shape");
  if (!(sigma * ctx.comp(x, y, z).transpose() == Matrix<T>::identity(dxz, ctx.field())))
    throw std::invalid_argument("splitting is not a left inverse of the transposed composition");
  Matrix<T> m(dxz, dyz * dxy, ctx.field());
  for (std::size_t g = 0; g < dyz; ++g)
    for (std::size_t f = 0; f < dxy; ++f) m.set_block(0, g * dxy + f, sigma.block(0, f * dyz + g, dxz, 1));
  return {dyz, dxy, dxz, std::move(m)};
}

// ---- Named constants ----

// Objects of the two settings: complexes E1 → F1⊕F2 → G1 and morphisms E1⊕E2 → F1.
struct ComplexObjects {
  std::size_t e1, f1, f2, g1;
};
struct MorphismObjects {
  std::size_t e1, e2, f1;
};

inline const std::vector<std::string>& complex_constant_names() {
  static const std::vector<std::string> v{"c1", "c2", "c"};
  return v;
}
inline const std::vector<std::string>& morphism_constant_names() {
  static const std::vector<std::string> v{"c0", "c0p", "c1_534", "c2_534"};
  return v;
}

template <class T>
Tensor<T> named_tensor(const CompositionContext<T>& ctx, const ComplexObjects& o, const std::string& which) {
  if (which == "c1") return dual_compose_right(ctx, o.f1, o.f2, o.g1);
  if (which == "c2") return kernel_contraction(ctx, o.e1, o.f1, o.f2, Contract::first);
  if (which == "c") return double_contraction(ctx, o.e1, o.f1, o.f2, o.g1);
  throw std::invalid_argument("unknown complex constant '" + which + "' (expected c1, c2 or c)");
}

template <class T>
Tensor<T> named_tensor(const CompositionContext<T>& ctx, const MorphismObjects& o, const std::string& which,
                       const std::optional<Matrix<T>>& sigma = std::nullopt) {
  if (which == "c0") return dual_compose_right(ctx, o.e1, o.e2, o.f1);
  if (which == "c0p")
    return splitting_tensor(ctx, o.e1, o.e2, o.f1, sigma ? *sigma : default_splitting(ctx, o.e1, o.e2, o.f1));
  if (which == "c1_534") return composition_tensor(ctx, o.e1, o.e2, o.f1);
  if (which == "c2_534") return kernel_contraction(ctx, o.e1, o.e2, o.f1, Contract::second);
  throw std::invalid_argument("unknown morphism constant '" + which + "' (expected c0, c0p, c1_534 or c2_534)");
}

template <class T, class Objects>
ConstantResult<T> named_constant(const CompositionContext<T>& ctx, const Objects& o, const std::string& which,
                                 std::size_t k, const ConstantPolicy& policy = {}) {
  return c_constant(named_tensor(ctx, o, which), k, policy);
}

// Published values for line bundles on P^n at k = 1.
inline std::map<std::string, Rational> published_complex_constants(std::size_t n) {
  return {{"c1", Rational(0)}, {"c2", Rational(2, static_cast<long>(n + 2))}, {"c", Rational(0)}};
}
inline std::map<std::string, Rational> published_morphism_constants(std::size_t n) {
  long nn = static_cast<long>(n);
  return {{"c0", Rational(0)},
          {"c0p", Rational(nn + 1, 2)},
          {"c1_534", Rational(nn + 1, 2)},
          {"c2_534", Rational(2 * nn, nn * nn + nn - 2)}};
}

// O(-2) → O(-1)⊗M1 ⊕ O → O(1) on P^n.
template <class T>
std::pair<CompositionContext<T>, ComplexObjects> pn_complex_context(std::size_t n, const FieldSpec& f) {
  auto ctx = projective_context<T>(n, {-2, -1, 0, 1}, f);
  return {ctx, {0, 1, 2, 3}};
}
// O(-2) ⊕ O(-1) → O on P^n.
template <class T>
std::pair<CompositionContext<T>, MorphismObjects> pn_morphism_context(std::size_t n, const FieldSpec& f) {
  auto ctx = projective_context<T>(n, {-2, -1, 0}, f);
  return {ctx, {0, 1, 2}};
}

// ---- Relations ----

struct RelationCheck {
  std::string relation;
  bool holds = false;
  bool proved = false;  // both sides exact
  std::string detail;
};

// results[name][k]; checks c(k) ≤ c1(k) c2(k) and monotonicity of c1, c2, c0p in k.
template <class T>
std::vector<RelationCheck> constant_relations_check(
    const std::map<std::string, std::map<std::size_t, ConstantResult<T>>>& results) {
  std::vector<RelationCheck> out;
  auto exact = [](const ConstantResult<T>& r) { return r.mode == ConstantMode::exact; };
  for (const auto& name : {"c1", "c2", "c0p", "c0", "c1_534", "c2_534"}) {
    auto it = results.find(name);
    if (it == results.end()) continue;
    for (const auto& [k, r] : it->second) {
      auto nx = it->second.find(k + 1);
      if (nx == it->second.end()) continue;
      bool holds = nx->second.value >= r.value;
      out.push_back({std::string(name) + "(" + std::to_string(k + 1) + ") >= " + name + "(" + std::to_string(k) + ")",
                     holds, exact(r) && exact(nx->second),
                     rat_str(nx->second.value) + " vs " + rat_str(r.value)});
    }
  }
  auto c = results.find("c"), c1 = results.find("c1"), c2 = results.find("c2");
  if (c != results.end() && c1 != results.end() && c2 != results.end())
    for (const auto& [k, r] : c->second) {
      auto a = c1->second.find(k), b = c2->second.find(k);
      if (a == c1->second.end() || b == c2->second.end()) continue;
      Rational bound = a->second.value * b->second.value;
      out.push_back({"c(" + std::to_string(k) + ") <= c1(" + std::to_string(k) + ")*c2(" + std::to_string(k) + ")",
                     r.value <= bound, exact(r) && exact(a->second) && exact(b->second),
                     rat_str(r.value) + " vs " + rat_str(bound)});
    }
  return out;
}

template <class T>
Json to_json(const ConstantResult<T>& r) {
  Json j{{"value", rat_str(r.value)},
         {"mode", r.mode == ConstantMode::exact ? "exact" : "lower-bound"},
         {"k", r.k},
         {"field", "fp:" + std::to_string(r.p)},
         {"search", {{"ambient", r.ambient}, {"visited", r.visited}, {"budget", r.budget}}}};
  if (r.mode == ConstantMode::lower_bound) j["search"]["seed"] = r.seed;
  if (r.witness) j["witness"] = to_json(*r.witness);
  if (r.empty_family) j["note"] = "empty family, value 0 by convention";
  return j;
}

}  // namespace cmut
