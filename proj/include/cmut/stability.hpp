#pragma once

#include "cmut/chain.hpp"

#include <functional>
#include <set>

namespace cmut {

enum class Verdict { stable, strictly_semistable, unstable };
enum class Level { reductive, full_group };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::strictly_semistable: return "strictly-semi-stable";
    default: return "unstable";
  }
}
inline const char* level_name(Level l) { return l == Level::reductive ? "reductive" : "full-group"; }

// Representation of a quiver: one matrix (dst × src) per arrow, vertices in topological order.
template <class T>
struct Representation {
  FieldSpec field;
  std::vector<std::size_t> dims;
  std::vector<std::string> names;
  struct Arrow {
    std::size_t src = 0, dst = 0;
    Matrix<T> map;
  };
  std::vector<Arrow> arrows;
};

// One arrow per Hom basis element of every block; zero arrows are dropped unless keep_zero.
template <class T>
Representation<T> rep_from_chain(const ChainSpace<T>& c, const ChainPoint<T>& x, bool keep_zero = false) {
  Representation<T> r{c.field(), c.vertex_dims(), c.vertex_names(), {}};
  std::vector<std::size_t> first(c.terms.size() + 1, 0);
  for (std::size_t i = 0; i < c.terms.size(); ++i) first[i + 1] = first[i] + c.terms[i].size();
  for (std::size_t i = 0; i < c.junctions(); ++i)
    for (std::size_t s = 0; s < c.terms[i].size(); ++s)
      for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
        std::size_t dt = c.terms[i + 1][t].mult, ds = c.terms[i][s].mult;
        for (std::size_t a = 0; a < c.homdim(i, s, t); ++a) {
          auto m = x.blocks[i][s][t].block(a * dt, 0, dt, ds);
          if (!keep_zero && m.is_zero()) continue;
          r.arrows.push_back({first[i] + s, first[i + 1] + t, std::move(m)});
        }
      }
  return r;
}

template <class T>
using SubspaceTuple = std::vector<Subspace<T>>;

inline Rational weighted_dim(const std::vector<Rational>& w, const std::vector<std::size_t>& dims) {
  if (w.size() != dims.size()) throw std::invalid_argument("polarization has the wrong number of weights");
  Rational s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * static_cast<long>(dims[i]);
  return s;
}

template <class T>
Rational tuple_weight(const std::vector<Rational>& w, const SubspaceTuple<T>& t) {
  std::vector<std::size_t> d;
  for (const auto& s : t) d.push_back(s.dim());
  return weighted_dim(w, d);
}

template <class T>
bool tuple_proper(const SubspaceTuple<T>& t) {
  bool all_zero = true, all_full = true;
  for (const auto& s : t) {
    all_zero &= s.is_zero();
    all_full &= s.is_full();
  }
  return !all_zero && !all_full;
}

template <class T>
bool tuple_invariant(const Representation<T>& r, const SubspaceTuple<T>& t) {
  if (t.size() != r.dims.size()) return false;
  for (std::size_t v = 0; v < t.size(); ++v)
    if (t[v].ambient() != r.dims[v]) return false;
  for (const auto& a : r.arrows) {
    if (t[a.src].is_zero()) continue;
    if (!t[a.dst].contains_columns(a.map * t[a.src].basis().transpose())) return false;
  }
  return true;
}

struct KingOptions {
  std::uint64_t budget = 2'000'000;  // tuples visited
};

template <class T>
struct KingResult {
  Verdict verdict = Verdict::stable;
  std::optional<SubspaceTuple<T>> witness;
  Rational witness_weight = 0;
  std::uint64_t visited = 0;
};

namespace detail {

// Shared bookkeeping: first positive tuple stops the search; first zero tuple is kept.
template <class T>
struct KingTracker {
  const std::vector<Rational>& weights;
  KingResult<T> result;
  std::optional<SubspaceTuple<T>> zero_witness;
  std::uint64_t budget;

  bool offer(const SubspaceTuple<T>& t) {
    if (++result.visited > budget) throw BudgetExceeded("King subspace search", BigInt(result.visited));
    if (!tuple_proper(t)) return true;
    auto w = tuple_weight(weights, t);
    if (w > 0) {
      result.verdict = Verdict::unstable;
      result.witness = t;
      result.witness_weight = w;
      return false;
    }
    if (w == 0 && !zero_witness) zero_witness = t;
    return true;
  }
  KingResult<T> finish() {
    if (result.verdict != Verdict::unstable && zero_witness) {
      result.verdict = Verdict::strictly_semistable;
      result.witness = zero_witness;
      result.witness_weight = 0;
    }
    return result;
  }
};

}  // namespace detail

// Exhaustive over invariant tuples: at each vertex only superspaces of the image of the
// subspaces already chosen upstream are enumerated.
template <class T>
KingResult<T> king_pruned(const Representation<T>& r, const std::vector<Rational>& weights, KingOptions opt = {}) {
  require_prime(r.field, "King search");
  std::size_t n = r.dims.size();
  std::vector<std::vector<const typename Representation<T>::Arrow*>> incoming(n);
  for (const auto& a : r.arrows) {
    if (a.src >= a.dst) throw std::invalid_argument("King search needs arrows in vertex order");
    incoming[a.dst].push_back(&a);
  }
  detail::KingTracker<T> tr{weights, {}, std::nullopt, opt.budget};
  SubspaceTuple<T> cur(n);
  std::function<bool(std::size_t)> rec = [&](std::size_t v) -> bool {
    if (v == n) return tr.offer(cur);
    Subspace<T> forced = Subspace<T>::zero(r.dims[v], r.field);
    for (auto* a : incoming[v])
      if (!cur[a->src].is_zero()) forced = forced + image_basis(a->map * cur[a->src].basis().transpose());
    for (std::size_t extra = 0; forced.dim() + extra <= r.dims[v]; ++extra) {
      bool go = true;
      for_each_superspace<T>(forced, extra, [&](const Subspace<T>& s) {
        cur[v] = s;
        go = rec(v + 1);
        return go;
      }, opt.budget);
      if (!go) return false;
    }
    return true;
  };
  rec(0);
  return tr.finish();
}

// Oracle: full product of all subspace tuples, filtered for invariance.
template <class T>
KingResult<T> king_naive(const Representation<T>& r, const std::vector<Rational>& weights, KingOptions opt = {}) {
  require_prime(r.field, "King search");
  std::size_t n = r.dims.size();
  std::vector<std::vector<Subspace<T>>> all(n);
  BigInt total = 1;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t d = 0; d <= r.dims[v]; ++d) {
      auto part = enumerate_subspaces<T>(r.dims[v], d, r.field, opt.budget);
      all[v].insert(all[v].end(), part.begin(), part.end());
    }
    total *= all[v].size();
  }
  if (total > opt.budget) throw BudgetExceeded("naive King search", total);
  detail::KingTracker<T> tr{weights, {}, std::nullopt, opt.budget};
  std::vector<std::size_t> idx(n, 0);
  SubspaceTuple<T> cur(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) cur[v] = all[v][idx[v]];
    if (tuple_invariant(r, cur) && !tr.offer(cur)) break;
    std::size_t v = n;
    while (v > 0 && ++idx[v - 1] == all[v - 1].size()) idx[--v] = 0;
    if (v == 0) break;
  }
  return tr.finish();
}

template <class T>
struct StabilityVerdict {
  Level level = Level::reductive;
  Verdict verdict = Verdict::stable;
  std::optional<SubspaceTuple<T>> witness;
  Rational witness_weight = 0;
  std::optional<Unipotent<T>> unipotent_witness;
  std::string method;
  std::uint64_t searched = 0;

  bool semistable() const { return verdict != Verdict::unstable; }
  bool stable() const { return verdict == Verdict::stable; }
};

template <class T>
StabilityVerdict<T> is_semistable_red(const ChainSpace<T>& c, const ChainPoint<T>& x,
                                      const std::vector<Rational>& weights, KingOptions opt = {}) {
  auto k = king_pruned(rep_from_chain(c, x), weights, opt);
  return {Level::reductive, k.verdict, k.witness, k.witness_weight, std::nullopt, "pruned", k.visited};
}

// Re-checks a witness from scratch: invariance under the (possibly moved) point and the claimed sign.
template <class T>
bool witness_valid(const ChainSpace<T>& c, const ChainPoint<T>& x, const std::vector<Rational>& weights,
                   const StabilityVerdict<T>& v) {
  if (v.verdict == Verdict::stable) return !v.witness;
  if (!v.witness) return false;
  auto y = v.unipotent_witness ? act_unipotent(c, *v.unipotent_witness, x) : x;
  if (!chain_residual(c, y).ok || !tuple_proper(*v.witness)) return false;
  if (!tuple_invariant(rep_from_chain(c, y), *v.witness)) return false;
  auto w = tuple_weight(weights, *v.witness);
  return w == v.witness_weight && (v.verdict == Verdict::unstable ? w > 0 : w == 0);
}

enum class GMethod { automatic, exhaustive, fast };

struct GOptions {
  GMethod method = GMethod::automatic;
  std::uint64_t budget = 2'000'000;
};

namespace detail {

template <class T>
Unipotent<T> unipotent_from_vec(const ChainSpace<T>& c, const Vec<T>& v) {
  Unipotent<T> u;
  std::size_t k = 0;
  for (auto i : c.unipotent_terms()) {
    const auto &a = c.terms[i][0], &b = c.terms[i][1];
    Matrix<T> m(c.ctx.dim(a.object, b.object) * b.mult, a.mult, c.field());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t q = 0; q < m.cols(); ++q) m(r, q) = v.at(k++);
    u.emplace(i, std::move(m));
  }
  return u;
}

inline Verdict worse(Verdict a, Verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

}  // namespace detail

// Every u ∈ H(F_p): King search on u·x.
template <class T>
StabilityVerdict<T> semistable_G_exhaustive(const ChainSpace<T>& c, const ChainPoint<T>& x,
                                            const std::vector<Rational>& weights, GOptions opt = {}) {
  require_prime(c.field(), "G-level check");
  std::size_t h = 0;
  for (auto i : c.unipotent_terms()) h += c.unipotent_dim(i);
  BigInt count = 1;
  for (std::size_t i = 0; i < h; ++i) count *= c.field().p;
  if (count > opt.budget) throw BudgetExceeded("unipotent orbit enumeration", count);
  StabilityVerdict<T> out{Level::full_group, Verdict::stable, std::nullopt, 0, std::nullopt, "exhaustive", 0};
  Vec<T> u(h, Scalar<T>::from_int(0, c.field()));
  std::vector<std::uint64_t> digits(h, 0);
  while (true) {
    auto uu = detail::unipotent_from_vec(c, u);
    auto k = king_pruned(rep_from_chain(c, act_unipotent(c, uu, x)), weights, {opt.budget});
    out.searched += k.visited;
    if (static_cast<int>(k.verdict) > static_cast<int>(out.verdict)) {
      out.verdict = k.verdict;
      out.witness = k.witness;
      out.witness_weight = k.witness_weight;
      out.unipotent_witness = uu;
      if (k.verdict == Verdict::unstable) return out;
    }
    std::size_t i = h;
    while (i > 0 && ++digits[i - 1] == c.field().p) {
      digits[i - 1] = 0;
      u[i - 1] = Scalar<T>::from_int(0, c.field());
      --i;
    }
    if (i == 0) break;
    u[i - 1] = Scalar<T>::from_int(static_cast<std::int64_t>(digits[i - 1]), c.field());
  }
  return out;
}

// One unipotent term: u·x is affine in u, so for each tuple with weight ≥ 0 the set of u making
// it invariant is the solution set of a linear system.
template <class T>
StabilityVerdict<T> semistable_G_fast(const ChainSpace<T>& c, const ChainPoint<T>& x,
                                      const std::vector<Rational>& weights, GOptions opt = {}) {
  require_prime(c.field(), "G-level check");
  auto terms = c.unipotent_terms();
  if (terms.size() > 1) throw std::invalid_argument("fast G-level check needs a single unipotent term");
  const auto F = c.field();
  std::size_t h = terms.empty() ? 0 : c.unipotent_dim(terms[0]);
  auto base = rep_from_chain(c, x, true);
  std::vector<std::vector<Matrix<T>>> delta(h);
  for (std::size_t i = 0; i < h; ++i) {
    auto moved = rep_from_chain(c, act_unipotent(c, detail::unipotent_from_vec(c, unit<T>(h, i, F)), x), true);
    for (std::size_t k = 0; k < base.arrows.size(); ++k) delta[i].push_back(moved.arrows[k].map - base.arrows[k].map);
  }
  std::size_t n = base.dims.size();
  std::vector<std::vector<Subspace<T>>> all(n);
  BigInt total = 1;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t d = 0; d <= base.dims[v]; ++d) {
      auto part = enumerate_subspaces<T>(base.dims[v], d, F, opt.budget);
      all[v].insert(all[v].end(), part.begin(), part.end());
    }
    total *= all[v].size();
  }
  if (total > opt.budget) throw BudgetExceeded("tuple enumeration for the fast G-level check", total);
  StabilityVerdict<T> out{Level::full_group, Verdict::stable, std::nullopt, 0, std::nullopt, "fast", 0};
  std::vector<std::size_t> idx(n, 0);
  SubspaceTuple<T> cur(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) cur[v] = all[v][idx[v]];
    ++out.searched;
    Rational w = tuple_weight(weights, cur);
    bool wanted = w > 0 || (w == 0 && out.verdict == Verdict::stable);
    if (wanted && tuple_proper(cur)) {
      std::vector<Vec<T>> rows;
      Vec<T> rhs;
      for (std::size_t k = 0; k < base.arrows.size(); ++k) {
        const auto& a = base.arrows[k];
        if (cur[a.src].is_zero() || cur[a.dst].is_full()) continue;
        const auto& ann = cur[a.dst].annihilator();
        auto bt = cur[a.src].basis().transpose();
        auto c0 = ann * a.map * bt;
        std::vector<Matrix<T>> ci;
        for (std::size_t i = 0; i < h; ++i) ci.push_back(ann * delta[i][k] * bt);
        for (std::size_t r = 0; r < c0.rows(); ++r)
          for (std::size_t q = 0; q < c0.cols(); ++q) {
            Vec<T> row(h);
            for (std::size_t i = 0; i < h; ++i) row[i] = ci[i](r, q);
            rows.push_back(std::move(row));
            rhs.push_back(-c0(r, q));
          }
      }
      std::optional<Vec<T>> sol = Vec<T>(h, Scalar<T>::from_int(0, F));
      if (!rows.empty()) sol = solve_linear(Matrix<T>::from_rows(rows, h, F), rhs);
      if (sol) {
        out.verdict = w > 0 ? Verdict::unstable : Verdict::strictly_semistable;
        out.witness = cur;
        out.witness_weight = w;
        out.unipotent_witness = detail::unipotent_from_vec(c, *sol);
        if (w > 0) return out;
      }
    }
    std::size_t v = n;
    while (v > 0 && ++idx[v - 1] == all[v - 1].size()) idx[--v] = 0;
    if (v == 0) break;
  }
  return out;
}

template <class T>
StabilityVerdict<T> is_semistable_G(const ChainSpace<T>& c, const ChainPoint<T>& x,
                                    const std::vector<Rational>& weights, GOptions opt = {}) {
  if (c.unipotent_terms().empty()) {
    auto v = is_semistable_red(c, x, weights, {opt.budget});
    v.level = Level::full_group;
    return v;
  }
  bool fast = opt.method == GMethod::fast || (opt.method == GMethod::automatic && c.unipotent_terms().size() == 1);
  return fast ? semistable_G_fast(c, x, weights, opt) : semistable_G_exhaustive(c, x, weights, opt);
}

// Rational points: the G-level verdict is computed modulo each prime and must agree.
struct PrimeVerdicts {
  std::vector<std::pair<std::uint64_t, Verdict>> per_prime;
  std::optional<Verdict> agreed;
};

inline PrimeVerdicts semistable_G_over_primes(const ChainSpace<Rational>& c, const ChainPoint<Rational>& x,
                                              const std::vector<Rational>& weights,
                                              const std::vector<std::uint64_t>& primes, GOptions opt = {}) {
  if (primes.size() < 2) throw std::invalid_argument("at least two primes are required");
  PrimeVerdicts out;
  for (auto p : primes) {
    auto [d, y] = reduce_chain(c, x, FieldSpec::prime(p));
    out.per_prime.emplace_back(p, is_semistable_G(d, y, weights, opt).verdict);
  }
  bool same = std::all_of(out.per_prime.begin(), out.per_prime.end(),
                          [&](const auto& pv) { return pv.second == out.per_prime.front().second; });
  if (same) out.agreed = out.per_prime.front().second;
  return out;
}

// ---- Polarizations ----

struct Polarization {
  std::vector<std::string> names;
  std::vector<Rational> weights;
  std::vector<std::string> flags;  // necessary conditions that fail, degeneracies
};

inline Polarization scale(Polarization p, const Rational& s) {
  if (s <= 0) throw std::invalid_argument("polarizations scale by positive rationals only");
  for (auto& w : p.weights) w *= s;
  return p;
}

// (λ1, λ2, μ1) with inequality λ1 m1' + λ2 m2' − μ1 n1' ≤ 0; scaled to λ1 m1 + λ2 m2 = 1, μ1 = 1/n1.
inline Polarization normalize_polarization(const Rational& l1, const Rational& l2, std::optional<Rational> mu1,
                                           std::size_t m1, std::size_t m2, std::size_t n1) {
  if (l1 <= 0 || l2 <= 0 || (mu1 && *mu1 <= 0)) throw std::invalid_argument("weights must be positive");
  if (n1 == 0) throw std::invalid_argument("n1 must be positive");
  Rational s = l1 * static_cast<long>(m1) + l2 * static_cast<long>(m2);
  if (mu1 && *mu1 * static_cast<long>(n1) != s)
    throw std::invalid_argument("zero-sum fails: λ1 m1 + λ2 m2 ≠ μ1 n1");
  return {{"lambda1", "lambda2", "mu1"}, {l1 / s, l2 / s, Rational(1, static_cast<long>(n1))}, {}};
}

inline Polarization polarization_from_rho(const Rational& rho, std::size_t m1, std::size_t m2, std::size_t n1) {
  return normalize_polarization(1, rho, std::nullopt, m1, m2, n1);
}

// Weights of the morphism chain (E1⊗M1)⊕(E2⊗M2) → F1⊗N1 in vertex order.
inline std::vector<Rational> morphism_weights(const Polarization& p) {
  return {p.weights.at(0), p.weights.at(1), -p.weights.at(2)};
}

inline Polarization pol_first_mutation(const Rational& l1, const Rational& mu1, const Rational& mu2,
                                       const Rational& nu1, std::size_t a) {
  Polarization p{{"alpha1", "alpha2", "beta1", "gamma1"}, {l1, mu2 - static_cast<long>(a) * mu1, mu1, nu1}, {}};
  if (p.weights[1] <= 0) p.flags.push_back("alpha2 <= 0: stable points need mu2 > a*mu1");
  return p;
}

inline Polarization pol_second_mutation(const Rational& l1, const Rational& mu1, const Rational& mu2,
                                        const Rational& nu1, std::size_t a, std::size_t b) {
  Rational delta = mu2 - static_cast<long>(a) * mu1 - static_cast<long>(b) * l1;
  Polarization p{{"delta", "epsilon", "theta", "rho"}, {delta, l1, mu1, nu1}, {}};
  if (delta <= 0) p.flags.push_back("delta <= 0: stable points need mu2 > a*mu1 + b*lambda1");
  return p;
}

inline Polarization pol_direct_morphism(const Rational& l1, const Rational& l2, const Rational& mu1, std::size_t a) {
  Polarization p{{"alpha", "beta", "gamma"}, {l2 - static_cast<long>(a) * l1, l1, -mu1}, {}};
  if (p.weights[0] <= 0) p.flags.push_back("alpha <= 0: rho = lambda2/lambda1 does not exceed a");
  return p;
}

// (1/dim Q1, ν2, ν1) for E2⊗Q1 → (G1⊗M1)⊕(F1⊗N1), dim Q1 = a m1 + m2.
inline Polarization pol_indirect_morphism(const Rational& l1, const Rational& l2, std::size_t a, std::size_t m1,
                                          std::size_t m2, std::size_t n1) {
  if (l2 == 0) throw std::invalid_argument("lambda2 must be nonzero");
  long q = static_cast<long>(a * m1 + m2);
  if (q == 0 || n1 == 0) throw std::invalid_argument("dim Q1 and n1 must be positive");
  Rational nu1 = Rational(1) / (q * static_cast<long>(n1) * l2);
  Rational nu2 = (static_cast<long>(a) * l2 - l1) / (q * l2);
  Polarization p{{"1/dimQ1", "nu2", "nu1"}, {Rational(1, q), nu2, nu1}, {}};
  if (nu2 == 0) p.flags.push_back("nu2 = 0: degenerate (a*lambda2 = lambda1)");
  if (nu2 < 0) p.flags.push_back("nu2 < 0: stable points need a*lambda2 - lambda1 > 0");
  return p;
}

// ---- Walls ----

struct Chamber {
  Rational lower, upper;  // upper < 0 encodes +infinity
};

// Walls of (O(-2) ⊕ O(-1)) → O^(n+2) on P^n: ρ_k = k/(n+2−k), 1 ≤ k ≤ n+1.
inline std::vector<Rational> singular_values_ex2(std::size_t n) {
  std::vector<Rational> v;
  for (std::size_t k = 1; k <= n + 1; ++k) v.emplace_back(static_cast<long>(k), static_cast<long>(n + 2 - k));
  std::sort(v.begin(), v.end());
  return v;
}

// Walls in λ2 for O(-2) ⊕ O(-1) → O^n1 on P^n: α_k = k/n1, 1 ≤ k ≤ min(n, n1−1).
inline std::vector<Rational> singular_values_ex3(std::size_t n, std::size_t n1) {
  std::vector<Rational> v;
  if (n1 == 0) return v;
  for (std::size_t k = 1; k <= std::min(n, n1 - 1); ++k) v.emplace_back(static_cast<long>(k), static_cast<long>(n1));
  return v;
}

inline std::vector<Chamber> chambers(const std::vector<Rational>& walls) {
  std::vector<Chamber> out;
  Rational lo = 0;
  for (const auto& w : walls) {
    out.push_back({lo, w});
    lo = w;
  }
  out.push_back({lo, Rational(-1)});
  return out;
}

// Candidate walls in ρ for (E1⊗M1)⊕(E2⊗M2) → F1⊗N1: values where some dimension vector
// (i, j, k) has weight zero, i + ρ j = k (m1 + ρ m2)/n1.
inline std::vector<Rational> dimension_walls(std::size_t m1, std::size_t m2, std::size_t n1) {
  std::set<Rational> s;
  for (std::size_t i = 0; i <= m1; ++i)
    for (std::size_t j = 0; j <= m2; ++j)
      for (std::size_t k = 0; k <= n1; ++k) {
        if ((i == 0 && j == 0 && k == 0) || (i == m1 && j == m2 && k == n1)) continue;
        Rational slope = Rational(static_cast<long>(j)) - Rational(static_cast<long>(k * m2), static_cast<long>(n1));
        Rational cst = Rational(static_cast<long>(k * m1), static_cast<long>(n1)) - static_cast<long>(i);
        if (slope == 0) continue;
        Rational rho = cst / slope;
        if (rho > 0) s.insert(rho);
      }
  return {s.begin(), s.end()};
}

// ---- Existence certificates ----

using ConstantTable = std::map<std::string, Rational>;

struct Condition {
  std::string text;
  Rational slack;  // lhs − rhs of "lhs > rhs" or "lhs ≥ rhs"
  bool strict = true;
  bool holds() const { return strict ? slack > 0 : slack >= 0; }
};

struct TheoremCheck {
  std::string name;
  std::vector<Condition> conditions;
  std::vector<std::string> missing;  // constants needed but not supplied
  std::string note;
  bool vacuous = false;  // hypothesis of an implication fails
  bool holds() const {
    return missing.empty() &&
           (vacuous || std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.holds(); }));
  }
};

struct Certificate {
  std::string setting;
  std::vector<TheoremCheck> theorems;
  std::vector<std::string> certified;  // constructions giving a projective quotient
  std::vector<std::string> notes;
  const TheoremCheck& theorem(const std::string& name) const {
    for (const auto& t : theorems)
      if (t.name == name) return t;
    throw std::invalid_argument("no theorem " + name + " in the report");
  }
  bool certifies(const std::string& construction) const {
    return std::find(certified.begin(), certified.end(), construction) != certified.end();
  }
};

struct ComplexInput {
  std::size_t a = 0, b = 0, l1 = 1, m1 = 1, m2 = 1, n1 = 1;
  Rational lambda1, mu1, mu2, nu1;
  ConstantTable constants;  // c1, c2, c evaluated at k = m2
};

namespace detail {

inline std::optional<Rational> lookup(const ConstantTable& t, const std::string& k, TheoremCheck& th) {
  auto it = t.find(k);
  if (it == t.end()) {
    th.missing.push_back(k);
    return std::nullopt;
  }
  return it->second;
}

inline Rational num(std::size_t x) { return Rational(static_cast<long>(x)); }

}  // namespace detail

// Three-term complexes E1⊗L1 → (F1⊗M1)⊕(F2⊗M2) → G1⊗N1 with weights (λ1, μ1, μ2, ν1).
inline Certificate certify_complex(const ComplexInput& in) {
  using detail::num;
  Certificate cert{"complex", {}, {}, {}};
  const Rational &l = in.lambda1, &m1 = in.mu1, &m2 = in.mu2, &n1 = in.nu1;
  Rational a = num(in.a), b = num(in.b);
  Rational sum = l * num(in.l1) + m1 * num(in.m1) + m2 * num(in.m2) + n1 * num(in.n1);
  if (sum != 0) cert.notes.push_back("polarization does not satisfy the zero-sum condition");

  TheoremCheck nec{"stable points", {}, {}, "necessary conditions", false};
  nec.conditions.push_back({"lambda1 > 0", l, true});
  nec.conditions.push_back({"nu1 < 0", -n1, true});
  nec.conditions.push_back({"mu1*m1 + nu1*n1 < 0", -(m1 * num(in.m1) + n1 * num(in.n1)), true});
  nec.conditions.push_back({"mu2*m2 + nu1*n1 < 0", -(m2 * num(in.m2) + n1 * num(in.n1)), true});
  cert.theorems.push_back(nec);

  TheoremCheck first{"first mutation", {{"mu2 - a*mu1 > 0", m2 - a * m1, true}}, {}, "alpha2 > 0", false};
  cert.theorems.push_back(first);
  TheoremCheck second{"second mutation", {{"mu2 - a*mu1 - b*lambda1 > 0", m2 - a * m1 - b * l, true}}, {}, "delta > 0",
                      false};
  cert.theorems.push_back(second);

  TheoremCheck p43{"complex transfer", {}, {}, "equivalence of (semi-)stability through both mutations", false};
  auto c1 = detail::lookup(in.constants, "c1", p43);
  auto c2 = detail::lookup(in.constants, "c2", p43);
  if (c1 && c2) {
    if (*c2 == 0) {
      p43.note += "; c2 = 0 so the bound is -infinity for lambda1 > 0";
      p43.conditions.push_back({"lambda1 > 0", l, true});
    } else {
      p43.conditions.push_back(
          {"mu2 >= (b - a/c2)*lambda1 - a*c1*nu1", m2 - ((b - a / *c2) * l - a * *c1 * n1), false});
    }
  }
  cert.theorems.push_back(p43);

  TheoremCheck t1{"complex projective (1)", {}, {}, "", false};
  auto c1b = detail::lookup(in.constants, "c1", t1);
  if (c1b) t1.conditions.push_back({"mu2 - a*nu1*c1 > 0", m2 - a * n1 * *c1b, true});
  t1.conditions.push_back({"mu2 - a*mu1 - b*lambda1 > 0", m2 - a * m1 - b * l, true});
  cert.theorems.push_back(t1);

  TheoremCheck t2{"complex projective (2)", {}, {}, "constant read as c(m2)", false};
  auto c = detail::lookup(in.constants, "c", t2);
  auto c2b = detail::lookup(in.constants, "c2", t2);
  if (c && c2b) {
    Rational hyp = l + n1 * *c + m1 * *c2b;
    if (!(m1 < 0 && hyp < 0))
      t2.vacuous = true;
    else
      t2.conditions.push_back(
          {"mu2 - a*mu1 + b*nu1*c + b*mu1*c2 >= 0", m2 - a * m1 + b * n1 * *c + b * m1 * *c2b, false});
  }
  cert.theorems.push_back(t2);

  bool stable_ok = cert.theorems[0].holds();
  if (stable_ok && cert.theorem("complex projective (1)").holds() && cert.theorem("complex projective (2)").holds())
    cert.certified.push_back("first+second mutation");
  return cert;
}

struct MorphismInput {
  std::size_t a = 0, h11 = 0, h12 = 0, m1 = 1, m2 = 1, n1 = 1;
  long long a_prime = 0;
  Rational lambda1, lambda2;  // normalized: λ1 m1 + λ2 m2 = 1, μ1 = 1/n1
  ConstantTable constants;    // c0 at k = m2; c0p, c1_534, c2_534 at k = m1
};

// Morphisms (E1⊗M1)⊕(E2⊗M2) → F1⊗N1 with normalized weights.
inline Certificate certify_morphism(const MorphismInput& in) {
  using detail::num;
  Certificate cert{"morphism", {}, {}, {}};
  const Rational &l1 = in.lambda1, &l2 = in.lambda2;
  Rational a = num(in.a), n1 = num(in.n1), ap = Rational(static_cast<long>(in.a_prime));
  if (l1 * num(in.m1) + l2 * num(in.m2) != 1) cert.notes.push_back("polarization is not normalized");

  TheoremCheck nec{"stable points", {{"lambda1 > 0", l1, true}, {"lambda2 > 0", l2, true}}, {}, "", false};
  cert.theorems.push_back(nec);

  TheoremCheck t52{"direct", {{"lambda2 - a*lambda1 > 0", l2 - a * l1, true}}, {}, "direct mutation", false};
  if (auto c0 = detail::lookup(in.constants, "c0", t52))
    t52.conditions.push_back({"lambda2 > a*c0/n1", l2 - a * *c0 / n1, true});
  cert.theorems.push_back(t52);

  TheoremCheck p54{"indirect transfer", {}, {}, "equivalence through the indirect mutation", false};
  auto c0p = detail::lookup(in.constants, "c0p", p54);
  if (c0p) p54.conditions.push_back({"lambda2 >= c0p/n1", l2 - *c0p / n1, false});
  cert.theorems.push_back(p54);

  TheoremCheck t55{"indirect", {}, {}, "indirect mutation", false};
  if (auto v = detail::lookup(in.constants, "c0p", t55)) t55.conditions.push_back({"lambda2 >= c0p/n1", l2 - *v / n1, false});
  t55.conditions.push_back({"lambda2 > 1/(m2+1)", l2 - Rational(1, static_cast<long>(in.m2 + 1)), true});
  cert.theorems.push_back(t55);

  TheoremCheck t562{"dual indirect", {}, {}, "indirect mutation of the dual", false};
  t562.conditions.push_back({"lambda1 < h11/n1", num(in.h11) / n1 - l1, true});
  t562.conditions.push_back({"lambda2 < h12/n1", num(in.h12) / n1 - l2, true});
  t562.conditions.push_back({"a*lambda2 - lambda1 > a'/n1", a * l2 - l1 - ap / n1, true});
  if (auto v = detail::lookup(in.constants, "c1_534", t562))
    t562.conditions.push_back({"h11 - lambda1*n1 >= c1*a", num(in.h11) - l1 * n1 - *v * a, false});
  cert.theorems.push_back(t562);

  TheoremCheck t563{"indirect+direct", {}, {}, "indirect mutation followed by the direct one", false};
  if (auto v = detail::lookup(in.constants, "c0p", t563))
    t563.conditions.push_back({"lambda2 >= c0p/n1", l2 - *v / n1, false});
  t563.conditions.push_back({"lambda2 > 1/(m2+1)", l2 - Rational(1, static_cast<long>(in.m2 + 1)), true});
  if (auto v = detail::lookup(in.constants, "c2_534", t563)) {
    t563.conditions.push_back({"a*lambda2 - lambda1 > a'*c2*lambda2", a * l2 - l1 - ap * *v * l2, true});
    t563.conditions.push_back({"a*lambda2 - lambda1 > a'/n1", a * l2 - l1 - ap / n1, true});
  }
  cert.theorems.push_back(t563);

  bool ok = cert.theorems[0].holds();
  if (ok && cert.theorem("direct").holds()) cert.certified.push_back("direct");
  if (ok && cert.theorem("indirect").holds()) cert.certified.push_back("indirect");
  if (ok && cert.theorem("dual indirect").holds()) cert.certified.push_back("dual indirect");
  if (ok && cert.theorem("indirect+direct").holds()) cert.certified.push_back("indirect+direct");
  return cert;
}

inline MorphismInput morphism_input_at_rho(MorphismInput in, const Rational& rho) {
  Rational s = detail::num(in.m1) + rho * detail::num(in.m2);
  if (s <= 0) throw std::invalid_argument("m1 + rho*m2 must be positive");
  in.lambda1 = 1 / s;
  in.lambda2 = rho / s;
  return in;
}

// Exact boundary in ρ of a theorem whose conditions are all lower bounds on ρ: every slack
// times (m1 + ρ m2) is affine in ρ, so each condition has one root. Returns the largest root
// after checking the theorem fails just below it and holds just above it.
struct Boundary {
  Rational value;
  bool holds_at_boundary = false;
};

inline std::optional<Boundary> rho_boundary(const MorphismInput& in, const std::string& theorem) {
  auto scaled = [&](const Rational& rho, std::size_t i) {
    auto cert = certify_morphism(morphism_input_at_rho(in, rho));
    return cert.theorem(theorem).conditions.at(i).slack * (detail::num(in.m1) + rho * detail::num(in.m2));
  };
  auto probe = certify_morphism(morphism_input_at_rho(in, 1)).theorem(theorem);
  if (!probe.missing.empty()) return std::nullopt;
  std::optional<Rational> best;
  for (std::size_t i = 0; i < probe.conditions.size(); ++i) {
    Rational s0 = scaled(0, i), s1 = scaled(1, i);
    if (s1 <= s0) continue;  // not a lower bound on ρ
    Rational root = -s0 / (s1 - s0);
    if (!best || root > *best) best = root;
  }
  if (!best) return std::nullopt;
  Rational eps = Rational(1, 1000000);
  auto at = [&](const Rational& r) { return certify_morphism(morphism_input_at_rho(in, r)).theorem(theorem).holds(); };
  if (*best <= 0 || at(*best - eps) || !at(*best + eps)) return std::nullopt;
  return Boundary{*best, at(*best)};
}

// Same for the three-term setting: boundary in μ2 with λ1, μ1 fixed and ν1 from the zero sum.
inline ComplexInput complex_input_at_mu2(ComplexInput in, const Rational& mu2) {
  in.mu2 = mu2;
  in.nu1 = -(in.lambda1 * static_cast<long>(in.l1) + in.mu1 * static_cast<long>(in.m1) +
             mu2 * static_cast<long>(in.m2)) /
           static_cast<long>(in.n1);
  return in;
}

inline std::optional<Boundary> mu2_boundary(const ComplexInput& in, const std::string& construction) {
  auto holds = [&](const Rational& mu2) { return certify_complex(complex_input_at_mu2(in, mu2)).certifies(construction); };
  auto slacks = [&](const Rational& mu2) {
    std::vector<Rational> s;
    auto cert = certify_complex(complex_input_at_mu2(in, mu2));
    for (const auto& t : cert.theorems)
      if (t.name == "stable points" || t.name == "complex projective (1)")
        for (const auto& c : t.conditions) s.push_back(c.slack);
    return s;
  };
  auto s0 = slacks(0), s1 = slacks(1);
  std::optional<Rational> best;
  for (std::size_t i = 0; i < s0.size(); ++i) {
    if (s1[i] <= s0[i]) continue;
    Rational root = -s0[i] / (s1[i] - s0[i]);
    if (!best || root > *best) best = root;
  }
  if (!best) return std::nullopt;
  Rational eps = Rational(1, 1000000);
  if (holds(*best - eps) || !holds(*best + eps)) return std::nullopt;
  return Boundary{*best, holds(*best)};
}

// ---- Reports ----

template <class T>
Json to_json(const StabilityVerdict<T>& v, const std::vector<std::string>& names) {
  Json j{{"level", level_name(v.level)}, {"verdict", verdict_name(v.verdict)}, {"method", v.method},
         {"searched", v.searched}};
  if (v.witness) {
    Json w = Json::object();
    for (std::size_t i = 0; i < v.witness->size(); ++i)
      w[i < names.size() ? names[i] : std::to_string(i)] = to_json((*v.witness)[i].basis());
    j["witness"] = w;
    j["witness_weight"] = Scalar<Rational>::str(v.witness_weight);
  }
  if (v.unipotent_witness) {
    Json u = Json::object();
    for (const auto& [i, m] : *v.unipotent_witness) u["term " + std::to_string(i)] = to_json(m);
    j["unipotent_witness"] = u;
  }
  return j;
}

inline Json to_json(const Certificate& c) {
  Json th = Json::array();
  for (const auto& t : c.theorems) {
    Json conds = Json::array();
    for (const auto& k : t.conditions)
      conds.push_back({{"condition", k.text}, {"slack", Scalar<Rational>::str(k.slack)}, {"holds", k.holds()}});
    Json jt{{"name", t.name}, {"holds", t.holds()}, {"conditions", conds}};
    if (!t.note.empty()) jt["note"] = t.note;
    if (t.vacuous) jt["vacuous"] = true;
    if (!t.missing.empty()) jt["missing_constants"] = t.missing;
    th.push_back(jt);
  }
  return {{"setting", c.setting}, {"theorems", th}, {"certified", c.certified}, {"notes", c.notes}};
}

inline Json to_json(const Polarization& p) {
  Json w = Json::object();
  for (std::size_t i = 0; i < p.weights.size(); ++i) w[p.names.at(i)] = Scalar<Rational>::str(p.weights[i]);
  return {{"weights", w}, {"flags", p.flags}};
}

}  // namespace cmut
