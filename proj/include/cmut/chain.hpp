#pragma once

#include "cmut/abstract.hpp"
#include "cmut/context.hpp"

namespace cmut {

// One summand E ⊗ M of a term; `mult` is dim M.
struct Summand {
  std::size_t object = 0;
  std::size_t mult = 0;
  std::string label;  // name of the multiplicity space, e.g. "M1"
};
using Term = std::vector<Summand>;

// E_0 → E_1 → … → E_p; each term has at most two summands, the first one
// receiving no maps from the second (Hom(second, first) = 0).
template <class T>
struct ChainSpace {
  CompositionContext<T> ctx;
  std::vector<Term> terms;

  const FieldSpec& field() const { return ctx.field(); }
  std::size_t junctions() const { return terms.empty() ? 0 : terms.size() - 1; }
  std::size_t homdim(std::size_t i, std::size_t s, std::size_t t) const {
    return ctx.dim(terms.at(i).at(s).object, terms.at(i + 1).at(t).object);
  }
  // Vertices of the associated quiver, in term order.
  std::vector<std::pair<std::size_t, std::size_t>> vertices() const {
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = 0; j < terms[i].size(); ++j) v.emplace_back(i, j);
    return v;
  }
  std::vector<std::size_t> vertex_dims() const {
    std::vector<std::size_t> d;
    for (const auto& t : terms)
      for (const auto& s : t) d.push_back(s.mult);
    return d;
  }
  std::vector<std::string> vertex_names() const {
    std::vector<std::string> n;
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = 0; j < terms[i].size(); ++j)
        n.push_back(terms[i][j].label.empty() ? "M(" + std::to_string(i) + "," + std::to_string(j) + ")"
                                              : terms[i][j].label);
    return n;
  }
  // Terms carrying a unipotent coordinate in Hom(first, second) ⊗ Hom(M_first, M_second).
  std::vector<std::size_t> unipotent_terms() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i].size() == 2 && ctx.dim(terms[i][0].object, terms[i][1].object) * terms[i][0].mult *
                                          terms[i][1].mult >
                                      0)
        out.push_back(i);
    return out;
  }
  std::size_t unipotent_dim(std::size_t i) const {
    const auto& t = terms.at(i);
    return ctx.dim(t[0].object, t[1].object) * t[0].mult * t[1].mult;
  }
};

// blocks[i][s][t]: (homdim(i,s,t) · d_t) × d_s, entry [α*d_t + y, x].
template <class T>
struct ChainPoint {
  std::vector<std::vector<std::vector<Matrix<T>>>> blocks;
  friend bool operator==(const ChainPoint& a, const ChainPoint& b) { return a.blocks == b.blocks; }
};

inline std::string block_name(std::size_t i, std::size_t s, std::size_t t) {
  return "(" + std::to_string(i) + "," + std::to_string(s) + "," + std::to_string(t) + ")";
}

template <class T>
std::vector<std::string> chain_space_violations(const ChainSpace<T>& c) {
  std::vector<std::string> out;
  const auto& ctx = c.ctx;
  if (c.terms.empty()) return {"chain has no terms"};
  if (c.junctions() > 8) out.push_back("more than 8 junctions");
  std::size_t total = 0;
  for (std::size_t i = 0; i < c.terms.size(); ++i) {
    const auto& t = c.terms[i];
    if (t.empty() || t.size() > 2) out.push_back("term " + std::to_string(i) + " must have one or two summands");
    for (const auto& s : t) {
      total += s.mult;
      if (s.object >= ctx.size()) {
        out.push_back("term " + std::to_string(i) + " names an unknown object");
        return out;
      }
      if (!ctx.is_simple(s.object)) out.push_back(ctx.name(s.object) + " is not simple");
    }
    if (t.size() == 2) {
      auto a = t[0].object, b = t[1].object;
      if (!ctx.defined(b, a) || ctx.dim(b, a) != 0)
        out.push_back("Hom(" + ctx.name(b) + "," + ctx.name(a) + ") must vanish inside term " + std::to_string(i));
      if (!ctx.defined(a, b)) out.push_back("Hom(" + ctx.name(a) + "," + ctx.name(b) + ") is not in the context");
    }
  }
  if (total > 64) out.push_back("total multiplicity exceeds 64");
  for (std::size_t i = 0; i < c.terms.size(); ++i)
    for (std::size_t k = i + 1; k < c.terms.size(); ++k)
      for (const auto& s : c.terms[i])
        for (const auto& t : c.terms[k]) {
          if (ctx.defined(t.object, s.object) && ctx.dim(t.object, s.object) != 0)
            out.push_back("Hom(" + ctx.name(t.object) + "," + ctx.name(s.object) + ") must vanish (term " +
                          std::to_string(k) + " before term " + std::to_string(i) + ")");
          if (k == i + 1 && !ctx.defined(s.object, t.object))
            out.push_back("Hom(" + ctx.name(s.object) + "," + ctx.name(t.object) + ") is not in the context");
          if (k == i + 2)
            for (const auto& mid : c.terms[i + 1])
              if (!ctx.has_comp(s.object, mid.object, t.object))
                out.push_back("composition " + ctx.triple_name(s.object, mid.object, t.object) + " is missing");
        }
  return out;
}

template <class T>
void require_chain_space(const ChainSpace<T>& c) {
  auto v = chain_space_violations(c);
  if (!v.empty()) throw std::invalid_argument("invalid chain space: " + v.front());
}

template <class T>
ChainPoint<T> zero_chain(const ChainSpace<T>& c) {
  ChainPoint<T> x;
  x.blocks.resize(c.junctions());
  for (std::size_t i = 0; i < c.junctions(); ++i) {
    x.blocks[i].resize(c.terms[i].size());
    for (std::size_t s = 0; s < c.terms[i].size(); ++s)
      for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t)
        x.blocks[i][s].emplace_back(c.homdim(i, s, t) * c.terms[i + 1][t].mult, c.terms[i][s].mult, c.field());
  }
  return x;
}

// Writes the Hom-vector `form` as the (target z, source x) entry of a block with target multiplicity dt.
template <class T>
void set_entry_form(Matrix<T>& block, std::size_t dt, std::size_t z, std::size_t x, const Vec<T>& form) {
  for (std::size_t a = 0; a < form.size(); ++a) block(a * dt + z, x) = form[a];
}

template <class T>
Vec<T> entry_form(const Matrix<T>& block, std::size_t dt, std::size_t z, std::size_t x) {
  Vec<T> v(dt ? block.rows() / dt : 0, block.zero());
  for (std::size_t a = 0; a < v.size(); ++a) v[a] = block(a * dt + z, x);
  return v;
}

template <class T>
bool chain_shape_ok(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  if (x.blocks.size() != c.junctions()) return false;
  for (std::size_t i = 0; i < c.junctions(); ++i) {
    if (x.blocks[i].size() != c.terms[i].size()) return false;
    for (std::size_t s = 0; s < c.terms[i].size(); ++s) {
      if (x.blocks[i][s].size() != c.terms[i + 1].size()) return false;
      for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
        const auto& b = x.blocks[i][s][t];
        if (b.rows() != c.homdim(i, s, t) * c.terms[i + 1][t].mult || b.cols() != c.terms[i][s].mult) return false;
      }
    }
  }
  return true;
}

// B∘A for A: X⊗M_x → Y⊗M_y and B: Y⊗M_y → Z⊗M_z, through comp(X,Y,Z).
template <class T>
Matrix<T> compose_blocks(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, std::size_t z,
                         const Matrix<T>& a, const Matrix<T>& b, std::size_t dx, std::size_t dy, std::size_t dz) {
  std::size_t hxy = ctx.dim(x, y), hyz = ctx.dim(y, z), hxz = ctx.dim(x, z);
  Matrix<T> out(hxz * dz, dx, ctx.field());
  if (hxz == 0 || dx == 0 || dz == 0) return out;
  const auto& c = ctx.comp(x, y, z);
  for (std::size_t al = 0; al < hxy; ++al) {
    auto ab = a.block(al * dy, 0, dy, dx);
    if (ab.is_zero()) continue;
    for (std::size_t be = 0; be < hyz; ++be) {
      bool any = false;
      for (std::size_t g = 0; g < hxz && !any; ++g) any = !Scalar<T>::is_zero(c(g, al * hyz + be));
      if (!any) continue;
      auto prod = b.block(be * dz, 0, dz, dy) * ab;
      if (prod.is_zero()) continue;
      for (std::size_t g = 0; g < hxz; ++g) {
        T k = c(g, al * hyz + be);
        if (Scalar<T>::is_zero(k)) continue;
        for (std::size_t r = 0; r < dz; ++r)
          for (std::size_t q = 0; q < dx; ++q) out(g * dz + r, q) += k * prod(r, q);
      }
    }
  }
  return out;
}

template <class T>
Matrix<T> junction_composite(const ChainSpace<T>& c, const ChainPoint<T>& x, std::size_t i, std::size_t s,
                             std::size_t u) {
  const auto &ti = c.terms[i], &tm = c.terms[i + 1], &to = c.terms[i + 2];
  Matrix<T> sum(c.ctx.dim(ti[s].object, to[u].object) * to[u].mult, ti[s].mult, c.field());
  for (std::size_t t = 0; t < tm.size(); ++t)
    sum = sum + compose_blocks(c.ctx, ti[s].object, tm[t].object, to[u].object, x.blocks[i][s][t],
                               x.blocks[i + 1][t][u], ti[s].mult, tm[t].mult, to[u].mult);
  return sum;
}

struct ChainResidual {
  bool ok = true;
  std::string where;  // block coordinates (i, s, u) of the first nonzero composite
  std::string value;
};

template <class T>
ChainResidual chain_residual(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  if (!chain_shape_ok(c, x)) throw std::invalid_argument("chain point does not match the chain space");
  for (std::size_t i = 0; i + 2 < c.terms.size(); ++i)
    for (std::size_t s = 0; s < c.terms[i].size(); ++s)
      for (std::size_t u = 0; u < c.terms[i + 2].size(); ++u) {
        auto r = junction_composite(c, x, i, s, u);
        if (!r.is_zero()) return {false, block_name(i, s, u), to_json(r).dump()};
      }
  return {};
}

template <class T>
ChainPoint<T> build_chain(const ChainSpace<T>& c, ChainPoint<T> x) {
  require_chain_space(c);
  auto r = chain_residual(c, x);
  if (!r.ok) throw std::invalid_argument("f_{i+1}∘f_i ≠ 0 at block " + r.where + ": " + r.value);
  return x;
}

// Flat coordinates of one junction: blocks in (s, t) order, row-major.
template <class T>
std::size_t junction_size(const ChainSpace<T>& c, std::size_t i) {
  std::size_t n = 0;
  for (std::size_t s = 0; s < c.terms[i].size(); ++s)
    for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t)
      n += c.homdim(i, s, t) * c.terms[i + 1][t].mult * c.terms[i][s].mult;
  return n;
}

template <class T>
Vec<T> junction_vec(const ChainPoint<T>& x, std::size_t i) {
  Vec<T> v;
  for (const auto& row : x.blocks[i])
    for (const auto& b : row) v.insert(v.end(), b.data().begin(), b.data().end());
  return v;
}

template <class T>
void set_junction(const ChainSpace<T>& c, ChainPoint<T>& x, std::size_t i, const Vec<T>& v) {
  std::size_t k = 0;
  for (auto& row : x.blocks[i])
    for (auto& b : row)
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t q = 0; q < b.cols(); ++q) b(r, q) = v.at(k++);
  (void)c;
}

// Linear map (junction i coordinates) → (composites into term i+2), with junction i+1 fixed.
template <class T>
Matrix<T> chain_condition_map(const ChainSpace<T>& c, const ChainPoint<T>& x, std::size_t i) {
  std::size_t n = junction_size(c, i);
  std::vector<Matrix<T>> cols;
  ChainPoint<T> probe = x;
  std::size_t rows = 0;
  Matrix<T> out;
  for (std::size_t k = 0; k < n; ++k) {
    set_junction(c, probe, i, unit<T>(n, k, c.field()));
    Vec<T> col;
    for (std::size_t s = 0; s < c.terms[i].size(); ++s)
      for (std::size_t u = 0; u < c.terms[i + 2].size(); ++u) {
        auto r = junction_composite(c, probe, i, s, u);
        col.insert(col.end(), r.data().begin(), r.data().end());
      }
    if (k == 0) {
      rows = col.size();
      out = Matrix<T>(rows, n, c.field());
    }
    for (std::size_t r = 0; r < rows; ++r) out(r, k) = col[r];
  }
  return n == 0 ? Matrix<T>(0, 0, c.field()) : out;
}

// Random point: the last junction is arbitrary, earlier ones are random elements of the
// kernel of the chain condition with the junction after them. Blocks flagged in `zeroed`
// (indexed like the blocks, flattened per junction) are kept at zero.
template <class T>
ChainPoint<T> random_chain_point(const ChainSpace<T>& c, std::mt19937_64& rng,
                                 const std::vector<std::vector<bool>>& zeroed = {}) {
  auto x = zero_chain(c);
  for (std::size_t i = c.junctions(); i-- > 0;) {
    std::size_t n = junction_size(c, i);
    // Coordinates forced to zero.
    std::vector<bool> fixed(n, false);
    if (i < zeroed.size()) {
      std::size_t k = 0, b = 0;
      for (std::size_t s = 0; s < c.terms[i].size(); ++s)
        for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t, ++b) {
          std::size_t sz = c.homdim(i, s, t) * c.terms[i + 1][t].mult * c.terms[i][s].mult;
          if (b < zeroed[i].size() && zeroed[i][b]) std::fill(fixed.begin() + k, fixed.begin() + k + sz, true);
          k += sz;
        }
    }
    Vec<T> v(n, Scalar<T>::from_int(0, c.field()));
    if (n == 0) continue;
    Matrix<T> cond = i + 1 == c.junctions() ? Matrix<T>(0, n, c.field()) : chain_condition_map(c, x, i);
    std::size_t nf = static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), true));
    Matrix<T> sys(cond.rows() + nf, n, c.field());
    sys.set_block(0, 0, cond);
    for (std::size_t j = 0, r = cond.rows(); j < n; ++j)
      if (fixed[j]) sys(r++, j) = Scalar<T>::from_int(1, c.field());
    auto k = kernel_rows(sys);
    for (std::size_t r = 0; r < k.rows(); ++r) {
      T coef = random_element<T>(rng, c.field());
      for (std::size_t j = 0; j < n; ++j) v[j] += coef * k(r, j);
    }
    set_junction(c, x, i, v);
  }
  return x;
}

// Random point with roughly a third of the blocks forced to zero.
template <class T>
ChainPoint<T> random_degenerate_point(const ChainSpace<T>& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<std::vector<bool>> zeroed(c.junctions());
  for (std::size_t i = 0; i < c.junctions(); ++i)
    for (std::size_t b = 0; b < c.terms[i].size() * c.terms[i + 1].size(); ++b) zeroed[i].push_back(coin(rng) == 0);
  return random_chain_point(c, rng, zeroed);
}

// E1⊗L1 → (F1⊗M1)⊕(F2⊗M2) → G1⊗N1.
template <class T>
ChainSpace<T> complex3_setting(const CompositionContext<T>& ctx, std::size_t e1, std::size_t f1, std::size_t f2,
                               std::size_t g1, std::size_t l1, std::size_t m1, std::size_t m2, std::size_t n1) {
  ChainSpace<T> c{ctx, {{{e1, l1, "L1"}}, {{f1, m1, "M1"}, {f2, m2, "M2"}}, {{g1, n1, "N1"}}}};
  require_chain_space(c);
  return c;
}

template <class T>
struct MorphismSetting {
  ChainSpace<T> space;
  ContextStats stats;
};

// (E1⊗M1)⊕(E2⊗M2) → F1⊗N1.
template <class T>
MorphismSetting<T> morphism_setting(const CompositionContext<T>& ctx, std::size_t e1, std::size_t e2,
                                    std::size_t f1, std::size_t m1, std::size_t m2, std::size_t n1) {
  for (auto [x, y] : {std::pair{e2, e1}, std::pair{f1, e1}, std::pair{f1, e2}})
    if (!ctx.defined(x, y) || ctx.dim(x, y) != 0)
      throw std::invalid_argument("morphism setting needs Hom(" + ctx.name(x) + "," + ctx.name(y) + ") = 0");
  MorphismSetting<T> s{ChainSpace<T>{ctx, {{{e1, m1, "M1"}, {e2, m2, "M2"}}, {{f1, n1, "N1"}}}},
                       context_stats(ctx, e1, e2, f1)};
  require_chain_space(s.space);
  return s;
}

// Same chain read in the dual context, arrows reversed: F1⊗N1* → (E2⊗M2*)⊕(E1⊗M1*).
template <class T>
std::pair<ChainSpace<T>, ChainPoint<T>> dual_morphism(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  if (c.terms.size() != 2 || c.terms[0].size() != 2 || c.terms[1].size() != 1)
    throw std::invalid_argument("dual_morphism expects a two-source morphism");
  const auto& src = c.terms[0];
  const auto& tgt = c.terms[1][0];
  ChainSpace<T> d{dual_context(c.ctx),
                  {{{tgt.object, tgt.mult, tgt.label + "*"}},
                   {{src[1].object, src[1].mult, src[1].label + "*"}, {src[0].object, src[0].mult, src[0].label + "*"}}}};
  auto y = zero_chain(d);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& b = x.blocks[0][s][0];
    std::size_t h = c.homdim(0, s, 0), ds = src[s].mult, dt = tgt.mult;
    auto& out = y.blocks[0][0][1 - s];  // (h·d_s) × d_t
    for (std::size_t a = 0; a < h; ++a)
      for (std::size_t r = 0; r < dt; ++r)
        for (std::size_t q = 0; q < ds; ++q) out(a * ds + q, r) = b(a * dt + r, q);
  }
  return {d, y};
}

// Hom(X, E_i) ⊗ M_i → Hom(X, E_{i+1}) ⊗ M_{i+1}, column offset_s + a*d_s + x, row offset_t + c*d_t + z.
template <class T>
Matrix<T> hom_junction_matrix(const ChainSpace<T>& c, const ChainPoint<T>& x, std::size_t probe, std::size_t i) {
  const auto& ctx = c.ctx;
  auto width = [&](const Term& t) {
    std::size_t w = 0;
    for (const auto& s : t) w += ctx.dim(probe, s.object) * s.mult;
    return w;
  };
  Matrix<T> m(width(c.terms[i + 1]), width(c.terms[i]), c.field());
  std::size_t col0 = 0;
  for (std::size_t s = 0; s < c.terms[i].size(); ++s) {
    const auto& S = c.terms[i][s];
    std::size_t hxs = ctx.dim(probe, S.object), row0 = 0;
    for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
      const auto& U = c.terms[i + 1][t];
      std::size_t hxt = ctx.dim(probe, U.object), hst = ctx.dim(S.object, U.object);
      if (hxs && hxt && hst) {
        const auto& comp = ctx.comp(probe, S.object, U.object);
        const auto& b = x.blocks[i][s][t];
        for (std::size_t a = 0; a < hxs; ++a)
          for (std::size_t al = 0; al < hst; ++al)
            for (std::size_t cc = 0; cc < hxt; ++cc) {
              T k = comp(cc, a * hst + al);
              if (Scalar<T>::is_zero(k)) continue;
              for (std::size_t z = 0; z < U.mult; ++z)
                for (std::size_t q = 0; q < S.mult; ++q)
                  m(row0 + cc * U.mult + z, col0 + a * S.mult + q) += k * b(al * U.mult + z, q);
            }
      }
      row0 += hxt * U.mult;
    }
    col0 += hxs * S.mult;
  }
  return m;
}

template <class T>
bool hom_complex_defined(const ChainSpace<T>& c, std::size_t probe) {
  for (std::size_t i = 0; i < c.terms.size(); ++i)
    for (const auto& s : c.terms[i]) {
      if (!c.ctx.defined(probe, s.object)) return false;
      if (i + 1 < c.terms.size())
        for (const auto& t : c.terms[i + 1])
          if (c.ctx.dim(probe, s.object) && c.ctx.dim(probe, t.object) && c.ctx.dim(s.object, t.object) &&
              !c.ctx.has_comp(probe, s.object, t.object))
            return false;
    }
  return true;
}

// Homology dimensions of Hom(X, chain) at every term.
template <class T>
std::vector<std::size_t> hom_homology(const ChainSpace<T>& c, const ChainPoint<T>& x, std::size_t probe) {
  std::size_t n = c.terms.size();
  std::vector<std::size_t> width(n, 0), rk(c.junctions(), 0), out(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& s : c.terms[i]) width[i] += c.ctx.dim(probe, s.object) * s.mult;
  for (std::size_t i = 0; i < c.junctions(); ++i) rk[i] = rank(hom_junction_matrix(c, x, probe, i));
  for (std::size_t i = 0; i < n; ++i) out[i] = width[i] - (i < c.junctions() ? rk[i] : 0) - (i ? rk[i - 1] : 0);
  return out;
}

struct HomologyCheck {
  std::string probe;
  std::vector<std::size_t> before, after;
  bool ok = false;
};

template <class T>
struct ChainMutation {
  ChainSpace<T> space;
  ChainPoint<T> point;
  std::size_t kernel = 0;  // object index of the adjoined kernel
  bool new_front = false;  // a new term was prepended
  std::vector<HomologyCheck> homology;
  bool chain_ok = false;
  bool ok() const {
    return chain_ok && std::all_of(homology.begin(), homology.end(), [](const auto& h) { return h.ok; });
  }
};

// Adjoins K = ker(Γ⊗Hom(Γ,G) → G) for term i0 = [Γ⊗M, G⊗M_G] and rewrites
// E → Γ⊗M ⊕ G⊗M_G → F  as  E ⊕ K⊗M_G → Γ⊗P → F  with P = Hom(Γ,G)⊗M_G ⊕ M.
// Supported when i0 is the first term or term 0 has a single summand and i0 = 1.
template <class T>
ChainMutation<T> mutate_chain_left(const ChainSpace<T>& c, const ChainPoint<T>& x, std::size_t i0,
                                   const std::string& kernel_name) {
  require_chain_space(c);
  if (!chain_residual(c, x).ok) throw std::invalid_argument("mutate_chain_left: input is not a chain");
  if (i0 >= c.terms.size() || c.terms[i0].size() != 2)
    throw std::invalid_argument("mutate_chain_left: term " + std::to_string(i0) + " must have two summands");
  if (i0 > 1 || (i0 == 1 && c.terms[0].size() != 1))
    throw std::invalid_argument("mutate_chain_left: only the first or second term of a chain with a single source "
                                "summand can be mutated");
  const auto& ctx = c.ctx;
  const auto F = c.field();
  std::size_t gamma = c.terms[i0][0].object, g = c.terms[i0][1].object;
  std::size_t m = c.terms[i0][0].mult, mg = c.terms[i0][1].mult, w = ctx.dim(gamma, g);
  if (ctx.dim(gamma, gamma) != 1) throw std::invalid_argument("mutate_chain_left: Γ must be simple");
  if (ctx.find(kernel_name)) throw std::invalid_argument("object name " + kernel_name + " already used");

  std::vector<std::size_t> targets{gamma}, serve;
  for (const auto& t : c.terms)
    for (const auto& s : t)
      if (std::find(targets.begin(), targets.end(), s.object) == targets.end()) targets.push_back(s.object);
  bool has_source = i0 == 1;
  std::size_t e = has_source ? c.terms[0][0].object : 0, l = has_source ? c.terms[0][0].mult : 0;
  if (has_source) serve.push_back(e);
  auto ext = kernel_object(ctx, gamma, g, kernel_name, targets, serve);
  std::size_t k = ext.object(kernel_name);
  if (ext.dim(k, gamma) != w) throw std::invalid_argument("mutate_chain_left: Hom(K,Γ) is not Hom(Γ,G)^*");

  ChainMutation<T> out;
  out.kernel = k;
  out.new_front = !has_source;
  std::string plabel = c.terms[i0][0].label.empty() ? "P" : c.terms[i0][0].label + "'";
  std::size_t P = w * mg + m;
  Term front = has_source ? Term{c.terms[0][0], {k, mg, c.terms[i0][1].label}} : Term{{k, mg, c.terms[i0][1].label}};
  ChainSpace<T> d{ext, {front, {{gamma, P, plabel}}}};
  for (std::size_t i = i0 + 1; i < c.terms.size(); ++i) d.terms.push_back(c.terms[i]);
  auto y = zero_chain(d);

  // Front junction: E → Γ⊗P and K⊗M_G → Γ⊗P.
  if (has_source) {
    const auto& to_g = x.blocks[0][0][1];
    const auto& to_gamma = x.blocks[0][0][0];
    std::size_t hg = ctx.dim(e, g), hgam = ctx.dim(e, gamma);
    const auto& sig = ctx.comp(e, gamma, g);
    auto& b = y.blocks[0][0][0];
    for (std::size_t q = 0; q < l; ++q) {
      for (std::size_t yy = 0; yy < mg; ++yy) {
        Vec<T> v(hg, Scalar<T>::from_int(0, F));
        for (std::size_t dl = 0; dl < hg; ++dl) v[dl] = to_g(dl * mg + yy, q);
        auto lift = solve_linear(sig, v);
        if (!lift) throw std::invalid_argument("evaluation onto Hom(E,G) is not surjective");
        for (std::size_t a = 0; a < hgam; ++a)
          for (std::size_t be = 0; be < w; ++be) b(a * P + be * mg + yy, q) = (*lift)[a * w + be];
      }
      for (std::size_t a = 0; a < hgam; ++a)
        for (std::size_t j = 0; j < m; ++j) b(a * P + w * mg + j, q) = to_gamma(a * m + j, q);
    }
  }
  auto& kb = y.blocks[0][has_source ? 1 : 0][0];
  for (std::size_t be = 0; be < w; ++be)
    for (std::size_t yy = 0; yy < mg; ++yy) kb(be * P + be * mg + yy, yy) = Scalar<T>::from_int(1, F);

  // Γ⊗P → next term: old Γ block on M, G-blocks composed with the evaluation on the H-part.
  if (i0 + 1 < c.terms.size()) {
    std::size_t jn = 1;
    for (std::size_t t = 0; t < c.terms[i0 + 1].size(); ++t) {
      const auto& U = c.terms[i0 + 1][t];
      std::size_t hgt = ctx.dim(gamma, U.object), hGt = ctx.dim(g, U.object);
      const auto& old_gamma = x.blocks[i0][0][t];
      const auto& old_g = x.blocks[i0][1][t];
      auto& b = y.blocks[jn][0][t];
      for (std::size_t al = 0; al < hgt; ++al)
        for (std::size_t z = 0; z < U.mult; ++z)
          for (std::size_t j = 0; j < m; ++j) b(al * U.mult + z, w * mg + j) = old_gamma(al * U.mult + z, j);
      if (hgt && hGt) {
        const auto& comp = ctx.comp(gamma, g, U.object);
        for (std::size_t al = 0; al < hgt; ++al)
          for (std::size_t be = 0; be < w; ++be)
            for (std::size_t dl = 0; dl < hGt; ++dl) {
              T coef = comp(al, be * hGt + dl);
              if (Scalar<T>::is_zero(coef)) continue;
              for (std::size_t z = 0; z < U.mult; ++z)
                for (std::size_t yy = 0; yy < mg; ++yy)
                  b(al * U.mult + z, be * mg + yy) += coef * old_g(dl * U.mult + z, yy);
            }
      }
    }
    for (std::size_t i = i0 + 1; i < c.junctions(); ++i) y.blocks[i - i0 + 1] = x.blocks[i];
  }

  out.chain_ok = chain_residual(d, y).ok;
  std::vector<std::size_t> probes = serve;
  probes.push_back(gamma);
  for (auto p : probes) {
    if (!hom_complex_defined(c, p) || !hom_complex_defined(d, p)) continue;
    HomologyCheck h{ctx.name(p), hom_homology(c, x, p), hom_homology(d, y, p), false};
    // Old term i ↔ new term i - i0 + 1 for i ≥ i0; the new front term must be acyclic when prepended.
    std::vector<std::size_t> aligned(h.after.begin() + (out.new_front ? 1 : 0), h.after.end());
    h.ok = aligned == h.before && (!out.new_front || h.after.front() == 0);
    out.homology.push_back(std::move(h));
  }
  out.space = std::move(d);
  out.point = std::move(y);
  return out;
}

// Infinitesimal action of (⊕ gl(M) , unipotent coordinates) at x; kernel dimension = stabilizer dimension.
template <class T>
Matrix<T> infinitesimal_action(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  const auto F = c.field();
  std::size_t total = 0;
  for (std::size_t i = 0; i < c.junctions(); ++i) total += junction_size(c, i);
  std::vector<ChainPoint<T>> columns;
  auto push = [&](const ChainPoint<T>& v) { columns.push_back(v); };
  // gl(M) for every summand: δf(s→t) = f∘(-X) on sources and X∘f on targets.
  for (std::size_t i = 0; i < c.terms.size(); ++i)
    for (std::size_t j = 0; j < c.terms[i].size(); ++j) {
      std::size_t d = c.terms[i][j].mult;
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t q = 0; q < d; ++q) {
          auto v = zero_chain(c);
          if (i + 1 < c.terms.size())
            for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
              const auto& b = x.blocks[i][j][t];
              auto& o = v.blocks[i][j][t];
              for (std::size_t row = 0; row < b.rows(); ++row) o(row, q) -= b(row, r);
            }
          if (i > 0)
            for (std::size_t s = 0; s < c.terms[i - 1].size(); ++s) {
              const auto& b = x.blocks[i - 1][s][j];
              auto& o = v.blocks[i - 1][s][j];
              std::size_t h = c.homdim(i - 1, s, j);
              for (std::size_t al = 0; al < h; ++al)
                for (std::size_t col = 0; col < b.cols(); ++col) o(al * d + r, col) += b(al * d + q, col);
            }
          push(v);
        }
    }
  for (auto i : c.unipotent_terms()) {
    const auto &first = c.terms[i][0], &second = c.terms[i][1];
    std::size_t h = c.ctx.dim(first.object, second.object);
    for (std::size_t idx = 0; idx < c.unipotent_dim(i); ++idx) {
      Matrix<T> u(h * second.mult, first.mult, F);
      u(idx / first.mult, idx % first.mult) = Scalar<T>::from_int(1, F);
      auto v = zero_chain(c);
      if (i > 0)
        for (std::size_t s = 0; s < c.terms[i - 1].size(); ++s) {
          auto add = compose_blocks(c.ctx, c.terms[i - 1][s].object, first.object, second.object,
                                    x.blocks[i - 1][s][0], u, c.terms[i - 1][s].mult, first.mult, second.mult);
          v.blocks[i - 1][s][1] = v.blocks[i - 1][s][1] + add;
        }
      if (i + 1 < c.terms.size())
        for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
          const auto& U = c.terms[i + 1][t];
          auto sub = compose_blocks(c.ctx, first.object, second.object, U.object, u, x.blocks[i][1][t], first.mult,
                                    second.mult, U.mult);
          v.blocks[i][0][t] = v.blocks[i][0][t] - sub;
        }
      push(v);
    }
  }
  Matrix<T> m(total, columns.size(), F);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    std::size_t r = 0;
    for (std::size_t i = 0; i < c.junctions(); ++i)
      for (const auto& e : junction_vec(columns[k], i)) m(r++, k) = e;
  }
  return m;
}

template <class T>
std::size_t group_dimension(const ChainSpace<T>& c) {
  std::size_t d = 0;
  for (const auto& t : c.terms)
    for (const auto& s : t) d += s.mult * s.mult;
  for (auto i : c.unipotent_terms()) d += c.unipotent_dim(i);
  return d;
}

template <class T>
std::size_t stabilizer_dimension(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  auto m = infinitesimal_action(c, x);
  return m.cols() - rank(m);
}

// Unipotent element: one matrix per term listed in unipotent_terms(), shaped like a block first → second.
template <class T>
using Unipotent = std::map<std::size_t, Matrix<T>>;

// u·x: g_i = [[I,0],[u_i,I]] on each term, f_i ↦ g_{i+1} f_i g_i^{-1}.
template <class T>
ChainPoint<T> act_unipotent(const ChainSpace<T>& c, const Unipotent<T>& us, const ChainPoint<T>& x) {
  auto y = x;
  for (const auto& [i, u] : us) {
    const auto &first = c.terms.at(i).at(0), &second = c.terms.at(i).at(1);
    if (u.rows() != c.ctx.dim(first.object, second.object) * second.mult || u.cols() != first.mult)
      throw std::invalid_argument("unipotent block has the wrong shape at term " + std::to_string(i));
    if (i + 1 < c.terms.size())
      for (std::size_t t = 0; t < c.terms[i + 1].size(); ++t) {
        const auto& U = c.terms[i + 1][t];
        y.blocks[i][0][t] = y.blocks[i][0][t] - compose_blocks(c.ctx, first.object, second.object, U.object, u,
                                                               x.blocks[i][1][t], first.mult, second.mult, U.mult);
      }
  }
  auto z = y;
  for (const auto& [i, u] : us) {
    const auto &first = c.terms.at(i).at(0), &second = c.terms.at(i).at(1);
    if (i > 0)
      for (std::size_t s = 0; s < c.terms[i - 1].size(); ++s)
        z.blocks[i - 1][s][1] =
            z.blocks[i - 1][s][1] + compose_blocks(c.ctx, c.terms[i - 1][s].object, first.object, second.object,
                                                   y.blocks[i - 1][s][0], u, c.terms[i - 1][s].mult, first.mult,
                                                   second.mult);
  }
  return z;
}

// Dictionary for E → (Γ⊗M)⊕G → F with E, G, F of multiplicity one.
template <class T>
Type1Space<T> dictionary_type1(const CompositionContext<T>& ctx, std::size_t e, std::size_t gamma, std::size_t g,
                               std::size_t f, std::size_t m) {
  Type1Space<T> s;
  s.field = ctx.field();
  s.z1 = ctx.dim(e, gamma);
  s.z2 = ctx.dim(e, g);
  s.z3 = ctx.dim(gamma, f);
  s.z4 = ctx.dim(g, f);
  s.h = ctx.dim(gamma, g);
  s.t = ctx.dim(e, f);
  s.m = m;
  s.sigma = ctx.comp(e, gamma, g);
  s.sigma_p = ctx.comp(gamma, g, f);
  s.tau = ctx.comp(e, gamma, f);
  s.tau_p = ctx.comp(e, g, f);
  return s;
}

template <class T>
Type1Point<T> chain_to_type1(const ChainSpace<T>& c, const ChainPoint<T>& x) {
  if (c.terms.size() != 3 || c.terms[0].size() != 1 || c.terms[1].size() != 2 || c.terms[2].size() != 1 ||
      c.terms[0][0].mult != 1 || c.terms[1][1].mult != 1 || c.terms[2][0].mult != 1)
    throw std::invalid_argument("chain_to_type1 expects E → (Γ⊗M)⊕G → F with unit multiplicities off M");
  std::size_t m = c.terms[1][0].mult;
  const auto& b1 = x.blocks[0][0][0];
  Matrix<T> phi1(b1.rows() / std::max<std::size_t>(m, 1), m, c.field());
  for (std::size_t a = 0; a < phi1.rows(); ++a)
    for (std::size_t j = 0; j < m; ++j) phi1(a, j) = b1(a * m + j, 0);
  return {phi1, x.blocks[0][0][1].col(0), x.blocks[1][0][0], x.blocks[1][1][0].col(0)};
}

// Reduction of rational data modulo a prime.
inline CompositionContext<Fp> reduce_context(const CompositionContext<Rational>& ctx, const FieldSpec& f) {
  CompositionContext<Fp> out(f);
  auto red = [&](const Matrix<Rational>& m) {
    Matrix<Fp> r(m.rows(), m.cols(), f);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Scalar<Fp>::from_rational(m(i, j), f);
    return r;
  };
  for (std::size_t x = 0; x < ctx.size(); ++x) out.add_object(ctx.name(x), ctx.is_simple(x));
  for (std::size_t x = 0; x < ctx.size(); ++x)
    for (std::size_t y = 0; y < ctx.size(); ++y)
      if (ctx.defined(x, y)) out.set_hom(x, y, ctx.dim(x, y), ctx.labels(x, y));
  for (std::size_t x = 0; x < ctx.size(); ++x)
    if (ctx.defined(x, x) && ctx.dim(x, x)) {
      Vec<Fp> id;
      for (const auto& v : ctx.identity(x)) id.push_back(Scalar<Fp>::from_rational(v, f));
      out.set_identity(x, id);
    }
  for (const auto& [key, m] : ctx.compositions()) {
    auto [x, y, z] = key;
    out.set_comp(x, y, z, red(m));
  }
  out.vanishing = ctx.vanishing;
  out.axioms = ctx.axioms;
  out.surjective_pairings = ctx.surjective_pairings;
  return out;
}

inline std::pair<ChainSpace<Fp>, ChainPoint<Fp>> reduce_chain(const ChainSpace<Rational>& c,
                                                              const ChainPoint<Rational>& x, const FieldSpec& f) {
  ChainSpace<Fp> d{reduce_context(c.ctx, f), c.terms};
  auto y = zero_chain(d);
  for (std::size_t i = 0; i < x.blocks.size(); ++i)
    for (std::size_t s = 0; s < x.blocks[i].size(); ++s)
      for (std::size_t t = 0; t < x.blocks[i][s].size(); ++t) {
        const auto& b = x.blocks[i][s][t];
        for (std::size_t r = 0; r < b.rows(); ++r)
          for (std::size_t q = 0; q < b.cols(); ++q) y.blocks[i][s][t](r, q) = Scalar<Fp>::from_rational(b(r, q), f);
      }
  return {d, y};
}

// JSON: {"context", "terms":[[{"object","mult","label"}]]} and {"blocks":[{"at":[i,s,t],"matrix"}]}.
template <class T>
Json chain_space_to_json(const ChainSpace<T>& c) {
  Json terms = Json::array();
  for (const auto& t : c.terms) {
    Json jt = Json::array();
    for (const auto& s : t) jt.push_back({{"object", c.ctx.name(s.object)}, {"mult", s.mult}, {"label", s.label}});
    terms.push_back(jt);
  }
  return {{"context", context_to_json(c.ctx)}, {"terms", terms}};
}

template <class T>
ChainSpace<T> chain_space_from_json(const Json& j, const FieldSpec& f) {
  ChainSpace<T> c{context_from_json<T>(require(j, "context", "chain space"), f), {}};
  const auto& terms = require(j, "terms", "chain space");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Term t;
    for (std::size_t s = 0; s < terms[i].size(); ++s) {
      std::string path = "terms[" + std::to_string(i) + "][" + std::to_string(s) + "]";
      const auto& js = terms[i][s];
      auto name = require(js, "object", path).get<std::string>();
      auto obj = c.ctx.find(name);
      if (!obj) throw std::invalid_argument(path + ": unknown object " + name);
      const auto& mult = require(js, "mult", path);
      if (!mult.is_number_unsigned()) throw std::invalid_argument(path + ".mult: expected a natural number");
      t.push_back({*obj, mult.get<std::size_t>(), js.value("label", std::string())});
    }
    c.terms.push_back(t);
  }
  require_chain_space(c);
  return c;
}

template <class T>
Json chain_point_to_json(const ChainPoint<T>& x) {
  Json blocks = Json::array();
  for (std::size_t i = 0; i < x.blocks.size(); ++i)
    for (std::size_t s = 0; s < x.blocks[i].size(); ++s)
      for (std::size_t t = 0; t < x.blocks[i][s].size(); ++t)
        blocks.push_back({{"at", {i, s, t}}, {"matrix", to_json(x.blocks[i][s][t])}});
  return {{"blocks", blocks}};
}

template <class T>
ChainPoint<T> chain_point_from_json(const Json& j, const ChainSpace<T>& c) {
  auto x = zero_chain(c);
  std::vector<std::vector<std::vector<bool>>> seen(x.blocks.size());
  for (std::size_t i = 0; i < x.blocks.size(); ++i) {
    seen[i].resize(x.blocks[i].size());
    for (std::size_t s = 0; s < x.blocks[i].size(); ++s) seen[i][s].assign(x.blocks[i][s].size(), false);
  }
  if (j.is_object() && j.contains("forms")) {
    // {"forms": [{"at": [i,s,t], "entries": [[target copy, source copy, "form"], ...]}]}; unlisted entries are zero
    const auto& forms = j["forms"];
    for (std::size_t k = 0; k < forms.size(); ++k) {
      std::string path = "forms[" + std::to_string(k) + "]";
      const auto& at = require(forms[k], "at", path);
      if (!at.is_array() || at.size() != 3) throw std::invalid_argument(path + ".at: expected [i,s,t]");
      auto i = at[0].get<std::size_t>(), s = at[1].get<std::size_t>(), t = at[2].get<std::size_t>();
      if (i >= x.blocks.size() || s >= x.blocks[i].size() || t >= x.blocks[i][s].size())
        throw std::invalid_argument(path + ": block " + block_name(i, s, t) + " does not exist");
      std::size_t ds = c.terms[i][s].mult, dt = c.terms[i + 1][t].mult;
      for (const auto& e : require(forms[k], "entries", path)) {
        if (!e.is_array() || e.size() != 3 || !e[2].is_string())
          throw std::invalid_argument(path + ": entries are [target, source, \"form\"]");
        auto z = e[0].get<std::size_t>(), src = e[1].get<std::size_t>();
        if (z >= dt || src >= ds) throw std::invalid_argument(path + ": copy index out of range in " + e.dump());
        set_entry_form(x.blocks[i][s][t], dt, z, src,
                       parse_form(c.ctx, c.terms[i][s].object, c.terms[i + 1][t].object, e[2].get<std::string>()));
      }
    }
    return x;
  }
  const auto& blocks = require(j, "blocks", "chain point");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    std::string path = "blocks[" + std::to_string(k) + "]";
    const auto& at = require(blocks[k], "at", path);
    if (!at.is_array() || at.size() != 3) throw std::invalid_argument(path + ".at: expected [i,s,t]");
    auto i = at[0].get<std::size_t>(), s = at[1].get<std::size_t>(), t = at[2].get<std::size_t>();
    if (i >= x.blocks.size() || s >= x.blocks[i].size() || t >= x.blocks[i][s].size())
      throw std::invalid_argument(path + ": block " + block_name(i, s, t) + " does not exist");
    const auto& cur = x.blocks[i][s][t];
    x.blocks[i][s][t] =
        matrix_from_json<T>(require(blocks[k], "matrix", path), c.field(), cur.rows(), cur.cols(), path + ".matrix");
    seen[i][s][t] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    for (std::size_t s = 0; s < seen[i].size(); ++s)
      for (std::size_t t = 0; t < seen[i][s].size(); ++t)
        if (!seen[i][s][t] && x.blocks[i][s][t].rows() * x.blocks[i][s][t].cols() > 0)
          throw std::invalid_argument("chain point: block " + block_name(i, s, t) + " missing");
  return x;
}

}  // namespace cmut
