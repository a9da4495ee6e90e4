#pragma once

#include "cmut/json_io.hpp"
#include "cmut/subspace.hpp"

#include <cctype>
#include <map>
#include <tuple>

namespace cmut {

// Objects with Hom-space bases and composition tensors. comp(x, y, z) is a
// dim Hom(x,z) × (dim Hom(x,y) · dim Hom(y,z)) matrix; column f*dim(y,z)+g holds g∘f.
template <class T>
class CompositionContext {
 public:
  static constexpr std::size_t undefined = static_cast<std::size_t>(-1);

  CompositionContext() = default;
  explicit CompositionContext(FieldSpec f) : field_(f) {}

  const FieldSpec& field() const { return field_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t x) const { return names_.at(x); }
  bool is_simple(std::size_t x) const { return simple_.at(x); }

  std::size_t add_object(const std::string& name, bool simple) {
    if (find(name)) throw std::invalid_argument("duplicate object '" + name + "'");
    names_.push_back(name);
    simple_.push_back(simple);
    for (auto& row : dims_) row.push_back(undefined);
    dims_.emplace_back(names_.size(), undefined);
    for (auto& row : labels_) row.emplace_back();
    labels_.emplace_back(names_.size());
    ids_.emplace_back();
    return names_.size() - 1;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    return std::nullopt;
  }
  std::size_t object(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw std::invalid_argument("unknown object '" + name + "'");
  }

  void set_hom(std::size_t x, std::size_t y, std::size_t dim, std::vector<std::string> labels = {}) {
    dims_.at(x).at(y) = dim;
    if (labels.empty())
      for (std::size_t i = 0; i < dim; ++i) labels.push_back("e" + std::to_string(i));
    if (labels.size() != dim) throw std::invalid_argument("label count differs from Hom dimension");
    labels_[x][y] = std::move(labels);
  }
  bool defined(std::size_t x, std::size_t y) const { return dims_.at(x).at(y) != undefined; }
  std::size_t dim(std::size_t x, std::size_t y) const {
    std::size_t d = dims_.at(x).at(y);
    if (d == undefined)
      throw std::invalid_argument("Hom(" + names_[x] + "," + names_[y] + ") is not determined by the context");
    return d;
  }
  const std::vector<std::string>& labels(std::size_t x, std::size_t y) const { return labels_.at(x).at(y); }

  void set_comp(std::size_t x, std::size_t y, std::size_t z, Matrix<T> m) {
    if (m.rows() != dim(x, z) || m.cols() != dim(x, y) * dim(y, z))
      throw std::invalid_argument("composition tensor for " + triple_name(x, y, z) + " has wrong shape");
    comp_[{x, y, z}] = std::move(m);
  }
  bool has_comp(std::size_t x, std::size_t y, std::size_t z) const {
    if (!defined(x, y) || !defined(y, z) || !defined(x, z)) return false;
    return comp_.count({x, y, z}) || dim(x, y) * dim(y, z) == 0;
  }
  const Matrix<T>& comp(std::size_t x, std::size_t y, std::size_t z) const {
    auto it = comp_.find({x, y, z});
    if (it != comp_.end()) return it->second;
    if (dim(x, y) * dim(y, z) == 0) {
      auto& m = comp_[{x, y, z}];
      m = Matrix<T>(dim(x, z), 0, field_);
      return m;
    }
    throw std::invalid_argument("no composition tensor for " + triple_name(x, y, z));
  }

  void set_identity(std::size_t x, Vec<T> id) {
    if (id.size() != dim(x, x)) throw std::invalid_argument("identity of " + names_[x] + " has wrong length");
    ids_[x] = std::move(id);
  }
  const Vec<T>& identity(std::size_t x) const {
    if (ids_.at(x).size() != dim(x, x) || dim(x, x) == 0)
      throw std::invalid_argument("no identity recorded for " + names_[x]);
    return ids_[x];
  }

  // g∘f for f ∈ Hom(x,y), g ∈ Hom(y,z).
  Vec<T> compose(std::size_t x, std::size_t y, std::size_t z, const Vec<T>& f, const Vec<T>& g) const {
    const auto& c = comp(x, y, z);
    std::size_t dg = dim(y, z);
    Vec<T> out(dim(x, z), zero());
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (Scalar<T>::is_zero(f[a])) continue;
      for (std::size_t b = 0; b < dg; ++b) {
        if (Scalar<T>::is_zero(g[b])) continue;
        T s = f[a] * g[b];
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += s * c(k, a * dg + b);
      }
    }
    return out;
  }
  // The linear map Hom(x,y) → Hom(x,z), f ↦ g∘f.
  Matrix<T> post(std::size_t x, std::size_t y, std::size_t z, const Vec<T>& g) const {
    const auto& c = comp(x, y, z);
    std::size_t dy = dim(x, y), dg = dim(y, z);
    Matrix<T> m(dim(x, z), dy, field_);
    for (std::size_t a = 0; a < dy; ++a)
      for (std::size_t b = 0; b < dg; ++b) {
        if (Scalar<T>::is_zero(g[b])) continue;
        for (std::size_t k = 0; k < m.rows(); ++k) m(k, a) += g[b] * c(k, a * dg + b);
      }
    return m;
  }
  // The linear map Hom(y,z) → Hom(x,z), g ↦ g∘f.
  Matrix<T> pre(std::size_t x, std::size_t y, std::size_t z, const Vec<T>& f) const {
    const auto& c = comp(x, y, z);
    std::size_t dg = dim(y, z);
    Matrix<T> m(dim(x, z), dg, field_);
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (Scalar<T>::is_zero(f[a])) continue;
      for (std::size_t b = 0; b < dg; ++b)
        for (std::size_t k = 0; k < m.rows(); ++k) m(k, b) += f[a] * c(k, a * dg + b);
    }
    return m;
  }

  T zero() const { return Scalar<T>::from_int(0, field_); }
  T one() const { return Scalar<T>::from_int(1, field_); }
  Vec<T> basis_vector(std::size_t x, std::size_t y, std::size_t i) const {
    Vec<T> v(dim(x, y), zero());
    v.at(i) = one();
    return v;
  }

  std::string triple_name(std::size_t x, std::size_t y, std::size_t z) const {
    return "(" + names_.at(x) + "," + names_.at(y) + "," + names_.at(z) + ")";
  }

  // Declared Hom(x,y) = 0 requirements and free-form axioms (e.g. Ext vanishings).
  std::vector<std::pair<std::size_t, std::size_t>> vanishing;
  std::vector<std::string> axioms;
  // Pairs (x, gamma, g) whose evaluation Hom(x,gamma)⊗Hom(gamma,g) → Hom(x,g) must be onto.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> surjective_pairings;

  const std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Matrix<T>>& compositions() const {
    return comp_;
  }

 private:
  FieldSpec field_{};
  std::vector<std::string> names_;
  std::vector<bool> simple_;
  std::vector<std::vector<std::size_t>> dims_;
  std::vector<std::vector<std::vector<std::string>>> labels_;
  std::vector<Vec<T>> ids_;
  mutable std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Matrix<T>> comp_;
};

// Exponent vectors of degree d in n+1 variables, lexicographically decreasing (x0^d first).
inline std::vector<std::vector<int>> monomials(std::size_t n, int d) {
  std::vector<std::vector<int>> out;
  if (d < 0) return out;
  std::vector<int> e(n + 1, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == n) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, d);
  return out;
}

inline std::string monomial_str(const std::vector<int>& e) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += "x" + std::to_string(i);
    if (e[i] > 1) s += "^" + std::to_string(e[i]);
  }
  return s.empty() ? "1" : s;
}

inline std::string twist_name(int d) { return "O(" + std::to_string(d) + ")"; }

// Line bundles O(d) on P^n; Hom(O(d),O(e)) = forms of degree e-d, composition = product.
template <class T>
CompositionContext<T> projective_context(std::size_t n, std::vector<int> twists, const FieldSpec& field) {
  if (n < 1) throw std::invalid_argument("projective_context needs n >= 1");
  std::sort(twists.begin(), twists.end());
  twists.erase(std::unique(twists.begin(), twists.end()), twists.end());
  CompositionContext<T> ctx(field);
  for (int d : twists) ctx.add_object(twist_name(d), true);
  std::map<int, std::vector<std::vector<int>>> mons;
  for (int a : twists)
    for (int b : twists) mons.emplace(b - a, monomials(n, b - a));
  for (std::size_t x = 0; x < twists.size(); ++x)
    for (std::size_t y = 0; y < twists.size(); ++y) {
      const auto& m = mons[twists[y] - twists[x]];
      std::vector<std::string> labels;
      for (const auto& e : m) labels.push_back(monomial_str(e));
      ctx.set_hom(x, y, m.size(), labels);
      if (twists[y] < twists[x]) ctx.vanishing.emplace_back(x, y);
    }
  for (std::size_t x = 0; x < twists.size(); ++x) ctx.set_identity(x, Vec<T>{ctx.one()});
  for (std::size_t x = 0; x < twists.size(); ++x)
    for (std::size_t y = 0; y < twists.size(); ++y)
      for (std::size_t z = 0; z < twists.size(); ++z) {
        const auto& mxy = mons[twists[y] - twists[x]];
        const auto& myz = mons[twists[z] - twists[y]];
        const auto& mxz = mons[twists[z] - twists[x]];
        if (mxy.empty() || myz.empty()) continue;
        std::map<std::vector<int>, std::size_t> index;
        for (std::size_t k = 0; k < mxz.size(); ++k) index[mxz[k]] = k;
        Matrix<T> c(mxz.size(), mxy.size() * myz.size(), field);
        for (std::size_t a = 0; a < mxy.size(); ++a)
          for (std::size_t b = 0; b < myz.size(); ++b) {
            std::vector<int> e(n + 1);
            for (std::size_t i = 0; i <= n; ++i) e[i] = mxy[a][i] + myz[b][i];
            c(index.at(e), a * myz.size() + b) = c.one();
          }
        ctx.set_comp(x, y, z, std::move(c));
      }
  // H^1(O(k)) vanishes on P^n for n >= 2, and on P^1 for k >= -1.
  for (int a : twists)
    for (int b : twists)
      if (n >= 2 || b - a >= -1) ctx.axioms.push_back("Ext1(" + twist_name(a) + "," + twist_name(b) + ")=0");
  return ctx;
}

// Coordinates of a form given as a sum of monomials, e.g. "x2^2 - x1*x2 + 3*x0*x1".
template <class T>
Vec<T> parse_form(const CompositionContext<T>& ctx, std::size_t x, std::size_t y, const std::string& text) {
  const auto& labels = ctx.labels(x, y);
  Vec<T> v(labels.size(), ctx.zero());
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty() || s == "0") return v;
  std::size_t i = 0;
  while (i < s.size()) {
    std::int64_t sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != '+' && s[j] != '-') ++j;
    std::string term = s.substr(i, j - i);
    i = j;
    if (term.empty()) throw std::invalid_argument("bad form '" + text + "'");
    std::int64_t coef = 1;
    std::size_t k = 0;
    while (k < term.size() && std::isdigit(static_cast<unsigned char>(term[k]))) ++k;
    if (k > 0) {
      coef = std::stoll(term.substr(0, k));
      term = term.substr(k);
      if (!term.empty() && term[0] == '*') term = term.substr(1);
    }
    // Normalize the monomial so that it matches the label spelling.
    std::map<int, int> exps;
    std::size_t p = 0;
    while (p < term.size()) {
      if (term[p] != 'x') throw std::invalid_argument("bad factor in form '" + text + "'");
      std::size_t q = p + 1;
      while (q < term.size() && std::isdigit(static_cast<unsigned char>(term[q]))) ++q;
      if (q == p + 1) throw std::invalid_argument("bad variable in form '" + text + "'");
      int var = std::stoi(term.substr(p + 1, q - p - 1)), e = 1;
      if (q < term.size() && term[q] == '^') {
        std::size_t r = q + 1;
        while (r < term.size() && std::isdigit(static_cast<unsigned char>(term[r]))) ++r;
        e = std::stoi(term.substr(q + 1, r - q - 1));
        q = r;
      }
      exps[var] += e;
      p = q;
      if (p < term.size() && term[p] == '*') ++p;
    }
    std::string label;
    for (auto [var, e] : exps) {
      if (!label.empty()) label += "*";
      label += "x" + std::to_string(var) + (e > 1 ? "^" + std::to_string(e) : "");
    }
    if (label.empty()) label = "1";
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
      throw std::invalid_argument("monomial '" + label + "' is not a basis element of Hom(" + ctx.name(x) + "," +
                                  ctx.name(y) + ")");
    v[it - labels.begin()] += Scalar<T>::from_int(sign * coef, ctx.field());
  }
  return v;
}

struct ContextReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t checked_triples = 0;
  void fail(std::string s) {
    ok = false;
    violations.push_back(std::move(s));
  }
};

// (h∘g)∘f = h∘(g∘f) on basis elements for every quadruple with all data present.
template <class T>
void check_associativity(const CompositionContext<T>& ctx, ContextReport& rep,
                         const std::vector<std::size_t>& focus = {}) {
  std::size_t n = ctx.size();
  auto involved = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    if (focus.empty()) return true;
    for (auto o : focus)
      if (a == o || b == o || c == o || d == o) return true;
    return false;
  };
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t w = 0; w < n; ++w) {
          if (!involved(x, y, z, w)) continue;
          if (!ctx.has_comp(x, y, z) || !ctx.has_comp(y, z, w) || !ctx.has_comp(x, z, w) ||
              !ctx.has_comp(x, y, w))
            continue;
          std::size_t dxy = ctx.dim(x, y), dyz = ctx.dim(y, z), dzw = ctx.dim(z, w);
          if (dxy * dyz * dzw == 0) continue;
          ++rep.checked_triples;
          bool bad = false;
          for (std::size_t a = 0; a < dxy && !bad; ++a) {
            auto f = ctx.basis_vector(x, y, a);
            for (std::size_t b = 0; b < dyz && !bad; ++b) {
              auto g = ctx.basis_vector(y, z, b);
              auto gf = ctx.compose(x, y, z, f, g);
              for (std::size_t c = 0; c < dzw && !bad; ++c) {
                auto h = ctx.basis_vector(z, w, c);
                if (ctx.compose(x, z, w, gf, h) != ctx.compose(x, y, w, f, ctx.compose(y, z, w, g, h))) {
                  rep.fail("associativity fails on " + ctx.triple_name(x, y, z) + "->" + ctx.name(w) + " at basis (" +
                           std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")");
                  bad = true;
                }
              }
            }
          }
        }
}

template <class T>
ContextReport validate_context(const CompositionContext<T>& ctx) {
  ContextReport rep;
  std::size_t n = ctx.size();
  for (std::size_t x = 0; x < n; ++x) {
    if (!ctx.defined(x, x)) continue;
    if (ctx.is_simple(x) && ctx.dim(x, x) != 1)
      rep.fail(ctx.name(x) + " is flagged simple but dim Hom(" + ctx.name(x) + "," + ctx.name(x) +
               ")=" + std::to_string(ctx.dim(x, x)));
  }
  for (auto [x, y] : ctx.vanishing)
    if (ctx.defined(x, y) && ctx.dim(x, y) != 0)
      rep.fail("declared Hom(" + ctx.name(x) + "," + ctx.name(y) + ")=0 but its dimension is " +
               std::to_string(ctx.dim(x, y)));
  for (auto [x, g, h] : ctx.surjective_pairings) {
    auto r = rank(ctx.comp(x, g, h));
    if (r != ctx.dim(x, h))
      rep.fail("evaluation Hom(" + ctx.name(x) + "," + ctx.name(g) + ")⊗Hom(" + ctx.name(g) + "," + ctx.name(h) +
               ") -> Hom(" + ctx.name(x) + "," + ctx.name(h) + ") has rank " + std::to_string(r) + " < " +
               std::to_string(ctx.dim(x, h)));
  }
  // Identity laws.
  for (std::size_t x = 0; x < n; ++x) {
    if (!ctx.defined(x, x) || ctx.dim(x, x) == 0) continue;
    const auto& id = ctx.identity(x);
    for (std::size_t y = 0; y < n; ++y) {
      if (ctx.has_comp(x, x, y) && ctx.pre(x, x, y, id) != Matrix<T>::identity(ctx.dim(x, y), ctx.field()))
        rep.fail("identity of " + ctx.name(x) + " is not a left unit on Hom(" + ctx.name(x) + "," + ctx.name(y) + ")");
      if (ctx.has_comp(y, x, x) && ctx.post(y, x, x, id) != Matrix<T>::identity(ctx.dim(y, x), ctx.field()))
        rep.fail("identity of " + ctx.name(x) + " is not a right unit on Hom(" + ctx.name(y) + "," + ctx.name(x) +
                 ")");
    }
  }
  check_associativity(ctx, rep);
  return rep;
}

// Same objects with every arrow reversed: Hom'(x,y) = Hom(y,x).
template <class T>
CompositionContext<T> dual_context(const CompositionContext<T>& ctx) {
  CompositionContext<T> d(ctx.field());
  std::size_t n = ctx.size();
  for (std::size_t x = 0; x < n; ++x) d.add_object(ctx.name(x), ctx.is_simple(x));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (ctx.defined(y, x)) d.set_hom(x, y, ctx.dim(y, x), ctx.labels(y, x));
  for (std::size_t x = 0; x < n; ++x)
    if (ctx.defined(x, x) && ctx.dim(x, x) > 0) d.set_identity(x, ctx.identity(x));
  for (const auto& [key, m] : ctx.compositions()) {
    auto [z, y, x] = key;  // original comp(z,y,x): Hom(z,y)⊗Hom(y,x) → Hom(z,x)
    std::size_t dzy = ctx.dim(z, y), dyx = ctx.dim(y, x);
    if (dzy * dyx == 0) continue;
    // dual comp(x,y,z): f' ∈ Hom'(x,y)=Hom(y,x), g' ∈ Hom'(y,z)=Hom(z,y), g'∘'f' = f∘g.
    Matrix<T> c(m.rows(), m.cols(), ctx.field());
    for (std::size_t f = 0; f < dyx; ++f)
      for (std::size_t g = 0; g < dzy; ++g)
        for (std::size_t k = 0; k < m.rows(); ++k) c(k, f * dzy + g) = m(k, g * dyx + f);
    d.set_comp(x, y, z, std::move(c));
  }
  for (auto [x, y] : ctx.vanishing) d.vanishing.emplace_back(y, x);
  for (auto [x, g, h] : ctx.surjective_pairings) d.surjective_pairings.emplace_back(h, g, x);
  d.axioms = ctx.axioms;
  return d;
}

// Adjoins K = ker(gamma ⊗ Hom(gamma,g) → g). Hom(x,K) comes from left exactness;
// Hom(K,y) = coker(Hom(g,y) → Hom(gamma,y) ⊗ Hom(gamma,g)*) for each y in ext_targets,
// where the caller declares Ext^1(g,y) = 0. Hom(K,K) is the line of the identity.
template <class T>
class KernelBuilder {
 public:
  KernelBuilder(const CompositionContext<T>& base, std::size_t gamma, std::size_t g, std::string name,
                std::vector<std::size_t> ext_targets, std::vector<std::size_t> serve)
      : ctx_(base), gamma_(gamma), g_(g), name_(std::move(name)), targets_(std::move(ext_targets)),
        serve_(std::move(serve)) {}

  CompositionContext<T> build() {
    std::size_t n = ctx_.size();
    w_ = ctx_.dim(gamma_, g_);
    for (auto x : serve_) {
      auto r = rank(ctx_.comp(x, gamma_, g_));
      if (r != ctx_.dim(x, g_))
        throw std::invalid_argument("evaluation Hom(" + ctx_.name(x) + "," + ctx_.name(gamma_) + ")⊗Hom(" +
                                    ctx_.name(gamma_) + "," + ctx_.name(g_) + ") is not onto Hom(" + ctx_.name(x) +
                                    "," + ctx_.name(g_) + ")");
    }
    k_ = ctx_.add_object(name_, true);
    ctx_.set_hom(k_, k_, 1, {"id"});
    ctx_.set_identity(k_, Vec<T>{ctx_.one()});
    for (std::size_t x = 0; x < n; ++x) {
      if (!ctx_.defined(x, gamma_) || !ctx_.defined(x, g_)) continue;
      in_[x] = kernel_rows(ctx_.comp(x, gamma_, g_));
      std::vector<std::string> labels;
      for (std::size_t r = 0; r < in_[x].rows(); ++r) labels.push_back(vector_label(x, in_[x].row(r)));
      ctx_.set_hom(x, k_, in_[x].rows(), labels);
    }
    for (auto y : targets_) {
      if (!ctx_.defined(gamma_, y) || !ctx_.defined(g_, y)) continue;
      // Image of v ∈ Hom(g,y): Σ_β (v∘e_β) ⊗ e*_β in Hom(gamma,y)⊗W*, index c*w+β.
      std::size_t dy = ctx_.dim(gamma_, y);
      Matrix<T> img(ctx_.dim(g_, y), dy * w_, ctx_.field());
      for (std::size_t v = 0; v < ctx_.dim(g_, y); ++v)
        for (std::size_t b = 0; b < w_; ++b) {
          auto c = ctx_.compose(gamma_, g_, y, ctx_.basis_vector(gamma_, g_, b), ctx_.basis_vector(g_, y, v));
          for (std::size_t i = 0; i < dy; ++i) img(v, i * w_ + b) = c[i];
        }
      auto sub = Subspace<T>::span(img);
      out_[y] = {sub, sub.free_coordinates()};
      std::vector<std::string> labels;
      for (auto c : out_[y].second)
        labels.push_back(ctx_.labels(gamma_, y)[c / w_] + "⊗" + ctx_.labels(gamma_, g_)[c % w_] + "*");
      ctx_.set_hom(k_, y, out_[y].second.size(), labels);
    }
    ctx_.axioms.push_back(name_ + "=ker(" + ctx_.name(gamma_) + "⊗Hom(" + ctx_.name(gamma_) + "," + ctx_.name(g_) +
                          ")->" + ctx_.name(g_) + ")");
    fill_compositions();
    ContextReport rep;
    check_associativity(ctx_, rep, {k_});
    if (!rep.ok) throw std::logic_error("kernel object breaks associativity: " + rep.violations.front());
    return std::move(ctx_);
  }

 private:
  std::string vector_label(std::size_t x, const Vec<T>& v) const {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (Scalar<T>::is_zero(v[i])) continue;
      if (!s.empty()) s += "+";
      s += Scalar<T>::str(v[i]) + "*" + ctx_.labels(x, gamma_)[i / w_] + "⊗" + ctx_.labels(gamma_, g_)[i % w_];
    }
    return s.empty() ? "0" : s;
  }

  // Coordinates of a vector of Hom(x,gamma)⊗W lying in the kernel, in the echelon basis.
  Vec<T> kernel_coords(std::size_t x, const Vec<T>& v) const {
    const auto& b = in_.at(x);
    auto piv = rref(b).pivots;
    Vec<T> c(b.rows(), ctx_.zero());
    for (std::size_t r = 0; r < b.rows(); ++r) c[r] = v[piv[r]];
    return c;
  }
  // Class of a vector of Hom(gamma,y)⊗W* in the cokernel basis.
  Vec<T> coker_coords(std::size_t y, Vec<T> v) const {
    const auto& [sub, free] = out_.at(y);
    for (std::size_t r = 0; r < sub.dim(); ++r) {
      T f = v[sub.pivots()[r]];
      if (Scalar<T>::is_zero(f)) continue;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] -= f * sub.basis()(r, j);
    }
    Vec<T> c;
    for (auto j : free) c.push_back(v[j]);
    return c;
  }
  bool has_in(std::size_t x) const { return in_.count(x) > 0; }
  bool has_out(std::size_t y) const { return out_.count(y) > 0; }

  void fill_compositions() {
    std::size_t n = k_;  // old objects are 0..k_-1
    auto F = ctx_.field();
    // (x, y, K): g ∈ Hom(y,K) ⊂ Hom(y,gamma)⊗W, f ∈ Hom(x,y).
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (!has_in(x) || !has_in(y) || !ctx_.defined(x, y) || !ctx_.has_comp(x, y, gamma_)) continue;
        std::size_t dxy = ctx_.dim(x, y), dyk = ctx_.dim(y, k_), dxg = ctx_.dim(x, gamma_);
        Matrix<T> c(ctx_.dim(x, k_), dxy * dyk, F);
        for (std::size_t a = 0; a < dxy; ++a) {
          auto pre = ctx_.pre(x, y, gamma_, ctx_.basis_vector(x, y, a));  // Hom(y,gamma) → Hom(x,gamma)
          for (std::size_t b = 0; b < dyk; ++b) {
            auto g = in_[y].row(b);
            Vec<T> v(dxg * w_, ctx_.zero());
            for (std::size_t u = 0; u < ctx_.dim(y, gamma_); ++u)
              for (std::size_t be = 0; be < w_; ++be) {
                T coef = g[u * w_ + be];
                if (Scalar<T>::is_zero(coef)) continue;
                for (std::size_t i = 0; i < dxg; ++i) v[i * w_ + be] += coef * pre(i, u);
              }
            auto cc = kernel_coords(x, v);
            for (std::size_t k = 0; k < cc.size(); ++k) c(k, a * dyk + b) = cc[k];
          }
        }
        ctx_.set_comp(x, y, k_, std::move(c));
      }
    // (x, K, y): Σ f[α,β] c[γ,β] (y_γ ∘ x_α).
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (!has_in(x) || !has_out(y) || !ctx_.defined(x, y)) continue;
        std::size_t dxk = ctx_.dim(x, k_), dky = ctx_.dim(k_, y), dxg = ctx_.dim(x, gamma_),
                    dgy = ctx_.dim(gamma_, y);
        Matrix<T> c(ctx_.dim(x, y), dxk * dky, F);
        for (std::size_t a = 0; a < dxk; ++a) {
          auto f = in_[x].row(a);
          for (std::size_t b = 0; b < dky; ++b) {
            std::size_t lift = out_[y].second[b];  // standard vector at index γ*w+β
            std::size_t gam = lift / w_, be = lift % w_;
            Vec<T> xs(dxg, ctx_.zero());
            for (std::size_t i = 0; i < dxg; ++i) xs[i] = f[i * w_ + be];
            auto r = ctx_.compose(x, gamma_, y, xs, ctx_.basis_vector(gamma_, y, gam));
            (void)dgy;
            for (std::size_t k = 0; k < r.size(); ++k) c(k, a * dky + b) = r[k];
          }
        }
        ctx_.set_comp(x, k_, y, std::move(c));
      }
    // (K, x, y): lift, post-compose the Hom(gamma,·) factor, project.
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (!has_out(x) || !has_out(y) || !ctx_.defined(x, y) || !ctx_.has_comp(gamma_, x, y)) continue;
        std::size_t dkx = ctx_.dim(k_, x), dxy = ctx_.dim(x, y), dgy = ctx_.dim(gamma_, y);
        Matrix<T> c(ctx_.dim(k_, y), dkx * dxy, F);
        for (std::size_t a = 0; a < dkx; ++a) {
          std::size_t lift = out_[x].second[a];
          std::size_t gam = lift / w_, be = lift % w_;
          for (std::size_t b = 0; b < dxy; ++b) {
            auto r = ctx_.compose(gamma_, x, y, ctx_.basis_vector(gamma_, x, gam), ctx_.basis_vector(x, y, b));
            Vec<T> v(dgy * w_, ctx_.zero());
            for (std::size_t i = 0; i < dgy; ++i) v[i * w_ + be] = r[i];
            auto cc = coker_coords(y, v);
            for (std::size_t k = 0; k < cc.size(); ++k) c(k, a * dxy + b) = cc[k];
          }
        }
        ctx_.set_comp(k_, x, y, std::move(c));
      }
    // Triples with a repeated K use the identity; (K, x, K) must vanish.
    for (std::size_t x = 0; x <= n; ++x) {
      if (x < n && (!has_in(x) && !has_out(x))) continue;
      if (x == n || has_in(x)) {  // (x, K, K) and (K, K, K)
        std::size_t d = ctx_.dim(x, k_);
        ctx_.set_comp(x, k_, k_, Matrix<T>::identity(d, F));
      }
      if (x < n && has_out(x)) {  // (K, K, x)
        std::size_t d = ctx_.dim(k_, x);
        ctx_.set_comp(k_, k_, x, Matrix<T>::identity(d, F));
      }
      if (x < n && has_in(x) && has_out(x)) {
        if (ctx_.dim(k_, x) * ctx_.dim(x, k_) != 0)
          throw std::logic_error("dimension bookkeeping: Hom(" + name_ + "," + ctx_.name(x) + ") and Hom(" +
                                 ctx_.name(x) + "," + name_ + ") are both nonzero, triple " +
                                 ctx_.triple_name(k_, x, k_) + " cannot be determined");
      }
    }
  }

  CompositionContext<T> ctx_;
  std::size_t gamma_, g_, k_ = 0, w_ = 0;
  std::string name_;
  std::vector<std::size_t> targets_, serve_;
  std::map<std::size_t, Matrix<T>> in_;
  std::map<std::size_t, std::pair<Subspace<T>, std::vector<std::size_t>>> out_;
};

template <class T>
CompositionContext<T> kernel_object(const CompositionContext<T>& ctx, std::size_t gamma, std::size_t g,
                                    const std::string& name, const std::vector<std::size_t>& ext_targets,
                                    const std::vector<std::size_t>& serve = {}) {
  return KernelBuilder<T>(ctx, gamma, g, name, ext_targets, serve).build();
}

// Cokernel of g → gamma ⊗ Hom(g,gamma)^*, obtained as a kernel in the dual context.
template <class T>
CompositionContext<T> cokernel_object(const CompositionContext<T>& ctx, std::size_t gamma, std::size_t g,
                                      const std::string& name, const std::vector<std::size_t>& ext_sources,
                                      const std::vector<std::size_t>& serve = {}) {
  return dual_context(kernel_object(dual_context(ctx), gamma, g, name, ext_sources, serve));
}

struct ContextStats {
  std::size_t a = 0, b = 0, h11 = 0, h12 = 0;
  long long a_prime = 0;
};

// a = dim Hom(e1,e2), h11 = dim Hom(e1,f1), h12 = dim Hom(e2,f1), b = dim Hom(e1,h1) when h1 is given.
template <class T>
ContextStats context_stats(const CompositionContext<T>& ctx, std::size_t e1, std::size_t e2, std::size_t f1,
                           std::optional<std::size_t> h1 = std::nullopt) {
  ContextStats s;
  s.a = ctx.dim(e1, e2);
  s.h11 = ctx.dim(e1, f1);
  s.h12 = ctx.dim(e2, f1);
  if (h1) s.b = ctx.dim(e1, *h1);
  s.a_prime = static_cast<long long>(s.a * s.h12) - static_cast<long long>(s.h11);
  return s;
}

// JSON: {"field", "objects":[{"name","simple"}], "homs":[{"source","target","dim","labels"}],
// "identities":{name: vec}, "compositions":[{"triple":[x,y,z], "entries":[[i,j,k,v],...]}],
// "vanishing":[[x,y]], "axioms":[...]}
template <class T>
Json context_to_json(const CompositionContext<T>& ctx) {
  Json j;
  j["field"] = ctx.field().name();
  j["objects"] = Json::array();
  for (std::size_t x = 0; x < ctx.size(); ++x)
    j["objects"].push_back({{"name", ctx.name(x)}, {"simple", ctx.is_simple(x)}});
  j["homs"] = Json::array();
  j["identities"] = Json::object();
  for (std::size_t x = 0; x < ctx.size(); ++x) {
    for (std::size_t y = 0; y < ctx.size(); ++y)
      if (ctx.defined(x, y))
        j["homs"].push_back(
            {{"source", ctx.name(x)}, {"target", ctx.name(y)}, {"dim", ctx.dim(x, y)}, {"labels", ctx.labels(x, y)}});
    if (ctx.defined(x, x) && ctx.dim(x, x) > 0) j["identities"][ctx.name(x)] = to_json(ctx.identity(x));
  }
  j["compositions"] = Json::array();
  for (const auto& [key, m] : ctx.compositions()) {
    auto [x, y, z] = key;
    std::size_t dyz = ctx.dim(y, z);
    if (m.cols() == 0) continue;
    Json e = Json::array();
    for (std::size_t k = 0; k < m.rows(); ++k)
      for (std::size_t c = 0; c < m.cols(); ++c)
        if (!Scalar<T>::is_zero(m(k, c))) e.push_back({c / dyz, c % dyz, k, scalar_to_json(m(k, c))});
    j["compositions"].push_back({{"triple", {ctx.name(x), ctx.name(y), ctx.name(z)}}, {"entries", e}});
  }
  j["vanishing"] = Json::array();
  for (auto [x, y] : ctx.vanishing) j["vanishing"].push_back({ctx.name(x), ctx.name(y)});
  j["surjective"] = Json::array();
  for (auto [x, g, h] : ctx.surjective_pairings) j["surjective"].push_back({ctx.name(x), ctx.name(g), ctx.name(h)});
  j["axioms"] = ctx.axioms;
  return j;
}

// {"projective": {"n": 2, "twists": [-2, -1, 0]}} is accepted as shorthand for line bundles on P^n.
template <class T>
CompositionContext<T> context_from_json(const Json& j, const FieldSpec& field) {
  if (j.is_object() && j.contains("projective")) {
    const auto& p = j["projective"];
    const auto& n = require(p, "n", "context.projective");
    if (!n.is_number_unsigned()) throw std::invalid_argument("context.projective.n: expected a natural number");
    return projective_context<T>(n.get<std::size_t>(),
                                 require(p, "twists", "context.projective").get<std::vector<int>>(), field);
  }
  CompositionContext<T> ctx(field);
  for (const auto& o : require(j, "objects", "context"))
    ctx.add_object(require(o, "name", "context.objects").get<std::string>(), o.value("simple", false));
  for (const auto& h : require(j, "homs", "context")) {
    auto x = ctx.object(require(h, "source", "context.homs").get<std::string>());
    auto y = ctx.object(require(h, "target", "context.homs").get<std::string>());
    auto d = require(h, "dim", "context.homs").get<std::size_t>();
    ctx.set_hom(x, y, d, h.value("labels", std::vector<std::string>{}));
  }
  for (std::size_t x = 0; x < ctx.size(); ++x) {
    if (!ctx.defined(x, x) || ctx.dim(x, x) == 0) continue;
    if (j.contains("identities") && j["identities"].contains(ctx.name(x)))
      ctx.set_identity(x, vec_from_json<T>(j["identities"][ctx.name(x)], field, ctx.dim(x, x),
                                           "context.identities." + ctx.name(x)));
    else if (ctx.dim(x, x) == 1)
      ctx.set_identity(x, Vec<T>{ctx.one()});
  }
  if (j.contains("compositions"))
    for (const auto& c : j["compositions"]) {
      const auto& t = require(c, "triple", "context.compositions");
      auto x = ctx.object(t.at(0).get<std::string>()), y = ctx.object(t.at(1).get<std::string>()),
           z = ctx.object(t.at(2).get<std::string>());
      Matrix<T> m(ctx.dim(x, z), ctx.dim(x, y) * ctx.dim(y, z), field);
      std::string path = "context.compositions" + ctx.triple_name(x, y, z);
      for (const auto& e : require(c, "entries", path)) {
        if (!e.is_array() || e.size() != 4) throw std::invalid_argument(path + ": entries are [i,j,k,value]");
        auto a = e[0].get<std::size_t>(), b = e[1].get<std::size_t>(), k = e[2].get<std::size_t>();
        if (a >= ctx.dim(x, y) || b >= ctx.dim(y, z) || k >= ctx.dim(x, z))
          throw std::invalid_argument(path + ": index out of range in " + e.dump());
        m(k, a * ctx.dim(y, z) + b) = scalar_from_json<T>(e[3], field);
      }
      ctx.set_comp(x, y, z, std::move(m));
    }
  if (j.contains("vanishing"))
    for (const auto& v : j["vanishing"])
      ctx.vanishing.emplace_back(ctx.object(v.at(0).get<std::string>()), ctx.object(v.at(1).get<std::string>()));
  if (j.contains("surjective"))
    for (const auto& v : j["surjective"])
      ctx.surjective_pairings.emplace_back(ctx.object(v.at(0).get<std::string>()),
                                           ctx.object(v.at(1).get<std::string>()),
                                           ctx.object(v.at(2).get<std::string>()));
  if (j.contains("axioms")) ctx.axioms = j["axioms"].get<std::vector<std::string>>();
  return ctx;
}

}  // namespace cmut
