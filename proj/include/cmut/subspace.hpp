#pragma once

#include "cmut/matrix.hpp"

#include <functional>
#include <random>
#include <set>

namespace cmut {

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, BigInt needed)
      : std::runtime_error(what + " needs " + needed.str() + " steps"), needed_(std::move(needed)) {}
  const BigInt& needed() const { return needed_; }

 private:
  BigInt needed_;
};

inline constexpr std::uint64_t default_subspace_budget = 1'000'000;

// Subspace of F^n stored as the nonzero rows of its reduced echelon basis.
template <class T>
class Subspace {
 public:
  Subspace() = default;
  Subspace(std::size_t ambient, FieldSpec field) : basis_(0, ambient, field) {}

  static Subspace span(const Matrix<T>& rows) {
    auto e = rref(rows);
    Subspace s;
    s.basis_ = e.reduced.block(0, 0, e.pivots.size(), rows.cols());
    s.pivots_ = std::move(e.pivots);
    return s;
  }
  static Subspace zero(std::size_t n, FieldSpec f) { return Subspace(n, f); }
  static Subspace full(std::size_t n, FieldSpec f) { return span(Matrix<T>::identity(n, f)); }

  std::size_t ambient() const { return basis_.cols(); }
  std::size_t dim() const { return basis_.rows(); }
  const Matrix<T>& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  const FieldSpec& field() const { return basis_.field(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient(); }

  // Rows w with <b, w> = 0 for every basis row b; v lies in the subspace iff annihilator * v = 0.
  const Matrix<T>& annihilator() const {
    if (!ann_) ann_ = kernel_rows(basis_);
    return *ann_;
  }

  bool contains(const Vec<T>& v) const {
    const auto& a = annihilator();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      T s = basis_.zero();
      for (std::size_t j = 0; j < v.size(); ++j) s += a(i, j) * v[j];
      if (!Scalar<T>::is_zero(s)) return false;
    }
    return true;
  }
  // Columns of m all lie in the subspace.
  bool contains_columns(const Matrix<T>& m) const { return (annihilator() * m).is_zero(); }
  bool contains(const Subspace& o) const { return contains_columns(o.basis_.transpose()); }

  Subspace operator+(const Subspace& o) const { return span(vstack(basis_, o.basis_)); }
  Subspace intersect(const Subspace& o) const { return span(kernel_rows(vstack(annihilator(), o.annihilator()))); }

  // Coordinates not used as pivots: the standard complement.
  std::vector<std::size_t> free_coordinates() const {
    std::vector<bool> used(ambient(), false);
    for (auto c : pivots_) used[c] = true;
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < ambient(); ++c)
      if (!used[c]) out.push_back(c);
    return out;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }
  friend bool operator<(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return a.basis_.str() < b.basis_.str();
  }

 private:
  Matrix<T> basis_;
  std::vector<std::size_t> pivots_;
  mutable std::optional<Matrix<T>> ann_;
};

template <class T>
Subspace<T> kernel_basis(const Matrix<T>& m) {
  return Subspace<T>::span(kernel_rows(m));
}

template <class T>
Subspace<T> image_basis(const Matrix<T>& m) {
  return Subspace<T>::span(m.transpose());
}

inline BigInt gaussian_binomial(std::size_t n, std::size_t k, std::uint64_t q) {
  if (k > n) return 0;
  BigInt num = 1, den = 1, Q = q;
  for (std::size_t i = 0; i < k; ++i) {
    num *= boost::multiprecision::pow(Q, static_cast<unsigned>(n - i)) - 1;
    den *= boost::multiprecision::pow(Q, static_cast<unsigned>(i + 1)) - 1;
  }
  return num / den;
}

inline BigInt gl_order(std::size_t m, std::uint64_t q) {
  BigInt r = 1, Q = q;
  BigInt qm = boost::multiprecision::pow(Q, static_cast<unsigned>(m));
  for (std::size_t i = 0; i < m; ++i) r *= qm - boost::multiprecision::pow(Q, static_cast<unsigned>(i));
  return r;
}

inline BigInt total_subspaces(std::size_t n, std::uint64_t q) {
  BigInt t = 0;
  for (std::size_t k = 0; k <= n; ++k) t += gaussian_binomial(n, k, q);
  return t;
}

inline void require_prime(const FieldSpec& f, const char* what) {
  if (!f.is_prime()) throw std::invalid_argument(std::string(what) + " requires a prime field");
}

// Calls visit on every dim-dimensional subspace of F_p^n, pivot patterns in lexicographic
// order and free entries by odometer. visit returns false to stop early.
template <class T>
void for_each_subspace(std::size_t n, std::size_t dim, const FieldSpec& field,
                       const std::function<bool(const Subspace<T>&)>& visit,
                       std::uint64_t budget = default_subspace_budget) {
  require_prime(field, "subspace enumeration");
  if (dim > n) return;
  BigInt count = gaussian_binomial(n, dim, field.p);
  if (count > budget)
    throw BudgetExceeded("enumerating " + std::to_string(dim) + "-subspaces of F_" + std::to_string(field.p) +
                             "^" + std::to_string(n),
                         count);
  std::vector<std::size_t> piv(dim);
  for (std::size_t i = 0; i < dim; ++i) piv[i] = i;
  while (true) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    std::vector<bool> is_piv(n, false);
    for (auto c : piv) is_piv[c] = true;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = piv[r] + 1; c < n; ++c)
        if (!is_piv[c]) slots.emplace_back(r, c);
    std::vector<std::uint32_t> digits(slots.size(), 0);
    Matrix<T> m(dim, n, field);
    for (std::size_t r = 0; r < dim; ++r) m(r, piv[r]) = m.one();
    while (true) {
      for (std::size_t s = 0; s < slots.size(); ++s) m(slots[s].first, slots[s].second) = m.scalar(digits[s]);
      if (!visit(Subspace<T>::span(m))) return;
      bool advanced = false;
      for (std::size_t s = slots.size(); s-- > 0;) {
        if (++digits[s] < field.p) {
          advanced = true;
          break;
        }
        digits[s] = 0;
      }
      if (!advanced) break;
    }
    // next pivot combination
    std::size_t i = dim;
    while (i > 0 && piv[i - 1] == n - dim + i - 1) --i;
    if (i == 0) break;
    ++piv[i - 1];
    for (std::size_t j = i; j < dim; ++j) piv[j] = piv[j - 1] + 1;
  }
}

template <class T>
std::vector<Subspace<T>> enumerate_subspaces(std::size_t n, std::size_t dim, const FieldSpec& field,
                                             std::uint64_t budget = default_subspace_budget) {
  std::vector<Subspace<T>> out;
  for_each_subspace<T>(n, dim, field, [&](const Subspace<T>& s) {
    out.push_back(s);
    return true;
  }, budget);
  return out;
}

// Every subspace W with base ⊂ W ⊂ F^n and dim W = base.dim() + extra.
template <class T>
void for_each_superspace(const Subspace<T>& base, std::size_t extra,
                         const std::function<bool(const Subspace<T>&)>& visit,
                         std::uint64_t budget = default_subspace_budget) {
  auto comp = base.free_coordinates();
  for_each_subspace<T>(comp.size(), extra, base.field(), [&](const Subspace<T>& q) {
    Matrix<T> lifted(q.dim(), base.ambient(), base.field());
    for (std::size_t r = 0; r < q.dim(); ++r)
      for (std::size_t c = 0; c < comp.size(); ++c) lifted(r, comp[c]) = q.basis()(r, c);
    return visit(Subspace<T>::span(vstack(base.basis(), lifted)));
  }, budget);
}

template <class T>
T random_scalar(std::mt19937_64& rng, const FieldSpec& f) {
  require_prime(f, "random sampling");
  std::uniform_int_distribution<std::uint32_t> d(0, f.p - 1);
  return Scalar<T>::from_int(d(rng), f);
}

template <class T>
Matrix<T> random_matrix(std::size_t r, std::size_t c, const FieldSpec& f, std::mt19937_64& rng) {
  Matrix<T> m(r, c, f);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = random_scalar<T>(rng, f);
  return m;
}

template <class T>
Matrix<T> random_invertible(std::size_t n, const FieldSpec& f, std::mt19937_64& rng) {
  while (true) {
    auto m = random_matrix<T>(n, n, f, rng);
    if (rank(m) == n) return m;
  }
}

// Up to count distinct subspaces drawn from uniformly random full-rank matrices, in draw order.
template <class T>
std::vector<Subspace<T>> sample_subspaces(std::size_t n, std::size_t dim, const FieldSpec& field, std::size_t count,
                                          std::uint64_t seed) {
  require_prime(field, "subspace sampling");
  std::vector<Subspace<T>> out;
  if (dim > n) return out;
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < count; ++i) {
    Matrix<T> m;
    do {
      m = random_matrix<T>(dim, n, field, rng);
    } while (rank(m) < dim);
    auto s = Subspace<T>::span(m);
    if (seen.insert(s.basis().str()).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cmut
