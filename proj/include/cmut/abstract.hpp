#pragma once

#include "cmut/json_io.hpp"
#include "cmut/subspace.hpp"

namespace cmut {

// A⊗B → C tensors are C × (dim A · dim B) matrices, column a*dim B + b.
template <class T>
Vec<T> flatten(const Matrix<T>& m) {
  return m.data();
}

template <class T>
Matrix<T> unflatten(const Vec<T>& v, std::size_t rows, std::size_t cols, const FieldSpec& f) {
  Matrix<T> m(rows, cols, f);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = v.at(i * cols + j);
  return m;
}

// t(u ⊗ v).
template <class T>
Vec<T> bilinear(const Matrix<T>& t, const Vec<T>& u, const Vec<T>& v) {
  Vec<T> out(t.rows(), t.zero());
  for (std::size_t a = 0; a < u.size(); ++a) {
    if (Scalar<T>::is_zero(u[a])) continue;
    for (std::size_t b = 0; b < v.size(); ++b) {
      if (Scalar<T>::is_zero(v[b])) continue;
      T s = u[a] * v[b];
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += s * t(k, a * v.size() + b);
    }
  }
  return out;
}

// Standard unit vector.
template <class T>
Vec<T> unit(std::size_t n, std::size_t i, const FieldSpec& f) {
  Vec<T> v(n, Scalar<T>::from_int(0, f));
  v.at(i) = Scalar<T>::from_int(1, f);
  return v;
}

template <class T>
bool all_zero(const Vec<T>& v) {
  return std::all_of(v.begin(), v.end(), [](const T& x) { return Scalar<T>::is_zero(x); });
}

// Random scalar: uniform over F_p, small integers over Q.
template <class T>
T random_element(std::mt19937_64& rng, const FieldSpec& f) {
  if (f.is_prime()) return random_scalar<T>(rng, f);
  std::uniform_int_distribution<int> d(-3, 3);
  return Scalar<T>::from_int(d(rng), f);
}

template <class T>
Matrix<T> random_entries(std::size_t r, std::size_t c, const FieldSpec& f, std::mt19937_64& rng) {
  Matrix<T> m(r, c, f);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = random_element<T>(rng, f);
  return m;
}

struct Violation {
  std::string what;
  std::string witness;
};

// Θ: Z1..Z4, H, T, M with σ: Z1⊗H→Z2, σ': H⊗Z4→Z3, τ: Z1⊗Z3→T, τ': Z2⊗Z4→T.
// G_L, G_0, G_R act through scalars (all objects simple).
template <class T>
struct Type1Space {
  FieldSpec field;
  std::size_t z1 = 0, z2 = 0, z3 = 0, z4 = 0, h = 0, t = 0, m = 0;
  Matrix<T> sigma, sigma_p, tau, tau_p;

  // Z4 → H*⊗Z3, z ↦ (e_j ↦ σ'(e_j⊗z)); rows indexed j*z3 + c.
  Matrix<T> z4_inclusion() const {
    Matrix<T> inc(h * z3, z4, field);
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t d = 0; d < z4; ++d)
        for (std::size_t c = 0; c < z3; ++c) inc(j * z3 + c, d) = sigma_p(c, j * z4 + d);
    return inc;
  }

  std::vector<Violation> violations() const {
    std::vector<Violation> out;
    auto shape = [&](const Matrix<T>& x, std::size_t r, std::size_t c, const char* n) {
      if (x.rows() != r || x.cols() != c) out.push_back({std::string(n) + " has the wrong shape", x.str()});
    };
    shape(sigma, z2, z1 * h, "sigma");
    shape(sigma_p, z3, h * z4, "sigma'");
    shape(tau, t, z1 * z3, "tau");
    shape(tau_p, t, z2 * z4, "tau'");
    if (!out.empty()) return out;
    auto img = image_basis(sigma);
    if (!img.is_full()) {
      auto free = img.free_coordinates();
      out.push_back({"sigma is not surjective", "missing Z2 vector " + to_json(unit<T>(z2, free[0], field)).dump()});
    }
    auto ker = kernel_basis(z4_inclusion());
    if (!ker.is_zero())
      out.push_back({"sigma' does not induce an injection Z4 -> H*⊗Z3", "kernel vector " + to_json(ker.basis().row(0)).dump()});
    for (std::size_t a = 0; a < z1; ++a)
      for (std::size_t j = 0; j < h; ++j)
        for (std::size_t d = 0; d < z4; ++d) {
          auto lhs = bilinear(tau_p, sigma.col(a * h + j), unit<T>(z4, d, field));
          auto rhs = bilinear(tau, unit<T>(z1, a, field), sigma_p.col(j * z4 + d));
          if (lhs != rhs) {
            out.push_back({"diagram (D) does not commute",
                           "basis element z1[" + std::to_string(a) + "]⊗h[" + std::to_string(j) + "]⊗z4[" +
                               std::to_string(d) + "]"});
            return out;
          }
        }
    return out;
  }
  bool valid() const { return violations().empty(); }
};

template <class T>
struct Type1Point {
  Matrix<T> phi1;  // Z1 × M
  Vec<T> z2;
  Matrix<T> phi3;  // Z3 × M (columns are M* coordinates)
  Vec<T> z4;
  friend bool operator==(const Type1Point& a, const Type1Point& b) {
    return a.phi1 == b.phi1 && a.z2 == b.z2 && a.phi3 == b.phi3 && a.z4 == b.z4;
  }
};

// τ⟨φ1,φ3⟩ + τ'(z2⊗z4), the G_1-invariant map W_C → T.
template <class T>
Vec<T> type1_value(const Type1Space<T>& s, const Type1Point<T>& x) {
  auto pair = x.phi1 * x.phi3.transpose();  // Z1 × Z3
  auto v = s.tau * flatten(pair);
  auto w = bilinear(s.tau_p, x.z2, x.z4);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  return v;
}

template <class T>
bool type1_shape_ok(const Type1Space<T>& s, const Type1Point<T>& x) {
  return x.phi1.rows() == s.z1 && x.phi1.cols() == s.m && x.z2.size() == s.z2 && x.phi3.rows() == s.z3 &&
         x.phi3.cols() == s.m && x.z4.size() == s.z4;
}

template <class T>
std::pair<bool, Vec<T>> is_point(const Type1Space<T>& s, const Type1Point<T>& x) {
  if (!type1_shape_ok(s, x)) throw std::invalid_argument("type-1 point does not match the space");
  auto r = type1_value(s, x);
  return {all_zero(r), r};
}

// g = (g_L, g_1, g_R) with g_1 = [[g_M, 0], [phi, g_0]], phi: M → H.
template <class T>
struct GroupElement1 {
  T gl, g0, gr;
  Matrix<T> gm;   // M × M
  Matrix<T> phi;  // H × M
};

template <class T>
GroupElement1<T> identity1(const Type1Space<T>& s) {
  T one = Scalar<T>::from_int(1, s.field);
  return {one, one, one, Matrix<T>::identity(s.m, s.field), Matrix<T>(s.h, s.m, s.field)};
}

template <class T>
GroupElement1<T> compose1(const GroupElement1<T>& g, const GroupElement1<T>& k) {
  return {g.gl * k.gl, g.g0 * k.g0, g.gr * k.gr, g.gm * k.gm, g.phi * k.gm + k.phi.scaled(g.g0)};
}

template <class T>
Type1Point<T> act1(const Type1Space<T>& s, const GroupElement1<T>& g, const Type1Point<T>& x) {
  auto inv_m = inverse(g.gm);
  if (!inv_m || Scalar<T>::is_zero(g.gl) || Scalar<T>::is_zero(g.g0) || Scalar<T>::is_zero(g.gr))
    throw std::invalid_argument("group element has a non-invertible block");
  Type1Point<T> y;
  // Left action on (Z1⊗M) ⊕ Z2, then the G_L scalar.
  y.phi1 = (x.phi1 * g.gm.transpose()).scaled(g.gl);
  auto contracted = x.phi1 * g.phi.transpose();  // ⟨phi, phi1⟩ ∈ Z1⊗H
  y.z2 = s.sigma * flatten(contracted);
  for (std::size_t i = 0; i < y.z2.size(); ++i) y.z2[i] = (y.z2[i] + g.g0 * x.z2[i]) * g.gl;
  // Right action of g_1^{-1} = [[A, 0], [B, C]] on (Z3⊗M*) ⊕ Z4, then the G_R scalar.
  T c = Scalar<T>::inv(g.g0);
  auto A = *inv_m;
  auto B = (g.phi * A).scaled(-c);  // H × M
  Matrix<T> phi3 = x.phi3 * A;
  for (std::size_t j = 0; j < s.m; ++j)
    for (std::size_t hh = 0; hh < s.h; ++hh) {
      if (Scalar<T>::is_zero(B(hh, j))) continue;
      auto part = bilinear(s.sigma_p, unit<T>(s.h, hh, s.field), x.z4);
      for (std::size_t r = 0; r < s.z3; ++r) phi3(r, j) += B(hh, j) * part[r];
    }
  y.phi3 = phi3.scaled(g.gr);
  y.z4 = x.z4;
  for (auto& v : y.z4) v *= c * g.gr;
  return y;
}

// Θ': Z1, Y2, T2, Z3, T, K, N with ν: K⊗Y2→Z1, ν': K⊗T2→T, λ: Y2⊗Z3→T2, τ: Z1⊗Z3→T.
template <class T>
struct Type2Space {
  FieldSpec field;
  std::size_t z1 = 0, y2 = 0, t2 = 0, z3 = 0, t = 0, k = 0, n = 0;
  Matrix<T> nu, nu_p, lambda, tau;

  // K → Z1⊗Y2*, rows indexed a*y2 + j.
  Matrix<T> k_inclusion() const {
    Matrix<T> inc(z1 * y2, k, field);
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t j = 0; j < y2; ++j)
        for (std::size_t a = 0; a < z1; ++a) inc(a * y2 + j, kk) = nu(a, kk * y2 + j);
    return inc;
  }

  std::vector<Violation> violations() const {
    std::vector<Violation> out;
    auto shape = [&](const Matrix<T>& x, std::size_t r, std::size_t c, const char* nm) {
      if (x.rows() != r || x.cols() != c) out.push_back({std::string(nm) + " has the wrong shape", x.str()});
    };
    shape(nu, z1, k * y2, "nu");
    shape(nu_p, t, k * t2, "nu'");
    shape(lambda, t2, y2 * z3, "lambda");
    shape(tau, t, z1 * z3, "tau");
    if (!out.empty()) return out;
    auto ker = kernel_basis(k_inclusion());
    if (!ker.is_zero())
      out.push_back({"nu does not induce an injection K -> Z1⊗Y2*", "kernel vector " + to_json(ker.basis().row(0)).dump()});
    auto img = image_basis(lambda);
    if (!img.is_full())
      out.push_back({"lambda is not surjective",
                     "missing T2 vector " + to_json(unit<T>(t2, img.free_coordinates()[0], field)).dump()});
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t j = 0; j < y2; ++j)
        for (std::size_t c = 0; c < z3; ++c) {
          auto lhs = bilinear(tau, nu.col(kk * y2 + j), unit<T>(z3, c, field));
          auto rhs = bilinear(nu_p, unit<T>(k, kk, field), lambda.col(j * z3 + c));
          if (lhs != rhs) {
            out.push_back({"diagram (D') does not commute", "basis element k[" + std::to_string(kk) + "]⊗y2[" +
                                                                std::to_string(j) + "]⊗z3[" + std::to_string(c) + "]"});
            return out;
          }
        }
    return out;
  }
  bool valid() const { return violations().empty(); }
};

template <class T>
struct Type2Point {
  Matrix<T> psi1;  // Z1 × N
  Matrix<T> psi2;  // Y2 × N
  Matrix<T> psi3;  // Z3 × N (columns are N* coordinates)
  friend bool operator==(const Type2Point& a, const Type2Point& b) {
    return a.psi1 == b.psi1 && a.psi2 == b.psi2 && a.psi3 == b.psi3;
  }
};

template <class T>
bool type2_shape_ok(const Type2Space<T>& s, const Type2Point<T>& x) {
  return x.psi1.rows() == s.z1 && x.psi1.cols() == s.n && x.psi2.rows() == s.y2 && x.psi2.cols() == s.n &&
         x.psi3.rows() == s.z3 && x.psi3.cols() == s.n;
}

// Residuals τ⟨ψ1,ψ3⟩ and λ⟨ψ2,ψ3⟩.
template <class T>
std::pair<Vec<T>, Vec<T>> type2_residuals(const Type2Space<T>& s, const Type2Point<T>& x) {
  if (!type2_shape_ok(s, x)) throw std::invalid_argument("type-2 point does not match the space");
  return {s.tau * flatten(x.psi1 * x.psi3.transpose()), s.lambda * flatten(x.psi2 * x.psi3.transpose())};
}

template <class T>
std::pair<bool, Vec<T>> is_point(const Type2Space<T>& s, const Type2Point<T>& x) {
  auto [r1, r2] = type2_residuals(s, x);
  Vec<T> all = r1;
  all.insert(all.end(), r2.begin(), r2.end());
  return {all_zero(all), all};
}

// g' = (g_N, g'_1, g_R) with g'_1 = [[g_L, 0], [k, g_0]], k ∈ K.
template <class T>
struct GroupElement2 {
  Matrix<T> gn;  // N × N
  T gl, g0, gr;
  Vec<T> k;
};

template <class T>
GroupElement2<T> identity2(const Type2Space<T>& s) {
  T one = Scalar<T>::from_int(1, s.field);
  return {Matrix<T>::identity(s.n, s.field), one, one, one, Vec<T>(s.k, Scalar<T>::from_int(0, s.field))};
}

// G'_1 enters through its opposite group: (g∘h)_1 = h_1 g_1.
template <class T>
GroupElement2<T> compose2(const GroupElement2<T>& g, const GroupElement2<T>& h) {
  Vec<T> k(g.k.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = h.k[i] * g.gl + h.g0 * g.k[i];
  return {g.gn * h.gn, g.gl * h.gl, g.g0 * h.g0, g.gr * h.gr, k};
}

template <class T>
Type2Point<T> act2(const Type2Space<T>& s, const GroupElement2<T>& g, const Type2Point<T>& x) {
  auto inv_n = inverse(g.gn);
  if (!inv_n || Scalar<T>::is_zero(g.gl) || Scalar<T>::is_zero(g.g0) || Scalar<T>::is_zero(g.gr))
    throw std::invalid_argument("group element has a non-invertible block");
  Type2Point<T> y;
  // (z1, y2) ↦ (z1 g_L + ν(k⊗y2), y2 g_0), column by column in N.
  Matrix<T> psi1 = x.psi1.scaled(g.gl);
  for (std::size_t col = 0; col < s.n; ++col) {
    auto add = bilinear(s.nu, g.k, x.psi2.col(col));
    for (std::size_t a = 0; a < s.z1; ++a) psi1(a, col) += add[a];
  }
  auto gt = g.gn.transpose();
  y.psi1 = psi1 * gt;
  y.psi2 = x.psi2.scaled(g.g0) * gt;
  y.psi3 = (x.psi3 * *inv_n).scaled(g.gr);
  return y;
}

template <class T>
bool in_Q0(const Type2Space<T>& s, const Type2Point<T>& y) {
  if (!type2_shape_ok(s, y)) throw std::invalid_argument("type-2 point does not match the space");
  return rank(y.psi2) == s.y2;
}

// Random σ onto Z2, σ' with injective induced map, then (τ, τ') drawn from the solution space of (D).
template <class T>
Type1Space<T> random_type1(std::size_t z1, std::size_t z2, std::size_t z3, std::size_t z4, std::size_t h,
                           std::size_t t, std::size_t m, const FieldSpec& f, std::mt19937_64& rng) {
  if (z2 > z1 * h || z4 > h * z3) throw std::invalid_argument("no valid type-1 space with these dimensions");
  Type1Space<T> s{f, z1, z2, z3, z4, h, t, m, {}, {}, {}, {}};
  do s.sigma = random_entries<T>(z2, z1 * h, f, rng);
  while (rank(s.sigma) < z2);
  do s.sigma_p = random_entries<T>(z3, h * z4, f, rng);
  while (rank(s.z4_inclusion()) < z4);
  // Unknowns per T-row: τ row (z1*z3) then τ' row (z2*z4).
  std::size_t nt = z1 * z3, ntp = z2 * z4;
  Matrix<T> eq(z1 * h * z4, nt + ntp, f);
  for (std::size_t a = 0; a < z1; ++a)
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t d = 0; d < z4; ++d) {
        std::size_t r = (a * h + j) * z4 + d;
        for (std::size_t b = 0; b < z2; ++b) eq(r, nt + b * z4 + d) += s.sigma(b, a * h + j);
        for (std::size_t c = 0; c < z3; ++c) eq(r, a * z3 + c) -= s.sigma_p(c, j * z4 + d);
      }
  auto sol = kernel_rows(eq);
  s.tau = Matrix<T>(t, nt, f);
  s.tau_p = Matrix<T>(t, ntp, f);
  for (std::size_t row = 0; row < t; ++row)
    for (std::size_t b = 0; b < sol.rows(); ++b) {
      T c = random_element<T>(rng, f);
      for (std::size_t i = 0; i < nt; ++i) s.tau(row, i) += c * sol(b, i);
      for (std::size_t i = 0; i < ntp; ++i) s.tau_p(row, i) += c * sol(b, nt + i);
    }
  return s;
}

template <class T>
Type2Space<T> random_type2(std::size_t z1, std::size_t y2, std::size_t t2, std::size_t z3, std::size_t t,
                           std::size_t k, std::size_t n, const FieldSpec& f, std::mt19937_64& rng) {
  if (k > z1 * y2 || t2 > y2 * z3) throw std::invalid_argument("no valid type-2 space with these dimensions");
  Type2Space<T> s{f, z1, y2, t2, z3, t, k, n, {}, {}, {}, {}};
  do s.nu = random_entries<T>(z1, k * y2, f, rng);
  while (rank(s.k_inclusion()) < k);
  do s.lambda = random_entries<T>(t2, y2 * z3, f, rng);
  while (rank(s.lambda) < t2);
  std::size_t nt = z1 * z3, nnp = k * t2;
  Matrix<T> eq(k * y2 * z3, nt + nnp, f);
  for (std::size_t kk = 0; kk < k; ++kk)
    for (std::size_t j = 0; j < y2; ++j)
      for (std::size_t c = 0; c < z3; ++c) {
        std::size_t r = (kk * y2 + j) * z3 + c;
        for (std::size_t a = 0; a < z1; ++a) eq(r, a * z3 + c) += s.nu(a, kk * y2 + j);
        for (std::size_t q = 0; q < t2; ++q) eq(r, nt + kk * t2 + q) -= s.lambda(q, j * z3 + c);
      }
  auto sol = kernel_rows(eq);
  s.tau = Matrix<T>(t, nt, f);
  s.nu_p = Matrix<T>(t, nnp, f);
  for (std::size_t row = 0; row < t; ++row)
    for (std::size_t b = 0; b < sol.rows(); ++b) {
      T c = random_element<T>(rng, f);
      for (std::size_t i = 0; i < nt; ++i) s.tau(row, i) += c * sol(b, i);
      for (std::size_t i = 0; i < nnp; ++i) s.nu_p(row, i) += c * sol(b, nt + i);
    }
  return s;
}

// Type-1 space with every dimension 1 and every map the identity scalar.
template <class T>
Type1Space<T> scalar_type1(const FieldSpec& f) {
  auto one = Matrix<T>::identity(1, f);
  return {f, 1, 1, 1, 1, 1, 1, 1, one, one, one, one};
}

// Calls visit on every point of Q_C (prime field only; p^dim W_C points are scanned).
template <class T>
void for_each_type1_point(const Type1Space<T>& s, const std::function<void(const Type1Point<T>&)>& visit,
                          std::uint64_t budget = default_subspace_budget) {
  require_prime(s.field, "point enumeration");
  std::size_t n = s.z1 * s.m + s.z2 + s.z3 * s.m + s.z4;
  BigInt total = boost::multiprecision::pow(BigInt(s.field.p), static_cast<unsigned>(n));
  if (total > budget) throw BudgetExceeded("enumerating W_C", total);
  std::vector<std::uint32_t> digits(n, 0);
  while (true) {
    Type1Point<T> x{Matrix<T>(s.z1, s.m, s.field), Vec<T>(s.z2), Matrix<T>(s.z3, s.m, s.field), Vec<T>(s.z4)};
    std::size_t i = 0;
    auto next = [&] { return Scalar<T>::from_int(digits[i++], s.field); };
    for (std::size_t r = 0; r < s.z1; ++r)
      for (std::size_t c = 0; c < s.m; ++c) x.phi1(r, c) = next();
    for (auto& v : x.z2) v = next();
    for (std::size_t r = 0; r < s.z3; ++r)
      for (std::size_t c = 0; c < s.m; ++c) x.phi3(r, c) = next();
    for (auto& v : x.z4) v = next();
    if (is_point(s, x).first) visit(x);
    std::size_t d = 0;
    while (d < n && ++digits[d] == s.field.p) digits[d++] = 0;
    if (d == n) break;
  }
}

// Random φ1, z2, z4, then φ3 solving the point equation; the zero point if 64 draws fail.
template <class T>
Type1Point<T> random_type1_point(const Type1Space<T>& s, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Type1Point<T> x{random_entries<T>(s.z1, s.m, s.field, rng), random_entries<T>(s.z2, 1, s.field, rng).col(0),
                    Matrix<T>(s.z3, s.m, s.field), random_entries<T>(s.z4, 1, s.field, rng).col(0)};
    // τ⟨φ1,φ3⟩ is linear in φ3: unknown index r*m + c.
    Matrix<T> a(s.t, s.z3 * s.m, s.field);
    for (std::size_t r = 0; r < s.z3; ++r)
      for (std::size_t c = 0; c < s.m; ++c) {
        auto e = Matrix<T>(s.z3, s.m, s.field);
        e(r, c) = e.one();
        auto col = s.tau * flatten(x.phi1 * e.transpose());
        for (std::size_t i = 0; i < s.t; ++i) a(i, r * s.m + c) = col[i];
      }
    auto rhs = bilinear(s.tau_p, x.z2, x.z4);
    for (auto& v : rhs) v = -v;
    auto sol = solve_linear(a, rhs);
    if (!sol) continue;
    auto ker = kernel_rows(a);
    for (std::size_t b = 0; b < ker.rows(); ++b) {
      T c = random_element<T>(rng, s.field);
      for (std::size_t i = 0; i < sol->size(); ++i) (*sol)[i] += c * ker(b, i);
    }
    x.phi3 = unflatten(*sol, s.z3, s.m, s.field);
    return x;
  }
  Type1Point<T> zero{Matrix<T>(s.z1, s.m, s.field), Vec<T>(s.z2, Scalar<T>::from_int(0, s.field)),
                     Matrix<T>(s.z3, s.m, s.field), Vec<T>(s.z4, Scalar<T>::from_int(0, s.field))};
  return zero;
}

// Serialization.
template <class T>
Json to_json(const Type1Space<T>& s) {
  return {{"type", 1},
          {"field", s.field.name()},
          {"dims", {{"Z1", s.z1}, {"Z2", s.z2}, {"Z3", s.z3}, {"Z4", s.z4}, {"H", s.h}, {"T", s.t}, {"M", s.m}}},
          {"sigma", to_json(s.sigma)},
          {"sigma_p", to_json(s.sigma_p)},
          {"tau", to_json(s.tau)},
          {"tau_p", to_json(s.tau_p)}};
}

template <class T>
Json to_json(const Type2Space<T>& s) {
  return {{"type", 2},
          {"field", s.field.name()},
          {"dims", {{"Z1", s.z1}, {"Y2", s.y2}, {"T2", s.t2}, {"Z3", s.z3}, {"T", s.t}, {"K", s.k}, {"N", s.n}}},
          {"nu", to_json(s.nu)},
          {"nu_p", to_json(s.nu_p)},
          {"lambda", to_json(s.lambda)},
          {"tau", to_json(s.tau)}};
}

inline std::size_t dim_of(const Json& j, const char* key, const std::string& path) {
  return require(require(j, "dims", path), key, path + ".dims").get<std::size_t>();
}

template <class T>
Type1Space<T> type1_from_json(const Json& j, const FieldSpec& f) {
  Type1Space<T> s;
  s.field = f;
  const std::string p = "space";
  s.z1 = dim_of(j, "Z1", p), s.z2 = dim_of(j, "Z2", p), s.z3 = dim_of(j, "Z3", p), s.z4 = dim_of(j, "Z4", p);
  s.h = dim_of(j, "H", p), s.t = dim_of(j, "T", p), s.m = dim_of(j, "M", p);
  s.sigma = matrix_from_json<T>(require(j, "sigma", p), f, s.z2, s.z1 * s.h, p + ".sigma");
  s.sigma_p = matrix_from_json<T>(require(j, "sigma_p", p), f, s.z3, s.h * s.z4, p + ".sigma_p");
  s.tau = matrix_from_json<T>(require(j, "tau", p), f, s.t, s.z1 * s.z3, p + ".tau");
  s.tau_p = matrix_from_json<T>(require(j, "tau_p", p), f, s.t, s.z2 * s.z4, p + ".tau_p");
  return s;
}

template <class T>
Type2Space<T> type2_from_json(const Json& j, const FieldSpec& f) {
  Type2Space<T> s;
  s.field = f;
  const std::string p = "space";
  s.z1 = dim_of(j, "Z1", p), s.y2 = dim_of(j, "Y2", p), s.t2 = dim_of(j, "T2", p), s.z3 = dim_of(j, "Z3", p);
  s.t = dim_of(j, "T", p), s.k = dim_of(j, "K", p), s.n = dim_of(j, "N", p);
  s.nu = matrix_from_json<T>(require(j, "nu", p), f, s.z1, s.k * s.y2, p + ".nu");
  s.nu_p = matrix_from_json<T>(require(j, "nu_p", p), f, s.t, s.k * s.t2, p + ".nu_p");
  s.lambda = matrix_from_json<T>(require(j, "lambda", p), f, s.t2, s.y2 * s.z3, p + ".lambda");
  s.tau = matrix_from_json<T>(require(j, "tau", p), f, s.t, s.z1 * s.z3, p + ".tau");
  return s;
}

template <class T>
Json to_json(const Type1Point<T>& x) {
  return {{"phi1", to_json(x.phi1)}, {"z2", to_json(x.z2)}, {"phi3", to_json(x.phi3)}, {"z4", to_json(x.z4)}};
}

template <class T>
Json to_json(const Type2Point<T>& x) {
  return {{"psi1", to_json(x.psi1)}, {"psi2", to_json(x.psi2)}, {"psi3", to_json(x.psi3)}};
}

template <class T>
Type1Point<T> type1_point_from_json(const Json& j, const Type1Space<T>& s) {
  const std::string p = "point";
  return {matrix_from_json<T>(require(j, "phi1", p), s.field, s.z1, s.m, p + ".phi1"),
          vec_from_json<T>(require(j, "z2", p), s.field, s.z2, p + ".z2"),
          matrix_from_json<T>(require(j, "phi3", p), s.field, s.z3, s.m, p + ".phi3"),
          vec_from_json<T>(require(j, "z4", p), s.field, s.z4, p + ".z4")};
}

template <class T>
Type2Point<T> type2_point_from_json(const Json& j, const Type2Space<T>& s) {
  const std::string p = "point";
  return {matrix_from_json<T>(require(j, "psi1", p), s.field, s.z1, s.n, p + ".psi1"),
          matrix_from_json<T>(require(j, "psi2", p), s.field, s.y2, s.n, p + ".psi2"),
          matrix_from_json<T>(require(j, "psi3", p), s.field, s.z3, s.n, p + ".psi3")};
}

}  // namespace cmut
