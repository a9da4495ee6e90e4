#pragma once

#include "cmut/constants.hpp"
#include "cmut/stability.hpp"

#include <sstream>

namespace cmut {

// A fact recomputed at run time and compared with its expected value.
// source: "published" (stated in the literature), "derived" (worked out here), "trivial".
struct Fact {
  std::string name;
  std::string expected;
  std::string derived;
  std::string source;
  bool ok = false;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<Fact> facts;
  std::vector<std::string> notes;
  bool ok() const {
    return std::all_of(facts.begin(), facts.end(), [](const Fact& f) { return f.ok; });
  }
  void add(std::string name, const std::string& expected, const std::string& derived, std::string source) {
    facts.push_back({std::move(name), expected, derived, std::move(source), expected == derived});
  }
  void check(std::string name, bool holds, std::string source) {
    facts.push_back({std::move(name), "true", holds ? "true" : "false", std::move(source), holds});
  }
};

inline Json to_json(const ScenarioReport& r) {
  Json facts = Json::array();
  for (const auto& f : r.facts)
    facts.push_back(
        {{"fact", f.name}, {"expected", f.expected}, {"derived", f.derived}, {"source", f.source}, {"ok", f.ok}});
  return {{"scenario", r.scenario}, {"ok", r.ok()}, {"facts", facts}, {"notes", r.notes}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string to_csv(const ScenarioReport& r) {
  std::ostringstream os;
  os << "scenario,fact,expected,derived,source,ok\n";
  for (const auto& f : r.facts)
    os << csv_field(r.scenario) << ',' << csv_field(f.name) << ',' << csv_field(f.expected) << ','
       << csv_field(f.derived) << ',' << f.source << ',' << (f.ok ? "yes" : "no") << '\n';
  return os.str();
}

// ---- Settings on projective space ----

// O(-2)⊗L1 → (O(-1)⊗M1)⊕(O⊗M2) → O(1)⊗N1 on P^2.
template <class T>
ChainSpace<T> p2_complex_space(const FieldSpec& f, std::size_t l1, std::size_t m1, std::size_t m2, std::size_t n1) {
  auto ctx = projective_context<T>(2, {-2, -1, 0, 1}, f);
  return complex3_setting(ctx, 0, 1, 2, 3, l1, m1, m2, n1);
}

// ((z1,z2,z3,q0),(q1,q2,q3,z0)) for L1 = M2 = N1 = 1, M1 = 3.
template <class T>
ChainPoint<T> syzygy_point(const ChainSpace<T>& c, const std::vector<std::string>& first,
                           const std::vector<std::string>& second) {
  if (c.terms.size() != 3 || c.terms[1][0].mult != 3 || first.size() != 4 || second.size() != 4)
    throw std::invalid_argument("syzygy_point needs M1 = 3 and four forms on each side");
  const auto& ctx = c.ctx;
  auto e1 = c.terms[0][0].object, f1 = c.terms[1][0].object, f2 = c.terms[1][1].object, g1 = c.terms[2][0].object;
  auto x = zero_chain(c);
  for (std::size_t j = 0; j < 3; ++j) {
    set_entry_form(x.blocks[0][0][0], 3, j, 0, parse_form(ctx, e1, f1, first[j]));
    set_entry_form(x.blocks[1][0][0], 1, 0, j, parse_form(ctx, f1, g1, second[j]));
  }
  set_entry_form(x.blocks[0][0][1], 1, 0, 0, parse_form(ctx, e1, f2, first[3]));
  set_entry_form(x.blocks[1][1][0], 1, 0, 0, parse_form(ctx, f2, g1, second[3]));
  return x;
}

inline const std::vector<std::string>& explicit_syzygy_first() {
  static const std::vector<std::string> v{"x0", "x1", "x2", "0"};
  return v;
}
inline const std::vector<std::string>& explicit_syzygy_second() {
  static const std::vector<std::string> v{"x2^2", "-x1*x2", "x1^2 - x0*x2", "x0"};
  return v;
}

// (O(-2)⊗M1)⊕(O(-1)⊗M2) → O⊗N1 on P^n.
template <class T>
MorphismSetting<T> pn_morphism_setting(std::size_t n, const FieldSpec& f, std::size_t m1, std::size_t m2,
                                       std::size_t n1) {
  auto ctx = projective_context<T>(n, {-2, -1, 0}, f);
  return morphism_setting(ctx, 0, 1, 2, m1, m2, n1);
}

// f1 (quadrics) and f2 (linear forms), one entry per copy of O; M1 = M2 = 1.
template <class T>
ChainPoint<T> morphism_point(const ChainSpace<T>& c, const std::vector<std::string>& f1,
                             const std::vector<std::string>& f2) {
  std::size_t n1 = c.terms[1][0].mult;
  if (c.terms[0][0].mult != 1 || c.terms[0][1].mult != 1 || f1.size() != n1 || f2.size() != n1)
    throw std::invalid_argument("morphism_point needs M1 = M2 = 1 and one form per copy of the target");
  auto x = zero_chain(c);
  auto e1 = c.terms[0][0].object, e2 = c.terms[0][1].object, t = c.terms[1][0].object;
  for (std::size_t y = 0; y < n1; ++y) {
    set_entry_form(x.blocks[0][0][0], n1, y, 0, parse_form(c.ctx, e1, t, f1[y]));
    set_entry_form(x.blocks[0][1][0], n1, y, 0, parse_form(c.ctx, e2, t, f2[y]));
  }
  return x;
}

inline std::string var(std::size_t i) { return "x" + std::to_string(i); }

// n1 = 2p: f2 = (z1..zp, 0..0), f1 = (z2²..z_{p+1}², z1², z1z2..z1zp), z_i = x_{i-1}.
inline std::pair<std::vector<std::string>, std::vector<std::string>> pathological_forms(std::size_t n, std::size_t p) {
  if (p == 0 || p > n) throw std::invalid_argument("need 1 <= p <= n");
  std::vector<std::string> f1, f2;
  for (std::size_t i = 0; i < p; ++i) f1.push_back(var(i + 1) + "^2");
  f1.push_back("x0^2");
  for (std::size_t i = 1; i < p; ++i) f1.push_back("x0*" + var(i));
  for (std::size_t i = 0; i < 2 * p; ++i) f2.push_back(i < p ? var(i) : "0");
  return {f1, f2};
}

// f2 with image spanned by the first k copies; f1 fixed so that every unipotent translate keeps rank n1.
inline std::pair<std::vector<std::string>, std::vector<std::string>> factored_forms(std::size_t k) {
  if (k == 0 || k > 3) throw std::invalid_argument("factored morphism on P2 needs 1 <= k <= 3");
  std::vector<std::string> f1{"x1^2", "x2^2", "x0*x1", "x1*x2"}, f2;
  for (std::size_t i = 0; i < 4; ++i) f2.push_back(i < k ? var(i) : "0");
  return {f1, f2};
}

// ---- Quotient model for the P^2 complexes with M1 = 3 ----

struct QuotientModel {
  std::size_t dim_e = 0;       // {(q1,q2,q3) : Σ z_i q_i = 0}
  std::size_t dim_h = 0;       // {(φ1,φ2,φ3) : Σ φ_i z_i = 0}
  std::size_t min_rank = 0;    // rank of Φ(z0) over the points tried
  std::size_t max_rank = 0;
  std::size_t points = 0;
  bool image_in_e = true;      // z0·H' ⊂ E
  std::size_t coker_rank() const { return dim_e - min_rank; }
  std::size_t dimension() const { return 2 + coker_rank() - 1; }  // P(coker) over P^2
};

// Every nonzero z0 for a prime field; the coordinate vectors and `extra` random ones over Q.
template <class T>
QuotientModel quotient_model(const FieldSpec& f, std::size_t extra = 20, std::uint64_t seed = 1) {
  auto ctx = projective_context<T>(2, {0, 1, 2, 3}, f);
  std::size_t o0 = 0, o1 = 1, o2 = 2, o3 = 3;
  auto z = [&](std::size_t i) { return parse_form(ctx, o0, o1, var(i)); };
  // (q1,q2,q3) ↦ Σ q_i∘z_i in Hom(O(0),O(3)); (φ1,φ2,φ3) ↦ Σ φ_i∘z_i in Hom(O(0),O(2)).
  Matrix<T> me(ctx.dim(o0, o3), 3 * ctx.dim(o1, o3), f), mh(ctx.dim(o0, o2), 3 * ctx.dim(o1, o2), f);
  for (std::size_t i = 0; i < 3; ++i) {
    me.set_block(0, i * ctx.dim(o1, o3), ctx.pre(o0, o1, o3, z(i)));
    mh.set_block(0, i * ctx.dim(o1, o2), ctx.pre(o0, o1, o2, z(i)));
  }
  auto e = Subspace<T>::span(kernel_rows(me));
  auto h = kernel_rows(mh);
  QuotientModel q;
  q.dim_e = e.dim();
  q.dim_h = h.rows();
  q.min_rank = std::numeric_limits<std::size_t>::max();
  auto visit = [&](const Vec<T>& z0) {
    // φ_i ↦ z0∘φ_i in Hom(O(1),O(3)), z0 read in Hom(O(2),O(3))
    auto mult = ctx.post(o1, o2, o3, z0);
    Matrix<T> phi(3 * ctx.dim(o1, o3), 3 * ctx.dim(o1, o2), f);
    for (std::size_t i = 0; i < 3; ++i) phi.set_block(i * mult.rows(), i * mult.cols(), mult);
    auto img = phi * h.transpose();
    q.image_in_e = q.image_in_e && e.contains_columns(img);
    auto r = rank(img);
    q.min_rank = std::min(q.min_rank, r);
    q.max_rank = std::max(q.max_rank, r);
    ++q.points;
  };
  std::size_t d = ctx.dim(o2, o3);
  if (f.is_prime()) {
    std::vector<std::uint64_t> digits(d, 0);
    while (true) {
      std::size_t i = d;
      while (i > 0 && ++digits[i - 1] == f.p) digits[--i] = 0;
      if (i == 0) break;
      Vec<T> z0(d);
      for (std::size_t j = 0; j < d; ++j) z0[j] = Scalar<T>::from_int(static_cast<std::int64_t>(digits[j]), f);
      visit(z0);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coef(-3, 3);
    for (std::size_t t = 0; t < d + extra; ++t) {
      Vec<T> z0(d, Scalar<T>::from_int(0, f));
      if (t < d) {
        z0[t] = Scalar<T>::from_int(1, f);
      } else {
        while (std::all_of(z0.begin(), z0.end(), [](const T& v) { return Scalar<T>::is_zero(v); }))
          for (auto& v : z0) v = Scalar<T>::from_int(coef(rng), f);
      }
      visit(z0);
    }
  }
  return q;
}

// ---- Proposition-direction suite ----

enum class Proposition { first_mutation, second_mutation, direct_morphism, indirect_morphism };

inline const char* proposition_name(Proposition p) {
  switch (p) {
    case Proposition::first_mutation: return "first mutation";
    case Proposition::second_mutation: return "second mutation";
    case Proposition::direct_morphism: return "direct morphism";
    default: return "indirect morphism";
  }
}

struct PropositionStats {
  Proposition which = Proposition::first_mutation;
  std::size_t instances = 0;
  std::size_t premise_semistable = 0;  // mutated point semistable for the full mutated group
  std::size_t premise_stable = 0;
  std::size_t counterexamples = 0;     // premise holds, conclusion fails
  std::vector<std::string> failures;
  // Premise read for the reductive part only, at the lift the mutation happened to choose.
  // Differs from the above only when the mutated space still has a unipotent term.
  std::size_t reductive_premise = 0;
  std::size_t reductive_counterexamples = 0;
  std::vector<std::string> reductive_failures;
};

namespace detail {

inline Rational pick(std::mt19937_64& rng, int lo, int hi) {
  return Rational(std::uniform_int_distribution<int>(lo, hi)(rng));
}

// Counts one instance; returns whether it is a counterexample.
inline bool tally(std::size_t& premise_ss, std::size_t* premise_st, Verdict mutated, Verdict source) {
  bool bad = false;
  if (mutated != Verdict::unstable) {
    ++premise_ss;
    bad = source == Verdict::unstable;
  }
  if (mutated == Verdict::stable) {
    if (premise_st) ++*premise_st;
    bad = bad || source != Verdict::stable;
  }
  return bad;
}

inline void record(PropositionStats& s, Verdict mutated, Verdict mutated_red, Verdict source, const std::string& tag) {
  ++s.instances;
  auto line = [&](Verdict m) { return tag + ": mutated " + verdict_name(m) + ", source " + verdict_name(source); };
  if (tally(s.premise_semistable, &s.premise_stable, mutated, source)) {
    ++s.counterexamples;
    s.failures.push_back(line(mutated));
  }
  if (tally(s.reductive_premise, nullptr, mutated_red, source)) {
    ++s.reductive_counterexamples;
    s.reductive_failures.push_back(line(mutated_red));
  }
}

}  // namespace detail

// Random instances over F_2 and F_3: mutated point (semi)stable for the transformed polarization
// must imply the same for the source point and source polarization. The mutated point is judged
// for its full group; a fixed lift of f2 is only determined up to the unipotent part, and the
// reductive verdict of one lift does not carry the implication (see reductive_counterexamples).
inline PropositionStats proposition_suite(Proposition which, std::size_t count, std::uint64_t seed) {
  PropositionStats s;
  s.which = which;
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < count; ++t) {
    auto f = FieldSpec::prime(t % 2 ? 3 : 2);
    std::string tag = std::string(proposition_name(which)) + " #" + std::to_string(t) + " over " + f.name();
    if (which == Proposition::first_mutation || which == Proposition::second_mutation) {
      auto c = p2_complex_space<Fp>(f, 1, 1, 1, 1);
      auto x = random_chain_point(c, rng);
      std::size_t a = 3, b = 3;
      Rational l1 = detail::pick(rng, 1, 2), mu1 = detail::pick(rng, -2, 3);
      Rational mu2 = a * mu1 + b * l1 + detail::pick(rng, 1, 4);
      Rational nu1 = -(l1 + mu1 + mu2);
      if (nu1 >= 0) mu2 += 1 - nu1, nu1 = -1;
      std::vector<Rational> w{l1, mu1, mu2, nu1};
      auto first = mutate_chain_left(c, x, 1, "H1");
      Verdict mutated, mutated_red;
      if (which == Proposition::first_mutation) {
        auto pw = pol_first_mutation(l1, mu1, mu2, nu1, a).weights;
        mutated = is_semistable_G(first.space, first.point, pw).verdict;
        mutated_red = is_semistable_red(first.space, first.point, pw).verdict;
      } else {
        auto second = mutate_chain_left(first.space, first.point, 0, "K1");
        auto pw = pol_second_mutation(l1, mu1, mu2, nu1, a, b).weights;
        mutated = mutated_red = is_semistable_red(second.space, second.point, pw).verdict;
      }
      detail::record(s, mutated, mutated_red, is_semistable_G(c, x, w).verdict, tag);
    } else {
      std::size_t n1 = 2 + t % 2;
      auto setting = pn_morphism_setting<Fp>(2, f, 1, 1, n1);
      const auto& c = setting.space;
      auto x = random_chain_point(c, rng);
      long a = static_cast<long>(setting.stats.a);
      // ρ = λ2/λ1 above the threshold where the transformed weights are admissible
      Rational step(std::uniform_int_distribution<int>(1, 24)(rng), 4);
      Rational rho = which == Proposition::direct_morphism ? a + step : Rational(1, a) + step / 4;
      auto pol = polarization_from_rho(rho, 1, 1, n1);
      Rational l1 = pol.weights[0], l2 = pol.weights[1], mu1 = pol.weights[2];
      auto w = morphism_weights(pol);
      Verdict mutated, mutated_red;
      if (which == Proposition::direct_morphism) {
        auto m = mutate_chain_left(c, x, 0, "H1");
        mutated = mutated_red =
            is_semistable_red(m.space, m.point, pol_direct_morphism(l1, l2, mu1, setting.stats.a).weights).verdict;
      } else {
        auto [d, y] = dual_morphism(c, x);
        auto m = mutate_chain_left(d, y, 1, "G1");
        auto ind = pol_indirect_morphism(l1, l2, setting.stats.a, 1, 1, n1).weights;  // (1/q, ν2, ν1)
        std::vector<Rational> mw{ind[2], ind[1], -ind[0]};
        mutated = is_semistable_G(m.space, m.point, mw).verdict;
        mutated_red = is_semistable_red(m.space, m.point, mw).verdict;
      }
      detail::record(s, mutated, mutated_red, is_semistable_G(c, x, w).verdict, tag);
    }
  }
  return s;
}

// ---- Scenarios ----

inline std::string str(const Rational& r) { return rat_str(r); }
inline std::string str(std::size_t v) { return std::to_string(v); }

inline std::string list_str(const std::vector<Rational>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + rat_str(v[i]);
  return s + "}";
}

inline ScenarioReport run_p2_complex() {
  ScenarioReport r{"p2-complex", {}, {}};
  auto q = FieldSpec::rationals();
  auto c = p2_complex_space<Rational>(q, 1, 3, 1, 1);
  auto x = syzygy_point(c, explicit_syzygy_first(), explicit_syzygy_second());
  r.check("explicit point satisfies the syzygy relation", chain_residual(c, x).ok, "published");
  auto bad = syzygy_point(c, {"0", "0", "0", "x0^2"}, {"0", "0", "0", "x0"});
  r.check("q0 z0 = x0^3 is rejected", !chain_residual(c, bad).ok, "trivial");

  std::vector<Rational> w{1, 1, 7, -11};
  r.notes.push_back("weights (lambda1, mu1, mu2, nu1) = (1, 1, 7, -11), mu2 > (n+1) mu1 + n(n+1)/2");
  auto pv = semistable_G_over_primes(c, x, w, {5, 7});
  for (const auto& [p, v] : pv.per_prime)
    r.add("G-verdict of the explicit point mod " + std::to_string(p), "stable", verdict_name(v), "published");
  r.check("verdicts agree across primes", pv.agreed.has_value(), "derived");
  r.add("stabilizer dimension of the explicit point", "1", str(stabilizer_dimension(c, x)), "derived");

  auto model = quotient_model<Fp>(FieldSpec::prime(5));
  auto model_q = quotient_model<Rational>(q);
  r.add("dim E", "8", str(model.dim_e), "derived");
  r.add("dim H'", "3", str(model.dim_h), "derived");
  r.add("rank Phi(z0) at every nonzero z0 over F_5", "3",
        model.min_rank == model.max_rank ? str(model.min_rank) : "varies", "derived");
  r.add("rank Phi(z0) at sample rational z0", "3",
        model_q.min_rank == model_q.max_rank ? str(model_q.min_rank) : "varies", "derived");
  r.check("z0 H' lies in E", model.image_in_e && model_q.image_in_e, "derived");
  r.add("rank coker Phi", "5", str(model_q.coker_rank()), "derived");
  r.add("dim P(coker Phi)", "6", str(model_q.dimension()), "published");
  return r;
}

inline ScenarioReport run_ex2_chambers(std::size_t n = 2) {
  ScenarioReport r{"ex2-chambers", {}, {}};
  std::size_t n1 = n + 2;
  auto walls = singular_values_ex2(n);
  r.add("singular values k/(n+2-k)", list_str(walls), list_str(dimension_walls(1, 1, n1)), "published");

  auto q = FieldSpec::rationals();
  auto setting = pn_morphism_setting<Rational>(n, q, 1, 1, n1);
  MorphismInput in;
  in.a = setting.stats.a;
  in.h11 = setting.stats.h11;
  in.h12 = setting.stats.h12;
  in.a_prime = setting.stats.a_prime;
  in.m1 = 1;
  in.m2 = 1;
  in.n1 = n1;
  for (const auto& [k, v] : published_morphism_constants(n)) in.constants[k] = v;
  if (auto b = rho_boundary(in, "direct")) r.add("direct method threshold on rho", str(Rational(static_cast<long>(n + 1))), str(b->value), "published");
  else r.add("direct method threshold on rho", str(Rational(static_cast<long>(n + 1))), "none", "published");
  if (auto b = rho_boundary(in, "indirect")) r.add("indirect method threshold on rho", "1", str(b->value), "published");
  else r.add("indirect method threshold on rho", "1", "none", "published");

  for (const auto& ch : chambers(walls)) {
    Rational mid = ch.upper < 0 ? Rational(ch.lower + 1) : Rational((ch.lower + ch.upper) / 2);
    auto cert = certify_morphism(morphism_input_at_rho(in, mid));
    std::string which;
    for (const auto& c : cert.certified) which += (which.empty() ? "" : ", ") + c;
    r.notes.push_back("rho in (" + str(ch.lower) + ", " + (ch.upper < 0 ? std::string("inf") : str(ch.upper)) +
                      "): " + (which.empty() ? std::string("no certificate") : which));
  }

  // f2 has n+2 entries in an (n+1)-dim space, so its image misses a hyperplane: unstable past n+1.
  auto f = FieldSpec::prime(3);
  auto sf = pn_morphism_setting<Fp>(n, f, 1, 1, n1);
  std::mt19937_64 rng(7);
  auto w = morphism_weights(polarization_from_rho(Rational(static_cast<long>(n + 2)), 1, 1, n1));
  bool all_unstable = true;
  for (int t = 0; t < 8; ++t)
    all_unstable = all_unstable && is_semistable_red(sf.space, random_chain_point(sf.space, rng), w).verdict ==
                                       Verdict::unstable;
  r.check("every sampled morphism is unstable for rho = n+2", all_unstable, "published");

  if (n == 2) {
    auto f2 = FieldSpec::prime(2);
    auto s2 = pn_morphism_setting<Fp>(2, f2, 1, 1, 4);
    bool precise = true;
    for (std::size_t k = 1; k <= 3; ++k) {
      auto [a1, a2] = factored_forms(k);
      auto x = morphism_point(s2.space, a1, a2);
      for (int num = 1; num < 16; ++num) {
        Rational l2(num, 16);
        auto v = is_semistable_G(s2.space, x, morphism_weights(normalize_polarization(1 - l2, l2, std::nullopt, 1, 1, 4)));
        precise = precise && ((v.verdict == Verdict::unstable) == (l2 > Rational(static_cast<long>(k), 4)));
      }
    }
    r.check("factored morphism is G-unstable exactly when lambda2 > k/n1 (F_2)", precise, "derived");
  }
  return r;
}

inline ScenarioReport run_ex3_pathological(std::size_t n = 2, std::size_t p = 2) {
  ScenarioReport r{"ex3-pathological", {}, {}};
  std::size_t n1 = 2 * p;
  auto [f1, f2] = pathological_forms(n, p);
  auto q = FieldSpec::rationals();
  auto s = pn_morphism_setting<Rational>(n, q, 1, 1, n1);
  auto x = morphism_point(s.space, f1, f2);
  auto stab = stabilizer_dimension(s.space, x);
  r.add("stabilizer dimension at least 2", "true", stab >= 2 ? "true" : "false", "published");
  r.notes.push_back("stabilizer dimension " + std::to_string(stab));
  // walls in ρ = λ2/λ1 read as λ2 = ρ/(1+ρ); f2 reaches at most n of the target copies
  std::vector<Rational> derived;
  for (const auto& w : dimension_walls(1, 1, n1))
    if (Rational l2 = w / (1 + w); l2 <= Rational(static_cast<long>(n), static_cast<long>(n1))) derived.push_back(l2);
  r.add("singular values of lambda2", list_str(singular_values_ex3(n, n1)), list_str(derived), "derived");
  auto fs = FieldSpec::prime(5);
  auto sp = pn_morphism_setting<Fp>(n, fs, 1, 1, n1);
  auto xp = morphism_point(sp.space, f1, f2);
  for (auto l2 : {Rational(1, 5), Rational(2, 5)}) {
    auto w = morphism_weights(normalize_polarization(1 - l2, l2, std::nullopt, 1, 1, n1));
    r.add("G-verdict over F_5 at lambda2 = " + str(l2), "stable", verdict_name(is_semistable_G(sp.space, xp, w).verdict),
          "published");
  }
  return r;
}

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> v{"p2-complex", "ex2-chambers", "ex3-pathological"};
  return v;
}

inline ScenarioReport run_scenario(const std::string& name) {
  if (name == "p2-complex") return run_p2_complex();
  if (name == "ex2-chambers") return run_ex2_chambers();
  if (name == "ex3-pathological") return run_ex3_pathological();
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace cmut
