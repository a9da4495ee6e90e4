#include "cmut/mutation.hpp"
#include "cmut/scenarios.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace cmut;

namespace {

enum Exit { exit_ok = 0, exit_mismatch = 1, exit_input = 2, exit_budget = 3 };

// Raised for unreadable or malformed files; the message carries the path.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string field;
  std::uint64_t seed = 1;
  std::uint64_t budget = 2'000'000;
  std::string report = "tree";
  std::string out;
};

Json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

// Wraps errors raised while interpreting a file with the file name.
template <class F>
auto from_file(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

FieldSpec field_for(const Common& c, const Json& j) {
  if (!c.field.empty()) return parse_field(c.field);
  for (const Json* node : {&j, j.contains("context") ? &j["context"] : nullptr})
    if (node && node->is_object() && node->contains("field")) return parse_field((*node)["field"].get<std::string>());
  return FieldSpec::rationals();
}

void flatten(const Json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, rows);
  } else if (j.is_array()) {
    if (j.empty()) rows.emplace_back(path, "[]");
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", rows);
  } else {
    rows.emplace_back(path, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

void emit(const Json& j, const Common& c) {
  std::ostringstream os;
  if (c.report == "csv") {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(j, "", rows);
    os << "key,value\n";
    for (const auto& [k, v] : rows) os << csv_field(k) << ',' << csv_field(v) << '\n';
  } else {
    os << j.dump(2) << '\n';
  }
  if (c.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(c.out);
    if (!f) throw InputError(c.out + ": cannot write");
    f << os.str();
  }
}

Rational rational_of(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw InputError(path + ": expected an integer or a rational string");
}

std::vector<Rational> rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_rational(item));
  return out;
}

std::vector<std::uint64_t> prime_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoull(item));
  return out;
}

// ---- validate ----

struct ValidateArgs {
  std::string kind, file, space;
};

template <class T>
Json validate_as(const ValidateArgs& a, const Json& j, const FieldSpec& f) {
  Json out{{"kind", a.kind}, {"file", a.file}, {"field", f.name()}};
  std::vector<std::string> problems;
  auto guard = [&](auto&& body) {
    try {
      body();
    } catch (const std::invalid_argument& e) {
      problems.push_back(e.what());
    }
  };
  if (a.kind == "context") {
    guard([&] {
      auto rep = validate_context(context_from_json<T>(j, f));
      out["checked_triples"] = rep.checked_triples;
      for (const auto& v : rep.violations) problems.push_back(v);
    });
  } else if (a.kind == "space") {
    guard([&] {
      auto c = chain_space_from_json<T>(j, f);
      out["vertices"] = c.vertex_names();
      out["dims"] = c.vertex_dims();
    });
  } else if (a.kind == "point") {
    if (a.space.empty()) throw InputError("validate --kind point needs --space");
    auto sj = load(a.space);
    auto c = from_file(a.space, [&] { return chain_space_from_json<T>(sj, f); });
    guard([&] {
      auto x = chain_point_from_json<T>(j, c);
      auto r = chain_residual(c, x);
      if (!r.ok) problems.push_back("composite " + r.where + " is nonzero: " + r.value);
    });
  } else if (a.kind == "type1" || a.kind == "type2") {
    guard([&] {
      auto vs = a.kind == "type1" ? type1_from_json<T>(j, f).violations() : type2_from_json<T>(j, f).violations();
      for (const auto& v : vs) problems.push_back(v.what + (v.witness.empty() ? "" : " (" + v.witness + ")"));
    });
  } else if (a.kind == "type1-point" || a.kind == "type2-point") {
    if (a.space.empty()) throw InputError("validate --kind " + a.kind + " needs --space");
    auto sj = load(a.space);
    guard([&] {
      std::pair<bool, Vec<T>> r;
      if (a.kind == "type1-point") {
        auto s = from_file(a.space, [&] { return type1_from_json<T>(sj, f); });
        r = is_point(s, type1_point_from_json<T>(j, s));
      } else {
        auto s = from_file(a.space, [&] { return type2_from_json<T>(sj, f); });
        r = is_point(s, type2_point_from_json<T>(j, s));
      }
      if (!r.first) problems.push_back("defining equations fail, residual " + vec_str(r.second));
    });
  } else {
    throw InputError("unknown kind '" + a.kind + "'");
  }
  out["valid"] = problems.empty();
  out["problems"] = problems;
  return out;
}

int run_validate(const ValidateArgs& a, const Common& c) {
  auto j = load(a.file);
  auto f = field_for(c, a.space.empty() ? j : load(a.space));
  auto out = f.is_prime() ? validate_as<Fp>(a, j, f) : validate_as<Rational>(a, j, f);
  emit(out, c);
  return out["valid"].get<bool>() ? exit_ok : exit_mismatch;
}

// ---- mutate ----

struct MutateArgs {
  std::string dir, space, point, name = "K";
  std::size_t term = 0;
};

template <class T>
Json mutate_as(const MutateArgs& a, const Json& sj, const Json& pj, const FieldSpec& f) {
  if (a.dir == "1to2") {
    auto s = from_file(a.space, [&] { return type1_from_json<T>(sj, f); });
    auto x = from_file(a.point, [&] { return type1_point_from_json<T>(pj, s); });
    MutationCertificate cert;
    auto y = mutate_point_1to2(s, x, &cert);
    return {{"direction", a.dir}, {"space", to_json(mutate_space_1to2(s))}, {"point", to_json(y)},
            {"certificate", cert.to_json()}};
  }
  if (a.dir == "2to1") {
    auto s = from_file(a.space, [&] { return type2_from_json<T>(sj, f); });
    auto y = from_file(a.point, [&] { return type2_point_from_json<T>(pj, s); });
    MutationCertificate cert;
    auto x = mutate_point_2to1(s, y, &cert);
    return {{"direction", a.dir}, {"space", to_json(mutate_space_2to1(s))}, {"point", to_json(x)},
            {"certificate", cert.to_json()}};
  }
  if (a.dir == "chain") {
    auto c = from_file(a.space, [&] { return chain_space_from_json<T>(sj, f); });
    auto x = from_file(a.point, [&] { return chain_point_from_json<T>(pj, c); });
    auto m = mutate_chain_left(c, x, a.term, a.name);
    Json hom = Json::array();
    for (const auto& h : m.homology)
      hom.push_back({{"probe", h.probe}, {"before", h.before}, {"after", h.after}, {"ok", h.ok}});
    return {{"direction", a.dir},
            {"space", chain_space_to_json(m.space)},
            {"point", chain_point_to_json(m.point)},
            {"certificate", {{"chain_ok", m.chain_ok}, {"homology", hom}, {"kernel", m.space.ctx.name(m.kernel)}}}};
  }
  throw InputError("unknown direction '" + a.dir + "' (1to2, 2to1, chain)");
}

int run_mutate(const MutateArgs& a, const Common& c) {
  auto sj = load(a.space), pj = load(a.point);
  auto f = field_for(c, sj);
  auto out = f.is_prime() ? mutate_as<Fp>(a, sj, pj, f) : mutate_as<Rational>(a, sj, pj, f);
  emit(out, c);
  if (a.dir == "chain") {
    const auto& cert = out["certificate"];
    bool ok = cert["chain_ok"].get<bool>();
    for (const auto& h : cert["homology"]) ok = ok && h["ok"].get<bool>();
    return ok ? exit_ok : exit_mismatch;
  }
  return out["certificate"]["residuals_zero"].get<bool>() ? exit_ok : exit_mismatch;
}

// ---- check ----

struct CheckArgs {
  std::string space, point, pol, weights, level = "G", method = "auto", primes = "5,7", expect;
  bool strict = false;
};

std::vector<Rational> weights_of(const CheckArgs& a) {
  if (!a.weights.empty()) return rational_list(a.weights);
  if (a.pol.empty()) throw InputError("check needs --pol or --weights");
  auto j = load(a.pol);
  const auto& w = from_file(a.pol, [&]() -> const Json& { return require(j, "weights", "polarization"); });
  std::vector<Rational> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(rational_of(w[i], a.pol + ": weights[" + std::to_string(i) + "]"));
  return out;
}

GOptions g_options(const CheckArgs& a, const Common& c) {
  GOptions o;
  o.budget = c.budget;
  if (a.method == "exhaustive") o.method = GMethod::exhaustive;
  else if (a.method == "fast") o.method = GMethod::fast;
  else if (a.method != "auto") throw InputError("unknown method '" + a.method + "'");
  return o;
}

template <class T>
Json check_prime(const ChainSpace<T>& c, const ChainPoint<T>& x, const std::vector<Rational>& w, const CheckArgs& a,
                 const Common& common) {
  auto v = a.level == "red" ? is_semistable_red(c, x, w, {common.budget}) : is_semistable_G(c, x, w, g_options(a, common));
  auto j = to_json(v, c.vertex_names());
  j["witness_valid"] = v.verdict == Verdict::unstable || (!a.strict && v.verdict == Verdict::strictly_semistable)
                           ? witness_valid(c, x, w, v)
                           : true;
  return j;
}

int run_check(const CheckArgs& a, const Common& common) {
  if (a.level != "red" && a.level != "G") throw InputError("--level must be red or G");
  auto sj = load(a.space), pj = load(a.point);
  auto f = field_for(common, sj);
  auto w = weights_of(a);
  Json out;
  Verdict verdict;
  if (f.is_prime()) {
    auto c = from_file(a.space, [&] { return chain_space_from_json<Fp>(sj, f); });
    auto x = from_file(a.point, [&] { return chain_point_from_json<Fp>(pj, c); });
    if (w.size() != c.vertex_dims().size()) throw InputError("expected " + std::to_string(c.vertex_dims().size()) + " weights");
    if (!chain_residual(c, x).ok) throw InputError(a.point + ": not a point of the chain space");
    out = check_prime(c, x, w, a, common);
    verdict = out["verdict"] == "stable" ? Verdict::stable
              : out["verdict"] == "unstable" ? Verdict::unstable
                                             : Verdict::strictly_semistable;
  } else {
    // rational points are judged through reductions; the verdicts must agree
    auto c = from_file(a.space, [&] { return chain_space_from_json<Rational>(sj, f); });
    auto x = from_file(a.point, [&] { return chain_point_from_json<Rational>(pj, c); });
    if (w.size() != c.vertex_dims().size()) throw InputError("expected " + std::to_string(c.vertex_dims().size()) + " weights");
    if (!chain_residual(c, x).ok) throw InputError(a.point + ": not a point of the chain space");
    Json per = Json::array();
    std::optional<Verdict> agreed;
    bool same = true;
    for (auto p : prime_list(a.primes)) {
      auto [cp, xp] = reduce_chain(c, x, FieldSpec::prime(p));
      auto j = check_prime(cp, xp, w, a, common);
      j["prime"] = p;
      Verdict v = j["verdict"] == "stable" ? Verdict::stable
                  : j["verdict"] == "unstable" ? Verdict::unstable
                                               : Verdict::strictly_semistable;
      if (agreed && *agreed != v) same = false;
      if (!agreed) agreed = v;
      per.push_back(j);
    }
    if (!agreed) throw InputError("--primes is empty");
    out = {{"level", a.level == "red" ? "reductive" : "full-group"},
           {"verdict", same ? verdict_name(*agreed) : "disagreement"},
           {"per_prime", per}};
    if (!same) {
      out["answer"] = "unknown";
      emit(out, common);
      return exit_mismatch;
    }
    verdict = *agreed;
  }
  bool yes = a.strict ? verdict == Verdict::stable : verdict != Verdict::unstable;
  out["question"] = a.strict ? "stable" : "semistable";
  out["answer"] = yes ? "yes" : "no";
  emit(out, common);
  if (!a.expect.empty() && a.expect != verdict_name(verdict)) return exit_mismatch;
  return exit_ok;
}

// ---- settings for constants and certify ----

struct Setting {
  Json context;
  std::map<std::string, std::string> objects;
  std::map<std::string, std::size_t> dims;
  std::optional<std::size_t> projective_n;
};

Setting setting_of(const std::string& path) {
  auto j = load(path);
  return from_file(path, [&] {
    Setting s;
    s.context = require(j, "context", "setting");
    for (const auto& [k, v] : require(j, "objects", "setting").items()) s.objects[k] = v.get<std::string>();
    if (j.contains("dims"))
      for (const auto& [k, v] : j["dims"].items()) s.dims[k] = v.get<std::size_t>();
    if (s.context.contains("projective")) s.projective_n = s.context["projective"]["n"].get<std::size_t>();
    return s;
  });
}

std::size_t dim_or(const Setting& s, const std::string& k, std::size_t fallback) {
  auto it = s.dims.find(k);
  return it == s.dims.end() ? fallback : it->second;
}

template <class T>
std::size_t obj(const CompositionContext<T>& ctx, const Setting& s, const std::string& role) {
  auto it = s.objects.find(role);
  if (it == s.objects.end()) throw InputError("setting: missing object role '" + role + "'");
  return ctx.object(it->second);
}

template <class T>
ComplexObjects complex_objects(const CompositionContext<T>& ctx, const Setting& s) {
  return {obj(ctx, s, "e1"), obj(ctx, s, "f1"), obj(ctx, s, "f2"), obj(ctx, s, "g1")};
}

template <class T>
MorphismObjects morphism_objects(const CompositionContext<T>& ctx, const Setting& s) {
  return {obj(ctx, s, "e1"), obj(ctx, s, "e2"), obj(ctx, s, "f1")};
}

ConstantPolicy policy_of(const Common& c, const std::string& mode, std::size_t threshold) {
  ConstantPolicy p;
  p.budget = c.budget;
  p.seed = c.seed;
  p.exact_threshold = threshold;
  if (mode == "exact") p.force = ConstantMode::exact;
  else if (mode == "sample") p.force = ConstantMode::lower_bound;
  else if (mode != "auto") throw InputError("unknown mode '" + mode + "'");
  return p;
}

// ---- constants ----

struct ConstantsArgs {
  std::string setting_kind = "morphism", ctx, name = "all", mode = "auto";
  std::size_t k = 1, threshold = 6, n = 2;
  bool published = false;
};

int run_constants(const ConstantsArgs& a, const Common& c) {
  bool complex = a.setting_kind == "complex";
  if (!complex && a.setting_kind != "morphism") throw InputError("--setting must be complex or morphism");
  auto names = complex ? complex_constant_names() : morphism_constant_names();
  if (a.name != "all") {
    if (std::find(names.begin(), names.end(), a.name) == names.end()) throw InputError("unknown constant '" + a.name + "'");
    names = {a.name};
  }
  Json out{{"setting", a.setting_kind}, {"k", a.k}, {"constants", Json::object()}};
  if (a.published) {
    auto table = complex ? published_complex_constants(a.n) : published_morphism_constants(a.n);
    out["source"] = "published";
    out["n"] = a.n;
    for (const auto& name : names) out["constants"][name] = rat_str(table.at(name));
    emit(out, c);
    return exit_ok;
  }
  if (a.ctx.empty()) throw InputError("constants needs --ctx or --published");
  auto s = setting_of(a.ctx);
  auto f = c.field.empty() ? field_for(c, s.context) : parse_field(c.field);
  if (!f.is_prime()) throw InputError("computed constants need a prime field (--field fp:<p>)");
  auto ctx = from_file(a.ctx, [&] { return context_from_json<Fp>(s.context, f); });
  auto pol = policy_of(c, a.mode, a.threshold);
  for (const auto& name : names) {
    auto r = complex ? named_constant(ctx, complex_objects(ctx, s), name, a.k, pol)
                     : named_constant(ctx, morphism_objects(ctx, s), name, a.k, pol);
    out["constants"][name] = to_json(r);
  }
  emit(out, c);
  return exit_ok;
}

// ---- chambers ----

struct ChambersArgs {
  std::size_t m1 = 1, m2 = 1, n1 = 2;
  std::string space, point, method = "auto";
};

int run_chambers(const ChambersArgs& a, const Common& c) {
  auto walls = dimension_walls(a.m1, a.m2, a.n1);
  Json jw = Json::array();
  for (const auto& w : walls) jw.push_back(rat_str(w));
  Json out{{"m1", a.m1}, {"m2", a.m2}, {"n1", a.n1}, {"walls_rho", jw}, {"chambers", Json::array()}};
  std::optional<std::pair<ChainSpace<Fp>, ChainPoint<Fp>>> probe;
  if (!a.point.empty()) {
    if (a.space.empty()) throw InputError("chambers --point needs --space");
    auto sj = load(a.space), pj = load(a.point);
    auto f = field_for(c, sj);
    if (!f.is_prime()) throw InputError("chamber verdicts need a prime field (--field fp:<p>)");
    auto cs = from_file(a.space, [&] { return chain_space_from_json<Fp>(sj, f); });
    auto dims = cs.vertex_dims();
    if (dims != std::vector<std::size_t>{a.m1, a.m2, a.n1})
      throw InputError(a.space + ": vertex dims differ from --m1/--m2/--n1");
    probe.emplace(cs, from_file(a.point, [&] { return chain_point_from_json<Fp>(pj, cs); }));
  }
  CheckArgs ca;
  ca.method = a.method;
  auto verdict_at = [&](const Rational& rho) {
    auto w = morphism_weights(polarization_from_rho(rho, a.m1, a.m2, a.n1));
    return verdict_name(is_semistable_G(probe->first, probe->second, w, g_options(ca, c)).verdict);
  };
  for (const auto& ch : chambers(walls)) {
    Rational mid = ch.upper < 0 ? Rational(ch.lower + 1) : Rational((ch.lower + ch.upper) / 2);
    Json j{{"lower", rat_str(ch.lower)}, {"upper", ch.upper < 0 ? std::string("inf") : rat_str(ch.upper)}, {"sample_rho", rat_str(mid)}};
    if (probe) j["verdict"] = verdict_at(mid);
    out["chambers"].push_back(j);
  }
  if (probe) {
    Json on = Json::array();
    for (const auto& w : walls) on.push_back({{"rho", rat_str(w)}, {"verdict", verdict_at(w)}});
    out["on_walls"] = on;
  }
  emit(out, c);
  return exit_ok;
}

// ---- certify ----

struct CertifyArgs {
  std::string setting_kind = "morphism", ctx, pol, constants = "published", mode = "auto";
  std::size_t threshold = 6;
};

ConstantTable published_table(const Setting& s, bool complex, std::size_t k1, std::size_t k2) {
  if (!s.projective_n) throw InputError("published constants need a projective context");
  if (k1 != 1 || k2 != 1) throw InputError("published constants are tabulated at k = 1 only");
  return complex ? published_complex_constants(*s.projective_n) : published_morphism_constants(*s.projective_n);
}

Json boundary_json(const std::optional<Boundary>& b) {
  if (!b) return nullptr;
  return {{"value", rat_str(b->value)}, {"holds_at_boundary", b->holds_at_boundary}};
}

int run_certify(const CertifyArgs& a, const Common& c) {
  bool complex = a.setting_kind == "complex";
  if (!complex && a.setting_kind != "morphism") throw InputError("--setting must be complex or morphism");
  const std::string source = a.constants == "paper" ? "published" : a.constants;
  if (source != "published" && source != "computed") throw InputError("--constants must be published or computed");
  auto s = setting_of(a.ctx);
  auto pj = load(a.pol);
  auto f = c.field.empty() ? field_for(c, s.context) : parse_field(c.field);
  if (source == "computed" && !f.is_prime()) throw InputError("computed constants need a prime field (--field fp:<p>)");
  // Hom dimensions do not depend on the field; exact rationals keep the parse independent of p
  auto qf = FieldSpec::rationals();
  auto field = source == "computed" ? f : qf;
  auto ctx_q = from_file(a.ctx, [&] { return context_from_json<Rational>(s.context, qf); });
  auto pol = policy_of(c, a.mode, a.threshold);
  auto rat = [&](const std::string& key) -> std::optional<Rational> {
    if (!pj.contains(key)) return std::nullopt;
    return rational_of(pj[key], a.pol + ": " + key);
  };
  Json out;
  if (complex) {
    auto o = complex_objects(ctx_q, s);
    ComplexInput in;
    in.a = ctx_q.dim(o.f1, o.f2);
    // Hom(E1,H1) with H1 the kernel of F1⊗Hom(F1,F2) → F2, assuming the evaluation is onto
    long b = static_cast<long>(in.a * ctx_q.dim(o.e1, o.f1)) - static_cast<long>(ctx_q.dim(o.e1, o.f2));
    if (b < 0) throw InputError(a.ctx + ": Hom(E1,H1) would have negative dimension");
    in.b = static_cast<std::size_t>(b);
    in.l1 = dim_or(s, "l1", 1), in.m1 = dim_or(s, "m1", 1), in.m2 = dim_or(s, "m2", 1), in.n1 = dim_or(s, "n1", 1);
    auto l = rat("lambda1"), m1 = rat("mu1"), m2 = rat("mu2");
    if (!l || !m1 || !m2) throw InputError(a.pol + ": complex polarizations need lambda1, mu1, mu2 (nu1 optional)");
    in.lambda1 = *l, in.mu1 = *m1;
    in = complex_input_at_mu2(in, *m2);
    if (auto n = rat("nu1"); n && *n != in.nu1) throw InputError(a.pol + ": nu1 violates the zero-sum condition");
    if (source == "published") {
      in.constants = published_table(s, true, in.m2, in.m2);
    } else {
      auto ctx = context_from_json<Fp>(s.context, field);
      auto ob = complex_objects(ctx, s);
      for (const auto& name : complex_constant_names()) in.constants[name] = named_constant(ctx, ob, name, in.m2, pol).value;
    }
    auto cert = certify_complex(in);
    out = to_json(cert);
    out["boundary_mu2"] = boundary_json(mu2_boundary(in, "first+second mutation"));
    out["a"] = in.a, out["b"] = in.b;
  } else {
    auto o = morphism_objects(ctx_q, s);
    auto st = context_stats(ctx_q, o.e1, o.e2, o.f1);
    MorphismInput in;
    in.a = st.a, in.h11 = st.h11, in.h12 = st.h12, in.a_prime = st.a_prime;
    in.m1 = dim_or(s, "m1", 1), in.m2 = dim_or(s, "m2", 1), in.n1 = dim_or(s, "n1", 1);
    if (auto rho = rat("rho")) {
      in = morphism_input_at_rho(in, *rho);
    } else {
      auto l1 = rat("lambda1"), l2 = rat("lambda2");
      if (!l1 || !l2) throw InputError(a.pol + ": morphism polarizations need rho or lambda1, lambda2");
      auto p = normalize_polarization(*l1, *l2, std::nullopt, in.m1, in.m2, in.n1);
      in.lambda1 = p.weights[0], in.lambda2 = p.weights[1];
    }
    if (source == "published") {
      in.constants = published_table(s, false, in.m1, in.m2);
    } else {
      auto ctx = context_from_json<Fp>(s.context, field);
      auto ob = morphism_objects(ctx, s);
      for (const auto& name : morphism_constant_names())
        in.constants[name] = named_constant(ctx, ob, name, name == "c0" ? in.m2 : in.m1, pol).value;
    }
    auto cert = certify_morphism(in);
    out = to_json(cert);
    Json bounds = Json::object();
    for (auto th : {"direct", "indirect transfer", "indirect"}) bounds[th] = boundary_json(rho_boundary(in, th));
    out["boundary_rho"] = bounds;
    out["a"] = in.a, out["a_prime"] = in.a_prime;
  }
  out["constants_source"] = source;
  emit(out, c);
  return exit_ok;
}

// ---- reproduce ----

struct ReproduceArgs {
  std::string name = "all";
  std::size_t count = 200;
};

int run_reproduce(const ReproduceArgs& a, const Common& c) {
  std::vector<ScenarioReport> reports;
  auto names = a.name == "all" ? scenario_names() : std::vector<std::string>{a.name};
  if (a.name == "propositions") names.clear();
  for (const auto& n : names) {
    if (std::find(scenario_names().begin(), scenario_names().end(), n) == scenario_names().end())
      throw InputError("unknown scenario '" + n + "'");
    reports.push_back(run_scenario(n));
  }
  if (a.name == "all" || a.name == "propositions") {
    ScenarioReport r{"propositions", {}, {}};
    for (auto p : {Proposition::first_mutation, Proposition::second_mutation, Proposition::direct_morphism,
                   Proposition::indirect_morphism}) {
      auto s = proposition_suite(p, a.count, c.seed);
      r.add(std::string(proposition_name(p)) + " counterexamples in " + std::to_string(s.instances) + " instances", "0",
            std::to_string(s.counterexamples), "derived");
      r.notes.push_back(std::string(proposition_name(p)) + ": premise held " + std::to_string(s.premise_semistable) +
                        " times; reductive-only premise gives " + std::to_string(s.reductive_counterexamples) +
                        " counterexamples");
      for (const auto& f : s.failures) r.notes.push_back(f);
    }
    reports.push_back(r);
  }
  bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.ok(); });
  if (c.report == "csv") {
    std::string text;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto t = to_csv(reports[i]);
      text += i == 0 ? t : t.substr(t.find('\n') + 1);
    }
    if (c.out.empty()) std::cout << text;
    else std::ofstream(c.out) << text;
  } else {
    Json j = Json::array();
    for (const auto& r : reports) j.push_back(to_json(r));
    emit({{"ok", ok}, {"reports", j}}, c);
  }
  return ok ? exit_ok : exit_mismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact mutation and stability computations for chain complexes of quiver type"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--field", common.field, "q or fp:<p>; overrides the field recorded in input files");
  app.add_option("--seed", common.seed, "seed for sampling");
  app.add_option("--budget", common.budget, "maximum number of enumerated objects");
  app.add_option("--report", common.report, "tree or csv")->check(CLI::IsMember({"tree", "csv"}));
  app.add_option("--out", common.out, "write the report to a file");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "check a context, space or point file");
  validate->add_option("file", va.file)->required();
  validate->add_option("--kind", va.kind, "context, space, point, type1, type2, type1-point, type2-point")->required();
  validate->add_option("--space", va.space, "space file for point kinds");

  MutateArgs ma;
  auto* mutate = app.add_subcommand("mutate", "mutate a point");
  mutate->add_option("--dir", ma.dir, "1to2, 2to1 or chain")->required();
  mutate->add_option("--space", ma.space)->required();
  mutate->add_option("--point", ma.point)->required();
  mutate->add_option("--term", ma.term, "chain: term carrying the mutated summands");
  mutate->add_option("--name", ma.name, "chain: name of the adjoined kernel");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "(semi-)stability of a chain point");
  check->add_option("--space", ca.space)->required();
  check->add_option("--point", ca.point)->required();
  check->add_option("--pol", ca.pol, "polarization file {\"weights\": [...]}");
  check->add_option("--weights", ca.weights, "comma-separated weights in vertex order");
  check->add_option("--level", ca.level, "red or G");
  check->add_flag("--strict", ca.strict, "ask for stability instead of semi-stability");
  check->add_option("--method", ca.method, "auto, exhaustive or fast");
  check->add_option("--primes", ca.primes, "reductions used for rational points");
  check->add_option("--expect", ca.expect, "stable, strictly-semistable or unstable; exit 1 otherwise");

  ConstantsArgs ka;
  auto* constants = app.add_subcommand("constants", "codimension constants");
  constants->add_option("--setting", ka.setting_kind, "complex or morphism");
  constants->add_option("--ctx", ka.ctx, "setting file with context, objects and dims");
  constants->add_option("--name", ka.name, "constant name or all");
  constants->add_option("--k", ka.k);
  constants->add_option("--mode", ka.mode, "auto, exact or sample");
  constants->add_option("--exact-threshold", ka.threshold, "largest ambient dimension searched exactly in auto mode");
  constants->add_flag("--published", ka.published, "print the published table for P^n instead");
  constants->add_option("--n", ka.n, "n for --published");

  ChambersArgs ha;
  auto* chambers_cmd = app.add_subcommand("chambers", "walls and chambers in rho = lambda2/lambda1");
  chambers_cmd->add_option("--m1", ha.m1);
  chambers_cmd->add_option("--m2", ha.m2);
  chambers_cmd->add_option("--n1", ha.n1);
  chambers_cmd->add_option("--space", ha.space, "morphism space for per-chamber verdicts");
  chambers_cmd->add_option("--point", ha.point);
  chambers_cmd->add_option("--method", ha.method, "auto, exhaustive or fast");

  CertifyArgs ra;
  auto* certify = app.add_subcommand("certify", "existence certificate for a polarization");
  certify->add_option("--setting", ra.setting_kind, "complex or morphism");
  certify->add_option("--ctx", ra.ctx, "setting file with context, objects and dims")->required();
  certify->add_option("--pol", ra.pol, "polarization file")->required();
  certify->add_option("--constants", ra.constants, "published (alias paper) or computed");
  certify->add_option("--mode", ra.mode, "constant search mode for computed constants");
  certify->add_option("--exact-threshold", ra.threshold);

  ReproduceArgs pa;
  auto* reproduce = app.add_subcommand("reproduce", "rerun a worked example");
  reproduce->add_option("name", pa.name, "p2-complex, ex2-chambers, ex3-pathological, propositions or all");
  reproduce->add_option("--count", pa.count, "instances per proposition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_input;
  }

  try {
    if (*validate) return run_validate(va, common);
    if (*mutate) return run_mutate(ma, common);
    if (*check) return run_check(ca, common);
    if (*constants) return run_constants(ka, common);
    if (*chambers_cmd) return run_chambers(ha, common);
    if (*certify) return run_certify(ra, common);
    if (*reproduce) return run_reproduce(pa, common);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return exit_budget;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_input;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_input;
  } catch (const Json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_input;
  }
  return exit_input;
}
