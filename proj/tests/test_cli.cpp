#include <catch_amalgamated.hpp>

#include "cmut/scenarios.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace cmut;
namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

const std::string bin = env_or("CMUT_BIN", "./cmut");
const std::string data = env_or("CMUT_DATA", "data");

struct Run {
  int code = -1;
  std::string out;
  Json json() const { return Json::parse(out); }
};

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "cmut_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

Run run(const std::string& args) {
  auto out = scratch("stdout.txt");
  std::string cmd = bin + " " + args + " > " + out.string() + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  r.out.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string d(const std::string& file) { return data + "/" + file; }

void write(const fs::path& p, const Json& j) { std::ofstream(p) << j.dump(); }

}  // namespace

TEST_CASE("validate reports problems and input errors") {
  auto good = run("validate --kind point --space " + d("p2_complex.space.json") + " " + d("p2_complex.point.json"));
  CHECK(good.code == 0);
  CHECK(good.json()["valid"] == true);

  auto bad = run("validate --kind point --space " + d("p2_complex.space.json") + " " + d("p2_complex_bad.point.json"));
  CHECK(bad.code == 1);
  CHECK(bad.json()["problems"].size() == 1);

  CHECK(run("validate --kind space " + d("malformed.json")).code == 2);
  CHECK(run("validate --kind space " + d("no_such_file.json")).code == 2);
  CHECK(run("validate --kind type1 " + d("scalar.type1.json")).code == 0);
  CHECK(run("validate --kind type1-point --space " + d("scalar.type1.json") + " " + d("scalar.point.json")).code == 0);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("check agrees with the library") {
  auto r = run("check --space " + d("p2_complex.space.json") + " --point " + d("p2_complex.point.json") + " --pol " +
               d("p2_complex.pol.json") + " --strict --expect stable");
  REQUIRE(r.code == 0);
  auto j = r.json();
  CHECK(j["answer"] == "yes");
  CHECK(j["per_prime"].size() == 2);

  auto f = FieldSpec::prime(5);
  auto c = p2_complex_space<Fp>(f, 1, 3, 1, 1);
  auto x = syzygy_point(c, explicit_syzygy_first(), explicit_syzygy_second());
  CHECK(j["per_prime"][0]["verdict"] == verdict_name(is_semistable_G(c, x, {1, 1, 7, -11}).verdict));

  auto miss = run("check --space " + d("p2_complex.space.json") + " --point " + d("p2_complex.point.json") +
                  " --weights 1,1,7,-11 --expect unstable");
  CHECK(miss.code == 1);

  // unstable for weights favouring the kernel of the second map
  auto un = run("check --field fp:2 --space " + d("morphism_p2.space.json") + " --point " + d("pathological.point.json") +
                " --weights 1/5,4/5,-1/4 --level G");
  REQUIRE(un.code == 0);
  CHECK(un.json()["verdict"] == "unstable");
  CHECK(un.json()["witness_valid"] == true);
  CHECK(un.json()["answer"] == "no");

  CHECK(run("check --space " + d("p2_complex.space.json") + " --point " + d("p2_complex.point.json") + " --weights 1,2")
            .code == 2);
}

TEST_CASE("mutate round trip through the command line") {
  auto fwd = run("mutate --dir 1to2 --space " + d("scalar.type1.json") + " --point " + d("scalar.point.json"));
  REQUIRE(fwd.code == 0);
  auto j = fwd.json();
  CHECK(j["certificate"]["residuals_zero"] == true);
  auto s2 = scratch("type2.json"), y = scratch("type2_point.json");
  write(s2, j["space"]);
  write(y, j["point"]);
  auto back = run("mutate --dir 2to1 --space " + s2.string() + " --point " + y.string());
  REQUIRE(back.code == 0);
  auto b = back.json();
  CHECK(b["certificate"]["residuals_zero"] == true);
  CHECK(b["space"]["dims"] == Json::parse(std::ifstream(d("scalar.type1.json")))["dims"]);

  auto chain = run("mutate --dir chain --term 1 --name H1 --field fp:5 --space " + d("p2_complex.space.json") +
                   " --point " + d("p2_complex.point.json"));
  REQUIRE(chain.code == 0);
  CHECK(chain.json()["certificate"]["chain_ok"] == true);
  CHECK(chain.json()["certificate"]["kernel"] == "H1");
}

TEST_CASE("certify with published and computed constants") {
  auto m = run("certify --setting morphism --ctx " + d("morphism_p2.setting.json") + " --pol " + d("morphism_rho4.pol.json") +
               " --constants published");
  REQUIRE(m.code == 0);
  auto j = m.json();
  CHECK(j["constants_source"] == "published");
  CHECK(j["boundary_rho"]["direct"]["value"] == "3");
  CHECK(std::find(j["certified"].begin(), j["certified"].end(), "direct") != j["certified"].end());

  auto paper = run("certify --setting complex --ctx " + d("p2_complex.setting.json") + " --pol " + d("p2_complex.certify.json") +
                   " --constants paper");
  auto computed = run("certify --setting complex --field fp:101 --ctx " + d("p2_complex.setting.json") + " --pol " +
                      d("p2_complex.certify.json") + " --constants computed");
  REQUIRE(paper.code == 0);
  REQUIRE(computed.code == 0);
  CHECK(paper.json()["boundary_mu2"]["value"] == "6");
  CHECK(paper.json()["certified"] == computed.json()["certified"]);
  CHECK(paper.json()["boundary_mu2"] == computed.json()["boundary_mu2"]);

  // computed constants over Q would need an infinite search
  CHECK(run("certify --setting complex --ctx " + d("p2_complex.setting.json") + " --pol " + d("p2_complex.certify.json") +
            " --constants computed")
            .code == 2);
}

TEST_CASE("constants, budgets and report formats") {
  auto tree = run("constants --field fp:101 --setting morphism --ctx " + d("morphism_p2.setting.json") + " --name c0p");
  REQUIRE(tree.code == 0);
  CHECK(tree.json()["constants"]["c0p"]["value"] == "3/2");
  auto csv = run("constants --field fp:101 --setting morphism --ctx " + d("morphism_p2.setting.json") +
                 " --name c0p --report csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("key,value\n", 0) == 0);
  CHECK(csv.out.find("constants.c0p.value,3/2\n") != std::string::npos);

  auto pub = run("constants --published --n 2 --setting complex");
  REQUIRE(pub.code == 0);
  CHECK(pub.json()["constants"]["c2"] == "1/2");

  CHECK(run("constants --budget 10 --field fp:101 --setting morphism --ctx " + d("morphism_p2.setting.json") + " --mode exact")
            .code == 3);
}

TEST_CASE("chambers lists walls and verdicts") {
  auto r = run("chambers --m1 1 --m2 1 --n1 4 --space " + d("morphism_p2.space.json") + " --point " +
               d("pathological.point.json"));
  REQUIRE(r.code == 0);
  auto j = r.json();
  CHECK(j["walls_rho"] == Json::array({"1/3", "1", "3"}));
  CHECK(j["chambers"][0]["verdict"] == "stable");
  CHECK(j["chambers"][1]["verdict"] == "stable");
  CHECK(j["on_walls"][1]["verdict"] == "strictly-semi-stable");
  CHECK(j["chambers"][2]["verdict"] == "unstable");
}

TEST_CASE("reproduce emits every fact with its source") {
  auto r = run("reproduce ex3-pathological --report csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("scenario,fact,expected,derived,source,ok\n", 0) == 0);
  CHECK(r.out.find(",published,yes\n") != std::string::npos);
  CHECK(r.out.find(",no\n") == std::string::npos);

  auto t = run("reproduce p2-complex");
  REQUIRE(t.code == 0);
  for (const auto& fact : t.json()["reports"][0]["facts"]) {
    CHECK(fact.contains("source"));
    CHECK(fact["ok"] == true);
  }
  CHECK(run("reproduce nonsense").code == 2);
}

TEST_CASE("scenario reports") {
  ScenarioReport r{"demo", {}, {}};
  r.add("a", "1", "1", "trivial");
  r.add("b, quoted \"x\"", "2", "3", "derived");
  CHECK_FALSE(r.ok());
  auto csv = to_csv(r);
  CHECK(csv.find("\"b, quoted \"\"x\"\"\"") != std::string::npos);
  CHECK(to_json(r)["facts"][1]["ok"] == false);
  CHECK_THROWS_AS(run_scenario("nope"), std::invalid_argument);
}

TEST_CASE("matrix pairs of the pathological family") {
  auto [f1, f2] = pathological_forms(3, 3);
  CHECK(f1 == std::vector<std::string>{"x1^2", "x2^2", "x3^2", "x0^2", "x0*x1", "x0*x2"});
  CHECK(f2 == std::vector<std::string>{"x0", "x1", "x2", "0", "0", "0"});
  CHECK_THROWS_AS(pathological_forms(2, 3), std::invalid_argument);
  // n = 3, p = 2: still a point with a stabilizer of dimension at least 2
  auto [g1, g2] = pathological_forms(3, 2);
  auto s = pn_morphism_setting<Rational>(3, FieldSpec::rationals(), 1, 1, 4);
  CHECK(stabilizer_dimension(s.space, morphism_point(s.space, g1, g2)) >= 2);
}

TEST_CASE("quotient model ranks") {
  for (auto p : {2u, 3u}) {
    auto q = quotient_model<Fp>(FieldSpec::prime(p));
    INFO(p);
    CHECK(q.dim_e == 8);
    CHECK(q.dim_h == 3);
    CHECK(q.min_rank == 3);
    CHECK(q.max_rank == 3);
    CHECK(q.points == p * p * p - 1);
    CHECK(q.image_in_e);
    CHECK(q.dimension() == 6);
  }
}

TEST_CASE("proposition suite on a few instances") {
  for (auto p : {Proposition::first_mutation, Proposition::second_mutation, Proposition::direct_morphism,
                 Proposition::indirect_morphism}) {
    auto s = proposition_suite(p, 12, 3);
    INFO(proposition_name(p));
    CHECK(s.instances == 12);
    CHECK(s.counterexamples == 0);
    CHECK(s.premise_stable <= s.premise_semistable);
  }
}

TEST_CASE("a fixed lift can be reductively stable over a G-unstable source") {
  // (z, -u z), (u z0, z0) is conjugate under the unipotent part to a split complex
  auto f = FieldSpec::prime(3);
  auto c = p2_complex_space<Fp>(f, 1, 1, 1, 1);
  auto x = zero_chain(c);
  set_entry_form(x.blocks[0][0][0], 1, 0, 0, parse_form(c.ctx, 0, 1, "x2"));
  set_entry_form(x.blocks[0][0][1], 1, 0, 0, parse_form(c.ctx, 0, 2, "2*x0*x2 + x1*x2 + x2^2"));
  set_entry_form(x.blocks[1][0][0], 1, 0, 0, parse_form(c.ctx, 1, 3, "x0^2 + 2*x0*x1 + 2*x0*x2"));
  set_entry_form(x.blocks[1][1][0], 1, 0, 0, parse_form(c.ctx, 2, 3, "x0"));
  REQUIRE(chain_residual(c, x).ok);
  std::vector<Rational> w{2, -1, 7, -8};
  auto src = is_semistable_G(c, x, w);
  CHECK(src.verdict == Verdict::unstable);
  CHECK(witness_valid(c, x, w, src));
  auto m = mutate_chain_left(c, x, 1, "H1");
  REQUIRE(m.ok());
  auto pw = pol_first_mutation(2, -1, 7, -8, 3).weights;
  CHECK(is_semistable_red(m.space, m.point, pw).verdict == Verdict::stable);
  CHECK(is_semistable_G(m.space, m.point, pw).verdict == Verdict::unstable);
}

TEST_CASE("hand-written files round trip") {
  auto sj = Json::parse(std::ifstream(d("morphism_p2.space.json")));
  auto f = FieldSpec::prime(5);
  auto c = chain_space_from_json<Fp>(sj, f);
  auto x = chain_point_from_json<Fp>(Json::parse(std::ifstream(d("pathological.point.json"))), c);
  auto [f1, f2] = pathological_forms(2, 2);
  CHECK(x == morphism_point(c, f1, f2));
  CHECK(chain_point_from_json<Fp>(chain_point_to_json(x), c) == x);
  auto back = chain_space_from_json<Fp>(chain_space_to_json(c), f);
  CHECK(back.vertex_dims() == c.vertex_dims());
  CHECK(context_to_json(back.ctx) == context_to_json(c.ctx));
}
