// Scenario parsing, hashing, execution artifacts, and independent
// verification of emitted reports.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nev/catalogue.hpp"
#include "nev/runner.hpp"

using namespace nev;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("nev-test-" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const char* kMinimal =
    "name = mini\n"
    "domain = plane\n"
    "[growth]\n"
    "target = exp(z)\n"
    "grid = 2:6\n";

}  // namespace

TEST_CASE("scenario parsing: full form and defaults", "[cli][parse]") {
    Scenario sc = parse_scenario(
        "name = demo\n"
        "domain = plane\n"
        "kind = qdifference\n"
        "q = 3\n"
        "coeff.0 = 3\n"
        "coeff.1 = -4\n"
        "solution.0 = z\n"
        "grid = 2:20\n"
        "tol = 1e-8\n"
        "trim = 0.2\n"
        "# a comment line\n"
        "[residual]\n"
        "[dominance]\n"
        "condition = characteristic\n"
        "expect_p = 0\n");
    CHECK(sc.name == "demo");
    CHECK(sc.op.kind == OpKind::q_difference);
    CHECK(sc.op.q == cplx(3.0, 0.0));
    CHECK(sc.n() == 2);
    CHECK(sc.solutions.size() == 1);
    CHECK(sc.tol == 1e-8);
    CHECK(sc.trim == 0.2);
    REQUIRE(sc.analyses.size() == 2);
    CHECK(sc.analyses[0].kind == "residual");
    CHECK(sc.analyses[1].get("expect_p") == "0");
    // explicit grid
    auto g = sc.grid();
    CHECK(g.front() == 2.0);
    CHECK(g.back() <= 20.0);
    CHECK(g.back() > 20.0 / 1.15);  // geometric grid stops at the last point under hi

    Scenario d = parse_scenario(kMinimal);
    CHECK(d.op.kind == OpKind::derivative);
    CHECK(d.tol == 1e-6);
    CHECK(d.trim == 0.10);
}

TEST_CASE("scenario parsing rejects malformed input", "[cli][parse]") {
    CHECK_THROWS_AS(parse_scenario("name = x\n"), error);  // no analyses
    CHECK_THROWS_AS(parse_scenario("[growth]\ntarget = exp(z)\n"), error);  // no name
    CHECK_THROWS_AS(parse_scenario("name = x\nbogus = 1\n[growth]\ntarget = z\n"), error);
    CHECK_THROWS_AS(parse_scenario("name = x\ndomain = torus\n[growth]\ntarget = z\n"), error);
    CHECK_THROWS_AS(parse_scenario("name = x\nkind = integral\n[growth]\ntarget = z\n"), error);
    // coeff indices must be contiguous from 0
    CHECK_THROWS_AS(parse_scenario("name = x\ncoeff.1 = z\n[residual]\nsolution.0 = z\n"), error);
    // grid must be lo:hi
    CHECK_THROWS_AS(parse_scenario("name = x\ngrid = 5\n[growth]\ntarget = z\n"), error);
    // growth needs a target
    CHECK_THROWS_AS(parse_scenario("name = x\n[growth]\n"), error);
    // residual needs coefficients and solutions
    CHECK_THROWS_AS(parse_scenario("name = x\n[residual]\n"), error);
    CHECK_THROWS_AS(parse_scenario("name = x\ncoeff.0 = z\n[residual]\n"), error);
}

TEST_CASE("scenario hash is deterministic and content-sensitive", "[cli][hash]") {
    std::string a = kMinimal;
    CHECK(scenario_hash(a) == scenario_hash(a));
    CHECK(scenario_hash(a).size() == 16);
    CHECK(scenario_hash(a) != scenario_hash(a + " "));
}

TEST_CASE("target resolution", "[cli][parse]") {
    Scenario sc = parse_scenario(
        "name = t\n"
        "coeff.0 = exp(2*z)\n"
        "solution.0 = exp(exp(z))\n"
        "[residual]\n");
    CHECK(structurally_equal(resolve_target(sc, "coeff.0"), sc.coeffs[0]));
    CHECK(structurally_equal(resolve_target(sc, "solution.0"), sc.solutions[0]));
    CHECK(structurally_equal(resolve_target(sc, "z^2"), parse("z^2")));
    CHECK_THROWS_AS(resolve_target(sc, "solution.3"), error);
    CHECK_THROWS_AS(resolve_target(sc, "coeff.9"), error);
}

TEST_CASE("the built-in catalogue parses end to end", "[cli][catalogue]") {
    const auto& entries = catalogue();
    CHECK(entries.size() >= 8);
    CHECK(find_catalogue_entry("frei-ex12") != nullptr);
    CHECK(find_catalogue_entry("no-such-entry") == nullptr);
    for (const auto& e : entries) {
        CAPTURE(e.name);
        Scenario sc = parse_scenario(e.text);
        CHECK(sc.name == e.name);
        CHECK(!sc.analyses.empty());
    }
}

TEST_CASE("run_scenario emits artifacts and a consistent report", "[cli][run]") {
    Scenario sc = parse_scenario(find_catalogue_entry("qdiff-poly")->text);
    fs::path dir = fresh_dir("run1");
    RunResult res = run_scenario(sc, dir.string());
    CHECK(res.ok);
    REQUIRE(res.outcomes.size() == sc.analyses.size());
    CHECK(fs::exists(dir / "scenario.txt"));
    CHECK(fs::exists(dir / "report.txt"));
    for (const auto& o : res.outcomes) {
        CHECK(fs::exists(dir / o.artifact));
        CHECK((o.verdict == "PASS" || o.verdict == "CONSISTENT" || o.verdict == "INFO"));
    }
    CHECK(res.report.find("overall PASS") != std::string::npos);

    // a second run is byte-identical
    fs::path dir2 = fresh_dir("run2");
    run_scenario(sc, dir2.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        fs::path other = dir2 / entry.path().filename();
        CAPTURE(entry.path().filename().string());
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
}

TEST_CASE("verification recomputes verdicts from artifacts", "[cli][verify]") {
    Scenario sc = parse_scenario(find_catalogue_entry("gamma-recurrence")->text);
    fs::path dir = fresh_dir("verify");
    RunResult res = run_scenario(sc, dir.string());
    REQUIRE(res.ok);
    CHECK(verify_output(dir.string()).ok);

    // tampering with an artifact flips the recomputed verdict
    fs::path csv = dir / res.outcomes[0].artifact;
    std::string body = slurp(csv);
    auto nl = body.find('\n');
    REQUIRE(nl != std::string::npos);
    spit(csv, body.substr(0, nl + 1) + "0,1,0,0,0,1e300\n");
    VerifyResult tampered = verify_output(dir.string());
    CHECK(!tampered.ok);
    spit(csv, body);  // restore
    CHECK(verify_output(dir.string()).ok);

    // tampering with the scenario text breaks the hash
    fs::path sct = dir / "scenario.txt";
    std::string source = slurp(sct);
    spit(sct, source + "# tweak\n");
    CHECK(!verify_output(dir.string()).ok);
}

TEST_CASE("csv table parsing", "[cli][table]") {
    Table t = parse_table("r,T\n1,2\n3,4\n");
    CHECK(t.cols == std::vector<std::string>{"r", "T"});
    CHECK(t.column("T") == std::vector<double>{2.0, 4.0});
    CHECK_THROWS_AS(t.col("missing"), error);
    CHECK_THROWS_AS(parse_table("a,b\n1\n"), error);  // ragged row
    CHECK_THROWS_AS(parse_table(""), error);
}

TEST_CASE("analysis grids", "[cli][grid]") {
    auto pg = plane_grid(2.0, 30.0);
    CHECK(pg.front() == 2.0);
    CHECK(pg.back() <= 30.0);
    CHECK(pg.back() > 30.0 / 1.15);
    for (size_t i = 1; i < pg.size(); ++i) CHECK(pg[i] > pg[i - 1]);
    auto dg = disc_grid(4, 12);
    for (double r : dg) {
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
    for (size_t i = 1; i < dg.size(); ++i) CHECK(dg[i] > dg[i - 1]);
}
