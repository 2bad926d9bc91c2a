// Scenario-driven front end: run built-in or user scenarios, list the
// catalogue, compute ad-hoc functionals for one expression, and re-verify
// previously emitted output directories.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nev/catalogue.hpp"
#include "nev/runner.hpp"

namespace {

// a catalogue name resolves to the built-in text; anything else is a file path
std::string load_scenario_text(const std::string& ref) {
    if (const nev::CatalogueEntry* e = nev::find_catalogue_entry(ref)) return e->text;
    return nev::detail::read_file(ref);
}

void apply_overrides(nev::Scenario& sc, const std::string& grid, double tol, double trim,
                     unsigned seed, bool tol_set, bool trim_set, bool seed_set) {
    if (!grid.empty()) {
        auto colon = grid.find(':');
        if (colon == std::string::npos) throw nev::error("--grid must be lo:hi");
        sc.grid_lo = std::stod(grid.substr(0, colon));
        sc.grid_hi = std::stod(grid.substr(colon + 1));
        sc.grid_set = true;
    }
    if (tol_set) sc.tol = tol;
    if (trim_set) sc.trim = trim;
    if (seed_set) sc.seed = seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"value-distribution toolkit for linear differential, difference, and "
                 "q-difference equations"};
    app.require_subcommand(1);

    std::string scenario_ref, out_dir = "out", grid_override, expr_text, verify_dir;
    double tol = 1e-6, trim = 0.10;
    unsigned seed = 42;
    bool dump_rays = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory (default: out)");
        cmd->add_option("--grid", grid_override, "grid override lo:hi");
        cmd->add_option("--tol", tol, "quadrature tolerance override");
        cmd->add_option("--trim", trim, "tail-trim fraction override");
        cmd->add_option("--seed", seed, "sample seed override");
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario (built-in name or file path)");
    run->add_option("scenario", scenario_ref, "catalogue name or scenario file")->required();
    add_common(run);

    CLI::App* examples = app.add_subcommand("examples", "list the built-in scenario catalogue");

    CLI::App* analyze = app.add_subcommand("analyze", "growth series of a single expression");
    analyze->add_option("-f,--function", expr_text, "expression to analyze")->required();
    bool disc = false;
    analyze->add_flag("--disc", disc, "treat the expression as a unit-disc function");
    add_common(analyze);

    CLI::App* verify = app.add_subcommand("verify", "recompute verdicts from an output directory");
    verify->add_option("dir", verify_dir, "output directory produced by run")->required();

    CLI::App* solve = app.add_subcommand("solve", "numeric solution growth for a scenario");
    solve->add_option("scenario", scenario_ref, "catalogue name or scenario file")->required();
    solve->add_flag("--dump-rays", dump_rays, "also emit per-ray log|f| as theta,r,log_abs_f");
    add_common(solve);

    CLI::App* dominance = app.add_subcommand("dominance", "dominance-index report for a scenario");
    dominance->add_option("scenario", scenario_ref, "catalogue name or scenario file")->required();
    std::string condition = "characteristic";
    dominance->add_option("--condition", condition, "characteristic | maxmod | circle | area");
    add_common(dominance);

    CLI::App* reduce = app.add_subcommand("reduce", "emit the C_k monomial lists for a scenario");
    reduce->add_option("scenario", scenario_ref, "catalogue name or scenario file")->required();
    int reduce_p = 0;
    reduce->add_option("-p", reduce_p, "reduction index p (default 0)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto overridden = [&](CLI::App* cmd) {
            std::string text = load_scenario_text(scenario_ref);
            nev::Scenario sc = nev::parse_scenario(text);
            apply_overrides(sc, grid_override, tol, trim, seed, cmd->count("--tol") > 0,
                            cmd->count("--trim") > 0, cmd->count("--seed") > 0);
            return sc;
        };

        if (*run) {
            nev::Scenario sc = overridden(run);
            nev::RunResult res = nev::run_scenario(sc, out_dir);
            std::cout << res.report;
            return res.ok ? 0 : 1;
        }
        if (*examples) {
            for (const auto& e : nev::catalogue())
                std::cout << e.name << " - " << e.description << '\n';
            return 0;
        }
        if (*analyze) {
            nev::Expr f = nev::parse(expr_text, disc ? nev::Domain::disc : nev::Domain::plane);
            nev::Scenario sc;
            sc.domain = f.domain();
            if (!grid_override.empty()) {
                auto colon = grid_override.find(':');
                if (colon == std::string::npos) throw nev::error("--grid must be lo:hi");
                sc.grid_lo = std::stod(grid_override.substr(0, colon));
                sc.grid_hi = std::stod(grid_override.substr(colon + 1));
                sc.grid_set = true;
            }
            std::cout << nev::growth_series(f, sc.grid(), tol).to_csv();
            return 0;
        }
        if (*verify) {
            nev::VerifyResult vr = nev::verify_output(verify_dir);
            for (const auto& m : vr.mismatches) std::cerr << m << '\n';
            std::cout << (vr.ok ? "verified" : "verification failed") << '\n';
            return vr.ok ? 0 : 1;
        }
        if (*solve) {
            nev::Scenario sc = overridden(solve);
            if (sc.coeffs.empty()) throw nev::error("solve: scenario has no coefficients");
            const nev::AnalysisSpec* spec = nullptr;
            for (const auto& a : sc.analyses)
                if (a.kind == "solve") spec = &a;
            nev::AnalysisSpec fallback{"solve", {}};
            if (!spec) spec = &fallback;
            std::vector<nev::cplx> ic;
            for (double v : nev::detail::parse_num_list(spec->get("ic", "")))
                ic.push_back(nev::cplx(v, 0.0));
            if (ic.empty()) {
                ic.assign(static_cast<size_t>(sc.n()), nev::cplx(0.0, 0.0));
                ic[0] = 1.0;
            }
            std::vector<double> grid = nev::detail::analysis_grid(sc, *spec);
            std::cout << nev::solution_growth(sc.coeffs, ic, grid, spec->get_num("tol", 1e-4))
                             .to_csv();
            if (dump_rays) {
                std::ostringstream os;
                os << "theta,r,log_abs_f\n";
                for (int t = 0; t < 64; ++t) {
                    double th = 2.0 * nev::kPi * t / 64;
                    nev::RayResult ray = nev::integrate_ray(sc.coeffs, th, grid, ic);
                    for (size_t j = 0; j < ray.r.size(); ++j)
                        os << nev::fmt17(th) << ',' << nev::fmt17(ray.r[j]) << ','
                           << nev::fmt17(ray.log_abs_f[j]) << '\n';
                }
                std::filesystem::create_directories(out_dir);
                nev::detail::write_file(std::filesystem::path(out_dir) / "rays.csv", os.str());
            }
            return 0;
        }
        if (*dominance) {
            nev::Scenario sc = overridden(dominance);
            if (sc.coeffs.empty()) throw nev::error("dominance: scenario has no coefficients");
            nev::DominanceReport rep = nev::find_p(
                sc.coeffs, nev::detail::condition_from_name(condition), sc.grid(), sc.trim, sc.tol);
            std::cout << rep.to_csv();
            return 0;
        }
        if (*reduce) {
            std::string text = load_scenario_text(scenario_ref);
            nev::Scenario sc = nev::parse_scenario(text);
            if (sc.coeffs.empty()) throw nev::error("reduce: scenario has no coefficients");
            std::cout << nev::render_Ck(nev::build_Ck(sc.n(), reduce_p, sc.op));
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
    return 0;
}
