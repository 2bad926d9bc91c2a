#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nev/catalogue.hpp"
#include "nev/dominance.hpp"
#include "nev/growth.hpp"
#include "nev/jet.hpp"
#include "nev/reduction.hpp"
#include "nev/scenario.hpp"
#include "nev/solvers.hpp"

namespace nev {

// ---------------------------------------------------------------------------
// small CSV table model: verdicts are a pure function of these tables, so the
// `verify` subcommand can recompute every verdict from the emitted files alone

struct Table {
    std::vector<std::string> cols;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        throw error("csv table: missing column '" + name + "'");
    }
    std::vector<double> column(const std::string& name) const {
        int c = col(name);
        std::vector<double> v;
        for (const auto& row : rows) v.push_back(row[static_cast<size_t>(c)]);
        return v;
    }
};

inline Table parse_table(const std::string& csv) {
    Table t;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw error("csv table: empty input");
    std::istringstream hdr(line);
    std::string field;
    while (std::getline(hdr, field, ',')) t.cols.push_back(field);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) row.push_back(std::strtod(field.c_str(), nullptr));
        if (row.size() != t.cols.size()) throw error("csv table: ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// analysis execution

struct Outcome {
    int index = 0;                 // 1-based position in the scenario
    std::string kind;
    std::string artifact;          // CSV filename, empty when the analysis errored
    std::string verdict;           // PASS | FAIL | CONSISTENT | INCONSISTENT | INFO | TRUNCATED | ERROR
    std::string detail;
};

struct RunResult {
    Scenario scenario;
    std::vector<Outcome> outcomes;
    std::string report;
    bool ok = true;  // false iff a hard check failed (FAIL or ERROR verdict)
};

namespace detail {

inline std::vector<double> analysis_grid(const Scenario& sc, const AnalysisSpec& a) {
    std::string g = a.get("grid");
    if (g.empty()) return sc.grid();
    auto colon = g.find(':');
    if (colon == std::string::npos) throw error("analysis grid must be lo:hi");
    double lo = std::stod(g.substr(0, colon)), hi = std::stod(g.substr(colon + 1));
    if (sc.domain == Domain::plane) return plane_grid(lo, hi);
    return disc_grid(static_cast<int>(lo), static_cast<int>(hi));
}

inline std::vector<double> parse_num_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(std::stod(field));
    return out;
}

inline ConditionKind condition_from_name(const std::string& name) {
    if (name == "characteristic" || name.empty()) return ConditionKind::characteristic_ratio;
    if (name == "maxmod") return ConditionKind::max_modulus_ratio;
    if (name == "circle") return ConditionKind::circle_integral;
    if (name == "area") return ConditionKind::area_integral;
    throw error("dominance condition must be characteristic, maxmod, circle, or area");
}

inline ConclusionKind conclusion_from_name(const std::string& name) {
    if (name == "char_lower" || name.empty()) return ConclusionKind::char_lower;
    if (name == "logM_asymp") return ConclusionKind::logM_asymp;
    if (name == "area_asymp") return ConclusionKind::area_asymp;
    throw error("conclusion kind must be char_lower, logM_asymp, or area_asymp");
}

// produce the CSV (and optional extra text artifact) for one analysis
inline std::string execute_analysis(const Scenario& sc, const AnalysisSpec& a,
                                    std::string* extra_text) {
    double tol = a.get_num("tol", sc.tol);
    std::vector<double> grid = analysis_grid(sc, a);
    if (a.kind == "growth") {
        Expr f = resolve_target(sc, a.get("target"));
        return growth_series(f, grid, tol).to_csv();
    }
    if (a.kind == "zeros") {
        Expr f = resolve_target(sc, a.get("target"));
        cplx at(a.get_num("a", 0.0), 0.0);
        std::ostringstream os;
        os << "r,count,ratio\n";
        for (double r : grid) {
            int cnt = count_zeros(f, at, r);
            os << fmt17(r) << ',' << cnt << ',' << fmt17(cnt / (std::log(r) / std::log(2.0)))
               << '\n';
        }
        return os.str();
    }
    if (a.kind == "qsmallness") {
        Expr f = resolve_target(sc, a.get("target"));
        Expr quot = qscale(f, cplx(a.get_num("q", 2.0), 0.0)) / f;
        std::ostringstream os;
        os << "r,m_quotient,T,ratio\n";
        for (double r : grid) {
            double rr = r * (1.0 + 1e-9);  // avoid zeros sitting exactly on the circle
            double mq = proximity(quot, rr, tol);
            double T = proximity(f, rr, tol);  // entire target: T = m
            os << fmt17(r) << ',' << fmt17(mq) << ',' << fmt17(T) << ','
               << fmt17(T > 0.0 ? mq / T : kPosInf) << '\n';
        }
        return os.str();
    }
    if (a.kind == "dominance") {
        DominanceReport rep =
            find_p(sc.coeffs, condition_from_name(a.get("condition")), grid, sc.trim, tol);
        return rep.to_csv();
    }
    if (a.kind == "curve") {
        int p = a.get_int("p", 0);
        std::vector<double> eta = parse_num_list(a.get("eta", ""));
        auto curve = trace_max_curve(sc.coeffs[static_cast<size_t>(p)], grid);
        CurveDominanceReport rep = curve_dominance(sc.coeffs, p, eta, curve, sc.trim);
        std::ostringstream os;
        os << "r,theta,ratio\n";
        for (size_t i = 0; i < rep.radii.size(); ++i)
            os << fmt17(rep.radii[i]) << ',' << fmt17(curve[i].theta) << ','
               << fmt17(rep.ratios[i]) << '\n';
        if (extra_text && rep.low_confidence)
            *extra_text = "low confidence: the traced maximum curve jumped branches\n";
        return os.str();
    }
    if (a.kind == "conclusion") {
        Expr f = resolve_target(sc, a.get("target"));
        int p = a.get_int("p", 0);
        ConclusionKind kind = conclusion_from_name(a.get("kind"));
        GrowthSeries sol = growth_series(f, grid, tol);
        std::vector<double> denom_v;
        const Expr& Ap = sc.coeffs.at(static_cast<size_t>(p));
        for (double r : grid) {
            switch (kind) {
                case ConclusionKind::char_lower: denom_v.push_back(characteristic(Ap, r, tol)); break;
                case ConclusionKind::logM_asymp: denom_v.push_back(max_modulus(Ap, r).logM); break;
                case ConclusionKind::area_asymp:
                    denom_v.push_back(log_area_integral(Ap, r, 1.0 / (sc.n() - p), tol));
                    break;
            }
        }
        ConclusionReport rep = conclusion_check(sol, grid, denom_v, kind,
                                                a.get_num("window_lo", 0.2),
                                                a.get_num("window_hi", 5.0));
        std::ostringstream os;
        os << "r,ratio\n";
        for (size_t i = 0; i < rep.radii.size(); ++i)
            os << fmt17(rep.radii[i]) << ',' << fmt17(rep.ratios[i]) << '\n';
        return os.str();
    }
    if (a.kind == "residual") {
        auto samples = residual_samples(sc.domain, sc.seed);
        std::ostringstream os;
        os << "solution,residual,trivial\n";
        for (size_t i = 0; i < sc.solutions.size(); ++i) {
            EquationResidual res = equation_residual(sc.coeffs, sc.op, sc.solutions[i], samples);
            os << i << ',' << fmt17(res.max_residual) << ',' << (res.trivial_candidate ? 1 : 0)
               << '\n';
        }
        return os.str();
    }
    if (a.kind == "reduce") {
        int p = a.get_int("p", 0);
        ReductionTable table = reduce_base(sc.solutions, sc.op);
        ResidualReport rep = identity_residual(sc.coeffs, table, p, residual_samples(sc.domain, sc.seed));
        if (extra_text) *extra_text = render_Ck(build_Ck(sc.n(), p, sc.op));
        std::ostringstream os;
        os << "p,residual,used,skipped\n";
        os << p << ',' << fmt17(rep.max_residual) << ',' << rep.used_samples << ','
           << rep.skipped_samples << '\n';
        return os.str();
    }
    if (a.kind == "admissibility") {
        Expr f = resolve_target(sc, a.get("target"));
        AdmissibilityReport rep = admissibility_index(f, grid, a.get_num("threshold", 5.0), tol);
        std::ostringstream os;
        os << "r,index\n";
        for (size_t i = 0; i < rep.radii.size(); ++i)
            os << fmt17(rep.radii[i]) << ',' << fmt17(rep.index[i]) << '\n';
        return os.str();
    }
    if (a.kind == "deficiency") {
        Expr f = resolve_target(sc, a.get("target"));
        bool a_inf = a.get("a") == "inf";
        cplx at = a_inf ? cplx(0.0, 0.0) : cplx(a.get_num("a", 0.0), 0.0);
        DeficiencyReport rep = deficiency(f, at, grid, a_inf, tol, sc.trim);
        std::ostringstream os;
        os << "r,ratio\n";
        for (size_t i = 0; i < rep.radii.size(); ++i)
            os << fmt17(rep.radii[i]) << ',' << fmt17(rep.ratios[i]) << '\n';
        return os.str();
    }
    if (a.kind == "lattice") {
        std::vector<Expr> B = delta_to_shift(sc.coeffs);
        cplx z0(a.get_num("z0", 1.0), 0.0);
        int steps = a.get_int("steps", 20);
        std::vector<LogValue> seed;
        for (double v : parse_num_list(a.get("init", "1"))) seed.push_back(LogValue::from(v));
        LatticeSolution sol = iterate_lattice(B, sc.op, z0, steps, seed);
        double res = lattice_residual(B, sol);
        std::ostringstream os;
        os << "k,re_z,im_z,logmag,phase,max_residual\n";
        for (size_t k = 0; k < sol.values.size(); ++k) {
            cplx z = lattice_point(sol, static_cast<int>(k));
            os << k << ',' << fmt17(z.real()) << ',' << fmt17(z.imag()) << ','
               << fmt17(sol.values[k].logmag) << ',' << fmt17(sol.values[k].phase) << ','
               << fmt17(res) << '\n';
        }
        return os.str();
    }
    if (a.kind == "solve") {
        std::vector<cplx> ic;
        for (double v : parse_num_list(a.get("ic", ""))) ic.push_back(cplx(v, 0.0));
        if (ic.empty()) {
            ic.assign(static_cast<size_t>(sc.n()), cplx(0.0, 0.0));
            ic[0] = 1.0;
        }
        return solution_growth(sc.coeffs, ic, grid, a.get_num("tol", 1e-4)).to_csv();
    }
    throw error("unknown analysis kind '" + a.kind + "'");
}

// verdict from the emitted CSV table plus the scenario options only
inline void verdict_for(const Scenario& sc, const AnalysisSpec& a, const Table& t,
                        std::string& verdict, std::string& detail) {
    auto windowed = [&](double v, bool lower_only) {
        double lo = a.get_num("window_lo", 0.2), hi = a.get_num("window_hi", 5.0);
        bool ok = lower_only ? (v >= lo) : (v >= lo && v <= hi);
        verdict = ok ? "CONSISTENT" : "INCONSISTENT";
    };
    if (a.kind == "growth" || a.kind == "solve") {
        auto T = t.column("T"), m = t.column("m"), N = t.column("N"), r = t.column("r");
        for (size_t i = 0; i < T.size(); ++i) {
            double slack = 1e-8 * (1.0 + std::abs(T[i]));
            if (std::abs(T[i] - (m[i] + N[i])) > slack || (i > 0 && T[i] < T[i - 1] - slack)) {
                verdict = "FAIL";
                detail = "growth invariants violated at r=" + fmt17(r[i]);
                return;
            }
        }
        if (a.kind == "solve") {
            size_t want = analysis_grid(sc, a).size();
            verdict = (t.rows.size() == want) ? "PASS" : "TRUNCATED";
            detail = "reached=" + std::to_string(t.rows.size()) + "/" + std::to_string(want);
            return;
        }
        if (!a.get("bound_T_logsq").empty()) {
            double worst = 0.0;
            for (size_t i = 0; i < T.size(); ++i)
                if (r[i] > 1.0) worst = std::max(worst, T[i] / (std::log(r[i]) * std::log(r[i])));
            detail = "max_T_over_logsq=" + fmt17(worst);
            verdict = (worst <= a.get_num("bound_T_logsq", 0.0)) ? "CONSISTENT" : "INCONSISTENT";
            return;
        }
        verdict = "PASS";
        detail = "samples=" + std::to_string(t.rows.size());
        return;
    }
    if (a.kind == "zeros") {
        auto tail = tail_third(t.column("ratio"));
        double lo = *std::min_element(tail.begin(), tail.end());
        double hi = *std::max_element(tail.begin(), tail.end());
        detail = "tail_ratio=[" + fmt17(lo) + "," + fmt17(hi) + "]";
        bool ok = lo >= a.get_num("window_lo", 0.0) && hi <= a.get_num("window_hi", kPosInf);
        verdict = ok ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "qsmallness") {
        auto ratio = t.column("ratio");
        size_t take = std::max<size_t>(1, ratio.size() / 10);
        double worst = 0.0;
        for (size_t i = ratio.size() - take; i < ratio.size(); ++i) worst = std::max(worst, ratio[i]);
        detail = "top_decile_max=" + fmt17(worst);
        verdict = (worst <= a.get_num("bound", 1.0)) ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "dominance") {
        auto p = t.column("p"), sel = t.column("selected"), trimmed = t.column("trimmed");
        int selected = -1;
        double est = 0.0;
        for (size_t i = 0; i < sel.size(); ++i)
            if (sel[i] != 0.0) {
                selected = static_cast<int>(p[i]);
                est = trimmed[i];
            }
        detail = "selected_p=" + std::to_string(selected) + " estimate=" + fmt17(est);
        if (!a.get("expect_p").empty() && selected != a.get_int("expect_p", -1)) {
            verdict = "FAIL";
            return;
        }
        if (!a.get("window_lo").empty() || !a.get("window_hi").empty()) {
            windowed(est, false);
            return;
        }
        verdict = "PASS";
        return;
    }
    if (a.kind == "curve") {
        TailEstimate e = tail_limsup(t.column("ratio"), sc.trim);
        detail = "trimmed_limsup=" + fmt17(e.trimmed);
        verdict = (e.trimmed < 1.0) ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "conclusion") {
        bool lower_only = conclusion_from_name(a.get("kind")) == ConclusionKind::char_lower;
        auto tail = tail_third(t.column("ratio"));
        if (tail.empty()) {
            verdict = "INCONSISTENT";
            detail = "no usable radii";
            return;
        }
        double worst_lo = *std::min_element(tail.begin(), tail.end());
        double worst_hi = *std::max_element(tail.begin(), tail.end());
        detail = "tail=[" + fmt17(worst_lo) + "," + fmt17(worst_hi) + "]";
        double lo = a.get_num("window_lo", 0.2), hi = a.get_num("window_hi", 5.0);
        bool ok = lower_only ? (worst_lo >= lo) : (worst_lo >= lo && worst_hi <= hi);
        verdict = ok ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "residual") {
        double rtol = a.get_num("tol", 1e-8);
        auto res = t.column("residual"), triv = t.column("trivial");
        double worst = 0.0;
        bool any_trivial = false;
        for (size_t i = 0; i < res.size(); ++i) {
            worst = std::max(worst, res[i]);
            if (triv[i] != 0.0) any_trivial = true;
        }
        detail = "max_residual=" + fmt17(worst);
        verdict = (worst < rtol && !any_trivial) ? "PASS" : "FAIL";
        return;
    }
    if (a.kind == "reduce") {
        double rtol = a.get_num("tol", 1e-8);
        double res = t.column("residual").at(0);
        detail = "residual=" + fmt17(res);
        verdict = (res < rtol) ? "PASS" : "FAIL";
        return;
    }
    if (a.kind == "admissibility") {
        auto tail = tail_third(t.column("index"));
        bool admissible = !tail.empty() && tail.back() > tail.front() &&
                          *std::max_element(tail.begin(), tail.end()) > a.get_num("threshold", 5.0);
        detail = std::string("admissible=") + (admissible ? "1" : "0");
        if (a.get("expect").empty()) {
            verdict = "INFO";
            return;
        }
        verdict = (admissible == (a.get_int("expect", 0) != 0)) ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "deficiency") {
        TailEstimate e = tail_liminf(t.column("ratio"), sc.trim);
        detail = "liminf_trimmed=" + fmt17(e.trimmed) + " untrimmed=" + fmt17(e.untrimmed);
        bool has_min = !a.get("expect_min").empty(), has_max = !a.get("expect_max").empty();
        if (!has_min && !has_max) {
            verdict = "INFO";
            return;
        }
        bool ok = (!has_min || e.trimmed >= a.get_num("expect_min", 0.0)) &&
                  (!has_max || e.trimmed <= a.get_num("expect_max", 1.0));
        verdict = ok ? "CONSISTENT" : "INCONSISTENT";
        return;
    }
    if (a.kind == "lattice") {
        double res = t.column("max_residual").at(0);
        detail = "max_residual=" + fmt17(res);
        verdict = (res < a.get_num("tol", 1e-10)) ? "PASS" : "FAIL";
        return;
    }
    throw error("unknown analysis kind '" + a.kind + "'");
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string artifact_name(int index, const std::string& kind, const char* ext) {
    char buf[16];
    snprintf(buf, sizeof buf, "%02d", index);
    return std::string(buf) + "-" + kind + ext;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run / verify

inline RunResult run_scenario(const Scenario& sc, const std::string& outdir) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    RunResult result;
    result.scenario = sc;
    detail::write_file(fs::path(outdir) / "scenario.txt", sc.source_text);
    std::ostringstream report;
    report << "scenario " << sc.name << '\n';
    report << "hash " << scenario_hash(sc.source_text) << '\n';
    int index = 0;
    for (const auto& a : sc.analyses) {
        ++index;
        Outcome o;
        o.index = index;
        o.kind = a.kind;
        try {
            std::string extra;
            std::string csv = detail::execute_analysis(sc, a, &extra);
            o.artifact = detail::artifact_name(index, a.kind, ".csv");
            detail::write_file(fs::path(outdir) / o.artifact, csv);
            if (!extra.empty())
                detail::write_file(fs::path(outdir) / detail::artifact_name(index, a.kind, ".txt"),
                                   extra);
            detail::verdict_for(sc, a, parse_table(csv), o.verdict, o.detail);
        } catch (const std::exception& ex) {
            o.verdict = "ERROR";
            o.detail = ex.what();
        }
        if (o.verdict == "FAIL" || o.verdict == "ERROR") result.ok = false;
        report << "analysis " << index << ' ' << o.kind << " artifact=" << o.artifact
               << " verdict=" << o.verdict;
        if (!o.detail.empty()) report << " detail=" << o.detail;
        report << '\n';
        result.outcomes.push_back(std::move(o));
    }
    report << "overall " << (result.ok ? "PASS" : "FAIL") << '\n';
    result.report = report.str();
    detail::write_file(fs::path(outdir) / "report.txt", result.report);
    return result;
}

struct VerifyResult {
    bool ok = true;
    std::vector<std::string> mismatches;
};

// Recomputes every verdict from scenario.txt plus the emitted CSVs and checks
// they match report.txt. Does not rerun any analysis.
inline VerifyResult verify_output(const std::string& outdir) {
    namespace fs = std::filesystem;
    VerifyResult vr;
    std::string source = detail::read_file(fs::path(outdir) / "scenario.txt");
    Scenario sc = parse_scenario(source);
    std::string report = detail::read_file(fs::path(outdir) / "report.txt");
    std::istringstream in(report);
    std::string line;
    auto complain = [&](const std::string& msg) {
        vr.ok = false;
        vr.mismatches.push_back(msg);
    };
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "hash") {
            ls >> word;
            if (word != scenario_hash(source)) complain("scenario hash mismatch");
        } else if (word == "analysis") {
            int index;
            std::string kind, artifact_kv, verdict_kv;
            ls >> index >> kind >> artifact_kv >> verdict_kv;
            if (artifact_kv.rfind("artifact=", 0) != 0 || verdict_kv.rfind("verdict=", 0) != 0) {
                complain("malformed analysis line: " + line);
                continue;
            }
            std::string artifact = artifact_kv.substr(9);
            std::string reported = verdict_kv.substr(8);
            if (reported == "ERROR") continue;  // no artifact to recheck
            if (index < 1 || index > static_cast<int>(sc.analyses.size())) {
                complain("analysis index out of range: " + line);
                continue;
            }
            const AnalysisSpec& a = sc.analyses[static_cast<size_t>(index - 1)];
            if (a.kind != kind) {
                complain("analysis kind mismatch at index " + std::to_string(index));
                continue;
            }
            try {
                Table t = parse_table(detail::read_file(fs::path(outdir) / artifact));
                std::string verdict, detail_s;
                detail::verdict_for(sc, a, t, verdict, detail_s);
                if (verdict != reported)
                    complain("verdict mismatch at index " + std::to_string(index) + ": reported " +
                             reported + ", recomputed " + verdict);
            } catch (const std::exception& ex) {
                complain("cannot recheck index " + std::to_string(index) + ": " + ex.what());
            }
        }
    }
    return vr;
}

}  // namespace nev
