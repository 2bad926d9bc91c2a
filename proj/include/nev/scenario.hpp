#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nev/expr.hpp"
#include "nev/growth.hpp"
#include "nev/parser.hpp"
#include "nev/reduction.hpp"

namespace nev {

// One requested analysis: a section name plus its key = value options.
struct AnalysisSpec {
    std::string kind;  // growth | dominance | reduce | deficiency | curve | conclusion |
                       // residual | admissibility | zeros | lattice | qsmallness
    std::map<std::string, std::string> options;

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = options.find(key);
        return it == options.end() ? fallback : it->second;
    }
    double get_num(const std::string& key, double fallback) const {
        auto it = options.find(key);
        return it == options.end() ? fallback : std::stod(it->second);
    }
    int get_int(const std::string& key, int fallback) const {
        auto it = options.find(key);
        return it == options.end() ? fallback : std::stoi(it->second);
    }
};

// Declarative description of an equation and the analyses to run on it.
// Text format: flat `key = value` lines; `[name]` opens an analysis section;
// everything before the first section header describes the equation itself.
// `#` starts a comment. Defaults: domain=plane, kind=derivative, q=2,
// tol=1e-6, trim=0.1, grid=1:30 (plane) or 4:28 (disc, exponent range).
struct Scenario {
    std::string name;
    Domain domain = Domain::plane;
    OpSpec op;
    std::vector<Expr> coeffs;      // A_0 .. A_{n-1}
    std::vector<Expr> solutions;   // optional closed-form candidates
    std::vector<std::string> coeff_text;
    std::vector<std::string> solution_text;
    double grid_lo = 0.0, grid_hi = 0.0;
    bool grid_set = false;
    double tol = 1e-6;
    double trim = 0.10;
    unsigned seed = 42;
    std::vector<AnalysisSpec> analyses;
    std::string source_text;  // canonical text, hashed for provenance

    std::vector<double> grid() const {
        if (domain == Domain::plane) {
            double lo = grid_set ? grid_lo : 1.0;
            double hi = grid_set ? grid_hi : 30.0;
            return plane_grid(lo, hi);
        }
        int lo = grid_set ? static_cast<int>(grid_lo) : 4;
        int hi = grid_set ? static_cast<int>(grid_hi) : 28;
        return disc_grid(lo, hi);
    }

    int n() const { return static_cast<int>(coeffs.size()); }
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// 64-bit FNV-1a of the scenario text, for provenance lines in reports
inline std::string scenario_hash(const std::string& text) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

inline Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    sc.source_text = text;
    std::istringstream in(text);
    std::string line;
    AnalysisSpec* current = nullptr;
    std::map<int, std::string> coeff_map, sol_map;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim_ws(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw error("scenario line " + std::to_string(lineno) + ": unterminated section header");
            sc.analyses.push_back({detail::trim_ws(line.substr(1, line.size() - 2)), {}});
            current = &sc.analyses.back();
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw error("scenario line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim_ws(line.substr(0, eq));
        std::string val = detail::trim_ws(line.substr(eq + 1));
        if (current) {
            current->options[key] = val;
            continue;
        }
        if (key == "name") sc.name = val;
        else if (key == "domain") {
            if (val == "plane") sc.domain = Domain::plane;
            else if (val == "disc") sc.domain = Domain::disc;
            else throw error("scenario: domain must be plane or disc");
        } else if (key == "kind") {
            if (val == "derivative") sc.op.kind = OpKind::derivative;
            else if (val == "difference") sc.op.kind = OpKind::difference;
            else if (val == "qdifference") sc.op.kind = OpKind::q_difference;
            else throw error("scenario: kind must be derivative, difference, or qdifference");
        } else if (key == "q") sc.op.q = cplx(std::stod(val), 0.0);
        else if (key == "grid") {
            auto colon = val.find(':');
            if (colon == std::string::npos) throw error("scenario: grid must be lo:hi");
            sc.grid_lo = std::stod(val.substr(0, colon));
            sc.grid_hi = std::stod(val.substr(colon + 1));
            sc.grid_set = true;
        } else if (key == "tol") sc.tol = std::stod(val);
        else if (key == "trim") sc.trim = std::stod(val);
        else if (key == "seed") sc.seed = static_cast<unsigned>(std::stoul(val));
        else if (key.rfind("coeff.", 0) == 0) coeff_map[std::stoi(key.substr(6))] = val;
        else if (key.rfind("solution.", 0) == 0) sol_map[std::stoi(key.substr(9))] = val;
        else throw error("scenario line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    for (int i = 0; i < static_cast<int>(coeff_map.size()); ++i) {
        auto it = coeff_map.find(i);
        if (it == coeff_map.end()) throw error("scenario: coeff indices must be contiguous from 0");
        sc.coeff_text.push_back(it->second);
        sc.coeffs.push_back(parse(it->second, sc.domain));
    }
    for (int i = 0; i < static_cast<int>(sol_map.size()); ++i) {
        auto it = sol_map.find(i);
        if (it == sol_map.end()) throw error("scenario: solution indices must be contiguous from 0");
        sc.solution_text.push_back(it->second);
        sc.solutions.push_back(parse(it->second, sc.domain));
    }
    if (sc.name.empty()) throw error("scenario: missing name");
    if (sc.analyses.empty()) throw error("scenario: no analyses requested");
    // validate per-analysis inputs
    for (const auto& a : sc.analyses) {
        auto needs_coeffs = [&](const char* what) {
            if (sc.coeffs.empty())
                throw error(std::string("scenario: analysis '") + what + "' needs coeff.* entries");
        };
        if (a.kind == "dominance" || a.kind == "reduce" || a.kind == "curve" ||
            a.kind == "residual" || a.kind == "conclusion" || a.kind == "lattice")
            needs_coeffs(a.kind.c_str());
        if ((a.kind == "reduce" || a.kind == "residual" || a.kind == "conclusion") &&
            sc.solutions.empty() && a.get("target").empty())
            throw error("scenario: analysis '" + a.kind + "' needs solution.* entries");
        if (a.kind == "growth" || a.kind == "deficiency" || a.kind == "zeros" ||
            a.kind == "qsmallness" || a.kind == "admissibility") {
            if (a.get("target").empty())
                throw error("scenario: analysis '" + a.kind + "' needs target = <expression or solution.k/coeff.k>");
        }
    }
    return sc;
}

// Resolves "solution.k" / "coeff.k" references, otherwise parses as expression.
inline Expr resolve_target(const Scenario& sc, const std::string& spec) {
    if (spec.rfind("solution.", 0) == 0) {
        size_t i = std::stoul(spec.substr(9));
        if (i >= sc.solutions.size()) throw error("scenario: target " + spec + " out of range");
        return sc.solutions[i];
    }
    if (spec.rfind("coeff.", 0) == 0) {
        size_t i = std::stoul(spec.substr(6));
        if (i >= sc.coeffs.size()) throw error("scenario: target " + spec + " out of range");
        return sc.coeffs[i];
    }
    return parse(spec, sc.domain);
}

}  // namespace nev
