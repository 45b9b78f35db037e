#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "continuum.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "report.hpp"

namespace nglat {

struct BeurlingConfig {
    cplx segment_a{-0.25, 0.2};
    cplx segment_b{0.25, 0.2};
    double c_min = 0.25;
    std::vector<int> n_list{16, 32, 64, 128};
};

struct PolydecayConfig {
    double alpha = 0.4;
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    std::vector<int> n_list{32, 64};
};

struct GflowerConfig {
    double alpha = 0.9;
    double eps = 0.25;
    std::vector<int> n_list{64, 128};
    double r_lo = 0.05;
    double r_hi = 20.0;
};

struct CapaConfig {
    double delta = 0.2;  // blob placement for this experiment; radius δ/4 must sit well inside ε₂
    double eps1 = 0.025;
    std::vector<double> eps2_list{0.1, 0.2, 0.4};
    std::vector<int> n_list{64, 128};
};

struct MixingConfig {
    std::vector<int> n_list{16, 32};
    std::vector<double> t_list;  // empty: 0.1, 0.2, ..., 3.0
    int probe_count = 24;
    double tail_tol = 1e-12;
    std::vector<double> gauss_t_list{0.0625, 0.125, 0.25, 0.5};
    std::uint64_t escape_paths = 100000;

    std::vector<double> times() const {
        if (!t_list.empty()) return t_list;
        std::vector<double> out;
        for (int k = 1; k <= 30; ++k) out.push_back(k / 10.0);
        return out;
    }
};

struct ExperimentFlags {
    bool convergence = false;
    bool beurling = false;
    bool polydecay = false;
    bool gflower = false;
    bool capa = false;
    bool mixing = false;

    bool any() const noexcept { return convergence || beurling || polydecay || gflower || capa || mixing; }
    static ExperimentFlags all() { return {true, true, true, true, true, true}; }
};

/// Everything one run needs. Loaded from a JSON file; see README for keys.
struct RunConfig {
    std::string domain = "disc";
    std::vector<cplx> coefficients;  // overrides the preset when non-empty
    double delta = 0.4;
    std::vector<int> n_list{16, 32, 64, 128};
    double tol = 1e-10;
    double hitting_tol = 1e-12;
    double inversion_tol = 1e-12;
    QuadratureSpec quadrature;
    int boundary_samples = 4096;
    int sample_grid = 64;
    std::uint64_t seed = 1;
    ExperimentFlags run = ExperimentFlags::all();
    std::string out_dir = "out";

    BeurlingConfig beurling;
    PolydecayConfig polydecay;
    GflowerConfig gflower;
    CapaConfig capa;
    MixingConfig mixing;

    std::vector<cplx> domain_coefficients() const {
        if (!coefficients.empty()) return coefficients;
        if (auto c = preset_coefficients(domain)) return *c;
        throw ConfigError("unknown domain preset '" + domain + "'");
    }

    ConformalDomain build() const { return build_domain(domain_coefficients(), inversion_tol); }

    void validate() const {
        auto sorted_positive = [](const std::vector<int>& v, const char* what) {
            if (v.empty()) throw ConfigError(std::string(what) + " is empty");
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (v[k] < 8) throw ConfigError(std::string(what) + " entries must be >= 8");
                if (k > 0 && v[k] <= v[k - 1]) throw ConfigError(std::string(what) + " must be strictly ascending");
            }
        };
        sorted_positive(n_list, "n_list");
        sorted_positive(beurling.n_list, "beurling.n_list");
        sorted_positive(polydecay.n_list, "polydecay.n_list");
        sorted_positive(gflower.n_list, "gflower.n_list");
        sorted_positive(capa.n_list, "capa.n_list");
        sorted_positive(mixing.n_list, "mixing.n_list");
        if (!(delta > 0.0) || !(capa.delta > 0.0)) throw ConfigError("delta must be positive");
        for (double t : {tol, hitting_tol, inversion_tol, mixing.tail_tol})
            if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
        if (boundary_samples < 8 || sample_grid < 2) throw ConfigError("sample counts too small");
        try {
            quadrature.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

namespace detail {

inline cplx parse_complex(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(key + ": expected a number or [re, im]");
}

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + key + ": " + e.what());
        }
    }
    void get(const char* key, cplx& out) {
        seen_.insert(key);
        if (j_.contains(key)) out = parse_complex(j_.at(key), where_ + key);
    }
    const json* section(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown config key '" + where_ + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace detail

/// Parses a JSON config. Unknown keys are rejected.
inline RunConfig parse_config(const json& j) {
    RunConfig c;
    detail::Reader r(j, "");
    if (const json* dom = r.section("domain")) {
        if (dom->is_string()) {
            c.domain = dom->get<std::string>();
        } else if (dom->is_array()) {
            c.domain = "custom";
            for (const auto& a : *dom) c.coefficients.push_back(detail::parse_complex(a, "domain"));
        } else {
            throw ConfigError("domain: expected a preset name or a coefficient list");
        }
    }
    r.get("delta", c.delta);
    r.get("n_list", c.n_list);
    r.get("tol", c.tol);
    r.get("hitting_tol", c.hitting_tol);
    r.get("inversion_tol", c.inversion_tol);
    r.get("boundary_samples", c.boundary_samples);
    r.get("sample_grid", c.sample_grid);
    r.get("seed", c.seed);
    r.get("out", c.out_dir);
    if (const json* q = r.section("quadrature")) {
        detail::Reader s(*q, "quadrature.");
        s.get("radial", c.quadrature.radial_points);
        s.get("angular", c.quadrature.angular_points);
        s.get("singular_split_radius", c.quadrature.singular_split_radius);
        s.finish();
    }
    if (const json* e = r.section("experiments")) {
        if (!e->is_array()) throw ConfigError("experiments: expected a list of names");
        c.run = {};
        for (const auto& name : *e) {
            const std::string n = name.get<std::string>();
            if (n == "convergence") c.run.convergence = true;
            else if (n == "beurling") c.run.beurling = true;
            else if (n == "polydecay") c.run.polydecay = true;
            else if (n == "gflower") c.run.gflower = true;
            else if (n == "capa") c.run.capa = true;
            else if (n == "mixing") c.run.mixing = true;
            else throw ConfigError("unknown experiment '" + n + "'");
        }
    }
    if (const json* b = r.section("beurling")) {
        detail::Reader s(*b, "beurling.");
        s.get("segment_a", c.beurling.segment_a);
        s.get("segment_b", c.beurling.segment_b);
        s.get("c_min", c.beurling.c_min);
        s.get("n_list", c.beurling.n_list);
        s.finish();
    }
    if (const json* p = r.section("polydecay")) {
        detail::Reader s(*p, "polydecay.");
        s.get("alpha", c.polydecay.alpha);
        s.get("eps_list", c.polydecay.eps_list);
        s.get("n_list", c.polydecay.n_list);
        s.finish();
    }
    if (const json* gf = r.section("gflower")) {
        detail::Reader s(*gf, "gflower.");
        s.get("alpha", c.gflower.alpha);
        s.get("eps", c.gflower.eps);
        s.get("n_list", c.gflower.n_list);
        s.get("r_lo", c.gflower.r_lo);
        s.get("r_hi", c.gflower.r_hi);
        s.finish();
    }
    if (const json* ca = r.section("capa")) {
        detail::Reader s(*ca, "capa.");
        s.get("delta", c.capa.delta);
        s.get("eps1", c.capa.eps1);
        s.get("eps2_list", c.capa.eps2_list);
        s.get("n_list", c.capa.n_list);
        s.finish();
    }
    if (const json* m = r.section("mixing")) {
        detail::Reader s(*m, "mixing.");
        s.get("n_list", c.mixing.n_list);
        s.get("t_list", c.mixing.t_list);
        s.get("probe_count", c.mixing.probe_count);
        s.get("tail_tol", c.mixing.tail_tol);
        s.get("gauss_t_list", c.mixing.gauss_t_list);
        s.get("escape_paths", c.mixing.escape_paths);
        s.finish();
    }
    r.finish();
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace nglat
