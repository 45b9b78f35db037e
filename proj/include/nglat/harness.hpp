#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "continuum.hpp"
#include "domain.hpp"
#include "green.hpp"
#include "hitting.hpp"
#include "interpolate.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "report.hpp"
#include "walker.hpp"

namespace nglat {

inline json domain_json(const RunConfig& cfg) {
    json coeffs = json::array();
    for (const cplx a : cfg.domain_coefficients()) coeffs.push_back({a.real(), a.imag()});
    return {{"name", cfg.domain}, {"coefficients", std::move(coeffs)}};
}

/// discretize → solve → normalize → sup-norm distance to G*, per n.
inline ExperimentReport run_convergence(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    const BlobSpec b = select_blob_centers(d, cfg.delta);
    const GStar gs(d, b, cfg.quadrature);
    ExperimentReport rep;
    rep.name = "convergence";
    rep.module = "harness";
    rep.operation = "run_convergence";
    rep.parameters = {{"domain", domain_json(cfg)},
                      {"delta", cfg.delta},
                      {"n_list", cfg.n_list},
                      {"tol", cfg.tol},
                      {"boundary_samples", cfg.boundary_samples},
                      {"sample_grid", cfg.sample_grid},
                      {"quadrature",
                       {{"radial", cfg.quadrature.radial_points},
                        {"angular", cfg.quadrature.angular_points},
                        {"singular_split_radius", cfg.quadrature.singular_split_radius}}}};
    rep.columns = {"n", "vertices", "blob_size", "error", "error_x", "error_y", "iterations", "residual", "c_hat"};
    json wall = json::array();
    for (int n : cfg.n_list) {
        const auto t0 = std::chrono::steady_clock::now();
        const LatticeGraph g = discretize(d, n, b);
        const auto [H, solve] = solve_green_raw(g, cfg.tol);
        const Normalized nz = normalize(d, g, H, cfg.boundary_samples);
        const ExtendedField ext(g, nz.field, OutsideCorners::renormalize);
        const SupDiff sd = sup_diff(ext, d, [&](cplx z) { return gs(z); }, cfg.sample_grid);
        rep.add_row({static_cast<double>(n), static_cast<double>(g.size()),
                     static_cast<double>(g.require_blobs().set1.size()), sd.value, sd.where.real(), sd.where.imag(),
                     static_cast<double>(solve.iterations), solve.residual_norm, nz.c_hat});
        wall.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const auto err = rep.column("error");
    bool decreasing = true;
    for (std::size_t k = 1; k < err.size(); ++k) decreasing = decreasing && err[k] < err[k - 1];
    rep.summary["strictly_decreasing"] = decreasing;
    if (err.size() >= 2) rep.summary["last_ratio"] = err.back() / err[err.size() - 2];
    rep.summary["wall_time"] = std::move(wall);
    return rep;
}

inline ExperimentReport run_beurling(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    const BlobSpec b = select_blob_centers(d, cfg.delta);
    auto rep = beurling_experiment(d, b, segment_obstacle(cfg.beurling.segment_a, cfg.beurling.segment_b),
                                   cfg.beurling.c_min, cfg.beurling.n_list, cfg.hitting_tol);
    rep.parameters["domain"] = domain_json(cfg);
    rep.parameters["segment"] = {{cfg.beurling.segment_a.real(), cfg.beurling.segment_a.imag()},
                                 {cfg.beurling.segment_b.real(), cfg.beurling.segment_b.imag()}};
    return rep;
}

inline ExperimentReport run_polydecay(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    auto rep = polydecay_experiment(d, d.anchor1(), far_half(d), cfg.polydecay.alpha, cfg.polydecay.eps_list,
                                    cfg.polydecay.n_list, cfg.hitting_tol);
    rep.parameters["domain"] = domain_json(cfg);
    rep.parameters["obstacle"] = "far_half";
    return rep;
}

inline ExperimentReport run_gflower(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    auto rep = gflower_experiment(d, cfg.gflower.alpha, cfg.gflower.eps, cfg.gflower.n_list,
                                  default_pairs(cfg.gflower.eps), cfg.gflower.r_lo, cfg.gflower.r_hi,
                                  cfg.hitting_tol);
    rep.parameters["domain"] = domain_json(cfg);
    return rep;
}

inline ExperimentReport run_capa(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    const BlobSpec b = select_blob_centers(d, cfg.capa.delta);
    auto rep = capa_experiment(d, b, cfg.capa.eps1, cfg.capa.eps2_list, default_capa_obstacle(d), cfg.capa.n_list,
                               cfg.hitting_tol);
    rep.parameters["domain"] = domain_json(cfg);
    return rep;
}

/// Kernel pairs for the heat-kernel fit: the vertex nearest φ(0) paired with
/// vertices at continuum offsets 0, 1/8, ..., 1/2 along the real axis.
inline std::vector<std::pair<int, int>> heat_kernel_pairs(const ConformalDomain& d, const LatticeGraph& g) {
    const cplx c = d.phi(cplx{0.0, 0.0});
    const int x = g.index_of(nearest_lattice_point(c, g.n()));
    if (x < 0) throw std::runtime_error("no vertex near phi(0)");
    std::vector<std::pair<int, int>> out;
    for (double off : {0.0, 0.125, 0.25, 0.375, 0.5}) {
        const int y = g.index_of(nearest_lattice_point(c + off, g.n()));
        if (y >= 0) out.emplace_back(x, y);
    }
    return out;
}

/// Blob balance decay and TV mixing per n, the Gaussian envelope fit, the
/// escape probability and the killed-walk survival tail.
inline std::vector<ExperimentReport> run_mixing(const RunConfig& cfg) {
    const ConformalDomain d = cfg.build();
    const BlobSpec b = select_blob_centers(d, cfg.delta);
    const auto times = cfg.mixing.times();
    const json base = {{"domain", domain_json(cfg)},
                       {"delta", cfg.delta},
                       {"n_list", cfg.mixing.n_list},
                       {"tail_tol", cfg.mixing.tail_tol}};

    ExperimentReport mix;
    mix.name = "mixing";
    mix.module = "walker";
    mix.operation = "blob_balance_decay+tv_mixing_profile";
    mix.parameters = base;
    mix.parameters["t_list"] = times;
    mix.parameters["probe_count"] = cfg.mixing.probe_count;
    mix.columns = {"n", "t", "balance", "tv"};

    ExperimentReport heat;
    heat.name = "heat_kernel";
    heat.module = "walker";
    heat.operation = "gaussian_bound_fit";
    heat.parameters = base;
    heat.parameters["t_list"] = cfg.mixing.gauss_t_list;
    heat.parameters["escape"] = {{"eta", 0.5}, {"t", 0.01}, {"paths", cfg.mixing.escape_paths}, {"seed", cfg.seed}};
    heat.columns = {"n", "decay_fit", "upper_c1", "upper_c2", "lower_c1", "lower_c2", "escape", "escape_stderr"};

    ExperimentReport tail;
    tail.name = "hitting_tail";
    tail.module = "hitting";
    tail.operation = "hitting_tail";
    tail.parameters = base;
    tail.parameters["t_list"] = times;
    tail.parameters["obstacle"] = "far_half";
    tail.columns = {"n", "t", "survival"};

    json decay_fits = json::array(), tmix = json::array(), rates = json::array();
    for (int n : cfg.mixing.n_list) {
        const LatticeGraph g = discretize(d, n, b);
        const auto decay = blob_balance_decay(g, times, cfg.mixing.tail_tol);
        const auto tv = tv_mixing_profile(g, times, static_cast<std::size_t>(cfg.mixing.probe_count),
                                          cfg.mixing.tail_tol);
        for (std::size_t k = 0; k < times.size(); ++k) mix.add_row({static_cast<double>(n), times[k], decay.values[k], tv.tv[k]});
        mix.fits["balance_n" + std::to_string(n)] = {decay.tail_fit, "t", "log(balance)"};
        decay_fits.push_back({{"n", n}, {"slope", decay.tail_fit.slope}, {"r2", decay.tail_fit.r2}});
        tmix.push_back({{"n", n}, {"t_mix_quarter", tv.t_mix_quarter}});

        const auto pairs = heat_kernel_pairs(d, g);
        const auto gf = gaussian_bound_fit(g, cfg.mixing.gauss_t_list, pairs, cfg.mixing.tail_tol);
        const int centre = pairs.front().first;
        const auto esc = escape_probability_mc(g, centre, 0.5, 0.01, cfg.mixing.escape_paths, cfg.seed);
        heat.add_row({static_cast<double>(n), gf.decay_fit, gf.upper_c1, gf.upper_c2, gf.lower_c1, gf.lower_c2,
                      esc.estimate, esc.stderr_});

        const auto A = far_half(d)(g);
        const auto ht = hitting_tail(g, A, 0.4, times, cfg.mixing.tail_tol);
        for (const auto& r : ht.rows) tail.add_row({static_cast<double>(n), r[0], r[1]});
        if (auto it = ht.fits.find("log_survival_vs_t"); it != ht.fits.end()) {
            tail.fits["survival_n" + std::to_string(n)] = it->second;
            rates.push_back({{"n", n}, {"rate", -it->second.fit.slope}, {"r2", it->second.fit.r2}});
        }
    }
    mix.summary["balance_fits"] = std::move(decay_fits);
    mix.summary["t_mix_quarter"] = std::move(tmix);
    tail.summary["rates"] = std::move(rates);
    return {std::move(mix), std::move(heat), std::move(tail)};
}

struct Bundle {
    std::vector<ExperimentReport> reports;

    bool ok() const {
        for (const auto& r : reports)
            if (!r.ok()) return false;
        return true;
    }
    json to_json() const {
        json j;
        j["version"] = NGLAT_VERSION;
        json rs = json::array();
        for (const auto& r : reports) rs.push_back(r.to_json());
        j["reports"] = std::move(rs);
        return j;
    }
};

inline ExperimentReport failed_report(const std::string& name, const std::string& module, const std::string& what) {
    ExperimentReport r;
    r.name = name;
    r.module = module;
    r.operation = name;
    r.errors.push_back(what);
    return r;
}

/// Runs each selected experiment in a fixed order. A failing stage leaves an
/// error record and the remaining stages still run.
inline Bundle run_all(const RunConfig& cfg) {
    Bundle out;
    auto stage = [&](bool enabled, const std::string& name, const std::string& module,
                     const std::function<std::vector<ExperimentReport>()>& body) {
        if (!enabled) return;
        try {
            for (auto& r : body()) out.reports.push_back(std::move(r));
        } catch (const Error& e) {
            out.reports.push_back(failed_report(name, module, e.what()));
        } catch (const std::exception& e) {
            out.reports.push_back(failed_report(name, module, std::string("error: ") + e.what()));
        }
    };
    stage(cfg.run.convergence, "convergence", "harness", [&] { return std::vector{run_convergence(cfg)}; });
    stage(cfg.run.beurling, "beurling", "hitting", [&] { return std::vector{run_beurling(cfg)}; });
    stage(cfg.run.polydecay, "polydecay", "hitting", [&] { return std::vector{run_polydecay(cfg)}; });
    stage(cfg.run.gflower, "gflower", "hitting", [&] { return std::vector{run_gflower(cfg)}; });
    stage(cfg.run.capa, "capa", "hitting", [&] { return std::vector{run_capa(cfg)}; });
    stage(cfg.run.mixing, "mixing", "walker", [&] { return run_mixing(cfg); });
    return out;
}

/// bundle.json plus one <name>.csv per report.
inline void write_bundle(const Bundle& b, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "bundle.json", b.to_json().dump(2) + "\n");
    for (const auto& r : b.reports) write_text(dir / (r.name + ".csv"), r.to_csv());
}

}  // namespace nglat
