#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <nglat/config.hpp>
#include <nglat/continuum.hpp>
#include <nglat/green.hpp>
#include <nglat/harness.hpp>
#include <nglat/io.hpp>

namespace fs = std::filesystem;
using namespace nglat;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<int> n_list;
    std::string domain;
    std::optional<double> delta;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--seed", c.seed, "RNG seed");
    sub->add_option("--n-list", c.n_list, "mesh parameters, ascending")->delimiter(',');
    sub->add_option("--domain", c.domain, "domain preset (disc, bean)");
    sub->add_option("--delta", c.delta, "blob offset delta");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (!c.out.empty()) cfg.out_dir = c.out;
    if (c.seed) cfg.seed = *c.seed;
    if (!c.domain.empty()) {
        cfg.domain = c.domain;
        cfg.coefficients.clear();
    }
    if (c.delta) cfg.delta = *c.delta;
    cfg.validate();
    return cfg;
}

std::vector<int>& n_list_for(RunConfig& cfg, const std::string& cmd) {
    if (cmd == "beurling") return cfg.beurling.n_list;
    if (cmd == "polydecay") return cfg.polydecay.n_list;
    if (cmd == "gflower") return cfg.gflower.n_list;
    if (cmd == "capa") return cfg.capa.n_list;
    if (cmd == "mixing") return cfg.mixing.n_list;
    return cfg.n_list;
}

void write_report(const ExperimentReport& r, const fs::path& dir) {
    write_text(dir / (r.name + ".json"), r.to_json().dump(2) + "\n");
    write_text(dir / (r.name + ".csv"), r.to_csv());
}

// (t, value) tables per n from the mixing report.
void write_decay_tables(const ExperimentReport& mix, const fs::path& dir) {
    std::vector<int> ns;
    for (const auto& r : mix.rows)
        if (ns.empty() || ns.back() != static_cast<int>(r[0])) ns.push_back(static_cast<int>(r[0]));
    for (int n : ns) {
        std::ostringstream bal, tv;
        bal << "t,value\n";
        tv << "t,value\n";
        for (const auto& r : mix.rows) {
            if (static_cast<int>(r[0]) != n) continue;
            bal << format_double(r[1]) << ',' << format_double(r[2]) << '\n';
            tv << format_double(r[1]) << ',' << format_double(r[3]) << '\n';
        }
        write_text(dir / ("balance_n" + std::to_string(n) + ".csv"), bal.str());
        write_text(dir / ("tv_n" + std::to_string(n) + ".csv"), tv.str());
    }
}

int cmd_discretize(const RunConfig& cfg) {
    const auto d = cfg.build();
    const auto b = select_blob_centers(d, cfg.delta);
    for (int n : cfg.n_list) {
        const auto g = discretize(d, n, b);
        write_text(fs::path(cfg.out_dir) / ("graph_n" + std::to_string(n) + ".json"), graph_to_json(g).dump() + "\n");
        std::printf("n=%d vertices=%zu blob=%zu\n", n, g.size(), g.require_blobs().set1.size());
    }
    return 0;
}

int cmd_green(const RunConfig& cfg) {
    const auto d = cfg.build();
    const auto b = select_blob_centers(d, cfg.delta);
    for (int n : cfg.n_list) {
        const auto g = discretize(d, n, b);
        const auto [H, rep] = solve_green_raw(g, cfg.tol);
        const auto nz = normalize(d, g, H, cfg.boundary_samples);
        const fs::path dir(cfg.out_dir);
        write_text(dir / ("green_n" + std::to_string(n) + ".csv"), field_to_csv(g, nz.field));
        json j = solve_report_to_json(rep);
        j["n"] = n;
        j["c_hat"] = nz.c_hat;
        write_text(dir / ("solve_n" + std::to_string(n) + ".json"), j.dump(2) + "\n");
        std::printf("n=%d iterations=%d residual=%.3e c_hat=%.3e\n", n, rep.iterations, rep.residual_norm, nz.c_hat);
    }
    return 0;
}

int cmd_gstar(const RunConfig& cfg, int grid) {
    const auto d = cfg.build();
    const auto b = select_blob_centers(d, cfg.delta);
    const GStar gs(d, b, cfg.quadrature);
    std::ostringstream os;
    os << "x,y,gstar\n";
    for (int k = 0; k < grid; ++k) {
        const double r = grid > 1 ? static_cast<double>(k) / (grid - 1) : 0.0;
        for (int l = 0; l < grid; ++l) {
            const cplx z = d.phi(std::polar(r, 2.0 * std::numbers::pi * l / grid));
            os << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(gs(z)) << '\n';
            if (k == 0) break;
        }
    }
    write_text(fs::path(cfg.out_dir) / "gstar.csv", os.str());
    return 0;
}

int run_experiment(const std::string& cmd, const RunConfig& cfg) {
    std::vector<ExperimentReport> reps;
    if (cmd == "convergence") reps.push_back(run_convergence(cfg));
    else if (cmd == "beurling") reps.push_back(run_beurling(cfg));
    else if (cmd == "polydecay") reps.push_back(run_polydecay(cfg));
    else if (cmd == "gflower") reps.push_back(run_gflower(cfg));
    else if (cmd == "capa") reps.push_back(run_capa(cfg));
    else if (cmd == "mixing") reps = run_mixing(cfg);
    const fs::path dir(cfg.out_dir);
    for (const auto& r : reps) {
        write_report(r, dir);
        if (r.name == "mixing") write_decay_tables(r, dir);
        std::cout << r.to_csv();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete Neumann Green functions on lattice domains"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> names{
        {"discretize", "build U_n and write the graph as JSON"},
        {"green", "solve and normalize the discrete Green function"},
        {"gstar", "evaluate the continuum limit on a polar probe grid"},
        {"convergence", "sup-norm error against the continuum limit per n"},
        {"beurling", "hitting probability past a segment obstacle"},
        {"polydecay", "probability of reaching a small ball near the boundary"},
        {"gflower", "point-hitting probabilities inside a subdomain"},
        {"capa", "escape from a blob past a hugging obstacle"},
        {"mixing", "blob balance decay, TV mixing, heat-kernel fit, survival tail"},
        {"all", "every experiment selected in the config"}};
    Common common;
    int gstar_grid = 64;
    for (const auto& [name, about] : names) {
        auto* sub = app.add_subcommand(name, about);
        add_common(sub, common);
        if (name == "gstar") sub->add_option("--grid", gstar_grid, "polar probe grid size");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = resolve(common);
        if (!common.n_list.empty()) {
            n_list_for(cfg, cmd) = common.n_list;
            cfg.validate();
        }
        if (cmd == "discretize") return cmd_discretize(cfg);
        if (cmd == "green") return cmd_green(cfg);
        if (cmd == "gstar") return cmd_gstar(cfg, gstar_grid);
        if (cmd == "all") {
            const Bundle bundle = run_all(cfg);
            write_bundle(bundle, cfg.out_dir);
            for (const auto& r : bundle.reports)
                std::printf("%-14s %s\n", r.name.c_str(), r.ok() ? "ok" : r.errors.front().c_str());
            return bundle.ok() ? 0 : 1;
        }
        return run_experiment(cmd, cfg);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
