#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "green.hpp"
#include "lattice.hpp"
#include "report.hpp"

namespace nglat {

/// {n, vertices: [[i, j], ...], edges: [[a, b], ...] with a < b, blob1, blob2}.
inline json graph_to_json(const LatticeGraph& g) {
    json j;
    j["n"] = g.n();
    json verts = json::array();
    for (const auto& p : g.vertices()) verts.push_back({p.i, p.j});
    j["vertices"] = std::move(verts);
    json edges = json::array();
    for (std::size_t a = 0; a < g.size(); ++a)
        for (int b : g.neighbors(static_cast<int>(a)))
            if (b > static_cast<int>(a)) edges.push_back({static_cast<int>(a), b});
    j["edges"] = std::move(edges);
    if (const auto& b = g.blobs()) {
        j["blob1"] = b->set1;
        j["blob2"] = b->set2;
    } else {
        j["blob1"] = json::array();
        j["blob2"] = json::array();
    }
    return j;
}

/// CSV with columns i, j, value.
inline std::string field_to_csv(const LatticeGraph& g, const ScalarField& f) {
    require_bound(g, f);
    std::ostringstream os;
    os << "i,j,value\n";
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& p = g.vertex(static_cast<int>(v));
        os << p.i << ',' << p.j << ',' << format_double(f[v]) << '\n';
    }
    return os.str();
}

inline json solve_report_to_json(const SolveReport& r) {
    return {{"iterations", r.iterations}, {"residual_norm", r.residual_norm}, {"wall_time", r.wall_time}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace nglat
