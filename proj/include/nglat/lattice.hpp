#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "domain.hpp"
#include "error.hpp"

namespace nglat {

struct LatticePoint {
    int i = 0;
    int j = 0;
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

enum Direction : int { North = 0, East = 1, South = 2, West = 3 };
inline constexpr std::array<LatticePoint, 4> kSteps{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};

struct BlobVertices {
    LatticePoint anchor1;
    LatticePoint anchor2;
    std::vector<int> set1;
    std::vector<int> set2;
};

namespace detail {
inline std::uint64_t next_graph_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

/// The graph U_n = U ∩ (1/n)ℤ² with nearest-neighbour edges, boundary-crossing
/// edges removed. Vertices carry integer lattice coordinates (i, j) standing
/// for the point (i/n, j/n).
class LatticeGraph {
public:
    LatticeGraph(int n, std::vector<LatticePoint> vertices, std::vector<std::array<int, 4>> adjacency)
        : n_(n), id_(detail::next_graph_id()), vertices_(std::move(vertices)), adjacency_(std::move(adjacency)) {
        if (vertices_.size() != adjacency_.size()) throw std::invalid_argument("adjacency size mismatch");
        if (vertices_.empty()) throw std::invalid_argument("empty lattice graph");
        i0_ = j0_ = std::numeric_limits<int>::max();
        int i1 = std::numeric_limits<int>::min(), j1 = i1;
        for (const auto& v : vertices_) {
            i0_ = std::min(i0_, v.i);
            j0_ = std::min(j0_, v.j);
            i1 = std::max(i1, v.i);
            j1 = std::max(j1, v.j);
        }
        width_ = i1 - i0_ + 1;
        height_ = j1 - j0_ + 1;
        grid_.assign(static_cast<std::size_t>(width_) * height_, -1);
        degrees_.resize(vertices_.size());
        for (std::size_t k = 0; k < vertices_.size(); ++k) {
            grid_[slot(vertices_[k].i, vertices_[k].j)] = static_cast<int>(k);
            int deg = 0;
            for (int nb : adjacency_[k]) deg += nb >= 0 ? 1 : 0;
            degrees_[k] = deg;
            total_degree_ += deg;
        }
    }

    int n() const noexcept { return n_; }
    std::uint64_t id() const noexcept { return id_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    std::span<const LatticePoint> vertices() const noexcept { return vertices_; }
    const LatticePoint& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 4>& neighbors(int v) const { return adjacency_[v]; }
    int degree(int v) const { return degrees_[v]; }
    std::span<const int> degrees() const noexcept { return degrees_; }
    long total_degree() const noexcept { return total_degree_; }

    cplx position(int v) const { return to_plane(vertices_[v]); }
    cplx to_plane(LatticePoint p) const noexcept {
        return {static_cast<double>(p.i) / n_, static_cast<double>(p.j) / n_};
    }

    int index_of(int i, int j) const noexcept {
        if (i < i0_ || j < j0_ || i >= i0_ + width_ || j >= j0_ + height_) return -1;
        return grid_[slot(i, j)];
    }
    int index_of(LatticePoint p) const noexcept { return index_of(p.i, p.j); }

    bool has_edge(int a, int b) const {
        for (int nb : adjacency_[a])
            if (nb == b) return true;
        return false;
    }

    const std::optional<BlobVertices>& blobs() const noexcept { return blobs_; }
    const BlobVertices& require_blobs() const {
        if (!blobs_) throw std::logic_error("lattice graph has no blob assignment");
        return *blobs_;
    }
    void set_blobs(BlobVertices b) { blobs_ = std::move(b); }

private:
    std::size_t slot(int i, int j) const noexcept {
        return static_cast<std::size_t>(j - j0_) * width_ + static_cast<std::size_t>(i - i0_);
    }

    int n_;
    std::uint64_t id_;
    std::vector<LatticePoint> vertices_;
    std::vector<std::array<int, 4>> adjacency_;
    std::vector<int> degrees_;
    long total_degree_ = 0;
    int i0_ = 0, j0_ = 0, width_ = 0, height_ = 0;
    std::vector<int> grid_;
    std::optional<BlobVertices> blobs_;
};

/// One real value per vertex of a specific LatticeGraph.
struct ScalarField {
    std::uint64_t graph_id = 0;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(const LatticeGraph& g, double fill = 0.0) : graph_id(g.id()), values(g.size(), fill) {}
    ScalarField(const LatticeGraph& g, std::vector<double> v) : graph_id(g.id()), values(std::move(v)) {
        if (values.size() != g.size()) throw std::invalid_argument("field length does not match vertex count");
    }

    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    std::size_t size() const noexcept { return values.size(); }
};

inline void require_bound(const LatticeGraph& g, const ScalarField& f) {
    if (f.graph_id != g.id() || f.size() != g.size()) throw std::invalid_argument("field is not bound to this graph");
}

inline constexpr int kEdgeSamples = 17;

/// Builds U_n. An edge is kept iff all 17 equally spaced points on the closed
/// segment lie in U. Degree-0 vertices are dropped; the rest must form one
/// connected component.
inline LatticeGraph discretize(const ConformalDomain& d, int n) {
    if (n < 8) throw std::invalid_argument("discretize requires n >= 8");
    const auto& box = d.bounding_box();
    const int ilo = static_cast<int>(std::floor(box.xmin * n)) - 1;
    const int ihi = static_cast<int>(std::ceil(box.xmax * n)) + 1;
    const int jlo = static_cast<int>(std::floor(box.ymin * n)) - 1;
    const int jhi = static_cast<int>(std::ceil(box.ymax * n)) + 1;
    const int w = ihi - ilo + 1;
    const int h = jhi - jlo + 1;
    auto at = [&](int i, int j) { return static_cast<std::size_t>(j - jlo) * w + (i - ilo); };

    std::vector<char> inside(static_cast<std::size_t>(w) * h, 0);
    for (int j = jlo; j <= jhi; ++j)
        for (int i = ilo; i <= ihi; ++i)
            inside[at(i, j)] = d.contains(cplx{static_cast<double>(i) / n, static_cast<double>(j) / n}) ? 1 : 0;

    auto segment_inside = [&](int i, int j, int di, int dj) {
        for (int s = 1; s < kEdgeSamples - 1; ++s) {
            const double f = static_cast<double>(s) / (kEdgeSamples - 1);
            const cplx p{(i + f * di) / n, (j + f * dj) / n};
            if (!d.contains(p)) return false;
        }
        return true;
    };

    // east_ok / north_ok record kept edges leaving (i, j).
    std::vector<char> east_ok(inside.size(), 0), north_ok(inside.size(), 0);
    for (int j = jlo; j <= jhi; ++j) {
        for (int i = ilo; i <= ihi; ++i) {
            if (!inside[at(i, j)]) continue;
            if (i < ihi && inside[at(i + 1, j)]) east_ok[at(i, j)] = segment_inside(i, j, 1, 0) ? 1 : 0;
            if (j < jhi && inside[at(i, j + 1)]) north_ok[at(i, j)] = segment_inside(i, j, 0, 1) ? 1 : 0;
        }
    }
    auto edge = [&](int i, int j, int dir) -> bool {
        switch (dir) {
            case North: return j < jhi && north_ok[at(i, j)];
            case East: return i < ihi && east_ok[at(i, j)];
            case South: return j > jlo && north_ok[at(i, j - 1)];
            default: return i > ilo && east_ok[at(i - 1, j)];
        }
    };

    std::vector<int> index(inside.size(), -1);
    std::vector<LatticePoint> verts;
    for (int j = jlo; j <= jhi; ++j) {
        for (int i = ilo; i <= ihi; ++i) {
            if (!inside[at(i, j)]) continue;
            bool any = false;
            for (int dir = 0; dir < 4; ++dir) any = any || edge(i, j, dir);
            if (!any) continue;
            index[at(i, j)] = static_cast<int>(verts.size());
            verts.push_back({i, j});
        }
    }
    if (verts.empty()) throw Disconnected("no lattice vertices with an edge at n = " + std::to_string(n));

    std::vector<std::array<int, 4>> adj(verts.size());
    for (std::size_t k = 0; k < verts.size(); ++k) {
        const auto [i, j] = verts[k];
        for (int dir = 0; dir < 4; ++dir)
            adj[k][dir] = edge(i, j, dir) ? index[at(i + kSteps[dir].i, j + kSteps[dir].j)] : -1;
    }

    std::vector<char> seen(verts.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int nb : adj[v]) {
            if (nb >= 0 && !seen[nb]) {
                seen[nb] = 1;
                ++reached;
                q.push(nb);
            }
        }
    }
    if (reached != verts.size()) {
        throw Disconnected("U_n has more than one component at n = " + std::to_string(n) + " (" +
                           std::to_string(reached) + " of " + std::to_string(verts.size()) + " reached)");
    }
    return LatticeGraph(n, std::move(verts), std::move(adj));
}

/// Offsets (di, dj) with di² + dj² < R², R in lattice units. Shared by both
/// blobs so their cardinalities agree exactly.
inline std::vector<LatticePoint> lattice_ball_offsets(double radius_lattice) {
    std::vector<LatticePoint> out;
    const int r = static_cast<int>(std::ceil(radius_lattice));
    const double r2 = radius_lattice * radius_lattice;
    for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di)
            if (static_cast<double>(di * di + dj * dj) < r2) out.push_back({di, dj});
    return out;
}

inline LatticePoint nearest_lattice_point(cplx y, int n) {
    // std::round rounds half away from zero.
    return {static_cast<int>(std::round(y.real() * n)), static_cast<int>(std::round(y.imag() * n))};
}

inline BlobVertices blob_vertices(const LatticeGraph& g, const BlobSpec& b) {
    BlobVertices out;
    out.anchor1 = nearest_lattice_point(b.center1, g.n());
    out.anchor2 = nearest_lattice_point(b.center2, g.n());
    const auto offsets = lattice_ball_offsets(b.radius * g.n());
    for (int which = 0; which < 2; ++which) {
        const LatticePoint z = which == 0 ? out.anchor1 : out.anchor2;
        auto& set = which == 0 ? out.set1 : out.set2;
        for (const auto& o : offsets) {
            const int v = g.index_of(z.i + o.i, z.j + o.j);
            if (v < 0 || g.degree(v) < 4) {
                throw BlobTouchesBoundary("blob " + std::to_string(which + 1) + " vertex (" +
                                          std::to_string(z.i + o.i) + ", " + std::to_string(z.j + o.j) +
                                          ") is missing or has degree < 4");
            }
            set.push_back(v);
        }
    }
    return out;
}

inline LatticeGraph discretize(const ConformalDomain& d, int n, const BlobSpec& b) {
    LatticeGraph g = discretize(d, n);
    g.set_blobs(blob_vertices(g, b));
    return g;
}

/// π_RW(z) = d_z / Σ d.
inline ScalarField stationary_measure(const LatticeGraph& g) {
    ScalarField pi(g);
    const double total = static_cast<double>(g.total_degree());
    for (std::size_t v = 0; v < g.size(); ++v) pi[v] = g.degree(static_cast<int>(v)) / total;
    return pi;
}

/// (Δf)(x) = f(x) − (1/d_x) Σ_{y∼x} f(y).
inline ScalarField apply_laplacian(const LatticeGraph& g, const ScalarField& f) {
    require_bound(g, f);
    ScalarField out(g);
    for (std::size_t v = 0; v < g.size(); ++v) {
        double s = 0.0;
        for (int nb : g.neighbors(static_cast<int>(v)))
            if (nb >= 0) s += f[nb];
        out[v] = f[v] - s / g.degree(static_cast<int>(v));
    }
    return out;
}

/// True iff the unit square with lower-left corner (i, j) has all four
/// corners and all four sides in U_n.
inline bool full_square(const LatticeGraph& g, int i, int j) {
    const int a = g.index_of(i, j), b = g.index_of(i + 1, j);
    const int c = g.index_of(i + 1, j + 1), e = g.index_of(i, j + 1);
    if (a < 0 || b < 0 || c < 0 || e < 0) return false;
    return g.neighbors(a)[East] == b && g.neighbors(b)[North] == c && g.neighbors(e)[East] == c &&
           g.neighbors(a)[North] == e;
}

/// Connected components of S in U_n* (U_n plus both diagonals of every full
/// unit square). Components are listed in order of their smallest member.
inline std::vector<std::vector<int>> star_components(const LatticeGraph& g, std::span<const int> subset) {
    std::vector<int> member(g.size(), -1);
    for (std::size_t k = 0; k < subset.size(); ++k) {
        if (subset[k] < 0 || static_cast<std::size_t>(subset[k]) >= g.size())
            throw std::out_of_range("star_components: vertex index out of range");
        member[subset[k]] = static_cast<int>(k);
    }
    std::vector<int> parent(subset.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (std::size_t k = 0; k < subset.size(); ++k) {
        const int v = subset[k];
        for (int nb : g.neighbors(v))
            if (nb >= 0 && member[nb] >= 0) unite(static_cast<int>(k), member[nb]);
        const auto [i, j] = g.vertex(v);
        // Diagonal partners through the four squares incident to v.
        const std::array<std::array<int, 4>, 4> squares{{
            {i, j, i + 1, j + 1},
            {i - 1, j, i - 1, j + 1},
            {i - 1, j - 1, i - 1, j - 1},
            {i, j - 1, i + 1, j - 1},
        }};
        for (const auto& s : squares) {
            if (!full_square(g, s[0], s[1])) continue;
            const int w = g.index_of(s[2], s[3]);
            if (w >= 0 && member[w] >= 0) unite(static_cast<int>(k), member[w]);
        }
    }
    std::vector<std::vector<int>> comps;
    std::vector<int> comp_of(subset.size(), -1);
    std::vector<std::size_t> order(subset.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return subset[a] < subset[b]; });
    for (std::size_t k : order) {
        const int root = find(static_cast<int>(k));
        if (comp_of[root] < 0) {
            comp_of[root] = static_cast<int>(comps.size());
            comps.emplace_back();
        }
        comps[comp_of[root]].push_back(subset[k]);
    }
    return comps;
}

}  // namespace nglat
