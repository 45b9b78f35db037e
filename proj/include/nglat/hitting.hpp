#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "fit.hpp"
#include "green.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "walker.hpp"

namespace nglat {

/// u(x) = P_x(τ(target) ≤ τ(avoid)) on graph `g`.
struct HittingProblem {
    const LatticeGraph* graph = nullptr;
    std::vector<int> target;
    std::vector<int> avoid;
};

enum class Role : char { free, target, avoid };

inline std::vector<Role> classify(const HittingProblem& p) {
    if (p.graph == nullptr) throw std::invalid_argument("hitting problem has no graph");
    if (p.target.empty() || p.avoid.empty()) throw std::invalid_argument("target and avoid must be nonempty");
    std::vector<Role> role(p.graph->size(), Role::free);
    for (int v : p.target) {
        if (v < 0 || static_cast<std::size_t>(v) >= role.size()) throw std::out_of_range("target vertex out of range");
        role[v] = Role::target;
    }
    for (int v : p.avoid) {
        if (v < 0 || static_cast<std::size_t>(v) >= role.size()) throw std::out_of_range("avoid vertex out of range");
        if (role[v] == Role::target) throw std::invalid_argument("target and avoid overlap");
        role[v] = Role::avoid;
    }
    return role;
}

struct HittingSolution {
    ScalarField u;            // NaN on free components that touch neither set
    std::size_t undefined = 0;
    int iterations = 0;
};

/// Exact solve: u = 1 on target, 0 on avoid, Δu = 0 on free vertices. The
/// free block (D − A restricted to free vertices) is SPD on every free
/// component adjacent to an absorbing vertex and is solved by Jacobi PCG to
/// max|Δu| ≤ tol on free vertices.
inline HittingSolution hitting_probability(const HittingProblem& p, double tol = 1e-12) {
    const LatticeGraph& g = *p.graph;
    const auto role = classify(p);
    const std::size_t V = g.size();

    // Free vertices reachable from an absorbing set through free vertices.
    std::vector<char> reached(V, 0);
    std::vector<int> stack;
    for (std::size_t v = 0; v < V; ++v) {
        if (role[v] == Role::free) continue;
        for (int nb : g.neighbors(static_cast<int>(v)))
            if (nb >= 0 && role[nb] == Role::free && !reached[nb]) {
                reached[nb] = 1;
                stack.push_back(nb);
            }
    }
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int nb : g.neighbors(v))
            if (nb >= 0 && role[nb] == Role::free && !reached[nb]) {
                reached[nb] = 1;
                stack.push_back(nb);
            }
    }

    HittingSolution sol;
    sol.u = ScalarField(g, 0.0);
    std::vector<int> local(V, -1), free_ids;
    for (std::size_t v = 0; v < V; ++v) {
        if (role[v] == Role::target) sol.u[v] = 1.0;
        if (role[v] != Role::free) continue;
        if (reached[v]) {
            local[v] = static_cast<int>(free_ids.size());
            free_ids.push_back(static_cast<int>(v));
        } else {
            sol.u[v] = std::numeric_limits<double>::quiet_NaN();
            ++sol.undefined;
        }
    }
    if (free_ids.empty()) return sol;

    const std::size_t m = free_ids.size();
    std::vector<double> diag(m), b(m, 0.0), x(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const int v = free_ids[k];
        diag[k] = g.degree(v);
        for (int nb : g.neighbors(v))
            if (nb >= 0 && role[nb] == Role::target) b[k] += 1.0;
        x[k] = b[k] / diag[k];
    }
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < m; ++k) {
            const int v = free_ids[k];
            double s = diag[k] * in[k];
            for (int nb : g.neighbors(v))
                if (nb >= 0 && local[nb] >= 0) s -= in[local[nb]];
            out[k] = s;
        }
    };
    // Residual r of the degree-scaled system; Δu = −r/d on free vertices.
    auto stop = [&](std::span<const double> r) {
        double worst = 0.0;
        for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(r[k]) / diag[k]);
        return worst <= 0.5 * tol;
    };
    const int cap = static_cast<int>(std::max<std::size_t>(10 * V, 100));
    const CgResult res = pcg(apply, diag, b, x, stop, cap);
    if (!res.converged)
        throw SolverStalled("hitting solve did not reach tol " + format_double(tol) + " in " + std::to_string(cap) +
                            " iterations");
    sol.iterations = res.iterations;
    for (std::size_t k = 0; k < m; ++k) sol.u[free_ids[k]] = std::clamp(x[k], 0.0, 1.0);
    return sol;
}

/// Vertices x ∉ A with a neighbour in A.
inline std::vector<int> boundary_neighbors(const LatticeGraph& g, std::span<const int> A) {
    std::vector<char> in(g.size(), 0), mark(g.size(), 0);
    for (int v : A) in[v] = 1;
    std::vector<int> out;
    for (int v : A)
        for (int nb : g.neighbors(v))
            if (nb >= 0 && !in[nb] && !mark[nb]) {
                mark[nb] = 1;
                out.push_back(nb);
            }
    std::sort(out.begin(), out.end());
    return out;
}

/// Lattice chain through the nearest lattice points of a polyline: between
/// consecutive points, unit steps along whichever axis keeps the chain
/// closest to the straight segment. Consecutive chain points are
/// 4-neighbours. Throws ObstacleInvalid if a chain point is not a vertex.
inline std::vector<int> rasterize_polyline(const LatticeGraph& g, std::span<const cplx> pts, bool closed = false) {
    if (pts.empty()) throw ObstacleInvalid("empty polyline");
    std::vector<LatticePoint> chain;
    auto push = [&](LatticePoint p) {
        if (chain.empty() || chain.back().i != p.i || chain.back().j != p.j) chain.push_back(p);
    };
    const std::size_t segs = closed ? pts.size() : pts.size() - 1;
    push(nearest_lattice_point(pts[0], g.n()));
    for (std::size_t s = 0; s < segs; ++s) {
        const LatticePoint a = nearest_lattice_point(pts[s], g.n());
        const LatticePoint b = nearest_lattice_point(pts[(s + 1) % pts.size()], g.n());
        LatticePoint cur = a;
        const double dx = b.i - a.i, dy = b.j - a.j;
        const double len = std::hypot(dx, dy);
        while (cur.i != b.i || cur.j != b.j) {
            LatticePoint step_i = cur, step_j = cur;
            step_i.i += (b.i > cur.i) - (b.i < cur.i);
            step_j.j += (b.j > cur.j) - (b.j < cur.j);
            auto off_line = [&](LatticePoint q) {
                return len == 0.0 ? 0.0 : std::abs(dx * (q.j - a.j) - dy * (q.i - a.i)) / len;
            };
            if (step_i.i == cur.i)
                cur = step_j;
            else if (step_j.j == cur.j)
                cur = step_i;
            else
                cur = off_line(step_i) <= off_line(step_j) ? step_i : step_j;
            push(cur);
        }
    }
    std::vector<int> out;
    for (const auto& p : chain) {
        const int v = g.index_of(p);
        if (v < 0) throw ObstacleInvalid("obstacle chain leaves U_n at lattice point (" + std::to_string(p.i) + ", " +
                                         std::to_string(p.j) + ")");
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

/// Polyline approximating the circle arc c + r·e^{iθ}, θ ∈ [θ0, θ1].
inline std::vector<cplx> arc_points(cplx center, double radius, double theta0, double theta1, int pieces = 64) {
    std::vector<cplx> pts;
    for (int k = 0; k <= pieces; ++k)
        pts.push_back(center + std::polar(radius, theta0 + (theta1 - theta0) * k / pieces));
    return pts;
}

inline double set_diameter(const LatticeGraph& g, std::span<const int> A) {
    double best = 0.0;
    for (std::size_t a = 0; a < A.size(); ++a)
        for (std::size_t b = a + 1; b < A.size(); ++b)
            best = std::max(best, std::abs(g.position(A[a]) - g.position(A[b])));
    return best;
}

inline double set_distance(const LatticeGraph& g, std::span<const int> A, std::span<const int> B) {
    double best = std::numeric_limits<double>::infinity();
    for (int a : A)
        for (int b : B) best = std::min(best, std::abs(g.position(a) - g.position(b)));
    return best;
}

/// True iff the subset is connected in the graph induced on it.
inline bool graph_connected(const LatticeGraph& g, std::span<const int> A) {
    if (A.empty()) return false;
    std::vector<char> in(g.size(), 0), seen(g.size(), 0);
    for (int v : A) in[v] = 1;
    std::vector<int> stack{A[0]};
    seen[A[0]] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int nb : g.neighbors(v))
            if (nb >= 0 && in[nb] && !seen[nb]) {
                seen[nb] = 1;
                ++count;
                stack.push_back(nb);
            }
    }
    std::size_t distinct = 0;
    for (char c : in) distinct += c;
    return count == distinct;
}

inline double measure_of(const LatticeGraph& g, std::span<const int> A) {
    long s = 0;
    for (int v : A) s += g.degree(v);
    return static_cast<double>(s) / static_cast<double>(g.total_degree());
}

inline std::vector<int> vertices_where(const LatticeGraph& g, const std::function<bool(cplx)>& pred) {
    std::vector<int> out;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (pred(g.position(static_cast<int>(v)))) out.push_back(static_cast<int>(v));
    return out;
}

using ObstacleRule = std::function<std::vector<int>(const LatticeGraph&)>;

/// Straight segment obstacle between two points of U.
inline ObstacleRule segment_obstacle(cplx a, cplx b) {
    return [a, b](const LatticeGraph& g) {
        const std::array<cplx, 2> pts{a, b};
        return rasterize_polyline(g, pts);
    };
}

/// Closed lattice circle of the given radius around `center`.
inline ObstacleRule ring_obstacle(cplx center, double radius) {
    return [center, radius](const LatticeGraph& g) {
        const auto pts = arc_points(center, radius, 0.0, 2.0 * std::numbers::pi, 128);
        return rasterize_polyline(g, std::span<const cplx>(pts).first(pts.size() - 1), true);
    };
}

inline json n_list_json(std::span<const int> n_list) { return json(std::vector<int>(n_list.begin(), n_list.end())); }

/// sup_{x∼A} P_x(τ(U_{1,n}) ≤ τ(A)) for each n, and the fit of
/// log(sup) against log(n); β̂ is minus the slope.
inline ExperimentReport beurling_experiment(const ConformalDomain& d, const BlobSpec& b, const ObstacleRule& rule,
                                            double c_min, std::span<const int> n_list, double tol = 1e-12) {
    ExperimentReport rep;
    rep.name = "beurling";
    rep.module = "hitting";
    rep.operation = "beurling_experiment";
    rep.parameters = {{"delta", b.delta}, {"c_min", c_min}, {"n_list", n_list_json(n_list)}, {"tol", tol}};
    rep.columns = {"n", "sup_hit", "argmax_x", "argmax_y", "obstacle_size", "obstacle_diameter", "obstacle_distance",
                   "iterations"};
    std::vector<std::vector<double>> rows(n_list.size());
    parallel_for(n_list.size(), [&](std::size_t k) {
        const int n = n_list[k];
        const LatticeGraph g = discretize(d, n, b);
        const auto& blobs = g.require_blobs();
        auto A = rule(g);
        if (A.empty()) throw ObstacleInvalid("obstacle is empty at n = " + std::to_string(n));
        if (star_components(g, A).size() != 1)
            throw ObstacleInvalid("obstacle is not *-connected at n = " + std::to_string(n));
        const double diam = set_diameter(g, A);
        if (diam < c_min) throw ObstacleInvalid("obstacle diameter " + format_double(diam) + " < c_min");
        double dist = std::numeric_limits<double>::infinity();
        for (int a : A) dist = std::min(dist, std::abs(g.position(a) - b.center1) - b.radius);
        if (dist < c_min) throw ObstacleInvalid("obstacle distance to U1 " + format_double(dist) + " < c_min");
        for (int v : blobs.set1)
            if (std::find(A.begin(), A.end(), v) != A.end()) throw ObstacleInvalid("obstacle meets U1");
        const auto sol = hitting_probability({&g, blobs.set1, A}, tol);
        double best = 0.0;
        cplx where{};
        for (int x : boundary_neighbors(g, A)) {
            const double u = sol.u[x];
            if (std::isfinite(u) && u > best) {
                best = u;
                where = g.position(x);
            }
        }
        rows[k] = {static_cast<double>(n), best, where.real(), where.imag(), static_cast<double>(A.size()), diam,
                   dist, static_cast<double>(sol.iterations)};
    });
    for (auto& r : rows) rep.add_row(std::move(r));
    if (rows.size() >= 2) {
        std::vector<double> ln, ls;
        bool positive = true;
        for (const auto& r : rep.rows) {
            ln.push_back(std::log(r[0]));
            positive = positive && r[1] > 0.0;
            ls.push_back(std::log(r[1]));
        }
        if (positive) {
            const auto f = linear_fit(ln, ls);
            rep.fits["log_sup_vs_log_n"] = {f, "log(n)", "log(sup_hit)"};
            rep.summary["beta_hat"] = -f.slope;
            rep.summary["r2"] = f.r2;
        }
    }
    return rep;
}

using RegionRule = std::function<std::vector<int>(const LatticeGraph&)>;

/// Vertices with Im ψ(v) > 0: the half of U far from the anchor φ(−i).
inline RegionRule far_half(const ConformalDomain& d) {
    return [&d](const LatticeGraph& g) {
        return vertices_where(g, [&d](cplx z) { return d.psi(z).imag() > 0.0; });
    };
}

/// For each (ε, n): sup over z ∈ U_n \ B(x₁, 1/2) of P_z(τ(B(x₁, ε) ∩ U_n) ≤ τ(A)).
inline ExperimentReport polydecay_experiment(const ConformalDomain& d, cplx x1, const RegionRule& A_rule, double alpha,
                                             std::span<const double> eps_list, std::span<const int> n_list,
                                             double tol = 1e-12) {
    for (double e : eps_list)
        if (!(e > 0.0 && e < 0.25)) throw ObstacleInvalid("polydecay requires 0 < eps < 1/4, got " + format_double(e));
    ExperimentReport rep;
    rep.name = "polydecay";
    rep.module = "hitting";
    rep.operation = "polydecay_experiment";
    rep.parameters = {{"x1", {x1.real(), x1.imag()}},
                      {"alpha", alpha},
                      {"eps_list", std::vector<double>(eps_list.begin(), eps_list.end())},
                      {"n_list", n_list_json(n_list)},
                      {"tol", tol}};
    rep.columns = {"eps", "n", "sup_hit", "pi_A", "target_size"};
    const std::size_t cells = eps_list.size() * n_list.size();
    std::vector<std::vector<double>> rows(cells);
    std::vector<LatticeGraph> graphs;
    std::vector<std::vector<int>> sets;
    for (int n : n_list) {
        graphs.push_back(discretize(d, n));
        sets.push_back(A_rule(graphs.back()));
        const double pa = measure_of(graphs.back(), sets.back());
        if (pa < alpha)
            throw ObstacleInvalid("pi(A) = " + format_double(pa) + " < alpha at n = " + std::to_string(n));
    }
    parallel_for(cells, [&](std::size_t c) {
        const std::size_t ei = c / n_list.size(), ni = c % n_list.size();
        const double eps = eps_list[ei];
        const LatticeGraph& g = graphs[ni];
        const auto& A = sets[ni];
        const auto target = vertices_where(g, [&](cplx z) { return std::abs(z - x1) < eps; });
        if (target.empty()) throw ObstacleInvalid("B(x1, eps) contains no vertex at n = " + std::to_string(g.n()));
        for (int v : target)
            if (std::find(A.begin(), A.end(), v) != A.end()) throw ObstacleInvalid("B(x1, eps) meets A");
        const auto sol = hitting_probability({&g, target, A}, tol);
        double best = 0.0;
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (std::abs(g.position(static_cast<int>(v)) - x1) < 0.5) continue;
            if (std::isfinite(sol.u[v])) best = std::max(best, sol.u[v]);
        }
        rows[c] = {eps, static_cast<double>(g.n()), best, measure_of(g, A), static_cast<double>(target.size())};
    });
    json trend = json::array();
    for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
        double s = 0.0;
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) s = std::max(s, rows[ei * n_list.size() + ni][2]);
        trend.push_back({{"eps", eps_list[ei]}, {"sup_over_n", s}});
    }
    for (auto& r : rows) rep.add_row(std::move(r));
    rep.summary["trend"] = std::move(trend);
    return rep;
}

/// Vertices of U_n inside φ({|ζ| < alpha}).
inline std::vector<int> inner_region(const ConformalDomain& d, const LatticeGraph& g, double alpha) {
    return vertices_where(g, [&](cplx z) {
        const auto w = d.try_psi(z);
        return w && std::abs(*w) < alpha;
    });
}

struct PointPair {
    int y = 0;
    int z = 0;
    std::string label;
};

using PairRule = std::function<std::vector<PointPair>(const ConformalDomain&, const LatticeGraph&)>;

/// z = vertex nearest φ(0); y = z shifted east by one lattice step (d = 1/n)
/// and by floor(f·ε²·n) steps for f ∈ {1/2, 1}.
inline PairRule default_pairs(double eps) {
    return [eps](const ConformalDomain& d, const LatticeGraph& g) {
        const LatticePoint zc = nearest_lattice_point(d.phi(cplx{0.0, 0.0}), g.n());
        const int z = g.index_of(zc);
        if (z < 0) throw PairInvalid("phi(0) has no lattice vertex nearby");
        std::vector<PointPair> out;
        auto add = [&](int steps, std::string label) {
            const int y = g.index_of(zc.i + steps, zc.j);
            if (y < 0) throw PairInvalid("pair partner outside U_n");
            out.push_back({y, z, std::move(label)});
        };
        add(1, "neighbor");
        for (double f : {0.5, 1.0}) {
            const int steps = std::max(1, static_cast<int>(std::floor(f * eps * eps * g.n() + 1e-9)));
            add(steps, "eps2x" + format_double(f));
        }
        return out;
    };
}

/// P_y(τ({z}) < τ(U_n \ U_(α))) with U_(α) = φ({|ζ| < α}), and the ratio
/// value·log(n)/log(1/d(y, z)).
inline ExperimentReport gflower_experiment(const ConformalDomain& d, double alpha, double eps,
                                           std::span<const int> n_list, const PairRule& pair_rule,
                                           double r_lo = 0.05, double r_hi = 20.0, double tol = 1e-12) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PairInvalid("alpha must lie in (0, 1)");
    if (!(eps > 0.0 && std::sqrt(eps) < alpha)) throw PairInvalid("need 0 < sqrt(eps) < alpha");
    ExperimentReport rep;
    rep.name = "gflower";
    rep.module = "hitting";
    rep.operation = "gflower_experiment";
    rep.parameters = {{"alpha", alpha}, {"eps", eps},   {"n_list", n_list_json(n_list)},
                      {"r_lo", r_lo},   {"r_hi", r_hi}, {"tol", tol}};
    rep.columns = {"n", "pair", "distance", "value", "ratio", "in_window"};
    std::vector<std::vector<std::vector<double>>> rows(n_list.size());
    std::vector<std::vector<std::string>> labels(n_list.size());
    parallel_for(n_list.size(), [&](std::size_t k) {
        const LatticeGraph g = discretize(d, n_list[k]);
        const auto region = inner_region(d, g, alpha);
        std::vector<char> inside(g.size(), 0);
        for (int v : region) inside[v] = 1;
        const auto pairs = pair_rule(d, g);
        if (pairs.empty()) throw PairInvalid("pair rule produced no pairs");
        const int z = pairs.front().z;
        for (const auto& p : pairs) {
            if (p.z != z) throw PairInvalid("all pairs of one family must share z");
            if (p.y == p.z) throw PairInvalid("y and z coincide");
            const double dist = std::abs(g.position(p.y) - g.position(p.z));
            if (dist > eps * eps + 1e-12) throw PairInvalid("d(y, z) exceeds eps^2");
            if (!inside[p.y]) throw PairInvalid("y lies outside U_(alpha)");
        }
        const auto wz = d.try_psi(g.position(z));
        if (!wz || std::abs(*wz) >= alpha - std::sqrt(eps)) throw PairInvalid("z not in U_(alpha - sqrt(eps))");
        std::vector<int> avoid;
        for (std::size_t v = 0; v < g.size(); ++v)
            if (!inside[v]) avoid.push_back(static_cast<int>(v));
        if (avoid.empty()) throw PairInvalid("complement of U_(alpha) has no vertex");
        const auto sol = hitting_probability({&g, {z}, avoid}, tol);
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            const double dist = std::abs(g.position(pairs[pi].y) - g.position(z));
            const double value = sol.u[pairs[pi].y];
            const double ratio = value * std::log(static_cast<double>(g.n())) / std::log(1.0 / dist);
            rows[k].push_back({static_cast<double>(g.n()), static_cast<double>(pi), dist, value, ratio,
                               (ratio >= r_lo && ratio <= r_hi) ? 1.0 : 0.0});
            labels[k].push_back(pairs[pi].label);
        }
    });
    json names = json::array();
    for (const auto& l : labels.front()) names.push_back(l);
    rep.summary["pair_labels"] = std::move(names);
    for (auto& block : rows)
        for (auto& r : block) rep.add_row(std::move(r));
    return rep;
}

using CapaRule = std::function<std::vector<int>(const LatticeGraph&, const BlobSpec&, double eps1, double eps2)>;

/// Lattice arc hugging U_{1,n}: vertices outside U_{1,n} within ε₁ of it on
/// the half facing the interior, plus a radial spoke out to distance
/// ε₂ + 2/n so that A ⊄ B(y₁, ε₂).
inline CapaRule default_capa_obstacle(const ConformalDomain& d) {
    return [&d](const LatticeGraph& g, const BlobSpec& b, double eps1, double eps2) {
        const cplx dir = d.inward_normal(cplx{0.0, -1.0});
        const auto& U1 = g.require_blobs().set1;
        std::vector<char> blob(g.size(), 0);
        for (int v : U1) blob[v] = 1;
        std::vector<int> A;
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (blob[v]) continue;
            const cplx rel = g.position(static_cast<int>(v)) - b.center1;
            if ((rel * std::conj(dir)).real() < 0.0 || std::abs(rel) > b.radius + eps1 + 1e-12) continue;
            const int one[1] = {static_cast<int>(v)};
            if (set_distance(g, U1, one) <= eps1 + 1e-12) A.push_back(static_cast<int>(v));
        }
        const std::array<cplx, 2> spoke{b.center1 + b.radius * dir, b.center1 + (eps2 + 2.0 / g.n()) * dir};
        for (int v : rasterize_polyline(g, spoke))
            if (!blob[v] && std::find(A.begin(), A.end(), v) == A.end()) A.push_back(v);
        return A;
    };
}

/// sup over x ∈ U_{1,n} of P_x(τ(U_n \ B(y₁, ε₂)) ≤ τ(A)) and
/// Ĉ = value^{1/log(ε₂/ε₁)}.
inline ExperimentReport capa_experiment(const ConformalDomain& d, const BlobSpec& b, double eps1,
                                        std::span<const double> eps2_list, const CapaRule& A_rule,
                                        std::span<const int> n_list, double tol = 1e-12) {
    ExperimentReport rep;
    rep.name = "capa";
    rep.module = "hitting";
    rep.operation = "capa_experiment";
    rep.parameters = {{"delta", b.delta},
                      {"eps1", eps1},
                      {"eps2_list", std::vector<double>(eps2_list.begin(), eps2_list.end())},
                      {"n_list", n_list_json(n_list)},
                      {"tol", tol}};
    rep.columns = {"n", "eps2", "log_ratio", "sup_escape", "c_hat", "obstacle_distance"};
    const std::size_t cells = n_list.size() * eps2_list.size();
    std::vector<LatticeGraph> graphs;
    for (int n : n_list) graphs.push_back(discretize(d, n, b));
    std::vector<std::vector<double>> rows(cells);
    parallel_for(cells, [&](std::size_t c) {
        const std::size_t ni = c / eps2_list.size(), ei = c % eps2_list.size();
        const LatticeGraph& g = graphs[ni];
        const double eps2 = eps2_list[ei];
        if (!(eps2 > eps1)) throw ObstacleInvalid("capa requires eps2 > eps1");
        const auto& U1 = g.require_blobs().set1;
        const auto A = A_rule(g, b, eps1, eps2);
        if (!graph_connected(g, A)) throw ObstacleInvalid("capa obstacle is not connected");
        const double dist = set_distance(g, U1, A);
        if (dist > eps1 + 1e-12) throw ObstacleInvalid("capa obstacle farther than eps1 from U1");
        std::vector<char> far(g.size(), 0);
        std::vector<int> target;
        for (std::size_t v = 0; v < g.size(); ++v)
            if (std::abs(g.position(static_cast<int>(v)) - b.center1) >= eps2) {
                far[v] = 1;
                target.push_back(static_cast<int>(v));
            }
        std::vector<int> avoid;
        bool escapes_ball = false;
        for (int v : A) {
            if (far[v])
                escapes_ball = true;
            else
                avoid.push_back(v);
        }
        if (!escapes_ball) throw ObstacleInvalid("capa obstacle inside B(y1, eps2)");
        for (int v : U1)
            if (std::find(avoid.begin(), avoid.end(), v) != avoid.end()) throw ObstacleInvalid("obstacle meets U1");
        if (target.empty()) throw ObstacleInvalid("U_n \\ B(y1, eps2) is empty");
        // Ties at the first hit go to the target: A ∩ target counts as target.
        const auto sol = hitting_probability({&g, target, avoid}, tol);
        double best = 0.0;
        for (int x : U1)
            if (std::isfinite(sol.u[x])) best = std::max(best, sol.u[x]);
        const double lr = std::log(eps2 / eps1);
        rows[c] = {static_cast<double>(g.n()), eps2, lr, best, std::pow(best, 1.0 / lr), dist};
    });
    for (auto& r : rows) rep.add_row(std::move(r));
    return rep;
}

/// sup_x P_x(τ(A) ≥ t) from the walk killed on A, with the log-linear fit of
/// survival against t on the second half of the grid.
inline ExperimentReport hitting_tail(const LatticeGraph& g, std::span<const int> A, double alpha,
                                     std::span<const double> t_list, double tail_tol = 1e-12) {
    const double pa = measure_of(g, A);
    if (pa < alpha) throw ObstacleInvalid("pi(A) = " + format_double(pa) + " < alpha");
    ExperimentReport rep;
    rep.name = "hitting_tail";
    rep.module = "hitting";
    rep.operation = "hitting_tail";
    rep.parameters = {{"n", g.n()},
                      {"alpha", alpha},
                      {"pi_A", pa},
                      {"t_list", std::vector<double>(t_list.begin(), t_list.end())},
                      {"tail_tol", tail_tol}};
    rep.columns = {"t", "survival"};
    std::vector<char> alive(g.size(), 1);
    for (int v : A) alive[v] = 0;
    std::vector<double> one(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) one[v] = alive[v] ? 1.0 : 0.0;
    const auto states = evolve_on_grid(g, std::move(one), t_list, Evolve::function, tail_tol, alive);
    std::vector<double> ts, vs;
    for (std::size_t k = 0; k < t_list.size(); ++k) {
        const double s = max_abs(states[k]);
        rep.add_row({t_list[k], s});
        if (k >= t_list.size() / 2 && s > 0.0) {
            ts.push_back(t_list[k]);
            vs.push_back(s);
        }
    }
    if (ts.size() >= 2) {
        const auto f = log_linear_fit(ts, vs);
        rep.fits["log_survival_vs_t"] = {f, "t", "log(survival)"};
        rep.summary["rate"] = -f.slope;
        rep.summary["r2"] = f.r2;
    }
    return rep;
}

}  // namespace nglat
