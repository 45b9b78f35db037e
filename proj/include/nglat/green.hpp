#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "interpolate.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "solver.hpp"

namespace nglat {

struct SolveReport {
    int iterations = 0;
    double residual_norm = 0.0;  // max |ΔH − source|
    double wall_time = 0.0;      // seconds
};

/// g = (1/|U_{1,n}|)(1(U_{1,n}) − 1(U_{2,n})).
inline ScalarField source_field(const LatticeGraph& g) {
    const auto& b = g.require_blobs();
    ScalarField s(g);
    const double w = 1.0 / static_cast<double>(b.set1.size());
    for (int v : b.set1) s[v] += w;
    for (int v : b.set2) s[v] -= w;
    return s;
}

/// Σ_x d_x·f(x), accumulated with Neumaier compensation.
inline double degree_weighted_sum(const LatticeGraph& g, const ScalarField& f) {
    require_bound(g, f);
    double sum = 0.0, comp = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const double term = g.degree(static_cast<int>(v)) * f[v];
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

/// Σ_x π(x) f(x).
inline double stationary_mean(const LatticeGraph& g, const ScalarField& f) {
    double s = 0.0;
    for (std::size_t v = 0; v < g.size(); ++v) s += g.degree(static_cast<int>(v)) * f[v];
    return s / static_cast<double>(g.total_degree());
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Applies y = (D − A) x on U_n.
inline void apply_degree_laplacian(const LatticeGraph& g, std::span<const double> x, std::span<double> y) {
    for (std::size_t v = 0; v < g.size(); ++v) {
        double s = 0.0;
        for (int nb : g.neighbors(static_cast<int>(v)))
            if (nb >= 0) s += x[nb];
        y[v] = g.degree(static_cast<int>(v)) * x[v] - s;
    }
}

/// Solves ΔH = source_field(g) with Σ π H = 0. H is the occupation-time
/// difference (2n²/|U_{1,n}|)∫[P_x(X_t ∈ U_{1,n}) − P_x(X_t ∈ U_{2,n})]dt.
inline std::pair<ScalarField, SolveReport> solve_green_raw(const LatticeGraph& g, double tol) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScalarField src = source_field(g);
    const std::size_t n = g.size();
    std::vector<double> diag(n), b(n), x(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        diag[v] = g.degree(static_cast<int>(v));
        b[v] = diag[v] * src[v];
    }
    // r = D(g − ΔH); stop on max |r_x / d_x| with headroom for the final
    // recomputation after the gauge projection.
    auto stop = [&](std::span<const double> r) {
        double m = 0.0;
        for (std::size_t v = 0; v < n; ++v) m = std::max(m, std::abs(r[v]) / diag[v]);
        return m <= 0.5 * tol;
    };
    const int cap = static_cast<int>(std::min<std::size_t>(10 * n, 50'000'000));
    const CgResult cg = pcg([&](std::span<const double> in, std::span<double> out) { apply_degree_laplacian(g, in, out); },
                            diag, b, x, stop, cap);

    ScalarField H(g, std::move(x));
    const double mean = stationary_mean(g, H);
    for (double& h : H.values) h -= mean;

    const ScalarField lap = apply_laplacian(g, H);
    double res = 0.0;
    for (std::size_t v = 0; v < n; ++v) res = std::max(res, std::abs(lap[v] - src[v]));

    SolveReport report;
    report.iterations = cg.iterations;
    report.residual_norm = res;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!(res <= tol)) {
        throw SolverStalled("residual " + std::to_string(res) + " above tol " + std::to_string(tol) + " after " +
                            std::to_string(cg.iterations) + " iterations");
    }
    return {std::move(H), report};
}

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

/// Compact per-vertex neighbour lists for fast walk simulation.
struct NeighborTable {
    std::vector<int> offset;
    std::vector<int> list;

    explicit NeighborTable(const LatticeGraph& g) : offset(g.size() + 1, 0) {
        list.reserve(static_cast<std::size_t>(g.total_degree()));
        for (std::size_t v = 0; v < g.size(); ++v) {
            for (int nb : g.neighbors(static_cast<int>(v)))
                if (nb >= 0) list.push_back(nb);
            offset[v + 1] = static_cast<int>(list.size());
        }
    }
    int step(int v, Rng& rng) const {
        const int deg = offset[v + 1] - offset[v];
        return list[offset[v] + uniform_index(rng, deg)];
    }
};

inline constexpr std::uint64_t kMcBatch = 1000;

/// Monte Carlo estimate of H(x) truncated at `horizon`: continuous-time walk
/// with rate-2n² exponential holding times, accumulating
/// (2n²/|U_{1,n}|)(time in U_{1,n} − time in U_{2,n}). Trials are split into
/// batches of kMcBatch, each on its own (seed, batch) stream, and reduced in
/// batch order.
inline McEstimate occupation_time_mc(const LatticeGraph& g, int x, double horizon, std::uint64_t trials,
                                     std::uint64_t seed) {
    const auto& blobs = g.require_blobs();
    if (trials < 2) throw std::invalid_argument("occupation_time_mc needs at least two trials");
    std::vector<signed char> weight(g.size(), 0);
    for (int v : blobs.set1) weight[v] = 1;
    for (int v : blobs.set2) weight[v] = -1;
    const NeighborTable table(g);
    const double rate = 2.0 * g.n() * g.n();
    const double scale = rate / static_cast<double>(blobs.set1.size());

    const std::uint64_t batches = (trials + kMcBatch - 1) / kMcBatch;
    std::vector<double> sums(batches, 0.0), squares(batches, 0.0);
    parallel_for(batches, [&](std::size_t bi) {
        Rng rng = make_stream(seed, bi);
        const std::uint64_t count = std::min<std::uint64_t>(kMcBatch, trials - bi * kMcBatch);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t k = 0; k < count; ++k) {
            double t = 0.0, acc = 0.0;
            int v = x;
            while (true) {
                const double hold = exponential(rng, rate);
                if (t + hold >= horizon) {
                    acc += (horizon - t) * weight[v];
                    break;
                }
                acc += hold * weight[v];
                t += hold;
                v = table.step(v, rng);
            }
            const double val = scale * acc;
            s += val;
            s2 += val * val;
        }
        sums[bi] = s;
        squares[bi] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t bi = 0; bi < batches; ++bi) {
        s += sums[bi];
        s2 += squares[bi];
    }
    const double m = s / static_cast<double>(trials);
    const double var = std::max(0.0, (s2 - static_cast<double>(trials) * m * m) / static_cast<double>(trials - 1));
    return {m, std::sqrt(var / static_cast<double>(trials)), trials};
}

struct Normalized {
    ScalarField field;
    double c_hat = 0.0;
};

/// Boundary average ĉ = (1/2π)∫ H_ext(φ(e^{iθ})) dθ by the trapezoid rule on
/// `boundary_samples` equispaced angles.
inline double boundary_average(const ConformalDomain& d, const ExtendedField& h, int boundary_samples) {
    double s = 0.0;
    for (int k = 0; k < boundary_samples; ++k)
        s += h(d.phi(std::polar(1.0, 2.0 * std::numbers::pi * k / boundary_samples)));
    return s / boundary_samples;
}

/// Returns H − ĉ. The boundary evaluation uses the extension with outside
/// corners renormalized away, so ĉ does not pick up the zero padding.
inline Normalized normalize(const ConformalDomain& d, const LatticeGraph& g, const ScalarField& H,
                            int boundary_samples) {
    const ExtendedField ext(g, H, OutsideCorners::renormalize);
    Normalized out{H, boundary_average(d, ext, boundary_samples)};
    for (double& v : out.field.values) v -= out.c_hat;
    return out;
}

}  // namespace nglat
