#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "fit.hpp"
#include "green.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace nglat {

inline constexpr std::size_t kDefaultTermCap = 2'000'000;

/// Poisson(mu) probabilities for k = 0..K, with K at least mu + 12·sqrt(mu)
/// and large enough that the mass beyond K is below tail_tol.
inline std::vector<double> poisson_weights(double mu, double tail_tol, std::size_t term_cap = kDefaultTermCap) {
    if (!(mu >= 0.0)) throw std::invalid_argument("poisson mean must be nonnegative");
    std::vector<double> w;
    const double floor_k = mu + 12.0 * std::sqrt(mu);
    for (std::size_t k = 0;; ++k) {
        if (k > term_cap) {
            throw BudgetExceeded("uniformization needs more than " + std::to_string(term_cap) +
                                 " terms (rate*t = " + std::to_string(mu) + ")");
        }
        const double lw = mu == 0.0 ? (k == 0 ? 0.0 : -std::numeric_limits<double>::infinity())
                                    : -mu + static_cast<double>(k) * std::log(mu) - std::lgamma(k + 1.0);
        w.push_back(std::exp(lw));
        if (static_cast<double>(k) >= floor_k && static_cast<double>(k) + 2.0 > mu) {
            // Past the mode the terms fall at least geometrically with ratio
            // mu/(k+2), which bounds the remaining tail.
            const double ratio = mu / (k + 2.0);
            const double next = w.back() * mu / (k + 1.0);
            const double tail = next / (1.0 - ratio);
            if (tail < tail_tol) break;
        }
    }
    return w;
}

/// Row-vector step v ↦ vP of the jump chain (uniform over neighbours). With a
/// non-empty `alive` mask the chain is killed on entering a dead vertex.
inline void step_measure(const LatticeGraph& g, std::span<const double> in, std::span<double> out,
                         std::span<const char> alive = {}) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t x = 0; x < g.size(); ++x) {
        if (in[x] == 0.0) continue;
        const double share = in[x] / g.degree(static_cast<int>(x));
        for (int nb : g.neighbors(static_cast<int>(x)))
            if (nb >= 0) out[nb] += share;
    }
    if (!alive.empty())
        for (std::size_t y = 0; y < g.size(); ++y)
            if (!alive[y]) out[y] = 0.0;
}

/// Column-vector step f ↦ Pf, (Pf)(x) = (1/d_x) Σ_{y∼x} f(y); killed version
/// drops dead neighbours and zeroes dead rows.
inline void step_function(const LatticeGraph& g, std::span<const double> in, std::span<double> out,
                          std::span<const char> alive = {}) {
    for (std::size_t x = 0; x < g.size(); ++x) {
        if (!alive.empty() && !alive[x]) {
            out[x] = 0.0;
            continue;
        }
        double s = 0.0;
        for (int nb : g.neighbors(static_cast<int>(x)))
            if (nb >= 0 && (alive.empty() || alive[nb])) s += in[nb];
        out[x] = s / g.degree(static_cast<int>(x));
    }
}

/// Σ_k Poisson(rate·t; k) S^k v with S the given one-step map.
template <class Step>
std::vector<double> uniformize(const LatticeGraph& g, std::vector<double> v, double t, double tail_tol, Step&& step,
                               std::size_t term_cap = kDefaultTermCap) {
    const double rate = 2.0 * g.n() * g.n();
    const auto w = poisson_weights(rate * t, tail_tol, term_cap);
    std::vector<double> acc(v.size(), 0.0), next(v.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] > 0.0)
            for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w[k] * v[i];
        if (k + 1 < w.size()) {
            step(std::span<const double>(v), std::span<double>(next));
            v.swap(next);
        }
    }
    return acc;
}

struct KernelSlice {
    double t = 0.0;
    int source = 0;
    std::vector<double> probs;       // P_x(X_t = ·)
    std::vector<double> normalized;  // p_n(t, x, ·) = probs / m_n, m_n(y) = d_y / (4n²)
};

inline std::vector<double> normalize_kernel(const LatticeGraph& g, std::span<const double> probs) {
    std::vector<double> out(probs.size());
    const double n2 = static_cast<double>(g.n()) * g.n();
    for (std::size_t y = 0; y < probs.size(); ++y) out[y] = probs[y] * 4.0 * n2 / g.degree(static_cast<int>(y));
    return out;
}

/// P_x(X_t = ·) by uniformization with rate 2n².
inline KernelSlice kernel_slice(const LatticeGraph& g, int x, double t, double tail_tol = 1e-12,
                                std::size_t term_cap = kDefaultTermCap) {
    if (!(t >= 0.0)) throw std::invalid_argument("kernel_slice requires t >= 0");
    std::vector<double> v(g.size(), 0.0);
    v[x] = 1.0;
    KernelSlice s;
    s.t = t;
    s.source = x;
    s.probs = uniformize(
        g, std::move(v), t, tail_tol,
        [&](std::span<const double> in, std::span<double> out) { step_measure(g, in, out); }, term_cap);
    s.normalized = normalize_kernel(g, s.probs);
    return s;
}

/// Evolves a measure (row vector) or observable (column vector) through an
/// increasing time grid, one uniformized increment at a time. Returns the
/// state at every grid time.
enum class Evolve { measure, function };

inline std::vector<std::vector<double>> evolve_on_grid(const LatticeGraph& g, std::vector<double> v0,
                                                       std::span<const double> times, Evolve kind,
                                                       double tail_tol = 1e-12, std::span<const char> alive = {},
                                                       std::size_t term_cap = kDefaultTermCap) {
    std::vector<std::vector<double>> out;
    out.reserve(times.size());
    double now = 0.0;
    for (double t : times) {
        if (t < now) throw std::invalid_argument("time grid must be nondecreasing and nonnegative");
        auto step = [&](std::span<const double> in, std::span<double> o) {
            if (kind == Evolve::measure)
                step_measure(g, in, o, alive);
            else
                step_function(g, in, o, alive);
        };
        v0 = uniformize(g, std::move(v0), t - now, tail_tol, step, term_cap);
        now = t;
        out.push_back(v0);
    }
    return out;
}

struct Trajectory {
    std::vector<int> vertices;
    std::vector<double> holding_times;  // last entry truncated at the horizon
};

/// Continuous-time walk from x up to `horizon`: uniform-neighbour jumps,
/// exponential holding times with rate 2n².
inline Trajectory sample_path(const LatticeGraph& g, int x, double horizon, std::uint64_t seed) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_path requires horizon > 0");
    const NeighborTable table(g);
    Rng rng = make_stream(seed, 0);
    const double rate = 2.0 * g.n() * g.n();
    Trajectory tr;
    double t = 0.0;
    int v = x;
    while (true) {
        const double hold = exponential(rng, rate);
        tr.vertices.push_back(v);
        if (t + hold >= horizon) {
            tr.holding_times.push_back(horizon - t);
            break;
        }
        tr.holding_times.push_back(hold);
        t += hold;
        v = table.step(v, rng);
    }
    return tr;
}

struct DecayTable {
    std::vector<double> times;
    std::vector<double> values;
    LinearFit tail_fit;  // log(value) against t over the tail window
    std::size_t tail_start = 0;
};

inline LinearFit log_linear_fit(std::span<const double> t, std::span<const double> v) {
    std::vector<double> lv(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) lv[k] = std::log(v[k]);
    return linear_fit(t, lv);
}

/// sup_x |P_x(X_t ∈ U_{1,n}) − P_x(X_t ∈ U_{2,n})| on a time grid. The
/// difference is the semigroup applied to 1(U_{1,n}) − 1(U_{2,n}), so every
/// start vertex is covered by one evolution. The tail fit uses grid times
/// from index `tail_start` on (default: second half of the grid).
inline DecayTable blob_balance_decay(const LatticeGraph& g, std::span<const double> t_list, double tail_tol = 1e-12,
                                     std::size_t tail_start = static_cast<std::size_t>(-1)) {
    const auto& b = g.require_blobs();
    std::vector<double> h(g.size(), 0.0);
    for (int v : b.set1) h[v] = 1.0;
    for (int v : b.set2) h[v] = -1.0;
    const auto states = evolve_on_grid(g, std::move(h), t_list, Evolve::function, tail_tol);
    DecayTable out;
    out.times.assign(t_list.begin(), t_list.end());
    for (const auto& s : states) out.values.push_back(max_abs(s));
    out.tail_start = tail_start == static_cast<std::size_t>(-1) ? t_list.size() / 2 : tail_start;
    if (t_list.size() - out.tail_start >= 2) {
        out.tail_fit = log_linear_fit(std::span<const double>(out.times).subspan(out.tail_start),
                                      std::span<const double>(out.values).subspan(out.tail_start));
    }
    return out;
}

/// Probe sources for worst-case quantities: `count − 1` boundary-adjacent
/// vertices (degree < 4) evenly spread by angle about the centroid, plus the
/// vertex closest to the centroid.
inline std::vector<int> probe_sources(const LatticeGraph& g, std::size_t count) {
    cplx centroid{0.0, 0.0};
    for (std::size_t v = 0; v < g.size(); ++v) centroid += g.position(static_cast<int>(v));
    centroid /= static_cast<double>(g.size());
    std::vector<std::pair<double, int>> rim;
    int center = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < g.size(); ++v) {
        const cplx p = g.position(static_cast<int>(v)) - centroid;
        if (std::abs(p) < best) {
            best = std::abs(p);
            center = static_cast<int>(v);
        }
        if (g.degree(static_cast<int>(v)) < 4) rim.emplace_back(std::arg(p), static_cast<int>(v));
    }
    std::sort(rim.begin(), rim.end());
    std::vector<int> out{center};
    if (count > 1 && !rim.empty()) {
        const std::size_t take = std::min(count - 1, rim.size());
        for (std::size_t k = 0; k < take; ++k) out.push_back(rim[k * rim.size() / take].second);
    }
    return out;
}

struct MixingProfile {
    std::vector<double> times;
    std::vector<double> tv;        // worst case over probe sources
    double t_mix_quarter = -1.0;   // first grid time with tv < 1/4, or −1
    std::vector<int> sources;
};

/// d_TV(t) = max over probe sources of ½ Σ_y |P_x(X_t = y) − π(y)|.
inline MixingProfile tv_mixing_profile(const LatticeGraph& g, std::span<const double> t_list,
                                       std::size_t probe_count = 24, double tail_tol = 1e-12) {
    MixingProfile out;
    out.times.assign(t_list.begin(), t_list.end());
    out.sources = probe_sources(g, probe_count);
    const ScalarField pi = stationary_measure(g);
    std::vector<std::vector<double>> per_source(out.sources.size());
    parallel_for(out.sources.size(), [&](std::size_t s) {
        std::vector<double> v(g.size(), 0.0);
        v[out.sources[s]] = 1.0;
        const auto states = evolve_on_grid(g, std::move(v), t_list, Evolve::measure, tail_tol);
        for (const auto& p : states) {
            double tv = 0.0;
            for (std::size_t y = 0; y < g.size(); ++y) tv += std::abs(p[y] - pi[y]);
            per_source[s].push_back(0.5 * tv);
        }
    });
    out.tv.assign(t_list.size(), 0.0);
    for (const auto& row : per_source)
        for (std::size_t k = 0; k < row.size(); ++k) out.tv[k] = std::max(out.tv[k], row[k]);
    for (std::size_t k = 0; k < out.tv.size(); ++k) {
        if (out.tv[k] < 0.25) {
            out.t_mix_quarter = out.times[k];
            break;
        }
    }
    return out;
}

struct GaussianFit {
    double decay_fit = 0.0;  // ĉ from log(p_n s²) ≈ a − ĉ d²/t
    double upper_c1 = 0.0, upper_c2 = 0.0;
    double lower_c1 = 0.0, lower_c2 = 0.0;
    std::size_t samples = 0;
};

struct KernelSample {
    double t = 0.0;
    double dist = 0.0;
    double p = 0.0;  // p_n(t, x, y)
};

/// p_n(t, x, y) for every (x, y) pair and grid time.
inline std::vector<KernelSample> sample_kernel(const LatticeGraph& g, std::span<const double> t_list,
                                               std::span<const std::pair<int, int>> pairs, double tail_tol = 1e-12) {
    std::vector<int> sources;
    for (const auto& [x, y] : pairs)
        if (std::find(sources.begin(), sources.end(), x) == sources.end()) sources.push_back(x);
    std::vector<std::vector<std::vector<double>>> states(sources.size());
    parallel_for(sources.size(), [&](std::size_t s) {
        std::vector<double> v(g.size(), 0.0);
        v[sources[s]] = 1.0;
        states[s] = evolve_on_grid(g, std::move(v), t_list, Evolve::measure, tail_tol);
    });
    std::vector<KernelSample> out;
    const double n2 = static_cast<double>(g.n()) * g.n();
    for (const auto& [x, y] : pairs) {
        const std::size_t s = std::find(sources.begin(), sources.end(), x) - sources.begin();
        for (std::size_t k = 0; k < t_list.size(); ++k) {
            const double p = states[s][k][y] * 4.0 * n2 / g.degree(y);
            out.push_back({t_list[k], std::abs(g.position(x) - g.position(y)), p});
        }
    }
    return out;
}

/// Fits Gaussian envelope constants to sampled p_n(t, x, y):
///   upper: p_n ≤ C₁/(t^{1/2} ∨ 1/n)² · exp(−C₂ d²/t)
///   lower: p_n ≥ C₁′/(t^{1/2} ∨ 1/n)² · exp(−C₂′ d²/t)
/// The decay rate ĉ is the least-squares slope of −log(p_n s²) in d²/t;
/// C₂ = ĉ/2, C₂′ = 2ĉ, and C₁, C₁′ are the tightest constants on the sample.
inline GaussianFit gaussian_bound_fit(const LatticeGraph& g, std::span<const double> t_list,
                                      std::span<const std::pair<int, int>> pairs, double tail_tol = 1e-12) {
    const double inv_n = 1.0 / g.n();
    for (double t : t_list)
        if (!(t >= inv_n)) throw std::invalid_argument("gaussian_bound_fit: times must be >= 1/n");
    const auto samples = sample_kernel(g, t_list, pairs, tail_tol);
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        if (!(s.p > 0.0)) continue;
        const double sc = std::max(std::sqrt(s.t), inv_n);
        xs.push_back(s.dist * s.dist / s.t);
        ys.push_back(std::log(s.p * sc * sc));
    }
    GaussianFit f;
    f.samples = xs.size();
    f.decay_fit = -linear_fit(xs, ys).slope;
    f.upper_c2 = 0.5 * f.decay_fit;
    f.lower_c2 = 2.0 * f.decay_fit;
    f.upper_c1 = 0.0;
    f.lower_c1 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        f.upper_c1 = std::max(f.upper_c1, std::exp(ys[k] + f.upper_c2 * xs[k]));
        f.lower_c1 = std::min(f.lower_c1, std::exp(ys[k] + f.lower_c2 * xs[k]));
    }
    return f;
}

/// Monte Carlo estimate of P_x[sup_{s ≤ t} d(X_s, x) ≥ η].
inline McEstimate escape_probability_mc(const LatticeGraph& g, int x, double eta, double t, std::uint64_t paths,
                                        std::uint64_t seed) {
    const NeighborTable table(g);
    const double rate = 2.0 * g.n() * g.n();
    const cplx origin = g.position(x);
    const std::uint64_t batches = (paths + kMcBatch - 1) / kMcBatch;
    std::vector<std::uint64_t> hits(batches, 0);
    parallel_for(batches, [&](std::size_t bi) {
        Rng rng = make_stream(seed, bi);
        const std::uint64_t count = std::min<std::uint64_t>(kMcBatch, paths - bi * kMcBatch);
        for (std::uint64_t k = 0; k < count; ++k) {
            double now = 0.0;
            int v = x;
            while (true) {
                now += exponential(rng, rate);
                if (now > t) break;
                v = table.step(v, rng);
                if (std::abs(g.position(v) - origin) >= eta) {
                    ++hits[bi];
                    break;
                }
            }
        }
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(paths);
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(paths)), paths};
}

}  // namespace nglat
