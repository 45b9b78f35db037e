#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "domain.hpp"
#include "lattice.hpp"
#include "parallel.hpp"

namespace nglat {

/// How lattice points outside U_n enter the face interpolation.
enum class OutsideCorners {
    // Value 0 at every lattice point outside U_n (the plain three-stage
    // extension: zero off the graph, linear on edges, harmonic on faces).
    zero,
    // Corners outside U_n are dropped and the bilinear weights of the
    // remaining corners are rescaled to sum to one.
    renormalize,
};

/// Extension of a vertex field to the whole plane. On each lattice face the
/// value is the bilinear interpolant of the corner values, which is the
/// harmonic function on the square with the piecewise-linear edge data.
class ExtendedField {
public:
    ExtendedField(const LatticeGraph& g, ScalarField f, OutsideCorners policy = OutsideCorners::zero)
        : graph_(&g), base_(std::move(f)), policy_(policy) {
        require_bound(g, base_);
    }

    const LatticeGraph& graph() const noexcept { return *graph_; }
    const ScalarField& base() const noexcept { return base_; }
    OutsideCorners policy() const noexcept { return policy_; }

    ExtendedField with_policy(OutsideCorners p) const { return ExtendedField(*graph_, base_, p); }

    double operator()(cplx z) const noexcept {
        const Face f = locate(z);
        if (policy_ == OutsideCorners::zero) {
            double v = 0.0;
            for (int c = 0; c < 4; ++c)
                if (f.index[c] >= 0) v += f.weight[c] * base_[f.index[c]];
            return v;
        }
        double v = 0.0, w = 0.0;
        for (int c = 0; c < 4; ++c) {
            if (f.index[c] < 0) continue;
            v += f.weight[c] * base_[f.index[c]];
            w += f.weight[c];
        }
        if (w > 1e-12) return v / w;
        return nearest_vertex_value(z);
    }

    /// True iff at least one corner of the face containing z is in U_n.
    bool has_data(cplx z) const noexcept {
        const Face f = locate(z);
        for (int c = 0; c < 4; ++c)
            if (f.index[c] >= 0) return true;
        return false;
    }

private:
    struct Face {
        std::array<int, 4> index;
        std::array<double, 4> weight;
    };

    Face locate(cplx z) const noexcept {
        const double x = z.real() * graph_->n();
        const double y = z.imag() * graph_->n();
        const int i = static_cast<int>(std::floor(x));
        const int j = static_cast<int>(std::floor(y));
        const double s = x - i, t = y - j;
        return Face{{graph_->index_of(i, j), graph_->index_of(i + 1, j), graph_->index_of(i, j + 1),
                     graph_->index_of(i + 1, j + 1)},
                    {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t}};
    }

    // All present corner weights vanish (z sits on an absent lattice point or
    // an edge between absent points): average of the nearest vertices of
    // U_n in the surrounding 4×4 block, ties included. Mirror-symmetric.
    double nearest_vertex_value(cplx z) const noexcept {
        const double x = z.real() * graph_->n();
        const double y = z.imag() * graph_->n();
        const int i = static_cast<int>(std::floor(x));
        const int j = static_cast<int>(std::floor(y));
        double best = std::numeric_limits<double>::infinity(), sum = 0.0;
        int count = 0;
        for (int dj = -1; dj <= 2; ++dj) {
            for (int di = -1; di <= 2; ++di) {
                const int v = graph_->index_of(i + di, j + dj);
                if (v < 0) continue;
                const double dist = std::hypot(i + di - x, j + dj - y);
                if (dist < best - 1e-12) {
                    best = dist;
                    sum = base_[v];
                    count = 1;
                } else if (dist <= best + 1e-12) {
                    sum += base_[v];
                    ++count;
                }
            }
        }
        return count > 0 ? sum / count : 0.0;
    }

    const LatticeGraph* graph_;
    ScalarField base_;
    OutsideCorners policy_;
};

inline ExtendedField extend(const LatticeGraph& g, const ScalarField& f, OutsideCorners policy = OutsideCorners::zero) {
    return ExtendedField(g, f, policy);
}

/// Sample set used for sup-norm comparisons: every lattice vertex plus
/// grid × grid points φ(r e^{iθ}) of a uniform polar grid on the closed disc
/// (r = k/(grid−1), θ = 2πl/grid). Points in faces with no corner in U_n are
/// dropped.
inline std::vector<cplx> sup_sample_points(const ExtendedField& a, const ConformalDomain& d, int sample_grid) {
    const auto& g = a.graph();
    std::vector<cplx> pts;
    pts.reserve(g.size() + static_cast<std::size_t>(sample_grid) * sample_grid);
    for (std::size_t v = 0; v < g.size(); ++v) pts.push_back(g.position(static_cast<int>(v)));
    for (int k = 0; k < sample_grid; ++k) {
        const double r = sample_grid > 1 ? static_cast<double>(k) / (sample_grid - 1) : 0.0;
        for (int l = 0; l < sample_grid; ++l) {
            const cplx z = d.phi(std::polar(r, 2.0 * std::numbers::pi * l / sample_grid));
            if (a.has_data(z)) pts.push_back(z);
        }
    }
    return pts;
}

struct SupDiff {
    double value = 0.0;
    cplx where{};
    std::size_t samples = 0;
};

/// max |a(z) − reference(z)| over sup_sample_points. The reference is called
/// concurrently and must be thread-safe.
template <class Reference>
SupDiff sup_diff(const ExtendedField& a, const ConformalDomain& d, Reference&& reference, int sample_grid) {
    const auto pts = sup_sample_points(a, d, sample_grid);
    std::vector<double> diff(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) { diff[k] = std::abs(a(pts[k]) - reference(pts[k])); });
    SupDiff out;
    out.samples = pts.size();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (diff[k] > out.value || std::isnan(diff[k])) {
            out.value = diff[k];
            out.where = pts[k];
            if (std::isnan(diff[k])) break;
        }
    }
    return out;
}

}  // namespace nglat
