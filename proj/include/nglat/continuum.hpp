#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace nglat {

struct QuadratureSpec {
    int radial_points = 64;
    int angular_points = 128;
    // Points z with |z − y_i| < (1 + split)·radius use the singularity-
    // subtracted rule for blob i.
    double singular_split_radius = 0.5;

    void validate() const {
        if (radial_points <= 0 || angular_points <= 0) throw std::invalid_argument("quadrature sizes must be positive");
        if (!(singular_split_radius > 0.0 && singular_split_radius < 1.0))
            throw std::invalid_argument("singular_split_radius must lie in (0, 1)");
    }
};

/// Gauss–Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count) {
    std::vector<double> x(count), w(count);
    for (int i = 0; i < (count + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= count; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = count * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[count - 1 - i] = z;
        w[i] = w[count - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {std::move(x), std::move(w)};
}

/// 16 / area(U₁): the coefficient of f̃ = coefficient·(1(U₂) − 1(U₁)).
inline double f_tilde_coefficient(const BlobSpec& b) { return 16.0 / b.area(); }

/// ∫_{B(c, r)} log|w − z|² dA(w) in closed form.
inline double disc_log_potential(cplx center, double radius, cplx z) {
    const double rho = std::abs(z - center);
    const double area = std::numbers::pi * radius * radius;
    if (rho >= radius) return 2.0 * area * std::log(rho);
    return 2.0 * (area * std::log(radius) - 0.5 * std::numbers::pi * (radius * radius - rho * rho));
}

/// Evaluator for the continuum Neumann Green function
///
///   G*(z) = (1/(π·area(U₁))) [I(U₂, z) − I(U₁, z)],
///   I(U_i, z) = ∫_{U_i} log|(ψ(w) − y)(1 − conj(ψ(w))·y)|² dA(w),  y = ψ(z),
///
/// i.e. the disc Neumann kernel pulled back through φ and integrated over the
/// physical blobs. Its Laplacian is (4/area(U₁))(1(U₂) − 1(U₁)) with zero
/// normal derivative on ∂U and zero boundary average in φ-coordinates.
///
/// Preimages ψ(w) of the quadrature nodes are computed once; evaluation is
/// const and thread-safe.
class GStar {
public:
    GStar(const ConformalDomain& d, const BlobSpec& b, QuadratureSpec q = {}) : domain_(&d), blobs_(b), quad_(q) {
        quad_.validate();
        const auto [gx, gw] = gauss_legendre(q.radial_points);
        const double dtheta = 2.0 * std::numbers::pi / q.angular_points;
        for (int i = 0; i < 2; ++i) {
            Blob& bl = blob_[i];
            bl.center = i == 0 ? b.center1 : b.center2;
            bl.radius = b.radius;
            const std::size_t count = static_cast<std::size_t>(q.radial_points) * q.angular_points;
            bl.w.resize(count);
            bl.zeta.resize(count);
            bl.weight.resize(count);
            for (int a = 0; a < q.radial_points; ++a) {
                const double rho = 0.5 * b.radius * (gx[a] + 1.0);
                const double wr = 0.5 * b.radius * gw[a] * rho * dtheta;
                for (int t = 0; t < q.angular_points; ++t) {
                    const std::size_t k = static_cast<std::size_t>(a) * q.angular_points + t;
                    bl.w[k] = bl.center + std::polar(rho, dtheta * t);
                    bl.weight[k] = wr;
                }
            }
            parallel_for(count, [&](std::size_t k) { bl.zeta[k] = d.psi(bl.w[k]); });
        }
    }

    const BlobSpec& blobs() const noexcept { return blobs_; }
    const QuadratureSpec& quadrature() const noexcept { return quad_; }

    double operator()(cplx z) const {
        const cplx y = domain_->psi(z);
        return (integral(1, z, y) - integral(0, z, y)) / (std::numbers::pi * blobs_.area());
    }

    /// I(U_i, z) for i ∈ {0, 1}.
    double integral(int i, cplx z, cplx y) const {
        const Blob& bl = blob_[i];
        const std::size_t count = bl.w.size();
        double s = 0.0;
        if (std::abs(z - bl.center) >= (1.0 + quad_.singular_split_radius) * bl.radius) {
            for (std::size_t k = 0; k < count; ++k) {
                const double a = std::norm(bl.zeta[k] - y) * std::norm(1.0 - std::conj(bl.zeta[k]) * y);
                s += bl.weight[k] * std::log(a);
            }
            return s;
        }
        // log|ψ(w) − ψ(z)|² = log|w − z|² + log|(ψ(w) − ψ(z))/(w − z)|²; the
        // first term integrates in closed form, the rest is smooth.
        const cplx dpsi = 1.0 / domain_->dphi(y);
        const double tiny = 1e-9 * bl.radius;
        for (std::size_t k = 0; k < count; ++k) {
            const cplx dw = bl.w[k] - z;
            const cplx quotient = std::abs(dw) > tiny ? (bl.zeta[k] - y) / dw : dpsi;
            const double a = std::norm(quotient) * std::norm(1.0 - std::conj(bl.zeta[k]) * y);
            s += bl.weight[k] * std::log(a);
        }
        return s + disc_log_potential(bl.center, bl.radius, z);
    }

private:
    struct Blob {
        cplx center;
        double radius = 0.0;
        std::vector<cplx> w;
        std::vector<cplx> zeta;
        std::vector<double> weight;
    };

    const ConformalDomain* domain_;
    BlobSpec blobs_;
    QuadratureSpec quad_;
    std::array<Blob, 2> blob_;
};

inline double gstar(const ConformalDomain& d, const BlobSpec& b, cplx z, const QuadratureSpec& q = {}) {
    return GStar(d, b, q)(z);
}

/// G*(z) with a self-convergence check: doubling the radial points must not
/// move the value by more than `tolerance`.
inline double gstar_checked(const ConformalDomain& d, const BlobSpec& b, cplx z, const QuadratureSpec& q = {},
                            double tolerance = 1e-6) {
    const double base = gstar(d, b, z, q);
    QuadratureSpec fine = q;
    fine.radial_points *= 2;
    const double refined = gstar(d, b, z, fine);
    if (std::abs(refined - base) > tolerance)
        throw QuadratureUnconverged("radial refinement moved G* by " + std::to_string(std::abs(refined - base)));
    return refined;
}

/// Five-point finite-difference Laplacian of G* at z.
inline double stencil_laplacian(const GStar& gs, cplx z, double h) {
    const double c = gs(z);
    return (gs(z + cplx{h, 0}) + gs(z - cplx{h, 0}) + gs(z + cplx{0, h}) + gs(z - cplx{0, h}) - 4.0 * c) / (h * h);
}

/// (4/area(U₁))(1(U₂) − 1(U₁)) at z.
inline double continuum_source(const BlobSpec& b, cplx z) {
    const double k = 4.0 / b.area();
    double v = 0.0;
    if (std::abs(z - b.center2) < b.radius) v += k;
    if (std::abs(z - b.center1) < b.radius) v -= k;
    return v;
}

struct ResidualCheck {
    double max_residual = 0.0;
    std::vector<cplx> probes;
    std::vector<double> residuals;
};

/// Max over `probes` random interior points (farther than δ/8 from both blob
/// boundaries) of |ΔG* − (4/area(U₁))(1(U₂) − 1(U₁))|, with ΔG* from the
/// five-point stencil at spacing h.
inline ResidualCheck laplacian_residual_check(const ConformalDomain& d, const BlobSpec& b, const QuadratureSpec& q,
                                              int probes, double h = 1e-3, std::uint64_t seed = 7) {
    const GStar gs(d, b, q);
    ResidualCheck out;
    Rng rng = make_stream(seed, 0);
    while (static_cast<int>(out.probes.size()) < probes) {
        const double r = 0.95 * std::sqrt(uniform01(rng));
        const cplx z = d.phi(std::polar(r, 2.0 * std::numbers::pi * uniform01(rng)));
        const double guard = b.delta / 8.0;
        if (std::abs(std::abs(z - b.center1) - b.radius) <= guard) continue;
        if (std::abs(std::abs(z - b.center2) - b.radius) <= guard) continue;
        out.probes.push_back(z);
    }
    out.residuals.resize(out.probes.size());
    parallel_for(out.probes.size(), [&](std::size_t k) {
        out.residuals[k] = std::abs(stencil_laplacian(gs, out.probes[k], h) - continuum_source(b, out.probes[k]));
    });
    for (double r : out.residuals) out.max_residual = std::max(out.max_residual, r);
    return out;
}

}  // namespace nglat
