#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace nglat {

using cplx = std::complex<double>;

struct BoundingBox {
    double xmin, xmax, ymin, ymax;
};

/// Smooth simply-connected domain U = φ(𝔻) for a polynomial map
/// φ(ζ) = Σ_{k≥1} a_k ζ^k that is certified univalent on the closed disc by
/// Σ_{k≥2} k|a_k| < |a₁|.
///
/// The inverse ψ is evaluated numerically (damped Newton with a grid-search
/// restart). Instances are immutable once built.
class ConformalDomain {
public:
    static constexpr int kBoundaryGrid = 1 << 12;
    // Newton iterates leaving |ζ| ≤ 1 + kEscapeMargin trigger the grid restart.
    static constexpr double kEscapeMargin = 0.5;
    // Roots with |ζ| above 1 + kRootMargin are reported as diverged.
    static constexpr double kRootMargin = 0.05;

    ConformalDomain(std::vector<cplx> coeffs, double inversion_tol)
        : coeffs_(std::move(coeffs)), inversion_tol_(inversion_tol) {
        if (coeffs_.empty()) throw std::invalid_argument("conformal map needs at least one coefficient");
        if (coeffs_.front() == cplx{0.0, 0.0}) throw std::invalid_argument("leading coefficient a1 must be nonzero");
        if (!(inversion_tol_ > 0.0)) throw std::invalid_argument("inversion_tol must be positive");

        const double a1 = std::abs(coeffs_.front());
        double tail = 0.0;
        double second = 0.0;
        for (std::size_t k = 2; k <= coeffs_.size(); ++k) {
            const double ak = std::abs(coeffs_[k - 1]);
            tail += static_cast<double>(k) * ak;
            second += static_cast<double>(k * (k - 1)) * ak;
        }
        if (!(tail < a1)) {
            throw UnivalenceViolation("sum k|a_k| = " + std::to_string(tail) + " >= |a1| = " + std::to_string(a1));
        }
        second_deriv_bound_ = second;

        // |φ'| has no zeros on the closed disc, so both its max and min are
        // attained on the circle. Sample there and widen by the φ'' Lipschitz
        // bound over half a grid step.
        const double h = 2.0 * std::numbers::pi / kBoundaryGrid;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        boundary_.resize(kBoundaryGrid);
        for (int k = 0; k < kBoundaryGrid; ++k) {
            const cplx zeta = std::polar(1.0, h * k);
            const double g = std::abs(dphi(zeta));
            lo = std::min(lo, g);
            hi = std::max(hi, g);
            boundary_[k] = phi(zeta);
        }
        const double slack = 0.5 * h * second_deriv_bound_;
        deriv_lo_ = std::max(lo - slack, a1 - tail);
        deriv_hi_ = std::min(hi + slack, a1 + tail);

        bbox_ = {boundary_[0].real(), boundary_[0].real(), boundary_[0].imag(), boundary_[0].imag()};
        for (const cplx& p : boundary_) {
            bbox_.xmin = std::min(bbox_.xmin, p.real());
            bbox_.xmax = std::max(bbox_.xmax, p.real());
            bbox_.ymin = std::min(bbox_.ymin, p.imag());
            bbox_.ymax = std::max(bbox_.ymax, p.imag());
        }
        const double pad = deriv_hi_ * h;
        bbox_.xmin -= pad;
        bbox_.xmax += pad;
        bbox_.ymin -= pad;
        bbox_.ymax += pad;
    }

    const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
    double inversion_tol() const noexcept { return inversion_tol_; }
    std::pair<double, double> deriv_bounds() const noexcept { return {deriv_lo_, deriv_hi_}; }
    const BoundingBox& bounding_box() const noexcept { return bbox_; }

    cplx phi(cplx zeta) const noexcept {
        cplx acc{0.0, 0.0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = (acc + *it) * zeta;
        return acc;
    }

    cplx dphi(cplx zeta) const noexcept {
        cplx acc{0.0, 0.0};
        for (std::size_t k = coeffs_.size(); k >= 1; --k) acc = acc * zeta + static_cast<double>(k) * coeffs_[k - 1];
        return acc;
    }

    /// Boundary anchors x₁ = φ(−i), x₂ = φ(i).
    cplx anchor1() const noexcept { return phi(cplx{0.0, -1.0}); }
    cplx anchor2() const noexcept { return phi(cplx{0.0, 1.0}); }

    std::optional<cplx> try_psi(cplx z) const noexcept {
        if (auto r = newton(z, z / coeffs_.front())) return r;
        // Grid restart: best coarse point in the closed disc.
        constexpr int kRad = 16, kAng = 64;
        cplx best{0.0, 0.0};
        double best_res = std::abs(z);
        for (int i = 1; i <= kRad; ++i) {
            const double r = static_cast<double>(i) / kRad;
            for (int j = 0; j < kAng; ++j) {
                const cplx zeta = std::polar(r, 2.0 * std::numbers::pi * j / kAng);
                const double res = std::abs(phi(zeta) - z);
                if (res < best_res) {
                    best_res = res;
                    best = zeta;
                }
            }
        }
        return newton(z, best);
    }

    cplx psi(cplx z) const {
        if (auto r = try_psi(z)) return *r;
        throw InversionDiverged("no preimage of (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                                ") in the closed disc");
    }

    double membership_margin() const noexcept { return inversion_tol_ / deriv_lo_; }

    bool contains(cplx z) const noexcept {
        const auto zeta = try_psi(z);
        return zeta && std::abs(*zeta) < 1.0 - membership_margin();
    }

    const std::vector<cplx>& boundary_samples() const noexcept { return boundary_; }

    /// Certified lower bound on d(z, ∂U): minimum over the boundary grid
    /// minus M·(grid spacing).
    double boundary_distance_lower(cplx z) const noexcept {
        double best = std::numeric_limits<double>::infinity();
        for (const cplx& p : boundary_) best = std::min(best, std::abs(p - z));
        return best - deriv_hi_ * (2.0 * std::numbers::pi / kBoundaryGrid);
    }

    /// Image under φ of the inward radial unit direction at the boundary
    /// point φ(ζ₀), |ζ₀| = 1.
    cplx inward_normal(cplx zeta0) const noexcept {
        const cplx dir = dphi(zeta0) * (-zeta0);
        return dir / std::abs(dir);
    }

private:
    std::optional<cplx> newton(cplx z, cplx zeta) const noexcept {
        constexpr int kMaxIter = 100;
        const double floor = std::max(inversion_tol_, 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(z)));
        cplx f = phi(zeta) - z;
        double res = std::abs(f);
        for (int it = 0; it < kMaxIter; ++it) {
            if (res <= floor) break;
            const cplx d = dphi(zeta);
            if (d == cplx{0.0, 0.0}) return std::nullopt;
            const cplx step = f / d;
            double lambda = 1.0;
            cplx trial = zeta - step;
            cplx ft = phi(trial) - z;
            while (std::abs(ft) >= res && lambda > 1e-6) {
                lambda *= 0.5;
                trial = zeta - lambda * step;
                ft = phi(trial) - z;
            }
            if (std::abs(ft) >= res) return std::nullopt;
            zeta = trial;
            f = ft;
            res = std::abs(f);
            if (std::abs(zeta) > 1.0 + kEscapeMargin) return std::nullopt;
        }
        if (res > floor || std::abs(zeta) > 1.0 + kRootMargin) return std::nullopt;
        return zeta;
    }

    std::vector<cplx> coeffs_;
    double inversion_tol_;
    double second_deriv_bound_ = 0.0;
    double deriv_lo_ = 1.0;
    double deriv_hi_ = 1.0;
    BoundingBox bbox_{};
    std::vector<cplx> boundary_;
};

inline ConformalDomain build_domain(std::vector<cplx> coeffs, double inversion_tol = 1e-12) {
    return ConformalDomain(std::move(coeffs), inversion_tol);
}

inline ConformalDomain disc_domain(double inversion_tol = 1e-12) { return build_domain({cplx{1.0, 0.0}}, inversion_tol); }

inline ConformalDomain bean_domain(double inversion_tol = 1e-12) {
    return build_domain({cplx{1.0, 0.0}, cplx{0.2, 0.0}}, inversion_tol);
}

/// Named presets: "disc" and "bean".
inline std::optional<std::vector<cplx>> preset_coefficients(const std::string& name) {
    if (name == "disc") return std::vector<cplx>{{1.0, 0.0}};
    if (name == "bean") return std::vector<cplx>{{1.0, 0.0}, {0.2, 0.0}};
    return std::nullopt;
}

struct BlobSpec {
    double delta = 0.0;
    cplx center1{};
    cplx center2{};
    double radius = 0.0;  // δ/4

    double area() const noexcept { return std::numbers::pi * radius * radius; }
};

/// Places y_i at distance δ from x_i along the inward normal and verifies
/// d(y_i, ∂U) > δ/2 and that the two blobs are disjoint and interior.
inline BlobSpec select_blob_centers(const ConformalDomain& d, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const cplx zeta1{0.0, -1.0}, zeta2{0.0, 1.0};
    BlobSpec b;
    b.delta = delta;
    b.radius = delta / 4.0;
    b.center1 = d.phi(zeta1) + delta * d.inward_normal(zeta1);
    b.center2 = d.phi(zeta2) + delta * d.inward_normal(zeta2);

    for (const cplx y : {b.center1, b.center2}) {
        if (!d.contains(y)) throw BlobPlacementFailed("blob center outside the domain; delta too large");
        const double dist = d.boundary_distance_lower(y);
        if (!(dist > delta / 2.0)) {
            throw BlobPlacementFailed("blob center within delta/2 of the boundary (certified distance " +
                                      std::to_string(dist) + ")");
        }
    }
    if (!(std::abs(b.center1 - b.center2) > 2.0 * b.radius)) {
        throw BlobPlacementFailed("blobs overlap; delta too large");
    }
    return b;
}

}  // namespace nglat
