#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace nglat {

struct CgResult {
    int iterations = 0;
    bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for a symmetric positive
/// (semi)definite operator. `apply(x, y)` writes y = A x. Iteration stops when
/// `stop(residual)` returns true (residual r = b − A x), or after max_iter.
/// x carries the initial guess in and the solution out.
template <class Apply, class Stop>
CgResult pcg(Apply&& apply, std::span<const double> diag, std::span<const double> b, std::span<double> x,
             Stop&& stop, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), q(n);
    apply(std::span<const double>(x.data(), n), std::span<double>(q));
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
    CgResult out;
    if (stop(std::span<const double>(r))) {
        out.converged = true;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
    p = z;
    double rz = 0.0;
    for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];

    for (int it = 1; it <= max_iter; ++it) {
        apply(std::span<const double>(p), std::span<double>(q));
        double pq = 0.0;
        for (std::size_t k = 0; k < n; ++k) pq += p[k] * q[k];
        if (!(pq > 0.0)) {
            out.iterations = it;
            return out;
        }
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        // Periodically replace the recursive residual by the true one so the
        // stopping test is not fooled by drift.
        if (it % 50 == 0) {
            apply(std::span<const double>(x.data(), n), std::span<double>(q));
            for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
        }
        if (stop(std::span<const double>(r))) {
            apply(std::span<const double>(x.data(), n), std::span<double>(q));
            for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
            if (stop(std::span<const double>(r))) {
                out.iterations = it;
                out.converged = true;
                return out;
            }
        }
        double rz_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            z[k] = r[k] / diag[k];
            rz_new += r[k] * z[k];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        out.iterations = it;
    }
    return out;
}

}  // namespace nglat
