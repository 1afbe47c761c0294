#pragma once

// Independent LASSO oracle for cross-checking the coordinate-descent
// solver: accelerated projected gradient on the split formulation
//   min over u = [xp; xn] >= 0 of 0.5*||A(xp-xn) - b||^2 + lambda*1'u,
// with adaptive restart. Shares no code with the solver under test.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vqanoise/ranker.hpp"

namespace oracle {

inline double lasso_objective(const vqanoise::DenseColumns<double>& A, std::span<const double> b,
                              std::span<const double> x, double lambda) {
    const size_t d = A.dim(), n = A.num_cols();
    std::vector<double> resid(b.begin(), b.end());
    for (size_t j = 0; j < n; ++j) {
        const auto a = A.col(j);
        for (size_t i = 0; i < d; ++i) resid[i] -= x[j] * a[i];
    }
    double q = 0.0;
    for (double v : resid) q += v * v;
    double l1 = 0.0;
    for (double v : x) l1 += std::abs(v);
    return 0.5 * q + lambda * l1;
}

// Largest eigenvalue of A'A by power iteration (deterministic start).
inline double gram_spectral_norm(const vqanoise::DenseColumns<double>& A) {
    const size_t d = A.dim(), n = A.num_cols();
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double eig = 1.0;
    for (int it = 0; it < 300; ++it) {
        std::vector<double> av(d, 0.0);
        for (size_t j = 0; j < n; ++j) {
            const auto a = A.col(j);
            for (size_t i = 0; i < d; ++i) av[i] += v[j] * a[i];
        }
        std::vector<double> w(n, 0.0);
        for (size_t j = 0; j < n; ++j) {
            const auto a = A.col(j);
            double s = 0.0;
            for (size_t i = 0; i < d; ++i) s += a[i] * av[i];
            w[j] = s;
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 1.0;
        eig = norm;
        for (size_t j = 0; j < n; ++j) v[j] = w[j] / norm;
    }
    return eig;
}

inline std::vector<double> solve_pg(const vqanoise::DenseColumns<double>& A,
                                    std::span<const double> b, double lambda,
                                    int max_iter = 400000) {
    const size_t d = A.dim(), n = A.num_cols();
    const double step = 1.0 / std::max(2.0 * gram_spectral_norm(A), 1e-12);

    std::vector<double> u(2 * n, 0.0), y(2 * n, 0.0), u_prev(2 * n, 0.0);
    double t_momentum = 1.0;
    double last_obj = lasso_objective(A, b, std::vector<double>(n, 0.0), lambda);
    int stall = 0;

    std::vector<double> resid(d), grad_base(n), x(n);
    for (int it = 0; it < max_iter; ++it) {
        // gradient at y: A'(Az - b) with z = yp - yn
        for (size_t i = 0; i < d; ++i) resid[i] = -b[i];
        for (size_t j = 0; j < n; ++j) {
            const double z = y[j] - y[n + j];
            if (z == 0.0) continue;
            const auto a = A.col(j);
            for (size_t i = 0; i < d; ++i) resid[i] += z * a[i];
        }
        for (size_t j = 0; j < n; ++j) {
            const auto a = A.col(j);
            double s = 0.0;
            for (size_t i = 0; i < d; ++i) s += a[i] * resid[i];
            grad_base[j] = s;
        }
        u_prev = u;
        for (size_t j = 0; j < n; ++j) {
            u[j] = std::max(0.0, y[j] - step * (grad_base[j] + lambda));
            u[n + j] = std::max(0.0, y[n + j] - step * (-grad_base[j] + lambda));
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double beta = (t_momentum - 1.0) / t_next;
        for (size_t j = 0; j < 2 * n; ++j) y[j] = u[j] + beta * (u[j] - u_prev[j]);
        t_momentum = t_next;

        if (it % 200 == 199) {
            for (size_t j = 0; j < n; ++j) x[j] = u[j] - u[n + j];
            const double obj = lasso_objective(A, b, x, lambda);
            if (obj > last_obj) {  // restart momentum when it overshoots
                y = u;
                t_momentum = 1.0;
            }
            if (std::abs(last_obj - obj) <= 1e-15 * (1.0 + std::abs(obj))) {
                if (++stall >= 5) break;
            } else {
                stall = 0;
            }
            last_obj = std::min(last_obj, obj);
        }
    }
    for (size_t j = 0; j < n; ++j) x[j] = u[j] - u[n + j];
    return x;
}

}  // namespace oracle
