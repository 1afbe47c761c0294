#pragma once

// Similarity ranking of pool questions against a main question, either by
// expressing the main question as a sparse combination of pool embeddings
// (coordinate-descent LASSO) or by a direct text metric.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "vqanoise/corpus.hpp"
#include "vqanoise/embedding.hpp"
#include "vqanoise/metrics.hpp"

namespace vqanoise {

struct LassoConfig {
    double lambda = 1e-6;
    double tol = 1e-7;   // convergence threshold on max coefficient change per sweep
    int max_iter = 1000;  // sweep cap
};

struct LassoResult {
    std::vector<double> x;
    int sweeps = 0;
    bool converged = false;
    // Objective 0.5*||Ax-b||^2 + lambda*||x||_1 before the first sweep and
    // after each sweep; non-increasing by construction of the updates.
    std::vector<double> objective;
};

inline double soft_threshold(double v, double lambda) {
    if (v > lambda) return v - lambda;
    if (v < -lambda) return v + lambda;
    return 0.0;
}

// Column access shared by EmbeddingMatrix (float storage) and the dense
// double matrices used in tests.
template <typename M>
concept ColumnMatrix = requires(const M& m, size_t k) {
    { m.dim() } -> std::convertible_to<size_t>;
    { m.num_cols() } -> std::convertible_to<size_t>;
    { m.col(k)[0] } -> std::convertible_to<double>;
};

template <typename T>
struct DenseColumns {
    size_t dim_ = 0;
    std::vector<T> data_;  // column-contiguous

    size_t dim() const { return dim_; }
    size_t num_cols() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::span<const T> col(size_t k) const { return {data_.data() + k * dim_, dim_}; }
};

// Cyclic coordinate descent with residual maintenance. Unit-norm columns
// make x_j <- soft_threshold(x_j + a_j^T r, lambda) the exact coordinate
// minimizer. Starts from x = 0; masked columns stay at 0.
template <ColumnMatrix M>
LassoResult lasso_solve(const M& A, std::span<const double> b, const LassoConfig& cfg,
                        std::span<const char> mask = {}) {
    const size_t n = A.num_cols();
    const size_t d = A.dim();
    if (n == 0) throw std::runtime_error("lasso_solve: empty dictionary");
    if (b.size() != d) throw std::runtime_error("lasso_solve: dimension mismatch");
    if (!mask.empty() && mask.size() != n)
        throw std::runtime_error("lasso_solve: mask size mismatch");
    if (cfg.lambda < 0.0 || cfg.tol <= 0.0 || cfg.max_iter < 1)
        throw std::runtime_error("lasso_solve: invalid config");

    LassoResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end());

    auto objective = [&] {
        double q = 0.0;
        for (double v : r) q += v * v;
        double l1 = 0.0;
        for (double v : res.x) l1 += std::abs(v);
        return 0.5 * q + cfg.lambda * l1;
    };
    res.objective.push_back(objective());

    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_delta = 0.0;
        for (size_t j = 0; j < n; ++j) {
            if (!mask.empty() && mask[j]) continue;
            const auto a = A.col(j);
            double dot = 0.0;
            for (size_t i = 0; i < d; ++i) dot += static_cast<double>(a[i]) * r[i];
            if (!std::isfinite(dot))
                throw std::runtime_error("lasso_solve: non-finite value encountered");
            const double updated = soft_threshold(res.x[j] + dot, cfg.lambda);
            const double delta = updated - res.x[j];
            if (delta != 0.0) {
                for (size_t i = 0; i < d; ++i) r[i] -= delta * static_cast<double>(a[i]);
                res.x[j] = updated;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        ++res.sweeps;
        res.objective.push_back(objective());
        if (max_delta < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// Optimality certificate, computed from a fresh residual rather than the
// solver's maintained one. Zero certifies an exact LASSO solution.
template <ColumnMatrix M>
double kkt_residual(const M& A, std::span<const double> b, std::span<const double> x,
                    double lambda) {
    const size_t n = A.num_cols();
    const size_t d = A.dim();
    if (b.size() != d || x.size() != n)
        throw std::runtime_error("kkt_residual: shape mismatch");

    std::vector<double> ax_minus_b(d, 0.0);
    for (size_t j = 0; j < n; ++j) {
        if (x[j] == 0.0) continue;
        const auto a = A.col(j);
        for (size_t i = 0; i < d; ++i) ax_minus_b[i] += x[j] * static_cast<double>(a[i]);
    }
    for (size_t i = 0; i < d; ++i) ax_minus_b[i] -= b[i];

    double worst = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const auto a = A.col(j);
        double g = 0.0;
        for (size_t i = 0; i < d; ++i) g += static_cast<double>(a[i]) * ax_minus_b[i];
        double v;
        if (x[j] > 0.0)
            v = std::abs(g + lambda);
        else if (x[j] < 0.0)
            v = std::abs(g - lambda);
        else
            v = std::max(std::abs(g) - lambda, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

enum class RankMethod { lasso, bleu1, bleu2, bleu3, bleu4, rouge, cider, meteor };

const char* to_string(RankMethod m);
RankMethod rank_method_from_string(const std::string& s);
RankMethod rank_method_for(Metric m);

struct ScoredQuestion {
    int64_t question_id = 0;
    double score = 0.0;
};

struct SimilarityRanking {
    int64_t mq_id = 0;
    RankMethod method = RankMethod::lasso;
    std::vector<ScoredQuestion> entries;  // scores non-increasing, ids unique
};

// Top-k pool questions by LASSO coefficient. The pool entry whose
// normalized text equals the main question's is masked out before solving;
// entries are sorted by score descending with ascending-id tie-break, so
// zero coefficients pad the tail in deterministic id order.
SimilarityRanking rank_sparse(const EmbeddingMatrix& A, const QuestionPool& pool,
                              const Question& mq, const QueryVector& mq_vector, size_t k,
                              const LassoConfig& cfg);

// Top-k pool questions scored as metric(pool question, main question).
SimilarityRanking rank_direct(const Question& mq, const QuestionPool& pool, Metric metric,
                              size_t k, const IdfTable* idf);

}  // namespace vqanoise
