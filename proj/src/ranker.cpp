#include "vqanoise/ranker.hpp"

#include <algorithm>

namespace vqanoise {

namespace {

void sort_and_truncate(std::vector<ScoredQuestion>& entries, size_t k) {
    std::sort(entries.begin(), entries.end(), [](const ScoredQuestion& a, const ScoredQuestion& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.question_id < b.question_id;
    });
    entries.resize(k);
}

}  // namespace

RankMethod rank_method_for(Metric m) {
    switch (m) {
        case Metric::bleu1: return RankMethod::bleu1;
        case Metric::bleu2: return RankMethod::bleu2;
        case Metric::bleu3: return RankMethod::bleu3;
        case Metric::bleu4: return RankMethod::bleu4;
        case Metric::rouge: return RankMethod::rouge;
        case Metric::cider: return RankMethod::cider;
        case Metric::meteor: return RankMethod::meteor;
    }
    throw std::logic_error("unreachable metric");
}

const char* to_string(RankMethod m) {
    switch (m) {
        case RankMethod::lasso: return "lasso";
        case RankMethod::bleu1: return "bleu1";
        case RankMethod::bleu2: return "bleu2";
        case RankMethod::bleu3: return "bleu3";
        case RankMethod::bleu4: return "bleu4";
        case RankMethod::rouge: return "rouge";
        case RankMethod::cider: return "cider";
        case RankMethod::meteor: return "meteor";
    }
    return "?";
}

RankMethod rank_method_from_string(const std::string& s) {
    if (s == "lasso") return RankMethod::lasso;
    return rank_method_for(metric_from_string(s));
}

SimilarityRanking rank_sparse(const EmbeddingMatrix& A, const QuestionPool& pool,
                              const Question& mq, const QueryVector& mq_vector, size_t k,
                              const LassoConfig& cfg) {
    if (k < 1) throw std::runtime_error("rank_sparse: k must be >= 1");
    if (mq_vector.dim() != A.dim())
        throw std::runtime_error("rank_sparse: query dimension " +
                                 std::to_string(mq_vector.dim()) + " != dictionary dimension " +
                                 std::to_string(A.dim()));

    // The pool is deduplicated by normalized text, so at most one column can
    // be a duplicate of the main question.
    std::vector<char> mask(A.num_cols(), 0);
    size_t masked = 0;
    if (const Question* dup = pool.find_by_normalized(normalize_text(mq.text))) {
        if (auto col = A.find(dup->question_id)) {
            mask[*col] = 1;
            masked = 1;
        }
    }
    if (A.num_cols() - masked < k)
        throw std::runtime_error("rank_sparse: pool has " +
                                 std::to_string(A.num_cols() - masked) +
                                 " eligible questions, need k=" + std::to_string(k));

    LassoResult sol = lasso_solve(A, mq_vector.values, cfg, mask);

    SimilarityRanking out;
    out.mq_id = mq.question_id;
    out.method = RankMethod::lasso;
    out.entries.reserve(A.num_cols() - masked);
    for (size_t j = 0; j < A.num_cols(); ++j) {
        if (mask[j]) continue;
        out.entries.push_back({A.ids()[j], sol.x[j]});
    }
    sort_and_truncate(out.entries, k);
    return out;
}

SimilarityRanking rank_direct(const Question& mq, const QuestionPool& pool, Metric metric,
                              size_t k, const IdfTable* idf) {
    if (k < 1) throw std::runtime_error("rank_direct: k must be >= 1");
    if (metric_needs_idf(metric) && (!idf || idf->empty()))
        throw std::runtime_error("rank_direct: cider requires a non-empty idf table");

    const std::string mq_norm = normalize_text(mq.text);
    SimilarityRanking out;
    out.mq_id = mq.question_id;
    out.method = rank_method_for(metric);
    out.entries.reserve(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        if (pool.normalized_text(i) == mq_norm) continue;
        const Question& bq = pool.at(i);
        out.entries.push_back({bq.question_id, score_metric(metric, bq.tokens, mq.tokens, idf)});
    }
    if (out.entries.size() < k)
        throw std::runtime_error("rank_direct: pool has " + std::to_string(out.entries.size()) +
                                 " eligible questions, need k=" + std::to_string(k));
    sort_and_truncate(out.entries, k);
    return out;
}

}  // namespace vqanoise
