#include "vqanoise/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqanoise {

namespace {

constexpr char kSep = '\x1f';

std::string join_ngram(const TokenList& tokens, size_t start, int n) {
    std::string key = tokens[start];
    for (int k = 1; k < n; ++k) {
        key.push_back(kSep);
        key.append(tokens[start + k]);
    }
    return key;
}

size_t ngram_count(const TokenList& tokens, int n) {
    return tokens.size() >= static_cast<size_t>(n) ? tokens.size() - n + 1 : 0;
}

}  // namespace

NgramProfile ngram_profile(const TokenList& tokens, int n) {
    NgramProfile p;
    p.n = n;
    for (size_t i = 0, e = ngram_count(tokens, n); i < e; ++i) ++p.counts[join_ngram(tokens, i, n)];
    return p;
}

uint32_t IdfTable::doc_freq(int n, const std::string& key) const {
    const auto& m = freq_[n - 1];
    auto it = m.find(key);
    return it == m.end() ? 1u : std::max(it->second, 1u);
}

IdfTable build_idf(const QuestionPool& pool) {
    if (pool.size() == 0) throw std::runtime_error("build_idf: empty pool");
    IdfTable t;
    t.doc_count_ = pool.size();
    for (const Question& q : pool.entries()) {
        for (int n = 1; n <= IdfTable::kMaxOrder; ++n) {
            NgramProfile p = ngram_profile(q.tokens, n);
            for (const auto& [key, _] : p.counts) ++t.freq_[n - 1][key];
        }
    }
    return t;
}

double bleu(const TokenList& candidate, const TokenList& reference, int order) {
    if (order < 1 || order > 4) throw std::invalid_argument("bleu: order must be in 1..4");
    if (candidate.empty() || reference.empty()) return 0.0;

    double log_prec_sum = 0.0;
    for (int n = 1; n <= order; ++n) {
        size_t total = ngram_count(candidate, n);
        if (total == 0) return 0.0;
        NgramProfile cand = ngram_profile(candidate, n);
        NgramProfile ref = ngram_profile(reference, n);
        uint64_t clipped = 0;
        for (const auto& [key, cnt] : cand.counts) {
            auto it = ref.counts.find(key);
            if (it != ref.counts.end()) clipped += std::min(cnt, it->second);
        }
        if (clipped == 0) return 0.0;
        log_prec_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    double score = std::exp(log_prec_sum / order);

    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    if (c <= r) score *= std::exp(1.0 - r / c);
    return std::min(score, 1.0);
}

double rouge_l(const TokenList& candidate, const TokenList& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const size_t m = candidate.size(), n = reference.size();

    // Row-rolling LCS table.
    std::vector<uint32_t> prev(n + 1, 0), cur(n + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = prev[n];
    if (lcs == 0.0) return 0.0;

    constexpr double beta = 1.2;
    const double recall = lcs / static_cast<double>(n);
    const double precision = lcs / static_cast<double>(m);
    return ((1.0 + beta * beta) * recall * precision) / (recall + beta * beta * precision);
}

double cider(const TokenList& candidate, const TokenList& reference, const IdfTable& idf) {
    if (idf.empty()) throw std::runtime_error("cider: idf table is empty");

    const double log_doc_count = std::log(static_cast<double>(idf.doc_count()));
    double sum = 0.0;
    int levels = 0;
    for (int n = 1; n <= IdfTable::kMaxOrder; ++n) {
        size_t ref_total = ngram_count(reference, n);
        if (ref_total == 0) continue;  // reference defines which orders count
        ++levels;

        size_t cand_total = ngram_count(candidate, n);
        if (cand_total == 0) continue;  // cosine against empty vector is 0

        NgramProfile cand = ngram_profile(candidate, n);
        NgramProfile ref = ngram_profile(reference, n);

        auto weight = [&](uint32_t count, size_t total, const std::string& key) {
            double tf = static_cast<double>(count) / static_cast<double>(total);
            return tf * (log_doc_count - std::log(static_cast<double>(idf.doc_freq(n, key))));
        };

        double dot = 0.0, cand_sq = 0.0, ref_sq = 0.0;
        for (const auto& [key, cnt] : cand.counts) {
            double w = weight(cnt, cand_total, key);
            cand_sq += w * w;
            auto it = ref.counts.find(key);
            if (it != ref.counts.end()) dot += w * weight(it->second, ref_total, key);
        }
        for (const auto& [key, cnt] : ref.counts) {
            double w = weight(cnt, ref_total, key);
            ref_sq += w * w;
        }
        if (cand_sq > 0.0 && ref_sq > 0.0)
            sum += dot / (std::sqrt(cand_sq) * std::sqrt(ref_sq));
    }
    if (levels == 0) return 0.0;
    return std::min(std::max(sum / levels, 0.0), 1.0);
}

namespace {

// Alignment search for METEOR: maximum-cardinality exact matching with the
// fewest chunks; first-found solution wins ties, which prefers leftmost
// candidate positions because positions and reference slots are scanned in
// ascending order. A node budget bounds degenerate inputs; once a complete
// alignment exists the budget only stops further chunk-count improvement.
struct MeteorAligner {
    const TokenList& cand;
    const TokenList& ref;
    std::vector<int> cand_type;               // token type id per candidate position
    std::vector<int> ref_type;                // token type id per reference position
    std::vector<std::vector<int>> ref_slots;  // type id -> reference positions
    std::vector<int> remaining_cand;          // per type, candidate occurrences at or after pos
    std::vector<int> remaining_ref;           // per type, unused reference occurrences
    std::vector<char> ref_used;
    int required_matches = 0;
    int best_chunks = 0;
    long budget = 4000000;

    MeteorAligner(const TokenList& c, const TokenList& r) : cand(c), ref(r) {}

    int run() {
        std::unordered_map<std::string, int> type_of;
        auto intern = [&](const std::string& t) {
            auto [it, inserted] = type_of.emplace(t, static_cast<int>(type_of.size()));
            (void)inserted;
            return it->second;
        };
        for (const auto& t : cand) cand_type.push_back(intern(t));
        for (const auto& t : ref) ref_type.push_back(intern(t));
        const int ntypes = static_cast<int>(type_of.size());

        ref_slots.assign(ntypes, {});
        for (size_t j = 0; j < ref.size(); ++j) ref_slots[ref_type[j]].push_back(static_cast<int>(j));
        std::vector<int> cand_count(ntypes, 0), ref_count(ntypes, 0);
        for (int t : cand_type) ++cand_count[t];
        for (int t : ref_type) ++ref_count[t];
        for (int t = 0; t < ntypes; ++t)
            required_matches += std::min(cand_count[t], ref_count[t]);
        if (required_matches == 0) return 0;

        remaining_cand = cand_count;
        remaining_ref = ref_count;
        ref_used.assign(ref.size(), 0);
        best_chunks = required_matches + 1;
        dfs(0, -2, 0, 0);
        return best_chunks;
    }

    // Upper bound on matches still reachable from position `pos`.
    int max_additional() const {
        int total = 0;
        for (size_t t = 0; t < remaining_cand.size(); ++t)
            total += std::min(remaining_cand[t], remaining_ref[t]);
        return total;
    }

    void dfs(size_t pos, int last_ref, int chunks, int matched) {
        if (chunks >= best_chunks) return;
        if (--budget < 0 && best_chunks <= required_matches) return;
        if (matched + max_additional() < required_matches) return;
        if (pos == cand.size()) {
            if (matched == required_matches) best_chunks = chunks;
            return;
        }
        const int t = cand_type[pos];
        --remaining_cand[t];
        for (int j : ref_slots[t]) {
            if (ref_used[j]) continue;
            ref_used[j] = 1;
            --remaining_ref[t];
            int next_chunks = (j == last_ref + 1) ? chunks : chunks + 1;
            dfs(pos + 1, j, next_chunks, matched + 1);
            ++remaining_ref[t];
            ref_used[j] = 0;
        }
        dfs(pos + 1, -2, chunks, matched);  // leave this position unmatched
        ++remaining_cand[t];
    }
};

}  // namespace

double meteor(const TokenList& candidate, const TokenList& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;

    MeteorAligner aligner(candidate, reference);
    int chunks = aligner.run();
    int matches = aligner.required_matches;
    if (matches == 0) return 0.0;

    const double m = static_cast<double>(matches);
    const double precision = m / static_cast<double>(candidate.size());
    const double recall = m / static_cast<double>(reference.size());
    const double f = 10.0 * precision * recall / (recall + 9.0 * precision);
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return f * (1.0 - penalty);
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::bleu1: return "bleu1";
        case Metric::bleu2: return "bleu2";
        case Metric::bleu3: return "bleu3";
        case Metric::bleu4: return "bleu4";
        case Metric::rouge: return "rouge";
        case Metric::cider: return "cider";
        case Metric::meteor: return "meteor";
    }
    return "?";
}

Metric metric_from_string(const std::string& s) {
    if (s == "bleu1") return Metric::bleu1;
    if (s == "bleu2") return Metric::bleu2;
    if (s == "bleu3") return Metric::bleu3;
    if (s == "bleu4") return Metric::bleu4;
    if (s == "rouge") return Metric::rouge;
    if (s == "cider") return Metric::cider;
    if (s == "meteor") return Metric::meteor;
    throw std::runtime_error("unknown metric: \"" + s + "\"");
}

bool metric_needs_idf(Metric m) { return m == Metric::cider; }

double score_metric(Metric m, const TokenList& candidate, const TokenList& reference,
                    const IdfTable* idf) {
    switch (m) {
        case Metric::bleu1: return bleu(candidate, reference, 1);
        case Metric::bleu2: return bleu(candidate, reference, 2);
        case Metric::bleu3: return bleu(candidate, reference, 3);
        case Metric::bleu4: return bleu(candidate, reference, 4);
        case Metric::rouge: return rouge_l(candidate, reference);
        case Metric::cider:
            if (!idf) throw std::runtime_error("cider requires an idf table");
            return cider(candidate, reference, *idf);
        case Metric::meteor: return meteor(candidate, reference);
    }
    throw std::logic_error("unreachable metric");
}

}  // namespace vqanoise
