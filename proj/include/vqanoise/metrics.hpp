#pragma once

// Sentence-level similarity scorers used as direct ranking baselines:
// BLEU-1..4, ROUGE-L, CIDEr and METEOR. All scores lie in [0,1] and all
// scorers are pure functions; IdfTable is immutable once built.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vqanoise/corpus.hpp"

namespace vqanoise {

using TokenList = std::vector<std::string>;

// Multiset of n-grams of one order. Keys are tokens joined with '\x1f'.
struct NgramProfile {
    int n = 1;
    std::unordered_map<std::string, uint32_t> counts;
};

NgramProfile ngram_profile(const TokenList& tokens, int n);

// Document frequencies of 1..4-grams over a ranking pool.
class IdfTable {
public:
    static constexpr int kMaxOrder = 4;

    size_t doc_count() const { return doc_count_; }
    bool empty() const { return doc_count_ == 0; }

    // Sentences containing the n-gram at least once; unseen n-grams count
    // as 1 so their idf weight is maximal, as in consensus-based scoring.
    uint32_t doc_freq(int n, const std::string& key) const;

    friend IdfTable build_idf(const QuestionPool& pool);

private:
    size_t doc_count_ = 0;
    std::unordered_map<std::string, uint32_t> freq_[kMaxOrder];
};

IdfTable build_idf(const QuestionPool& pool);

// Geometric mean of clipped n-gram precisions times the brevity penalty.
// No smoothing: any zero precision gives 0. Empty input gives 0.
double bleu(const TokenList& candidate, const TokenList& reference, int order);

// LCS F-measure with beta = 1.2.
double rouge_l(const TokenList& candidate, const TokenList& reference);

// Mean over n = 1..4 of tf-idf cosine similarity; orders where the
// reference has no n-grams are excluded from the mean.
double cider(const TokenList& candidate, const TokenList& reference, const IdfTable& idf);

// Exact-match unigram alignment minimizing chunk count among
// maximum-cardinality matchings; F = 10PR/(R+9P), penalty 0.5*(ch/m)^3.
double meteor(const TokenList& candidate, const TokenList& reference);

enum class Metric { bleu1, bleu2, bleu3, bleu4, rouge, cider, meteor };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);
bool metric_needs_idf(Metric m);

double score_metric(Metric m, const TokenList& candidate, const TokenList& reference,
                    const IdfTable* idf);

}  // namespace vqanoise
