#pragma once

// Basic question datasets: per main question, its 21 top-ranked pool
// questions with similarity scores, the seven 3-question noise partitions
// over them, and the concatenation perturbation that emits noisy files.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vqanoise/corpus.hpp"
#include "vqanoise/ranker.hpp"

namespace vqanoise {

struct ScoredText {
    std::string text;
    double score = 0.0;
};

inline constexpr size_t kBqdEntries = 21;
inline constexpr int kNumPartitions = 7;  // partitions 1..7; 0 is the clean set
inline constexpr size_t kPartitionSize = 3;

struct BqdInstance {
    int64_t image_id = 0;
    Question mq;
    std::vector<ScoredText> ranked;  // descending scores
};

// Ranked noise slice: empty for index 0, otherwise the three consecutive
// entries 3(p-1)+1 .. 3p of the instance's ranking.
struct Partition {
    int index = 0;
    std::vector<std::string> bq_texts;
};

struct NoisyRecord {
    int64_t question_id = 0;
    int64_t image_id = 0;
    std::string text;
};

struct NoisySet {
    int partition_index = 0;
    std::vector<NoisyRecord> records;  // one per instance, in instance order
};

using RankingFn = std::function<SimilarityRanking(const Question&)>;

// One instance per query, in query order. Ranking failures are reported
// with the offending main-question id. Instances hold exactly k entries.
std::vector<BqdInstance> build_bqd(const std::vector<Question>& queries,
                                   const QuestionPool& pool, const RankingFn& ranking_fn,
                                   size_t k = kBqdEntries, unsigned threads = 1);

Partition partition(const BqdInstance& instance, int p);

// Main question text followed by the partition's texts, joined by single
// spaces; partition 0 returns the text unchanged.
std::string perturb(const std::string& mq_text, const Partition& part);

NoisySet make_noisy_set(const std::vector<BqdInstance>& instances, int p);

// JSON-lines serialization; scores carry 17 significant digits so a
// write/read cycle is value-exact.
void write_bqd(const std::string& path, const std::vector<BqdInstance>& instances);
std::vector<BqdInstance> read_bqd(const std::string& path);

// Noisy output in the question-file shape so it can be fed to a VQA model.
void write_noisy_questions(const std::string& path, const NoisySet& noisy);

}  // namespace vqanoise
