#include "vqanoise/bqd.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vqanoise/parallel.hpp"

namespace vqanoise {

using nlohmann::json;

namespace {

std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", score);
    return buf;
}

void check_instance(const BqdInstance& inst, size_t k) {
    if (inst.ranked.size() != k)
        throw std::runtime_error("bqd instance for mq " + std::to_string(inst.mq.question_id) +
                                 " has " + std::to_string(inst.ranked.size()) +
                                 " entries, expected " + std::to_string(k));
    for (size_t i = 1; i < inst.ranked.size(); ++i) {
        if (inst.ranked[i].score > inst.ranked[i - 1].score)
            throw std::runtime_error("bqd instance for mq " +
                                     std::to_string(inst.mq.question_id) +
                                     " has increasing scores at rank " + std::to_string(i));
    }
}

}  // namespace

std::vector<BqdInstance> build_bqd(const std::vector<Question>& queries,
                                   const QuestionPool& pool, const RankingFn& ranking_fn,
                                   size_t k, unsigned threads) {
    std::vector<BqdInstance> out(queries.size());
    parallel_for(queries.size(), threads, [&](size_t qi) {
        const Question& mq = queries[qi];
        SimilarityRanking ranking;
        try {
            ranking = ranking_fn(mq);
        } catch (const std::exception& e) {
            throw std::runtime_error("ranking failed for mq " +
                                     std::to_string(mq.question_id) + ": " + e.what());
        }
        if (ranking.entries.size() < k)
            throw std::runtime_error("ranking for mq " + std::to_string(mq.question_id) +
                                     " yielded " + std::to_string(ranking.entries.size()) +
                                     " entries, need " + std::to_string(k));
        BqdInstance inst;
        inst.image_id = mq.image_id;
        inst.mq = mq;
        inst.ranked.reserve(k);
        for (size_t i = 0; i < k; ++i) {
            const ScoredQuestion& e = ranking.entries[i];
            const Question* bq = pool.find_by_id(e.question_id);
            if (!bq)
                throw std::runtime_error("ranking for mq " + std::to_string(mq.question_id) +
                                         " references unknown pool question " +
                                         std::to_string(e.question_id));
            inst.ranked.push_back({bq->text, e.score});
        }
        check_instance(inst, k);
        out[qi] = std::move(inst);
    });
    return out;
}

Partition partition(const BqdInstance& instance, int p) {
    if (p < 0 || p > kNumPartitions)
        throw std::runtime_error("partition index " + std::to_string(p) + " out of range 0..7");
    Partition part;
    part.index = p;
    if (p == 0) return part;
    if (instance.ranked.size() != kBqdEntries)
        throw std::runtime_error("partitioning requires exactly 21 ranked entries, got " +
                                 std::to_string(instance.ranked.size()));
    const size_t start = kPartitionSize * static_cast<size_t>(p - 1);
    for (size_t i = start; i < start + kPartitionSize; ++i)
        part.bq_texts.push_back(instance.ranked[i].text);
    return part;
}

std::string perturb(const std::string& mq_text, const Partition& part) {
    std::string out = mq_text;
    for (const std::string& bq : part.bq_texts) {
        out.push_back(' ');
        out.append(bq);
    }
    return out;
}

NoisySet make_noisy_set(const std::vector<BqdInstance>& instances, int p) {
    NoisySet noisy;
    noisy.partition_index = p;
    noisy.records.reserve(instances.size());
    for (const BqdInstance& inst : instances) {
        Partition part = partition(inst, p);
        noisy.records.push_back({inst.mq.question_id, inst.image_id, perturb(inst.mq.text, part)});
    }
    return noisy;
}

void write_bqd(const std::string& path, const std::vector<BqdInstance>& instances) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const BqdInstance& inst : instances) {
        // Lines are assembled by hand so scores keep a fixed 17-significant-
        // digit form; strings go through the JSON library for escaping.
        out << "{\"image_id\":" << inst.image_id
            << ",\"question_id\":" << inst.mq.question_id
            << ",\"question\":" << json(inst.mq.text).dump()
            << ",\"basic_questions\":[";
        for (size_t i = 0; i < inst.ranked.size(); ++i) {
            if (i) out << ',';
            out << "{\"text\":" << json(inst.ranked[i].text).dump()
                << ",\"score\":" << format_score(inst.ranked[i].score) << '}';
        }
        out << "]}\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<BqdInstance> read_bqd(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bqd file: " + path);
    std::vector<BqdInstance> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad bqd line: " + e.what());
        }
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("question_id") ||
            !rec.contains("question") || !rec.contains("basic_questions") ||
            !rec["basic_questions"].is_array())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": missing bqd fields");
        BqdInstance inst;
        inst.image_id = rec["image_id"].get<int64_t>();
        inst.mq.question_id = rec["question_id"].get<int64_t>();
        inst.mq.image_id = inst.image_id;
        inst.mq.text = rec["question"].get<std::string>();
        inst.mq.tokens = tokenize(inst.mq.text);
        for (const json& bq : rec["basic_questions"]) {
            if (!bq.is_object() || !bq.contains("text") || !bq.contains("score"))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": malformed basic question entry");
            inst.ranked.push_back({bq["text"].get<std::string>(), bq["score"].get<double>()});
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void write_noisy_questions(const std::string& path, const NoisySet& noisy) {
    std::vector<Question> questions;
    questions.reserve(noisy.records.size());
    for (const NoisyRecord& r : noisy.records) {
        Question q;
        q.question_id = r.question_id;
        q.image_id = r.image_id;
        q.text = r.text;
        q.tokens = tokenize(r.text);
        questions.push_back(std::move(q));
    }
    save_questions(path, questions, QuestionFormat::vqa_json);
}

}  // namespace vqanoise
