#pragma once

// Question loading, normalization, tokenization and pool construction.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace vqanoise {

struct Question {
    int64_t question_id = 0;
    int64_t image_id = 0;
    std::string text;
    std::vector<std::string> tokens;  // always tokenize(text)
};

enum class AnswerType { yes_no, number, other };

const char* to_string(AnswerType t);
AnswerType answer_type_from_string(const std::string& s);

struct AnnotationRecord {
    int64_t question_id = 0;
    AnswerType answer_type = AnswerType::other;
    std::vector<std::string> answers;  // exactly 10 annotator answers
};

// Questions deduplicated by normalized text; first occurrence wins.
class QuestionPool {
public:
    QuestionPool() = default;

    const std::vector<Question>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    size_t dropped_duplicates() const { return dropped_; }

    const Question& at(size_t i) const { return entries_[i]; }
    const std::string& normalized_text(size_t i) const { return normalized_[i]; }

    bool contains_normalized(const std::string& norm) const { return index_.count(norm) > 0; }
    const Question* find_by_normalized(const std::string& norm) const;
    const Question* find_by_id(int64_t question_id) const;

    friend QuestionPool build_pool(const std::vector<Question>& questions);

private:
    std::vector<Question> entries_;
    std::vector<std::string> normalized_;          // aligned with entries_
    std::unordered_map<std::string, size_t> index_;  // normalized text -> position
    std::unordered_map<int64_t, size_t> by_id_;
    size_t dropped_ = 0;
};

enum class QuestionFormat { vqa_json, jsonl };

// Lowercases, strips ? . , ! ' " ; : ( ) and splits on whitespace runs.
std::vector<std::string> tokenize(const std::string& text);

// Dedup key: lowercase, collapse whitespace, drop trailing punctuation.
std::string normalize_text(const std::string& text);

// Answer equality key: lowercase, trim, collapse whitespace, strip punctuation.
std::string normalize_answer(const std::string& answer);

std::vector<Question> load_questions(const std::string& path, QuestionFormat format);
void save_questions(const std::string& path, const std::vector<Question>& questions,
                    QuestionFormat format);

std::vector<AnnotationRecord> load_annotations(const std::string& path);

QuestionPool build_pool(const std::vector<Question>& questions);

// Keeps questions whose annotation carries the wanted answer type; questions
// without an annotation are dropped. Default filter behind the yes/no pool.
std::vector<Question> filter_by_answer_type(const std::vector<Question>& questions,
                                            const std::vector<AnnotationRecord>& annotations,
                                            AnswerType wanted);

}  // namespace vqanoise
