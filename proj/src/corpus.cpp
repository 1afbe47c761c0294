#include "vqanoise/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vqanoise {

using nlohmann::json;

namespace {

constexpr const char* kStripChars = "?.,!'\";:()";

bool is_stripped(char c) {
    for (const char* p = kStripChars; *p; ++p)
        if (*p == c) return true;
    return false;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

Question question_from_json(const json& rec, size_t record_index) {
    if (!rec.is_object() || !rec.contains("question_id") || !rec.contains("image_id") ||
        !rec.contains("question") || !rec["question"].is_string()) {
        throw std::runtime_error("malformed question record at index " +
                                 std::to_string(record_index));
    }
    Question q;
    q.question_id = rec["question_id"].get<int64_t>();
    q.image_id = rec["image_id"].get<int64_t>();
    q.text = rec["question"].get<std::string>();
    std::string trimmed = q.text;
    trimmed.erase(trimmed.begin(),
                  std::find_if_not(trimmed.begin(), trimmed.end(), is_space));
    if (trimmed.empty()) {
        throw std::runtime_error("empty question text at record index " +
                                 std::to_string(record_index));
    }
    q.tokens = tokenize(q.text);
    return q;
}

json question_to_json(const Question& q) {
    return json{{"question_id", q.question_id},
                {"image_id", q.image_id},
                {"question", q.text}};
}

}  // namespace

const char* to_string(AnswerType t) {
    switch (t) {
        case AnswerType::yes_no: return "yes/no";
        case AnswerType::number: return "number";
        case AnswerType::other: return "other";
    }
    return "other";
}

AnswerType answer_type_from_string(const std::string& s) {
    if (s == "yes/no") return AnswerType::yes_no;
    if (s == "number") return AnswerType::number;
    if (s == "other") return AnswerType::other;
    throw std::runtime_error("unknown answer_type: \"" + s + "\"");
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (is_stripped(c)) continue;
        if (is_space(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(lower(c));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' '), pending_space = false;
        out.push_back(lower(c));
    }
    while (!out.empty() && (is_stripped(out.back()) || out.back() == ' ')) out.pop_back();
    return out;
}

std::string normalize_answer(const std::string& answer) {
    std::string out;
    out.reserve(answer.size());
    bool pending_space = false;
    for (char c : answer) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (is_stripped(c)) continue;
        if (pending_space) out.push_back(' '), pending_space = false;
        out.push_back(lower(c));
    }
    return out;
}

std::vector<Question> load_questions(const std::string& path, QuestionFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open question file: " + path);

    std::vector<Question> out;
    if (format == QuestionFormat::vqa_json) {
        json root;
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw std::runtime_error("failed to parse " + path + ": " + e.what());
        }
        if (!root.is_object() || !root.contains("questions") || !root["questions"].is_array())
            throw std::runtime_error(path + ": expected top-level {\"questions\": [...]}");
        const json& arr = root["questions"];
        out.reserve(arr.size());
        for (size_t i = 0; i < arr.size(); ++i) out.push_back(question_from_json(arr[i], i));
    } else {
        std::string line;
        size_t idx = 0;
        while (std::getline(in, line)) {
            if (line.empty()) { ++idx; continue; }
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception& e) {
                throw std::runtime_error(path + ": bad jsonl record at index " +
                                         std::to_string(idx) + ": " + e.what());
            }
            out.push_back(question_from_json(rec, idx));
            ++idx;
        }
    }

    std::unordered_map<int64_t, size_t> seen;
    for (size_t i = 0; i < out.size(); ++i) {
        auto [it, inserted] = seen.emplace(out[i].question_id, i);
        if (!inserted)
            throw std::runtime_error(path + ": duplicate question_id " +
                                     std::to_string(out[i].question_id) + " at records " +
                                     std::to_string(it->second) + " and " + std::to_string(i));
    }
    return out;
}

void save_questions(const std::string& path, const std::vector<Question>& questions,
                    QuestionFormat format) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw std::runtime_error("cannot open for writing: " + path);
    if (format == QuestionFormat::vqa_json) {
        json arr = json::array();
        for (const Question& q : questions) arr.push_back(question_to_json(q));
        outf << json{{"questions", std::move(arr)}}.dump() << '\n';
    } else {
        for (const Question& q : questions) outf << question_to_json(q).dump() << '\n';
    }
    if (!outf) throw std::runtime_error("write failed: " + path);
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open annotation file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw std::runtime_error("failed to parse " + path + ": " + e.what());
    }
    if (!root.is_object() || !root.contains("annotations") || !root["annotations"].is_array())
        throw std::runtime_error(path + ": expected top-level {\"annotations\": [...]}");

    std::vector<AnnotationRecord> out;
    const json& arr = root["annotations"];
    out.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& rec = arr[i];
        if (!rec.is_object() || !rec.contains("question_id") || !rec.contains("answer_type") ||
            !rec.contains("answers") || !rec["answers"].is_array()) {
            throw std::runtime_error(path + ": malformed annotation record at index " +
                                     std::to_string(i));
        }
        AnnotationRecord a;
        a.question_id = rec["question_id"].get<int64_t>();
        a.answer_type = answer_type_from_string(rec["answer_type"].get<std::string>());
        for (const json& ans : rec["answers"]) {
            if (!ans.is_object() || !ans.contains("answer") || !ans["answer"].is_string())
                throw std::runtime_error(path + ": malformed answer in record " +
                                         std::to_string(i));
            a.answers.push_back(ans["answer"].get<std::string>());
        }
        if (a.answers.size() != 10)
            throw std::runtime_error(path + ": record " + std::to_string(i) + " has " +
                                     std::to_string(a.answers.size()) +
                                     " answers, expected 10");
        out.push_back(std::move(a));
    }
    return out;
}

const Question* QuestionPool::find_by_normalized(const std::string& norm) const {
    auto it = index_.find(norm);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const Question* QuestionPool::find_by_id(int64_t question_id) const {
    auto it = by_id_.find(question_id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

QuestionPool build_pool(const std::vector<Question>& questions) {
    QuestionPool pool;
    for (const Question& q : questions) {
        std::string norm = normalize_text(q.text);
        auto [it, inserted] = pool.index_.emplace(std::move(norm), pool.entries_.size());
        if (!inserted) {
            ++pool.dropped_;
            continue;
        }
        pool.normalized_.push_back(it->first);
        pool.by_id_.emplace(q.question_id, pool.entries_.size());
        pool.entries_.push_back(q);
    }
    return pool;
}

std::vector<Question> filter_by_answer_type(const std::vector<Question>& questions,
                                            const std::vector<AnnotationRecord>& annotations,
                                            AnswerType wanted) {
    std::unordered_map<int64_t, AnswerType> types;
    types.reserve(annotations.size());
    for (const AnnotationRecord& a : annotations) types[a.question_id] = a.answer_type;
    std::vector<Question> out;
    for (const Question& q : questions) {
        auto it = types.find(q.question_id);
        if (it != types.end() && it->second == wanted) out.push_back(q);
    }
    return out;
}

}  // namespace vqanoise
