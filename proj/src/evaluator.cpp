#include "vqanoise/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vqanoise {

using nlohmann::json;

PredictionSet load_predictions(const std::string& path, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prediction file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw std::runtime_error("failed to parse " + path + ": " + e.what());
    }
    if (!root.is_array())
        throw std::runtime_error(path + ": expected a JSON array of predictions");

    PredictionSet out;
    out.label = label;
    out.records.reserve(root.size());
    for (size_t i = 0; i < root.size(); ++i) {
        const json& rec = root[i];
        if (!rec.is_object() || !rec.contains("question_id") || !rec.contains("answer") ||
            !rec["answer"].is_string())
            throw std::runtime_error(path + ": malformed prediction at index " +
                                     std::to_string(i));
        const int64_t qid = rec["question_id"].get<int64_t>();
        auto [_, inserted] = out.records.emplace(qid, rec["answer"].get<std::string>());
        if (!inserted)
            throw std::runtime_error(path + ": duplicate prediction for question_id " +
                                     std::to_string(qid));
    }
    return out;
}

AccuracyReport vqa_accuracy(const PredictionSet& preds,
                            const std::vector<AnnotationRecord>& annotations) {
    std::unordered_map<int64_t, const AnnotationRecord*> by_id;
    by_id.reserve(annotations.size());
    for (const AnnotationRecord& a : annotations) by_id.emplace(a.question_id, &a);

    std::vector<int64_t> missing;
    for (const auto& [qid, _] : preds.records)
        if (!by_id.count(qid)) missing.push_back(qid);
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        std::string ids;
        for (size_t i = 0; i < missing.size() && i < 10; ++i)
            ids += (i ? ", " : "") + std::to_string(missing[i]);
        if (missing.size() > 10) ids += ", ...";
        throw std::runtime_error("predictions without annotations (" +
                                 std::to_string(missing.size()) + " ids): " + ids);
    }

    AccuracyReport rep;
    double sum = 0.0, sum_yn = 0.0, sum_num = 0.0, sum_other = 0.0;
    // Annotation order fixes the summation order, keeping totals independent
    // of prediction-map iteration order.
    for (const AnnotationRecord& a : annotations) {
        auto it = preds.records.find(a.question_id);
        if (it == preds.records.end()) {
            ++rep.skipped_annotations;
            continue;
        }
        const std::string pred = normalize_answer(it->second);
        int matches = 0;
        for (const std::string& t : a.answers)
            if (normalize_answer(t) == pred) ++matches;
        const double score = std::min(static_cast<double>(matches) / 3.0, 1.0);
        sum += score;
        ++rep.n;
        switch (a.answer_type) {
            case AnswerType::yes_no: sum_yn += score, ++rep.n_yes_no; break;
            case AnswerType::number: sum_num += score, ++rep.n_number; break;
            case AnswerType::other: sum_other += score, ++rep.n_other; break;
        }
    }
    if (rep.n > 0) rep.overall = sum / static_cast<double>(rep.n);
    if (rep.n_yes_no > 0) rep.yes_no = sum_yn / static_cast<double>(rep.n_yes_no);
    if (rep.n_number > 0) rep.number = sum_num / static_cast<double>(rep.n_number);
    if (rep.n_other > 0) rep.other = sum_other / static_cast<double>(rep.n_other);
    return rep;
}

double acc_diff(const AccuracyReport& base, const AccuracyReport& noisy) {
    return std::abs(base.overall - noisy.overall);
}

double r_score(double acc_diff, const RScoreParams& params) {
    if (!(params.t >= 0.0 && params.t < params.m && params.m <= 1.0))
        throw std::runtime_error("r_score: parameters must satisfy 0 <= t < m <= 1");
    if (!(acc_diff >= 0.0 && acc_diff <= 1.0))
        throw std::runtime_error("r_score: acc_diff must lie in [0,1]");
    const double raw = (std::sqrt(params.m) - std::sqrt(acc_diff)) /
                       (std::sqrt(params.m) - std::sqrt(params.t));
    return std::max(0.0, std::min(1.0, raw));
}

RobustnessReport robustness_report(const PredictionSet& baseline,
                                   const std::vector<PredictionSet>& noisy,
                                   const std::vector<AnnotationRecord>& annotations,
                                   const RScoreParams& params) {
    if (noisy.empty()) throw std::runtime_error("robustness_report: no noisy prediction sets");
    for (const PredictionSet& p : noisy) {
        if (p.records.size() != baseline.records.size())
            throw std::runtime_error("prediction set \"" + p.label + "\" covers " +
                                     std::to_string(p.records.size()) + " ids, baseline covers " +
                                     std::to_string(baseline.records.size()));
        for (const auto& [qid, _] : baseline.records)
            if (!p.records.count(qid))
                throw std::runtime_error("prediction set \"" + p.label +
                                         "\" is missing question_id " + std::to_string(qid));
    }

    RobustnessReport rep;
    rep.params = params;
    rep.baseline.label = baseline.label;
    rep.baseline.accuracy = vqa_accuracy(baseline, annotations);
    for (const PredictionSet& p : noisy) {
        ReportRow row;
        row.label = p.label;
        row.accuracy = vqa_accuracy(p, annotations);
        row.diff = acc_diff(rep.baseline.accuracy, row.accuracy);
        rep.rows.push_back(std::move(row));
    }
    // Convention: the headline robustness number comes from the first noisy
    // set, the one closest in similarity to the clean questions.
    rep.r_score = r_score(rep.rows.front().diff, params);
    return rep;
}

std::string robustness_report_json(const RobustnessReport& report) {
    auto row_json = [](const ReportRow& row, bool with_diff) {
        json j{{"label", row.label},
               {"other", row.accuracy.other},
               {"num", row.accuracy.number},
               {"yesno", row.accuracy.yes_no},
               {"all", row.accuracy.overall}};
        if (with_diff) j["diff"] = row.diff;
        return j;
    };
    json rows = json::array();
    for (const ReportRow& row : report.rows) rows.push_back(row_json(row, true));
    json j{{"r_score", report.r_score},
           {"params", {{"t", report.params.t}, {"m", report.params.m}}},
           {"baseline", row_json(report.baseline, false)},
           {"rows", std::move(rows)}};
    return j.dump(2) + "\n";
}

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

}  // namespace

std::string render_table(const RobustnessReport& report) {
    size_t label_w = report.baseline.label.size();
    for (const ReportRow& row : report.rows) label_w = std::max(label_w, row.label.size());
    char head[64];
    std::snprintf(head, sizeof(head), "R_score = %.2f", report.r_score);
    label_w = std::max(label_w, std::string(head).size());

    std::ostringstream os;
    auto pad = [&](const std::string& s, size_t w) {
        os << s;
        for (size_t i = s.size(); i < w; ++i) os << ' ';
    };
    auto cell = [&](const std::string& s) {
        os << "  ";
        for (size_t i = s.size(); i < 6; ++i) os << ' ';
        os << s;
    };
    pad(head, label_w);
    for (const char* c : {"Other", "Num", "Y/N", "All", "Diff"}) cell(c);
    os << '\n';
    auto line = [&](const ReportRow& row, bool with_diff) {
        pad(row.label, label_w);
        cell(pct(row.accuracy.other));
        cell(pct(row.accuracy.number));
        cell(pct(row.accuracy.yes_no));
        cell(pct(row.accuracy.overall));
        cell(with_diff ? pct(row.diff) : std::string("-"));
        os << '\n';
    };
    for (const ReportRow& row : report.rows) line(row, true);
    line(report.baseline, false);
    return os.str();
}

}  // namespace vqanoise
