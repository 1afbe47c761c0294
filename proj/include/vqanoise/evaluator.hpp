#pragma once

// Accuracy scoring of prediction files against 10-annotator answer sets,
// accuracy deterioration under noise, and the robustness score derived
// from it.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vqanoise/corpus.hpp"

namespace vqanoise {

struct PredictionSet {
    std::string label;
    std::unordered_map<int64_t, std::string> records;  // question_id -> predicted answer
};

struct AccuracyReport {
    double overall = 0.0;  // fraction in [0,1]
    double yes_no = 0.0;
    double number = 0.0;
    double other = 0.0;
    size_t n = 0;  // scored pairs
    size_t n_yes_no = 0;
    size_t n_number = 0;
    size_t n_other = 0;
    size_t skipped_annotations = 0;  // annotations without a prediction
};

struct RScoreParams {
    double t = 5e-4;  // tolerance: deterioration below it costs nothing
    double m = 0.2;   // maximum limit: deterioration above it scores zero
};

struct ReportRow {
    std::string label;
    AccuracyReport accuracy;
    double diff = 0.0;  // |baseline - this row|, as a fraction
};

struct RobustnessReport {
    RScoreParams params;
    double r_score = 0.0;  // computed from the first noisy set
    ReportRow baseline;    // diff unused
    std::vector<ReportRow> rows;
};

// Predictions are a JSON array of {"question_id", "answer"}.
PredictionSet load_predictions(const std::string& path, const std::string& label);

// Per-pair score min(matching annotators / 3, 1) with answers compared
// after normalize_answer on both sides. Every prediction must have an
// annotation; annotations without predictions are skipped and counted.
AccuracyReport vqa_accuracy(const PredictionSet& preds,
                            const std::vector<AnnotationRecord>& annotations);

double acc_diff(const AccuracyReport& base, const AccuracyReport& noisy);

// clamp_0^1((sqrt(m) - sqrt(acc_diff)) / (sqrt(m) - sqrt(t))). Exactly 1 at
// acc_diff <= t and exactly 0 at acc_diff >= m.
double r_score(double acc_diff, const RScoreParams& params);

RobustnessReport robustness_report(const PredictionSet& baseline,
                                   const std::vector<PredictionSet>& noisy,
                                   const std::vector<AnnotationRecord>& annotations,
                                   const RScoreParams& params);

std::string robustness_report_json(const RobustnessReport& report);

// Aligned-column text rendering with percentages, two decimals.
std::string render_table(const RobustnessReport& report);

}  // namespace vqanoise
