// Acceptance suite: one pass/fail line per criterion. The CLI binary path
// comes in as argv[1] for the end-to-end pipeline criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lasso_oracle.hpp"
#include "test_rng.hpp"
#include "vqanoise/bqd.hpp"
#include "vqanoise/corpus.hpp"
#include "vqanoise/embedding.hpp"
#include "vqanoise/evaluator.hpp"
#include "vqanoise/metrics.hpp"
#include "vqanoise/ranker.hpp"

namespace fs = std::filesystem;
using namespace vqanoise;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail = "") {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

template <typename Fn>
void run(int criterion, const std::string& what, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(criterion, false, what, std::string("exception: ") + e.what());
    }
}

// ---------------------------------------------------------------- criterion 1

void criterion_rscore_fixtures() {
    const RScoreParams params{5e-4, 0.2};
    // (Diff percentage, published R_score) pairs from the evaluation tables;
    // left column the general pool, right column the yes/no pool.
    const std::vector<std::pair<double, double>> fixtures = {
        {10.20, 0.30}, {9.13, 0.34}, {5.85, 0.48}, {6.59, 0.45}, {8.67, 0.36},
        {13.55, 0.19}, {10.13, 0.30}, {12.19, 0.23}, {5.99, 0.48}, {4.91, 0.53},
        {8.46, 0.37}, {17.11, 0.08}};
    int hits = 0;
    double worst = 0.0;
    for (const auto& [diff_pct, expected] : fixtures) {
        const double got = r_score(diff_pct / 100.0, params);
        const double err = std::abs(got - expected);
        worst = std::max(worst, err);
        if (err <= 0.005) ++hits;
    }
    std::ostringstream detail;
    detail << hits << "/12 within 0.005, worst |err| " << worst;
    report(1, hits == 12, "R_score fixture suite from the published tables", detail.str());
}

// ---------------------------------------------------------------- criterion 2

void criterion_rscore_boundaries() {
    const RScoreParams params{5e-4, 0.2};
    bool ok = r_score(params.t, params) == 1.0 && r_score(params.m, params) == 0.0;
    double prev = 2.0;
    for (int i = 0; i <= 10000; ++i) {
        const double v = r_score(static_cast<double>(i) / 10000.0, params);
        if (v > prev || v < 0.0 || v > 1.0) {
            ok = false;
            break;
        }
        prev = v;
    }
    ok = ok && r_score(0.0, params) == 1.0 && r_score(1.0, params) == 0.0;
    report(2, ok, "R_score boundary exactness and monotonicity on a 10^4 grid");
}

// ------------------------------------------------- random instance generation

DenseColumns<double> random_unit_columns(std::mt19937_64& rng, size_t d, size_t n) {
    DenseColumns<double> A;
    A.dim_ = d;
    A.data_.resize(d * n);
    for (size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const double v = testrng::normal(rng);
            A.data_[j * d + i] = v;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (size_t i = 0; i < d; ++i) A.data_[j * d + i] /= norm;
    }
    return A;
}

DenseColumns<double> orthonormal_columns(std::mt19937_64& rng, size_t d, size_t n) {
    auto A = random_unit_columns(rng, d, n);
    for (size_t j = 0; j < n; ++j) {
        double* col = A.data_.data() + j * d;
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t prev = 0; prev < j; ++prev) {
                const double* p = A.data_.data() + prev * d;
                double dot = 0.0;
                for (size_t i = 0; i < d; ++i) dot += col[i] * p[i];
                for (size_t i = 0; i < d; ++i) col[i] -= dot * p[i];
            }
        }
        double norm = 0.0;
        for (size_t i = 0; i < d; ++i) norm += col[i] * col[i];
        norm = std::sqrt(norm);
        for (size_t i = 0; i < d; ++i) col[i] /= norm;
    }
    return A;
}

std::vector<double> unit_vec(std::mt19937_64& rng, size_t d) {
    auto v = testrng::normal_vec(rng, d);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

// ---------------------------------------------------------------- criterion 3

void criterion_lasso_optimality() {
    std::mt19937_64 rng(91001);
    const std::vector<double> lambdas = {1e-6, 1e-3, 1e-1};
    int checked = 0;
    double worst_kkt = 0.0;
    bool descent_ok = true;
    for (int inst = 0; inst < 200; ++inst) {
        const size_t d = 4 + testrng::index(rng, 17);  // <= 20
        const size_t n = 2 + testrng::index(rng, 49);  // <= 50
        auto A = random_unit_columns(rng, d, n);
        auto b = unit_vec(rng, d);
        const double lambda = lambdas[inst % lambdas.size()];

        LassoConfig cfg;
        cfg.lambda = lambda;
        cfg.tol = 1e-10;
        cfg.max_iter = 20000;
        auto res = lasso_solve(A, b, cfg);
        for (size_t s = 1; s < res.objective.size(); ++s)
            if (res.objective[s] > res.objective[s - 1] + 1e-12) descent_ok = false;
        worst_kkt = std::max(worst_kkt, kkt_residual(A, b, res.x, lambda));
        ++checked;
    }
    std::ostringstream detail;
    detail << checked << " instances, worst KKT residual " << worst_kkt;
    report(3, worst_kkt < 1e-6 && descent_ok,
           "LASSO optimality: KKT < 1e-6, objective non-increasing per sweep", detail.str());
}

// ---------------------------------------------------------------- criterion 4

void criterion_lasso_oracle() {
    std::mt19937_64 rng(91002);
    double worst_gap = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const size_t d = 4 + testrng::index(rng, 17);
        const size_t n = 2 + testrng::index(rng, 11);  // <= 12
        auto A = random_unit_columns(rng, d, n);
        auto b = unit_vec(rng, d);
        const double lambda = (inst % 3 == 0) ? 1e-4 : (inst % 3 == 1) ? 1e-3 : 1e-2;

        LassoConfig cfg;
        cfg.lambda = lambda;
        cfg.tol = 1e-13;
        cfg.max_iter = 50000;
        auto res = lasso_solve(A, b, cfg);
        auto x_pg = oracle::solve_pg(A, b, lambda);
        const double obj_cd = oracle::lasso_objective(A, b, res.x, lambda);
        const double obj_pg = oracle::lasso_objective(A, b, x_pg, lambda);
        worst_gap = std::max(worst_gap, std::abs(obj_cd - obj_pg));
    }

    double worst_coef = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const size_t d = 6 + testrng::index(rng, 15);
        const size_t n = 2 + testrng::index(rng, d - 2);
        auto A = orthonormal_columns(rng, d, n);
        auto b = unit_vec(rng, d);
        const double lambda = (inst % 2 == 0) ? 1e-6 : 1e-2;
        LassoConfig cfg;
        cfg.lambda = lambda;
        cfg.tol = 1e-13;
        cfg.max_iter = 50000;
        auto res = lasso_solve(A, b, cfg);
        for (size_t j = 0; j < n; ++j) {
            const auto a = A.col(j);
            double dot = 0.0;
            for (size_t i = 0; i < d; ++i) dot += a[i] * b[i];
            worst_coef = std::max(worst_coef, std::abs(res.x[j] - soft_threshold(dot, lambda)));
        }
    }
    std::ostringstream detail;
    detail << "worst objective gap " << worst_gap << ", worst orthonormal coefficient error "
           << worst_coef;
    report(4, worst_gap <= 1e-8 && worst_coef <= 1e-9,
           "LASSO oracle equivalence and orthonormal closed form", detail.str());
}

// ---------------------------------------------------------------- criterion 5

void criterion_metric_identities() {
    std::vector<Question> pool_qs;
    const std::vector<std::string> texts = {"the cat sat on the mat", "the dog sat on the log",
                                            "a bird flew over the mat", "what color is the car",
                                            "how many people are here"};
    for (size_t i = 0; i < texts.size(); ++i) {
        Question q;
        q.question_id = static_cast<int64_t>(i + 1);
        q.text = texts[i];
        q.tokens = tokenize(q.text);
        pool_qs.push_back(q);
    }
    auto pool = build_pool(pool_qs);
    auto idf = build_idf(pool);

    bool ok = true;
    auto expect = [&](bool cond, const char* what) {
        if (!cond) {
            ok = false;
            std::cerr << "  identity failure: " << what << "\n";
        }
    };

    const TokenList same = tokenize("the cat sat on the mat");  // 6 tokens
    expect(bleu(same, same, 1) == 1.0, "bleu1 identity");
    expect(bleu(same, same, 2) == 1.0, "bleu2 identity");
    expect(bleu(same, same, 3) == 1.0, "bleu3 identity");
    expect(bleu(same, same, 4) == 1.0, "bleu4 identity");
    expect(rouge_l(same, same) == 1.0, "rouge identity");
    expect(std::abs(cider(same, same, idf) - 1.0) < 1e-12, "cider identity");
    const double m = static_cast<double>(same.size());
    expect(std::abs(meteor(same, same) - (1.0 - 0.5 / (m * m * m))) < 1e-12,
           "meteor identity 1 - 0.5/m^3");

    const TokenList left = tokenize("alpha beta gamma delta");
    const TokenList right = tokenize("epsilon zeta eta theta");
    for (int order = 1; order <= 4; ++order)
        expect(bleu(left, right, order) == 0.0, "bleu disjoint zero");
    expect(rouge_l(left, right) == 0.0, "rouge disjoint zero");
    expect(cider(left, right, idf) == 0.0, "cider disjoint zero");
    expect(meteor(left, right) == 0.0, "meteor disjoint zero");

    // hand-computed fixtures
    expect(std::abs(bleu({"the", "cat", "sat"}, {"the", "cat", "ran"}, 1) - 2.0 / 3.0) < 1e-15,
           "bleu1 2/3 fixture");
    expect(std::abs(bleu({"the", "the", "the"}, {"the", "cat"}, 1) - 1.0 / 3.0) < 1e-15,
           "bleu1 clipping fixture");
    expect(std::abs(rouge_l(tokenize("the cat sat on the mat"),
                            tokenize("the cat is on the mat")) -
                    5.0 / 6.0) < 1e-15,
           "rouge 5/6 fixture");
    expect(std::abs(meteor({"a", "b", "c"}, {"a", "b", "c"}) - (1.0 - 1.0 / 54.0)) < 1e-15,
           "meteor 1 - 1/54 fixture");
    expect(std::abs(meteor({"b", "a"}, {"a", "b"}) - 0.5) < 1e-15, "meteor chunk fixture");

    report(5, ok, "metric identities, disjoint zeros, hand fixtures");
}

// ---------------------------------------------------------------- criterion 7

void criterion_eq2_accuracy() {
    auto make_ann = [](int64_t qid, AnswerType type, int hits) {
        AnnotationRecord a;
        a.question_id = qid;
        a.answer_type = type;
        for (int i = 0; i < hits; ++i) a.answers.push_back("Hit");
        while (a.answers.size() < 10) a.answers.push_back("miss");
        return a;
    };
    // match counts 0, 1, 2, 3, 10 -> pair scores 0, 1/3, 2/3, 1, 1
    std::vector<AnnotationRecord> anns = {
        make_ann(1, AnswerType::other, 0),  make_ann(2, AnswerType::number, 1),
        make_ann(3, AnswerType::other, 2),  make_ann(4, AnswerType::yes_no, 3),
        make_ann(5, AnswerType::yes_no, 10)};
    PredictionSet preds;
    preds.label = "crafted";
    for (int64_t qid = 1; qid <= 5; ++qid) preds.records.emplace(qid, "hit");

    auto rep = vqa_accuracy(preds, anns);
    bool ok = rep.n == 5;
    ok = ok && std::abs(rep.other - (0.0 + 2.0 / 3.0) / 2.0) < 1e-15;
    ok = ok && std::abs(rep.number - 1.0 / 3.0) < 1e-15;
    ok = ok && std::abs(rep.yes_no - 1.0) < 1e-15;
    const double expected_all = (0.0 + 1.0 / 3.0 + 2.0 / 3.0 + 1.0 + 1.0) / 5.0;
    ok = ok && std::abs(rep.overall - expected_all) < 1e-15;
    const double weighted = (rep.other * 2 + rep.number * 1 + rep.yes_no * 2) / 5.0;
    ok = ok && std::abs(rep.overall - weighted) < 1e-12;
    std::ostringstream detail;
    detail << "All " << rep.overall << ", Y/N " << rep.yes_no << ", Num " << rep.number
           << ", Other " << rep.other;
    report(7, ok, "Eq. 2 accuracy on crafted match counts {0,1,2,3,10}", detail.str());
}

// ---------------------------------------------------------------- criterion 6

std::string q(const std::string& s) { return "\"" + s + "\""; }

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
    const std::string cmd = q(cli) + " " + args + " >> " + q(log.string()) + " 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_pipeline(const std::string& cli) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir =
        fs::temp_directory_path() / ("vqanoise_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "cli.log";

    // deterministic toy corpus: 500 pool questions, 50 queries, the first
    // five queries verbatim copies of pool questions (mask must kick in)
    std::mt19937_64 rng(424242);
    const std::vector<std::string> vocab = {
        "what",  "is",    "the",   "a",      "cat",   "dog",    "car",   "truck", "color",
        "old",   "how",   "many",  "on",     "mat",   "table",  "man",   "woman", "holding",
        "wearing", "red", "blue",  "green",  "where", "why",    "bird",  "plane", "sign",
        "street", "food", "plate", "window", "door",  "playing", "small", "large", "kind"};
    auto make_question = [&](int64_t qid, int64_t img) {
        Question question;
        question.question_id = qid;
        question.image_id = img;
        auto toks = testrng::sentence(rng, vocab, 4, 9);
        for (size_t i = 0; i < toks.size(); ++i) {
            if (i) question.text += ' ';
            question.text += toks[i];
        }
        question.text += '?';
        question.text[0] = static_cast<char>(std::toupper(question.text[0]));
        question.tokens = tokenize(question.text);
        return question;
    };

    std::vector<Question> pool_qs, query_qs;
    for (int i = 0; i < 500; ++i) pool_qs.push_back(make_question(1 + i, 100 + i % 37));
    for (int i = 0; i < 50; ++i) query_qs.push_back(make_question(10001 + i, 500 + i));
    for (int i = 0; i < 5; ++i) {
        query_qs[i].text = pool_qs[i].text;  // exact duplicates, distinct ids
        query_qs[i].tokens = pool_qs[i].tokens;
    }

    const fs::path pool_file = dir / "pool.json";
    const fs::path query_file = dir / "queries.json";
    save_questions(pool_file.string(), pool_qs, QuestionFormat::vqa_json);
    save_questions(query_file.string(), query_qs, QuestionFormat::vqa_json);

    auto must = [&](int rc, const std::string& what) {
        if (rc != 0)
            throw std::runtime_error(what + " failed (see " + log.string() + ")");
    };

    must(run_cli(cli, "embed --questions " + q(pool_file.string()) +
                          " --dim 64 --seed 7 --out " + q((dir / "pool.emb").string()),
                 log),
         "embed pool");
    must(run_cli(cli, "embed --questions " + q(query_file.string()) +
                          " --dim 64 --seed 7 --out " + q((dir / "q.emb").string()),
                 log),
         "embed queries");

    const std::string rank_common =
        "rank --queries " + q(query_file.string()) + " --pool " + q(pool_file.string()) +
        " --method lasso --embeddings " + q((dir / "pool.emb").string()) +
        " --query-embeddings " + q((dir / "q.emb").string()) +
        " --lambda 1e-6 --top-k 21 --out ";
    must(run_cli(cli, rank_common + q((dir / "bqd_t1.jsonl").string()) + " --threads 1", log),
         "rank t1");
    must(run_cli(cli, rank_common + q((dir / "bqd_t8.jsonl").string()) + " --threads 8", log),
         "rank t8");
    must(run_cli(cli, rank_common + q((dir / "bqd_t1b.jsonl").string()) + " --threads 1", log),
         "rank t1 again");

    bool ok = true;
    std::string why;
    const std::string bytes_t1 = slurp(dir / "bqd_t1.jsonl");
    if (bytes_t1 != slurp(dir / "bqd_t8.jsonl")) ok = false, why = "threads 1 vs 8 differ";
    if (ok && bytes_t1 != slurp(dir / "bqd_t1b.jsonl"))
        ok = false, why = "two identical invocations differ";
    if (ok && slurp(dir / "bqd_t1.jsonl.manifest.json") !=
                  slurp(dir / "bqd_t8.jsonl.manifest.json"))
        ok = false, why = "manifests differ across thread counts";

    auto instances = read_bqd((dir / "bqd_t1.jsonl").string());
    if (ok && instances.size() != 50)
        ok = false, why = "expected 50 instances, got " + std::to_string(instances.size());
    if (ok) {
        auto pool = build_pool(pool_qs);
        for (const auto& inst : instances) {
            if (inst.ranked.size() != 21) {
                ok = false;
                why = "instance without 21 entries";
                break;
            }
            for (size_t i = 1; i < inst.ranked.size(); ++i)
                if (inst.ranked[i].score > inst.ranked[i - 1].score) {
                    ok = false;
                    why = "scores not non-increasing";
                    break;
                }
            // the duplicate of the query never appears among its noise;
            // distinct pool entries have distinct normalized texts, so
            // disjointness shows up as insert success
            const std::string norm = normalize_text(inst.mq.text);
            std::set<std::string> seen;
            for (int p = 1; p <= 7; ++p) {
                auto part = partition(inst, p);
                if (part.bq_texts.size() != 3) {
                    ok = false;
                    why = "partition without 3 entries";
                    break;
                }
                for (size_t i = 0; i < 3; ++i) {
                    const std::string& text = part.bq_texts[i];
                    if (text != inst.ranked[3 * (p - 1) + i].text) {
                        ok = false;
                        why = "partition entries are not the consecutive triple";
                    }
                    if (!seen.insert(normalize_text(text)).second) {
                        ok = false;
                        why = "partition entries overlap";
                    }
                    if (normalize_text(text) == norm) {
                        ok = false;
                        why = "query duplicate leaked into its own noise";
                    }
                }
                if (!ok) break;
            }
            if (ok && seen.size() != kBqdEntries) {
                ok = false;
                why = "partitions do not cover the 21 entries";
            }
            if (!ok) break;
        }
    }

    if (ok) {
        for (int p = 0; p <= 7 && ok; ++p) {
            const fs::path out = dir / ("noisy_" + std::to_string(p) + ".json");
            must(run_cli(cli,
                         "perturb --bqd " + q((dir / "bqd_t1.jsonl").string()) +
                             " --partition " + std::to_string(p) + " --out " + q(out.string()),
                         log),
                 "perturb");
        }
        auto clean = load_questions((dir / "noisy_0.json").string(), QuestionFormat::vqa_json);
        if (clean.size() != query_qs.size()) ok = false, why = "partition 0 record count";
        for (size_t i = 0; ok && i < clean.size(); ++i) {
            if (clean[i].text != query_qs[i].text || clean[i].question_id != query_qs[i].question_id)
                ok = false, why = "partition 0 is not the identity";
        }
        if (ok) {
            auto noisy1 = load_questions((dir / "noisy_1.json").string(), QuestionFormat::vqa_json);
            for (size_t i = 0; ok && i < noisy1.size(); ++i) {
                if (noisy1[i].text.rfind(query_qs[i].text, 0) != 0 ||
                    noisy1[i].text.size() <= query_qs[i].text.size())
                    ok = false, why = "partition 1 does not append noise after the query";
            }
        }
        // perturb re-run reproducibility
        if (ok) {
            const fs::path again = dir / "noisy_3_again.json";
            must(run_cli(cli,
                         "perturb --bqd " + q((dir / "bqd_t1.jsonl").string()) +
                             " --partition 3 --out " + q(again.string()),
                         log),
                 "perturb rerun");
            if (slurp(dir / "noisy_3.json") != slurp(again))
                ok = false, why = "perturb rerun differs";
        }
    }

    // usage errors surface as exit code 2
    if (ok) {
        const int rc = run_cli(cli,
                               "perturb --bqd " + q((dir / "bqd_t1.jsonl").string()) +
                                   " --partition 9 --out " + q((dir / "x.json").string()),
                               log);
        if (WIFEXITED(rc) ? WEXITSTATUS(rc) != 2 : true)
            ok = false, why = "--partition 9 should exit with usage error 2";
    }
    if (ok) {
        const int rc = run_cli(cli,
                               "rank --queries " + q(query_file.string()) + " --pool " +
                                   q(pool_file.string()) + " --method lasso --out " +
                                   q((dir / "y.jsonl").string()),
                               log);
        if (WIFEXITED(rc) ? WEXITSTATUS(rc) != 2 : true)
            ok = false, why = "lasso without --embeddings should exit with usage error 2";
    }

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    std::ostringstream detail;
    detail << "50 queries x 500-question pool, " << elapsed << " ms";
    if (!ok) detail << "; " << why;
    report(6, ok, "end-to-end pipeline, bit-reproducible across runs and thread counts",
           detail.str());
    if (ok) fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
    std::cout << "acceptance suite\n";

    run(1, "R_score fixtures", criterion_rscore_fixtures);
    run(2, "R_score boundaries", criterion_rscore_boundaries);
    run(3, "LASSO optimality", criterion_lasso_optimality);
    run(4, "LASSO oracle equivalence", criterion_lasso_oracle);
    run(5, "metric identities", criterion_metric_identities);
    if (argc > 1) {
        const std::string cli = argv[1];
        run(6, "pipeline", [&] { criterion_pipeline(cli); });
    } else {
        report(6, false, "end-to-end pipeline", "CLI binary path missing (argv[1])");
    }
    run(7, "Eq. 2 accuracy", criterion_eq2_accuracy);
    std::cout << "[NOTE] criterion 8: absolute accuracies of the six external VQA models and "
                 "their per-partition curves are not reproducible at desk scale; prediction "
                 "and embedding files are consumed as inputs (see README), and criteria 1-7 "
                 "cover the arithmetic and pipeline instead.\n";

    if (g_failures == 0) {
        std::cout << "acceptance: all criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << g_failures << " criterion(s) failed\n";
    return 1;
}
