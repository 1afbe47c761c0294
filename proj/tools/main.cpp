// Command-line front end over the library: embed questions with the hashed
// fallback encoder, rank pool questions per main question into a BQD file,
// emit noisy question files per partition, and score accuracy / robustness
// from prediction files.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "vqanoise/bqd.hpp"
#include "vqanoise/corpus.hpp"
#include "vqanoise/embedding.hpp"
#include "vqanoise/evaluator.hpp"
#include "vqanoise/manifest.hpp"
#include "vqanoise/metrics.hpp"
#include "vqanoise/parallel.hpp"
#include "vqanoise/ranker.hpp"

#include <json.hpp>

namespace {

using namespace vqanoise;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

QuestionFormat parse_format(const std::string& s) {
    if (s == "vqa-json") return QuestionFormat::vqa_json;
    if (s == "jsonl") return QuestionFormat::jsonl;
    throw UsageError("unknown question format: " + s);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct EmbedArgs {
    std::string questions;
    std::string format = "vqa-json";
    size_t dim = 256;
    uint64_t seed = 0;
    std::string out;
};

int cmd_embed(const EmbedArgs& args) {
    auto questions = load_questions(args.questions, parse_format(args.format));
    if (questions.empty()) throw std::runtime_error("no questions in " + args.questions);

    std::vector<float> data;
    data.reserve(questions.size() * args.dim);
    std::vector<int64_t> ids;
    ids.reserve(questions.size());
    for (const Question& q : questions) {
        if (q.tokens.empty())
            throw std::runtime_error("question " + std::to_string(q.question_id) +
                                     " has no tokens to encode");
        QueryVector v = hashed_ngram_embed(q.tokens, args.dim, args.seed);
        for (double x : v.values) data.push_back(static_cast<float>(x));
        ids.push_back(q.question_id);
    }
    EmbeddingMatrix m(static_cast<uint32_t>(args.dim), std::move(data), std::move(ids));
    save_embeddings(args.out, m);

    RunManifest manifest;
    manifest.command = "embed";
    manifest.parameters = {{"format", args.format},
                           {"dim", std::to_string(args.dim)},
                           {"seed", std::to_string(args.seed)}};
    manifest.input_digests[args.questions] = sha256_file(args.questions);
    write_manifest(args.out, manifest);
    std::cerr << "embedded " << m.num_cols() << " questions (dim " << args.dim << ") -> "
              << args.out << "\n";
    return kExitOk;
}

struct RankArgs {
    std::string queries;
    std::vector<std::string> pool_files;
    std::string format = "vqa-json";
    std::string method = "lasso";
    std::string embeddings;
    std::string query_embeddings;
    std::string pool_annotations;
    std::string pool_answer_type;
    double lambda = 1e-6;
    double tol = 1e-7;
    int max_iter = 1000;
    size_t top_k = kBqdEntries;
    unsigned threads = 1;
    std::string out;
};

int cmd_rank(const RankArgs& args) {
    const RankMethod method = rank_method_from_string(args.method);
    if (method == RankMethod::lasso && args.embeddings.empty())
        throw UsageError("--method lasso requires --embeddings");
    if (!args.pool_answer_type.empty() && args.pool_annotations.empty())
        throw UsageError("--pool-answer-type requires --pool-annotations");
    if (args.top_k < 1) throw UsageError("--top-k must be >= 1");

    const QuestionFormat format = parse_format(args.format);
    auto queries = load_questions(args.queries, format);

    std::vector<Question> pool_questions;
    for (const std::string& path : args.pool_files) {
        auto qs = load_questions(path, format);
        pool_questions.insert(pool_questions.end(), qs.begin(), qs.end());
    }
    if (!args.pool_answer_type.empty()) {
        auto anns = load_annotations(args.pool_annotations);
        pool_questions = filter_by_answer_type(pool_questions, anns,
                                               answer_type_from_string(args.pool_answer_type));
    }
    QuestionPool pool = build_pool(pool_questions);
    std::cerr << "pool: " << pool.size() << " unique questions ("
              << pool.dropped_duplicates() << " duplicates dropped)\n";

    RankingFn ranking_fn;
    EmbeddingMatrix dictionary;
    std::vector<QueryVector> query_vectors;
    std::unordered_map<int64_t, size_t> query_index;
    IdfTable idf;

    if (method == RankMethod::lasso) {
        auto all = load_embeddings(args.embeddings);
        std::vector<int64_t> pool_ids;
        pool_ids.reserve(pool.size());
        for (const Question& q : pool.entries()) pool_ids.push_back(q.question_id);
        dictionary = all.select(pool_ids);

        const EmbeddingMatrix* query_source = &all;
        EmbeddingMatrix separate;
        if (!args.query_embeddings.empty()) {
            separate = load_embeddings(args.query_embeddings);
            query_source = &separate;
        }
        query_vectors.reserve(queries.size());
        for (size_t i = 0; i < queries.size(); ++i) {
            auto k = query_source->find(queries[i].question_id);
            if (!k)
                throw std::runtime_error("no embedding for query question_id " +
                                         std::to_string(queries[i].question_id));
            query_vectors.push_back(query_source->column_as_query(*k));
            query_index.emplace(queries[i].question_id, i);
        }

        LassoConfig cfg{args.lambda, args.tol, args.max_iter};
        ranking_fn = [&dictionary, &pool, &query_vectors, &query_index, cfg,
                      k = args.top_k](const Question& mq) {
            return rank_sparse(dictionary, pool, mq, query_vectors[query_index.at(mq.question_id)],
                               k, cfg);
        };
    } else {
        const Metric metric = metric_from_string(args.method);
        if (metric_needs_idf(metric)) idf = build_idf(pool);
        ranking_fn = [&pool, metric, k = args.top_k, &idf](const Question& mq) {
            return rank_direct(mq, pool, metric, k,
                               metric_needs_idf(metric) ? &idf : nullptr);
        };
    }

    auto instances = build_bqd(queries, pool, ranking_fn, args.top_k, args.threads);
    write_bqd(args.out, instances);

    RunManifest manifest;
    manifest.command = "rank";
    manifest.parameters = {{"format", args.format},
                           {"method", args.method},
                           {"top_k", std::to_string(args.top_k)}};
    if (method == RankMethod::lasso) {
        manifest.parameters["lambda"] = fmt_double(args.lambda);
        manifest.parameters["tol"] = fmt_double(args.tol);
        manifest.parameters["max_iter"] = std::to_string(args.max_iter);
    }
    if (!args.pool_answer_type.empty())
        manifest.parameters["pool_answer_type"] = args.pool_answer_type;
    manifest.input_digests[args.queries] = sha256_file(args.queries);
    for (const std::string& path : args.pool_files)
        manifest.input_digests[path] = sha256_file(path);
    if (!args.embeddings.empty())
        manifest.input_digests[args.embeddings] = sha256_file(args.embeddings);
    if (!args.query_embeddings.empty())
        manifest.input_digests[args.query_embeddings] = sha256_file(args.query_embeddings);
    if (!args.pool_annotations.empty())
        manifest.input_digests[args.pool_annotations] = sha256_file(args.pool_annotations);
    write_manifest(args.out, manifest);
    std::cerr << "wrote " << instances.size() << " bqd instances -> " << args.out << "\n";
    return kExitOk;
}

struct PerturbArgs {
    std::string bqd;
    int partition = 1;
    std::string out;
};

int cmd_perturb(const PerturbArgs& args) {
    auto instances = read_bqd(args.bqd);
    auto noisy = make_noisy_set(instances, args.partition);
    write_noisy_questions(args.out, noisy);

    RunManifest manifest;
    manifest.command = "perturb";
    manifest.parameters = {{"partition", std::to_string(args.partition)}};
    manifest.input_digests[args.bqd] = sha256_file(args.bqd);
    write_manifest(args.out, manifest);
    std::cerr << "wrote partition " << args.partition << " noisy questions ("
              << noisy.records.size() << ") -> " << args.out << "\n";
    return kExitOk;
}

struct AccuracyArgs {
    std::string predictions;
    std::string annotations;
    std::string label = "predictions";
    std::string out;
};

int cmd_accuracy(const AccuracyArgs& args) {
    auto preds = load_predictions(args.predictions, args.label);
    auto anns = load_annotations(args.annotations);
    auto rep = vqa_accuracy(preds, anns);

    nlohmann::json j{{"label", args.label},
                     {"n", rep.n},
                     {"overall", rep.overall},
                     {"yes_no", rep.yes_no},
                     {"number", rep.number},
                     {"other", rep.other},
                     {"counts",
                      {{"yes_no", rep.n_yes_no},
                       {"number", rep.n_number},
                       {"other", rep.n_other}}},
                     {"skipped_annotations", rep.skipped_annotations}};
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + args.out);
    out << j.dump(2) << "\n";
    out.close();

    RunManifest manifest;
    manifest.command = "accuracy";
    manifest.parameters = {{"label", args.label}};
    manifest.input_digests[args.predictions] = sha256_file(args.predictions);
    manifest.input_digests[args.annotations] = sha256_file(args.annotations);
    write_manifest(args.out, manifest);
    std::cerr << "accuracy " << rep.overall << " over " << rep.n << " pairs -> " << args.out
              << "\n";
    return kExitOk;
}

struct RscoreArgs {
    std::string baseline;
    std::vector<std::string> noisy;
    std::string annotations;
    double t = 5e-4;
    double m = 0.2;
    bool table = false;
    std::string out;
};

int cmd_rscore(const RscoreArgs& args) {
    if (!(args.t >= 0.0 && args.t < args.m && args.m <= 1.0))
        throw UsageError("--t and --m must satisfy 0 <= t < m <= 1");

    auto base = load_predictions(args.baseline, "partition 0");
    std::vector<PredictionSet> noisy;
    for (size_t i = 0; i < args.noisy.size(); ++i)
        noisy.push_back(load_predictions(args.noisy[i], "partition " + std::to_string(i + 1)));
    auto anns = load_annotations(args.annotations);

    RScoreParams params{args.t, args.m};
    auto rep = robustness_report(base, noisy, anns, params);

    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + args.out);
    out << robustness_report_json(rep);
    out.close();
    if (args.table) std::cout << render_table(rep);

    RunManifest manifest;
    manifest.command = "rscore";
    manifest.parameters = {{"t", fmt_double(args.t)}, {"m", fmt_double(args.m)}};
    manifest.input_digests[args.baseline] = sha256_file(args.baseline);
    for (const std::string& path : args.noisy)
        manifest.input_digests[path] = sha256_file(path);
    manifest.input_digests[args.annotations] = sha256_file(args.annotations);
    write_manifest(args.out, manifest);
    std::cerr << "r_score " << rep.r_score << " -> " << args.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"basic-question noise toolkit for VQA robustness evaluation"};
    app.require_subcommand(1);

    EmbedArgs embed_args;
    auto* embed = app.add_subcommand(
        "embed", "encode questions with the seeded hashed n-gram encoder");
    embed->add_option("--questions", embed_args.questions, "question file")->required();
    embed->add_option("--format", embed_args.format, "vqa-json or jsonl");
    embed->add_option("--dim", embed_args.dim, "embedding dimension")
        ->check(CLI::Range(size_t{2}, size_t{1} << 20));
    embed->add_option("--seed", embed_args.seed, "hash seed");
    embed->add_option("--out", embed_args.out, "output EMB1 file")->required();

    RankArgs rank_args;
    auto* rank = app.add_subcommand("rank", "rank pool questions per query into a BQD file");
    rank->add_option("--queries", rank_args.queries, "main question file")->required();
    rank->add_option("--pool", rank_args.pool_files, "pool question file (repeatable)")
        ->required();
    rank->add_option("--format", rank_args.format, "vqa-json or jsonl");
    rank->add_option("--method", rank_args.method,
                     "lasso|bleu1|bleu2|bleu3|bleu4|rouge|cider|meteor");
    rank->add_option("--embeddings", rank_args.embeddings, "EMB1 file covering the pool");
    rank->add_option("--query-embeddings", rank_args.query_embeddings,
                     "EMB1 file for queries (defaults to --embeddings)");
    rank->add_option("--pool-annotations", rank_args.pool_annotations,
                     "annotation file for pool filtering");
    rank->add_option("--pool-answer-type", rank_args.pool_answer_type,
                     "keep only pool questions with this answer type (yes/no|number|other)");
    rank->add_option("--lambda", rank_args.lambda, "l1 weight");
    rank->add_option("--tol", rank_args.tol, "solver tolerance");
    rank->add_option("--max-iter", rank_args.max_iter, "solver sweep cap");
    rank->add_option("--top-k", rank_args.top_k, "entries per instance");
    rank->add_option("--threads", rank_args.threads, "worker threads")
        ->check(CLI::Range(1u, 256u));
    rank->add_option("--out", rank_args.out, "output BQD jsonl file")->required();

    PerturbArgs perturb_args;
    auto* perturb = app.add_subcommand("perturb", "write noisy questions for one partition");
    perturb->add_option("--bqd", perturb_args.bqd, "BQD jsonl file")->required();
    perturb->add_option("--partition", perturb_args.partition, "0..7")
        ->required()
        ->check(CLI::Range(0, 7));
    perturb->add_option("--out", perturb_args.out, "output question file")->required();

    AccuracyArgs accuracy_args;
    auto* accuracy = app.add_subcommand("accuracy", "score a prediction file");
    accuracy->add_option("--predictions", accuracy_args.predictions, "prediction file")
        ->required();
    accuracy->add_option("--annotations", accuracy_args.annotations, "annotation file")
        ->required();
    accuracy->add_option("--label", accuracy_args.label, "report label");
    accuracy->add_option("--out", accuracy_args.out, "output report json")->required();

    RscoreArgs rscore_args;
    auto* rscore = app.add_subcommand("rscore", "robustness report from prediction files");
    rscore->add_option("--baseline", rscore_args.baseline, "clean prediction file")
        ->required();
    rscore->add_option("--noisy", rscore_args.noisy,
                       "noisy prediction file, partition order (repeatable)")
        ->required();
    rscore->add_option("--annotations", rscore_args.annotations, "annotation file")
        ->required();
    rscore->add_option("--t", rscore_args.t, "tolerance");
    rscore->add_option("--m", rscore_args.m, "maximum robustness limit");
    rscore->add_flag("--table", rscore_args.table, "print the aligned text table to stdout");
    rscore->add_option("--out", rscore_args.out, "output report json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    try {
        if (embed->parsed()) return cmd_embed(embed_args);
        if (rank->parsed()) return cmd_rank(rank_args);
        if (perturb->parsed()) return cmd_perturb(perturb_args);
        if (accuracy->parsed()) return cmd_accuracy(accuracy_args);
        if (rscore->parsed()) return cmd_rscore(rscore_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitUsageError;
}
