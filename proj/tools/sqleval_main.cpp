// sqleval: text-to-SQL benchmark toolkit. Subcommands cover dataset
// generation, difficulty classification, diversity analytics, provider
// evaluation, report rendering and dataset validation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqleval/config.hpp"
#include "sqleval/datagen.hpp"
#include "sqleval/dataset.hpp"
#include "sqleval/difficulty.hpp"
#include "sqleval/diversity.hpp"
#include "sqleval/embedding.hpp"
#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"
#include "sqleval/harness.hpp"
#include "sqleval/log.hpp"
#include "sqleval/metrics.hpp"
#include "sqleval/schema.hpp"

namespace fs = std::filesystem;
using namespace sqleval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kExitProvider = 3;

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    return out;
}

// Lines may be full dataset records or bare {"sql": ...} objects.
std::vector<std::string> read_sql_corpus(const fs::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    std::vector<std::string> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) raise(Errc::corrupt_dataset, "invalid JSON line in " + path.string());
        if (j.contains("sql_query")) corpus.push_back(j["sql_query"].get<std::string>());
        else if (j.contains("sql")) corpus.push_back(j["sql"].get<std::string>());
        else raise(Errc::corrupt_dataset, "line has neither sql_query nor sql: " + line);
    }
    if (corpus.empty()) raise(Errc::usage, "no SQL statements in " + path.string());
    return corpus;
}

int cmd_generate(const std::string& config_path, std::optional<uint64_t> seed,
                 const std::string& out_override) {
    AppConfig cfg = load_app_config(config_path);
    if (cfg.generation_provider.base_url.empty())
        raise(Errc::config, "config has no generation_provider");
    if (seed) cfg.datagen.seed = *seed;
    const fs::path out_dir = out_override.empty() ? cfg.output_dir : fs::path(out_override);

    Database db = Database::open_read_only(cfg.database);
    SchemaDoc schema = load_schema_doc(db, cfg.schema_descriptions);
    ChatClient gateway(cfg.generation_provider);

    DatagenResult result = run_datagen(db, gateway, schema, cfg.datagen, cfg.limits);
    write_datagen_output(out_dir, result, cfg.datagen);

    std::cout << "generated " << result.stats.generated << "/" << cfg.datagen.target_size << " records in "
              << result.stats.calls << " calls (stage1 drops " << result.stats.dropped_stage1
              << ", stage2 drops " << result.stats.dropped_stage2 << ", insufficient "
              << result.stats.dropped_insufficient << ", duplicates " << result.stats.dropped_duplicate
              << ")\n";
    std::cout << "wrote " << (out_dir / "dataset.jsonl").string() << "\n";
    if (!result.stats.reached_target) {
        log_warn("call budget exhausted before reaching target size");
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_classify(const std::string& in_path, const std::string& out_path, bool count_occurrences) {
    const auto mode = count_occurrences ? KeywordCountMode::occurrence : KeywordCountMode::presence;
    const std::vector<std::string> corpus = read_sql_corpus(in_path);

    std::map<DifficultyLabel, size_t> distribution;
    std::vector<std::string> labeled_lines;
    for (const auto& sql : corpus) {
        const DifficultyLabel label = classify_sql(sql, mode);
        ++distribution[label];
        labeled_lines.push_back(Json{{"sql", sql}, {"difficulty", difficulty_name(label)}}.dump());
    }
    if (!out_path.empty()) write_lines_atomic(out_path, labeled_lines);

    std::cout << "difficulty distribution over " << corpus.size() << " queries:\n";
    for (auto label : {DifficultyLabel::easy, DifficultyLabel::medium, DifficultyLabel::hard,
                       DifficultyLabel::extra}) {
        const size_t n = distribution.count(label) ? distribution[label] : 0;
        std::printf("  %-8s %6zu  %6.2f%%\n", difficulty_name(label), n,
                    100.0 * static_cast<double>(n) / static_cast<double>(corpus.size()));
    }

    const SyntaxUsageStats stats = syntax_usage(corpus);
    std::cout << "syntax usage:\n";
    for (const auto& c : stats.constructs)
        std::printf("  %-10s %6zu  %6.2f%%\n", c.construct.c_str(), c.count, c.percentage);
    return kExitOk;
}

int cmd_diversity(const std::string& in_path, const std::string& config_path, uint64_t seed) {
    EmbeddingConfig embed_cfg;
    if (!config_path.empty()) embed_cfg = load_app_config(config_path).embedding;
    embed_cfg.fallback_seed = seed;
    EmbeddingClient embedder(embed_cfg);

    const std::vector<DatasetRecord> records = read_dataset_jsonl(in_path);
    if (records.empty()) raise(Errc::usage, "dataset is empty: " + in_path);

    struct Component {
        const char* name;
        std::vector<std::string> items;
    };
    Component components[3] = {{"question", {}}, {"sql_query", {}}, {"answer", {}}};
    for (const auto& r : records) {
        components[0].items.push_back(r.question);
        components[1].items.push_back(r.sql_query);
        components[2].items.push_back(r.answer);
    }

    std::printf("%-10s %12s %10s %12s %10s\n", "component", "dup_count", "dup_pct", "mean_max", "std_max");
    for (auto& comp : components) {
        const MatchStats match = exact_match_stats(comp.items);
        double mean = 0.0, stddev = 0.0;
        if (comp.items.size() >= 2) {
            const auto vectors = embedder.embed(comp.items);
            const SimilaritySummary sim = avg_max_similarity(vectors);
            mean = sim.mean_max_sim;
            stddev = sim.std_max_sim;
        }
        std::printf("%-10s %12zu %9.2f%% %12.4f %10.4f\n", comp.name, match.duplicate_count,
                    match.duplicate_pct, mean, stddev);
    }
    return kExitOk;
}

std::unique_ptr<SqlModel> make_model(const AppConfig& cfg, const std::string& name) {
    if (name == "mock-echo") return std::make_unique<EchoModel>();
    auto it = cfg.evaluation_providers.find(name);
    if (it == cfg.evaluation_providers.end())
        raise(Errc::config, "model \"" + name + "\" is not in evaluation_providers");
    if (it->second.base_url == "mock:echo") return std::make_unique<EchoModel>();
    return std::make_unique<GatewayModel>(name, it->second);
}

int cmd_evaluate(const std::string& config_path, const std::string& model_name, const std::string& mode_name,
                 const std::string& dataset_override, const std::string& out_override, bool raw_mean) {
    AppConfig cfg = load_app_config(config_path);
    const fs::path out_dir = out_override.empty() ? cfg.output_dir : fs::path(out_override);
    const fs::path dataset_path =
        dataset_override.empty() ? cfg.output_dir / "dataset.jsonl" : fs::path(dataset_override);

    const std::vector<DatasetRecord> dataset = read_dataset_jsonl(dataset_path);
    if (dataset.empty()) raise(Errc::usage, "dataset is empty: " + dataset_path.string());

    PromptMode mode = PromptMode::zero_shot();
    if (mode_name == "few") {
        if (cfg.few_shot_examples.empty())
            raise(Errc::config, "few-shot mode requires few_shot_examples in the config");
        mode = PromptMode::few_shot(load_few_shot_examples(cfg.few_shot_examples));
    } else if (mode_name != "zero") {
        raise(Errc::usage, "--mode must be zero or few");
    }

    Database db = Database::open_read_only(cfg.database);
    SchemaDoc schema = load_schema_doc(db, cfg.schema_descriptions);
    std::unique_ptr<SqlModel> model = make_model(cfg, model_name);

    fs::create_directories(out_dir);
    const std::string stem = sanitize_name(model_name) + "_" + mode_name;
    EvalOptions opts;
    opts.limits = cfg.limits;
    opts.checkpoint_path = out_dir / (stem + ".checkpoint.jsonl");

    const std::vector<EvalRecord> records = evaluate_dataset(dataset, *model, db, mode, schema, opts);

    std::vector<std::string> lines;
    for (const auto& r : records) lines.push_back(eval_record_to_json(r).dump());
    write_lines_atomic(out_dir / ("eval_" + stem + ".jsonl"), lines);
    std::error_code ec;
    fs::remove(opts.checkpoint_path, ec);  // run completed; checkpoint no longer needed

    const auto aggregation = raw_mean ? Aggregation::raw_mean : Aggregation::grouped_by_sql;
    const ReportTable report =
        build_report(records, dataset, hex64(file_hash(dataset_path)), aggregation);
    write_report_file(out_dir / ("report_" + stem + ".json"), report, ReportFormat::json);
    write_report_file(out_dir / ("report_" + stem + ".csv"), report, ReportFormat::csv);
    write_report_file(out_dir / ("report_" + stem + ".md"), report, ReportFormat::markdown);

    std::cout << render_report(report, ReportFormat::markdown);
    return kExitOk;
}

int cmd_report(const std::string& records_path, const std::string& dataset_path, const std::string& format,
               const std::string& out_path, bool raw_mean) {
    const std::vector<EvalRecord> records = read_eval_records_jsonl(records_path);
    const std::vector<DatasetRecord> dataset = read_dataset_jsonl(dataset_path);

    ReportFormat fmt;
    if (format == "json") fmt = ReportFormat::json;
    else if (format == "csv") fmt = ReportFormat::csv;
    else if (format == "markdown" || format == "md") fmt = ReportFormat::markdown;
    else raise(Errc::usage, "--format must be json, csv or markdown");

    const auto aggregation = raw_mean ? Aggregation::raw_mean : Aggregation::grouped_by_sql;
    const ReportTable report = build_report(records, dataset, hex64(file_hash(dataset_path)), aggregation);
    const std::string rendered = render_report(report, fmt);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) raise(Errc::io, "cannot write " + out_path);
        out << rendered;
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path, const std::string& dataset_override) {
    AppConfig cfg = load_app_config(config_path);
    const fs::path dataset_path =
        dataset_override.empty() ? cfg.output_dir / "dataset.jsonl" : fs::path(dataset_override);
    const std::vector<DatasetRecord> dataset = read_dataset_jsonl(dataset_path);
    if (dataset.empty()) raise(Errc::usage, "dataset is empty: " + dataset_path.string());

    Database db = Database::open_read_only(cfg.database);
    size_t failures = 0;
    for (const auto& rec : dataset) {
        const ExecOutcome outcome = execute_query(db, rec.sql_query, cfg.limits);
        if (outcome.is_error()) {
            ++failures;
            log_error("record " + rec.id + " no longer executes: " + outcome.error().message);
            continue;
        }
        if (static_cast<int64_t>(outcome.grid().row_count()) != rec.gt_row_count) {
            ++failures;
            log_error("record " + rec.id + " row count drifted: expected " +
                      std::to_string(rec.gt_row_count) + ", got " +
                      std::to_string(outcome.grid().row_count()));
        }
    }
    std::cout << "validated " << dataset.size() << " records, " << failures << " failures\n";
    return failures == 0 ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"text-to-SQL benchmark toolkit"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, dataset_path, records_path;
    std::string model_name, mode_name = "zero", format = "markdown";
    std::optional<uint64_t> seed;
    uint64_t div_seed = 0;
    bool count_occurrences = false, raw_mean = false, verbose = false;

    app.add_flag("-v,--verbose", verbose, "enable debug logging");

    auto* generate = app.add_subcommand("generate", "synthesize a question-SQL-answer dataset");
    generate->add_option("--config", config_path, "config file")->required();
    generate->add_option("--seed", seed, "override the datagen seed");
    generate->add_option("--out", out_path, "output directory (default: config output_dir)");

    auto* classify = app.add_subcommand("classify", "difficulty labels and syntax statistics");
    classify->add_option("--in", in_path, "JSONL file with sql_query or sql fields")->required();
    classify->add_option("--out", out_path, "write per-record labels to this JSONL file");
    classify->add_flag("--count-occurrences", count_occurrences,
                       "count keyword occurrences instead of presence");

    auto* diversity = app.add_subcommand("diversity", "duplication and semantic-similarity analytics");
    diversity->add_option("--in", in_path, "dataset JSONL")->required();
    diversity->add_option("--config", config_path, "config file (for a remote embedding endpoint)");
    diversity->add_option("--seed", div_seed, "fallback embedder seed");

    auto* evaluate = app.add_subcommand("evaluate", "run a provider over the dataset and score it");
    evaluate->add_option("--config", config_path, "config file")->required();
    evaluate->add_option("--model", model_name, "provider name from the config, or mock-echo")->required();
    evaluate->add_option("--mode", mode_name, "zero or few")->required();
    evaluate->add_option("--dataset", dataset_path, "dataset JSONL (default: output_dir/dataset.jsonl)");
    evaluate->add_option("--out", out_path, "output directory (default: config output_dir)");
    evaluate->add_flag("--raw-mean", raw_mean, "plain per-record mean instead of duplicate-SQL grouping");

    auto* report = app.add_subcommand("report", "render a report from saved eval records");
    report->add_option("--records", records_path, "eval records JSONL")->required();
    report->add_option("--dataset", dataset_path, "dataset JSONL the records came from")->required();
    report->add_option("--format", format, "json, csv or markdown");
    report->add_option("--out", out_path, "output file (default: stdout)");
    report->add_flag("--raw-mean", raw_mean, "plain per-record mean instead of duplicate-SQL grouping");

    auto* validate = app.add_subcommand("validate", "re-execute every dataset ground truth");
    validate->add_option("--config", config_path, "config file")->required();
    validate->add_option("--dataset", dataset_path, "dataset JSONL (default: output_dir/dataset.jsonl)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    if (verbose) log_threshold() = LogLevel::debug;

    try {
        if (generate->parsed()) return cmd_generate(config_path, seed, out_path);
        if (classify->parsed()) return cmd_classify(in_path, out_path, count_occurrences);
        if (diversity->parsed()) return cmd_diversity(in_path, config_path, div_seed);
        if (evaluate->parsed())
            return cmd_evaluate(config_path, model_name, mode_name, dataset_path, out_path, raw_mean);
        if (report->parsed()) return cmd_report(records_path, dataset_path, format, out_path, raw_mean);
        if (validate->parsed()) return cmd_validate(config_path, dataset_path);
    } catch (const Error& e) {
        log_error(e.what());
        if (e.code() == Errc::provider_unavailable || e.code() == Errc::provider_rejected)
            return kExitProvider;
        return kExitUsage;
    } catch (const std::exception& e) {
        log_error(e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
