#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sqleval/dataset.hpp"
#include "sqleval/datagen.hpp"
#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"
#include "sqleval/gateway.hpp"
#include "sqleval/metrics.hpp"
#include "sqleval/schema.hpp"

namespace sqleval {

struct FewShotExample {
    std::string question;
    std::string reasoning;
    std::string sql;
};

// Zero-shot, or few-shot with exactly four worked examples.
class PromptMode {
public:
    static PromptMode zero_shot() { return PromptMode({}); }

    static PromptMode few_shot(std::vector<FewShotExample> examples) {
        if (examples.size() != 4)
            raise(Errc::config, "few-shot mode requires exactly 4 examples, got " +
                                    std::to_string(examples.size()));
        return PromptMode(std::move(examples));
    }

    bool is_few_shot() const { return !examples_.empty(); }
    const std::vector<FewShotExample>& examples() const { return examples_; }
    const char* name() const { return is_few_shot() ? "few" : "zero"; }

private:
    explicit PromptMode(std::vector<FewShotExample> examples) : examples_(std::move(examples)) {}
    std::vector<FewShotExample> examples_;
};

inline std::vector<FewShotExample> load_few_shot_examples(const std::filesystem::path& path) {
    const Json j = load_json_file(path);
    if (!j.is_array()) raise(Errc::config, path.string() + ": expected a JSON array of examples");
    std::vector<FewShotExample> out;
    for (const auto& e : j)
        out.push_back({e.at("question").get<std::string>(), e.value("reasoning", ""),
                       e.at("sql").get<std::string>()});
    return out;
}

// Instructions, schema, optional worked examples, then the target question.
// The model must reply with {"reasoning": <str>, "sql": <str>}.
inline std::string build_sql_gen_prompt(const SchemaDoc& schema, const std::string& question,
                                        const PromptMode& mode) {
    if (question.empty()) raise(Errc::usage, "question must be non-empty");

    std::ostringstream out;
    out << "You translate natural-language questions into SQL queries for the database described "
           "below.\n\n"
           "# Database Schema\n"
        << render_schema_text(schema)
        << "\n"
           "# Instructions\n"
           "- Write one SQL query that answers the question.\n"
           "- Think through the schema step by step before committing to the query.\n"
           "- Respond with a JSON object of the following format, reasoning first:\n"
           "{\"reasoning\": <str>, \"sql\": <str>}\n";

    if (mode.is_few_shot()) {
        out << "\n# Examples\n";
        for (const auto& ex : mode.examples()) {
            const Json answer = Json{{"reasoning", ex.reasoning}, {"sql", ex.sql}};
            out << "Question: " << ex.question << "\n" << answer.dump() << "\n\n";
        }
    }

    out << "\n# Question\n" << question << "\n";
    return out.str();
}

struct SqlResponse {
    std::string reasoning;
    std::string sql;
};

inline SqlResponse parse_sql_response(const std::string& raw) {
    Json payload;
    try {
        payload = extract_json_payload(raw);
    } catch (const Error& e) {
        raise(Errc::no_sql, std::string("no JSON payload in model output: ") + e.what());
    }
    if (!payload.is_object() || !payload.contains("sql") || !payload["sql"].is_string())
        raise(Errc::no_sql, "model output has no \"sql\" field");
    SqlResponse r{payload.value("reasoning", ""), payload["sql"].get<std::string>()};
    const auto non_ws = r.sql.find_first_not_of(" \t\r\n");
    if (non_ws == std::string::npos) raise(Errc::no_sql, "model output has an empty \"sql\" field");
    return r;
}

// What the harness talks to. The gateway-backed implementation ignores the
// record; the echo oracle needs it to return the record's own ground truth.
class SqlModel {
public:
    virtual ~SqlModel() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const std::string& prompt, const DatasetRecord& record) = 0;
};

class GatewayModel : public SqlModel {
public:
    GatewayModel(std::string name, ProviderConfig cfg) : name_(std::move(name)), client_(std::move(cfg)) {}

    std::string name() const override { return name_; }

    std::string complete(const std::string& prompt, const DatasetRecord&) override {
        ChatRequest req;
        req.messages = {{"user", prompt}};
        req.temperature = 0.0;
        req.max_tokens = 2048;
        return client_.chat(req).content;
    }

    ChatClient& client() { return client_; }

private:
    std::string name_;
    ChatClient client_;
};

// Returns each record's own ground-truth SQL; a harness self-check that must
// score perfectly.
class EchoModel : public SqlModel {
public:
    std::string name() const override { return "mock-echo"; }

    std::string complete(const std::string&, const DatasetRecord& record) override {
        return Json{{"reasoning", "echoing the reference query"}, {"sql", record.sql_query}}.dump();
    }
};

struct EvalRecord {
    std::string record_id;
    std::optional<std::string> predicted_sql;  // absent when no SQL could be extracted
    EvalScore score;
    DifficultyLabel difficulty = DifficultyLabel::easy;
    double latency_ms = 0.0;
    std::string mode;
    std::string model;
};

inline Json eval_record_to_json(const EvalRecord& r) {
    Json j{
        {"record_id", r.record_id},
        {"predicted_sql", r.predicted_sql ? Json(*r.predicted_sql) : Json(nullptr)},
        {"score",
         Json{{"soft_f1", r.score.soft_f1}, {"exact", r.score.exact}, {"exec_error", r.score.exec_error}}},
        {"difficulty", difficulty_name(r.difficulty)},
        {"latency_ms", r.latency_ms},
        {"mode", r.mode},
        {"model", r.model},
    };
    return j;
}

inline EvalRecord eval_record_from_json(const Json& j) {
    EvalRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    if (j.contains("predicted_sql") && j["predicted_sql"].is_string())
        r.predicted_sql = j["predicted_sql"].get<std::string>();
    const Json& s = j.at("score");
    r.score.soft_f1 = s.value("soft_f1", 0.0);
    r.score.exact = s.value("exact", false);
    r.score.exec_error = s.value("exec_error", false);
    r.difficulty = difficulty_from_name(j.value("difficulty", "easy"));
    r.latency_ms = j.value("latency_ms", 0.0);
    r.mode = j.value("mode", "zero");
    r.model = j.value("model", "");
    return r;
}

inline std::vector<EvalRecord> read_eval_records_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open eval records " + path.string());
    std::vector<EvalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) raise(Errc::corrupt_dataset, "invalid JSON line in " + path.string());
        records.push_back(eval_record_from_json(j));
    }
    return records;
}

struct EvalOptions {
    ExecLimits limits;
    std::filesystem::path checkpoint_path;  // empty disables checkpointing
    size_t checkpoint_every = 20;
    size_t stop_after = 0;  // 0 = run to completion; used to simulate interruption in tests
};

namespace detail {

inline void write_checkpoint(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(eval_record_to_json(r).dump());
    write_lines_atomic(path, lines);
}

}  // namespace detail

// Evaluates every dataset record: prompt, model completion, SQL extraction,
// sandboxed execution, scoring. Per-record failures become exec_error records
// instead of aborting; a ground-truth execution failure aborts, since it means
// the dataset and database do not belong together. Progress is checkpointed so
// an interrupted run resumes without repeating completed records.
inline std::vector<EvalRecord> evaluate_dataset(const std::vector<DatasetRecord>& dataset, SqlModel& model,
                                                Database& db, const PromptMode& mode, const SchemaDoc& schema,
                                                const EvalOptions& opts = {}) {
    if (dataset.empty()) raise(Errc::usage, "dataset is empty");

    std::unordered_map<std::string, EvalRecord> completed;
    if (!opts.checkpoint_path.empty() && std::filesystem::exists(opts.checkpoint_path)) {
        for (auto& r : read_eval_records_jsonl(opts.checkpoint_path)) completed.emplace(r.record_id, r);
        if (!completed.empty())
            log_info("resuming from checkpoint with " + std::to_string(completed.size()) + " records");
    }

    std::unordered_map<std::string, ExecOutcome> gt_cache;
    auto ground_truth = [&](const DatasetRecord& rec) -> const ExecOutcome& {
        auto it = gt_cache.find(rec.sql_query);
        if (it == gt_cache.end()) {
            ExecOutcome outcome = execute_query(db, rec.sql_query, opts.limits);
            if (outcome.is_error())
                raise(Errc::corrupt_dataset, "ground-truth SQL failed for record " + rec.id + ": " +
                                                 outcome.error().message +
                                                 " (dataset and database do not match)");
            it = gt_cache.emplace(rec.sql_query, std::move(outcome)).first;
        }
        return it->second;
    };

    std::vector<EvalRecord> results;
    results.reserve(dataset.size());
    size_t fresh = 0;

    for (const auto& rec : dataset) {
        if (auto it = completed.find(rec.id); it != completed.end()) {
            results.push_back(it->second);
            continue;
        }
        if (opts.stop_after > 0 && fresh >= opts.stop_after) break;

        EvalRecord out;
        out.record_id = rec.id;
        out.difficulty = rec.difficulty;
        out.mode = mode.name();
        out.model = model.name();

        const auto started = std::chrono::steady_clock::now();
        std::string raw;
        bool model_failed = false;
        try {
            raw = model.complete(build_sql_gen_prompt(schema, rec.question, mode), rec);
        } catch (const Error& e) {
            log_warn("model call failed for record " + rec.id + ": " + e.what());
            model_failed = true;
        }
        out.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

        const ExecOutcome& gt = ground_truth(rec);
        if (model_failed) {
            out.score = {0.0, false, true};
        } else {
            try {
                const SqlResponse parsed = parse_sql_response(raw);
                out.predicted_sql = parsed.sql;
                const ExecOutcome pred = execute_query(db, parsed.sql, opts.limits);
                out.score = score_prediction(gt, pred);
            } catch (const Error& e) {
                if (e.code() != Errc::no_sql) throw;
                out.score = {0.0, false, true};  // unextractable SQL cannot execute
            }
        }

        results.push_back(out);
        ++fresh;
        if (!opts.checkpoint_path.empty() && fresh % opts.checkpoint_every == 0)
            detail::write_checkpoint(opts.checkpoint_path, results);
    }

    if (!opts.checkpoint_path.empty()) detail::write_checkpoint(opts.checkpoint_path, results);
    return results;
}

struct ReportTable {
    AggregateReport overall;
    std::map<DifficultyLabel, AggregateReport> by_difficulty;
    std::string model;
    std::string mode;
    std::string dataset_hash;
    std::string timestamp;
};

// Joins eval records back to their ground-truth SQL (the dataset) and applies
// the duplicate-SQL two-step aggregation overall and within each difficulty
// partition present.
inline ReportTable build_report(const std::vector<EvalRecord>& records,
                                const std::vector<DatasetRecord>& dataset, const std::string& dataset_hash,
                                Aggregation aggregation = Aggregation::grouped_by_sql) {
    if (records.empty()) raise(Errc::usage, "no eval records to report");

    std::unordered_map<std::string, const DatasetRecord*> by_id;
    for (const auto& d : dataset) by_id[d.id] = &d;

    std::vector<ScoredSql> all;
    std::map<DifficultyLabel, std::vector<ScoredSql>> partitions;
    for (const auto& r : records) {
        auto it = by_id.find(r.record_id);
        if (it == by_id.end())
            raise(Errc::corrupt_dataset, "eval record " + r.record_id + " is not in the dataset");
        const ScoredSql s{it->second->sql_query, r.score};
        all.push_back(s);
        partitions[r.difficulty].push_back(s);
    }

    ReportTable table;
    table.overall = aggregate_by_group(all, aggregation);
    for (const auto& [label, part] : partitions)
        table.by_difficulty[label] = aggregate_by_group(part, aggregation);
    table.model = records.front().model;
    table.mode = records.front().mode;
    table.dataset_hash = dataset_hash;
    table.timestamp = utc_timestamp_now();
    return table;
}

enum class ReportFormat { json, csv, markdown };

namespace detail {

// Percentages with one decimal; error counts stay raw.
inline double pct1(double fraction) { return std::round(fraction * 1000.0) / 10.0; }

inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

inline Json aggregate_to_json(const AggregateReport& a) {
    return Json{
        {"soft_f1", pct1(a.mean_soft_f1)},
        {"accuracy", pct1(a.mean_accuracy)},
        {"error_count", a.error_count},
        {"groups", a.group_count},
    };
}

}  // namespace detail

inline std::string render_report(const ReportTable& report, ReportFormat format) {
    static const DifficultyLabel label_order[] = {DifficultyLabel::easy, DifficultyLabel::medium,
                                                  DifficultyLabel::hard, DifficultyLabel::extra};

    if (format == ReportFormat::json) {
        Json j{
            {"metadata",
             Json{{"model", report.model},
                  {"mode", report.mode},
                  {"dataset_hash", report.dataset_hash},
                  {"timestamp", report.timestamp}}},
            {"overall", detail::aggregate_to_json(report.overall)},
        };
        Json by = Json::object();
        for (auto label : label_order)
            if (auto it = report.by_difficulty.find(label); it != report.by_difficulty.end())
                by[difficulty_name(label)] = detail::aggregate_to_json(it->second);
        j["by_difficulty"] = std::move(by);
        return j.dump(2) + "\n";
    }

    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "model,mode,partition,soft_f1,accuracy,error_count,groups\n";
        auto row = [&](const std::string& partition, const AggregateReport& a) {
            out << report.model << "," << report.mode << "," << partition << ","
                << detail::fmt1(detail::pct1(a.mean_soft_f1)) << ","
                << detail::fmt1(detail::pct1(a.mean_accuracy)) << "," << a.error_count << "," << a.group_count
                << "\n";
        };
        row("overall", report.overall);
        for (auto label : label_order)
            if (auto it = report.by_difficulty.find(label); it != report.by_difficulty.end())
                row(difficulty_name(label), it->second);
        return out.str();
    }

    // markdown: metric summary grid, then the per-difficulty grid
    std::ostringstream out;
    out << "# Evaluation report: " << report.model << " (" << report.mode << "-shot)\n\n";
    out << "Dataset hash: `" << report.dataset_hash << "`, generated " << report.timestamp << "\n\n";
    out << "| Metric | " << report.mode << "-shot |\n|---|---|\n";
    out << "| Soft Execution F1 | " << detail::fmt1(detail::pct1(report.overall.mean_soft_f1)) << " |\n";
    out << "| Execution Accuracy | " << detail::fmt1(detail::pct1(report.overall.mean_accuracy)) << " |\n";
    out << "| Error Count | " << report.overall.error_count << " |\n";
    out << "| SQL Groups | " << report.overall.group_count << " |\n\n";

    out << "| Partition | Soft F1 | Accuracy | Errors | Groups |\n|---|---|---|---|---|\n";
    for (auto label : label_order) {
        auto it = report.by_difficulty.find(label);
        if (it == report.by_difficulty.end()) continue;
        out << "| " << difficulty_name(label) << " | " << detail::fmt1(detail::pct1(it->second.mean_soft_f1))
            << " | " << detail::fmt1(detail::pct1(it->second.mean_accuracy)) << " | "
            << it->second.error_count << " | " << it->second.group_count << " |\n";
    }
    return out.str();
}

inline void write_report_file(const std::filesystem::path& path, const ReportTable& report,
                              ReportFormat format) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(Errc::io, "cannot write report to " + path.string());
    out << render_report(report, format);
}

}  // namespace sqleval
