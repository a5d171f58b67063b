#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sqleval/dataset.hpp"
#include "sqleval/difficulty.hpp"
#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"
#include "sqleval/gateway.hpp"
#include "sqleval/grid.hpp"
#include "sqleval/json.hpp"
#include "sqleval/log.hpp"
#include "sqleval/schema.hpp"

namespace sqleval {

struct GenPair {
    std::string sql_query;
    std::string question;
};

struct AnswerJudgment {
    std::string reasoning;
    bool context_is_sufficient = false;
    std::string answer;
};

struct DatagenConfig {
    int pairs_per_call = 10;
    int target_size = 50;
    double temperature = 1.5;
    int result_row_threshold = 50;  // stage-2 filter, not the execution row cap
    int sample_rows_per_table = 5;
    uint64_t seed = 0;
};

inline DatagenConfig datagen_config_from_json(const Json& j) {
    DatagenConfig c;
    c.pairs_per_call = j.value("pairs_per_call", c.pairs_per_call);
    c.target_size = j.value("target_size", c.target_size);
    c.temperature = j.value("temperature", c.temperature);
    c.result_row_threshold = j.value("result_row_threshold", c.result_row_threshold);
    c.sample_rows_per_table = j.value("sample_rows_per_table", c.sample_rows_per_table);
    c.seed = j.value("seed", c.seed);
    if (c.pairs_per_call <= 0 || c.target_size <= 0 || c.result_row_threshold <= 0 ||
        c.sample_rows_per_table <= 0)
        raise(Errc::config, "datagen sizes must be positive");
    if (c.temperature < 0.0 || c.temperature > 2.0) raise(Errc::config, "datagen temperature must be in [0, 2]");
    return c;
}

inline Json datagen_config_to_json(const DatagenConfig& c) {
    return Json{
        {"pairs_per_call", c.pairs_per_call},
        {"target_size", c.target_size},
        {"temperature", c.temperature},
        {"result_row_threshold", c.result_row_threshold},
        {"sample_rows_per_table", c.sample_rows_per_table},
        {"seed", c.seed},
    };
}

// Plain-text table used in prompts: header row, then one row per line, cells
// tab-separated, NULL spelled literally.
inline std::string render_grid_text(const ResultGrid& grid) {
    std::ostringstream out;
    for (size_t j = 0; j < grid.column_names.size(); ++j) {
        if (j) out << "\t";
        out << grid.column_names[j];
    }
    out << "\n";
    for (const auto& row : grid.rows) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out << "\t";
            out << value_to_display(row[j]);
        }
        out << "\n";
    }
    return out.str();
}

// SQL-first generation prompt: per-table documentation, sampled example rows,
// then the task and the output-contract bullets.
inline std::string build_generation_prompt(const SchemaDoc& schema,
                                           const std::vector<std::pair<std::string, ResultGrid>>& samples,
                                           const DatagenConfig& cfg) {
    if (schema.tables.empty()) raise(Errc::usage, "schema has no tables");

    std::ostringstream out;
    for (const auto& t : schema.tables) out << render_table_text(t) << "\n";
    if (!schema.relationship_notes.empty()) out << "Relationships:\n" << schema.relationship_notes << "\n";

    for (const auto& [table, grid] : samples) {
        out << "Example " << table << " data:\n";
        out << render_grid_text(grid) << "\n";
    }

    out << "Your task is to write a SQL query that able to answer a question.\n"
           "First, you need to generate the sql query\n"
           "Second, create question based on that sql query (what question is answered by the query)\n"
           "\n"
           "# IMPORTANT NOTE\n"
           "- Generate "
        << cfg.pairs_per_call
        << " sql_query/question pairs in one answer!\n"
           "- Your answer must be in JSON format, a list of dictionaries containing "
           "{\"sql_query\": <str>, \"question\": <str>}\n"
           "- Ensure that you create reasoning on what kind of sql you need to create step-by-step "
           "Before answering in JSON!\n"
           "- Create the reasoning first on top step-by-step, then generate all the JSON bellow it!\n"
           "- The sql_query string must be a valid SQL query that can be executed on the database!\n"
           "- Be creative and Create diverse and complete reasoning, sql query and its question!\n"
           "- Also try to create difficult SQL that have very short question (yo may also consider to "
           "use abbreviations only)!\n"
           "- Include a very difficult SQL that you can think of!\n"
           "- Reasoning should be as complete as possible!\n";
    return out.str();
}

// Validates the model's JSON list; malformed elements are dropped with a
// logged reason. Zero survivors is an error.
inline std::vector<GenPair> parse_pair_list(const std::string& raw) {
    Json payload;
    try {
        payload = extract_json_payload(raw);
    } catch (const Error& e) {
        raise(Errc::empty_generation, std::string("generation output had no JSON payload: ") + e.what());
    }
    if (!payload.is_array()) raise(Errc::empty_generation, "generation payload is not a JSON list");

    auto trimmed = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };

    std::vector<GenPair> pairs;
    size_t index = 0;
    for (const auto& item : payload) {
        const size_t at = index++;
        if (!item.is_object()) {
            log_warn("dropping generation element " + std::to_string(at) + ": not an object");
            continue;
        }
        if (!item.contains("sql_query") || !item["sql_query"].is_string() || !item.contains("question") ||
            !item["question"].is_string()) {
            log_warn("dropping generation element " + std::to_string(at) + ": missing sql_query/question");
            continue;
        }
        GenPair p{trimmed(item["sql_query"].get<std::string>()), trimmed(item["question"].get<std::string>())};
        if (p.sql_query.empty() || p.question.empty()) {
            log_warn("dropping generation element " + std::to_string(at) + ": empty sql_query/question");
            continue;
        }
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) raise(Errc::empty_generation, "no valid sql_query/question pairs in generation output");
    return pairs;
}

struct FilterOutcome {
    std::vector<std::pair<GenPair, ResultGrid>> retained;
    size_t dropped_non_executable = 0;
    size_t dropped_oversized = 0;
};

// Stage 1 drops pairs whose SQL fails to execute; stage 2 drops pairs whose
// result exceeds the row threshold (inclusive boundary is retained).
inline FilterOutcome filter_pairs(Database& db, const std::vector<GenPair>& pairs, const DatagenConfig& cfg,
                                  const ExecLimits& limits = {}) {
    FilterOutcome out;
    for (const auto& pair : pairs) {
        ExecOutcome outcome = execute_query(db, pair.sql_query, limits);
        if (outcome.is_error()) {
            ++out.dropped_non_executable;
            log_debug("stage-1 drop (" + std::string(exec_error_kind_name(outcome.error().kind)) +
                      "): " + pair.sql_query);
            continue;
        }
        if (outcome.grid().row_count() > static_cast<size_t>(cfg.result_row_threshold)) {
            ++out.dropped_oversized;
            log_debug("stage-2 drop (" + std::to_string(outcome.grid().row_count()) + " rows): " + pair.sql_query);
            continue;
        }
        out.retained.emplace_back(pair, outcome.take_grid());
    }
    return out;
}

// Answer-and-sufficiency prompt over the pair's own execution result.
inline std::string build_answer_prompt(const std::string& sql, const ResultGrid& grid,
                                       const std::string& question) {
    std::ostringstream out;
    out << "Answer the question based on retrieved context\n"
           "# Guidelines :\n"
           "1. Think step-by-step before answering using JSON format.\n"
           "2. Think whether the context is relevant or not, and how to answer the question using the "
           "retrieved context\n"
           "3. Answer with JSON format of the following format:\n"
           "{\n"
           "    \"reasoning\": <str>, // Your thinking\n"
           "    \"context_is_sufficient\" : <boolean>, // True if the context is sufficient to answer "
           "question, False if not\n"
           "    \"answer\": <str> // string in human-readable answer\n"
           "}\n"
           "\n"
           "# SQL Query used for retrieval : "
        << sql
        << "\n"
           "\n"
           "# Retrieved Context\n"
        << render_grid_text(grid)
        << "\n"
           "# Question\n"
        << question
        << "\n"
           "\n"
           "Answer in JSON format, and ensure that the \"answer\" part is human-readable:\n";
    return out.str();
}

namespace detail {

inline AnswerJudgment parse_judgment(const std::string& raw) {
    const Json payload = extract_json_payload(raw);  // may throw unparseable
    if (!payload.is_object() || !payload.contains("context_is_sufficient") ||
        !payload["context_is_sufficient"].is_boolean())
        raise(Errc::unparseable, "judgment payload missing boolean context_is_sufficient");
    AnswerJudgment j;
    j.reasoning = payload.value("reasoning", "");
    j.context_is_sufficient = payload["context_is_sufficient"].get<bool>();
    j.answer = payload.value("answer", "");
    if (j.context_is_sufficient && j.answer.empty())
        raise(Errc::unparseable, "judgment says sufficient but has no answer");
    return j;
}

}  // namespace detail

// Asks the provider (temperature 0) whether the grid suffices to answer the
// question and for the natural-language answer. One re-ask on an unparseable
// response, then the pair is abandoned.
inline AnswerJudgment judge_and_answer(ChatClient& gateway, const GenPair& pair, const ResultGrid& grid) {
    ChatRequest req;
    req.messages = {{"user", build_answer_prompt(pair.sql_query, grid, pair.question)}};
    req.temperature = 0.0;
    req.max_tokens = 1024;

    for (int attempt = 0; attempt < 2; ++attempt) {
        const ChatResult res = gateway.chat(req);
        try {
            return detail::parse_judgment(res.content);
        } catch (const Error& e) {
            if (e.code() != Errc::unparseable) throw;
            log_warn(std::string("judgment parse failed: ") + e.what());
        }
    }
    raise(Errc::judgment_failed, "judgment unparseable after one re-ask for: " + pair.question);
}

struct DatagenStats {
    size_t generated = 0;  // records that made it into the dataset
    size_t dropped_stage1 = 0;
    size_t dropped_stage2 = 0;
    size_t dropped_insufficient = 0;
    size_t dropped_duplicate = 0;
    size_t calls = 0;
    bool reached_target = false;
};

struct DatagenResult {
    std::vector<DatasetRecord> records;  // sorted by id
    DatagenStats stats;
};

// Two-stage factory: generate candidate pairs (fresh per-call row samples,
// seed advanced deterministically), filter for executability and result size,
// then judge sufficiency and attach answers. Stops at target_size or when the
// call budget (10x the minimum number of calls) runs out.
inline DatagenResult run_datagen(Database& db, ChatClient& gateway, const SchemaDoc& schema,
                                 const DatagenConfig& cfg, const ExecLimits& limits = {}) {
    DatagenResult result;
    std::vector<DatasetRecord> records;
    std::vector<std::string> seen_ids;
    const std::string created_at = utc_timestamp_now();

    const size_t budget = std::max<size_t>(
        1, 10 * static_cast<size_t>((cfg.target_size + cfg.pairs_per_call - 1) / cfg.pairs_per_call));

    for (size_t call = 0; call < budget && records.size() < static_cast<size_t>(cfg.target_size); ++call) {
        ++result.stats.calls;

        std::vector<std::pair<std::string, ResultGrid>> samples;
        for (size_t ti = 0; ti < schema.tables.size(); ++ti) {
            const uint64_t table_seed = splitmix64(cfg.seed + call * 0x9e3779b97f4a7c15ULL + ti);
            samples.emplace_back(schema.tables[ti].name,
                                 sample_rows(db, schema.tables[ti].name,
                                             static_cast<size_t>(cfg.sample_rows_per_table), table_seed));
        }

        ChatRequest req;
        req.messages = {{"user", build_generation_prompt(schema, samples, cfg)}};
        req.temperature = cfg.temperature;
        req.max_tokens = 8192;

        std::vector<GenPair> pairs;
        try {
            pairs = parse_pair_list(gateway.chat(req).content);
        } catch (const Error& e) {
            if (e.code() != Errc::empty_generation) throw;
            log_warn(std::string("generation call produced nothing usable: ") + e.what());
            continue;
        }

        FilterOutcome filtered = filter_pairs(db, pairs, cfg, limits);
        result.stats.dropped_stage1 += filtered.dropped_non_executable;
        result.stats.dropped_stage2 += filtered.dropped_oversized;

        for (auto& [pair, grid] : filtered.retained) {
            if (records.size() >= static_cast<size_t>(cfg.target_size)) break;

            const std::string id = dataset_record_id(pair.sql_query, pair.question);
            if (std::find(seen_ids.begin(), seen_ids.end(), id) != seen_ids.end()) {
                ++result.stats.dropped_duplicate;
                continue;
            }

            AnswerJudgment judgment;
            try {
                judgment = judge_and_answer(gateway, pair, grid);
            } catch (const Error& e) {
                if (e.code() != Errc::judgment_failed) throw;
                ++result.stats.dropped_insufficient;
                log_warn(std::string("pair dropped: ") + e.what());
                continue;
            }
            if (!judgment.context_is_sufficient) {
                ++result.stats.dropped_insufficient;
                log_debug("insufficient context for: " + pair.question);
                continue;
            }

            DatasetRecord rec;
            rec.id = id;
            rec.question = pair.question;
            rec.sql_query = pair.sql_query;
            rec.answer = judgment.answer;
            rec.difficulty = classify_sql(pair.sql_query);
            rec.gt_row_count = static_cast<int64_t>(grid.row_count());
            rec.created_at = created_at;
            seen_ids.push_back(id);
            records.push_back(std::move(rec));
        }
    }

    std::sort(records.begin(), records.end(),
              [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
    result.stats.generated = records.size();
    result.stats.reached_target = records.size() >= static_cast<size_t>(cfg.target_size);
    result.records = std::move(records);
    return result;
}

inline Json datagen_manifest(const DatagenConfig& cfg, const DatagenStats& stats) {
    return Json{
        {"config", datagen_config_to_json(cfg)},
        {"generated", stats.generated},
        {"dropped_stage1", stats.dropped_stage1},
        {"dropped_stage2", stats.dropped_stage2},
        {"dropped_insufficient", stats.dropped_insufficient},
        {"dropped_duplicate", stats.dropped_duplicate},
        {"calls", stats.calls},
        {"reached_target", stats.reached_target},
    };
}

// Writes dataset.jsonl (atomically) and manifest.json into out_dir.
inline void write_datagen_output(const std::filesystem::path& out_dir, const DatagenResult& result,
                                 const DatagenConfig& cfg) {
    std::filesystem::create_directories(out_dir);
    write_dataset_jsonl_atomic(out_dir / "dataset.jsonl", result.records);
    std::ofstream manifest(out_dir / "manifest.json", std::ios::trunc);
    if (!manifest) raise(Errc::io, "cannot write manifest in " + out_dir.string());
    manifest << datagen_manifest(cfg, result.stats).dump(2) << "\n";
}

}  // namespace sqleval
