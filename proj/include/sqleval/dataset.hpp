#pragma once

#include <ctime>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqleval/difficulty.hpp"
#include "sqleval/error.hpp"
#include "sqleval/hash.hpp"
#include "sqleval/json.hpp"

namespace sqleval {

// One curated question-SQL-answer triplet.
struct DatasetRecord {
    std::string id;  // content hash of (sql_query, question)
    std::string question;
    std::string sql_query;
    std::string answer;
    DifficultyLabel difficulty = DifficultyLabel::easy;
    int64_t gt_row_count = 0;
    std::string created_at;  // ISO 8601 UTC
};

inline std::string dataset_record_id(std::string_view sql_query, std::string_view question) {
    uint64_t h = fnv1a64(sql_query);
    h = fnv1a64("\x1f", h);  // separator so ("ab","c") and ("a","bc") differ
    h = fnv1a64(question, h);
    return hex64(h);
}

inline std::string utc_timestamp_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Json dataset_record_to_json(const DatasetRecord& r) {
    return Json{
        {"id", r.id},
        {"question", r.question},
        {"sql_query", r.sql_query},
        {"answer", r.answer},
        {"difficulty", difficulty_name(r.difficulty)},
        {"gt_row_count", r.gt_row_count},
        {"created_at", r.created_at},
    };
}

inline DatasetRecord dataset_record_from_json(const Json& j) {
    DatasetRecord r;
    r.id = j.value("id", "");
    r.question = j.value("question", "");
    r.sql_query = j.value("sql_query", "");
    r.answer = j.value("answer", "");
    r.difficulty = difficulty_from_name(j.value("difficulty", "easy"));
    r.gt_row_count = j.value("gt_row_count", int64_t{0});
    r.created_at = j.value("created_at", "");
    if (r.id.empty() || r.question.empty() || r.sql_query.empty())
        raise(Errc::corrupt_dataset, "dataset record missing id/question/sql_query: " + j.dump());
    return r;
}

inline std::vector<DatasetRecord> read_dataset_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open dataset " + path.string());
    std::vector<DatasetRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded())
            raise(Errc::corrupt_dataset, path.string() + ":" + std::to_string(lineno) + ": invalid JSON line");
        records.push_back(dataset_record_from_json(j));
    }
    return records;
}

// Writes lines to a sibling temp file, then renames over the target.
inline void write_lines_atomic(const std::filesystem::path& path, std::span<const std::string> lines) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io, "cannot write " + tmp.string());
        for (const auto& line : lines) out << line << "\n";
        if (!out) raise(Errc::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) raise(Errc::io, "cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline void write_dataset_jsonl_atomic(const std::filesystem::path& path,
                                       std::span<const DatasetRecord> records) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(dataset_record_to_json(r).dump());
    write_lines_atomic(path, lines);
}

inline uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(std::string_view(buf, static_cast<size_t>(in.gcount())), h);
    return h;
}

}  // namespace sqleval
