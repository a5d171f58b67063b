#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/json.hpp"
#include "sqleval/value.hpp"

namespace sqleval {

// Rectangular execution result: columns are attributes, rows are tuples.
struct ResultGrid {
    std::vector<std::string> column_names;
    std::vector<std::vector<SqlValue>> rows;

    size_t row_count() const { return rows.size(); }
    size_t col_count() const { return column_names.size(); }

    std::vector<SqlValue> column(size_t j) const {
        std::vector<SqlValue> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[j]);
        return out;
    }

    bool rectangular() const {
        for (const auto& r : rows)
            if (r.size() != column_names.size()) return false;
        return true;
    }
};

inline ResultGrid make_grid(std::vector<std::string> columns, std::vector<std::vector<SqlValue>> rows) {
    ResultGrid g{std::move(columns), std::move(rows)};
    if (!g.rectangular()) raise(Errc::corrupt_dataset, "result grid is not rectangular");
    return g;
}

enum class ExecErrorKind { syntax, schema, timeout, row_cap_exceeded, other };

inline const char* exec_error_kind_name(ExecErrorKind k) {
    switch (k) {
        case ExecErrorKind::syntax: return "syntax";
        case ExecErrorKind::schema: return "schema";
        case ExecErrorKind::timeout: return "timeout";
        case ExecErrorKind::row_cap_exceeded: return "row_cap_exceeded";
        case ExecErrorKind::other: return "other";
    }
    return "other";
}

struct ExecError {
    ExecErrorKind kind;
    std::string message;  // never empty
};

// Either a grid or an execution failure.
class ExecOutcome {
public:
    static ExecOutcome ok(ResultGrid grid) { return ExecOutcome(std::move(grid)); }

    static ExecOutcome fail(ExecErrorKind kind, std::string message) {
        if (message.empty()) message = exec_error_kind_name(kind);
        return ExecOutcome(ExecError{kind, std::move(message)});
    }

    bool is_grid() const { return std::holds_alternative<ResultGrid>(v_); }
    bool is_error() const { return !is_grid(); }

    const ResultGrid& grid() const { return std::get<ResultGrid>(v_); }
    ResultGrid take_grid() { return std::move(std::get<ResultGrid>(v_)); }
    const ExecError& error() const { return std::get<ExecError>(v_); }

private:
    explicit ExecOutcome(ResultGrid g) : v_(std::move(g)) {}
    explicit ExecOutcome(ExecError e) : v_(std::move(e)) {}

    std::variant<ResultGrid, ExecError> v_;
};

inline Json grid_to_json(const ResultGrid& g) {
    Json cols = Json::array();
    for (const auto& name : g.column_names) cols.push_back(name);
    Json rows = Json::array();
    for (const auto& row : g.rows) {
        Json jr = Json::array();
        for (const auto& cell : row) jr.push_back(value_to_json(cell));
        rows.push_back(std::move(jr));
    }
    return Json{{"columns", std::move(cols)}, {"rows", std::move(rows)}};
}

inline ResultGrid grid_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("columns") || !j.contains("rows"))
        raise(Errc::corrupt_dataset, "grid JSON must be {\"columns\": [...], \"rows\": [...]}");
    std::vector<std::string> columns;
    for (const auto& c : j.at("columns")) columns.push_back(c.get<std::string>());
    std::vector<std::vector<SqlValue>> rows;
    for (const auto& jr : j.at("rows")) {
        std::vector<SqlValue> row;
        for (const auto& cell : jr) row.push_back(value_from_json(cell));
        if (row.size() != columns.size()) raise(Errc::corrupt_dataset, "grid JSON row width mismatch");
        rows.push_back(std::move(row));
    }
    return ResultGrid{std::move(columns), std::move(rows)};
}

}  // namespace sqleval
