#pragma once

#include <sqlite3.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/grid.hpp"
#include "sqleval/hash.hpp"
#include "sqleval/value.hpp"

namespace sqleval {

struct ExecLimits {
    std::chrono::milliseconds timeout{5000};
    size_t row_cap = 10000;  // hard safety cap, not the datagen filter threshold
};

// Owns one sqlite3 connection. Connections are not shared across threads;
// open one per worker.
class Database {
public:
    Database() = default;

    static Database open_read_only(const std::filesystem::path& file) {
        return open(file, SQLITE_OPEN_READONLY);
    }

    // Write access is only used for building fixtures and tests.
    static Database open_read_write(const std::filesystem::path& file) {
        return open(file, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
    }

    Database(Database&& other) noexcept : db_(other.db_) { other.db_ = nullptr; }
    Database& operator=(Database&& other) noexcept {
        if (this != &other) {
            close();
            db_ = other.db_;
            other.db_ = nullptr;
        }
        return *this;
    }
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;
    ~Database() { close(); }

    sqlite3* raw() const { return db_; }
    bool is_open() const { return db_ != nullptr; }

    void exec_script(const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown sqlite error";
            sqlite3_free(err);
            raise(Errc::io, "script failed: " + msg);
        }
    }

private:
    static Database open(const std::filesystem::path& file, int flags) {
        Database d;
        if (sqlite3_open_v2(file.string().c_str(), &d.db_, flags, nullptr) != SQLITE_OK) {
            std::string msg = d.db_ ? sqlite3_errmsg(d.db_) : "out of memory";
            d.close();
            raise(Errc::io, "cannot open database " + file.string() + ": " + msg);
        }
        sqlite3_extended_result_codes(d.db_, 0);
        return d;
    }

    void close() {
        if (db_) {
            sqlite3_close_v2(db_);
            db_ = nullptr;
        }
    }

    sqlite3* db_ = nullptr;
};

// Total mapping from a statement's current-row cell onto the value model.
inline SqlValue canonicalize_value(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER:
            return SqlValue::integer(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return SqlValue::real(sqlite3_column_double(stmt, col));
        case SQLITE_TEXT: {
            const unsigned char* p = sqlite3_column_text(stmt, col);
            const int len = sqlite3_column_bytes(stmt, col);
            return SqlValue::text(std::string(reinterpret_cast<const char*>(p), static_cast<size_t>(len)));
        }
        case SQLITE_BLOB: {
            const void* p = sqlite3_column_blob(stmt, col);
            const int len = sqlite3_column_bytes(stmt, col);
            return SqlValue::blob(p ? std::string(static_cast<const char*>(p), static_cast<size_t>(len))
                                    : std::string());
        }
        case SQLITE_NULL:
        default:
            return SqlValue::null();
    }
}

namespace detail {

inline ExecErrorKind classify_sqlite_error(int rc, const std::string& msg) {
    if (rc == SQLITE_INTERRUPT) return ExecErrorKind::timeout;
    if (msg.find("syntax error") != std::string::npos || msg.find("incomplete input") != std::string::npos)
        return ExecErrorKind::syntax;
    if (msg.find("no such table") != std::string::npos || msg.find("no such column") != std::string::npos ||
        msg.find("has no column") != std::string::npos ||
        msg.find("ambiguous column name") != std::string::npos)
        return ExecErrorKind::schema;
    return ExecErrorKind::other;
}

struct Deadline {
    std::chrono::steady_clock::time_point at;
};

inline int deadline_hook(void* ctx) {
    auto* d = static_cast<Deadline*>(ctx);
    return std::chrono::steady_clock::now() > d->at ? 1 : 0;
}

struct StmtGuard {
    sqlite3_stmt* stmt = nullptr;
    ~StmtGuard() { sqlite3_finalize(stmt); }
};

inline std::string quote_identifier(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

}  // namespace detail

// Runs a single read-only statement and collects its result grid. Write
// statements and multi-statement strings are rejected; wall-clock overrun and
// row-cap overflow come back as errors rather than truncated grids.
inline ExecOutcome execute_query(Database& db, const std::string& sql, const ExecLimits& limits = {}) {
    if (sql.find_first_not_of(" \t\r\n") == std::string::npos)
        return ExecOutcome::fail(ExecErrorKind::syntax, "empty statement");

    sqlite3* handle = db.raw();
    detail::StmtGuard guard;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(handle, sql.c_str(), -1, &guard.stmt, &tail);
    if (rc != SQLITE_OK) {
        const std::string msg = sqlite3_errmsg(handle);
        return ExecOutcome::fail(detail::classify_sqlite_error(rc, msg), msg);
    }
    if (guard.stmt == nullptr)
        return ExecOutcome::fail(ExecErrorKind::syntax, "no executable statement");
    if (tail && std::string_view(tail).find_first_not_of(" \t\r\n;") != std::string_view::npos)
        return ExecOutcome::fail(ExecErrorKind::other, "multiple statements are not allowed");
    if (!sqlite3_stmt_readonly(guard.stmt))
        return ExecOutcome::fail(ExecErrorKind::other, "write statements are rejected");

    detail::Deadline deadline{std::chrono::steady_clock::now() + limits.timeout};
    sqlite3_progress_handler(handle, 200, detail::deadline_hook, &deadline);

    ResultGrid grid;
    const int cols = sqlite3_column_count(guard.stmt);
    for (int j = 0; j < cols; ++j) {
        const char* name = sqlite3_column_name(guard.stmt, j);
        grid.column_names.emplace_back(name ? name : "");
    }

    ExecOutcome result = ExecOutcome::ok(ResultGrid{});
    bool done = false;
    while (!done) {
        rc = sqlite3_step(guard.stmt);
        switch (rc) {
            case SQLITE_ROW: {
                if (grid.rows.size() == limits.row_cap) {
                    result = ExecOutcome::fail(ExecErrorKind::row_cap_exceeded,
                                               "result exceeds row cap of " + std::to_string(limits.row_cap));
                    done = true;
                    break;
                }
                std::vector<SqlValue> row;
                row.reserve(static_cast<size_t>(cols));
                for (int j = 0; j < cols; ++j) row.push_back(canonicalize_value(guard.stmt, j));
                grid.rows.push_back(std::move(row));
                break;
            }
            case SQLITE_DONE:
                result = ExecOutcome::ok(std::move(grid));
                done = true;
                break;
            default: {
                const std::string msg = sqlite3_errmsg(handle);
                result = ExecOutcome::fail(detail::classify_sqlite_error(rc, msg), msg);
                done = true;
                break;
            }
        }
    }

    sqlite3_progress_handler(handle, 0, nullptr, nullptr);
    return result;
}

// Uniform sample of min(k, cardinality) distinct rows, deterministic for a
// fixed seed (reservoir sampling over the table scan).
inline ResultGrid sample_rows(Database& db, const std::string& table, size_t k, uint64_t seed) {
    const std::string sql = "SELECT * FROM " + detail::quote_identifier(table);
    detail::StmtGuard guard;
    if (sqlite3_prepare_v2(db.raw(), sql.c_str(), -1, &guard.stmt, nullptr) != SQLITE_OK)
        raise(Errc::schema, "unknown table \"" + table + "\": " + sqlite3_errmsg(db.raw()));

    ResultGrid grid;
    const int cols = sqlite3_column_count(guard.stmt);
    for (int j = 0; j < cols; ++j) {
        const char* name = sqlite3_column_name(guard.stmt, j);
        grid.column_names.emplace_back(name ? name : "");
    }

    Rng rng(seed);
    size_t seen = 0;
    int rc;
    while ((rc = sqlite3_step(guard.stmt)) == SQLITE_ROW) {
        std::vector<SqlValue> row;
        row.reserve(static_cast<size_t>(cols));
        for (int j = 0; j < cols; ++j) row.push_back(canonicalize_value(guard.stmt, j));
        if (grid.rows.size() < k) {
            grid.rows.push_back(std::move(row));
        } else if (k > 0) {
            const uint64_t slot = rng.next_below(seen + 1);
            if (slot < k) grid.rows[static_cast<size_t>(slot)] = std::move(row);
        }
        ++seen;
    }
    if (rc != SQLITE_DONE)
        raise(Errc::io, "scan of \"" + table + "\" failed: " + std::string(sqlite3_errmsg(db.raw())));
    return grid;
}

}  // namespace sqleval
