#pragma once

// Shared test scaffolding: temp directories, the fixture database, random
// grid generation for property tests.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sqleval/exec.hpp"
#include "sqleval/grid.hpp"
#include "sqleval/hash.hpp"
#include "sqleval/value.hpp"

namespace testutil {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return fs::path(SQLEVAL_FIXTURES_DIR); }

class TempDir {
public:
    TempDir() {
        auto base = fs::temp_directory_path() / "sqleval_test_XXXXXX";
        std::string tmpl = base.string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

// Creates the bundled two-table MRO database at the given path.
inline void make_fixture_db(const fs::path& db_path) {
    auto db = sqleval::Database::open_read_write(db_path);
    db.exec_script(read_file(fixtures_dir() / "mro_fixture.sql"));
}

// 4-symbol alphabet exercising NULL handling and integer/real cross-equality.
inline sqleval::SqlValue alphabet_value(uint64_t pick) {
    switch (pick % 4) {
        case 0: return sqleval::SqlValue::null();
        case 1: return sqleval::SqlValue::integer(1);
        case 2: return sqleval::SqlValue::real(2.5);
        default: return sqleval::SqlValue::text("x");
    }
}

inline sqleval::ResultGrid random_grid(sqleval::Rng& rng, size_t max_rows = 6, size_t max_cols = 6,
                                       bool allow_empty = true) {
    const size_t lo = allow_empty ? 0 : 1;
    const size_t rows = lo + rng.next_below(max_rows - lo + 1);
    const size_t cols = lo + rng.next_below(max_cols - lo + 1);
    sqleval::ResultGrid g;
    for (size_t j = 0; j < cols; ++j) g.column_names.push_back("c" + std::to_string(j));
    for (size_t r = 0; r < rows; ++r) {
        std::vector<sqleval::SqlValue> row;
        for (size_t j = 0; j < cols; ++j) row.push_back(alphabet_value(rng.next()));
        g.rows.push_back(std::move(row));
    }
    return g;
}

}  // namespace testutil
