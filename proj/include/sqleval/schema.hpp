#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"
#include "sqleval/json.hpp"
#include "sqleval/log.hpp"

namespace sqleval {

struct ColumnDoc {
    std::string name;
    std::string declared_type;
    std::string description;  // may be empty
};

struct TableDoc {
    std::string name;
    std::vector<ColumnDoc> columns;
};

struct SchemaDoc {
    std::vector<TableDoc> tables;
    std::string relationship_notes;  // free text, rendered from validated links

    const TableDoc* find_table(const std::string& name) const {
        for (const auto& t : tables)
            if (t.name == name) return &t;
        return nullptr;
    }
};

namespace detail {

inline std::vector<std::string> list_tables(Database& db) {
    std::vector<std::string> names;
    auto outcome = execute_query(
        db, "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
    if (outcome.is_error()) raise(Errc::io, "cannot list tables: " + outcome.error().message);
    for (const auto& row : outcome.grid().rows) names.push_back(row[0].as_text());
    return names;
}

inline std::vector<ColumnDoc> table_columns(Database& db, const std::string& table) {
    auto outcome = execute_query(db, "PRAGMA table_info(" + quote_identifier(table) + ")");
    if (outcome.is_error()) raise(Errc::io, "table_info failed: " + outcome.error().message);
    std::vector<ColumnDoc> cols;
    for (const auto& row : outcome.grid().rows) {
        // table_info columns: cid, name, type, notnull, dflt_value, pk
        cols.push_back({row[1].as_text(), row[2].as_text(), ""});
    }
    return cols;
}

}  // namespace detail

inline Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) raise(Errc::config, "invalid JSON in " + path.string());
    return j;
}

// Merges the machine schema with human column descriptions from a JSON file
// shaped {table: {column: description}}, plus an optional "_relationships"
// array of {from: "t.c", to: "t.c", note}. References to unknown tables or
// columns are a hard error listing every offender; columns without a
// description get an empty one and a warning.
inline SchemaDoc load_schema_doc(Database& db, const std::filesystem::path& descriptions_path) {
    SchemaDoc doc;
    for (const auto& table : detail::list_tables(db))
        doc.tables.push_back({table, detail::table_columns(db, table)});

    const Json spec = load_json_file(descriptions_path);
    if (!spec.is_object()) raise(Errc::config, descriptions_path.string() + ": top level must be an object");

    std::vector<std::string> offenders;
    auto check_column_ref = [&](const std::string& ref) {
        const auto dot = ref.find('.');
        if (dot == std::string::npos) {
            offenders.push_back(ref + " (expected table.column)");
            return;
        }
        const std::string table = ref.substr(0, dot);
        const std::string column = ref.substr(dot + 1);
        const TableDoc* t = doc.find_table(table);
        if (!t) {
            offenders.push_back(ref + " (unknown table " + table + ")");
            return;
        }
        for (const auto& c : t->columns)
            if (c.name == column) return;
        offenders.push_back(ref + " (unknown column " + column + ")");
    };

    std::ostringstream notes;
    for (const auto& [key, value] : spec.items()) {
        if (key == "_relationships") {
            if (!value.is_array())
                raise(Errc::config, descriptions_path.string() + ": _relationships must be an array");
            for (const auto& rel : value) {
                const std::string from = rel.value("from", "");
                const std::string to = rel.value("to", "");
                check_column_ref(from);
                check_column_ref(to);
                notes << from << " references " << to;
                const std::string note = rel.value("note", "");
                if (!note.empty()) notes << " (" << note << ")";
                notes << "\n";
            }
            continue;
        }
        TableDoc* t = nullptr;
        for (auto& candidate : doc.tables)
            if (candidate.name == key) t = &candidate;
        if (!t) {
            offenders.push_back(key + " (unknown table)");
            continue;
        }
        for (const auto& [col_name, desc] : value.items()) {
            bool found = false;
            for (auto& c : t->columns) {
                if (c.name == col_name) {
                    c.description = desc.get<std::string>();
                    found = true;
                }
            }
            if (!found) offenders.push_back(key + "." + col_name + " (unknown column)");
        }
    }

    if (!offenders.empty()) {
        std::string msg = "schema description references unknown objects:";
        for (const auto& o : offenders) msg += " " + o + ";";
        raise(Errc::config, msg);
    }

    doc.relationship_notes = notes.str();

    for (const auto& t : doc.tables)
        for (const auto& c : t.columns)
            if (c.description.empty())
                log_warn("no description for " + t.name + "." + c.name);

    return doc;
}

// Prompt-facing rendering of one table's documentation.
inline std::string render_table_text(const TableDoc& t) {
    std::ostringstream out;
    out << "Table " << t.name << " has the following columns:\n";
    for (const auto& c : t.columns) {
        out << "- " << c.name << " (" << c.declared_type << ")";
        if (!c.description.empty()) out << ": " << c.description;
        out << "\n";
    }
    return out.str();
}

inline std::string render_schema_text(const SchemaDoc& doc) {
    std::ostringstream out;
    for (const auto& t : doc.tables) out << render_table_text(t) << "\n";
    if (!doc.relationship_notes.empty()) out << "Relationships:\n" << doc.relationship_notes;
    return out.str();
}

}  // namespace sqleval
