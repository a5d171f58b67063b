#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/tokenize.hpp"

namespace sqleval {

struct ComponentCounts {
    int comp1 = 0;  // WHERE, GROUP BY, ORDER BY, LIMIT, JOIN, OR, LIKE
    int comp2 = 0;  // EXCEPT, UNION, INTERSECT
    int other = 0;  // repeated SELECT / WHERE / GROUP BY
};

enum class DifficultyLabel { easy, medium, hard, extra };

inline const char* difficulty_name(DifficultyLabel d) {
    switch (d) {
        case DifficultyLabel::easy: return "easy";
        case DifficultyLabel::medium: return "medium";
        case DifficultyLabel::hard: return "hard";
        case DifficultyLabel::extra: return "extra";
    }
    return "extra";
}

inline DifficultyLabel difficulty_from_name(std::string_view name) {
    if (name == "easy") return DifficultyLabel::easy;
    if (name == "medium") return DifficultyLabel::medium;
    if (name == "hard") return DifficultyLabel::hard;
    if (name == "extra") return DifficultyLabel::extra;
    raise(Errc::corrupt_dataset, "unknown difficulty label: " + std::string(name));
}

enum class KeywordCountMode {
    presence,    // each keyword family member contributes 0 or 1
    occurrence,  // Spider-lineage behavior: every occurrence counts
};

inline ComponentCounts component_counts(const SqlTokenStream& stream,
                                        KeywordCountMode mode = KeywordCountMode::presence) {
    int where = 0, group_by = 0, order_by = 0, limit = 0, join = 0, kw_or = 0, like = 0;
    int except_ = 0, union_ = 0, intersect = 0, select = 0;
    for (const auto& t : stream.tokens) {
        if (t.kind != TokKind::keyword) continue;
        if (t.text == "WHERE") ++where;
        else if (t.text == "GROUP BY") ++group_by;
        else if (t.text == "ORDER BY") ++order_by;
        else if (t.text == "LIMIT") ++limit;
        else if (t.text == "JOIN") ++join;
        else if (t.text == "OR") ++kw_or;
        else if (t.text == "LIKE") ++like;
        else if (t.text == "EXCEPT") ++except_;
        else if (t.text == "UNION") ++union_;
        else if (t.text == "INTERSECT") ++intersect;
        else if (t.text == "SELECT") ++select;
    }

    auto tally = [&](int n) {
        if (mode == KeywordCountMode::presence) return n > 0 ? 1 : 0;
        return n;
    };

    ComponentCounts c;
    c.comp1 = tally(where) + tally(group_by) + tally(order_by) + tally(limit) + tally(join) +
              tally(kw_or) + tally(like);
    c.comp2 = tally(except_) + tally(union_) + tally(intersect);
    c.other = (select > 1 ? 1 : 0) + (where > 1 ? 1 : 0) + (group_by > 1 ? 1 : 0);
    return c;
}

// Rule rows evaluated in order easy -> medium -> hard, first match wins; the
// easy region is a subset of medium's, so ordering is significant.
inline DifficultyLabel classify(ComponentCounts c) {
    if (c.comp1 <= 1 && c.comp2 == 0 && c.other == 0) return DifficultyLabel::easy;
    if ((c.comp1 <= 1 && c.comp2 <= 2 && c.other == 0) || (c.comp1 <= 2 && c.comp2 <= 1 && c.other == 0))
        return DifficultyLabel::medium;
    if ((c.comp1 <= 2 && c.comp2 > 2 && c.other == 0) ||
        (c.comp1 > 2 && c.comp1 <= 3 && c.comp2 <= 2 && c.other == 0) ||
        (c.comp1 <= 1 && c.comp2 == 0 && c.other <= 1))
        return DifficultyLabel::hard;
    return DifficultyLabel::extra;
}

inline DifficultyLabel classify_sql(std::string_view sql,
                                    KeywordCountMode mode = KeywordCountMode::presence) {
    return classify(component_counts(tokenize_sql(sql), mode));
}

struct ConstructUsage {
    std::string construct;
    size_t count = 0;
    double percentage = 0.0;
};

struct SyntaxUsageStats {
    size_t corpus_size = 0;
    std::vector<ConstructUsage> constructs;
};

// Presence counts per query (a construct counts once per query no matter how
// often it repeats). Sub-query means a SELECT at parenthesis depth > 0.
inline SyntaxUsageStats syntax_usage(std::span<const std::string> corpus) {
    if (corpus.empty()) raise(Errc::usage, "syntax_usage requires a non-empty corpus");

    static const std::vector<std::string> order = {
        "GROUP BY", "ORDER BY", "JOIN", "SUB-QUERY", "HAVING", "DISTINCT", "CASE", "WITH",
    };
    std::vector<size_t> counts(order.size(), 0);

    for (const auto& sql : corpus) {
        const SqlTokenStream stream = tokenize_sql(sql);
        std::vector<bool> seen(order.size(), false);
        for (const auto& t : stream.tokens) {
            if (t.kind != TokKind::keyword) continue;
            if (t.text == "SELECT" && t.depth > 0) seen[3] = true;
            for (size_t k = 0; k < order.size(); ++k)
                if (k != 3 && t.text == order[k]) seen[k] = true;
        }
        for (size_t k = 0; k < order.size(); ++k)
            if (seen[k]) ++counts[k];
    }

    SyntaxUsageStats stats;
    stats.corpus_size = corpus.size();
    for (size_t k = 0; k < order.size(); ++k) {
        stats.constructs.push_back(
            {order[k], counts[k], 100.0 * static_cast<double>(counts[k]) / static_cast<double>(corpus.size())});
    }
    return stats;
}

}  // namespace sqleval
