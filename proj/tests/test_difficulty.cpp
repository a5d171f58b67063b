#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "sqleval/difficulty.hpp"
#include "sqleval/json.hpp"
#include "sqleval/tokenize.hpp"

#include "helpers.hpp"

using namespace sqleval;

namespace {

size_t count_keyword(const SqlTokenStream& s, const std::string& kw) {
    size_t n = 0;
    for (const auto& t : s.tokens)
        if (t.kind == TokKind::keyword && t.text == kw) ++n;
    return n;
}

}  // namespace

TEST_CASE("tokenizer excludes literals and comments from keywords") {
    const auto s = tokenize_sql("SELECT * FROM t WHERE note = 'ORDER BY'");
    CHECK(count_keyword(s, "ORDER BY") == 0);
    CHECK(count_keyword(s, "WHERE") == 1);

    const auto c = tokenize_sql("-- ORDER BY plans\nSELECT a FROM t /* GROUP BY b */");
    CHECK(count_keyword(c, "ORDER BY") == 0);
    CHECK(count_keyword(c, "GROUP BY") == 0);
    CHECK(count_keyword(c, "SELECT") == 1);
}

TEST_CASE("tokenizer compounds GROUP BY and ORDER BY across whitespace") {
    const auto s = tokenize_sql("select a from t group   by a");
    CHECK(count_keyword(s, "GROUP BY") == 1);

    const auto nl = tokenize_sql("select a from t order\n\t by a");
    CHECK(count_keyword(nl, "ORDER BY") == 1);

    // GROUP not followed by BY is no keyword at all
    const auto bare = tokenize_sql("select \"group\" from grouping");
    CHECK(count_keyword(bare, "GROUP BY") == 0);
}

TEST_CASE("tokenizer tracks sub-query depth") {
    const auto s = tokenize_sql("SELECT x FROM (SELECT x FROM t)");
    size_t selects = 0, nested = 0;
    for (const auto& t : s.tokens)
        if (t.kind == TokKind::keyword && t.text == "SELECT") {
            ++selects;
            if (t.depth > 0) ++nested;
        }
    CHECK(selects == 2);
    CHECK(nested == 1);
}

TEST_CASE("tokenizer treats quoted segments as identifiers") {
    const auto s = tokenize_sql("SELECT \"where\" FROM `union` WHERE x = 1");
    CHECK(count_keyword(s, "WHERE") == 1);
    CHECK(count_keyword(s, "UNION") == 0);
}

TEST_CASE("tokenizer rejects unbalanced quotes") {
    CHECK_THROWS_AS(tokenize_sql("SELECT 'oops FROM t"), Error);
    CHECK_THROWS_AS(tokenize_sql("SELECT \"oops FROM t"), Error);
}

TEST_CASE("JOIN variants collapse onto one JOIN keyword") {
    for (const std::string sql : {
             "SELECT * FROM a JOIN b ON a.x = b.x",
             "SELECT * FROM a LEFT JOIN b ON a.x = b.x",
             "SELECT * FROM a INNER JOIN b ON a.x = b.x",
             "SELECT * FROM a CROSS JOIN b",
         }) {
        const auto counts = component_counts(tokenize_sql(sql));
        CHECK(counts.comp1 == 1);
    }
}

TEST_CASE("component_counts indicator sums") {
    CHECK(component_counts(tokenize_sql("SELECT a FROM t")).comp1 == 0);

    const auto c1 = component_counts(tokenize_sql("SELECT a FROM t WHERE x>1 GROUP BY a ORDER BY a"));
    CHECK(c1.comp1 == 3);
    CHECK(c1.comp2 == 0);
    CHECK(c1.other == 0);

    const auto c2 = component_counts(tokenize_sql("SELECT a FROM t UNION SELECT a FROM u"));
    CHECK(c2.comp1 == 0);
    CHECK(c2.comp2 == 1);
    CHECK(c2.other == 1);

    // presence vs occurrence
    const auto presence = component_counts(tokenize_sql("SELECT a FROM t WHERE x=1 OR y=2 OR z=3"));
    CHECK(presence.comp1 == 2);  // WHERE + OR
    const auto occ =
        component_counts(tokenize_sql("SELECT a FROM t WHERE x=1 OR y=2 OR z=3"), KeywordCountMode::occurrence);
    CHECK(occ.comp1 == 3);  // WHERE + OR + OR
}

TEST_CASE("classify anchors and ordering") {
    CHECK(classify({0, 0, 0}) == DifficultyLabel::easy);
    CHECK(classify({1, 0, 0}) == DifficultyLabel::easy);
    CHECK(classify({2, 0, 0}) == DifficultyLabel::medium);
    CHECK(classify({3, 0, 0}) == DifficultyLabel::hard);
    CHECK(classify({4, 0, 0}) == DifficultyLabel::extra);
    CHECK(classify({0, 0, 1}) == DifficultyLabel::hard);
    CHECK(classify({0, 1, 1}) == DifficultyLabel::extra);
}

TEST_CASE("classify is total and first-match-consistent over the component cube") {
    // independent encoding of the rule table, evaluated row by row
    auto reference = [](int c1, int c2, int other) {
        if (c1 <= 1 && c2 == 0 && other == 0) return DifficultyLabel::easy;
        const bool med = (c1 <= 1 && c2 <= 2 && other == 0) || (c1 <= 2 && c2 <= 1 && other == 0);
        if (med) return DifficultyLabel::medium;
        const bool hard = (c1 <= 2 && c2 > 2 && other == 0) || (c1 > 2 && c1 <= 3 && c2 <= 2 && other == 0) ||
                          (c1 <= 1 && c2 == 0 && other <= 1);
        if (hard) return DifficultyLabel::hard;
        return DifficultyLabel::extra;
    };

    size_t cells = 0;
    for (int c1 = 0; c1 <= 7; ++c1)
        for (int c2 = 0; c2 <= 3; ++c2)
            for (int other = 0; other <= 3; ++other) {
                ++cells;
                const DifficultyLabel got = classify({c1, c2, other});
                REQUIRE(got == reference(c1, c2, other));
                REQUIRE(got >= DifficultyLabel::easy);
                REQUIRE(got <= DifficultyLabel::extra);
            }
    CHECK(cells == 128);
}

TEST_CASE("labeled fixture queries classify exactly") {
    std::ifstream in(testutil::fixtures_dir() / "difficulty_cases.jsonl");
    REQUIRE(in.good());
    std::string line;
    size_t checked = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Json j = Json::parse(line);
        const auto got = classify_sql(j["sql"].get<std::string>());
        INFO(j["sql"].get<std::string>());
        CHECK(difficulty_name(got) == j["expected"].get<std::string>());
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("literal immunity holds for every comp1 keyword") {
    for (const std::string kw : {"WHERE", "GROUP BY", "ORDER BY", "LIMIT", "JOIN", "OR", "LIKE"}) {
        const std::string sql = "SELECT a FROM t WHERE note = '" + kw + "'";
        const auto counts = component_counts(tokenize_sql(sql));
        INFO(kw);
        CHECK(counts.comp1 == 1);  // only the real WHERE
    }
}

TEST_CASE("syntax_usage presence statistics") {
    const std::vector<std::string> corpus = {
        "SELECT shop, COUNT(*) FROM tickets GROUP BY shop",
        "SELECT shop FROM tickets GROUP BY shop HAVING COUNT(*) > 1",
        "SELECT DISTINCT station FROM aircraft_layovers ORDER BY station",
        "SELECT * FROM tickets WHERE aircraft_id IN (SELECT aircraft_id FROM aircraft_layovers)",
    };
    const SyntaxUsageStats stats = syntax_usage(corpus);
    REQUIRE(stats.corpus_size == 4);

    auto lookup = [&](const std::string& name) -> ConstructUsage {
        for (const auto& c : stats.constructs)
            if (c.construct == name) return c;
        FAIL("missing construct " + name);
        return {};
    };
    CHECK(lookup("GROUP BY").count == 2);
    CHECK(lookup("GROUP BY").percentage == Catch::Approx(50.0));
    CHECK(lookup("ORDER BY").count == 1);
    CHECK(lookup("SUB-QUERY").count == 1);
    CHECK(lookup("HAVING").count == 1);
    CHECK(lookup("DISTINCT").count == 1);
    CHECK(lookup("CASE").count == 0);
    CHECK(lookup("CASE").percentage == 0.0);
    CHECK(lookup("WITH").count == 0);
    CHECK(lookup("JOIN").count == 0);
}

TEST_CASE("classification pipeline is deterministic") {
    const std::string sql = "SELECT a FROM t WHERE x = 1 GROUP BY a";
    CHECK(classify_sql(sql) == classify_sql(sql));
}
