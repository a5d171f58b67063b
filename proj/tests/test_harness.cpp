#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <set>

#include "sqleval/harness.hpp"

#include "helpers.hpp"

using namespace sqleval;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    testutil::TempDir tmp;
    fs::path db_path;
    Database db;
    SchemaDoc schema;
    std::vector<DatasetRecord> dataset;

    Fixture() {
        db_path = tmp.path() / "mro.sqlite";
        testutil::make_fixture_db(db_path);
        db = Database::open_read_only(db_path);
        schema = load_schema_doc(db, testutil::fixtures_dir() / "schema_descriptions.json");
        dataset = {
            record("SELECT COUNT(*) FROM tickets", "How many tickets are there?", 1),
            record("SELECT shop, COUNT(*) AS n FROM tickets GROUP BY shop ORDER BY n DESC LIMIT 1",
                   "Which shop has the most tickets?", 1),
            record("SELECT DISTINCT station FROM aircraft_layovers", "Which stations appear?", 4),
            record("SELECT COUNT(*) FROM tickets", "Total ticket count?", 1),  // duplicate SQL group
        };
    }

    static DatasetRecord record(const std::string& sql, const std::string& question, int64_t rows) {
        DatasetRecord r;
        r.id = dataset_record_id(sql, question);
        r.question = question;
        r.sql_query = sql;
        r.answer = "answer";
        r.difficulty = classify_sql(sql);
        r.gt_row_count = rows;
        r.created_at = "2026-01-01T00:00:00Z";
        return r;
    }
};

// Deterministic scripted model for harness tests.
class ScriptedModel : public SqlModel {
public:
    explicit ScriptedModel(std::function<std::string(const DatasetRecord&)> fn) : fn_(std::move(fn)) {}
    std::string name() const override { return "scripted"; }
    std::string complete(const std::string&, const DatasetRecord& rec) override { return fn_(rec); }

private:
    std::function<std::string(const DatasetRecord&)> fn_;
};

}  // namespace

TEST_CASE("build_sql_gen_prompt structure") {
    Fixture fx;

    const std::string zero = build_sql_gen_prompt(fx.schema, "How many open tickets?", PromptMode::zero_shot());
    CHECK(zero.find("Table tickets has the following columns") != std::string::npos);
    CHECK(zero.find("tickets.aircraft_id references aircraft_layovers.aircraft_id") != std::string::npos);
    CHECK(zero.find("{\"reasoning\": <str>, \"sql\": <str>}") != std::string::npos);
    CHECK(zero.find("# Question\nHow many open tickets?") != std::string::npos);
    CHECK(zero.find("# Examples") == std::string::npos);

    const auto examples = load_few_shot_examples(testutil::fixtures_dir() / "few_shot_examples.json");
    REQUIRE(examples.size() == 4);
    const std::string few =
        build_sql_gen_prompt(fx.schema, "How many open tickets?", PromptMode::few_shot(examples));
    CHECK(few.find("# Examples") != std::string::npos);
    size_t blocks = 0;
    for (size_t pos = 0; (pos = few.find("Question: ", pos)) != std::string::npos; pos += 10) ++blocks;
    CHECK(blocks == 4);
    // examples precede the target question
    CHECK(few.rfind("# Question") > few.find("# Examples"));

    SECTION("embedded quotes stay intact and example JSON stays parseable") {
        const std::string tricky = build_sql_gen_prompt(
            fx.schema, "Shops named \"Aero\"?", PromptMode::few_shot(examples));
        CHECK(tricky.find("Shops named \"Aero\"?") != std::string::npos);
        const auto payload = extract_json_payload(tricky.substr(0, tricky.find("# Question")));
        CHECK(payload.contains("sql"));  // last example block parses as JSON
    }

    SECTION("few_shot requires exactly 4 examples") {
        CHECK_THROWS_AS(PromptMode::few_shot({examples[0]}), Error);
    }
}

TEST_CASE("parse_sql_response") {
    const SqlResponse ok = parse_sql_response(R"({"reasoning": "think", "sql": "SELECT 1"})");
    CHECK(ok.reasoning == "think");
    CHECK(ok.sql == "SELECT 1");

    const SqlResponse fenced = parse_sql_response("blah blah\n```json\n{\"sql\": \"SELECT 2\"}\n```\n");
    CHECK(fenced.sql == "SELECT 2");

    for (const std::string bad : {R"({"reasoning": "no sql"})", R"({"sql": "   "})", "prose only"}) {
        try {
            parse_sql_response(bad);
            FAIL("expected no_sql for: " + bad);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_sql);
        }
    }
}

TEST_CASE("evaluate_dataset with the echo oracle is perfect") {
    Fixture fx;
    EchoModel echo;
    const auto records = evaluate_dataset(fx.dataset, echo, fx.db, PromptMode::zero_shot(), fx.schema);

    REQUIRE(records.size() == fx.dataset.size());
    for (const auto& r : records) {
        CHECK(r.score.soft_f1 == 1.0);
        CHECK(r.score.exact);
        CHECK_FALSE(r.score.exec_error);
        CHECK(r.predicted_sql.has_value());
        CHECK(r.mode == "zero");
        CHECK(r.model == "mock-echo");
    }

    const ReportTable report = build_report(records, fx.dataset, "abc123");
    CHECK(report.overall.mean_soft_f1 == Approx(1.0));
    CHECK(report.overall.mean_accuracy == Approx(1.0));
    CHECK(report.overall.error_count == 0);
    CHECK(report.overall.group_count == 3);  // 4 records, one duplicated SQL
}

TEST_CASE("evaluate_dataset scores a constant model and prose model") {
    Fixture fx;

    SECTION("constant SELECT 1 executes but is inexact") {
        ScriptedModel constant([](const DatasetRecord&) {
            return std::string(R"({"reasoning": "", "sql": "SELECT 1"})");
        });
        const auto records = evaluate_dataset(fx.dataset, constant, fx.db, PromptMode::zero_shot(), fx.schema);
        for (const auto& r : records) {
            CHECK_FALSE(r.score.exec_error);
            CHECK_FALSE(r.score.exact);  // no fixture answer is literally 1
        }
    }

    SECTION("prose output is an execution error on every record") {
        ScriptedModel prose([](const DatasetRecord&) { return std::string("I refuse to answer in JSON"); });
        const auto records = evaluate_dataset(fx.dataset, prose, fx.db, PromptMode::zero_shot(), fx.schema);
        for (const auto& r : records) {
            CHECK(r.score.exec_error);
            CHECK(r.score.soft_f1 == 0.0);
            CHECK_FALSE(r.predicted_sql.has_value());
        }
        const ReportTable report = build_report(records, fx.dataset, "x");
        CHECK(report.overall.error_count == fx.dataset.size());
    }

    SECTION("k unparseable of n yields error_count == k") {
        ScriptedModel flaky([](const DatasetRecord& rec) -> std::string {
            if (rec.question.find("station") != std::string::npos) return "no json";
            return Json{{"reasoning", ""}, {"sql", rec.sql_query}}.dump();
        });
        const auto records = evaluate_dataset(fx.dataset, flaky, fx.db, PromptMode::zero_shot(), fx.schema);
        size_t errors = 0;
        for (const auto& r : records)
            if (r.score.exec_error) ++errors;
        CHECK(errors == 1);
        const ReportTable report = build_report(records, fx.dataset, "x");
        CHECK(report.overall.error_count == 1);
    }
}

TEST_CASE("evaluate_dataset aborts when ground truth cannot execute") {
    Fixture fx;
    auto corrupt = fx.dataset;
    corrupt[0].sql_query = "SELECT * FROM table_that_vanished";
    EchoModel echo;
    CHECK_THROWS_AS(evaluate_dataset(corrupt, echo, fx.db, PromptMode::zero_shot(), fx.schema), Error);
}

TEST_CASE("checkpoint resume reproduces an uninterrupted run") {
    Fixture fx;
    // widen the dataset so checkpoint cadence matters
    std::vector<DatasetRecord> dataset = fx.dataset;
    for (int i = 0; i < 20; ++i)
        dataset.push_back(Fixture::record("SELECT COUNT(*) FROM aircraft_layovers",
                                          "layover count variant " + std::to_string(i), 1));

    EchoModel echo;
    const auto uninterrupted =
        evaluate_dataset(dataset, echo, fx.db, PromptMode::zero_shot(), fx.schema, {});

    EvalOptions opts;
    opts.checkpoint_path = fx.tmp.path() / "run.checkpoint.jsonl";
    opts.checkpoint_every = 5;
    opts.stop_after = 7;  // simulate dying mid-run, past one checkpoint boundary
    const auto partial = evaluate_dataset(dataset, echo, fx.db, PromptMode::zero_shot(), fx.schema, opts);
    CHECK(partial.size() == 7);
    REQUIRE(fs::exists(opts.checkpoint_path));

    opts.stop_after = 0;
    const auto resumed = evaluate_dataset(dataset, echo, fx.db, PromptMode::zero_shot(), fx.schema, opts);
    REQUIRE(resumed.size() == uninterrupted.size());
    for (size_t i = 0; i < resumed.size(); ++i) {
        CHECK(resumed[i].record_id == uninterrupted[i].record_id);
        CHECK(resumed[i].score.soft_f1 == uninterrupted[i].score.soft_f1);
        CHECK(resumed[i].score.exact == uninterrupted[i].score.exact);
        CHECK(resumed[i].score.exec_error == uninterrupted[i].score.exec_error);
        CHECK(resumed[i].predicted_sql == uninterrupted[i].predicted_sql);
    }
}

TEST_CASE("build_report partitions by difficulty and honors grouping") {
    Fixture fx;

    // two records sharing one SQL scoring 1.0 and 0.0, plus one unique at 0.5
    std::vector<DatasetRecord> dataset = {
        Fixture::record("SELECT a FROM t", "q1", 1),
        Fixture::record("select a from t", "q2", 1),
        Fixture::record("SELECT b FROM t", "q3", 1),
    };
    std::vector<EvalRecord> records(3);
    for (size_t i = 0; i < 3; ++i) {
        records[i].record_id = dataset[i].id;
        records[i].difficulty = DifficultyLabel::easy;
        records[i].mode = "zero";
        records[i].model = "m";
    }
    records[0].score = {1.0, true, false};
    records[1].score = {0.0, false, false};
    records[2].score = {0.5, false, false};

    const ReportTable grouped = build_report(records, dataset, "h");
    CHECK(grouped.overall.group_count == 2);
    CHECK(grouped.overall.mean_soft_f1 == Approx(0.5));

    const ReportTable raw = build_report(records, dataset, "h", Aggregation::raw_mean);
    CHECK(raw.overall.mean_soft_f1 == Approx(0.5));
    CHECK(raw.overall.group_count == 3);

    SECTION("difficulty partitions cover exactly the labels present") {
        Fixture fx2;
        EchoModel echo;
        const auto eval = evaluate_dataset(fx2.dataset, echo, fx2.db, PromptMode::zero_shot(), fx2.schema);
        const ReportTable report = build_report(eval, fx2.dataset, "h");
        std::set<DifficultyLabel> expected;
        for (const auto& d : fx2.dataset) expected.insert(d.difficulty);
        REQUIRE(report.by_difficulty.size() == expected.size());
        for (const auto& [label, agg] : report.by_difficulty) {
            CHECK(expected.count(label) == 1);
            CHECK(agg.mean_soft_f1 == Approx(1.0));
        }
    }

    SECTION("aggregation commutes with record order") {
        auto shuffled = records;
        std::swap(shuffled[0], shuffled[2]);
        const ReportTable again = build_report(shuffled, dataset, "h");
        CHECK(again.overall.mean_soft_f1 == Approx(grouped.overall.mean_soft_f1));
        CHECK(again.overall.group_count == grouped.overall.group_count);
    }
}

TEST_CASE("render_report formats") {
    Fixture fx;
    EchoModel echo;
    const auto eval = evaluate_dataset(fx.dataset, echo, fx.db, PromptMode::zero_shot(), fx.schema);
    const ReportTable report = build_report(eval, fx.dataset, "deadbeef");

    SECTION("json renders percentages and re-parses identically") {
        const std::string rendered = render_report(report, ReportFormat::json);
        const Json j = Json::parse(rendered);
        CHECK(j["overall"]["soft_f1"] == 100.0);
        CHECK(j["overall"]["accuracy"] == 100.0);
        CHECK(j["overall"]["error_count"] == 0);
        CHECK(j["metadata"]["dataset_hash"] == "deadbeef");
        // re-render from the parsed structure: byte-identical
        CHECK(Json::parse(render_report(report, ReportFormat::json)) == j);
    }

    SECTION("csv has the fixed header and one row per partition") {
        const std::string csv = render_report(report, ReportFormat::csv);
        CHECK(csv.rfind("model,mode,partition,soft_f1,accuracy,error_count,groups\n", 0) == 0);
        size_t lines = 0;
        for (char c : csv)
            if (c == '\n') ++lines;
        CHECK(lines == 1 + 1 + report.by_difficulty.size());  // header + overall + partitions
        CHECK(csv.find("mock-echo,zero,overall,100.0,100.0,0,3") != std::string::npos);
    }

    SECTION("markdown includes one row per difficulty present") {
        const std::string md = render_report(report, ReportFormat::markdown);
        CHECK(md.find("| Soft Execution F1 | 100.0 |") != std::string::npos);
        for (const auto& [label, agg] : report.by_difficulty)
            CHECK(md.find("| " + std::string(difficulty_name(label)) + " | ") != std::string::npos);
    }
}
