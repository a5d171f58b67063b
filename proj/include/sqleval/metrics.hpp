#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sqleval/diversity.hpp"
#include "sqleval/error.hpp"
#include "sqleval/grid.hpp"
#include "sqleval/value.hpp"

namespace sqleval {

struct PairScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline double harmonic_f1(double p, double r) {
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

// Membership F1 between one ground-truth column and one predicted column.
// Precision: fraction of predicted cells whose value occurs anywhere in the
// ground-truth column; recall mirrors it. Conventions at the undefined edges:
// both columns empty -> perfect, exactly one empty -> zero.
inline PairScore column_pair_f1(std::span<const SqlValue> g_col, std::span<const SqlValue> p_col) {
    if (g_col.empty() && p_col.empty()) return {1.0, 1.0, 1.0};
    if (g_col.empty() || p_col.empty()) return {0.0, 0.0, 0.0};

    auto occurs_in = [](const SqlValue& v, std::span<const SqlValue> col) {
        for (const auto& c : col)
            if (values_equal(v, c)) return true;
        return false;
    };

    size_t p_hits = 0;
    for (const auto& v : p_col)
        if (occurs_in(v, g_col)) ++p_hits;
    size_t r_hits = 0;
    for (const auto& v : g_col)
        if (occurs_in(v, p_col)) ++r_hits;

    PairScore s;
    s.precision = static_cast<double>(p_hits) / static_cast<double>(p_col.size());
    s.recall = static_cast<double>(r_hits) / static_cast<double>(g_col.size());
    s.f1 = harmonic_f1(s.precision, s.recall);
    return s;
}

struct SoftF1Breakdown {
    std::vector<std::vector<double>> pair_f1;  // [n][t], n over ground-truth columns
    double column_precision = 0.0;
    double column_recall = 0.0;
    double final_f1 = 0.0;
};

// Graded informational-overlap score between two result grids. Each column
// pair gets a membership F1; each side then keeps its best match, and the two
// column-level means combine as a harmonic mean. Degenerate shapes: both grids
// column-free -> 1, exactly one column-free -> 0.
inline SoftF1Breakdown soft_execution_f1(const ResultGrid& g, const ResultGrid& p) {
    const size_t n_cols = g.col_count();
    const size_t t_cols = p.col_count();

    SoftF1Breakdown out;
    if (n_cols == 0 && t_cols == 0) {
        out.column_precision = 1.0;
        out.column_recall = 1.0;
        out.final_f1 = 1.0;
        return out;
    }
    if (n_cols == 0 || t_cols == 0) return out;

    std::vector<std::vector<SqlValue>> g_cols(n_cols), p_cols(t_cols);
    for (size_t n = 0; n < n_cols; ++n) g_cols[n] = g.column(n);
    for (size_t t = 0; t < t_cols; ++t) p_cols[t] = p.column(t);

    out.pair_f1.assign(n_cols, std::vector<double>(t_cols, 0.0));
    for (size_t n = 0; n < n_cols; ++n)
        for (size_t t = 0; t < t_cols; ++t)
            out.pair_f1[n][t] = column_pair_f1(g_cols[n], p_cols[t]).f1;

    double precision_sum = 0.0;
    for (size_t t = 0; t < t_cols; ++t) {
        double best = 0.0;
        for (size_t n = 0; n < n_cols; ++n) best = std::max(best, out.pair_f1[n][t]);
        precision_sum += best;
    }
    double recall_sum = 0.0;
    for (size_t n = 0; n < n_cols; ++n) {
        double best = 0.0;
        for (size_t t = 0; t < t_cols; ++t) best = std::max(best, out.pair_f1[n][t]);
        recall_sum += best;
    }

    out.column_precision = precision_sum / static_cast<double>(t_cols);
    out.column_recall = recall_sum / static_cast<double>(n_cols);
    out.final_f1 = harmonic_f1(out.column_precision, out.column_recall);
    return out;
}

namespace detail {

inline bool columns_identical(const ResultGrid& a, size_t ja, const ResultGrid& b, size_t jb) {
    for (size_t r = 0; r < a.row_count(); ++r)
        if (!values_equal(a.rows[r][ja], b.rows[r][jb])) return false;
    return true;
}

}  // namespace detail

// Strict binary metric: dimensions must match and a one-to-one correspondence
// must pair every predicted column with a ground-truth column that is
// value-identical in the same row order. Column equality is transitive, so the
// correspondence exists exactly when the equality-class size multisets agree.
inline bool execution_accuracy(const ResultGrid& g, const ResultGrid& p) {
    if (g.row_count() != p.row_count() || g.col_count() != p.col_count()) return false;

    const size_t n_cols = g.col_count();
    std::vector<size_t> class_rep;     // representative column index in g
    std::vector<size_t> class_size_g;  // members among g's columns
    std::vector<size_t> class_size_p;  // members among p's columns

    for (size_t j = 0; j < n_cols; ++j) {
        bool placed = false;
        for (size_t c = 0; c < class_rep.size() && !placed; ++c) {
            if (detail::columns_identical(g, j, g, class_rep[c])) {
                ++class_size_g[c];
                placed = true;
            }
        }
        if (!placed) {
            class_rep.push_back(j);
            class_size_g.push_back(1);
            class_size_p.push_back(0);
        }
    }

    for (size_t j = 0; j < n_cols; ++j) {
        bool placed = false;
        for (size_t c = 0; c < class_rep.size() && !placed; ++c) {
            if (detail::columns_identical(p, j, g, class_rep[c])) {
                ++class_size_p[c];
                placed = true;
            }
        }
        if (!placed) return false;  // predicted column matches nothing in ground truth
    }

    for (size_t c = 0; c < class_rep.size(); ++c)
        if (class_size_g[c] != class_size_p[c]) return false;
    return true;
}

struct EvalScore {
    double soft_f1 = 0.0;
    bool exact = false;
    bool exec_error = false;
};

// Scores one prediction against pre-validated ground truth. A prediction that
// failed to execute contributes zero soft F1 and counts toward the error tally.
inline EvalScore score_prediction(const ExecOutcome& gt, const ExecOutcome& pred) {
    if (gt.is_error())
        raise(Errc::corrupt_dataset, "ground-truth SQL failed to execute: " + gt.error().message);
    if (pred.is_error()) return {0.0, false, true};
    EvalScore s;
    s.soft_f1 = soft_execution_f1(gt.grid(), pred.grid()).final_f1;
    s.exact = execution_accuracy(gt.grid(), pred.grid());
    s.exec_error = false;
    return s;
}

struct ScoredSql {
    std::string gt_sql;
    EvalScore score;
};

struct AggregateReport {
    double mean_soft_f1 = 0.0;
    double mean_accuracy = 0.0;
    size_t error_count = 0;
    size_t group_count = 0;
};

enum class Aggregation {
    grouped_by_sql,  // average within identical-SQL groups first, then across groups
    raw_mean,        // plain mean over records
};

inline AggregateReport aggregate_by_group(std::span<const ScoredSql> records,
                                          Aggregation mode = Aggregation::grouped_by_sql) {
    if (records.empty()) raise(Errc::usage, "aggregate_by_group requires at least one record");

    AggregateReport report;
    for (const auto& r : records)
        if (r.score.exec_error) ++report.error_count;

    if (mode == Aggregation::raw_mean) {
        double f1 = 0.0, acc = 0.0;
        for (const auto& r : records) {
            f1 += r.score.soft_f1;
            acc += r.score.exact ? 1.0 : 0.0;
        }
        report.mean_soft_f1 = f1 / static_cast<double>(records.size());
        report.mean_accuracy = acc / static_cast<double>(records.size());
        report.group_count = records.size();
        return report;
    }

    struct GroupAcc {
        double f1 = 0.0;
        double acc = 0.0;
        size_t n = 0;
    };
    std::map<std::string, GroupAcc> groups;
    for (const auto& r : records) {
        auto& g = groups[normalize_text(r.gt_sql)];
        g.f1 += r.score.soft_f1;
        g.acc += r.score.exact ? 1.0 : 0.0;
        ++g.n;
    }
    double f1 = 0.0, acc = 0.0;
    for (const auto& [key, g] : groups) {
        f1 += g.f1 / static_cast<double>(g.n);
        acc += g.acc / static_cast<double>(g.n);
    }
    report.mean_soft_f1 = f1 / static_cast<double>(groups.size());
    report.mean_accuracy = acc / static_cast<double>(groups.size());
    report.group_count = groups.size();
    return report;
}

}  // namespace sqleval
