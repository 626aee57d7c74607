#pragma once

#include <string>
#include <vector>

#include "deint/trainer.hpp"

namespace deint::report {

struct MethodSummary {
    std::string method;
    trainer::MetricStats cp, cnfr, cdr, ari, nmi;
    int scenarios = 0;
};

// Aggregates per-scenario evaluation CSVs (one per method/run) into one
// summary row per method. Rows from reports sharing a method name pool
// together, which is how repeated seeds combine.
std::vector<MethodSummary> summarize(const std::vector<trainer::EvalReport>& reports);

// comparison.csv: method,metric,mean,std rows.
void write_comparison_csv(const std::string& path, const std::vector<MethodSummary>& summaries);

// One grouped-bar SVG per metric (cp, cnfr, cdr, ari, nmi) with std whiskers.
void write_metric_svg(const std::string& path, const std::string& metric,
                      const std::vector<MethodSummary>& summaries);

// Scans a directory (recursively) for evaluation report CSVs.
std::vector<std::string> find_eval_csvs(const std::string& dir);

}  // namespace deint::report
