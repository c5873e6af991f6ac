#pragma once

#include <string>

#include "sqa/metrics.hpp"

namespace sqa {

// Summary line (one row per corpus-level metric set).
void write_eval_report_csv(const std::string& path, const EvalReport& report);

// Per-record rows.
void write_eval_rows_csv(const std::string& path, const EvalReport& report);

// Markdown table matching the columns the summary CSV uses.
void write_eval_report_markdown(const std::string& path, const std::string& title,
                                const EvalReport& report);

std::string eval_summary_header();
std::string eval_summary_row(const std::string& condition, const EvalReport& report);

}  // namespace sqa
