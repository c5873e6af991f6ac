#include "sqa/report.hpp"

#include <cstdio>
#include <fstream>

#include "sqa/error.hpp"

namespace sqa {

namespace {

std::string fmt4(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

}  // namespace

std::string eval_summary_header() {
    return "condition,task,n,wer,accuracy,f1,macro_recall,bleu1,rouge1,rouge2,rougeL,"
           "embed_sim,embed_exclusions";
}

std::string eval_summary_row(const std::string& condition, const EvalReport& r) {
    std::string row = condition + "," + task_to_string(r.task) + "," + std::to_string(r.n);
    for (const auto& v : {r.wer, r.accuracy, r.macro_f1, r.macro_recall, r.bleu1, r.rouge1,
                          r.rouge2, r.rouge_l, r.embed_sim}) {
        row += "," + fmt4(v);
    }
    row += "," + std::to_string(r.embed_exclusions);
    return row;
}

void write_eval_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path);
    out << eval_summary_header() << "\n" << eval_summary_row("all", report) << "\n";
}

void write_eval_rows_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write rows: " + path);
    out << "id,predicted,gold,wer,bleu1,rouge1,rouge2,rougeL,embed_sim,hypothesis\n";
    for (const auto& row : report.rows) {
        std::string hyp = row.hypothesis;
        for (char& c : hyp) {
            if (c == ',' || c == '\n' || c == '\r') c = ' ';
        }
        out << row.id << ",";
        if (report.task == TaskKind::sqa2) {
            out << option_label_char(row.predicted) << "," << row.gold_label;
        } else {
            out << ",";
        }
        out << "," << fmt4(row.wer) << "," << fmt4(row.bleu1) << "," << fmt4(row.rouge1) << ","
            << fmt4(row.rouge2) << "," << fmt4(row.rouge_l) << "," << fmt4(row.embed_sim) << ","
            << hyp << "\n";
    }
}

void write_eval_report_markdown(const std::string& path, const std::string& title,
                                const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path);
    out << "# " << title << "\n\n";
    out << "| Condition | Task | N | WER | Accuracy | F1 | BLEU-1 | ROUGE-1 | ROUGE-2 | ROUGE-L "
           "| Similarity |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    out << "| all | " << task_to_string(report.task) << " | " << report.n << " | "
        << fmt4(report.wer) << " | " << fmt4(report.accuracy) << " | " << fmt4(report.macro_f1)
        << " | " << fmt4(report.bleu1) << " | " << fmt4(report.rouge1) << " | "
        << fmt4(report.rouge2) << " | " << fmt4(report.rouge_l) << " | " << fmt4(report.embed_sim)
        << " |\n";
}

}  // namespace sqa
