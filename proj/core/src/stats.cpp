#include "sqa/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "sqa/error.hpp"
#include "sqa/text.hpp"

namespace fs = std::filesystem;

namespace sqa {

namespace {

std::vector<std::pair<std::string, int>> sorted_counts(const std::map<std::string, int>& counts) {
    std::vector<std::pair<std::string, int>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

std::string percent_1dp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

StatsReport compute_stats(const std::vector<SqaRecord>& records) {
    StatsReport report;
    report.n_records = static_cast<int>(records.size());
    std::map<std::string, int> q_words, a_words, first_words;
    for (const auto& r : records) {
        const auto q_tokens = word_tokens(r.question);
        for (const auto& w : q_tokens) ++q_words[w];
        if (!q_tokens.empty()) ++first_words[q_tokens.front()];
        for (const auto& w : word_tokens(r.answer)) ++a_words[w];
        if (r.task == TaskKind::sqa2 && r.label) {
            ++report.n_sqa2;
            const int idx = *r.label - 'A';
            if (idx >= 0 && idx < 4) ++report.label_counts[static_cast<std::size_t>(idx)];
        }
    }
    report.question_word_freq = sorted_counts(q_words);
    report.answer_word_freq = sorted_counts(a_words);
    report.question_first_word = sorted_counts(first_words);
    return report;
}

void write_stats_csv(const std::string& dir, const StatsReport& report) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "word_freq.csv", std::ios::binary);
        if (!out) throw IoError("cannot write word_freq.csv in " + dir);
        out << "field,word,count\n";
        for (const auto& [w, c] : report.question_word_freq) {
            out << "question," << w << "," << c << "\n";
        }
        for (const auto& [w, c] : report.answer_word_freq) out << "answer," << w << "," << c << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "first_words.csv", std::ios::binary);
        if (!out) throw IoError("cannot write first_words.csv in " + dir);
        out << "word,count\n";
        for (const auto& [w, c] : report.question_first_word) out << w << "," << c << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "label_distribution.csv", std::ios::binary);
        if (!out) throw IoError("cannot write label_distribution.csv in " + dir);
        out << "label,count,percent\n";
        for (int i = 0; i < 4; ++i) {
            out << static_cast<char>('A' + i) << "," << report.label_counts[static_cast<std::size_t>(i)]
                << "," << percent_1dp(report.label_percent(i)) << "\n";
        }
    }
}

void write_stats_markdown(const std::string& dir, const StatsReport& report) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "stats.md", std::ios::binary);
    if (!out) throw IoError("cannot write stats.md in " + dir);
    out << "# Corpus statistics\n\n";
    out << "Records: " << report.n_records << " (sqa2: " << report.n_sqa2 << ")\n\n";
    out << "## Answer label distribution (sqa2)\n\n";
    out << "| Label | Count | Percent |\n|---|---|---|\n";
    for (int i = 0; i < 4; ++i) {
        out << "| " << static_cast<char>('A' + i) << " | "
            << report.label_counts[static_cast<std::size_t>(i)] << " | "
            << percent_1dp(report.label_percent(i)) << "% |\n";
    }
    auto top = [&out](const char* title, const std::vector<std::pair<std::string, int>>& rows) {
        out << "\n## " << title << "\n\n| Word | Count |\n|---|---|\n";
        for (std::size_t i = 0; i < rows.size() && i < 20; ++i) {
            out << "| " << rows[i].first << " | " << rows[i].second << " |\n";
        }
    };
    top("Top question words", report.question_word_freq);
    top("Top answer words", report.answer_word_freq);
    top("Question first words", report.question_first_word);
}

}  // namespace sqa
