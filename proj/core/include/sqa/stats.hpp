#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "sqa/record.hpp"

namespace sqa {

// Corpus statistics: word frequencies over questions and answers, the
// first-word distribution of questions, and the sqa2 answer-label
// distribution.
struct StatsReport {
    int n_records = 0;
    int n_sqa2 = 0;
    std::vector<std::pair<std::string, int>> question_word_freq;  // count desc, word asc
    std::vector<std::pair<std::string, int>> answer_word_freq;
    std::vector<std::pair<std::string, int>> question_first_word;
    std::array<int, 4> label_counts{};  // A..D

    double label_percent(int i) const {
        return n_sqa2 > 0 ? 100.0 * label_counts[static_cast<std::size_t>(i)] / n_sqa2 : 0.0;
    }
};

StatsReport compute_stats(const std::vector<SqaRecord>& records);

// word_freq.csv, first_words.csv, label_distribution.csv under dir.
void write_stats_csv(const std::string& dir, const StatsReport& report);
// stats.md summary table.
void write_stats_markdown(const std::string& dir, const StatsReport& report);

}  // namespace sqa
