#include "sqa/qc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "sqa/error.hpp"
#include "sqa/metrics.hpp"
#include "sqa/text.hpp"

namespace sqa {

namespace {

std::set<std::string> word_set(const std::vector<std::string>& words) {
    return {words.begin(), words.end()};
}

// First sentence of the text ('.', '!' or '?' terminated).
std::string key_sentence(const std::string& text) {
    const std::size_t end = text.find_first_of(".!?");
    return end == std::string::npos ? text : text.substr(0, end + 1);
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Replaces standalone "text" with "speech", preserving the case pattern.
std::string replace_text_word(const std::string& s, int& edits) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const bool boundary_before = i == 0 || !is_word_char(static_cast<unsigned char>(s[i - 1]));
        if (boundary_before && i + 4 <= s.size() &&
            lowercase(s.substr(i, 4)) == "text" &&
            (i + 4 == s.size() || !is_word_char(static_cast<unsigned char>(s[i + 4])))) {
            const std::string word = s.substr(i, 4);
            const bool all_upper = std::all_of(word.begin(), word.end(), [](unsigned char c) {
                return std::isupper(c) != 0;
            });
            if (all_upper) {
                out += "SPEECH";
            } else if (std::isupper(static_cast<unsigned char>(word[0]))) {
                out += "Speech";
            } else {
                out += "speech";
            }
            ++edits;
            i += 4;
        } else {
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

}  // namespace

int LexicalJudge::relevance(const SqaRecord& record) {
    if (!record.document || record.document->empty()) {
        throw InputError("relevance: record '" + record.id + "' has no document");
    }
    const auto qa_words = word_set(content_words(record.question + " " + record.answer));
    if (qa_words.empty()) return 0;
    const auto doc_words = word_set(content_words(*record.document));
    std::size_t overlap = 0;
    for (const auto& w : qa_words) overlap += doc_words.count(w);
    return static_cast<int>(
        std::lround(10.0 * static_cast<double>(overlap) / static_cast<double>(qa_words.size())));
}

bool LexicalJudge::answer_supported(const SqaRecord& record) {
    if (!record.document || record.document->empty()) {
        throw InputError("sufficiency: record '" + record.id + "' has no document");
    }
    auto available = word_set(content_words(*record.document));
    for (const auto& w : content_words(record.question)) available.insert(w);
    // Part-II options travel with the question.
    for (const auto& option : record.options) {
        for (const auto& w : content_words(option)) available.insert(w);
    }
    for (const auto& w : content_words(key_sentence(record.answer))) {
        // Part-II answers are framed as "The answer is Option X because ...";
        // the scaffolding words and option letters are not answer content.
        if (w.size() <= 1 || w == "answer" || w == "option" || w == "because") continue;
        if (!available.count(w)) return false;
    }
    return true;
}

int score_relevance(const SqaRecord& record, Judge& judge) {
    const int score = judge.relevance(record);
    if (score < 0 || score > 10) {
        throw OracleError("judge returned out-of-range relevance score " + std::to_string(score));
    }
    return score;
}

Sufficiency check_sufficiency(const SqaRecord& record, Judge& judge) {
    return judge.answer_supported(record) ? Sufficiency::pass : Sufficiency::regenerate;
}

int longest_shared_run(const std::string& a, const std::string& b) {
    const std::string x = normalize_whitespace(a);
    const std::string y = normalize_whitespace(b);
    if (x.empty() || y.empty()) return 0;
    std::vector<int> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
    int best = 0;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t j = 1; j <= y.size(); ++j) {
            cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : 0;
            best = std::max(best, cur[j]);
        }
        std::swap(prev, cur);
    }
    return best;
}

namespace {

// Longest run shared with doc, plus its span in the (normalized) question.
struct SharedRun {
    int len = 0;
    std::size_t q_begin = 0;
};

SharedRun longest_shared_in_question(const std::string& doc_norm, const std::string& q_norm) {
    SharedRun best;
    if (doc_norm.empty() || q_norm.empty()) return best;
    std::vector<int> prev(q_norm.size() + 1, 0), cur(q_norm.size() + 1, 0);
    for (std::size_t i = 1; i <= doc_norm.size(); ++i) {
        for (std::size_t j = 1; j <= q_norm.size(); ++j) {
            cur[j] = doc_norm[i - 1] == q_norm[j - 1] ? prev[j - 1] + 1 : 0;
            if (cur[j] > best.len) {
                best.len = cur[j];
                best.q_begin = j - static_cast<std::size_t>(cur[j]);
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

bool question_stands_alone(const std::string& question) {
    return word_tokens(question).size() >= 3 && question.find('?') != std::string::npos;
}

}  // namespace

RepetitionResult filter_repetition(const SqaRecord& record, int min_run) {
    if (!record.document) {
        throw InputError("filter_repetition: record '" + record.id + "' has no document");
    }
    RepetitionResult result;
    result.record = record;
    const std::string doc_norm = normalize_whitespace(*record.document);
    std::string question = normalize_whitespace(record.question);

    bool changed = false;
    for (int round = 0; round < 16; ++round) {
        const SharedRun run = longest_shared_in_question(doc_norm, question);
        if (run.len < min_run) break;
        question.erase(run.q_begin, static_cast<std::size_t>(run.len));
        question = normalize_whitespace(question);
        changed = true;
    }
    if (!changed) {
        result.outcome = RepetitionOutcome::pass;
        return result;
    }
    if (question_stands_alone(question)) {
        result.outcome = RepetitionOutcome::fixed;
        result.record.question = question;
    } else {
        result.outcome = RepetitionOutcome::reject;
    }
    return result;
}

TerminologyResult refine_terminology(const SqaRecord& record) {
    TerminologyResult result;
    result.record = record;
    result.record.question = replace_text_word(record.question, result.edits);
    result.record.answer = replace_text_word(record.answer, result.edits);
    for (auto& option : result.record.options) {
        option = replace_text_word(option, result.edits);
    }
    return result;
}

std::string structure_reason_to_string(StructureReason reason) {
    switch (reason) {
        case StructureReason::ok: return "ok";
        case StructureReason::dup_option: return "dup_option";
        case StructureReason::option_count: return "option_count";
        case StructureReason::label_mismatch: return "label_mismatch";
        case StructureReason::missing_analysis: return "missing_analysis";
    }
    return "ok";
}

StructureReason validate_part2_structure(const SqaRecord& record) {
    if (record.task != TaskKind::sqa2) {
        throw InputError("validate_part2_structure: record '" + record.id + "' is not sqa2");
    }
    if (record.options.size() != 4) return StructureReason::option_count;
    std::set<std::string> seen;
    for (const auto& o : record.options) {
        if (!seen.insert(normalize_whitespace(lowercase(o))).second) {
            return StructureReason::dup_option;
        }
    }
    if (!record.label) return StructureReason::label_mismatch;
    const OptionLabel named = extract_option(record.answer);
    if (named == OptionLabel::Invalid || option_label_char(named) != *record.label) {
        return StructureReason::label_mismatch;
    }
    const std::string lower = lowercase(record.answer);
    for (const char* tag : {"option a", "option b", "option c", "option d"}) {
        if (lower.find(tag) == std::string::npos) return StructureReason::missing_analysis;
    }
    return StructureReason::ok;
}

QcReport run_qc_pipeline(const std::vector<SqaRecord>& records, Judge& judge,
                         std::vector<SqaRecord>& kept, int min_run) {
    QcReport report;
    kept.clear();
    for (const auto& input : records) {
        QcRow row;
        row.id = input.id;

        TerminologyResult term = refine_terminology(input);
        row.terminology_edits = term.edits;
        SqaRecord record = std::move(term.record);

        bool alive = true;
        if (record.document) {
            RepetitionResult rep = filter_repetition(record, min_run);
            row.repetition = rep.outcome;
            if (rep.outcome == RepetitionOutcome::reject) {
                alive = false;
                row.reject_reason = "repetition";
            } else {
                record = std::move(rep.record);
            }
        }
        if (alive && record.task == TaskKind::sqa2) {
            const StructureReason reason = validate_part2_structure(record);
            row.structure = reason;
            if (reason != StructureReason::ok) {
                alive = false;
                row.reject_reason = structure_reason_to_string(reason);
            }
        }
        if (alive && record.document) {
            try {
                row.relevance = score_relevance(record, judge);
            } catch (const std::exception&) {
                // judge failure: flagged unscored, the pipeline continues
            }
            row.sufficiency = check_sufficiency(record, judge);
            if (*row.sufficiency == Sufficiency::regenerate) {
                alive = false;
                row.reject_reason = "regenerate";
            }
        }
        row.kept = alive;
        if (alive) kept.push_back(std::move(record));
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const QcRow& a, const QcRow& b) { return a.id < b.id; });
    return report;
}

void write_qc_report_csv(const std::string& path, const QcReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write qc report: " + path);
    out << "id,relevance,sufficiency,repetition,terminology_edits,structure,kept,reject_reason\n";
    for (const auto& row : report.rows) {
        out << row.id << ",";
        if (row.relevance) {
            out << *row.relevance;
        } else {
            out << "unscored";
        }
        out << ",";
        if (row.sufficiency) {
            out << (*row.sufficiency == Sufficiency::pass ? "pass" : "regenerate");
        }
        out << ",";
        switch (row.repetition) {
            case RepetitionOutcome::pass: out << "pass"; break;
            case RepetitionOutcome::fixed: out << "fixed"; break;
            case RepetitionOutcome::reject: out << "reject"; break;
        }
        out << "," << row.terminology_edits << ",";
        if (row.structure) out << structure_reason_to_string(*row.structure);
        out << "," << (row.kept ? "1" : "0") << "," << row.reject_reason << "\n";
    }
}

}  // namespace sqa
