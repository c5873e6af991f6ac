#include "sqa/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>

#include "sqa/error.hpp"
#include "sqa/manifest.hpp"
#include "sqa/text.hpp"

namespace sqa {

namespace {

int edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens,
                                                     int n) {
    std::map<std::vector<std::string>, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                        tokens.begin() + static_cast<std::ptrdiff_t>(i) + n)]++;
    }
    return counts;
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), 0);
    }
    return prev[m];
}

}  // namespace

double wer(const std::string& hypothesis, const std::string& reference) {
    const auto ref = word_tokens(reference);
    if (ref.empty()) {
        throw MetricError("wer: reference is empty after normalization, metric undefined");
    }
    const auto hyp = word_tokens(hypothesis);
    return static_cast<double>(edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

double bleu1(const std::string& hypothesis, const std::string& reference) {
    const auto hyp = word_tokens(hypothesis);
    const auto ref = word_tokens(reference);
    if (hyp.empty()) return 0.0;  // convention for empty hypotheses
    if (ref.empty()) return 0.0;
    auto hyp_counts = ngram_counts(hyp, 1);
    auto ref_counts = ngram_counts(ref, 1);
    int clipped = 0;
    for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    const double precision = static_cast<double>(clipped) / static_cast<double>(hyp.size());
    const double bp = std::exp(
        std::min(0.0, 1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size())));
    return precision * bp;
}

double rouge_n(const std::string& hypothesis, const std::string& reference, int n) {
    if (n != 1 && n != 2) throw MetricError("rouge_n: n must be 1 or 2");
    const auto hyp = word_tokens(hypothesis);
    const auto ref = word_tokens(reference);
    auto hyp_counts = ngram_counts(hyp, n);
    auto ref_counts = ngram_counts(ref, n);
    std::int64_t hyp_total = 0, ref_total = 0;
    for (const auto& [g, c] : hyp_counts) hyp_total += c;
    for (const auto& [g, c] : ref_counts) ref_total += c;
    if (hyp_total == 0 || ref_total == 0) return 0.0;
    std::int64_t clipped = 0;
    for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    const double p = static_cast<double>(clipped) / static_cast<double>(hyp_total);
    const double r = static_cast<double>(clipped) / static_cast<double>(ref_total);
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double rouge_l(const std::string& hypothesis, const std::string& reference) {
    const auto hyp = word_tokens(hypothesis);
    const auto ref = word_tokens(reference);
    if (hyp.empty() || ref.empty()) return 0.0;
    const int lcs = lcs_length(hyp, ref);
    const double p = static_cast<double>(lcs) / static_cast<double>(hyp.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

char option_label_char(OptionLabel label) {
    switch (label) {
        case OptionLabel::A: return 'A';
        case OptionLabel::B: return 'B';
        case OptionLabel::C: return 'C';
        case OptionLabel::D: return 'D';
        case OptionLabel::Invalid: return '?';
    }
    return '?';
}

OptionLabel option_label_from_char(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'A': return OptionLabel::A;
        case 'B': return OptionLabel::B;
        case 'C': return OptionLabel::C;
        case 'D': return OptionLabel::D;
        default: return OptionLabel::Invalid;
    }
}

OptionLabel extract_option(const std::string& answer_text) {
    // Leading "X." is the earliest possible match site.
    std::size_t i = 0;
    while (i < answer_text.size() &&
           std::isspace(static_cast<unsigned char>(answer_text[i]))) {
        ++i;
    }
    if (i + 1 < answer_text.size() && answer_text[i + 1] == '.') {
        const OptionLabel lead = option_label_from_char(answer_text[i]);
        if (lead != OptionLabel::Invalid) return lead;
    }
    // Otherwise the first case-insensitive word "option" decides: the label
    // must follow as a standalone letter, else the site is ambiguous and the
    // whole extraction is Invalid.
    const std::string lower = lowercase(answer_text);
    std::size_t pos = 0;
    while ((pos = lower.find("option", pos)) != std::string::npos) {
        const bool word_start = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
        const std::size_t after = pos + 6;
        if (!word_start || (after < lower.size() &&
                            std::isalnum(static_cast<unsigned char>(lower[after])) )) {
            pos = after;
            continue;  // inside another word, e.g. "optional"
        }
        std::size_t j = after;
        while (j < lower.size() && lower[j] == ' ') ++j;
        if (j >= lower.size()) return OptionLabel::Invalid;
        const OptionLabel label = option_label_from_char(lower[j]);
        if (label == OptionLabel::Invalid) return OptionLabel::Invalid;
        // The letter must stand alone ("Option B." yes, "Option Brief" no).
        if (j + 1 < lower.size() && std::isalnum(static_cast<unsigned char>(lower[j + 1]))) {
            return OptionLabel::Invalid;
        }
        return label;
    }
    return OptionLabel::Invalid;
}

MacroScores macro_accuracy_f1(const std::vector<OptionLabel>& predictions,
                              const std::vector<char>& gold) {
    if (predictions.size() != gold.size()) {
        throw InputError("macro_accuracy_f1: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(gold.size()) + " gold labels");
    }
    std::array<std::int64_t, 4> tp{}, fp{}, fn{}, support{};
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const OptionLabel g = option_label_from_char(gold[i]);
        if (g == OptionLabel::Invalid) {
            throw InputError("macro_accuracy_f1: gold label must be one of A/B/C/D");
        }
        const int gi = static_cast<int>(g);
        ++support[static_cast<std::size_t>(gi)];
        const OptionLabel p = predictions[i];
        if (p == g) {
            ++correct;
            ++tp[static_cast<std::size_t>(gi)];
        } else {
            ++fn[static_cast<std::size_t>(gi)];  // Invalid contributes FN to its gold class
            if (p != OptionLabel::Invalid) ++fp[static_cast<std::size_t>(static_cast<int>(p))];
        }
    }
    MacroScores s;
    s.accuracy = gold.empty() ? 0.0
                              : static_cast<double>(correct) / static_cast<double>(gold.size());
    double f1_sum = 0.0, recall_sum = 0.0;
    int classes = 0, recall_classes = 0;
    for (int c = 0; c < 4; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const std::int64_t predicted_count = tp[ci] + fp[ci];
        if (support[ci] == 0 && predicted_count == 0) continue;  // class absent everywhere
        ++classes;
        const double denom = static_cast<double>(2 * tp[ci] + fp[ci] + fn[ci]);
        f1_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[ci]) / denom : 0.0;
        if (support[ci] > 0) {
            ++recall_classes;
            recall_sum += static_cast<double>(tp[ci]) / static_cast<double>(support[ci]);
        }
    }
    s.macro_f1 = classes > 0 ? f1_sum / classes : 0.0;
    s.macro_recall = recall_classes > 0 ? recall_sum / recall_classes : 0.0;
    return s;
}

std::vector<double> TrigramHashEmbedder::embed(const std::string& text) {
    std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
    if (text.size() < 3) {
        if (!text.empty()) {
            v[fnv1a64(text) % static_cast<std::uint64_t>(dim_)] += 1.0;
        }
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
            v[fnv1a64(text.data() + i, 3) % static_cast<std::uint64_t>(dim_)] += 1.0;
        }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

double embed_similarity(const std::string& hypothesis, const std::string& reference,
                        Embedder& provider) {
    const auto a = provider.embed(hypothesis);
    const auto b = provider.embed(reference);
    if (a.size() != b.size() || a.empty()) {
        throw MetricError("embed_similarity: provider returned mismatched vector widths");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    return provider.signed_vectors() ? (1.0 + cos) / 2.0 : cos;
}

EvalReport evaluate_pairs(TaskKind task, const std::vector<ScoredPair>& pairs,
                          Embedder* provider) {
    EvalReport report;
    report.task = task;
    report.n = static_cast<int>(pairs.size());
    double wer_sum = 0, bleu_sum = 0, r1_sum = 0, r2_sum = 0, rl_sum = 0, sim_sum = 0;
    int sim_n = 0;
    std::vector<OptionLabel> preds;
    std::vector<char> gold;
    for (const auto& pair : pairs) {
        EvalRow row;
        row.id = pair.id;
        row.hypothesis = pair.hypothesis;
        row.reference = pair.reference;
        if (task == TaskKind::asr) {
            row.wer = wer(pair.hypothesis, pair.reference);
            wer_sum += *row.wer;
        } else {
            row.bleu1 = bleu1(pair.hypothesis, pair.reference);
            row.rouge1 = rouge_n(pair.hypothesis, pair.reference, 1);
            row.rouge2 = rouge_n(pair.hypothesis, pair.reference, 2);
            row.rouge_l = rouge_l(pair.hypothesis, pair.reference);
            bleu_sum += *row.bleu1;
            r1_sum += *row.rouge1;
            r2_sum += *row.rouge2;
            rl_sum += *row.rouge_l;
            if (provider) {
                try {
                    row.embed_sim = embed_similarity(pair.hypothesis, pair.reference, *provider);
                    sim_sum += *row.embed_sim;
                    ++sim_n;
                } catch (const std::exception&) {
                    row.embed_failed = true;
                    ++report.embed_exclusions;
                }
            }
            if (task == TaskKind::sqa2) {
                row.predicted = extract_option(pair.hypothesis);
                row.gold_label = pair.gold_label;
                preds.push_back(row.predicted);
                gold.push_back(pair.gold_label);
            }
        }
        report.rows.push_back(std::move(row));
    }
    const double n = report.n > 0 ? static_cast<double>(report.n) : 1.0;
    if (task == TaskKind::asr) {
        if (report.n > 0) report.wer = wer_sum / n;
    } else {
        if (report.n > 0) {
            report.bleu1 = bleu_sum / n;
            report.rouge1 = r1_sum / n;
            report.rouge2 = r2_sum / n;
            report.rouge_l = rl_sum / n;
            if (sim_n > 0) report.embed_sim = sim_sum / sim_n;
        }
        if (task == TaskKind::sqa2 && !gold.empty()) {
            const MacroScores scores = macro_accuracy_f1(preds, gold);
            report.accuracy = scores.accuracy;
            report.macro_f1 = scores.macro_f1;
            report.macro_recall = scores.macro_recall;
        }
    }
    return report;
}

}  // namespace sqa
