#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sqa/record.hpp"

namespace sqa {

// All string metrics normalize first: lowercase, punctuation stripped,
// whitespace-delimited tokens.

// Levenshtein distance over tokens / reference token count. Empty reference
// after normalization is undefined and throws MetricError.
double wer(const std::string& hypothesis, const std::string& reference);

// Clipped unigram precision times brevity penalty
// exp(min(0, 1 - ref_len/hyp_len)). Empty hypothesis scores 0 by convention.
double bleu1(const std::string& hypothesis, const std::string& reference);

// n-gram overlap F1 with clipped counts (n = 1 or 2); 0 when either side
// has no n-grams.
double rouge_n(const std::string& hypothesis, const std::string& reference, int n);

// LCS-based F1: P = LCS/|hyp|, R = LCS/|ref|.
double rouge_l(const std::string& hypothesis, const std::string& reference);

enum class OptionLabel { A, B, C, D, Invalid };

char option_label_char(OptionLabel label);
OptionLabel option_label_from_char(char c);

// First case-insensitive "Option <X>" or a leading "X." with X in A..D;
// Invalid when absent or when the first match site carries no parseable
// label.
OptionLabel extract_option(const std::string& answer_text);

struct MacroScores {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double macro_recall = 0.0;
};

// Plain accuracy (Invalid always wrong) and macro-F1 over classes with
// nonzero support in gold or predictions; Invalid never forms a class but
// counts as a false negative for its gold class. Macro recall is reported
// alongside since the two readings of "macro accuracy" differ.
MacroScores macro_accuracy_f1(const std::vector<OptionLabel>& predictions,
                              const std::vector<char>& gold);

// Pluggable sentence embedder for the similarity metric.
struct Embedder {
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    // Signed outputs are mapped through (1+cos)/2; non-negative ones are not.
    virtual bool signed_vectors() const = 0;
};

// Deterministic offline default: L2-normalized hashed character-trigram
// counts.
class TrigramHashEmbedder : public Embedder {
public:
    explicit TrigramHashEmbedder(int dim = 512) : dim_(dim) {}
    std::vector<double> embed(const std::string& text) override;
    bool signed_vectors() const override { return false; }

private:
    int dim_;
};

// Cosine similarity of provider embeddings in [0, 1].
double embed_similarity(const std::string& hypothesis, const std::string& reference,
                        Embedder& provider);

// Per-task metric bundle as reported in the paper's tables.
struct EvalRow {
    std::string id;
    std::string hypothesis;
    std::string reference;
    std::optional<double> wer, bleu1, rouge1, rouge2, rouge_l, embed_sim;
    OptionLabel predicted = OptionLabel::Invalid;
    char gold_label = 0;
    bool embed_failed = false;
};

struct EvalReport {
    TaskKind task = TaskKind::asr;
    int n = 0;
    std::optional<double> wer, bleu1, rouge1, rouge2, rouge_l;
    std::optional<double> accuracy, macro_f1, macro_recall;
    std::optional<double> embed_sim;
    int embed_exclusions = 0;
    std::vector<EvalRow> rows;
};

struct ScoredPair {
    std::string id;
    std::string hypothesis;
    std::string reference;
    char gold_label = 0;  // sqa2 only
};

// Aggregates the task's metric set over (hypothesis, reference) pairs.
// provider may be null to skip embedding similarity; per-pair provider
// failures are excluded from the mean and counted.
EvalReport evaluate_pairs(TaskKind task, const std::vector<ScoredPair>& pairs,
                          Embedder* provider);

}  // namespace sqa
