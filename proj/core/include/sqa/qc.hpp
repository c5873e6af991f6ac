#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqa/record.hpp"

namespace sqa {

// Pluggable judge for relevance scoring and document-sufficiency checks.
// The default is deterministic and lexical so the pipeline runs offline;
// a hosted-LLM judge would implement the same interface.
struct Judge {
    virtual ~Judge() = default;
    virtual int relevance(const SqaRecord& record) = 0;          // 0..10
    virtual bool answer_supported(const SqaRecord& record) = 0;  // sufficiency
};

// relevance = round(10 * |content words(Q+A) intersect content words(doc)|
//                      / |content words(Q+A)|).
// sufficiency passes iff every content word of the answer's key sentence
// (its first sentence) appears in the document or the question.
class LexicalJudge : public Judge {
public:
    int relevance(const SqaRecord& record) override;
    bool answer_supported(const SqaRecord& record) override;
};

// Low scorers stay in the corpus (they remain contextually relevant); the
// score is recorded, never used to reject.
int score_relevance(const SqaRecord& record, Judge& judge);

enum class Sufficiency { pass, regenerate };
Sufficiency check_sufficiency(const SqaRecord& record, Judge& judge);

enum class RepetitionOutcome { pass, fixed, reject };
struct RepetitionResult {
    RepetitionOutcome outcome = RepetitionOutcome::pass;
    SqaRecord record;  // question rewritten when outcome == fixed
};

// Detects any shared substring of >= min_run characters (whitespace
// normalized) between document and question. The quoted span is removed
// when the residual question stands alone (>= 3 words and a '?'), else the
// record is rejected.
RepetitionResult filter_repetition(const SqaRecord& record, int min_run = 50);

// Longest common substring of the whitespace-normalized inputs (plain DP).
int longest_shared_run(const std::string& a, const std::string& b);

struct TerminologyResult {
    SqaRecord record;
    int edits = 0;
};

// Every standalone word "text" in question/answer/options becomes "speech",
// case pattern preserved; the document field is never touched. Idempotent.
TerminologyResult refine_terminology(const SqaRecord& record);

enum class StructureReason { ok, dup_option, option_count, label_mismatch, missing_analysis };
std::string structure_reason_to_string(StructureReason reason);

// sqa2 structural gate: exactly 4 pairwise-distinct options, the answer
// names "Option X" matching the label, and the analysis references each of
// the four options.
StructureReason validate_part2_structure(const SqaRecord& record);

struct QcRow {
    std::string id;
    std::optional<int> relevance;  // empty = judge failed, record kept unscored
    std::optional<Sufficiency> sufficiency;
    RepetitionOutcome repetition = RepetitionOutcome::pass;
    int terminology_edits = 0;
    std::optional<StructureReason> structure;  // sqa2 only
    bool kept = false;
    std::string reject_reason;  // one of the closed reason strings
};

struct QcReport {
    std::vector<QcRow> rows;  // sorted by id, each processed record once
};

// Filters in pipeline order: terminology refinement, repetition filter,
// Part-II structure (sqa2), relevance scoring, sufficiency. Records failing
// a rejecting filter (or flagged regenerate) are dropped from `kept`.
QcReport run_qc_pipeline(const std::vector<SqaRecord>& records, Judge& judge,
                         std::vector<SqaRecord>& kept, int min_run = 50);

void write_qc_report_csv(const std::string& path, const QcReport& report);

}  // namespace sqa
