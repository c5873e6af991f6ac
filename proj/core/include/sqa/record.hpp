#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sqa {

enum class TaskKind { asr, sqa1, sqa2 };

std::string task_to_string(TaskKind task);
TaskKind task_from_string(const std::string& s);

// One (speech, question, answer) triple. sqa2 records carry exactly four
// options and a label in A..D; the other tasks carry neither.
struct SqaRecord {
    std::string id;
    TaskKind task = TaskKind::asr;
    std::string speech_path;                // SQAF feature file
    std::optional<std::string> document;    // ground-truth transcript
    std::string question;
    std::vector<std::string> options;
    std::string answer;
    std::optional<char> label;

    // Throws InputError on any schema violation.
    void validate() const;
};

std::string record_to_json_line(const SqaRecord& r);
SqaRecord record_from_json_line(const std::string& line);

// One record per line, UTF-8. With validate=true every record must satisfy
// the schema; QC reads with validate=false so structurally broken records
// reach the filters and get rejected with a reason.
std::vector<SqaRecord> read_jsonl(const std::string& path, bool validate = true);
void write_jsonl(const std::string& path, const std::vector<SqaRecord>& records);

}  // namespace sqa
