#include "sqa/record.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sqa/error.hpp"
#include "sqa/text.hpp"

// Vendored nlohmann single header; ordered_json keeps key order stable.
using json = nlohmann::ordered_json;

namespace sqa {

std::string task_to_string(TaskKind task) {
    switch (task) {
        case TaskKind::asr: return "asr";
        case TaskKind::sqa1: return "sqa1";
        case TaskKind::sqa2: return "sqa2";
    }
    throw InputError("unknown task kind");
}

TaskKind task_from_string(const std::string& s) {
    if (s == "asr") return TaskKind::asr;
    if (s == "sqa1") return TaskKind::sqa1;
    if (s == "sqa2") return TaskKind::sqa2;
    throw InputError("unknown task '" + s + "', expected asr|sqa1|sqa2");
}

void SqaRecord::validate() const {
    if (id.empty()) throw InputError("record with empty id");
    const std::string where = "record '" + id + "': ";
    if (question.empty()) throw InputError(where + "empty question");
    if (answer.empty()) throw InputError(where + "empty answer");
    const bool is_mc = task == TaskKind::sqa2;
    if (is_mc != !options.empty() || is_mc != label.has_value()) {
        throw InputError(where + "options and label must be present exactly for sqa2");
    }
    if (is_mc) {
        if (options.size() != 4) {
            throw InputError(where + "sqa2 requires exactly 4 options, got " +
                             std::to_string(options.size()));
        }
        if (*label < 'A' || *label > 'D') {
            throw InputError(where + "label must be one of A/B/C/D");
        }
        std::set<std::string> seen;
        for (const auto& o : options) {
            if (!seen.insert(normalize_whitespace(lowercase(o))).second) {
                throw InputError(where + "duplicate option '" + o + "'");
            }
        }
    }
}

std::string record_to_json_line(const SqaRecord& r) {
    json j;
    j["id"] = r.id;
    j["task"] = task_to_string(r.task);
    j["speech_path"] = r.speech_path;
    if (r.document) j["document"] = *r.document;
    j["question"] = r.question;
    if (!r.options.empty()) j["options"] = r.options;
    j["answer"] = r.answer;
    if (r.label) j["label"] = std::string(1, *r.label);
    return j.dump();
}

SqaRecord record_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad JSONL line: ") + e.what());
    }
    SqaRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.task = task_from_string(j.at("task").get<std::string>());
        r.speech_path = j.value("speech_path", std::string());
        if (j.contains("document") && !j["document"].is_null()) {
            r.document = j["document"].get<std::string>();
        }
        r.question = j.value("question", std::string());
        if (j.contains("options") && !j["options"].is_null()) {
            r.options = j["options"].get<std::vector<std::string>>();
        }
        r.answer = j.value("answer", std::string());
        if (j.contains("label") && !j["label"].is_null()) {
            const std::string l = j["label"].get<std::string>();
            if (!l.empty()) r.label = l[0];
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad record field: ") + e.what());
    }
    return r;
}

std::vector<SqaRecord> read_jsonl(const std::string& path, bool validate) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file: " + path);
    std::vector<SqaRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (normalize_whitespace(line).empty()) continue;
        try {
            records.push_back(record_from_json_line(line));
            if (validate) records.back().validate();
        } catch (const std::exception& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

void write_jsonl(const std::string& path, const std::vector<SqaRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write records file: " + path);
    for (const auto& r : records) out << record_to_json_line(r) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace sqa
