#pragma once

#include <string>
#include <vector>

#include "sqa/record.hpp"

namespace sqa {

// Generation prompt for free-form question-answer pairs: the document
// followed by the fixed instruction block. Empty documents raise InputError.
std::string build_part1_prompt(const std::string& document);

// Generation prompt for the 4-option multiple-choice format, including the
// Question / Options / Answer-and-analysis skeleton.
std::string build_part2_prompt(const std::string& document);

// The bundled list of exactly 100 transcription instructions used to recast
// ASR pairs as SQA records. The wording is this repo's own.
const std::vector<std::string>& asr_prompt_templates();

// Pairs each (speech_path, transcript) with a uniformly seeded-random
// template as its question; the transcript becomes the answer, task=asr.
// Empty transcripts are skipped (returned count may be smaller).
std::vector<SqaRecord> reformulate_asr(
    const std::vector<std::pair<std::string, std::string>>& transcripts, std::uint64_t seed);

}  // namespace sqa
