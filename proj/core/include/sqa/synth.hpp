#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqa/config.hpp"
#include "sqa/record.hpp"
#include "sqa/tensor.hpp"

namespace sqa {

// Synthetic corpus: each document token maps to frames_per_token copies of
// a fixed seeded embedding plus N(0, sigma^2) noise, emulating a frozen
// acoustic encoder over a small word vocabulary. Identical seeds yield
// byte-identical records and feature files.
struct SynthSpec {
    int n_asr = 0;
    int n_sqa1 = 0;
    int n_sqa2 = 0;
    int vocab = 50;            // corpus word vocabulary, <= 256
    int doc_len = 3;           // words per document
    int frames_per_token = 2;  // r
    double noise_sigma = 0.05;
    int d_speech = 16;
    std::uint64_t seed = 0;
    // First sample index; disjoint offsets with the same seed share the
    // encoder embeddings but draw fresh documents/noise (train/test splits).
    int index_offset = 0;

    void validate() const;
    static SynthSpec from_kv(const KvConfig& kv);
};

// Deterministic word list: consonant-vowel syllables, then two-syllable
// compounds; index < 256.
std::string synth_word(int index);

// Encoder embedding for one vocabulary word (shared across samples).
std::vector<float> synth_token_embedding(const SynthSpec& spec, int token);

struct SynthResult {
    std::vector<SqaRecord> records;  // speech_path relative to out_dir
    std::vector<std::string> feature_files;
};

// Writes feature files under <out_dir>/features/ and returns the records.
SynthResult synth_corpus(const SynthSpec& spec, const std::string& out_dir);

// Speech paths in records are stored relative to the JSONL's directory.
std::string resolve_speech_path(const std::string& records_path, const SqaRecord& record);

}  // namespace sqa
