#include "sqa/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "sqa/error.hpp"
#include "sqa/features.hpp"
#include "sqa/prompts.hpp"
#include "sqa/rng.hpp"

namespace fs = std::filesystem;

namespace sqa {

namespace {

// Seed streams, disjoint by construction.
constexpr std::uint64_t kEmbedStream = 0x10000;
constexpr std::uint64_t kSampleStream = 0x20000;

const std::string kConsonants = "bcdfgjklmnprstvz";
const std::string kVowels = "aeiou";

}  // namespace

void SynthSpec::validate() const {
    if (n_asr < 0 || n_sqa1 < 0 || n_sqa2 < 0) throw ConfigError("sample counts must be >= 0");
    if (vocab < 1 || vocab > 256) {
        throw ConfigError("synth vocab must lie in [1, 256], got " + std::to_string(vocab));
    }
    if (doc_len < 1) throw ConfigError("doc_len must be >= 1");
    if (frames_per_token < 1) throw ConfigError("frames_per_token must be >= 1");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    if (d_speech < 1) throw ConfigError("d_speech must be >= 1");
    if (index_offset < 0) throw ConfigError("index_offset must be >= 0");
    if (n_sqa2 > 0 && vocab < 4 + doc_len) {
        throw ConfigError("sqa2 needs vocab >= doc_len + 4 to draw distinct distractors");
    }
}

SynthSpec SynthSpec::from_kv(const KvConfig& kv) {
    SynthSpec s;
    s.n_asr = static_cast<int>(kv.get_int("n_asr", s.n_asr));
    s.n_sqa1 = static_cast<int>(kv.get_int("n_sqa1", s.n_sqa1));
    s.n_sqa2 = static_cast<int>(kv.get_int("n_sqa2", s.n_sqa2));
    s.vocab = static_cast<int>(kv.get_int("vocab", s.vocab));
    s.doc_len = static_cast<int>(kv.get_int("doc_len", s.doc_len));
    s.frames_per_token = static_cast<int>(kv.get_int("frames_per_token", s.frames_per_token));
    s.noise_sigma = kv.get_double("noise_sigma", s.noise_sigma);
    s.d_speech = static_cast<int>(kv.get_int("d_speech", s.d_speech));
    s.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    s.index_offset = static_cast<int>(kv.get_int("index_offset", s.index_offset));
    s.validate();
    return s;
}

std::string synth_word(int index) {
    const int n_single = static_cast<int>(kConsonants.size() * kVowels.size());  // 80
    auto syllable = [](int i) {
        std::string s;
        s.push_back(kConsonants[static_cast<std::size_t>(i) / kVowels.size()]);
        s.push_back(kVowels[static_cast<std::size_t>(i) % kVowels.size()]);
        return s;
    };
    if (index < n_single) return syllable(index);
    const int rest = index - n_single;
    return syllable(rest / n_single) + syllable(rest % n_single);
}

std::vector<float> synth_token_embedding(const SynthSpec& spec, int token) {
    Rng rng(derive_seed(spec.seed, kEmbedStream + static_cast<std::uint64_t>(token)));
    std::vector<float> e(static_cast<std::size_t>(spec.d_speech));
    for (auto& v : e) v = static_cast<float>(rng.normal());
    return e;
}

namespace {

struct SampleDraw {
    std::vector<int> doc_tokens;
    Rng rng;
};

SampleDraw draw_document(const SynthSpec& spec, int global_index) {
    SampleDraw draw{{}, Rng(derive_seed(spec.seed, kSampleStream + static_cast<std::uint64_t>(
                                                       global_index)))};
    draw.doc_tokens.reserve(static_cast<std::size_t>(spec.doc_len));
    for (int i = 0; i < spec.doc_len; ++i) {
        draw.doc_tokens.push_back(static_cast<int>(draw.rng.uniform_index(
            static_cast<std::size_t>(spec.vocab))));
    }
    return draw;
}

std::string join_words(const std::vector<int>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += synth_word(tokens[i]);
    }
    return out;
}

FeatureMatrix render_features(const SynthSpec& spec, const std::vector<int>& doc_tokens,
                              Rng& rng) {
    FeatureMatrix m;
    m.dim = static_cast<std::uint32_t>(spec.d_speech);
    m.n_frames = static_cast<std::uint32_t>(doc_tokens.size() *
                                            static_cast<std::size_t>(spec.frames_per_token));
    m.values.reserve(static_cast<std::size_t>(m.n_frames) * m.dim);
    for (int token : doc_tokens) {
        const std::vector<float> e = synth_token_embedding(spec, token);
        for (int f = 0; f < spec.frames_per_token; ++f) {
            for (float base : e) {
                const double noisy = spec.noise_sigma > 0.0
                                         ? static_cast<double>(base) +
                                               rng.normal(0.0, spec.noise_sigma)
                                         : static_cast<double>(base);
                m.values.push_back(static_cast<float>(noisy));
            }
        }
    }
    return m;
}

}  // namespace

SynthResult synth_corpus(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    const fs::path features_dir = fs::path(out_dir) / "features";
    fs::create_directories(features_dir);

    SynthResult result;
    const auto& templates = asr_prompt_templates();
    int global_index = spec.index_offset;

    auto make_id = [&](const char* task, int index) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s-%06d", task, index);
        return std::string(buf);
    };
    auto emit = [&](SqaRecord&& record, const std::vector<int>& doc_tokens, Rng& rng) {
        const std::string file = record.id + ".sqaf";
        const FeatureMatrix m = render_features(spec, doc_tokens, rng);
        write_features((features_dir / file).string(), m);
        record.speech_path = "features/" + file;
        record.validate();
        result.feature_files.push_back(record.speech_path);
        result.records.push_back(std::move(record));
    };

    // Synthetic asr records use one fixed instruction; the varied template
    // pairing is reformulate_asr's job.
    const std::string& asr_question = templates.front();
    for (int i = 0; i < spec.n_asr; ++i, ++global_index) {
        SampleDraw draw = draw_document(spec, global_index);
        SqaRecord r;
        r.id = make_id("asr", global_index);
        r.task = TaskKind::asr;
        r.document = join_words(draw.doc_tokens);
        r.question = asr_question;
        r.answer = *r.document;
        emit(std::move(r), draw.doc_tokens, draw.rng);
    }
    for (int i = 0; i < spec.n_sqa1; ++i, ++global_index) {
        SampleDraw draw = draw_document(spec, global_index);
        SqaRecord r;
        r.id = make_id("sqa1", global_index);
        r.task = TaskKind::sqa1;
        r.document = join_words(draw.doc_tokens);
        const int word = draw.doc_tokens[draw.rng.uniform_index(draw.doc_tokens.size())];
        r.question = "What does the speech mention?";
        r.answer = "The speech mentions " + synth_word(word) + ".";
        emit(std::move(r), draw.doc_tokens, draw.rng);
    }
    for (int i = 0; i < spec.n_sqa2; ++i, ++global_index) {
        SampleDraw draw = draw_document(spec, global_index);
        SqaRecord r;
        r.id = make_id("sqa2", global_index);
        r.task = TaskKind::sqa2;
        r.document = join_words(draw.doc_tokens);
        r.question = "Which word appears in the speech?";
        const int true_word = draw.doc_tokens[draw.rng.uniform_index(draw.doc_tokens.size())];
        // Three distractors absent from the document.
        std::vector<int> distractors;
        while (distractors.size() < 3) {
            const int w = static_cast<int>(draw.rng.uniform_index(
                static_cast<std::size_t>(spec.vocab)));
            if (std::find(draw.doc_tokens.begin(), draw.doc_tokens.end(), w) !=
                draw.doc_tokens.end()) {
                continue;
            }
            if (std::find(distractors.begin(), distractors.end(), w) != distractors.end()) {
                continue;
            }
            distractors.push_back(w);
        }
        // Round-robin over the record index keeps the labels balanced.
        const int label_slot = i % 4;
        r.options.resize(4);
        int d = 0;
        for (int slot = 0; slot < 4; ++slot) {
            r.options[static_cast<std::size_t>(slot)] =
                slot == label_slot ? synth_word(true_word) : synth_word(distractors[d++]);
        }
        r.label = static_cast<char>('A' + label_slot);
        r.answer = "The answer is Option " + std::string(1, *r.label) +
                   " because the speech mentions " + synth_word(true_word) + ".";
        emit(std::move(r), draw.doc_tokens, draw.rng);
    }
    return result;
}

std::string resolve_speech_path(const std::string& records_path, const SqaRecord& record) {
    const fs::path p(record.speech_path);
    if (p.is_absolute()) return record.speech_path;
    return (fs::path(records_path).parent_path() / p).string();
}

}  // namespace sqa
