#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqa/config.hpp"
#include "sqa/grad_check.hpp"
#include "sqa/tensor.hpp"

namespace sqa {

// Architecture hyperparameters of the causal decoder plus the speech
// projection and adapter dimensions.
struct ModelConfig {
    int vocab_size = 258;  // byte tokenizer: 256 bytes + BOS + EOS
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 192;
    int d_speech = 16;       // encoder feature width
    int max_speech_len = 900;
    int max_text_len = 300;
    int adapter_layers = 2;  // top layers carrying adaptation prompts
    int prompt_len = 10;     // prompts per adapted layer
    double rotary_base = 10000.0;
    double rms_eps = 1e-5;

    int d_head() const { return d_model / n_heads; }
    void validate() const;  // throws ConfigError

    static ModelConfig from_kv(const KvConfig& kv);
    KvConfig to_kv() const;
};

// Per-layer frozen decoder weights.
struct LayerWeights {
    Tensor attn_gain, ffn_gain;  // [d_model]
    Tensor wq, wk, wv, wo;       // [d_model x d_model]
    Tensor w1, w3;               // [d_model x d_ff]
    Tensor w2;                   // [d_ff x d_model]
};

// Per-layer adaptation prompts and zero-initialized per-head gates. Gates
// pass through tanh before use, so a fresh state contributes exactly
// nothing to attention.
struct AdapterState {
    std::vector<Tensor> prompts;  // adapter_layers x [prompt_len x d_model]
    std::vector<Tensor> gates;    // adapter_layers x [n_heads]
};

// All parameter tensors, partitioned frozen / trainable. The frozen
// partition is bit-identical before and after any training step.
struct ModelState {
    ModelConfig config;

    // frozen
    Tensor embedding;  // [vocab x d_model]
    std::vector<LayerWeights> layers;
    Tensor final_gain;  // [d_model]
    Tensor w_out;       // [d_model x vocab]

    // trainable
    Tensor proj_weight;  // [d_speech x d_model]
    Tensor proj_bias;    // [d_model]
    AdapterState adapter;

    std::vector<NamedParam> trainable_params();
    std::vector<NamedParam> named_tensors();  // full state, checkpoint order
};

ModelState init_model_state(const ModelConfig& config, std::uint64_t seed);

// FNV-1a over the raw bytes of the frozen partition, fixed tensor order.
std::uint64_t frozen_checksum(const ModelState& state);

// One decoder input: projected speech frames followed by embedded text
// tokens, positions contiguous across the modality boundary.
struct FusedSequence {
    Tensor embedded;  // [(n_frames + n_tokens) x d_model]
    int boundary = 0;  // index where text begins == n_frames
    int n_frames = 0;
    int n_tokens = 0;
    std::vector<int> positions;  // 0 .. n_frames + n_tokens - 1
};

// Affine map of raw encoder frames [n x d_speech] -> [n x d_model].
// Over-long inputs raise LengthError; truncation is never silent.
Tensor project_speech(const Tensor& features, ModelState& state);

// Frozen embedding-table lookup.
Tensor embed_text(const std::vector<int>& token_ids, ModelState& state);

FusedSequence fuse(const Tensor& speech, const Tensor& text, const ModelState& state);

struct ForwardOptions {
    bool use_adapter = true;
    // When set, receives a detached copy of the residual stream after each layer.
    std::vector<Tensor>* layer_trace = nullptr;
};

// Full decoder pass: per layer rms_norm -> causal multi-head attention with
// rotary positions (plus the gated prompt branch in adapted layers) ->
// rms_norm -> swiglu ffn, residuals around both; final norm and output
// projection to [seq_len x vocab] logits.
Tensor forward(const FusedSequence& fused, ModelState& state, const ForwardOptions& opts = {});

struct GenerateResult {
    std::vector<int> tokens;  // newly generated ids, EOS excluded
    bool hit_eos = false;
    bool truncated = false;  // text budget exhausted before EOS / max_new
};

// Greedy decode: BOS + prompt ids, append argmax tokens until EOS or
// max_new. Deterministic; ties resolve to the lowest id.
GenerateResult generate(const Tensor& speech_features, const std::vector<int>& prompt_ids,
                        ModelState& state, int max_new);

}  // namespace sqa
