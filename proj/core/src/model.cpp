#include "sqa/model.hpp"

#include <algorithm>
#include <cmath>

#include "sqa/error.hpp"
#include "sqa/manifest.hpp"
#include "sqa/ops.hpp"
#include "sqa/text.hpp"
#include "sqa/tokenizer.hpp"

namespace sqa {

void ModelConfig::validate() const {
    if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
    if (d_model < 1 || n_layers < 1 || n_heads < 1 || d_ff < 1 || d_speech < 1) {
        throw ConfigError("model dimensions must be >= 1");
    }
    if (d_model % n_heads != 0) {
        throw ConfigError("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                          std::to_string(n_heads));
    }
    if (d_head() % 2 != 0) {
        throw ConfigError("head dimension " + std::to_string(d_head()) +
                          " must be even for rotary embedding");
    }
    if (adapter_layers < 0 || adapter_layers > n_layers) {
        throw ConfigError("adapter_layers " + std::to_string(adapter_layers) +
                          " must lie in [0, n_layers=" + std::to_string(n_layers) + "]");
    }
    if (adapter_layers > 0 && prompt_len < 1) throw ConfigError("prompt_len must be >= 1");
    if (max_speech_len < 1 || max_text_len < 1) {
        throw ConfigError("max_speech_len and max_text_len must be >= 1");
    }
    if (rotary_base <= 1.0) throw ConfigError("rotary_base must be > 1");
    if (rms_eps < 0.0) throw ConfigError("rms_eps must be >= 0");
}

ModelConfig ModelConfig::from_kv(const KvConfig& kv) {
    ModelConfig c;
    c.vocab_size = static_cast<int>(kv.get_int("vocab_size", c.vocab_size));
    c.d_model = static_cast<int>(kv.get_int("d_model", c.d_model));
    c.n_layers = static_cast<int>(kv.get_int("n_layers", c.n_layers));
    c.n_heads = static_cast<int>(kv.get_int("n_heads", c.n_heads));
    c.d_ff = static_cast<int>(kv.get_int("d_ff", c.d_ff));
    c.d_speech = static_cast<int>(kv.get_int("d_speech", c.d_speech));
    c.max_speech_len = static_cast<int>(kv.get_int("max_speech_len", c.max_speech_len));
    c.max_text_len = static_cast<int>(kv.get_int("max_text_len", c.max_text_len));
    c.adapter_layers = static_cast<int>(kv.get_int("adapter_layers", c.adapter_layers));
    c.prompt_len = static_cast<int>(kv.get_int("prompt_len", c.prompt_len));
    c.rotary_base = kv.get_double("rotary_base", c.rotary_base);
    c.rms_eps = kv.get_double("rms_eps", c.rms_eps);
    c.validate();
    return c;
}

KvConfig ModelConfig::to_kv() const {
    KvConfig kv;
    kv.set("vocab_size", std::to_string(vocab_size));
    kv.set("d_model", std::to_string(d_model));
    kv.set("n_layers", std::to_string(n_layers));
    kv.set("n_heads", std::to_string(n_heads));
    kv.set("d_ff", std::to_string(d_ff));
    kv.set("d_speech", std::to_string(d_speech));
    kv.set("max_speech_len", std::to_string(max_speech_len));
    kv.set("max_text_len", std::to_string(max_text_len));
    kv.set("adapter_layers", std::to_string(adapter_layers));
    kv.set("prompt_len", std::to_string(prompt_len));
    kv.set("rotary_base", format_double(rotary_base));
    kv.set("rms_eps", format_double(rms_eps));
    return kv;
}

ModelState init_model_state(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelState st;
    st.config = config;

    // Frozen partition first so the draw stream is identical with and
    // without an adapter.
    const double w_std = 1.0 / std::sqrt(static_cast<double>(config.d_model));
    const double ff_std = 1.0 / std::sqrt(static_cast<double>(config.d_ff));
    st.embedding = Tensor::randn({config.vocab_size, config.d_model}, rng, 1.0);
    st.layers.resize(static_cast<std::size_t>(config.n_layers));
    for (auto& layer : st.layers) {
        layer.attn_gain = Tensor::full({config.d_model}, 1.0);
        layer.ffn_gain = Tensor::full({config.d_model}, 1.0);
        layer.wq = Tensor::randn({config.d_model, config.d_model}, rng, w_std);
        layer.wk = Tensor::randn({config.d_model, config.d_model}, rng, w_std);
        layer.wv = Tensor::randn({config.d_model, config.d_model}, rng, w_std);
        layer.wo = Tensor::randn({config.d_model, config.d_model}, rng, w_std);
        layer.w1 = Tensor::randn({config.d_model, config.d_ff}, rng, w_std);
        layer.w3 = Tensor::randn({config.d_model, config.d_ff}, rng, w_std);
        layer.w2 = Tensor::randn({config.d_ff, config.d_model}, rng, ff_std);
    }
    st.final_gain = Tensor::full({config.d_model}, 1.0);
    st.w_out = Tensor::randn({config.d_model, config.vocab_size}, rng, w_std);

    // Trainable partition.
    const double proj_std = 1.0 / std::sqrt(static_cast<double>(config.d_speech));
    st.proj_weight = Tensor::randn({config.d_speech, config.d_model}, rng, proj_std, true);
    st.proj_bias = Tensor::zeros({config.d_model}, true);
    for (int a = 0; a < config.adapter_layers; ++a) {
        st.adapter.prompts.push_back(
            Tensor::randn({config.prompt_len, config.d_model}, rng, 0.02, true));
        st.adapter.gates.push_back(Tensor::zeros({config.n_heads}, true));
    }
    return st;
}

std::vector<NamedParam> ModelState::trainable_params() {
    std::vector<NamedParam> out;
    out.push_back({"proj.weight", proj_weight});
    out.push_back({"proj.bias", proj_bias});
    for (std::size_t a = 0; a < adapter.prompts.size(); ++a) {
        out.push_back({"adapter." + std::to_string(a) + ".prompts", adapter.prompts[a]});
        out.push_back({"adapter." + std::to_string(a) + ".gates", adapter.gates[a]});
    }
    return out;
}

std::vector<NamedParam> ModelState::named_tensors() {
    std::vector<NamedParam> out;
    out.push_back({"embed.weight", embedding});
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer." + std::to_string(l) + ".";
        out.push_back({p + "attn_gain", layers[l].attn_gain});
        out.push_back({p + "wq", layers[l].wq});
        out.push_back({p + "wk", layers[l].wk});
        out.push_back({p + "wv", layers[l].wv});
        out.push_back({p + "wo", layers[l].wo});
        out.push_back({p + "ffn_gain", layers[l].ffn_gain});
        out.push_back({p + "w1", layers[l].w1});
        out.push_back({p + "w3", layers[l].w3});
        out.push_back({p + "w2", layers[l].w2});
    }
    out.push_back({"final_gain", final_gain});
    out.push_back({"out.weight", w_out});
    for (auto& p : trainable_params()) out.push_back(p);
    return out;
}

std::uint64_t frozen_checksum(const ModelState& state) {
    std::uint64_t h = kFnvOffset;
    auto mix = [&h](const Tensor& t) {
        for (double v : t.data()) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            for (unsigned char b : bytes) h = fnv1a64_step(h, b);
        }
    };
    mix(state.embedding);
    for (const auto& layer : state.layers) {
        mix(layer.attn_gain);
        mix(layer.wq);
        mix(layer.wk);
        mix(layer.wv);
        mix(layer.wo);
        mix(layer.ffn_gain);
        mix(layer.w1);
        mix(layer.w3);
        mix(layer.w2);
    }
    mix(state.final_gain);
    mix(state.w_out);
    return h;
}

Tensor project_speech(const Tensor& features, ModelState& state) {
    if (features.rank() != 2 || features.dim(1) != state.config.d_speech) {
        throw DimensionError("project_speech: features " + shape_to_string(features.shape()) +
                             " do not match d_speech=" + std::to_string(state.config.d_speech));
    }
    if (features.dim(0) > state.config.max_speech_len) {
        throw LengthError("project_speech: " + std::to_string(features.dim(0)) +
                          " frames exceed max_speech_len=" +
                          std::to_string(state.config.max_speech_len));
    }
    return add_row_bias(matmul(features, state.proj_weight), state.proj_bias);
}

Tensor embed_text(const std::vector<int>& token_ids, ModelState& state) {
    if (static_cast<int>(token_ids.size()) > state.config.max_text_len) {
        throw LengthError("embed_text: " + std::to_string(token_ids.size()) +
                          " tokens exceed max_text_len=" + std::to_string(state.config.max_text_len));
    }
    return embedding_rows(state.embedding, token_ids);
}

FusedSequence fuse(const Tensor& speech, const Tensor& text, const ModelState& state) {
    if (speech.rank() != 2 || text.rank() != 2 || speech.dim(1) != state.config.d_model ||
        text.dim(1) != state.config.d_model) {
        throw DimensionError("fuse: expected [n x d_model] inputs, got " +
                             shape_to_string(speech.shape()) + " and " +
                             shape_to_string(text.shape()));
    }
    const int total = speech.dim(0) + text.dim(0);
    if (total > state.config.max_speech_len + state.config.max_text_len) {
        throw LengthError("fuse: combined length " + std::to_string(total) + " exceeds budget " +
                          std::to_string(state.config.max_speech_len + state.config.max_text_len));
    }
    FusedSequence fused;
    fused.n_frames = speech.dim(0);
    fused.n_tokens = text.dim(0);
    fused.boundary = fused.n_frames;
    fused.embedded = concat_rows(speech, text);
    fused.positions.resize(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) fused.positions[static_cast<std::size_t>(i)] = i;
    return fused;
}

Tensor forward(const FusedSequence& fused, ModelState& state, const ForwardOptions& opts) {
    const ModelConfig& cfg = state.config;
    const int dh = cfg.d_head();
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    const int first_adapted = cfg.n_layers - cfg.adapter_layers;

    Tensor x = fused.embedded;
    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerWeights& layer = state.layers[static_cast<std::size_t>(l)];
        Tensor xn = rms_norm(x, layer.attn_gain, cfg.rms_eps);
        Tensor q = matmul(xn, layer.wq);
        Tensor k = matmul(xn, layer.wk);
        Tensor v = matmul(xn, layer.wv);

        const bool adapted = opts.use_adapter && l >= first_adapted && cfg.adapter_layers > 0;
        Tensor prompt_k, prompt_v, gate_tanh;
        if (adapted) {
            const int a = l - first_adapted;
            Tensor& prompts = state.adapter.prompts[static_cast<std::size_t>(a)];
            prompt_k = matmul(prompts, layer.wk);
            prompt_v = matmul(prompts, layer.wv);
            gate_tanh = tanh_of(state.adapter.gates[static_cast<std::size_t>(a)]);
        }

        std::vector<Tensor> heads;
        heads.reserve(static_cast<std::size_t>(cfg.n_heads));
        for (int h = 0; h < cfg.n_heads; ++h) {
            Tensor qh = rotary_embed(slice_cols(q, h * dh, dh), fused.positions, cfg.rotary_base);
            Tensor kh = rotary_embed(slice_cols(k, h * dh, dh), fused.positions, cfg.rotary_base);
            Tensor vh = slice_cols(v, h * dh, dh);
            Tensor probs = causal_softmax(scale(matmul(qh, transpose(kh)), inv_sqrt_dh));
            Tensor oh = matmul(probs, vh);
            if (adapted) {
                // Prompt keys/values are position-free; a separate softmax
                // over the prompt slots, scaled by tanh(gate), adds to the
                // ordinary attention output.
                Tensor pk = slice_cols(prompt_k, h * dh, dh);
                Tensor pv = slice_cols(prompt_v, h * dh, dh);
                Tensor pprobs = softmax(scale(matmul(qh, transpose(pk)), inv_sqrt_dh), 1);
                Tensor po = matmul(pprobs, pv);
                oh = add(oh, mul_scalar_at(po, gate_tanh, h));
            }
            heads.push_back(oh);
        }
        x = add(x, matmul(concat_cols(heads), layer.wo));
        Tensor xn2 = rms_norm(x, layer.ffn_gain, cfg.rms_eps);
        x = add(x, swiglu_ffn(xn2, layer.w1, layer.w3, layer.w2));
        if (opts.layer_trace) opts.layer_trace->push_back(x.detach_copy());
    }
    return matmul(rms_norm(x, state.final_gain, cfg.rms_eps), state.w_out);
}

GenerateResult generate(const Tensor& speech_features, const std::vector<int>& prompt_ids,
                        ModelState& state, int max_new) {
    NoGradGuard no_grad;
    GenerateResult result;
    std::vector<int> seq;
    seq.reserve(prompt_ids.size() + 1 + static_cast<std::size_t>(std::max(max_new, 0)));
    seq.push_back(tokenizer::kBos);
    seq.insert(seq.end(), prompt_ids.begin(), prompt_ids.end());

    Tensor speech = project_speech(speech_features, state);
    for (int step = 0; step < max_new; ++step) {
        if (static_cast<int>(seq.size()) + 1 > state.config.max_text_len) {
            result.truncated = true;
            break;
        }
        Tensor logits = forward(fuse(speech, embed_text(seq, state), state), state);
        const int t = logits.dim(0) - 1;
        const double* row = logits.data().data() +
                            static_cast<std::size_t>(t) * state.config.vocab_size;
        int best = 0;
        for (int v = 1; v < state.config.vocab_size; ++v) {
            if (row[v] > row[best]) best = v;
        }
        if (best == tokenizer::kEos) {
            result.hit_eos = true;
            break;
        }
        seq.push_back(best);
        result.tokens.push_back(best);
    }
    return result;
}

}  // namespace sqa
