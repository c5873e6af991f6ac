#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqa/config.hpp"
#include "sqa/model.hpp"
#include "sqa/record.hpp"
#include "sqa/tensor.hpp"

namespace sqa {

enum class OptimizerKind { sgd, adamw };

struct TrainConfig {
    double learning_rate = 9e-3;
    int batch_size = 8;
    int epochs = 10;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adamw;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    double grad_clip = 0.0;  // 0 disables clipping

    void validate() const;
    static TrainConfig from_kv(const KvConfig& kv);
    KvConfig to_kv() const;
};

// One SQA-formatted training sample: speech features S_i plus the full
// token sequence a_i = BOS, prompt bytes, answer bytes, EOS. prompt_tokens
// is p_i; loss_mask[j] is true exactly for 0-based targets p_i .. x_i-1
// (the displayed sum over j = p_i+1 .. x_i).
struct BatchSample {
    std::string id;
    Tensor speech_features;  // [F x d_speech], may be 0 x d
    std::vector<int> tokens;
    int prompt_tokens = 0;
    std::vector<std::uint8_t> loss_mask;

    int total_tokens() const { return static_cast<int>(tokens.size()); }
    void validate() const;  // throws ContractError
};

using Batch = std::vector<BatchSample>;

// Whether the document text is inlined into the prompt (cascade / text-only
// QA) or supplied as speech frames.
enum class InputMode { speech, text };

// Prompt text for a record: the question, with sqa2 options serialized as
// "A. ...\nB. ...\nC. ...\nD. ...". In text mode the document (or a
// transcript standing in for it) is prepended.
std::string build_prompt_text(const SqaRecord& record, InputMode mode,
                              const std::string& document_override = "");

BatchSample record_to_sample(const SqaRecord& record, const Tensor& features, InputMode mode);

struct LossValue {
    double sum = 0.0;
    double mean = 0.0;
    std::int64_t supervised = 0;
};

// Masked next-token NLL for one sample given decoder logits over the fused
// sequence (speech rows first, text rows from `boundary`). Sum over the
// supervised region, matching the displayed form; divide by the count for
// the mean variant. Differentiable through `logits`.
Tensor masked_nll_loss(const Tensor& logits, const BatchSample& sample, int boundary);

// Value-only convenience over a whole batch of per-sample logits.
LossValue masked_nll_value(const std::vector<Tensor>& per_sample_logits, const Batch& batch,
                           const std::vector<int>& boundaries);

class Optimizer {
public:
    Optimizer(std::vector<NamedParam> params, const TrainConfig& cfg);
    void zero_grad();
    void step();
    std::vector<NamedParam>& params() { return params_; }
    const std::vector<NamedParam>& params() const { return params_; }

private:
    std::vector<NamedParam> params_;
    TrainConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;  // adamw moments
};

// Owns the optimizer state for a model's trainable partition.
class Trainer {
public:
    Trainer(ModelState& state, const TrainConfig& cfg);

    // forward -> masked NLL -> backward -> update trainable partition only.
    // Non-finite loss aborts with the offending sample id.
    LossValue step(const Batch& batch);

    const TrainConfig& config() const { return cfg_; }

private:
    ModelState& state_;
    TrainConfig cfg_;
    Optimizer opt_;
};

struct LossCurvePoint {
    int epoch = 0;
    int step = 0;
    double sum_loss = 0.0;
    double mean_loss = 0.0;
};

struct TrainResult {
    std::vector<LossCurvePoint> curve;
    std::vector<double> epoch_mean_loss;
};

// Seeded per-epoch shuffle, one checkpoint per epoch plus the loss curve
// CSV under checkpoint_dir. (seed, data, config) fully determine the run.
TrainResult train_loop(ModelState& state, const std::vector<BatchSample>& dataset,
                       const TrainConfig& cfg, const std::string& checkpoint_dir);

void write_loss_curve_csv(const std::string& path, const std::vector<LossCurvePoint>& curve);

}  // namespace sqa
