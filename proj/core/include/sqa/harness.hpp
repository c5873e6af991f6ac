#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqa/config.hpp"
#include "sqa/metrics.hpp"
#include "sqa/model.hpp"
#include "sqa/noise.hpp"
#include "sqa/record.hpp"
#include "sqa/training.hpp"

namespace sqa {

// Experiment driver configuration. Paths are validated when the experiment
// starts; experiment-specific fields must be complete.
struct ExperimentConfig {
    std::string experiment;  // asr | sqa1 | sqa2 | sweep | ablation
    std::string model_config_path;
    std::string train_config_path;
    std::string train_data;
    std::string eval_data;
    std::string asr_train_data;  // ASR-as-SQA corpus (pretraining arm, cascade ASR)
    std::string asr_eval_data;
    bool asr_pretrain = false;
    InputMode input_mode = InputMode::speech;
    std::uint64_t seed = 0;
    std::string out_dir;
    int max_new_tokens = 64;
    // sweep inputs
    std::string e2e_checkpoint;
    std::string asr_checkpoint;
    std::string textqa_checkpoint;
    std::vector<double> snr_grid;  // default -50..+20 dB step 5

    static ExperimentConfig from_kv(const KvConfig& kv);
};

std::vector<double> default_snr_grid();

// Noise stream for one record: depends only on (spec seed, record id) so
// every pipeline sees bit-identical noisy features regardless of order.
std::uint64_t record_noise_seed(const NoiseSpec& spec, const std::string& record_id);
Tensor noisy_features_for_record(const Tensor& clean, const NoiseSpec& spec,
                                 const std::string& record_id);

// Loads records into training samples, reading each record's feature file
// (text mode embeds the gold document in the prompt and uses zero frames).
std::vector<BatchSample> load_dataset(const std::string& records_path, const ModelConfig& config,
                                      InputMode mode);

// Generate -> metrics over homogeneous-task records. Noise, when given, is
// applied to the speech features only. Duplicate ids are rejected.
EvalReport run_e2e_eval(ModelState& state, const std::vector<SqaRecord>& records,
                        const std::string& records_path,
                        const std::optional<NoiseSpec>& noise, int max_new);

// Text-only QA over gold documents (0 speech frames).
EvalReport run_text_eval(ModelState& state, const std::vector<SqaRecord>& records,
                         const std::string& records_path, int max_new);

struct CascadeResult {
    EvalReport report;
    double mean_intermediate_wer = 0.0;  // ASR transcripts vs gold documents
};

// Noisy speech -> ASR transcript (greedy) -> transcript substituted as the
// textual document in the question prompt -> text-only QA. With
// oracle_asr=true the transcript is the gold document passthrough.
CascadeResult run_cascade_eval(ModelState& asr_state, ModelState& textqa_state,
                               const std::vector<SqaRecord>& records,
                               const std::string& records_path,
                               const std::optional<NoiseSpec>& noise, bool oracle_asr,
                               int max_new);

struct SweepRow {
    double snr_db = 0.0;
    bool ok = false;
    std::string error;
    double e2e_accuracy = 0.0;
    double cascade_accuracy = 0.0;
    double cascade_wer = 0.0;
};

// Both pipelines evaluated on the same noisy realizations per grid point
// (shared per-record noise streams). A failed grid point is recorded and
// the sweep continues.
std::vector<SweepRow> snr_sweep(ModelState& e2e_state, ModelState& asr_state,
                                ModelState& textqa_state,
                                const std::vector<SqaRecord>& records,
                                const std::string& records_path,
                                const std::vector<double>& grid, std::uint64_t seed, int max_new);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_sweep_plot_data(const std::string& path, const std::vector<SweepRow>& rows);

struct AblationResult {
    EvalReport arm_pretrained_sqa;   // ASR-as-SQA pretraining, then SQA
    EvalReport arm_scratch_sqa;      // SQA only
    EvalReport arm_pretrained_asr;   // held-out ASR behavior of arm A
    EvalReport arm_scratch_asr;      // zero-shot ASR behavior of arm B
};

// Two arms with identical seeds and data; only the pretraining differs.
AblationResult run_ablation(const ExperimentConfig& cfg);

// Condition name -> report, plus optional sweep rows; rendered as markdown
// tables in the papers' column layout and CSVs. Re-emission is idempotent.
struct RunArtifacts {
    std::string out_dir;
    std::vector<std::pair<std::string, EvalReport>> reports;
    std::vector<SweepRow> sweep;
    std::vector<std::string> checkpoints;
};

void emit_report(const RunArtifacts& artifacts);

// Top-level dispatch for the CLI. Writes all artifacts plus manifest.txt
// under cfg.out_dir; throws on any incomplete condition.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace sqa
