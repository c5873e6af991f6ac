#include "sqa/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "sqa/checkpoint.hpp"
#include "sqa/error.hpp"
#include "sqa/features.hpp"
#include "sqa/manifest.hpp"
#include "sqa/prompts.hpp"
#include "sqa/report.hpp"
#include "sqa/rng.hpp"
#include "sqa/synth.hpp"
#include "sqa/text.hpp"
#include "sqa/tokenizer.hpp"

namespace fs = std::filesystem;

namespace sqa {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void check_unique_ids(const std::vector<SqaRecord>& records) {
    std::set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) {
            throw InputError("duplicate record id '" + r.id + "'");
        }
    }
}

TaskKind common_task(const std::vector<SqaRecord>& records) {
    if (records.empty()) throw InputError("no records to evaluate");
    const TaskKind task = records.front().task;
    for (const auto& r : records) {
        if (r.task != task) {
            throw InputError("mixed tasks in one evaluation: record '" + r.id + "'");
        }
    }
    return task;
}

Tensor load_clean_features(const std::string& records_path, const SqaRecord& record,
                           const ModelConfig& config) {
    const FeatureMatrix m = read_features(resolve_speech_path(records_path, record),
                                          static_cast<std::uint32_t>(config.max_speech_len));
    if (static_cast<int>(m.dim) != config.d_speech) {
        throw DimensionError("feature file for '" + record.id + "' has dim " +
                             std::to_string(m.dim) + ", model expects " +
                             std::to_string(config.d_speech));
    }
    return m.to_tensor();
}

std::string reference_for(const SqaRecord& record) { return record.answer; }

}  // namespace

std::vector<double> default_snr_grid() {
    std::vector<double> grid;
    for (int snr = -50; snr <= 20; snr += 5) grid.push_back(static_cast<double>(snr));
    return grid;
}

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
    ExperimentConfig c;
    c.experiment = kv.get_string("experiment", "");
    c.model_config_path = kv.get_string("model_config", "");
    c.train_config_path = kv.get_string("train_config", "");
    c.train_data = kv.get_string("train_data", "");
    c.eval_data = kv.get_string("eval_data", "");
    c.asr_train_data = kv.get_string("asr_train_data", "");
    c.asr_eval_data = kv.get_string("asr_eval_data", "");
    c.asr_pretrain = kv.get_bool("asr_pretrain", false);
    const std::string mode = kv.get_string("input_mode", "speech");
    if (mode == "speech") {
        c.input_mode = InputMode::speech;
    } else if (mode == "text") {
        c.input_mode = InputMode::text;
    } else {
        throw ConfigError("input_mode must be speech or text, got '" + mode + "'");
    }
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    c.out_dir = kv.get_string("out_dir", "");
    c.max_new_tokens = static_cast<int>(kv.get_int("max_new_tokens", c.max_new_tokens));
    c.e2e_checkpoint = kv.get_string("e2e_checkpoint", "");
    c.asr_checkpoint = kv.get_string("asr_checkpoint", "");
    c.textqa_checkpoint = kv.get_string("textqa_checkpoint", "");
    if (kv.has("snr_grid")) {
        std::string grid = kv.get_string("snr_grid", "");
        std::replace(grid.begin(), grid.end(), ',', ' ');
        std::istringstream in(grid);
        double v;
        while (in >> v) c.snr_grid.push_back(v);
    }
    return c;
}

std::uint64_t record_noise_seed(const NoiseSpec& spec, const std::string& record_id) {
    return derive_seed(spec.seed, fnv1a64(record_id));
}

Tensor noisy_features_for_record(const Tensor& clean, const NoiseSpec& spec,
                                 const std::string& record_id) {
    return inject_noise(clean, NoiseSpec{spec.snr_db, record_noise_seed(spec, record_id)});
}

std::vector<BatchSample> load_dataset(const std::string& records_path, const ModelConfig& config,
                                      InputMode mode) {
    const std::vector<SqaRecord> records = read_jsonl(records_path);
    check_unique_ids(records);
    std::vector<BatchSample> samples;
    samples.reserve(records.size());
    for (const auto& r : records) {
        Tensor features = mode == InputMode::speech
                              ? load_clean_features(records_path, r, config)
                              : Tensor::zeros({0, config.d_speech});
        samples.push_back(record_to_sample(r, features, mode));
    }
    return samples;
}

EvalReport run_e2e_eval(ModelState& state, const std::vector<SqaRecord>& records,
                        const std::string& records_path,
                        const std::optional<NoiseSpec>& noise, int max_new) {
    check_unique_ids(records);
    const TaskKind task = common_task(records);
    std::vector<ScoredPair> pairs;
    pairs.reserve(records.size());
    for (const auto& r : records) {
        Tensor features = load_clean_features(records_path, r, state.config);
        if (noise) features = noisy_features_for_record(features, *noise, r.id);
        const std::string prompt = build_prompt_text(r, InputMode::speech);
        const GenerateResult gen =
            generate(features, tokenizer::encode(prompt), state, max_new);
        ScoredPair pair;
        pair.id = r.id;
        pair.hypothesis = tokenizer::decode(gen.tokens);
        pair.reference = reference_for(r);
        if (r.label) pair.gold_label = *r.label;
        pairs.push_back(std::move(pair));
    }
    TrigramHashEmbedder embedder;
    return evaluate_pairs(task, pairs, &embedder);
}

EvalReport run_text_eval(ModelState& state, const std::vector<SqaRecord>& records,
                         const std::string& records_path, int max_new) {
    (void)records_path;
    check_unique_ids(records);
    const TaskKind task = common_task(records);
    Tensor no_frames = Tensor::zeros({0, state.config.d_speech});
    std::vector<ScoredPair> pairs;
    pairs.reserve(records.size());
    for (const auto& r : records) {
        if (!r.document) {
            throw InputError("text-mode eval needs a document on record '" + r.id + "'");
        }
        const std::string prompt = build_prompt_text(r, InputMode::text);
        const GenerateResult gen =
            generate(no_frames, tokenizer::encode(prompt), state, max_new);
        ScoredPair pair;
        pair.id = r.id;
        pair.hypothesis = tokenizer::decode(gen.tokens);
        pair.reference = reference_for(r);
        if (r.label) pair.gold_label = *r.label;
        pairs.push_back(std::move(pair));
    }
    TrigramHashEmbedder embedder;
    return evaluate_pairs(task, pairs, &embedder);
}

CascadeResult run_cascade_eval(ModelState& asr_state, ModelState& textqa_state,
                               const std::vector<SqaRecord>& records,
                               const std::string& records_path,
                               const std::optional<NoiseSpec>& noise, bool oracle_asr,
                               int max_new) {
    check_unique_ids(records);
    const TaskKind task = common_task(records);
    const std::string asr_instruction = asr_prompt_templates().front();
    Tensor no_frames = Tensor::zeros({0, textqa_state.config.d_speech});

    std::vector<ScoredPair> pairs;
    pairs.reserve(records.size());
    double wer_sum = 0.0;
    int wer_n = 0;
    for (const auto& r : records) {
        if (!r.document) {
            throw InputError("cascade eval needs a gold document on record '" + r.id + "'");
        }
        std::string transcript;
        if (oracle_asr) {
            transcript = *r.document;
        } else {
            Tensor features = load_clean_features(records_path, r, asr_state.config);
            if (noise) features = noisy_features_for_record(features, *noise, r.id);
            SqaRecord asr_query;
            asr_query.task = TaskKind::asr;
            asr_query.question = asr_instruction;
            const std::string prompt = build_prompt_text(asr_query, InputMode::speech);
            const GenerateResult gen =
                generate(features, tokenizer::encode(prompt), asr_state, max_new);
            transcript = tokenizer::decode(gen.tokens);
        }
        wer_sum += wer(transcript, *r.document);
        ++wer_n;

        const std::string qa_prompt = build_prompt_text(r, InputMode::text, transcript);
        const GenerateResult gen =
            generate(no_frames, tokenizer::encode(qa_prompt), textqa_state, max_new);
        ScoredPair pair;
        pair.id = r.id;
        pair.hypothesis = tokenizer::decode(gen.tokens);
        pair.reference = reference_for(r);
        if (r.label) pair.gold_label = *r.label;
        pairs.push_back(std::move(pair));
    }
    CascadeResult result;
    TrigramHashEmbedder embedder;
    result.report = evaluate_pairs(task, pairs, &embedder);
    result.mean_intermediate_wer = wer_n > 0 ? wer_sum / wer_n : 0.0;
    return result;
}

std::vector<SweepRow> snr_sweep(ModelState& e2e_state, ModelState& asr_state,
                                ModelState& textqa_state,
                                const std::vector<SqaRecord>& records,
                                const std::string& records_path,
                                const std::vector<double>& grid, std::uint64_t seed, int max_new) {
    std::vector<SweepRow> rows;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        SweepRow row;
        row.snr_db = grid[gi];
        const NoiseSpec spec{grid[gi], derive_seed(seed, gi)};
        try {
            const EvalReport e2e = run_e2e_eval(e2e_state, records, records_path, spec, max_new);
            const CascadeResult cascade =
                run_cascade_eval(asr_state, textqa_state, records, records_path, spec, false,
                                 max_new);
            row.e2e_accuracy = e2e.accuracy.value_or(0.0);
            row.cascade_accuracy = cascade.report.accuracy.value_or(0.0);
            row.cascade_wer = cascade.mean_intermediate_wer;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write sweep csv: " + path);
    out << "snr_db,pipeline,accuracy,intermediate_wer,status\n";
    for (const auto& row : rows) {
        if (!row.ok) {
            out << format_double(row.snr_db) << ",,,," << "failed\n";
            continue;
        }
        out << format_double(row.snr_db) << ",end_to_end," << fmt4(row.e2e_accuracy) << ",,ok\n";
        out << format_double(row.snr_db) << ",cascade," << fmt4(row.cascade_accuracy) << ","
            << fmt4(row.cascade_wer) << ",ok\n";
    }
}

void write_sweep_plot_data(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write plot data: " + path);
    out << "snr_db,end_to_end_accuracy,cascade_accuracy\n";
    for (const auto& row : rows) {
        if (!row.ok) continue;
        out << format_double(row.snr_db) << "," << fmt4(row.e2e_accuracy) << ","
            << fmt4(row.cascade_accuracy) << "\n";
    }
}

namespace {

struct LoadedExperiment {
    ModelConfig model_config;
    TrainConfig train_config;
};

LoadedExperiment load_configs(const ExperimentConfig& cfg) {
    LoadedExperiment le;
    if (cfg.model_config_path.empty()) throw ConfigError("model_config is required");
    le.model_config = ModelConfig::from_kv(KvConfig::from_file(cfg.model_config_path));
    if (!cfg.train_config_path.empty()) {
        le.train_config = TrainConfig::from_kv(KvConfig::from_file(cfg.train_config_path));
    }
    le.train_config.seed = cfg.seed;
    return le;
}

void require_path(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " is required");
    if (!fs::exists(path)) throw IoError(std::string(what) + " does not exist: " + path);
}

}  // namespace

AblationResult run_ablation(const ExperimentConfig& cfg) {
    require_path(cfg.train_data, "train_data");
    require_path(cfg.eval_data, "eval_data");
    require_path(cfg.asr_train_data, "asr_train_data");
    require_path(cfg.asr_eval_data, "asr_eval_data");
    LoadedExperiment le = load_configs(cfg);

    const auto sqa_train = load_dataset(cfg.train_data, le.model_config, InputMode::speech);
    const auto asr_train = load_dataset(cfg.asr_train_data, le.model_config, InputMode::speech);
    const auto eval_records = read_jsonl(cfg.eval_data);
    const auto asr_eval_records = read_jsonl(cfg.asr_eval_data);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    // Arm A: ASR-as-SQA pretraining, then the SQA task.
    ModelState arm_a = init_model_state(le.model_config, cfg.seed);
    train_loop(arm_a, asr_train, le.train_config, (out / "arm_pretrained" / "asr").string());
    train_loop(arm_a, sqa_train, le.train_config, (out / "arm_pretrained" / "sqa").string());

    // Arm B: identical seed and data, SQA only.
    ModelState arm_b = init_model_state(le.model_config, cfg.seed);
    train_loop(arm_b, sqa_train, le.train_config, (out / "arm_scratch" / "sqa").string());

    AblationResult result;
    result.arm_pretrained_sqa =
        run_e2e_eval(arm_a, eval_records, cfg.eval_data, std::nullopt, cfg.max_new_tokens);
    result.arm_scratch_sqa =
        run_e2e_eval(arm_b, eval_records, cfg.eval_data, std::nullopt, cfg.max_new_tokens);
    result.arm_pretrained_asr = run_e2e_eval(arm_a, asr_eval_records, cfg.asr_eval_data,
                                             std::nullopt, cfg.max_new_tokens);
    result.arm_scratch_asr = run_e2e_eval(arm_b, asr_eval_records, cfg.asr_eval_data,
                                          std::nullopt, cfg.max_new_tokens);
    return result;
}

void emit_report(const RunArtifacts& artifacts) {
    fs::create_directories(artifacts.out_dir);
    const fs::path out(artifacts.out_dir);
    {
        std::ofstream csv(out / "summary.csv", std::ios::binary);
        if (!csv) throw IoError("cannot write summary.csv in " + artifacts.out_dir);
        csv << eval_summary_header() << "\n";
        for (const auto& [name, report] : artifacts.reports) {
            csv << eval_summary_row(name, report) << "\n";
        }
    }
    {
        std::ofstream md(out / "summary.md", std::ios::binary);
        if (!md) throw IoError("cannot write summary.md in " + artifacts.out_dir);
        md << "# Run summary\n\n";
        md << "| Condition | Task | N | WER | Accuracy | F1 | BLEU-1 | ROUGE-1 | ROUGE-2 | "
              "ROUGE-L | Similarity |\n";
        md << "|---|---|---|---|---|---|---|---|---|---|---|\n";
        auto cell = [](const std::optional<double>& v) {
            return v ? fmt4(*v) : std::string("-");
        };
        for (const auto& [name, r] : artifacts.reports) {
            md << "| " << name << " | " << task_to_string(r.task) << " | " << r.n << " | "
               << cell(r.wer) << " | " << cell(r.accuracy) << " | " << cell(r.macro_f1) << " | "
               << cell(r.bleu1) << " | " << cell(r.rouge1) << " | " << cell(r.rouge2) << " | "
               << cell(r.rouge_l) << " | " << cell(r.embed_sim) << " |\n";
        }
        if (!artifacts.sweep.empty()) {
            md << "\n## SNR sweep\n\n| SNR (dB) | End-to-end | Cascade | Cascade WER |\n";
            md << "|---|---|---|---|\n";
            for (const auto& row : artifacts.sweep) {
                if (!row.ok) {
                    md << "| " << row.snr_db << " | failed | failed | - |\n";
                    continue;
                }
                md << "| " << row.snr_db << " | " << fmt4(row.e2e_accuracy) << " | "
                   << fmt4(row.cascade_accuracy) << " | " << fmt4(row.cascade_wer) << " |\n";
            }
        }
        if (!artifacts.checkpoints.empty()) {
            md << "\n## Checkpoints\n\n";
            for (const auto& c : artifacts.checkpoints) md << "- `" << c << "`\n";
        }
    }
    if (!artifacts.sweep.empty()) {
        write_sweep_csv((out / "sweep.csv").string(), artifacts.sweep);
        write_sweep_plot_data((out / "plot_data.csv").string(), artifacts.sweep);
    }
}

void run_experiment(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    RunArtifacts artifacts;
    artifacts.out_dir = cfg.out_dir;

    if (cfg.experiment == "asr" || cfg.experiment == "sqa1" || cfg.experiment == "sqa2") {
        require_path(cfg.train_data, "train_data");
        require_path(cfg.eval_data, "eval_data");
        LoadedExperiment le = load_configs(cfg);
        ModelState state = init_model_state(le.model_config, cfg.seed);
        if (cfg.asr_pretrain) {
            require_path(cfg.asr_train_data, "asr_train_data");
            const auto asr_train =
                load_dataset(cfg.asr_train_data, le.model_config, InputMode::speech);
            train_loop(state, asr_train, le.train_config, (out / "checkpoints_asr").string());
            artifacts.checkpoints.push_back("checkpoints_asr");
        }
        const auto train = load_dataset(cfg.train_data, le.model_config, cfg.input_mode);
        train_loop(state, train, le.train_config, (out / "checkpoints").string());
        artifacts.checkpoints.push_back("checkpoints");
        {
            std::ofstream mc(out / "model.cfg", std::ios::binary);
            for (const auto& [k, v] : le.model_config.to_kv().values()) {
                mc << k << " = " << v << "\n";
            }
        }
        const auto eval_records = read_jsonl(cfg.eval_data);
        EvalReport report =
            cfg.input_mode == InputMode::text
                ? run_text_eval(state, eval_records, cfg.eval_data, cfg.max_new_tokens)
                : run_e2e_eval(state, eval_records, cfg.eval_data, std::nullopt,
                               cfg.max_new_tokens);
        write_eval_rows_csv((out / "eval_rows.csv").string(), report);
        artifacts.reports.emplace_back(cfg.experiment, std::move(report));
    } else if (cfg.experiment == "sweep") {
        require_path(cfg.eval_data, "eval_data");
        require_path(cfg.e2e_checkpoint, "e2e_checkpoint");
        require_path(cfg.asr_checkpoint, "asr_checkpoint");
        require_path(cfg.textqa_checkpoint, "textqa_checkpoint");
        LoadedExperiment le = load_configs(cfg);
        ModelState e2e = load_model(cfg.e2e_checkpoint, le.model_config);
        ModelState asr = load_model(cfg.asr_checkpoint, le.model_config);
        ModelState textqa = load_model(cfg.textqa_checkpoint, le.model_config);
        const auto records = read_jsonl(cfg.eval_data);
        const std::vector<double> grid =
            cfg.snr_grid.empty() ? default_snr_grid() : cfg.snr_grid;
        artifacts.sweep = snr_sweep(e2e, asr, textqa, records, cfg.eval_data, grid, cfg.seed,
                                    cfg.max_new_tokens);
        for (const auto& row : artifacts.sweep) {
            if (!row.ok) {
                emit_report(artifacts);
                write_manifest(cfg.out_dir);
                throw IoError("sweep point " + format_double(row.snr_db) +
                              " failed: " + row.error);
            }
        }
    } else if (cfg.experiment == "ablation") {
        AblationResult ab = run_ablation(cfg);
        artifacts.reports.emplace_back("sqa_with_asr_pretraining", ab.arm_pretrained_sqa);
        artifacts.reports.emplace_back("sqa_without_asr_pretraining", ab.arm_scratch_sqa);
        artifacts.reports.emplace_back("asr_of_pretrained_arm", ab.arm_pretrained_asr);
        artifacts.reports.emplace_back("asr_of_scratch_arm", ab.arm_scratch_asr);
    } else {
        throw ConfigError("unknown experiment '" + cfg.experiment +
                          "', expected asr|sqa1|sqa2|sweep|ablation");
    }
    emit_report(artifacts);
    write_manifest(cfg.out_dir);
}

}  // namespace sqa
