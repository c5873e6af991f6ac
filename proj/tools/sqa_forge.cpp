// sqa-forge: dataset generation, QC, stats, training, evaluation and the
// noise-robustness sweep, one subcommand each. Key=value --config files give
// defaults; explicit flags win.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqa/checkpoint.hpp"
#include "sqa/config.hpp"
#include "sqa/error.hpp"
#include "sqa/harness.hpp"
#include "sqa/manifest.hpp"
#include "sqa/metrics.hpp"
#include "sqa/qc.hpp"
#include "sqa/record.hpp"
#include "sqa/report.hpp"
#include "sqa/stats.hpp"
#include "sqa/synth.hpp"
#include "sqa/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct KvFlag {
    std::string key;
    std::string value;
};

// Collects --config file contents, then overlays any flags the user passed.
sqa::KvConfig merge_config(const std::string& config_path, CLI::App* cmd,
                           const std::vector<std::pair<std::string, std::string*>>& flags) {
    sqa::KvConfig kv;
    if (!config_path.empty()) kv = sqa::KvConfig::from_file(config_path);
    for (const auto& [flag, value] : flags) {
        if (cmd->count(flag) > 0) kv.set(flag.substr(2), *value);
    }
    return kv;
}

int cmd_gen_data(const std::string& config_path, CLI::App* cmd,
                 std::vector<std::pair<std::string, std::string*>> flags,
                 const std::string& out_dir) {
    sqa::KvConfig kv = merge_config(config_path, cmd, flags);
    const sqa::SynthSpec spec = sqa::SynthSpec::from_kv(kv);
    fs::create_directories(out_dir);
    const sqa::SynthResult result = sqa::synth_corpus(spec, out_dir);
    sqa::write_jsonl((fs::path(out_dir) / "records.jsonl").string(), result.records);
    sqa::write_manifest(out_dir);
    std::cout << "wrote " << result.records.size() << " records and "
              << result.feature_files.size() << " feature files to " << out_dir << "\n";
    return 0;
}

int cmd_qc(const std::string& in_path, const std::string& out_dir, const std::string& report_path,
           int min_run) {
    const auto records = sqa::read_jsonl(in_path, /*validate=*/false);
    sqa::LexicalJudge judge;
    std::vector<sqa::SqaRecord> kept;
    const sqa::QcReport report = sqa::run_qc_pipeline(records, judge, kept, min_run);
    fs::create_directories(out_dir);
    sqa::write_jsonl((fs::path(out_dir) / "cleaned.jsonl").string(), kept);
    const std::string rp =
        report_path.empty() ? (fs::path(out_dir) / "qc_report.csv").string() : report_path;
    sqa::write_qc_report_csv(rp, report);
    sqa::write_manifest(out_dir);
    std::cout << "kept " << kept.size() << " of " << records.size() << " records\n";
    return 0;
}

int cmd_stats(const std::string& in_path, const std::string& out_dir) {
    const auto records = sqa::read_jsonl(in_path);
    const sqa::StatsReport report = sqa::compute_stats(records);
    sqa::write_stats_csv(out_dir, report);
    sqa::write_stats_markdown(out_dir, report);
    sqa::write_manifest(out_dir);
    std::cout << "stats over " << report.n_records << " records written to " << out_dir << "\n";
    return 0;
}

int cmd_eval_predictions(const std::string& pred_path, const std::string& gold_path,
                         const std::string& out_dir) {
    const auto gold = sqa::read_jsonl(gold_path);
    std::map<std::string, const sqa::SqaRecord*> by_id;
    for (const auto& r : gold) {
        if (!by_id.emplace(r.id, &r).second) {
            throw sqa::InputError("duplicate record id '" + r.id + "' in gold file");
        }
    }
    std::ifstream in(pred_path);
    if (!in) throw sqa::IoError("cannot open predictions: " + pred_path);
    std::vector<sqa::ScoredPair> pairs;
    sqa::TaskKind task = sqa::TaskKind::asr;
    bool task_set = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw sqa::InputError(pred_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string id = j.at("id").get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw sqa::InputError("prediction for unknown record id '" + id + "'");
        }
        const sqa::SqaRecord& r = *it->second;
        if (!task_set) {
            task = r.task;
            task_set = true;
        } else if (task != r.task) {
            throw sqa::InputError("predictions span multiple tasks; evaluate one task at a time");
        }
        sqa::ScoredPair pair;
        pair.id = id;
        pair.hypothesis = j.at("output").get<std::string>();
        pair.reference = r.answer;
        if (r.label) pair.gold_label = *r.label;
        pairs.push_back(std::move(pair));
    }
    if (pairs.empty()) throw sqa::InputError("no predictions to score");
    sqa::TrigramHashEmbedder embedder;
    const sqa::EvalReport report = sqa::evaluate_pairs(task, pairs, &embedder);
    fs::create_directories(out_dir);
    sqa::write_eval_report_csv((fs::path(out_dir) / "report.csv").string(), report);
    sqa::write_eval_rows_csv((fs::path(out_dir) / "report_rows.csv").string(), report);
    sqa::write_eval_report_markdown((fs::path(out_dir) / "report.md").string(),
                                    "Evaluation report", report);
    sqa::write_manifest(out_dir);
    std::cout << "scored " << report.n << " predictions\n";
    return 0;
}

int cmd_eval_model(const std::string& checkpoint, const std::string& model_config_path,
                   const std::string& data_path, const std::string& out_dir,
                   const std::string& mode, bool has_snr, double snr_db, std::uint64_t noise_seed,
                   const std::string& asr_checkpoint, int max_new) {
    const sqa::ModelConfig mc =
        sqa::ModelConfig::from_kv(sqa::KvConfig::from_file(model_config_path));
    const auto records = sqa::read_jsonl(data_path);
    std::optional<sqa::NoiseSpec> noise;
    if (has_snr) noise = sqa::NoiseSpec{snr_db, noise_seed};

    sqa::EvalReport report;
    double cascade_wer = -1.0;
    sqa::ModelState state = sqa::load_model(checkpoint, mc);
    if (mode == "e2e") {
        report = sqa::run_e2e_eval(state, records, data_path, noise, max_new);
    } else if (mode == "text") {
        report = sqa::run_text_eval(state, records, data_path, max_new);
    } else if (mode == "cascade") {
        if (asr_checkpoint.empty()) {
            throw sqa::ConfigError("--asr-checkpoint is required for cascade mode");
        }
        sqa::ModelState asr = sqa::load_model(asr_checkpoint, mc);
        const sqa::CascadeResult cascade =
            sqa::run_cascade_eval(asr, state, records, data_path, noise, false, max_new);
        report = cascade.report;
        cascade_wer = cascade.mean_intermediate_wer;
    } else {
        throw sqa::ConfigError("--mode must be e2e, text or cascade");
    }
    fs::create_directories(out_dir);
    sqa::write_eval_report_csv((fs::path(out_dir) / "report.csv").string(), report);
    sqa::write_eval_rows_csv((fs::path(out_dir) / "report_rows.csv").string(), report);
    sqa::write_eval_report_markdown((fs::path(out_dir) / "report.md").string(),
                                    "Evaluation report", report);
    sqa::write_manifest(out_dir);
    std::cout << "evaluated " << report.n << " records";
    if (cascade_wer >= 0.0) std::cout << " (cascade intermediate WER " << cascade_wer << ")";
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sqa-forge: speech-text QA toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus");
    std::string gen_config, gen_out;
    std::string g_asr, g_sqa1, g_sqa2, g_vocab, g_doc_len, g_fpt, g_sigma, g_dspeech, g_seed,
        g_offset;
    gen->add_option("--config", gen_config, "key=value config file");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--n-asr", g_asr, "asr record count");
    gen->add_option("--n-sqa1", g_sqa1, "sqa1 record count");
    gen->add_option("--n-sqa2", g_sqa2, "sqa2 record count");
    gen->add_option("--vocab", g_vocab, "corpus word vocabulary size (<=256)");
    gen->add_option("--doc-len", g_doc_len, "words per document");
    gen->add_option("--frames-per-token", g_fpt, "encoder frames per word");
    gen->add_option("--noise-sigma", g_sigma, "encoder noise stddev");
    gen->add_option("--d-speech", g_dspeech, "encoder feature width");
    gen->add_option("--seed", g_seed, "corpus seed");
    gen->add_option("--index-offset", g_offset, "first sample index (disjoint splits)");

    // qc
    auto* qc = app.add_subcommand("qc", "Run the data-quality pipeline");
    std::string qc_in, qc_out, qc_report;
    int qc_min_run = 50;
    qc->add_option("--in", qc_in, "input records.jsonl")->required();
    qc->add_option("--out", qc_out, "output directory")->required();
    qc->add_option("--report", qc_report, "report csv path (default <out>/qc_report.csv)");
    qc->add_option("--min-run", qc_min_run, "repetition threshold in characters");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    std::string stats_in, stats_out;
    stats->add_option("--in", stats_in, "input records.jsonl")->required();
    stats->add_option("--out", stats_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train and evaluate one experiment");
    std::string tr_config;
    std::string tr_experiment, tr_model_cfg, tr_train_cfg, tr_train_data, tr_eval_data,
        tr_asr_data, tr_asr_eval, tr_out, tr_seed, tr_mode, tr_pretrain, tr_max_new;
    train->add_option("--config", tr_config, "experiment config file");
    train->add_option("--experiment", tr_experiment, "asr | sqa1 | sqa2");
    train->add_option("--model-config", tr_model_cfg, "model config file");
    train->add_option("--train-config", tr_train_cfg, "train config file");
    train->add_option("--train-data", tr_train_data, "training records.jsonl");
    train->add_option("--eval-data", tr_eval_data, "held-out records.jsonl");
    train->add_option("--asr-train-data", tr_asr_data, "ASR-as-SQA corpus for pretraining");
    train->add_option("--asr-pretrain", tr_pretrain, "true/false: pretrain on the ASR corpus");
    train->add_option("--input-mode", tr_mode, "speech | text");
    train->add_option("--seed", tr_seed, "experiment seed");
    train->add_option("--max-new-tokens", tr_max_new, "generation budget at eval");
    train->add_option("--out", tr_out, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions or run a checkpoint");
    std::string ev_pred, ev_gold, ev_ckpt, ev_model_cfg, ev_data, ev_out, ev_mode = "e2e",
                ev_asr_ckpt;
    double ev_snr = 0.0;
    std::uint64_t ev_noise_seed = 0;
    int ev_max_new = 64;
    eval->add_option("--pred", ev_pred, "predictions jsonl (id, output)");
    eval->add_option("--gold", ev_gold, "gold records jsonl");
    eval->add_option("--checkpoint", ev_ckpt, "model checkpoint (SQAC)");
    eval->add_option("--model-config", ev_model_cfg, "model config file");
    eval->add_option("--data", ev_data, "records jsonl to evaluate");
    eval->add_option("--mode", ev_mode, "e2e | text | cascade");
    eval->add_option("--asr-checkpoint", ev_asr_ckpt, "ASR checkpoint for cascade mode");
    eval->add_option("--snr", ev_snr, "inject noise at this SNR (dB)");
    eval->add_option("--noise-seed", ev_noise_seed, "noise seed");
    eval->add_option("--max-new-tokens", ev_max_new, "generation budget");
    eval->add_option("--out", ev_out, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Cascade vs end-to-end SNR sweep");
    std::string sw_config, sw_model_cfg, sw_eval_data, sw_e2e, sw_asr, sw_textqa, sw_out, sw_seed,
        sw_grid, sw_max_new;
    sweep->add_option("--config", sw_config, "experiment config file");
    sweep->add_option("--model-config", sw_model_cfg, "model config file");
    sweep->add_option("--eval-data", sw_eval_data, "records jsonl");
    sweep->add_option("--e2e-checkpoint", sw_e2e, "end-to-end checkpoint");
    sweep->add_option("--asr-checkpoint", sw_asr, "cascade ASR checkpoint");
    sweep->add_option("--textqa-checkpoint", sw_textqa, "cascade text-QA checkpoint");
    sweep->add_option("--snr-grid", sw_grid, "space/comma separated dB values");
    sweep->add_option("--seed", sw_seed, "noise seed");
    sweep->add_option("--max-new-tokens", sw_max_new, "generation budget");
    sweep->add_option("--out", sw_out, "output directory");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "ASR-pretraining ablation (two arms)");
    std::string ab_config, ab_model_cfg, ab_train_cfg, ab_train_data, ab_eval_data, ab_asr_data,
        ab_asr_eval, ab_out, ab_seed, ab_max_new;
    ablate->add_option("--config", ab_config, "experiment config file");
    ablate->add_option("--model-config", ab_model_cfg, "model config file");
    ablate->add_option("--train-config", ab_train_cfg, "train config file");
    ablate->add_option("--train-data", ab_train_data, "SQA training records");
    ablate->add_option("--eval-data", ab_eval_data, "held-out SQA records");
    ablate->add_option("--asr-train-data", ab_asr_data, "ASR-as-SQA corpus");
    ablate->add_option("--asr-eval-data", ab_asr_eval, "held-out ASR records");
    ablate->add_option("--seed", ab_seed, "experiment seed");
    ablate->add_option("--max-new-tokens", ab_max_new, "generation budget");
    ablate->add_option("--out", ab_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen_data(gen_config, gen,
                                {{"--n-asr", &g_asr},
                                 {"--n-sqa1", &g_sqa1},
                                 {"--n-sqa2", &g_sqa2},
                                 {"--vocab", &g_vocab},
                                 {"--doc-len", &g_doc_len},
                                 {"--frames-per-token", &g_fpt},
                                 {"--noise-sigma", &g_sigma},
                                 {"--d-speech", &g_dspeech},
                                 {"--seed", &g_seed},
                                 {"--index-offset", &g_offset}},
                                gen_out);
        }
        if (qc->parsed()) return cmd_qc(qc_in, qc_out, qc_report, qc_min_run);
        if (stats->parsed()) return cmd_stats(stats_in, stats_out);
        if (train->parsed()) {
            sqa::KvConfig kv = merge_config(tr_config, train,
                                            {{"--experiment", &tr_experiment},
                                             {"--model-config", &tr_model_cfg},
                                             {"--train-config", &tr_train_cfg},
                                             {"--train-data", &tr_train_data},
                                             {"--eval-data", &tr_eval_data},
                                             {"--asr-train-data", &tr_asr_data},
                                             {"--asr-pretrain", &tr_pretrain},
                                             {"--input-mode", &tr_mode},
                                             {"--seed", &tr_seed},
                                             {"--max-new-tokens", &tr_max_new},
                                             {"--out", &tr_out}});
            // Flag names differ from kv keys where the spec names them.
            if (train->count("--model-config")) kv.set("model_config", tr_model_cfg);
            if (train->count("--train-config")) kv.set("train_config", tr_train_cfg);
            if (train->count("--out")) kv.set("out_dir", tr_out);
            if (train->count("--max-new-tokens")) kv.set("max_new_tokens", tr_max_new);
            if (train->count("--asr-train-data")) kv.set("asr_train_data", tr_asr_data);
            if (train->count("--asr-pretrain")) kv.set("asr_pretrain", tr_pretrain);
            if (train->count("--input-mode")) kv.set("input_mode", tr_mode);
            if (train->count("--train-data")) kv.set("train_data", tr_train_data);
            if (train->count("--eval-data")) kv.set("eval_data", tr_eval_data);
            sqa::ExperimentConfig cfg = sqa::ExperimentConfig::from_kv(kv);
            if (cfg.experiment.empty()) cfg.experiment = "asr";
            sqa::run_experiment(cfg);
            std::cout << "experiment '" << cfg.experiment << "' complete, artifacts in "
                      << cfg.out_dir << "\n";
            return 0;
        }
        if (eval->parsed()) {
            if (!ev_pred.empty() || !ev_gold.empty()) {
                if (ev_pred.empty() || ev_gold.empty()) {
                    throw sqa::ConfigError("prediction scoring needs both --pred and --gold");
                }
                return cmd_eval_predictions(ev_pred, ev_gold, ev_out);
            }
            if (ev_ckpt.empty() || ev_model_cfg.empty() || ev_data.empty()) {
                throw sqa::ConfigError(
                    "model evaluation needs --checkpoint, --model-config and --data");
            }
            return cmd_eval_model(ev_ckpt, ev_model_cfg, ev_data, ev_out, ev_mode,
                                  eval->count("--snr") > 0, ev_snr, ev_noise_seed, ev_asr_ckpt,
                                  ev_max_new);
        }
        if (sweep->parsed()) {
            sqa::KvConfig kv = merge_config(sw_config, sweep, {});
            kv.set("experiment", "sweep");
            if (sweep->count("--model-config")) kv.set("model_config", sw_model_cfg);
            if (sweep->count("--eval-data")) kv.set("eval_data", sw_eval_data);
            if (sweep->count("--e2e-checkpoint")) kv.set("e2e_checkpoint", sw_e2e);
            if (sweep->count("--asr-checkpoint")) kv.set("asr_checkpoint", sw_asr);
            if (sweep->count("--textqa-checkpoint")) kv.set("textqa_checkpoint", sw_textqa);
            if (sweep->count("--snr-grid")) kv.set("snr_grid", sw_grid);
            if (sweep->count("--seed")) kv.set("seed", sw_seed);
            if (sweep->count("--max-new-tokens")) kv.set("max_new_tokens", sw_max_new);
            if (sweep->count("--out")) kv.set("out_dir", sw_out);
            sqa::run_experiment(sqa::ExperimentConfig::from_kv(kv));
            std::cout << "sweep complete\n";
            return 0;
        }
        if (ablate->parsed()) {
            sqa::KvConfig kv = merge_config(ab_config, ablate, {});
            kv.set("experiment", "ablation");
            if (ablate->count("--model-config")) kv.set("model_config", ab_model_cfg);
            if (ablate->count("--train-config")) kv.set("train_config", ab_train_cfg);
            if (ablate->count("--train-data")) kv.set("train_data", ab_train_data);
            if (ablate->count("--eval-data")) kv.set("eval_data", ab_eval_data);
            if (ablate->count("--asr-train-data")) kv.set("asr_train_data", ab_asr_data);
            if (ablate->count("--asr-eval-data")) kv.set("asr_eval_data", ab_asr_eval);
            if (ablate->count("--seed")) kv.set("seed", ab_seed);
            if (ablate->count("--max-new-tokens")) kv.set("max_new_tokens", ab_max_new);
            if (ablate->count("--out")) kv.set("out_dir", ab_out);
            sqa::run_experiment(sqa::ExperimentConfig::from_kv(kv));
            std::cout << "ablation complete\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
