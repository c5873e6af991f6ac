#include <benchmark/benchmark.h>

#include "sqa/metrics.hpp"
#include "sqa/model.hpp"
#include "sqa/ops.hpp"
#include "sqa/rng.hpp"

namespace {

void BM_Matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    sqa::Rng rng(1);
    sqa::Tensor a = sqa::Tensor::randn({n, n}, rng, 1.0);
    sqa::Tensor b = sqa::Tensor::randn({n, n}, rng, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sqa::matmul(a, b).data().data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_ForwardPass(benchmark::State& state) {
    sqa::ModelConfig cfg;
    cfg.d_model = 64;
    cfg.n_layers = 2;
    cfg.n_heads = 4;
    cfg.d_ff = 192;
    cfg.adapter_layers = 2;
    cfg.prompt_len = 16;
    sqa::ModelState model = sqa::init_model_state(cfg, 1);
    sqa::Rng rng(2);
    sqa::Tensor features = sqa::Tensor::randn({8, cfg.d_speech}, rng, 1.0);
    std::vector<int> tokens(static_cast<std::size_t>(state.range(0)), 65);
    for (auto _ : state) {
        sqa::NoGradGuard no_grad;
        sqa::FusedSequence fused = sqa::fuse(sqa::project_speech(features, model),
                                             sqa::embed_text(tokens, model), model);
        benchmark::DoNotOptimize(sqa::forward(fused, model).data().data());
    }
}
BENCHMARK(BM_ForwardPass)->Arg(16)->Arg(48)->Arg(96);

void BM_ForwardBackward(benchmark::State& state) {
    sqa::ModelConfig cfg;
    cfg.d_model = 64;
    cfg.n_layers = 2;
    cfg.n_heads = 4;
    cfg.d_ff = 192;
    cfg.adapter_layers = 2;
    cfg.prompt_len = 16;
    sqa::ModelState model = sqa::init_model_state(cfg, 1);
    sqa::Rng rng(2);
    sqa::Tensor features = sqa::Tensor::randn({8, cfg.d_speech}, rng, 1.0);
    std::vector<int> tokens(static_cast<std::size_t>(state.range(0)), 65);
    for (auto _ : state) {
        for (auto& p : model.trainable_params()) p.tensor.zero_grad();
        sqa::FusedSequence fused = sqa::fuse(sqa::project_speech(features, model),
                                             sqa::embed_text(tokens, model), model);
        sqa::sum(sqa::forward(fused, model)).backward();
    }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(48);

void BM_Wer(benchmark::State& state) {
    const std::string hyp = "the quick brown fox jumps over a lazy dog near the riverbank today";
    const std::string ref = "the quick brown fox jumped over the lazy dog near a riverbank";
    for (auto _ : state) {
        benchmark::DoNotOptimize(sqa::wer(hyp, ref));
    }
}
BENCHMARK(BM_Wer);

}  // namespace

BENCHMARK_MAIN();
