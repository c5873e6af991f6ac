#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "sqa/checkpoint.hpp"
#include "sqa/error.hpp"
#include "sqa/features.hpp"
#include "sqa/manifest.hpp"

using namespace sqa;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round-trip is bit-exact") {
    ModelConfig cfg;
    cfg.vocab_size = 9;
    cfg.d_model = 4;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    cfg.d_ff = 6;
    cfg.d_speech = 3;
    cfg.adapter_layers = 1;
    cfg.prompt_len = 2;
    ModelState state = init_model_state(cfg, 31);
    // Off-pattern values, including negative zero and denormals.
    state.proj_weight.at(0) = -0.0;
    state.proj_weight.at(1) = 5e-324;

    const std::string path = temp_path("roundtrip.sqac");
    save_model(path, state);
    ModelState loaded = load_model(path, cfg);
    const std::string path2 = temp_path("roundtrip2.sqac");
    save_model(path2, loaded);
    CHECK(hash_file(path) == hash_file(path2));

    auto orig = state.named_tensors();
    auto back = loaded.named_tensors();
    REQUIRE(orig.size() == back.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        CHECK(orig[i].name == back[i].name);
        const auto& a = orig[i].tensor.data();
        const auto& b = back[i].tensor.data();
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            // Bit-level comparison (covers -0.0 vs 0.0).
            std::uint64_t ba, bb;
            std::memcpy(&ba, &a[j], 8);
            std::memcpy(&bb, &b[j], 8);
            CHECK(ba == bb);
        }
    }
}

TEST_CASE("checkpoint/config mismatch is a load error") {
    ModelConfig cfg;
    cfg.vocab_size = 9;
    cfg.d_model = 4;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    cfg.d_ff = 6;
    cfg.d_speech = 3;
    cfg.adapter_layers = 1;
    cfg.prompt_len = 2;
    ModelState state = init_model_state(cfg, 32);
    const std::string path = temp_path("mismatch.sqac");
    save_model(path, state);

    ModelConfig wider = cfg;
    wider.d_model = 8;
    wider.n_heads = 2;
    CHECK_THROWS_AS(load_model(path, wider), IoError);

    ModelConfig more_layers = cfg;
    more_layers.n_layers = 2;
    more_layers.adapter_layers = 2;
    CHECK_THROWS_AS(load_model(path, more_layers), IoError);
}

TEST_CASE("corrupt checkpoint magic and truncation are rejected") {
    const std::string path = temp_path("corrupt.sqac");
    std::ofstream(path, std::ios::binary) << "NOPE####";
    CHECK_THROWS_AS(load_checkpoint(path), IoError);

    ModelConfig cfg;
    cfg.vocab_size = 9;
    cfg.d_model = 4;
    cfg.n_layers = 1;
    cfg.n_heads = 2;
    cfg.d_ff = 6;
    cfg.d_speech = 3;
    cfg.adapter_layers = 0;
    ModelState state = init_model_state(cfg, 33);
    const std::string full = temp_path("full.sqac");
    save_model(full, state);
    // Truncate to half.
    const auto size = fs::file_size(full);
    fs::resize_file(full, size / 2);
    CHECK_THROWS_AS(load_checkpoint(full), IoError);
}

TEST_CASE("feature files round-trip and reject corruption") {
    FeatureMatrix m;
    m.n_frames = 3;
    m.dim = 2;
    m.values = {1.5f, -2.25f, 0.0f, 3.75f, -0.5f, 8.0f};
    const std::string path = temp_path("feat.sqaf");
    write_features(path, m);
    const FeatureMatrix r = read_features(path);
    CHECK(r.n_frames == 3);
    CHECK(r.dim == 2);
    CHECK(r.values == m.values);
    // read-then-write is the identity on the file bytes
    const std::string path2 = temp_path("feat2.sqaf");
    write_features(path2, r);
    CHECK(hash_file(path) == hash_file(path2));

    // Wrong magic.
    const std::string bad = temp_path("bad.sqaf");
    std::ofstream(bad, std::ios::binary) << "QAFS\x01\x00\x00\x00";
    CHECK_THROWS_AS(read_features(bad), IoError);

    // Truncated payload.
    fs::resize_file(path2, fs::file_size(path2) - 4);
    CHECK_THROWS_AS(read_features(path2), IoError);

    // Trailing garbage.
    write_features(path2, m);
    std::ofstream(path2, std::ios::binary | std::ios::app) << "zz";
    CHECK_THROWS_AS(read_features(path2), IoError);

    // Frame cap.
    CHECK_THROWS_AS(read_features(path, 2), LengthError);
}

TEST_CASE("tensor round-trips through the f32 feature container") {
    FeatureMatrix m;
    m.n_frames = 2;
    m.dim = 3;
    m.values = {0.5f, 1.25f, -3.0f, 0.125f, 7.0f, -0.625f};
    Tensor t = m.to_tensor();
    CHECK(t.dim(0) == 2);
    CHECK(t.dim(1) == 3);
    const FeatureMatrix back = FeatureMatrix::from_tensor(t);
    CHECK(back.values == m.values);
}
