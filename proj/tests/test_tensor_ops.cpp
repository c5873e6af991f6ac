#include <cmath>

#include <doctest.h>

#include "sqa/error.hpp"
#include "sqa/grad_check.hpp"
#include "sqa/ops.hpp"
#include "sqa/tensor.hpp"

using namespace sqa;

TEST_CASE("matmul identity and formula cases") {
    Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor prod = matmul(eye, a);
    for (int i = 0; i < 4; ++i) CHECK(prod.at(i) == a.at(i));

    Tensor row = Tensor::from_data({1, 2}, {1, 2});
    Tensor col = Tensor::from_data({2, 1}, {3, 4});
    CHECK(matmul(row, col).value() == 11.0);
}

TEST_CASE("matmul dimension error names both shapes") {
    Tensor a = Tensor::from_data({2, 3}, std::vector<double>(6, 1.0));
    Tensor b = Tensor::from_data({2, 2}, std::vector<double>(4, 1.0));
    try {
        matmul(a, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
        CHECK(msg.find("[2x2]") != std::string::npos);
    }
}

TEST_CASE("matmul gradient matches central finite differences") {
    Rng rng(7);
    Tensor a = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor b = Tensor::randn({4, 2}, rng, 1.0, true);
    auto f = [&]() { return sum(matmul(a, b)); };
    const GradCheckReport report = grad_check(f, {{"a", a}, {"b", b}});
    CHECK(report.max_rel_err < 1e-6);
    CHECK(report.n_checked == 20);
}

TEST_CASE("softmax symmetry, stabilization, invariants") {
    Tensor x = Tensor::from_data({2}, {0, 0});
    Tensor y = softmax(x, 0);
    CHECK(y.at(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(y.at(1) == doctest::Approx(0.5).epsilon(1e-15));

    Tensor big = Tensor::from_data({2}, {1000, 0});
    Tensor yb = softmax(big, 0);
    CHECK(all_finite(yb));
    CHECK(yb.at(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(yb.at(1) == doctest::Approx(0.0).epsilon(1e-12));

    // Rows sum to 1 within 1e-12; invariant to adding a constant within 1e-9.
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor r = Tensor::randn({4, 5}, rng, 3.0);
        Tensor s = softmax(r, 1);
        for (int i = 0; i < 4; ++i) {
            double row_sum = 0;
            for (int j = 0; j < 5; ++j) row_sum += s.at(i, j);
            CHECK(std::abs(row_sum - 1.0) < 1e-12);
        }
        Tensor shifted = Tensor::from_data(r.shape(), r.data());
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 5; ++j) shifted.at(i, j) += 17.25;
        }
        Tensor s2 = softmax(shifted, 1);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(s.at(i) - s2.at(i)) < 1e-9);
    }
}

TEST_CASE("softmax Jacobian matches finite differences") {
    Rng rng(13);
    Tensor x = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor w = Tensor::randn({3, 4}, rng, 1.0);  // random probe so every entry matters
    auto f = [&]() { return sum(mul(softmax(x, 1), w)); };
    CHECK(grad_check(f, {{"x", x}}).max_rel_err < 1e-6);
}

TEST_CASE("rms_norm formula and zero case") {
    Tensor x = Tensor::from_data({2}, {3, 4});
    Tensor gain = Tensor::from_data({2}, {1, 1});
    Tensor y = rms_norm(x, gain, 0.0);
    // RMS = sqrt((9+16)/2) = sqrt(12.5)
    CHECK(y.at(0) == doctest::Approx(3.0 / std::sqrt(12.5)).epsilon(1e-12));
    CHECK(y.at(1) == doctest::Approx(4.0 / std::sqrt(12.5)).epsilon(1e-12));
    CHECK(y.at(0) == doctest::Approx(0.84853).epsilon(1e-5));
    CHECK(y.at(1) == doctest::Approx(1.13137).epsilon(1e-5));

    Tensor zeros = Tensor::zeros({3});
    Tensor yz = rms_norm(zeros, Tensor::from_data({3}, {1, 1, 1}), 1e-5);
    for (int i = 0; i < 3; ++i) CHECK(yz.at(i) == 0.0);
}

TEST_CASE("rms_norm unit RMS with all-ones gain") {
    Rng rng(17);
    Tensor x = Tensor::randn({4, 6}, rng, 2.0);
    Tensor y = rms_norm(x, Tensor::full({6}, 1.0), 1e-12);
    for (int i = 0; i < 4; ++i) {
        double ms = 0;
        for (int j = 0; j < 6; ++j) ms += y.at(i, j) * y.at(i, j);
        CHECK(std::abs(std::sqrt(ms / 6) - 1.0) < 1e-6);
    }
}

TEST_CASE("rms_norm gradient matches finite differences") {
    Rng rng(19);
    Tensor x = Tensor::randn({3, 4}, rng, 1.0, true);
    Tensor gain = Tensor::randn({4}, rng, 1.0, true);
    Tensor w = Tensor::randn({3, 4}, rng, 1.0);
    auto f = [&]() { return sum(mul(rms_norm(x, gain, 1e-5), w)); };
    CHECK(grad_check(f, {{"x", x}, {"gain", gain}}).max_rel_err < 1e-6);
}

TEST_CASE("swiglu_ffn scalar identity case") {
    Tensor x = Tensor::from_data({1, 1}, {1.0});
    Tensor eye = Tensor::from_data({1, 1}, {1.0});
    const double silu1 = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(swiglu_ffn(x, eye, eye, eye).value() == doctest::Approx(silu1).epsilon(1e-12));
    CHECK(swiglu_ffn(x, eye, eye, eye).value() == doctest::Approx(0.73106).epsilon(1e-5));

    Tensor zero = Tensor::from_data({1, 1}, {0.0});
    CHECK(swiglu_ffn(zero, eye, eye, eye).value() == 0.0);
}

TEST_CASE("swiglu_ffn shape mismatch raises dimension error") {
    Tensor x = Tensor::from_data({1, 2}, {1.0, 2.0});
    Tensor w = Tensor::from_data({3, 3}, std::vector<double>(9, 0.1));
    CHECK_THROWS_AS(swiglu_ffn(x, w, w, w), DimensionError);
}

TEST_CASE("swiglu_ffn gradient matches finite differences") {
    Rng rng(23);
    Tensor x = Tensor::randn({2, 3}, rng, 1.0, true);
    Tensor w1 = Tensor::randn({3, 5}, rng, 0.5, true);
    Tensor w3 = Tensor::randn({3, 5}, rng, 0.5, true);
    Tensor w2 = Tensor::randn({5, 3}, rng, 0.5, true);
    auto f = [&]() { return sum(swiglu_ffn(x, w1, w3, w2)); };
    CHECK(grad_check(f, {{"x", x}, {"w1", w1}, {"w3", w3}, {"w2", w2}}).max_rel_err < 1e-6);
}

TEST_CASE("rotary position zero is the identity") {
    Rng rng(29);
    Tensor x = Tensor::randn({1, 8}, rng, 1.0);
    Tensor y = rotary_embed(x, {0});
    for (int i = 0; i < 8; ++i) CHECK(y.at(i) == x.at(i));
}

TEST_CASE("rotary rejects odd head dimension") {
    Tensor x = Tensor::from_data({1, 3}, {1, 2, 3});
    CHECK_THROWS_AS(rotary_embed(x, {0}), ConfigError);
}

TEST_CASE("rotary scores depend only on the position offset") {
    Rng rng(31);
    Tensor q = Tensor::randn({1, 8}, rng, 1.0);
    Tensor k = Tensor::randn({1, 8}, rng, 1.0);
    auto dot = [](const Tensor& a, const Tensor& b) {
        double acc = 0;
        for (int i = 0; i < a.dim(1); ++i) acc += a.at(i) * b.at(i);
        return acc;
    };
    const double d1 = dot(rotary_embed(q, {5}), rotary_embed(k, {3}));
    const double d2 = dot(rotary_embed(q, {7}), rotary_embed(k, {5}));
    CHECK(std::abs(d1 - d2) < 1e-9);

    // Shifting both positions by any common offset leaves scores unchanged.
    for (int offset : {1, 10, 100}) {
        const double shifted = dot(rotary_embed(q, {5 + offset}), rotary_embed(k, {3 + offset}));
        CHECK(std::abs(d1 - shifted) < 1e-9);
    }
}

TEST_CASE("rotary preserves per-row norm") {
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = Tensor::randn({3, 6}, rng, 2.0);
        Tensor y = rotary_embed(x, {11, 257, 900});
        for (int r = 0; r < 3; ++r) {
            double nx = 0, ny = 0;
            for (int i = 0; i < 6; ++i) {
                nx += x.at(r, i) * x.at(r, i);
                ny += y.at(r, i) * y.at(r, i);
            }
            CHECK(std::abs(std::sqrt(nx) - std::sqrt(ny)) < 1e-9);
        }
    }
}

TEST_CASE("rotary gradient matches finite differences") {
    Rng rng(41);
    Tensor x = Tensor::randn({2, 4}, rng, 1.0, true);
    Tensor w = Tensor::randn({2, 4}, rng, 1.0);
    auto f = [&]() { return sum(mul(rotary_embed(x, {3, 9}), w)); };
    CHECK(grad_check(f, {{"x", x}}).max_rel_err < 1e-6);
}

TEST_CASE("grad_check closed-form and constant cases") {
    Tensor theta = Tensor::from_data({2}, {1, 2}, true);
    auto f = [&]() { return sum(mul(theta, theta)); };
    const GradCheckReport report = grad_check(f, {{"theta", theta}});
    CHECK(report.max_rel_err < 1e-8);

    theta.zero_grad();
    Tensor fresh = Tensor::from_data({2}, {1, 2}, true);
    Tensor loss = sum(mul(fresh, fresh));
    loss.backward();
    CHECK(fresh.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fresh.grad()[1] == doctest::Approx(4.0).epsilon(1e-12));

    Tensor unused = Tensor::from_data({2}, {5, 6}, true);
    auto constant = [&]() { return Tensor::scalar(3.0); };
    const GradCheckReport creport = grad_check(constant, {{"unused", unused}});
    CHECK(creport.max_rel_err == 0.0);
}

TEST_CASE("grad_check flags a non-finite objective") {
    Tensor theta = Tensor::from_data({1}, {0.0}, true);
    auto f = [&]() {
        return Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
    };
    CHECK_THROWS_AS(grad_check(f, {{"theta", theta}}), OracleError);
}

TEST_CASE("every differentiable op passes a randomized finite-difference sweep") {
    // Property from the module contract: h=1e-5, rel err < 1e-5 on small
    // random inputs, fresh draws each trial.
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        Rng rng(100 + trial);
        Tensor a = Tensor::randn({2, 3}, rng, 1.0, true);
        Tensor b = Tensor::randn({2, 3}, rng, 1.0, true);
        Tensor m = Tensor::randn({3, 2}, rng, 1.0, true);
        Tensor bias = Tensor::randn({3}, rng, 1.0, true);
        Tensor gates = Tensor::randn({4}, rng, 0.5, true);
        Tensor probe = Tensor::randn({2, 3}, rng, 1.0);
        Tensor square = Tensor::randn({3, 3}, rng, 1.0, true);
        Tensor probe_sq = Tensor::randn({3, 3}, rng, 1.0);

        auto composite = [&]() {
            Tensor u = add(mul(a, b), scale(sub(a, b), 0.5));
            Tensor v = add_row_bias(u, bias);
            Tensor w = matmul(silu(v), m);          // [2x2]
            Tensor t = mul_scalar_at(w, tanh_of(gates), 2);
            Tensor cs = causal_softmax(scale(matmul(square, transpose(square)), 0.3));
            Tensor picked = embedding_rows(square, {0, 2, 1});
            Tensor joined = concat_rows(slice_cols(mul(cs, probe_sq), 0, 2),
                                        concat_cols({slice_cols(t, 0, 1), slice_cols(t, 1, 1)}));
            return add(sum(joined), sum(picked));
        };
        const GradCheckReport report = grad_check(
            composite, {{"a", a}, {"b", b}, {"m", m}, {"bias", bias}, {"gates", gates},
                        {"square", square}});
        CHECK(report.max_rel_err < 1e-5);
    }
}

TEST_CASE("documented ops keep finite values on finite inputs") {
    Rng rng(55);
    Tensor x = Tensor::randn({5, 6}, rng, 50.0);
    CHECK(all_finite(softmax(x, 1)));
    CHECK(all_finite(rms_norm(x, Tensor::full({6}, 1.0), 1e-5)));
    CHECK(all_finite(silu(x)));
    CHECK(all_finite(tanh_of(x)));
    CHECK(all_finite(causal_softmax(matmul(x, transpose(x)))));
}

TEST_CASE("causal softmax is exactly zero above the diagonal") {
    Rng rng(59);
    Tensor scores = Tensor::randn({5, 5}, rng, 2.0);
    Tensor probs = causal_softmax(scores);
    for (int i = 0; i < 5; ++i) {
        double row_sum = 0;
        for (int j = 0; j < 5; ++j) {
            if (j > i) CHECK(probs.at(i, j) == 0.0);
            row_sum += probs.at(i, j);
        }
        CHECK(std::abs(row_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("backward accumulates through shared subexpressions") {
    Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
    Tensor y = add(x, x);  // dy/dx = 2
    sum(y).backward();
    CHECK(x.grad()[0] == 2.0);
    CHECK(x.grad()[1] == 2.0);
}
