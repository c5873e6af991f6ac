#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sqa/rng.hpp"

namespace sqa {

class Tensor;

namespace detail {

struct Storage {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    // Reverse-mode record: backward reads the output's grad buffer and
    // accumulates into the parents' grad buffers. Leaves have neither.
    std::vector<Tensor>* parents = nullptr;
    std::function<void(const Tensor& out)> backward;
    ~Storage();
};

}  // namespace detail

// Dense row-major tensor of 64-bit floats with an optional gradient buffer.
// Value-semantic handle onto shared storage: copies alias the same buffer.
// Ops that produce a Tensor from others record a backward closure, forming
// the reverse-mode graph walked by backward().
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // Seeded N(mean=0, stddev) fill.
    static Tensor randn(std::vector<int> shape, Rng& rng, double stddev,
                        bool requires_grad = false);

    bool defined() const { return s_ != nullptr; }
    const std::vector<int>& shape() const { return s_->shape; }
    int rank() const { return static_cast<int>(s_->shape.size()); }
    int dim(int i) const { return s_->shape[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(s_->data.size()); }

    std::vector<double>& data() { return s_->data; }
    const std::vector<double>& data() const { return s_->data; }

    double value() const;  // scalar tensors only
    double& at(int i) { return s_->data[static_cast<std::size_t>(i)]; }
    double at(int i) const { return s_->data[static_cast<std::size_t>(i)]; }
    double& at(int i, int j);
    double at(int i, int j) const;

    bool requires_grad() const { return s_->requires_grad; }
    void set_requires_grad(bool v) { s_->requires_grad = v; }

    bool has_grad() const { return !s_->grad.empty(); }
    // Grad buffer, allocated zero-filled on first use.
    std::vector<double>& grad();
    const std::vector<double>& grad() const { return s_->grad; }
    void zero_grad();

    // Reverse-mode propagation from this (scalar) tensor through the
    // recorded graph. Accumulates into every reachable requires_grad leaf.
    void backward();

    // Identity of the underlying buffer (aliasing checks in tests).
    const void* storage_id() const { return s_.get(); }

    // Graph assembly for ops defined outside ops.cpp (e.g. the loss).
    // requires_grad of the result is the OR over parents; backward is only
    // attached when some parent requires grad.
    static Tensor from_op(std::vector<int> shape, std::vector<double> values,
                          std::vector<Tensor> parents,
                          std::function<void(const Tensor& out)> backward);

    // Detached copy: same shape/data, no graph, requires_grad=false.
    Tensor detach_copy() const;

    static bool grad_enabled();

private:
    std::shared_ptr<detail::Storage> s_;
    explicit Tensor(std::shared_ptr<detail::Storage> s) : s_(std::move(s)) {}
    friend struct detail::Storage;
};

std::int64_t shape_product(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// True when every element is finite.
bool all_finite(const Tensor& t);

// While alive, ops record no graph (inference paths skip the tape).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

}  // namespace sqa
