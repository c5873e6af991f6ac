#include "sqa/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "sqa/error.hpp"

namespace sqa {

namespace detail {
Storage::~Storage() { delete parents; }
}  // namespace detail

std::int64_t shape_product(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto s = std::make_shared<detail::Storage>();
    s->data.assign(static_cast<std::size_t>(shape_product(shape)), 0.0);
    s->shape = std::move(shape);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = value;
    return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> values,
                         bool requires_grad) {
    if (shape_product(shape) != static_cast<std::int64_t>(values.size())) {
        throw DimensionError("from_data: shape " + shape_to_string(shape) +
                             " does not match " + std::to_string(values.size()) +
                             " values");
    }
    auto s = std::make_shared<detail::Storage>();
    s->shape = std::move(shape);
    s->data = std::move(values);
    s->requires_grad = requires_grad;
    return Tensor(std::move(s));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double stddev, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.data()) v = rng.normal(0.0, stddev);
    return t;
}

double Tensor::value() const {
    if (s_->data.size() != 1) {
        throw DimensionError("value(): tensor " + shape_to_string(s_->shape) +
                             " is not a scalar");
    }
    return s_->data[0];
}

double& Tensor::at(int i, int j) {
    return s_->data[static_cast<std::size_t>(i) * static_cast<std::size_t>(s_->shape[1]) +
                    static_cast<std::size_t>(j)];
}

double Tensor::at(int i, int j) const {
    return s_->data[static_cast<std::size_t>(i) * static_cast<std::size_t>(s_->shape[1]) +
                    static_cast<std::size_t>(j)];
}

std::vector<double>& Tensor::grad() {
    if (s_->grad.empty()) s_->grad.assign(s_->data.size(), 0.0);
    return s_->grad;
}

void Tensor::zero_grad() {
    if (!s_->grad.empty()) s_->grad.assign(s_->data.size(), 0.0);
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool Tensor::grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor Tensor::from_op(std::vector<int> shape, std::vector<double> values,
                       std::vector<Tensor> parents,
                       std::function<void(const Tensor& out)> backward) {
    Tensor out = from_data(std::move(shape), std::move(values), false);
    bool needs = false;
    if (g_grad_enabled) {
        for (const Tensor& p : parents) {
            if (p.requires_grad()) {
                needs = true;
                break;
            }
        }
    }
    if (needs) {
        out.s_->requires_grad = true;
        out.s_->parents = new std::vector<Tensor>(std::move(parents));
        out.s_->backward = std::move(backward);
    }
    return out;
}

Tensor Tensor::detach_copy() const {
    return from_data(s_->shape, s_->data, false);
}

void Tensor::backward() {
    if (s_->data.size() != 1) {
        throw DimensionError("backward(): root must be a scalar, got " +
                             shape_to_string(s_->shape));
    }
    // Iterative post-order DFS; order holds handles so closures see live storage.
    std::vector<Tensor> order;
    std::unordered_set<detail::Storage*> visited;
    struct Frame {
        Tensor node;
        std::size_t next_child;
    };
    std::vector<Frame> stack;
    visited.insert(s_.get());
    stack.push_back({*this, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        auto* parents = f.node.s_->parents;
        std::size_t n_children = parents ? parents->size() : 0;
        if (f.next_child < n_children) {
            Tensor child = (*parents)[f.next_child];
            ++f.next_child;
            if (child.s_ && visited.insert(child.s_.get()).second) {
                stack.push_back({std::move(child), 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Storage* node = it->s_.get();
        if (!node->backward || node->grad.empty()) continue;
        node->backward(*it);
    }
}

bool all_finite(const Tensor& t) {
    for (double v : t.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace sqa
