#pragma once

#include <vector>

#include "sqa/tensor.hpp"

namespace sqa {

// Differentiable tensor ops. All are pure functions of their inputs and safe
// to call concurrently on distinct tensors; gradient accumulation into a
// shared buffer happens only inside backward(), which is single-writer.

// Elementwise, same shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// x * c for a plain constant.
Tensor scale(const Tensor& x, double c);
// x * s where s is a trainable 1-element tensor, broadcast over x.
Tensor mul_scalar(const Tensor& x, const Tensor& s);
// x * s[index], broadcast over x; gradient flows into that element of s.
Tensor mul_scalar_at(const Tensor& x, const Tensor& s, int index);
Tensor silu(const Tensor& x);
Tensor tanh_of(const Tensor& x);

// Standard matrix product, a[m x k] * b[k x n]. Backward accumulates
// dA = dC * B^T and dB = A^T * dC.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// x[m x n] + b[n], b broadcast over rows.
Tensor add_row_bias(const Tensor& x, const Tensor& b);

// Row/column assembly for fusion and attention heads.
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& x, int offset, int len);
Tensor concat_cols(const std::vector<Tensor>& parts);

// Row lookup, ids into table[vocab x d]. Backward scatters into the table.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

// Numerically stabilized softmax along an axis (max subtraction).
Tensor softmax(const Tensor& x, int axis);
// Softmax of square score matrix where row i is normalized over columns
// 0..i and is exactly zero above the diagonal.
Tensor causal_softmax(const Tensor& scores);

// y = gain (.) x / sqrt(mean(x^2) + eps), per last-axis row.
Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps = 1e-5);

// (silu(x W1) (.) (x W3)) W2.
Tensor swiglu_ffn(const Tensor& x, const Tensor& w1, const Tensor& w3, const Tensor& w2);

// Rotates consecutive channel pairs of x[len x d_head] by pos * base^(-2i/d_head).
Tensor rotary_embed(const Tensor& x, const std::vector<int>& positions, double base = 10000.0);

// Scalar reduction.
Tensor sum(const Tensor& x);

}  // namespace sqa
