#include "sqa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqa/error.hpp"

namespace sqa {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
    }
}

void check_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                             shape_to_string(t.shape()));
    }
}

// c[m x n] += a[m x k] * b[k x n], ikj order over contiguous rows.
void mm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        double* cr = c + static_cast<std::size_t>(i) * n;
        const double* ar = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av = ar[p];
            const double* br = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

// c[m x n] += a[m x k] * b[n x k]^T
void mm_nt_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ar = a + static_cast<std::size_t>(i) * k;
        double* cr = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* br = b + static_cast<std::size_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ar[p] * br[p];
            cr[j] += acc;
        }
    }
}

// c[k x n] += a[m x k]^T * b[m x n]
void mm_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ar = a + static_cast<std::size_t>(i) * k;
        const double* br = b + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double av = ar[p];
            double* cr = c + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    Tensor pa = a, pb = b;
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [pa, pb](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (pa.requires_grad()) {
            auto& ga = pa.grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (pb.requires_grad()) {
            auto& gb = pb.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    Tensor pa = a, pb = b;
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [pa, pb](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (pa.requires_grad()) {
            auto& ga = pa.grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (pb.requires_grad()) {
            auto& gb = pb.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    Tensor pa = a, pb = b;
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [pa, pb](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (pa.requires_grad()) {
            auto& ga = pa.grad();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb.data()[i];
        }
        if (pb.requires_grad()) {
            auto& gb = pb.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa.data()[i];
        }
    });
}

Tensor scale(const Tensor& x, double c) {
    std::vector<double> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * c;
    Tensor px = x;
    return Tensor::from_op(x.shape(), std::move(out), {x}, [px, c](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        auto& gx = px.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * c;
    });
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
    if (s.size() != 1) {
        throw DimensionError("mul_scalar: scale must be a 1-element tensor, got " +
                             shape_to_string(s.shape()));
    }
    const double sv = s.data()[0];
    std::vector<double> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * sv;
    Tensor px = x, ps = s;
    return Tensor::from_op(x.shape(), std::move(out), {x, s}, [px, ps, sv](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (px.requires_grad()) {
            auto& gx = px.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sv;
        }
        if (ps.requires_grad()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * px.data()[i];
            ps.grad()[0] += acc;
        }
    });
}

Tensor mul_scalar_at(const Tensor& x, const Tensor& s, int index) {
    if (index < 0 || index >= static_cast<int>(s.data().size())) {
        throw DimensionError("mul_scalar_at: index " + std::to_string(index) + " out of range for " +
                             shape_to_string(s.shape()));
    }
    const double sv = s.data()[static_cast<std::size_t>(index)];
    std::vector<double> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * sv;
    Tensor px = x, ps = s;
    return Tensor::from_op(x.shape(), std::move(out), {x, s},
                           [px, ps, sv, index](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (px.requires_grad()) {
            auto& gx = px.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sv;
        }
        if (ps.requires_grad()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * px.data()[i];
            ps.grad()[static_cast<std::size_t>(index)] += acc;
        }
    });
}

Tensor silu(const Tensor& x) {
    std::vector<double> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.data()[i];
        out[i] = v * sigmoid(v);
    }
    Tensor px = x;
    return Tensor::from_op(x.shape(), std::move(out), {x}, [px](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        auto& gx = px.grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = px.data()[i];
            const double s = sigmoid(v);
            gx[i] += g[i] * (s + v * s * (1.0 - s));
        }
    });
}

Tensor tanh_of(const Tensor& x) {
    std::vector<double> out(x.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
    Tensor px = x;
    return Tensor::from_op(x.shape(), std::move(out), {x}, [px](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        auto& gx = px.grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = o.data()[i];
            gx[i] += g[i] * (1.0 - t * t);
        }
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul");
    check_rank2(b, "matmul");
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw DimensionError("matmul: inner dimensions disagree, " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
    }
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    mm_acc(a.data().data(), b.data().data(), out.data(), m, k, n);
    Tensor pa = a, pb = b;
    return Tensor::from_op({m, n}, std::move(out), {a, b}, [pa, pb, m, k, n](const Tensor& o) mutable {
        const double* g = o.grad().data();
        if (pa.requires_grad()) {
            // dA = dC * B^T : [m x n] * [k x n]^T
            mm_nt_acc(g, pb.data().data(), pa.grad().data(), m, n, k);
        }
        if (pb.requires_grad()) {
            // dB = A^T * dC : [m x k]^T * [m x n]
            mm_tn_acc(pa.data().data(), g, pb.grad().data(), m, k, n);
        }
    });
}

Tensor transpose(const Tensor& a) {
    check_rank2(a, "transpose");
    const int m = a.dim(0), n = a.dim(1);
    std::vector<double> out(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(j) * m + i] = a.at(i, j);
        }
    }
    Tensor pa = a;
    return Tensor::from_op({n, m}, std::move(out), {a}, [pa, m, n](const Tensor& o) mutable {
        if (!pa.requires_grad()) return;
        const auto& g = o.grad();
        auto& ga = pa.grad();
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < m; ++i) {
                ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
            }
        }
    });
}

Tensor add_row_bias(const Tensor& x, const Tensor& b) {
    check_rank2(x, "add_row_bias");
    if (b.rank() != 1 || b.dim(0) != x.dim(1)) {
        throw DimensionError("add_row_bias: bias " + shape_to_string(b.shape()) +
                             " does not match row width of " + shape_to_string(x.shape()));
    }
    const int m = x.dim(0), n = x.dim(1);
    std::vector<double> out(x.data().size());
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(i) * n + j] = x.at(i, j) + b.at(j);
        }
    }
    Tensor px = x, pb = b;
    return Tensor::from_op(x.shape(), std::move(out), {x, b}, [px, pb, m, n](const Tensor& o) mutable {
        const auto& g = o.grad();
        if (px.requires_grad()) {
            auto& gx = px.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (pb.requires_grad()) {
            auto& gb = pb.grad();
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) gb[j] += g[static_cast<std::size_t>(i) * n + j];
            }
        }
    });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    check_rank2(a, "concat_rows");
    check_rank2(b, "concat_rows");
    if (a.dim(1) != b.dim(1)) {
        throw DimensionError("concat_rows: column counts differ, " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
    }
    const int ma = a.dim(0), mb = b.dim(0), n = a.dim(1);
    std::vector<double> out;
    out.reserve(a.data().size() + b.data().size());
    out.insert(out.end(), a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    Tensor pa = a, pb = b;
    return Tensor::from_op({ma + mb, n}, std::move(out), {a, b},
                           [pa, pb, ma, mb, n](const Tensor& o) mutable {
        const auto& g = o.grad();
        const std::size_t na = static_cast<std::size_t>(ma) * n;
        if (pa.requires_grad()) {
            auto& ga = pa.grad();
            for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
        }
        if (pb.requires_grad()) {
            auto& gb = pb.grad();
            const std::size_t nb = static_cast<std::size_t>(mb) * n;
            for (std::size_t i = 0; i < nb; ++i) gb[i] += g[na + i];
        }
    });
}

Tensor slice_cols(const Tensor& x, int offset, int len) {
    check_rank2(x, "slice_cols");
    const int m = x.dim(0), n = x.dim(1);
    if (offset < 0 || len <= 0 || offset + len > n) {
        throw DimensionError("slice_cols: slice [" + std::to_string(offset) + ", " +
                             std::to_string(offset + len) + ") out of range for " +
                             shape_to_string(x.shape()));
    }
    std::vector<double> out(static_cast<std::size_t>(m) * len);
    for (int i = 0; i < m; ++i) {
        const double* src = x.data().data() + static_cast<std::size_t>(i) * n + offset;
        std::copy(src, src + len, out.begin() + static_cast<std::size_t>(i) * len);
    }
    Tensor px = x;
    return Tensor::from_op({m, len}, std::move(out), {x},
                           [px, offset, len, m, n](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        auto& gx = px.grad();
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < len; ++j) {
                gx[static_cast<std::size_t>(i) * n + offset + j] +=
                    g[static_cast<std::size_t>(i) * len + j];
            }
        }
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const int m = parts[0].dim(0);
    int total = 0;
    for (const Tensor& p : parts) {
        check_rank2(p, "concat_cols");
        if (p.dim(0) != m) {
            throw DimensionError("concat_cols: row counts differ, " +
                                 shape_to_string(parts[0].shape()) + " vs " +
                                 shape_to_string(p.shape()));
        }
        total += p.dim(1);
    }
    std::vector<double> out(static_cast<std::size_t>(m) * total);
    int off = 0;
    for (const Tensor& p : parts) {
        const int w = p.dim(1);
        for (int i = 0; i < m; ++i) {
            std::copy(p.data().begin() + static_cast<std::size_t>(i) * w,
                      p.data().begin() + static_cast<std::size_t>(i + 1) * w,
                      out.begin() + static_cast<std::size_t>(i) * total + off);
        }
        off += w;
    }
    std::vector<Tensor> parents = parts;
    return Tensor::from_op({m, total}, std::move(out), parts,
                           [parents, m, total](const Tensor& o) mutable {
        const auto& g = o.grad();
        int off = 0;
        for (Tensor& p : parents) {
            const int w = p.dim(1);
            if (p.requires_grad()) {
                auto& gp = p.grad();
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < w; ++j) {
                        gp[static_cast<std::size_t>(i) * w + j] +=
                            g[static_cast<std::size_t>(i) * total + off + j];
                    }
                }
            }
            off += w;
        }
    });
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
    check_rank2(table, "embedding_rows");
    const int vocab = table.dim(0), d = table.dim(1);
    for (int id : ids) {
        if (id < 0 || id >= vocab) {
            throw VocabularyError("embedding_rows: id " + std::to_string(id) +
                                  " out of vocabulary of size " + std::to_string(vocab));
        }
    }
    const int m = static_cast<int>(ids.size());
    std::vector<double> out(static_cast<std::size_t>(m) * d);
    for (int i = 0; i < m; ++i) {
        const double* src = table.data().data() + static_cast<std::size_t>(ids[i]) * d;
        std::copy(src, src + d, out.begin() + static_cast<std::size_t>(i) * d);
    }
    Tensor pt = table;
    std::vector<int> idv = ids;
    return Tensor::from_op({m, d}, std::move(out), {table}, [pt, idv, d](const Tensor& o) mutable {
        if (!pt.requires_grad()) return;
        const auto& g = o.grad();
        auto& gt = pt.grad();
        for (std::size_t i = 0; i < idv.size(); ++i) {
            for (int j = 0; j < d; ++j) {
                gt[static_cast<std::size_t>(idv[i]) * d + j] += g[i * static_cast<std::size_t>(d) + j];
            }
        }
    });
}

Tensor softmax(const Tensor& x, int axis) {
    if (axis < 0 || axis >= x.rank()) {
        throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " +
                             shape_to_string(x.shape()));
    }
    const int len = x.dim(axis);
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= x.dim(i);
    for (int i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

    std::vector<double> out(x.data().size());
    const auto& xd = x.data();
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t in = 0; in < inner; ++in) {
            const std::int64_t base = o * len * inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < len; ++k) mx = std::max(mx, xd[base + k * inner]);
            double z = 0.0;
            for (int k = 0; k < len; ++k) {
                const double e = std::exp(xd[base + k * inner] - mx);
                out[base + k * inner] = e;
                z += e;
            }
            for (int k = 0; k < len; ++k) out[base + k * inner] /= z;
        }
    }
    Tensor px = x;
    return Tensor::from_op(x.shape(), std::move(out), {x},
                           [px, len, outer, inner](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        const auto& y = o.data();
        auto& gx = px.grad();
        for (std::int64_t ot = 0; ot < outer; ++ot) {
            for (std::int64_t in = 0; in < inner; ++in) {
                const std::int64_t base = ot * len * inner + in;
                double dot = 0.0;
                for (int k = 0; k < len; ++k) dot += g[base + k * inner] * y[base + k * inner];
                for (int k = 0; k < len; ++k) {
                    gx[base + k * inner] += y[base + k * inner] * (g[base + k * inner] - dot);
                }
            }
        }
    });
}

Tensor causal_softmax(const Tensor& scores) {
    check_rank2(scores, "causal_softmax");
    if (scores.dim(0) != scores.dim(1)) {
        throw DimensionError("causal_softmax: expected square scores, got " +
                             shape_to_string(scores.shape()));
    }
    const int t = scores.dim(0);
    std::vector<double> out(scores.data().size(), 0.0);
    for (int i = 0; i < t; ++i) {
        const double* row = scores.data().data() + static_cast<std::size_t>(i) * t;
        double* orow = out.data() + static_cast<std::size_t>(i) * t;
        double mx = row[0];
        for (int j = 1; j <= i; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (int j = 0; j <= i; ++j) {
            orow[j] = std::exp(row[j] - mx);
            z += orow[j];
        }
        for (int j = 0; j <= i; ++j) orow[j] /= z;
    }
    Tensor ps = scores;
    return Tensor::from_op(scores.shape(), std::move(out), {scores},
                           [ps, t](const Tensor& o) mutable {
        if (!ps.requires_grad()) return;
        const auto& g = o.grad();
        const auto& y = o.data();
        auto& gs = ps.grad();
        for (int i = 0; i < t; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * t;
            double dot = 0.0;
            for (int j = 0; j <= i; ++j) dot += g[base + j] * y[base + j];
            for (int j = 0; j <= i; ++j) {
                gs[base + j] += y[base + j] * (g[base + j] - dot);
            }
        }
    });
}

Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps) {
    if (x.rank() < 1) throw DimensionError("rms_norm: rank-0 input");
    const int n = x.dim(x.rank() - 1);
    if (gain.rank() != 1 || gain.dim(0) != n) {
        throw DimensionError("rms_norm: gain " + shape_to_string(gain.shape()) +
                             " does not match last dimension of " + shape_to_string(x.shape()));
    }
    const std::int64_t rows = shape_product(x.shape()) / n;
    std::vector<double> out(x.data().size());
    std::vector<double> inv_rms(static_cast<std::size_t>(rows));
    const auto& xd = x.data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* row = xd.data() + r * n;
        double ms = 0.0;
        for (int j = 0; j < n; ++j) ms += row[j] * row[j];
        ms = ms / n + eps;
        const double inv = 1.0 / std::sqrt(ms);
        inv_rms[static_cast<std::size_t>(r)] = inv;
        for (int j = 0; j < n; ++j) out[r * n + j] = gain.at(j) * row[j] * inv;
    }
    Tensor px = x, pg = gain;
    return Tensor::from_op(x.shape(), std::move(out), {x, gain},
                           [px, pg, n, rows, inv_rms](const Tensor& o) mutable {
        const auto& g = o.grad();
        for (std::int64_t r = 0; r < rows; ++r) {
            const double inv = inv_rms[static_cast<std::size_t>(r)];
            const double* xrow = px.data().data() + r * n;
            const double* grow = g.data() + r * n;
            if (px.requires_grad()) {
                double dot = 0.0;  // sum_j g_j * gain_j * x_j
                for (int j = 0; j < n; ++j) dot += grow[j] * pg.at(j) * xrow[j];
                auto& gx = px.grad();
                const double c = dot * inv * inv * inv / n;
                for (int j = 0; j < n; ++j) {
                    gx[r * n + j] += grow[j] * pg.at(j) * inv - c * xrow[j];
                }
            }
            if (pg.requires_grad()) {
                auto& gg = pg.grad();
                for (int j = 0; j < n; ++j) gg[j] += grow[j] * xrow[j] * inv;
            }
        }
    });
}

Tensor swiglu_ffn(const Tensor& x, const Tensor& w1, const Tensor& w3, const Tensor& w2) {
    Tensor gate = silu(matmul(x, w1));
    Tensor lin = matmul(x, w3);
    return matmul(mul(gate, lin), w2);
}

Tensor rotary_embed(const Tensor& x, const std::vector<int>& positions, double base) {
    check_rank2(x, "rotary_embed");
    const int len = x.dim(0), d = x.dim(1);
    if (d % 2 != 0) {
        throw ConfigError("rotary_embed: head dimension must be even, got " + std::to_string(d));
    }
    if (static_cast<int>(positions.size()) != len) {
        throw DimensionError("rotary_embed: " + std::to_string(positions.size()) +
                             " positions for " + std::to_string(len) + " rows");
    }
    const int half = d / 2;
    std::vector<double> freqs(static_cast<std::size_t>(half));
    for (int i = 0; i < half; ++i) {
        freqs[static_cast<std::size_t>(i)] = std::pow(base, -2.0 * i / d);
    }
    std::vector<double> out(x.data().size());
    for (int r = 0; r < len; ++r) {
        const double* row = x.data().data() + static_cast<std::size_t>(r) * d;
        double* orow = out.data() + static_cast<std::size_t>(r) * d;
        for (int i = 0; i < half; ++i) {
            const double theta = positions[static_cast<std::size_t>(r)] * freqs[static_cast<std::size_t>(i)];
            const double c = std::cos(theta), s = std::sin(theta);
            const double x0 = row[2 * i], x1 = row[2 * i + 1];
            orow[2 * i] = c * x0 - s * x1;
            orow[2 * i + 1] = s * x0 + c * x1;
        }
    }
    Tensor px = x;
    std::vector<int> pos = positions;
    return Tensor::from_op(x.shape(), std::move(out), {x},
                           [px, pos, freqs, len, d, half](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const auto& g = o.grad();
        auto& gx = px.grad();
        // Inverse rotation on the upstream gradient.
        for (int r = 0; r < len; ++r) {
            const double* grow = g.data() + static_cast<std::size_t>(r) * d;
            double* gxrow = gx.data() + static_cast<std::size_t>(r) * d;
            for (int i = 0; i < half; ++i) {
                const double theta = pos[static_cast<std::size_t>(r)] * freqs[static_cast<std::size_t>(i)];
                const double c = std::cos(theta), s = std::sin(theta);
                const double g0 = grow[2 * i], g1 = grow[2 * i + 1];
                gxrow[2 * i] += c * g0 + s * g1;
                gxrow[2 * i + 1] += -s * g0 + c * g1;
            }
        }
    });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor px = x;
    return Tensor::from_op({1}, {acc}, {x}, [px](const Tensor& o) mutable {
        if (!px.requires_grad()) return;
        const double g = o.grad()[0];
        auto& gx = px.grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
}

}  // namespace sqa
