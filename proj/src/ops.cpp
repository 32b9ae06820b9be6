#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "egograph/errors.hpp"
#include "egograph/neighbor.hpp"
#include "egograph/tensor.hpp"

namespace egograph {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMat = Eigen::Map<const EMat>;
using MMat = Eigen::Map<EMat>;

const std::vector<double>* grad_of(const Tensor& t) {
    return t.has_grad() ? &t.grad() : nullptr;
}

}  // namespace

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ArgumentError("matmul shape mismatch");
    }
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<std::size_t>(m) * n);
    MMat(out.data(), m, n).noalias() = CMat(a.values().data(), m, k) * CMat(b.values().data(), k, n);

    const bool need_a = active(a), need_b = active(b);
    Tensor result = make_result({m, n}, std::move(out), need_a || need_b);
    if (need_a || need_b) {
        record([a, b, result, need_a, need_b, m, k, n]() {
            const auto* og = grad_of(result);
            if (!og) return;
            CMat go(og->data(), m, n);
            if (need_a) {
                MMat(a.grad().data(), m, k).noalias() +=
                    go * CMat(b.values().data(), k, n).transpose();
            }
            if (need_b) {
                MMat(b.grad().data(), k, n).noalias() +=
                    CMat(a.values().data(), m, k).transpose() * go;
            }
        });
    }
    return result;
}

Tensor Tape::add_bias(const Tensor& m, const Tensor& bias) {
    if (m.rank() != 2 || bias.rank() != 1 || bias.dim(0) != m.dim(1)) {
        throw ArgumentError("add_bias shape mismatch");
    }
    const int rows = m.dim(0), cols = m.dim(1);
    std::vector<double> out(m.values());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out[static_cast<std::size_t>(r) * cols + c] += bias.values()[c];
        }
    }
    const bool need_m = active(m), need_b = active(bias);
    Tensor result = make_result({rows, cols}, std::move(out), need_m || need_b);
    if (need_m || need_b) {
        record([m, bias, result, need_m, need_b, rows, cols]() {
            const auto* og = grad_of(result);
            if (!og) return;
            if (need_m) m.accumulate_grad(*og);
            if (need_b) {
                auto& bg = bias.grad();
                for (int r = 0; r < rows; ++r) {
                    for (int c = 0; c < cols; ++c) {
                        bg[c] += (*og)[static_cast<std::size_t>(r) * cols + c];
                    }
                }
            }
        });
    }
    return result;
}

Tensor Tape::frobenius_batch(const Tensor& x, const Tensor& w) {
    if (x.rank() != 3 || w.rank() != 3 || x.dim(1) != w.dim(1) || x.dim(2) != w.dim(2)) {
        throw ArgumentError("frobenius_batch shape mismatch");
    }
    const int n = x.dim(0), d = w.dim(0);
    const int rc = x.dim(1) * x.dim(2);
    // flattening each matrix makes this a plain [n,rc] x [rc,d] product
    std::vector<double> out(static_cast<std::size_t>(n) * d);
    MMat(out.data(), n, d).noalias() =
        CMat(x.values().data(), n, rc) * CMat(w.values().data(), d, rc).transpose();

    const bool need_x = active(x), need_w = active(w);
    Tensor result = make_result({n, d}, std::move(out), need_x || need_w);
    if (need_x || need_w) {
        record([x, w, result, need_x, need_w, n, d, rc]() {
            const auto* og = grad_of(result);
            if (!og) return;
            CMat go(og->data(), n, d);
            if (need_x) {
                MMat(x.grad().data(), n, rc).noalias() += go * CMat(w.values().data(), d, rc);
            }
            if (need_w) {
                MMat(w.grad().data(), d, rc).noalias() +=
                    go.transpose() * CMat(x.values().data(), n, rc);
            }
        });
    }
    return result;
}

Tensor Tape::relu(const Tensor& x) {
    std::vector<double> out(x.values());
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    const bool need = active(x);
    Tensor result = make_result(x.shape(), std::move(out), need);
    if (need) {
        record([x, result]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& xg = x.grad();
            const auto& xv = x.values();
            // subgradient 0 at the kink
            for (std::size_t i = 0; i < xv.size(); ++i) {
                if (xv[i] > 0.0) xg[i] += (*og)[i];
            }
        });
    }
    return result;
}

Tensor Tape::tanh(const Tensor& x) {
    std::vector<double> out(x.values());
    for (double& v : out) v = std::tanh(v);
    const bool need = active(x);
    Tensor result = make_result(x.shape(), std::move(out), need);
    if (need) {
        record([x, result]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& xg = x.grad();
            const auto& ov = result.values();
            for (std::size_t i = 0; i < ov.size(); ++i) {
                xg[i] += (*og)[i] * (1.0 - ov[i] * ov[i]);
            }
        });
    }
    return result;
}

Tensor Tape::dropout(const Tensor& x, double rate, bool train, std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout rate must be in [0, 1)");
    if (!train || rate == 0.0) {
        return reshape(x, x.shape());  // identity pass-through keeps the tape uniform
    }
    const double keep = 1.0 - rate;
    std::bernoulli_distribution keep_dist(keep);
    auto mask = std::make_shared<std::vector<bool>>(x.size());
    std::vector<double> out(x.values());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool k = keep_dist(rng);
        (*mask)[i] = k;
        out[i] = k ? out[i] / keep : 0.0;  // inverted dropout
    }
    const bool need = active(x);
    Tensor result = make_result(x.shape(), std::move(out), need);
    if (need) {
        record([x, result, mask, keep]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& xg = x.grad();
            for (std::size_t i = 0; i < xg.size(); ++i) {
                if ((*mask)[i]) xg[i] += (*og)[i] / keep;
            }
        });
    }
    return result;
}

Tensor Tape::batch_norm(const Tensor& x, bool train, BatchNormState* state, bool update_running,
                        double momentum, double eps) {
    if (x.rank() != 2) throw ArgumentError("batch_norm expects a [rows, channels] tensor");
    const int rows = x.dim(0), cols = x.dim(1);
    const auto& xv = x.values();

    if (!train) {
        if (!state || !state->initialized) {
            throw StateError("batch_norm eval mode requires initialized running statistics");
        }
        // frozen statistics: a per-channel affine map
        std::vector<double> scale(cols), shift(cols);
        for (int c = 0; c < cols; ++c) {
            scale[c] = 1.0 / std::sqrt(state->running_var[c] + eps);
            shift[c] = -state->running_mean[c] * scale[c];
        }
        std::vector<double> out(xv.size());
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                out[i] = xv[i] * scale[c] + shift[c];
            }
        }
        const bool need = active(x);
        Tensor result = make_result({rows, cols}, std::move(out), need);
        if (need) {
            auto sc = std::make_shared<std::vector<double>>(std::move(scale));
            record([x, result, sc, rows, cols]() {
                const auto* og = grad_of(result);
                if (!og) return;
                auto& xg = x.grad();
                for (int r = 0; r < rows; ++r) {
                    for (int c = 0; c < cols; ++c) {
                        const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                        xg[i] += (*og)[i] * (*sc)[c];
                    }
                }
            });
        }
        return result;
    }

    // batch statistics over the row axis, biased variance as usual
    auto mean = std::make_shared<std::vector<double>>(cols, 0.0);
    auto inv_std = std::make_shared<std::vector<double>>(cols, 0.0);
    std::vector<double> var(cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            (*mean)[c] += xv[static_cast<std::size_t>(r) * cols + c];
        }
    }
    for (int c = 0; c < cols; ++c) (*mean)[c] /= rows;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double d = xv[static_cast<std::size_t>(r) * cols + c] - (*mean)[c];
            var[c] += d * d;
        }
    }
    for (int c = 0; c < cols; ++c) {
        var[c] /= rows;
        (*inv_std)[c] = 1.0 / std::sqrt(var[c] + eps);
    }

    if (state && update_running) {
        if (!state->initialized) {
            state->running_mean = *mean;
            state->running_var = var;
            state->initialized = true;
        } else {
            for (int c = 0; c < cols; ++c) {
                state->running_mean[c] = (1.0 - momentum) * state->running_mean[c] + momentum * (*mean)[c];
                state->running_var[c] = (1.0 - momentum) * state->running_var[c] + momentum * var[c];
            }
        }
    }

    std::vector<double> out(xv.size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            out[i] = (xv[i] - (*mean)[c]) * (*inv_std)[c];
        }
    }
    const bool need = active(x);
    Tensor result = make_result({rows, cols}, std::move(out), need);
    if (need) {
        record([x, result, inv_std, rows, cols]() {
            const auto* og = grad_of(result);
            if (!og) return;
            // d x_i = inv_std * (g_i - mean(g) - x_hat_i * mean(g * x_hat))
            const auto& xhat = result.values();
            auto& xg = x.grad();
            for (int c = 0; c < cols; ++c) {
                double gsum = 0.0, gx = 0.0;
                for (int r = 0; r < rows; ++r) {
                    const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                    gsum += (*og)[i];
                    gx += (*og)[i] * xhat[i];
                }
                const double gmean = gsum / rows;
                const double gxmean = gx / rows;
                for (int r = 0; r < rows; ++r) {
                    const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                    xg[i] += (*inv_std)[c] * ((*og)[i] - gmean - xhat[i] * gxmean);
                }
            }
        });
    }
    return result;
}

Tensor Tape::softmax(const Tensor& x) {
    std::vector<double> out(x.values());
    const double mx = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (double& v : out) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : out) v /= z;
    const bool need = active(x);
    Tensor result = make_result(x.shape(), std::move(out), need);
    if (need) {
        record([x, result]() {
            const auto* og = grad_of(result);
            if (!og) return;
            const auto& p = result.values();
            double dot = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) dot += (*og)[i] * p[i];
            auto& xg = x.grad();
            for (std::size_t i = 0; i < p.size(); ++i) {
                xg[i] += p[i] * ((*og)[i] - dot);
            }
        });
    }
    return result;
}

Tensor Tape::softmax_cross_entropy(const Tensor& logits, int label) {
    const int classes = static_cast<int>(logits.size());
    if (label < 0 || label >= classes) throw ArgumentError("class label out of range");
    const auto& lv = logits.values();
    const double mx = *std::max_element(lv.begin(), lv.end());
    double z = 0.0;
    for (double v : lv) z += std::exp(v - mx);
    const double loss = std::log(z) - (lv[label] - mx);

    const bool need = active(logits);
    Tensor result = make_result({1}, {loss}, need);
    if (need) {
        auto probs = std::make_shared<std::vector<double>>(lv.size());
        for (std::size_t i = 0; i < lv.size(); ++i) (*probs)[i] = std::exp(lv[i] - mx) / z;
        record([logits, result, probs, label]() {
            const auto* og = grad_of(result);
            if (!og) return;
            const double g = (*og)[0];
            auto& lg = logits.grad();
            for (std::size_t i = 0; i < lg.size(); ++i) {
                lg[i] += g * ((*probs)[i] - (static_cast<int>(i) == label ? 1.0 : 0.0));
            }
        });
    }
    return result;
}

Tensor Tape::sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    const bool need = active(x);
    Tensor result = make_result({1}, {total}, need);
    if (need) {
        record([x, result]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& xg = x.grad();
            for (double& g : xg) g += (*og)[0];
        });
    }
    return result;
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ArgumentError("concat_rows needs at least one part");
    int cols = -1, rows = 0;
    for (const Tensor& p : parts) {
        const int c = p.rank() == 1 ? p.dim(0) : p.dim(1);
        const int r = p.rank() == 1 ? 1 : p.dim(0);
        if (p.rank() > 2) throw ArgumentError("concat_rows expects vectors or matrices");
        if (cols < 0) cols = c;
        if (c != cols) throw ArgumentError("concat_rows column mismatch");
        rows += r;
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows) * cols);
    auto needs = std::make_shared<std::vector<bool>>(parts.size());
    bool need = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out.insert(out.end(), parts[i].values().begin(), parts[i].values().end());
        (*needs)[i] = active(parts[i]);
        need = need || (*needs)[i];
    }
    Tensor result = make_result({rows, cols}, std::move(out), need);
    if (need) {
        record([parts, result, needs]() {
            const auto* og = grad_of(result);
            if (!og) return;
            std::size_t offset = 0;
            for (std::size_t p = 0; p < parts.size(); ++p) {
                const std::size_t n = parts[p].size();
                if ((*needs)[p]) {
                    auto& pg = parts[p].grad();
                    for (std::size_t i = 0; i < n; ++i) pg[i] += (*og)[offset + i];
                }
                offset += n;
            }
        });
    }
    return result;
}

Tensor Tape::reshape(const Tensor& x, std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ArgumentError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    if (n != x.size()) throw ArgumentError("reshape changes element count");
    const bool need = active(x);
    Tensor result = make_result(std::move(shape), std::vector<double>(x.values()), need);
    if (need) {
        record([x, result]() {
            const auto* og = grad_of(result);
            if (!og) return;
            x.accumulate_grad(*og);
        });
    }
    return result;
}

Tensor Tape::scale(const Tensor& x, double s) {
    std::vector<double> out(x.values());
    for (double& v : out) v *= s;
    const bool need = active(x);
    Tensor result = make_result(x.shape(), std::move(out), need);
    if (need) {
        record([x, result, s]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& xg = x.grad();
            for (std::size_t i = 0; i < xg.size(); ++i) xg[i] += s * (*og)[i];
        });
    }
    return result;
}

Tensor Tape::gather_stack(const Tensor& h, const NeighborTable& table) {
    if (h.rank() != 2 || h.dim(0) != table.node_count()) {
        throw ArgumentError("gather_stack shape mismatch with neighbor table");
    }
    const int n = h.dim(0), d = h.dim(1), k = table.k();
    const auto& hv = h.values();
    std::vector<double> out(static_cast<std::size_t>(n) * (k + 1) * d, 0.0);
    for (int i = 0; i < n; ++i) {
        double* stack = out.data() + static_cast<std::size_t>(i) * (k + 1) * d;
        std::copy_n(hv.data() + static_cast<std::size_t>(i) * d, d, stack);
        for (int s = 0; s < k; ++s) {
            const NodeId m = table.slot(i, s);
            if (m == kPad) continue;  // pad rows stay zero
            std::copy_n(hv.data() + static_cast<std::size_t>(m) * d, d,
                        stack + static_cast<std::size_t>(s + 1) * d);
        }
    }
    const bool need = active(h);
    Tensor result = make_result({n, k + 1, d}, std::move(out), need);
    if (need) {
        const NeighborTable* t = &table;  // tables outlive tapes by contract
        record([h, result, t, n, d, k]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& hg = h.grad();
            for (int i = 0; i < n; ++i) {
                const double* stack = og->data() + static_cast<std::size_t>(i) * (k + 1) * d;
                double* self = hg.data() + static_cast<std::size_t>(i) * d;
                for (int c = 0; c < d; ++c) self[c] += stack[c];
                for (int s = 0; s < k; ++s) {
                    const NodeId m = t->slot(i, s);
                    if (m == kPad) continue;
                    double* row = hg.data() + static_cast<std::size_t>(m) * d;
                    const double* src = stack + static_cast<std::size_t>(s + 1) * d;
                    for (int c = 0; c < d; ++c) row[c] += src[c];
                }
            }
        });
    }
    return result;
}

Tensor Tape::gather_rows(const Tensor& h, std::span<const std::int32_t> indices, int rows_out) {
    if (h.rank() != 2) throw ArgumentError("gather_rows expects a matrix");
    if (rows_out < 1) throw ArgumentError("gather_rows needs at least one output row");
    const int n = h.dim(0), d = h.dim(1);
    std::vector<double> out(static_cast<std::size_t>(rows_out) * d, 0.0);
    auto picked = std::make_shared<std::vector<std::int32_t>>(rows_out, kPad);
    for (int r = 0; r < rows_out && r < static_cast<int>(indices.size()); ++r) {
        const std::int32_t src = indices[r];
        if (src == kPad) continue;
        if (src < 0 || src >= n) throw ArgumentError("gather_rows index out of range");
        (*picked)[r] = src;
        std::copy_n(h.values().data() + static_cast<std::size_t>(src) * d, d,
                    out.data() + static_cast<std::size_t>(r) * d);
    }
    const bool need = active(h);
    Tensor result = make_result({rows_out, d}, std::move(out), need);
    if (need) {
        record([h, result, picked, rows_out, d]() {
            const auto* og = grad_of(result);
            if (!og) return;
            auto& hg = h.grad();
            for (int r = 0; r < rows_out; ++r) {
                const std::int32_t src = (*picked)[r];
                if (src == kPad) continue;
                const double* go = og->data() + static_cast<std::size_t>(r) * d;
                double* row = hg.data() + static_cast<std::size_t>(src) * d;
                for (int c = 0; c < d; ++c) row[c] += go[c];
            }
        });
    }
    return result;
}

}  // namespace egograph
