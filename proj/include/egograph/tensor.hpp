#ifndef EGOGRAPH_TENSOR_HPP
#define EGOGRAPH_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

namespace egograph {

class NeighborTable;

struct TensorImpl {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
};

/// Dense row-major tensor of doubles. Copying a Tensor copies the handle,
/// not the storage; parameters shared between layers (weight tying) are
/// expressed by holding the same handle in several places.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    static Tensor from(std::vector<int> shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<int>& shape() const;
    int rank() const;
    int dim(int i) const;
    std::size_t size() const;

    std::vector<double>& values();
    const std::vector<double>& values() const;
    double value() const;  // single-element tensors

    double& at(std::initializer_list<int> index);
    double at(std::initializer_list<int> index) const;

    bool requires_grad() const;
    void set_requires_grad(bool v);

    // Gradients live in the shared impl, so like a shared_ptr the handle's
    // constness does not protect them; backward closures accumulate through
    // const handles.
    bool has_grad() const;
    /// Gradient buffer, allocated as zeros on first access.
    std::vector<double>& grad() const;
    void zero_grad() const;
    void accumulate_grad(std::span<const double> delta) const;

    /// Deep copy with its own storage (gradient not copied).
    Tensor clone() const;

    TensorImpl* impl() const { return impl_.get(); }

private:
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<TensorImpl> impl_;
};

/// Running statistics for batch_norm in eval mode.
struct BatchNormState {
    std::vector<double> running_mean;
    std::vector<double> running_var;
    bool initialized = false;
};

/// Records primitive applications so a single reverse sweep can accumulate
/// exact gradients into every tensor that requires them. One tape per
/// forward pass; tapes are single-threaded, independent tapes may run in
/// parallel. Gradients accumulate (+=) into TensorImpl::grad, so summing a
/// minibatch is just running several tapes between zero_grad calls.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // -- primitives ---------------------------------------------------------
    Tensor matmul(const Tensor& a, const Tensor& b);           // [m,k]x[k,n] -> [m,n]
    Tensor add_bias(const Tensor& m, const Tensor& bias);      // rows + bias[c]
    /// Batched Frobenius inner product: x [N,R,C] against a filter bank
    /// w [D,R,C] -> [N,D].
    Tensor frobenius_batch(const Tensor& x, const Tensor& w);
    Tensor relu(const Tensor& x);
    Tensor tanh(const Tensor& x);
    Tensor dropout(const Tensor& x, double rate, bool train, std::mt19937_64& rng);
    /// Normalizes each column over the row axis. train=true uses batch
    /// statistics (and optionally updates `state`); train=false requires an
    /// initialized state and applies the frozen affine transform.
    Tensor batch_norm(const Tensor& x, bool train, BatchNormState* state = nullptr,
                      bool update_running = false, double momentum = 0.1, double eps = 1e-5);
    Tensor softmax(const Tensor& x);  // over all entries, any shape
    Tensor softmax_cross_entropy(const Tensor& logits, int label);
    Tensor sum(const Tensor& x);
    Tensor concat_rows(const std::vector<Tensor>& parts);
    Tensor reshape(const Tensor& x, std::vector<int> shape);
    Tensor scale(const Tensor& x, double s);

    // -- structured gathers (zero rows at PAD slots) -------------------------
    /// h [N,D] -> [N, K+1, D]; stack n = [h[n]; h[slot_0(n)]; ...; h[slot_{K-1}(n)]].
    Tensor gather_stack(const Tensor& h, const NeighborTable& table);
    /// h [N,D] -> [rows_out, D]; indices beyond size(indices) or equal to -1 give zero rows.
    Tensor gather_rows(const Tensor& h, std::span<const std::int32_t> indices, int rows_out);

    /// Reverse sweep from a single-element tensor. `seed` is the upstream
    /// gradient (use 1/batch for averaged losses).
    void backward(const Tensor& loss, double seed = 1.0);

    std::size_t recorded_steps() const { return steps_.size(); }

private:
    friend class TapeOps;
    struct Step {
        std::function<void()> back;
    };

    bool active(const Tensor& t) const;
    Tensor make_result(std::vector<int> shape, std::vector<double> values, bool needs_grad);
    void record(std::function<void()> back);

    std::vector<Step> steps_;
    std::unordered_set<const TensorImpl*> active_;
};

}  // namespace egograph

#endif
