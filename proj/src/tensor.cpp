#include "egograph/tensor.hpp"

#include <numeric>
#include <string>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ArgumentError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto impl = std::make_shared<TensorImpl>();
    impl->values.assign(shape_size(shape), 0.0);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.values()) v = value;
    return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    if (shape_size(shape) != values.size()) {
        throw ArgumentError("tensor value count does not match shape");
    }
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->values = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const { return impl_->shape; }
int Tensor::rank() const { return static_cast<int>(impl_->shape.size()); }

int Tensor::dim(int i) const {
    if (i < 0 || i >= rank()) throw ArgumentError("tensor dimension index out of range");
    return impl_->shape[i];
}

std::size_t Tensor::size() const { return impl_->values.size(); }
std::vector<double>& Tensor::values() { return impl_->values; }
const std::vector<double>& Tensor::values() const { return impl_->values; }

double Tensor::value() const {
    if (size() != 1) throw ArgumentError("value() requires a single-element tensor");
    return impl_->values[0];
}

namespace {

std::size_t flat_index(const std::vector<int>& shape, std::initializer_list<int> index) {
    if (index.size() != shape.size()) throw ArgumentError("index rank mismatch");
    std::size_t flat = 0;
    int i = 0;
    for (int idx : index) {
        if (idx < 0 || idx >= shape[i]) throw ArgumentError("index out of range");
        flat = flat * static_cast<std::size_t>(shape[i]) + static_cast<std::size_t>(idx);
        ++i;
    }
    return flat;
}

}  // namespace

double& Tensor::at(std::initializer_list<int> index) {
    return impl_->values[flat_index(impl_->shape, index)];
}

double Tensor::at(std::initializer_list<int> index) const {
    return impl_->values[flat_index(impl_->shape, index)];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool v) { impl_->requires_grad = v; }

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::vector<double>& Tensor::grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() const { impl_->grad.clear(); }

void Tensor::accumulate_grad(std::span<const double> delta) const {
    if (delta.size() != impl_->values.size()) {
        throw ArgumentError("gradient shape mismatch");
    }
    auto& g = grad();
    for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = impl_->shape;
    impl->values = impl_->values;
    impl->requires_grad = impl_->requires_grad;
    return Tensor(std::move(impl));
}

bool Tape::active(const Tensor& t) const {
    return t.requires_grad() || active_.contains(t.impl());
}

Tensor Tape::make_result(std::vector<int> shape, std::vector<double> values, bool needs_grad) {
    Tensor out = Tensor::from(std::move(shape), std::move(values));
    if (needs_grad) active_.insert(out.impl());
    return out;
}

void Tape::record(std::function<void()> back) { steps_.push_back({std::move(back)}); }

void Tape::backward(const Tensor& loss, double seed) {
    if (loss.size() != 1) {
        throw ArgumentError("backward starts from a single-element tensor");
    }
    Tensor root = loss;
    root.grad()[0] += seed;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        it->back();
    }
}

}  // namespace egograph
