#include "egograph/adam.hpp"

#include <cmath>

namespace egograph {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        m_[i].assign(params_[i].size(), 0.0);
        v_[i].assign(params_[i].size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& values = params_[i].values();
        const bool has = params_[i].has_grad();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double g = has ? params_[i].grad()[j] : 0.0;
            m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
            v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m_[i][j] / bc1;
            const double v_hat = v_[i][j] / bc2;
            values[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
        }
    }
}

}  // namespace egograph
