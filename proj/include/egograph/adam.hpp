#ifndef EGOGRAPH_ADAM_HPP
#define EGOGRAPH_ADAM_HPP

#include <cstdint>
#include <vector>

#include "egograph/tensor.hpp"

namespace egograph {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed parameter list. Parameters whose
/// gradient was never touched in the current step are treated as zero-grad.
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

    void zero_grad();
    void step();

    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<double>& first_moment(std::size_t param) const { return m_[param]; }
    const std::vector<double>& second_moment(std::size_t param) const { return v_[param]; }

private:
    std::vector<Tensor> params_;
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace egograph

#endif
