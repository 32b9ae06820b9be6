#ifndef EGOGRAPH_GRAD_CHECK_HPP
#define EGOGRAPH_GRAD_CHECK_HPP

#include <functional>
#include <vector>

#include "egograph/tensor.hpp"

namespace egograph {

struct GradCheckReport {
    double max_rel_err = -1.0;  // -1 until a coordinate was checked
    std::size_t worst_param = 0;
    std::size_t worst_coord = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

/// Compares the tape gradient of a scalar-valued builder against central
/// finite differences, coordinate by coordinate. The relative error uses
/// max(|analytic|, |numeric|, 1e-8) as denominator. `build_loss` must be
/// deterministic (dropout off or a fixed-mask variant) and must read
/// parameter values fresh on every call.
GradCheckReport finite_diff_check(const std::function<Tensor(Tape&)>& build_loss,
                                  const std::vector<Tensor>& params, double epsilon = 1e-5);

}  // namespace egograph

#endif
