#include "egograph/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "egograph/errors.hpp"

namespace egograph {

GradCheckReport finite_diff_check(const std::function<Tensor(Tape&)>& build_loss,
                                  const std::vector<Tensor>& params, double epsilon) {
    if (epsilon <= 0.0) throw ArgumentError("finite difference step must be positive");

    std::vector<Tensor> mut(params);
    for (Tensor& p : mut) p.zero_grad();
    std::vector<std::vector<double>> analytic(mut.size());
    {
        Tape tape;
        Tensor loss = build_loss(tape);
        tape.backward(loss);
        for (std::size_t i = 0; i < mut.size(); ++i) {
            analytic[i] = mut[i].has_grad() ? mut[i].grad() : std::vector<double>(mut[i].size(), 0.0);
        }
    }

    const auto eval = [&]() {
        Tape tape;
        return build_loss(tape).value();
    };

    GradCheckReport report;
    report.max_rel_err = -1.0;
    for (std::size_t i = 0; i < mut.size(); ++i) {
        auto& values = mut[i].values();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + epsilon;
            const double up = eval();
            values[j] = saved - epsilon;
            const double down = eval();
            values[j] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[i][j];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            const double rel = std::fabs(a - numeric) / denom;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = i;
                report.worst_coord = j;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace egograph
