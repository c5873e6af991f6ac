#include "sqa/grad_check.hpp"

#include <cmath>

#include "sqa/error.hpp"

namespace sqa {

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<NamedParam> params,
                           double h, double tol, double floor) {
    auto eval = [&]() -> double {
        Tensor loss = f();
        const double v = loss.value();
        if (!std::isfinite(v)) throw OracleError("grad_check: non-finite objective");
        return v;
    };

    for (auto& p : params) p.tensor.zero_grad();
    Tensor loss = f();
    if (!std::isfinite(loss.value())) throw OracleError("grad_check: non-finite objective");
    loss.backward();

    // Snapshot analytic grads before finite-difference perturbation.
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.push_back(p.tensor.grad());

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = params[pi].tensor.data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + h;
            const double f_plus = eval();
            data[i] = saved - h;
            const double f_minus = eval();
            data[i] = saved;

            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double a = analytic[pi][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), floor});
            GradCheckEntry entry{params[pi].name, static_cast<std::int64_t>(i), a, numeric,
                                 std::abs(a - numeric) / denom};
            ++report.n_checked;
            if (entry.rel_err > report.max_rel_err) {
                report.max_rel_err = entry.rel_err;
                report.worst = entry;
            }
            if (entry.rel_err > tol) report.violations.push_back(entry);
        }
    }
    return report;
}

}  // namespace sqa
