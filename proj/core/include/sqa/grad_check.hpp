#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sqa/tensor.hpp"

namespace sqa {

struct GradCheckEntry {
    std::string param;
    std::int64_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::int64_t n_checked = 0;
    GradCheckEntry worst;
    std::vector<GradCheckEntry> violations;  // entries with rel_err > tol
    bool ok(double tol) const { return max_rel_err < tol; }
};

// Named parameter for grad_check.
struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Compares the analytic gradient of f (a deterministic scalar-valued build
// of a fresh graph over `params`) against central finite differences
// (f(t+h) - f(t-h)) / 2h, entry by entry. Relative error uses
// |a - n| / max(|a|, |n|, floor). Throws OracleError when f is non-finite.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<NamedParam> params,
                           double h = 1e-5, double tol = 1e-5, double floor = 1e-8);

}  // namespace sqa
