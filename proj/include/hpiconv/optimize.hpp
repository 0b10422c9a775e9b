#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hpiconv::optim {

using Objective = std::function<double(std::span<const double>)>;

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
    /// Best objective value after every accepted iteration; non-increasing.
    std::vector<double> trace;
};

struct NelderMeadOptions {
    std::vector<double> initial_step;  // per coordinate; empty = 0.1 everywhere
    int max_evaluations = 20000;
    double ftol = 1e-12;  // relative spread of simplex values
    double xtol = 1e-10;  // simplex diameter
};

/// Derivative-free simplex minimizer (standard reflection/expansion/contraction/shrink).
[[nodiscard]] Result nelder_mead(const Objective& f, std::vector<double> x0,
                                 const NelderMeadOptions& opts = {});

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-8;
    double relative_step = 1e-6;  // central-difference step, scaled by max(1, |x_i|)
};

/// Quasi-Newton minimizer with central finite-difference gradients and Armijo backtracking.
[[nodiscard]] Result bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts = {});

}  // namespace hpiconv::optim
