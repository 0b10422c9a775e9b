#include "hpiconv/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hpiconv::optim {

namespace {

double safe_eval(const Objective& f, std::span<const double> x, int& evals)
{
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts)
{
    const std::size_t n = x0.size();
    Result res;
    if (n == 0) {
        res.value = safe_eval(f, x0, res.evaluations);
        res.x = std::move(x0);
        res.converged = true;
        res.trace.push_back(res.value);
        return res;
    }

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = opts.initial_step.empty() ? 0.1 : opts.initial_step[i];
        simplex[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = safe_eval(f, simplex[i], res.evaluations);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point = [&](double coef, std::size_t worst, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = centroid[j] + coef * (simplex[worst][j] - centroid[j]);
        }
    };

    while (res.evaluations < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];
        if (res.trace.empty() || fv[best] < res.trace.back()) res.trace.push_back(fv[best]);
        ++res.iterations;

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        const double spread = fv[worst] - fv[best];
        if (std::isfinite(spread) && spread <= opts.ftol * (std::abs(fv[best]) + 1e-30)) {
            res.converged = true;
            break;
        }
        if (diameter <= opts.xtol) {
            res.converged = std::isfinite(fv[best]);
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        point(-1.0, worst, trial);
        const double fr = safe_eval(f, trial, res.evaluations);
        if (fr < fv[best]) {
            point(-2.0, worst, trial2);
            const double fe = safe_eval(f, trial2, res.evaluations);
            if (fe < fr) {
                simplex[worst] = trial2;
                fv[worst] = fe;
            } else {
                simplex[worst] = trial;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = trial;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        point(outside ? -0.5 : 0.5, worst, trial2);
        const double fc = safe_eval(f, trial2, res.evaluations);
        if (fc < (outside ? fr : fv[worst])) {
            simplex[worst] = trial2;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            fv[i] = safe_eval(f, simplex[i], res.evaluations);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = simplex[best];
    res.value = fv[best];
    if (res.trace.empty() || res.value < res.trace.back()) res.trace.push_back(res.value);
    return res;
}

Result bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts)
{
    const auto n = static_cast<Eigen::Index>(x0.size());
    Result res;
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    auto eval = [&](const Eigen::VectorXd& p) {
        return safe_eval(f, std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                         res.evaluations);
    };
    auto gradient = [&](Eigen::VectorXd p) {
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = opts.relative_step * std::max(1.0, std::abs(p(i)));
            const double xi = p(i);
            p(i) = xi + h;
            const double fp = eval(p);
            p(i) = xi - h;
            const double fm = eval(p);
            p(i) = xi;
            g(i) = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    double fx = eval(x);
    res.trace.push_back(fx);
    if (n == 0 || !std::isfinite(fx)) {
        res.x = std::move(x0);
        res.value = fx;
        res.converged = std::isfinite(fx);
        return res;
    }
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = gradient(x);
    for (int it = 0; it < opts.max_iterations; ++it) {
        ++res.iterations;
        if (!g.allFinite()) break;
        if (g.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -h_inv * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        Eigen::VectorXd x_new;
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * dir;
            f_new = eval(x_new);
            if (f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || !(f_new < fx)) {
            // no descent along the quasi-Newton direction: stationary to FD precision
            res.converged = g.lpNorm<Eigen::Infinity>() < 1e-4;
            break;
        }
        const Eigen::VectorXd g_new = gradient(x_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        const double improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        res.trace.push_back(fx);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
            h_inv = (eye - rho * s * y.transpose()) * h_inv * (eye - rho * y * s.transpose()) +
                    rho * s * s.transpose();
        }
        if (improvement <= 1e-14 * (std::abs(fx) + 1e-30)) {
            res.converged = true;
            break;
        }
    }
    res.x.assign(x.data(), x.data() + n);
    res.value = fx;
    return res;
}

}  // namespace hpiconv::optim
