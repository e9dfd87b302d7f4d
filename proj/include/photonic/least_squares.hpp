#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "types.hpp"

namespace photonic {

struct LeastSquaresOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-14;
    double step_tolerance = 1e-14;
    double absolute_tolerance = 0.0;
    double initial_damping = 1e-3;
};

struct LeastSquaresResult {
    rvector x;
    rvector residuals;
    rmatrix jacobian;
    double cost = std::numeric_limits<double>::infinity(); // sum of squared residuals
    std::vector<double> history; // cost after every accepted step
    int iterations = 0;
    bool converged = false;
};

using ResidualFn = std::function<rvector(const rvector&)>;
using JacobianFn = std::function<rmatrix(const rvector&)>;
using ProjectFn = std::function<rvector(const rvector&)>;

inline rmatrix numeric_jacobian(const ResidualFn& f, const rvector& x, const rvector& steps) {
    const rvector r0 = f(x);
    rmatrix J(r0.size(), x.size());
    for (index_t k = 0; k < x.size(); ++k) {
        rvector xp = x;
        rvector xm = x;
        xp(k) += steps(k);
        xm(k) -= steps(k);
        J.col(k) = (f(xp) - f(xm)) / (2.0 * steps(k));
    }
    return J;
}

// Levenberg-Marquardt with Marquardt diagonal scaling. Only steps that lower
// the cost are accepted, so the cost sequence is non-increasing. The optional
// projection maps trial points back into the feasible box.
inline LeastSquaresResult levenberg_marquardt(const ResidualFn& f, const JacobianFn& jac, rvector x,
                                              const ProjectFn& project = {}, const LeastSquaresOptions& opt = {}) {
    if (project) x = project(x);
    LeastSquaresResult res;
    res.x = x;
    res.residuals = f(x);
    res.cost = res.residuals.squaredNorm();
    res.history.push_back(res.cost);
    if (!std::isfinite(res.cost)) return res;
    res.jacobian = jac(x);
    double lambda = opt.initial_damping;
    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        if (res.cost <= opt.absolute_tolerance) {
            res.converged = true;
            break;
        }
        const rmatrix& J = res.jacobian;
        const rmatrix A = J.transpose() * J;
        const rvector g = J.transpose() * res.residuals;
        rvector d = A.diagonal();
        const double dmax = std::max(d.maxCoeff(), 1e-300);
        for (index_t k = 0; k < d.size(); ++k) d(k) = std::max(d(k), 1e-12 * dmax);
        bool accepted = false;
        while (lambda < 1e16) {
            rmatrix H = A;
            H.diagonal() += lambda * d;
            const rvector step = H.ldlt().solve(-g);
            rvector trial = res.x + step;
            if (project) trial = project(trial);
            const rvector r = f(trial);
            const double c = r.squaredNorm();
            if (std::isfinite(c) && c < res.cost) {
                const double drop = res.cost - c;
                const double moved = (trial - res.x).norm();
                res.x = trial;
                res.residuals = r;
                const double previous = res.cost;
                res.cost = c;
                res.history.push_back(c);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (drop <= opt.relative_tolerance * previous || moved <= opt.step_tolerance * (1.0 + res.x.norm()))
                    res.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // no descent direction left at this damping: a stationary point
            res.converged = true;
            break;
        }
        if (res.converged) break;
        res.jacobian = jac(res.x);
    }
    return res;
}

} // namespace photonic
