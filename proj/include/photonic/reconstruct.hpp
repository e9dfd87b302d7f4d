#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "least_squares.hpp"
#include "mesh.hpp"
#include "types.hpp"
#include "wavepacket.hpp"

namespace photonic {

// delay positioning precision of 5 um expressed as a time
inline constexpr double delay_position_error_fs = 5000.0 / speed_of_light_nm_per_fs;
inline constexpr double default_gamma = 2522.0 - 19.0 - 188.0 - 1.0;

struct PairTerms {
    complex h1;
    complex h2;
};

inline PairTerms pair_terms(const cmatrix& U, int i, int j, int k, int l) {
    const int m = static_cast<int>(std::min(U.rows(), U.cols()));
    for (int x : {i, j, k, l})
        if (x < 1 || x > m) throw dimension_error("mode index " + std::to_string(x) + " outside the unitary");
    if (i == j || k == l) throw input_error("input and output pairs need two distinct modes");
    return {U(k - 1, i - 1) * U(l - 1, j - 1), U(k - 1, j - 1) * U(l - 1, i - 1)};
}

inline double predict_visibility(const cmatrix& U, int i, int j, int k, int l) {
    const auto [h1, h2] = pair_terms(U, i, j, k, l);
    const double denom = std::norm(h1) + std::norm(h2);
    if (denom == 0.0) return 0.0;
    return -2.0 * (h1 * std::conj(h2)).real() / denom;
}

struct VisibilityDatum {
    int i = 1;
    int j = 2;
    int k = 1;
    int l = 2;
    double value = 0.0;
    double sigma = 1.0;
};

// A pairing is treated as a zero when one of its two paths vanishes.
inline bool is_zero_pairing(const cmatrix& U, int i, int j, int k, int l) {
    const auto [h1, h2] = pair_terms(U, i, j, k, l);
    const double a = std::abs(h1);
    const double b = std::abs(h2);
    return a * b <= 1e-14 * (a * a + b * b);
}

// All pairings i<j, k<l with the given sigma; zero pairings dropped unless asked for.
inline std::vector<VisibilityDatum> predicted_visibilities(const cmatrix& U, double sigma = 1.0,
                                                           bool keep_zeros = false) {
    const int m = static_cast<int>(U.rows());
    std::vector<VisibilityDatum> out;
    for (int i = 1; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j)
            for (int k = 1; k <= m; ++k)
                for (int l = k + 1; l <= m; ++l) {
                    if (!keep_zeros && is_zero_pairing(U, i, j, k, l)) continue;
                    out.push_back({i, j, k, l, predict_visibility(U, i, j, k, l), sigma});
                }
    return out;
}

// ---------------------------------------------------------------------------
// Dip scans

struct ScanSample {
    double delay = 0.0; // fs
    double counts = 0.0;
    double error = 1.0;
};

struct VisibilityScan {
    int i = 1;
    int j = 2;
    int k = 1;
    int l = 2;
    std::vector<ScanSample> samples;
    double ho1 = 0.0;
    double ho2 = 0.0;
    double dark = 0.0;
    GaussianPhoton photon1;
    GaussianPhoton photon2;

    double ho_offset() const { return ho1 + ho2 - dark; }

    void validate() const {
        if (!(i < j) || !(k < l)) throw input_error("scan pairs must satisfy i<j and k<l");
        if (i < 1 || k < 1) throw input_error("scan mode indices are 1-based");
        if (!(photon1.sigma > 0.0) || !(photon2.sigma > 0.0)) throw input_error("scan needs both photon spectra");
        for (double b : {ho1, ho2, dark})
            if (!std::isfinite(b) || b < 0.0) throw input_error("background rates must be finite and non-negative");
        for (std::size_t n = 0; n < samples.size(); ++n) {
            const auto& s = samples[n];
            if (!std::isfinite(s.delay) || !std::isfinite(s.counts) || s.counts < 0.0)
                throw input_error("scan sample " + std::to_string(n + 1) + " has invalid delay or counts");
            if (!std::isfinite(s.error) || s.error <= 0.0)
                throw input_error("scan sample " + std::to_string(n + 1) + " needs a positive error");
        }
    }
};

struct DipEnvelope {
    double peak = 1.0;
    double rate = 0.0; // exponent coefficient in fs^-2

    DipEnvelope() = default;
    DipEnvelope(const GaussianPhoton& a, const GaussianPhoton& b) {
        const double s1 = a.sigma * a.sigma;
        const double s2 = b.sigma * b.sigma;
        const double dw = a.omega_c - b.omega_c;
        peak = 2.0 * a.sigma * b.sigma / (s1 + s2) * std::exp(-dw * dw / (2.0 * (s1 + s2)));
        rate = 2.0 * s1 * s2 / (s1 + s2);
    }

    double operator()(double t) const { return peak * std::exp(-rate * t * t); }
    double derivative(double t) const { return -2.0 * rate * t * (*this)(t); }
};

struct DipParameters {
    double y0 = 0.0;
    double amplitude = 0.0;
    double t_c = 0.0;
    double drift_slope = 0.0;

    rvector vector() const { return (rvector(4) << y0, amplitude, t_c, drift_slope).finished(); }
    static DipParameters from(const rvector& p) { return {p(0), p(1), p(2), p(3)}; }
};

inline double dip_model(double t, const DipParameters& p, const DipEnvelope& env, double ho1, double ho2,
                        double dark) {
    return (1.0 + p.drift_slope * t) * (p.y0 + p.amplitude * env(t - p.t_c) - (ho1 + ho2 - dark));
}

inline double dip_model(double t, const DipParameters& p, const VisibilityScan& scan) {
    return dip_model(t, p, DipEnvelope(scan.photon1, scan.photon2), scan.ho1, scan.ho2, scan.dark);
}

struct DipFit {
    DipParameters parameters;
    std::array<double, 4> std_errors{};
    double visibility = 0.0;
    double visibility_error = 0.0;
    double chi2_reduced = 0.0;
    int iterations = 0;
};

struct DipFitOptions {
    int weight_passes = 3;
    double delay_error = delay_position_error_fs;
    LeastSquaresOptions solver{500, 1e-15, 1e-15, 0.0, 1e-3};
};

namespace detail {

inline DipParameters initial_dip_guess(const VisibilityScan& scan, const DipEnvelope& env) {
    std::vector<std::size_t> order(scan.samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scan.samples[a].delay < scan.samples[b].delay; });
    const std::size_t n = order.size();
    const std::size_t edge = std::max<std::size_t>(1, (n + 9) / 10);
    const double h = scan.ho_offset();
    double sum = 0.0;
    for (std::size_t q = 0; q < edge; ++q) {
        sum += scan.samples[order[q]].counts + h;
        sum += scan.samples[order[n - 1 - q]].counts + h;
    }
    DipParameters p;
    p.y0 = sum / static_cast<double>(2 * edge);
    std::size_t extreme = order[0];
    for (std::size_t q = 0; q < n; ++q)
        if (std::abs(scan.samples[q].counts + h - p.y0) > std::abs(scan.samples[extreme].counts + h - p.y0)) extreme = q;
    p.t_c = scan.samples[extreme].delay;
    p.amplitude = (scan.samples[extreme].counts + h - p.y0) / env.peak;
    return p;
}

} // namespace detail

inline DipFit fit_dip(const VisibilityScan& scan, const DipFitOptions& opt = {}) {
    scan.validate();
    const std::size_t n = scan.samples.size();
    if (n < 6) throw insufficient_data_error("dip fit needs at least 6 samples, got " + std::to_string(n));
    const DipEnvelope env(scan.photon1, scan.photon2);
    const double h = scan.ho_offset();
    const double ho_var = scan.ho1 + scan.ho2 + scan.dark;

    auto model_slope = [&](double t, const DipParameters& p) {
        const double x = t - p.t_c;
        return p.drift_slope * (p.y0 + p.amplitude * env(x) - h) + (1.0 + p.drift_slope * t) * p.amplitude * env.derivative(x);
    };

    DipParameters p = detail::initial_dip_guess(scan, env);
    rvector sigma(static_cast<index_t>(n));
    LeastSquaresResult res;
    for (int pass = 0; pass < std::max(1, opt.weight_passes); ++pass) {
        for (std::size_t q = 0; q < n; ++q) {
            const auto& s = scan.samples[q];
            const double slope = model_slope(s.delay, p) * opt.delay_error;
            sigma(static_cast<index_t>(q)) = std::sqrt(s.error * s.error + ho_var + slope * slope);
        }
        auto residual = [&](const rvector& x) {
            const DipParameters d = DipParameters::from(x);
            rvector r(static_cast<index_t>(n));
            for (std::size_t q = 0; q < n; ++q) {
                const auto& s = scan.samples[q];
                r(static_cast<index_t>(q)) = (dip_model(s.delay, d, env, scan.ho1, scan.ho2, scan.dark) - s.counts) /
                                             sigma(static_cast<index_t>(q));
            }
            return r;
        };
        auto jacobian = [&](const rvector& x) {
            const DipParameters d = DipParameters::from(x);
            rmatrix J(static_cast<index_t>(n), 4);
            for (std::size_t q = 0; q < n; ++q) {
                const double t = scan.samples[q].delay;
                const double g = 1.0 + d.drift_slope * t;
                const double e = env(t - d.t_c);
                const double w = 1.0 / sigma(static_cast<index_t>(q));
                const auto r = static_cast<index_t>(q);
                J(r, 0) = g * w;
                J(r, 1) = g * e * w;
                J(r, 2) = -g * d.amplitude * env.derivative(t - d.t_c) * w;
                J(r, 3) = t * (d.y0 + d.amplitude * e - h) * w;
            }
            return J;
        };
        res = levenberg_marquardt(residual, jacobian, p.vector(), {}, opt.solver);
        if (!std::isfinite(res.cost) || !res.x.allFinite())
            throw fit_error("dip fit diverged for pairing " + std::to_string(scan.i) + std::to_string(scan.j) + "->" +
                            std::to_string(scan.k) + std::to_string(scan.l));
        if (!res.converged)
            throw fit_error("dip fit did not converge after " + std::to_string(res.iterations) +
                            " iterations (weighted residual " + std::to_string(std::sqrt(res.cost)) + ")");
        p = DipParameters::from(res.x);
    }

    DipFit fit;
    fit.parameters = p;
    fit.iterations = res.iterations;
    const rmatrix JtJ = res.jacobian.transpose() * res.jacobian;
    const rmatrix cov = JtJ.completeOrthogonalDecomposition().pseudoInverse();
    for (int q = 0; q < 4; ++q) fit.std_errors[q] = std::sqrt(std::max(cov(q, q), 0.0));
    if (p.y0 == 0.0) throw fit_error("dip fit produced a zero baseline");
    fit.visibility = -p.amplitude / p.y0;
    rvector grad = rvector::Zero(4);
    grad(0) = p.amplitude / (p.y0 * p.y0);
    grad(1) = -1.0 / p.y0;
    fit.visibility_error = std::sqrt(std::max(static_cast<double>(grad.transpose() * cov * grad), 0.0));
    fit.chi2_reduced = n > 4 ? res.cost / static_cast<double>(n - 4) : 0.0;
    for (double s : fit.std_errors)
        if (!std::isfinite(s)) throw fit_error("dip fit standard errors are not finite");
    return fit;
}

// ---------------------------------------------------------------------------
// Mesh reconstruction

struct ReconstructionProblem {
    InterferometerMesh mesh;
    std::vector<VisibilityDatum> data;
    double gamma = default_gamma;
    int starts = 32;
    std::uint64_t seed = 0;
    LeastSquaresOptions solver{400, 1e-16, 1e-15, 0.0, 1e-3};
    double jacobian_step = 1e-6;
};

struct FitReport {
    rvector parameters;
    double v_opt = 0.0;
    std::vector<VisibilityDatum> used;
    std::vector<double> predicted;
    std::vector<double> residuals; // experimental minus predicted
    std::vector<double> start_costs;
    std::vector<double> history; // accepted costs of the best start
    int best_start = 0;
    int iterations = 0;
};

struct MeshFit {
    InterferometerMesh mesh;
    cmatrix unitary;
    FitReport report;
};

inline double v_opt(const InterferometerMesh& mesh, const std::vector<VisibilityDatum>& data,
                    double gamma = default_gamma) {
    const cmatrix U = mesh_to_unitary(mesh);
    double total = 0.0;
    for (const auto& d : data) {
        const double r = d.value - predict_visibility(U, d.i, d.j, d.k, d.l);
        total += r * r / (d.sigma * d.sigma * gamma);
    }
    return total;
}

inline MeshFit optimize_mesh(const ReconstructionProblem& problem) {
    problem.mesh.validate();
    if (problem.mesh.elements.empty()) throw input_error("mesh template has no elements");
    if (!(problem.gamma > 0.0) || !std::isfinite(problem.gamma)) throw input_error("gamma must be positive");
    if (problem.starts < 1) throw input_error("at least one start is required");
    std::vector<VisibilityDatum> data;
    for (const auto& d : problem.data) {
        if (!(d.i < d.j) || !(d.k < d.l) || d.i < 1 || d.k < 1 || d.j > problem.mesh.m || d.l > problem.mesh.m)
            throw input_error("visibility pairing " + std::to_string(d.i) + std::to_string(d.j) + "->" +
                              std::to_string(d.k) + std::to_string(d.l) + " invalid for the mesh");
        if (!std::isfinite(d.value)) throw input_error("visibility values must be finite");
        if (std::isnan(d.sigma) || d.sigma <= 0.0) throw input_error("visibility sigma must be positive");
        if (std::isinf(d.sigma)) continue;
        data.push_back(d);
    }
    const index_t np = problem.mesh.parameter_count();
    if (static_cast<index_t>(data.size()) < np)
        throw insufficient_data_error(std::to_string(data.size()) + " visibilities for " + std::to_string(np) +
                                      " free parameters");

    const auto& mesh = problem.mesh;
    const double scale = 1.0 / std::sqrt(problem.gamma);
    auto residual = [&](const rvector& p) {
        const cmatrix U = detail::compose_unchecked(mesh.with_parameters(p));
        rvector r(static_cast<index_t>(data.size()));
        for (std::size_t q = 0; q < data.size(); ++q) {
            const auto& d = data[q];
            r(static_cast<index_t>(q)) = (d.value - predict_visibility(U, d.i, d.j, d.k, d.l)) / d.sigma * scale;
        }
        return r;
    };
    const rvector steps = rvector::Constant(np, problem.jacobian_step);
    auto jacobian = [&](const rvector& p) { return numeric_jacobian(residual, p, steps); };
    auto project = [&](const rvector& p) { return project_parameters(mesh, p); };

    const auto kinds = mesh.is_splitter();
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FitReport report;
    LeastSquaresResult best;
    bool have_best = false;
    for (int s = 0; s < problem.starts; ++s) {
        rvector x0 = mesh.parameters();
        if (s > 0)
            for (index_t k = 0; k < np; ++k) x0(k) = (kinds[static_cast<std::size_t>(k)] ? pi : 2 * pi) * unit(rng);
        LeastSquaresResult r;
        try {
            r = levenberg_marquardt(residual, jacobian, x0, project, problem.solver);
        } catch (const numeric_error&) {
            report.start_costs.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        report.start_costs.push_back(r.cost);
        if (std::isfinite(r.cost) && (!have_best || r.cost < best.cost)) {
            best = r;
            report.best_start = s;
            have_best = true;
        }
    }
    if (!have_best) throw optimization_error("no start produced a finite objective");

    MeshFit fit;
    fit.mesh = mesh.with_parameters(best.x);
    fit.unitary = mesh_to_unitary(fit.mesh);
    report.parameters = best.x;
    report.v_opt = best.cost;
    report.iterations = best.iterations;
    report.history = best.history;
    report.used = data;
    for (const auto& d : data) {
        const double v = predict_visibility(fit.unitary, d.i, d.j, d.k, d.l);
        report.predicted.push_back(v);
        report.residuals.push_back(d.value - v);
    }
    fit.report = std::move(report);
    return fit;
}

// ---------------------------------------------------------------------------
// Coincidence-count agreement of a unitary with raw scans

struct ScanNuisance {
    double n0 = 1.0;
    double t_c = 0.0;
    double drift_slope = 0.0;
};

inline int chi2_degrees_of_freedom(std::size_t total_samples, std::size_t scans, int unitary_parameters = 20) {
    return static_cast<int>(total_samples) - unitary_parameters - static_cast<int>(scans) - 1;
}

// Predicted counts N0 (1 + T t) P11(t - t_c) for one scan.
inline double predicted_counts(const VisibilityScan& scan, const cmatrix& U, const ScanNuisance& nu, double t) {
    const auto [h1, h2] = pair_terms(U, scan.i, scan.j, scan.k, scan.l);
    const DipEnvelope env(scan.photon1, scan.photon2);
    const double p11 = std::norm(h1) + std::norm(h2) + 2.0 * (h1 * std::conj(h2)).real() * env(t - nu.t_c);
    return nu.n0 * (1.0 + nu.drift_slope * t) * p11;
}

namespace detail {

inline void check_scans(const std::vector<VisibilityScan>& scans) {
    if (scans.empty()) throw insufficient_data_error("no scans supplied");
    for (const auto& s : scans) {
        s.validate();
        if (s.samples.empty()) throw insufficient_data_error("scan without samples");
    }
}

inline double scan_chi2(const VisibilityScan& scan, const cmatrix& U, const ScanNuisance& nu) {
    double total = 0.0;
    const double h = scan.ho_offset();
    for (const auto& s : scan.samples) {
        const double r = (s.counts + h - predicted_counts(scan, U, nu, s.delay)) / s.error;
        total += r * r;
    }
    return total;
}

} // namespace detail

inline ScanNuisance fit_scan_nuisance(const VisibilityScan& scan, const cmatrix& U) {
    const auto [h1, h2] = pair_terms(U, scan.i, scan.j, scan.k, scan.l);
    const double base = std::norm(h1) + std::norm(h2);
    if (base == 0.0) throw numeric_error("unitary predicts no coincidences for a measured pairing");
    const double h = scan.ho_offset();
    const std::size_t n = scan.samples.size();
    double mean = 0.0;
    for (const auto& s : scan.samples) mean += s.counts + h;
    mean /= static_cast<double>(n);
    std::size_t extreme = 0;
    for (std::size_t q = 1; q < n; ++q)
        if (std::abs(scan.samples[q].counts + h - mean) > std::abs(scan.samples[extreme].counts + h - mean)) extreme = q;
    const double dmax = std::max_element(scan.samples.begin(), scan.samples.end(), [](auto& a, auto& b) {
                            return std::abs(a.delay) < std::abs(b.delay);
                        })->delay;
    double outer = 0.0;
    int outer_count = 0;
    for (const auto& s : scan.samples)
        if (std::abs(s.delay) >= 0.6 * std::abs(dmax)) {
            outer += s.counts + h;
            ++outer_count;
        }
    rvector x0(3);
    x0 << (outer_count ? outer / outer_count : mean) / base, scan.samples[extreme].delay, 0.0;

    auto residual = [&](const rvector& x) {
        const ScanNuisance nu{x(0), x(1), x(2)};
        rvector r(static_cast<index_t>(n));
        for (std::size_t q = 0; q < n; ++q) {
            const auto& s = scan.samples[q];
            r(static_cast<index_t>(q)) = (predicted_counts(scan, U, nu, s.delay) - s.counts - h) / s.error;
        }
        return r;
    };
    const rvector steps = (rvector(3) << std::max(1e-6 * std::abs(x0(0)), 1e-12), 1e-4, 1e-10).finished();
    auto jacobian = [&](const rvector& x) { return numeric_jacobian(residual, x, steps); };
    const auto res = levenberg_marquardt(residual, jacobian, x0, {}, LeastSquaresOptions{300, 1e-14, 1e-14, 0.0, 1e-3});
    if (!res.x.allFinite() || !std::isfinite(res.cost)) throw fit_error("scan nuisance fit diverged");
    return {res.x(0), res.x(1), res.x(2)};
}

// Reduced chi-square with per-scan nuisance parameters held at the given values.
inline double chi2_reduced(const std::vector<VisibilityScan>& scans, const cmatrix& U,
                           const std::vector<ScanNuisance>& nuisances, int unitary_parameters = 20) {
    detail::check_scans(scans);
    if (nuisances.size() != scans.size()) throw dimension_error("one nuisance set per scan is required");
    std::size_t total = 0;
    double chi2 = 0.0;
    for (std::size_t s = 0; s < scans.size(); ++s) {
        chi2 += detail::scan_chi2(scans[s], U, nuisances[s]);
        total += scans[s].samples.size();
    }
    const int nu = chi2_degrees_of_freedom(total, scans.size(), unitary_parameters);
    if (nu <= 0) throw insufficient_data_error("no degrees of freedom left for chi-square");
    return chi2 / nu;
}

inline double chi2_reduced(const std::vector<VisibilityScan>& scans, const cmatrix& U, int unitary_parameters = 20) {
    detail::check_scans(scans);
    std::vector<ScanNuisance> nuisances;
    nuisances.reserve(scans.size());
    for (const auto& s : scans) nuisances.push_back(fit_scan_nuisance(s, U));
    return chi2_reduced(scans, U, nuisances, unitary_parameters);
}

} // namespace photonic
