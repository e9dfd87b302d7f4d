#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "symgroup.hpp"
#include "types.hpp"

namespace photonic {

inline constexpr double speed_of_light_nm_per_fs = 299.792458;

struct GaussianPhoton {
    double omega_c = 0.0; // rad/fs
    double sigma = 0.0;   // rad/fs, standard deviation of the intensity spectrum
    double tau = 0.0;     // fs

    GaussianPhoton() = default;

    GaussianPhoton(double omega_c_, double sigma_, double tau_) : omega_c(omega_c_), sigma(sigma_), tau(tau_) {
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(omega_c) || !std::isfinite(tau))
            throw input_error("photon needs finite parameters and sigma > 0");
    }

    static GaussianPhoton from_wavelength(double lambda_c_nm, double fwhm_nm, double tau_fs = 0.0) {
        if (!(lambda_c_nm > 0.0) || !(fwhm_nm > 0.0) || !std::isfinite(lambda_c_nm) || !std::isfinite(fwhm_nm))
            throw input_error("photon wavelength and bandwidth must be positive");
        const double c = speed_of_light_nm_per_fs;
        const double omega = 2.0 * pi * c / lambda_c_nm;
        const double fwhm_omega = 2.0 * pi * c * fwhm_nm / (lambda_c_nm * lambda_c_nm);
        return GaussianPhoton(omega, fwhm_omega / (2.0 * std::sqrt(2.0 * std::log(2.0))), tau_fs);
    }

    GaussianPhoton delayed_to(double tau_fs) const { return GaussianPhoton(omega_c, sigma, tau_fs); }

    // Normalized spectral amplitude (real, positive), so |alpha|^2 integrates to 1.
    double amplitude(double omega) const {
        const double x = omega - omega_c;
        return std::exp(-x * x / (4.0 * sigma * sigma)) / std::pow(2.0 * pi * sigma * sigma, 0.25);
    }
};

struct PairOverlap {
    double zeta = 1.0;
    double xi = 0.0;
    double nu = 0.0;
};

// mode_overlap scales zeta for polarization or spatial mismatch, not modelled otherwise.
inline PairOverlap pair_overlap(const GaussianPhoton& a, const GaussianPhoton& b, double mode_overlap = 1.0) {
    if (!(mode_overlap >= 0.0 && mode_overlap <= 1.0)) throw input_error("mode overlap must lie in [0, 1]");
    const double si2 = a.sigma * a.sigma;
    const double sj2 = b.sigma * b.sigma;
    const double sum = si2 + sj2;
    const double dw = a.omega_c - b.omega_c;
    PairOverlap o;
    o.zeta = mode_overlap * (2.0 * a.sigma * b.sigma / sum) * std::exp(-dw * dw / (2.0 * sum));
    o.xi = 2.0 * si2 * sj2 / sum;
    o.nu = (a.omega_c * sj2 + b.omega_c * si2) / sum;
    return o;
}

inline complex overlap_amplitude(const GaussianPhoton& a, const GaussianPhoton& b, double mode_overlap = 1.0) {
    const PairOverlap o = pair_overlap(a, b, mode_overlap);
    const double d = a.tau - b.tau;
    return std::sqrt(o.zeta) * std::exp(-o.xi * d * d / 2.0) * std::polar(1.0, o.nu * d);
}

inline cmatrix overlap_matrix(const std::vector<GaussianPhoton>& photons, double mode_overlap = 1.0) {
    const auto n = static_cast<index_t>(photons.size());
    cmatrix A(n, n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j)
            A(i, j) = (i == j) ? complex(1.0)
                               : overlap_amplitude(photons[static_cast<std::size_t>(i)],
                                                   photons[static_cast<std::size_t>(j)], mode_overlap);
    return A;
}

inline complex permutation_weight(const Permutation& sigma, const cmatrix& overlaps) {
    if (sigma.n() != overlaps.rows()) throw dimension_error("permutation_weight: degree does not match photon count");
    complex w = 1.0;
    for (int i = 0; i < sigma.n(); ++i)
        if (sigma.at(i) != i) w *= overlaps(i, sigma.at(i));
    return w;
}

inline complex permutation_weight(const Permutation& sigma, const std::vector<GaussianPhoton>& photons,
                                  double mode_overlap = 1.0) {
    if (sigma.n() != static_cast<int>(photons.size()))
        throw dimension_error("permutation_weight: degree does not match photon count");
    return permutation_weight(sigma, overlap_matrix(photons, mode_overlap));
}

// Photon 2 is the reference (tau = 0); deltas give the arrival times of the
// remaining photons in order. For two photons the single delta is tau_1 - tau_2.
inline std::vector<GaussianPhoton> with_relative_delays(const std::vector<GaussianPhoton>& photons,
                                                        const std::vector<double>& deltas) {
    const std::size_t n = photons.size();
    if (n < 2) throw dimension_error("relative delays need at least two photons");
    if (deltas.size() != n - 1)
        throw dimension_error("expected " + std::to_string(n - 1) + " relative delays, got " +
                              std::to_string(deltas.size()));
    for (double d : deltas)
        if (!std::isfinite(d)) throw input_error("delays must be finite");
    std::vector<GaussianPhoton> out;
    out.reserve(n);
    out.push_back(photons[0].delayed_to(deltas[0]));
    out.push_back(photons[1].delayed_to(0.0));
    for (std::size_t k = 2; k < n; ++k) out.push_back(photons[k].delayed_to(deltas[k - 1]));
    return out;
}

} // namespace photonic
