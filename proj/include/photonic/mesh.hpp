#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace photonic {

struct BeamSplitter {
    int a = 1;
    int b = 2;
    double beta = pi / 2; // Euler angle, transmittivity cos^2(beta/2)

    double transmittivity() const { return std::cos(beta / 2) * std::cos(beta / 2); }
};

struct PhaseShifter {
    int mode = 1;
    double alpha = 0.0;
};

using MeshElement = std::variant<BeamSplitter, PhaseShifter>;

inline void validate_element(const MeshElement& e, int m) {
    auto in_range = [m](int k) { return k >= 1 && k <= m; };
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        if (!in_range(bs->a) || !in_range(bs->b) || bs->a == bs->b)
            throw input_error("beam splitter modes (" + std::to_string(bs->a) + "," + std::to_string(bs->b) +
                              ") invalid for " + std::to_string(m) + " modes");
        if (!std::isfinite(bs->beta) || bs->beta < 0.0 || bs->beta > pi)
            throw input_error("beam splitter angle must lie in [0, pi]");
    } else {
        const auto& ps = std::get<PhaseShifter>(e);
        if (!in_range(ps.mode))
            throw input_error("phase shifter mode " + std::to_string(ps.mode) + " invalid for " + std::to_string(m) +
                              " modes");
        if (!std::isfinite(ps.alpha)) throw input_error("phase must be finite");
    }
}

struct InterferometerMesh {
    int m = 0;
    std::vector<MeshElement> elements;

    void validate() const {
        if (m < 1) throw input_error("mesh needs at least one mode");
        for (const auto& e : elements) validate_element(e, m);
    }

    index_t parameter_count() const { return static_cast<index_t>(elements.size()); }

    // Beam-splitter angles and phases in element order.
    rvector parameters() const {
        rvector p(parameter_count());
        for (std::size_t k = 0; k < elements.size(); ++k) {
            const auto& e = elements[k];
            p(static_cast<index_t>(k)) =
                std::holds_alternative<BeamSplitter>(e) ? std::get<BeamSplitter>(e).beta : std::get<PhaseShifter>(e).alpha;
        }
        return p;
    }

    InterferometerMesh with_parameters(const rvector& p) const {
        if (p.size() != parameter_count()) throw dimension_error("mesh parameter vector has the wrong length");
        InterferometerMesh out = *this;
        for (std::size_t k = 0; k < out.elements.size(); ++k) {
            auto& e = out.elements[k];
            if (auto* bs = std::get_if<BeamSplitter>(&e)) {
                bs->beta = p(static_cast<index_t>(k));
            } else {
                std::get<PhaseShifter>(e).alpha = p(static_cast<index_t>(k));
            }
        }
        return out;
    }

    std::vector<bool> is_splitter() const {
        std::vector<bool> out;
        for (const auto& e : elements) out.push_back(std::holds_alternative<BeamSplitter>(e));
        return out;
    }
};

inline cmatrix element_unitary(const MeshElement& e, int m) {
    validate_element(e, m);
    cmatrix E = cmatrix::Identity(m, m);
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        const double c = std::cos(bs->beta / 2);
        const double s = std::sin(bs->beta / 2);
        const index_t a = bs->a - 1;
        const index_t b = bs->b - 1;
        E(a, a) = c;
        E(b, b) = c;
        E(a, b) = complex(0.0, s);
        E(b, a) = complex(0.0, s);
    } else {
        const auto& ps = std::get<PhaseShifter>(e);
        E(ps.mode - 1, ps.mode - 1) = std::polar(1.0, ps.alpha);
    }
    return E;
}

// U <- E U, touching only the rows the element acts on.
inline void apply_element(cmatrix& U, const MeshElement& e) {
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
        const double c = std::cos(bs->beta / 2);
        const complex is(0.0, std::sin(bs->beta / 2));
        const index_t a = bs->a - 1;
        const index_t b = bs->b - 1;
        for (index_t j = 0; j < U.cols(); ++j) {
            const complex ua = U(a, j);
            const complex ub = U(b, j);
            U(a, j) = c * ua + is * ub;
            U(b, j) = is * ua + c * ub;
        }
    } else {
        const auto& ps = std::get<PhaseShifter>(e);
        U.row(ps.mode - 1) *= std::polar(1.0, ps.alpha);
    }
}

inline double unitarity_error(const cmatrix& U) {
    return (U.adjoint() * U - cmatrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

// No range checks, so finite differences may step slightly past the angle bounds.
inline cmatrix compose_unchecked(const InterferometerMesh& mesh) {
    cmatrix U = cmatrix::Identity(mesh.m, mesh.m);
    for (const auto& e : mesh.elements) apply_element(U, e);
    return U;
}

} // namespace detail

// Elements act in list order: U = E_k ... E_2 E_1.
inline cmatrix mesh_to_unitary(const InterferometerMesh& mesh) {
    mesh.validate();
    if (mesh.elements.empty()) throw input_error("mesh has no elements");
    const cmatrix U = detail::compose_unchecked(mesh);
    const double err = unitarity_error(U);
    if (err > 1e-9) throw numeric_error("composed mesh is not unitary (error " + std::to_string(err) + ")");
    return U;
}

// Angles clamped to [0, pi], phases wrapped to [0, 2 pi).
inline rvector project_parameters(const InterferometerMesh& mesh, rvector p) {
    const auto kinds = mesh.is_splitter();
    for (index_t k = 0; k < p.size(); ++k) {
        if (kinds[static_cast<std::size_t>(k)]) {
            p(k) = std::clamp(p(k), 0.0, pi);
        } else {
            p(k) = std::fmod(p(k), 2 * pi);
            if (p(k) < 0) p(k) += 2 * pi;
        }
    }
    return p;
}

} // namespace photonic
