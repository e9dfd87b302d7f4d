#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matfunc.hpp"
#include "symgroup.hpp"
#include "types.hpp"
#include "wavepacket.hpp"

namespace photonic {

inline constexpr int max_rate_degree = 6;

// Representation data shared by every rate matrix and basis vector of degree n.
class SymmetricBasis {
public:
    struct Block {
        IrrepBlock layout;
        std::vector<rmatrix> irrep; // Young orthogonal matrices, indexed like perms()
        std::vector<Permutation> row_orders;
        rmatrix coefficient_inverse; // inverse of the block of K Q
    };

    explicit SymmetricBasis(int n) : n_(n), perms_(enumerate_permutations(n)) {
        check_degree(n, max_rate_degree, "symmetric basis");
        const auto N = static_cast<index_t>(perms_.size());
        const double nf = static_cast<double>(N);
        std::vector<Permutation> candidates;
        for (const auto& p : perms_) candidates.push_back(p.inverse());

        for (const auto& lay : block_layout(n)) {
            Block b;
            b.layout = lay;
            const YoungRepresentation Y(lay.partition);
            for (const auto& p : perms_) b.irrep.push_back(Y(p));

            std::vector<long long> chi(perms_.size());
            for (std::size_t k = 0; k < perms_.size(); ++k) chi[k] = character(lay.partition, perms_[k]);

            // greedy choice of row orders; each row is K[mu] = chi(mu o rho)
            std::vector<rvector> basis;
            std::vector<rvector> rows;
            for (const auto& rho : candidates) {
                if (static_cast<index_t>(rows.size()) == lay.size) break;
                rvector k(N);
                for (index_t mu = 0; mu < N; ++mu)
                    k(mu) = static_cast<double>(chi[permutation_index(perms_[static_cast<std::size_t>(mu)] * rho)]);
                rvector r = k;
                for (const auto& q : basis) r -= q.dot(r) * q;
                if (r.norm() < 1e-9 * k.norm()) continue;
                basis.push_back(r / r.norm());
                rows.push_back(k);
                b.row_orders.push_back(rho);
            }
            if (static_cast<index_t>(rows.size()) != lay.size)
                throw numeric_error("could not find independent immanant rows for " + lay.partition.str());

            const double scale = std::sqrt(static_cast<double>(lay.dim) / nf);
            rmatrix C = rmatrix::Zero(lay.size, lay.size);
            for (index_t r = 0; r < lay.size; ++r)
                for (index_t mu = 0; mu < N; ++mu) {
                    const double kv = rows[static_cast<std::size_t>(r)](mu);
                    if (kv == 0.0) continue;
                    const rmatrix& y = b.irrep[static_cast<std::size_t>(mu)];
                    for (index_t j = 0; j < lay.dim; ++j)
                        for (index_t i = 0; i < lay.dim; ++i) C(r, j * lay.dim + i) += kv * scale * y(i, j);
                }
            b.coefficient_inverse = C.inverse();
            blocks_.push_back(std::move(b));
        }
    }

    int n() const { return n_; }
    const std::vector<Permutation>& perms() const { return perms_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    std::vector<IrrepBlock> layout() const {
        std::vector<IrrepBlock> out;
        for (const auto& b : blocks_) out.push_back(b.layout);
        return out;
    }

private:
    int n_;
    std::vector<Permutation> perms_;
    std::vector<Block> blocks_;
};

inline const SymmetricBasis& symmetric_basis(int n) {
    check_degree(n, max_rate_degree, "symmetric basis");
    static std::once_flag flags[max_rate_degree + 1];
    static std::unique_ptr<SymmetricBasis> cache[max_rate_degree + 1];
    const auto k = static_cast<std::size_t>(n);
    std::call_once(flags[k], [&] { cache[k] = std::make_unique<SymmetricBasis>(n); });
    return *cache[k];
}

inline const IrrepBlock& find_block(const std::vector<IrrepBlock>& blocks, const Partition& lambda) {
    for (const auto& b : blocks)
        if (b.partition == lambda) return b;
    throw input_error("partition " + lambda.str() + " does not index a block");
}

struct RateMatrix {
    int n = 0;
    cmatrix matrix;
    std::vector<IrrepBlock> blocks;

    const IrrepBlock& block(const Partition& lambda) const { return find_block(blocks, lambda); }

    cmatrix block_matrix(const Partition& lambda) const {
        const auto& b = block(lambda);
        return matrix.block(b.offset, b.offset, b.size, b.size);
    }
};

struct BasisVector {
    int n = 0;
    cvector entries;
    std::vector<IrrepBlock> blocks;

    cvector block_entries(const Partition& lambda) const {
        const auto& b = find_block(blocks, lambda);
        return entries.segment(b.offset, b.size);
    }
};

struct Fractions {
    double per = 0.0;
    double det = 0.0;
    double imm = 0.0;
};

inline void check_photons(const std::vector<GaussianPhoton>& photons) {
    for (const auto& p : photons)
        if (!std::isfinite(p.omega_c) || !std::isfinite(p.sigma) || !std::isfinite(p.tau) || !(p.sigma > 0.0))
            throw input_error("photon parameters must be finite with sigma > 0");
}

// Sum over s of w(s) Y_lambda(s) for each block.
inline std::vector<cmatrix> fourier_blocks(const std::vector<GaussianPhoton>& photons, double mode_overlap = 1.0) {
    const int n = static_cast<int>(photons.size());
    const auto& basis = symmetric_basis(n);
    const cmatrix A = overlap_matrix(photons, mode_overlap);
    std::vector<complex> w;
    w.reserve(basis.perms().size());
    for (const auto& p : basis.perms()) w.push_back(permutation_weight(p, A));
    std::vector<cmatrix> out;
    for (const auto& b : basis.blocks()) {
        cmatrix F = cmatrix::Zero(b.layout.dim, b.layout.dim);
        for (std::size_t k = 0; k < w.size(); ++k) F += w[k] * b.irrep[k].cast<complex>();
        out.push_back((F + F.adjoint()) / 2.0);
    }
    return out;
}

inline RateMatrix rate_matrix(const std::vector<GaussianPhoton>& photons, double mode_overlap = 1.0) {
    const int n = static_cast<int>(photons.size());
    if (n < 2 || n > max_rate_degree)
        throw size_limit_error("rate_matrix: photon count " + std::to_string(n) + " outside [2, " +
                               std::to_string(max_rate_degree) + "]");
    check_photons(photons);
    const auto& basis = symmetric_basis(n);
    const auto F = fourier_blocks(photons, mode_overlap);
    RateMatrix R;
    R.n = n;
    R.blocks = basis.layout();
    const auto N = static_cast<index_t>(basis.perms().size());
    R.matrix = cmatrix::Zero(N, N);
    for (std::size_t k = 0; k < basis.blocks().size(); ++k) {
        const auto& b = basis.blocks()[k];
        const index_t d = b.layout.dim;
        cmatrix big = cmatrix::Zero(b.layout.size, b.layout.size);
        for (index_t j = 0; j < d; ++j) big.block(j * d, j * d, d, d) = F[k];
        const cmatrix Ci = b.coefficient_inverse.cast<complex>();
        cmatrix blk = Ci.transpose() * big * Ci;
        R.matrix.block(b.layout.offset, b.layout.offset, b.layout.size, b.layout.size) = (blk + blk.adjoint()) / 2.0;
    }
    return R;
}

inline RateMatrix rate_matrix(const std::vector<GaussianPhoton>& photons, const std::vector<double>& deltas,
                              double mode_overlap = 1.0) {
    return rate_matrix(with_relative_delays(photons, deltas), mode_overlap);
}

inline BasisVector basis_vector(const cmatrix& T) {
    require_square(T, "basis_vector");
    for (index_t i = 0; i < T.size(); ++i)
        if (!std::isfinite(T(i).real()) || !std::isfinite(T(i).imag()))
            throw input_error("basis_vector: matrix contains non-finite entries");
    const int n = static_cast<int>(T.rows());
    if (n < 2 || n > max_rate_degree)
        throw size_limit_error("basis_vector: size " + std::to_string(n) + " outside [2, " +
                               std::to_string(max_rate_degree) + "]");
    const auto& basis = symmetric_basis(n);
    BasisVector v;
    v.n = n;
    v.blocks = basis.layout();
    v.entries = cvector::Zero(static_cast<index_t>(basis.perms().size()));
    const Partition trivial({n});
    const Partition sign = trivial.conjugate();
    for (const auto& b : basis.blocks()) {
        for (std::size_t r = 0; r < b.row_orders.size(); ++r) {
            const cmatrix Tp = row_permuted(T, b.row_orders[r]);
            complex value;
            if (b.layout.partition == trivial) {
                value = permanent(Tp);
            } else if (b.layout.partition == sign) {
                value = determinant(Tp);
            } else {
                value = immanant(b.layout.partition, Tp);
            }
            v.entries(b.layout.offset + static_cast<index_t>(r)) = value;
        }
    }
    return v;
}

inline double quadratic_form(const cmatrix& R, const cvector& v, const char* what) {
    const complex q = v.dot(R * v);
    const double scale = std::max(1.0, R.cwiseAbs().maxCoeff() * v.squaredNorm());
    if (!std::isfinite(q.real()) || std::abs(q.imag()) > 1e-12 * scale)
        throw numeric_error(std::string(what) + ": quadratic form is not real (imaginary part " +
                            std::to_string(q.imag()) + ")");
    return q.real();
}

inline double probability(const RateMatrix& R, const BasisVector& v) {
    if (R.n != v.n) throw dimension_error("rate matrix and basis vector have different photon counts");
    return quadratic_form(R.matrix, v.entries, "probability");
}

inline double partition_probability(const Partition& lambda, const RateMatrix& R, const BasisVector& v) {
    if (R.n != v.n) throw dimension_error("rate matrix and basis vector have different photon counts");
    const auto& b = R.block(lambda);
    return quadratic_form(R.matrix.block(b.offset, b.offset, b.size, b.size), v.entries.segment(b.offset, b.size),
                          "partition_probability");
}

inline double coincidence_probability(const cmatrix& T, const std::vector<GaussianPhoton>& photons) {
    require_square(T, "coincidence_probability");
    if (T.rows() != static_cast<index_t>(photons.size()))
        throw dimension_error("coincidence_probability: matrix size does not match photon count");
    return probability(rate_matrix(photons), basis_vector(T));
}

inline double coincidence_probability(const cmatrix& T, const std::vector<GaussianPhoton>& photons,
                                      const std::vector<double>& deltas) {
    return coincidence_probability(T, with_relative_delays(photons, deltas));
}

// Direct expansion of the squared detection amplitude: every pair of photon
// assignments (a, b) contributes u_a conj(u_b) prod_i <phi_b(i)|phi_a(i)>.
inline double coincidence_oracle(const cmatrix& T, const std::vector<GaussianPhoton>& photons) {
    require_square(T, "coincidence_oracle");
    const int n = static_cast<int>(T.rows());
    if (n != static_cast<int>(photons.size()))
        throw dimension_error("coincidence_oracle: matrix size does not match photon count");
    if (n > 4) throw size_limit_error("coincidence_oracle supports at most 4 photons");
    check_photons(photons);
    const auto perms = enumerate_permutations(n);
    std::vector<complex> u;
    for (const auto& a : perms) {
        complex x = 1.0;
        for (int i = 0; i < n; ++i) x *= T(i, a.at(i));
        u.push_back(x);
    }
    auto inner = [&](int j, int k) -> complex {
        if (j == k) return 1.0;
        return overlap_amplitude(photons[static_cast<std::size_t>(k)], photons[static_cast<std::size_t>(j)]);
    };
    complex total = 0.0;
    for (std::size_t a = 0; a < perms.size(); ++a)
        for (std::size_t b = 0; b < perms.size(); ++b) {
            complex g = 1.0;
            for (int i = 0; i < n; ++i) g *= inner(perms[b].at(i), perms[a].at(i));
            total += u[a] * std::conj(u[b]) * g;
        }
    return total.real();
}

inline double coincidence_oracle(const cmatrix& T, const std::vector<GaussianPhoton>& photons,
                                 const std::vector<double>& deltas) {
    return coincidence_oracle(T, with_relative_delays(photons, deltas));
}

inline Fractions fractions(const RateMatrix& R) {
    const auto N = R.matrix.rows();
    Fractions f;
    f.per = R.matrix(0, 0).real();
    f.det = R.matrix(N - 1, N - 1).real();
    f.imm = 1.0 - f.per - f.det;
    return f;
}

struct PortSelection {
    int m = 0;
    std::vector<int> inputs;
    std::vector<int> outputs;

    void validate() const {
        if (m < 1) throw input_error("port selection needs at least one mode");
        if (inputs.empty() || inputs.size() != outputs.size())
            throw input_error("port selection needs equally many (non-zero) inputs and outputs");
        auto check = [&](const std::vector<int>& ports, const char* what) {
            for (std::size_t i = 0; i < ports.size(); ++i) {
                if (ports[i] < 1 || ports[i] > m)
                    throw input_error(std::string(what) + " port " + std::to_string(ports[i]) + " outside [1, " +
                                      std::to_string(m) + "]");
                if (i > 0 && ports[i] <= ports[i - 1])
                    throw input_error(std::string(what) + " ports must be strictly increasing");
            }
        };
        check(inputs, "input");
        check(outputs, "output");
    }
};

inline cmatrix submatrix(const cmatrix& U, const PortSelection& sel) {
    sel.validate();
    if (U.rows() != sel.m || U.cols() != sel.m)
        throw dimension_error("submatrix: selection is for " + std::to_string(sel.m) + " modes but matrix is " +
                              std::to_string(U.rows()) + "x" + std::to_string(U.cols()));
    const auto n = static_cast<index_t>(sel.inputs.size());
    cmatrix T(n, n);
    for (index_t a = 0; a < n; ++a)
        for (index_t b = 0; b < n; ++b)
            T(a, b) = U(sel.outputs[static_cast<std::size_t>(a)] - 1, sel.inputs[static_cast<std::size_t>(b)] - 1);
    return T;
}

struct GridSpec {
    double dtau1_min = -1000.0;
    double dtau1_max = 1000.0;
    int width = 81;
    double dtau2_min = -1000.0;
    double dtau2_max = 1000.0;
    int height = 81;

    std::vector<std::pair<double, double>> points() const {
        if (width < 1 || height < 1) throw input_error("landscape grid must have at least one point");
        auto axis = [](double lo, double hi, int count, int k) {
            return count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
        };
        std::vector<std::pair<double, double>> out;
        out.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
        for (int i = 0; i < width; ++i)
            for (int j = 0; j < height; ++j)
                out.emplace_back(axis(dtau1_min, dtau1_max, width, i), axis(dtau2_min, dtau2_max, height, j));
        return out;
    }
};

struct Landscape {
    PortSelection selection;
    std::vector<GaussianPhoton> photons;
    std::vector<std::pair<double, double>> points;
    std::vector<double> probability;
    std::vector<Fractions> fractions;
};

inline Landscape landscape(const cmatrix& U, const PortSelection& sel, const std::vector<GaussianPhoton>& photons,
                           const std::vector<std::pair<double, double>>& points) {
    if (photons.size() != 3 || sel.inputs.size() != 3) throw dimension_error("landscapes are defined for three photons");
    if (points.empty()) throw input_error("landscape grid is empty");
    check_photons(photons);
    const BasisVector v = basis_vector(submatrix(U, sel));
    Landscape L;
    L.selection = sel;
    L.photons = photons;
    L.points = points;
    for (const auto& [d1, d2] : points) {
        const RateMatrix R = rate_matrix(photons, {d1, d2});
        L.probability.push_back(probability(R, v));
        L.fractions.push_back(fractions(R));
    }
    return L;
}

inline Landscape landscape(const cmatrix& U, const PortSelection& sel, const std::vector<GaussianPhoton>& photons,
                           const GridSpec& grid) {
    return landscape(U, sel, photons, grid.points());
}

struct DistributionEntry {
    std::vector<int> outputs;
    double p_total = 0.0;
    double p_per = 0.0;
    double p_imm = 0.0;
    double p_det = 0.0;
    std::vector<double> p_block;
};

struct Distribution {
    std::vector<int> inputs;
    std::vector<IrrepBlock> blocks;
    Fractions fractions;
    double unnormalized_total = 0.0;
    std::vector<DistributionEntry> entries;
};

inline std::vector<std::vector<int>> collision_free_outputs(int m, int n) {
    if (n < 1 || n > m) throw input_error("cannot place " + std::to_string(n) + " photons in " + std::to_string(m) +
                                          " modes without collisions");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(n));
    std::iota(cur.begin(), cur.end(), 1);
    for (;;) {
        out.push_back(cur);
        int k = n - 1;
        while (k >= 0 && cur[static_cast<std::size_t>(k)] == m - (n - 1 - k)) --k;
        if (k < 0) break;
        ++cur[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < n; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

// Probabilities over all collision-free outputs, normalized to sum 1; the
// per/imm/det split is taken blockwise before normalization.
inline Distribution output_distribution(const cmatrix& U, const std::vector<int>& inputs,
                                        const std::vector<GaussianPhoton>& photons) {
    if (U.rows() != U.cols()) throw shape_error("output_distribution: network matrix must be square");
    const int m = static_cast<int>(U.rows());
    const int n = static_cast<int>(inputs.size());
    if (n != static_cast<int>(photons.size())) throw dimension_error("one photon per input port is required");
    if (n > m) throw input_error("more photons than modes");
    const RateMatrix R = rate_matrix(photons);
    Distribution D;
    D.inputs = inputs;
    D.blocks = R.blocks;
    D.fractions = fractions(R);
    const auto last = R.blocks.size() - 1;
    for (const auto& outs : collision_free_outputs(m, n)) {
        const BasisVector v = basis_vector(submatrix(U, PortSelection{m, inputs, outs}));
        DistributionEntry e;
        e.outputs = outs;
        for (std::size_t k = 0; k < R.blocks.size(); ++k) {
            const double p = partition_probability(R.blocks[k].partition, R, v);
            e.p_block.push_back(p);
            e.p_total += p;
            if (k == 0) {
                e.p_per = p;
            } else if (k == last) {
                e.p_det = p;
            } else {
                e.p_imm += p;
            }
        }
        D.unnormalized_total += e.p_total;
        D.entries.push_back(std::move(e));
    }
    if (!(D.unnormalized_total > 0.0)) throw numeric_error("output distribution has zero total probability");
    const double s = D.unnormalized_total;
    for (auto& e : D.entries) {
        e.p_total /= s;
        e.p_per /= s;
        e.p_imm /= s;
        e.p_det /= s;
        for (double& p : e.p_block) p /= s;
    }
    return D;
}

inline Distribution output_distribution(const cmatrix& U, const std::vector<int>& inputs,
                                        const std::vector<GaussianPhoton>& photons, const std::vector<double>& deltas) {
    return output_distribution(U, inputs, with_relative_delays(photons, deltas));
}

} // namespace photonic
