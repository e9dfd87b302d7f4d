#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace photonic;

namespace {

std::vector<GaussianPhoton> identical(int n) {
    return std::vector<GaussianPhoton>(static_cast<std::size_t>(n), GaussianPhoton::from_wavelength(789.0, 2.9));
}

std::vector<GaussianPhoton> far_apart(int n) {
    std::vector<GaussianPhoton> out = identical(n);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i)].delayed_to(50.0 / out[0].sigma * i);
    return out;
}

cmatrix beam_splitter(double eta) {
    const double c = std::sqrt(eta);
    const double s = std::sqrt(1.0 - eta);
    cmatrix B(2, 2);
    B << c, complex(0, s), complex(0, s), c;
    return B;
}

double max_off_block(const RateMatrix& R) {
    double off = 0.0;
    for (index_t i = 0; i < R.matrix.rows(); ++i)
        for (index_t j = 0; j < R.matrix.cols(); ++j) {
            bool inside = false;
            for (const auto& b : R.blocks)
                inside = inside || (i >= b.offset && i < b.offset + b.size && j >= b.offset && j < b.offset + b.size);
            if (!inside) off = std::max(off, std::abs(R.matrix(i, j)));
        }
    return off;
}

} // namespace

TEST(RateMatrix, TwoPhotonBracket) {
    const RateMatrix R0 = rate_matrix(identical(2));
    EXPECT_NEAR(std::abs(R0.matrix(0, 0) - 1.0), 0.0, 1e-15);
    EXPECT_LT(std::abs(R0.matrix(1, 1)), 1e-15);

    std::mt19937_64 rng(31);
    for (int k = 0; k < 20; ++k) {
        const auto ph = testsupport::random_photons(rng, 2, 200.0);
        const RateMatrix R = rate_matrix(ph);
        const double w = std::norm(overlap_amplitude(ph[0], ph[1]));
        EXPECT_NEAR(R.matrix(0, 0).real(), (1 + w) / 2, 1e-14);
        EXPECT_NEAR(R.matrix(1, 1).real(), (1 - w) / 2, 1e-14);
        EXPECT_LT(std::abs(R.matrix(0, 1)), 1e-15);
        const cmatrix T = testsupport::random_unitary(rng, 4).topLeftCorner(2, 2);
        const complex per = T(0, 0) * T(1, 1) + T(0, 1) * T(1, 0);
        const complex det = T(0, 0) * T(1, 1) - T(0, 1) * T(1, 0);
        const double bracket = (std::norm(per) + std::norm(det)) / 2 + w * (std::norm(per) - std::norm(det)) / 2;
        EXPECT_NEAR(coincidence_probability(T, ph), bracket, 1e-15);
    }
}

TEST(RateMatrix, IndistinguishableAndClassicalLimits) {
    for (int n = 2; n <= 5; ++n) {
        const RateMatrix R = rate_matrix(identical(n));
        const auto N = R.matrix.rows();
        cmatrix expect = cmatrix::Zero(N, N);
        expect(0, 0) = 1.0;
        EXPECT_LT((R.matrix - expect).cwiseAbs().maxCoeff(), 1e-12) << n;
        const Fractions f = fractions(R);
        EXPECT_NEAR(f.per, 1.0, 1e-12);
        EXPECT_NEAR(f.det, 0.0, 1e-12);

        const Fractions c = fractions(rate_matrix(far_apart(n)));
        const double inv = 1.0 / static_cast<double>(factorial(n));
        EXPECT_NEAR(c.per, inv, 1e-12);
        EXPECT_NEAR(c.det, inv, 1e-12);
        EXPECT_NEAR(c.imm, 1.0 - 2.0 * inv, 1e-12);
    }
    EXPECT_THROW(rate_matrix(identical(1)), size_limit_error);
    EXPECT_THROW(rate_matrix(identical(7)), size_limit_error);
}

TEST(RateMatrix, HermitianPsdBlockDiagonal) {
    std::mt19937_64 rng(32);
    for (int n = 2; n <= 5; ++n)
        for (int k = 0; k < 3; ++k) {
            const RateMatrix R = rate_matrix(testsupport::random_photons(rng, n, 150.0));
            EXPECT_LT((R.matrix - R.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
            EXPECT_LT(max_off_block(R), 1e-10);
            Eigen::SelfAdjointEigenSolver<cmatrix> es(R.matrix);
            EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
            const Fractions f = fractions(R);
            const double inv = 1.0 / static_cast<double>(factorial(n));
            EXPECT_GE(f.per, inv - 1e-12);
            EXPECT_LE(f.per, 1.0 + 1e-12);
            EXPECT_GE(f.det, -1e-12);
            EXPECT_LE(f.det, inv + 1e-12);
        }
}

TEST(RateMatrix, EqualsExplicitAdapterConjugation) {
    std::mt19937_64 rng(33);
    for (int n = 2; n <= 4; ++n) {
        const auto ph = testsupport::random_photons(rng, n, 150.0);
        const auto perms = enumerate_permutations(n);
        const auto N = static_cast<index_t>(perms.size());
        cmatrix M = cmatrix::Zero(N, N);
        for (const auto& s : perms) M += permutation_weight(s, ph) * regular_representation(s).cast<complex>();
        const rmatrix Q = symmetry_adapter(n);

        // coefficient matrix of the basis vector in terms of u_mu = prod_i T(i, mu(i))
        const auto& basis = symmetric_basis(n);
        rmatrix K = rmatrix::Zero(N, N);
        for (const auto& b : basis.blocks())
            for (std::size_t r = 0; r < b.row_orders.size(); ++r)
                for (index_t mu = 0; mu < N; ++mu)
                    K(b.layout.offset + static_cast<index_t>(r), mu) = static_cast<double>(
                        character(b.layout.partition, perms[static_cast<std::size_t>(mu)] * b.row_orders[r]));
        const cmatrix T = testsupport::random_matrix(rng, n);
        cvector u(N);
        for (index_t mu = 0; mu < N; ++mu) {
            complex x = 1.0;
            for (int i = 0; i < n; ++i) x *= T(i, perms[static_cast<std::size_t>(mu)].at(i));
            u(mu) = x;
        }
        const BasisVector v = basis_vector(T);
        EXPECT_LT((v.entries - K.cast<complex>() * u).cwiseAbs().maxCoeff(), 1e-10);

        const rmatrix C = K * Q;
        const cmatrix Ci = C.inverse().cast<complex>();
        const cmatrix expect = Ci.transpose() * (Q.transpose().cast<complex>() * M * Q.cast<complex>()) * Ci;
        const RateMatrix R = rate_matrix(ph);
        EXPECT_LT((R.matrix - expect).cwiseAbs().maxCoeff(), 1e-10) << n;
        EXPECT_NEAR(probability(R, v), u.dot(M * u).real(), 1e-10 * (1.0 + u.squaredNorm()));
    }
}

TEST(BasisVector, ThreePhotonLayout) {
    std::mt19937_64 rng(34);
    const cmatrix T = testsupport::random_matrix(rng, 3);
    const Partition mixed({2, 1});
    const BasisVector v = basis_vector(T);
    ASSERT_EQ(v.entries.size(), 6);
    EXPECT_LT(std::abs(v.entries(0) - permanent(T)), 1e-12);
    EXPECT_LT(std::abs(v.entries(1) - immanant(mixed, T)), 1e-12);
    EXPECT_LT(std::abs(v.entries(2) - immanant(mixed, row_permuted(T, Permutation{1, 3, 2}))), 1e-12);
    EXPECT_LT(std::abs(v.entries(3) - immanant(mixed, row_permuted(T, Permutation{2, 1, 3}))), 1e-12);
    EXPECT_LT(std::abs(v.entries(4) - immanant(mixed, row_permuted(T, Permutation{3, 1, 2}))), 1e-12);
    EXPECT_LT(std::abs(v.entries(5) - determinant(T)), 1e-12);

    const BasisVector id = basis_vector(cmatrix::Identity(3, 3));
    EXPECT_NEAR(id.entries(0).real(), 1.0, 1e-15);
    EXPECT_NEAR(id.entries(1).real(), 2.0, 1e-15);
    EXPECT_NEAR(id.entries(5).real(), 1.0, 1e-15);

    const BasisVector two = basis_vector(beam_splitter(0.5));
    EXPECT_LT(std::abs(two.entries(0)), 1e-15);
    EXPECT_THROW(basis_vector(cmatrix::Zero(2, 3)), shape_error);
}

TEST(RateMatrix, ThreePhotonPrintedForm) {
    const double s6 = 1.0 / std::sqrt(6.0);
    const double s3 = 1.0 / std::sqrt(3.0);
    const double t3 = 1.0 / (2.0 * std::sqrt(3.0));
    rmatrix P(6, 6), S(6, 6);
    P << s6, s6, s6, s6, s6, s6, s6, -s6, -s6, s6, s6, -s6, s3, -t3, s3, -t3, -t3, -t3, 0, -0.5, 0, -0.5, 0.5, 0.5, 0,
        0.5, 0, -0.5, 0.5, -0.5, -s3, -t3, s3, t3, t3, -t3;
    const double a = 1.0 / 6.0;
    const double b = 1.0 / 3.0;
    S << a, b, 0, 0, 0, a, a, 0, b, 0, 0, -a, a, 0, 0, b, 0, -a, a, -b, 0, 0, -b, a, a, 0, 0, 0, b, a, a, 0, -b, -b, 0,
        -a;
    const double h = 0.5;
    const double r = std::sqrt(3.0) / 2.0;
    rmatrix rho12 = Eigen::Matrix<double, 6, 1>(1, -1, 1, -1, 1, -1).asDiagonal();
    rmatrix rho23(6, 6), rho13(6, 6), rho123(6, 6);
    rho23 << 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, -h, -r, 0, 0, 0, 0, -r, h, 0, 0, 0, 0, 0, 0, -h, -r, 0, 0, 0, 0,
        -r, h;
    rho13 << 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, -h, r, 0, 0, 0, 0, r, h, 0, 0, 0, 0, 0, 0, -h, r, 0, 0, 0, 0, r,
        h;
    rho123 << 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, -h, -r, 0, 0, 0, 0, r, -h, 0, 0, 0, 0, 0, 0, -h, -r, 0, 0, 0, 0,
        r, -h;
    const rmatrix rho132 = rho123.transpose();

    std::mt19937_64 rng(35);
    for (int k = 0; k < 10; ++k) {
        const auto ph = testsupport::random_photons(rng, 3, 200.0);
        const cmatrix A = overlap_matrix(ph);
        const complex w12 = std::norm(A(0, 1));
        const complex w23 = std::norm(A(1, 2));
        const complex w13 = std::norm(A(0, 2));
        const complex c = permutation_weight(Permutation{2, 3, 1}, A);
        const cmatrix X = cmatrix::Identity(6, 6) + w12 * rho12.cast<complex>() + w23 * rho23.cast<complex>() +
                          w13 * rho13.cast<complex>() + std::conj(c) * rho132.cast<complex>() +
                          c * rho123.cast<complex>();
        const cmatrix PS = (P * S).cast<complex>();
        const cmatrix printed = PS.adjoint() * X * PS;
        EXPECT_LT((rate_matrix(ph).matrix - printed).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Probability, SimpleNetworks) {
    EXPECT_NEAR(coincidence_probability(beam_splitter(0.5), identical(2)), 0.0, 1e-15);
    EXPECT_NEAR(coincidence_probability(beam_splitter(2.0 / 3.0), identical(2)), 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(coincidence_probability(beam_splitter(0.5), far_apart(2)), 0.5, 1e-15);
    std::mt19937_64 rng(36);
    const cmatrix T = testsupport::random_unitary(rng, 5).topLeftCorner(3, 3);
    EXPECT_NEAR(coincidence_probability(T, identical(3)), std::norm(permanent(T)), 1e-14);
    EXPECT_THROW(coincidence_probability(T, identical(2)), dimension_error);
}

TEST(Probability, DualPathOracle) {
    std::mt19937_64 rng(37);
    for (int n = 2; n <= 4; ++n) {
        const int draws = n == 4 ? 20 : 100;
        for (int k = 0; k < draws; ++k) {
            const cmatrix T = testsupport::random_unitary(rng, n + 2).topLeftCorner(n, n);
            const auto ph = testsupport::random_photons(rng, n, 200.0);
            EXPECT_NEAR(coincidence_probability(T, ph), coincidence_oracle(T, ph), 1e-9);
        }
    }
    EXPECT_THROW(coincidence_oracle(cmatrix::Identity(5, 5), identical(5)), size_limit_error);
}

TEST(Probability, ExpandedThreePhotonFormula) {
    std::mt19937_64 rng(38);
    for (int k = 0; k < 50; ++k) {
        const cmatrix T = testsupport::random_unitary(rng, 5).topLeftCorner(3, 3);
        const auto ph = testsupport::random_photons(rng, 3, 200.0);
        EXPECT_NEAR(coincidence_probability(T, ph), testsupport::expanded_three_photon(T, ph), 1e-9);
    }
}

TEST(Probability, ClassicalLimitIsPermanentOfIntensities) {
    std::mt19937_64 rng(39);
    for (int n = 3; n <= 4; ++n)
        for (int k = 0; k < 10; ++k) {
            const cmatrix T = testsupport::random_unitary(rng, 6).topLeftCorner(n, n);
            const cmatrix I = T.cwiseAbs2().cast<complex>();
            EXPECT_NEAR(coincidence_probability(T, far_apart(n)), permanent(I).real(), 1e-9);
            EXPECT_NEAR(coincidence_oracle(T, far_apart(n)), testsupport::naive_permanent(I).real(), 1e-9);
        }
}

TEST(Probability, PartitionAdditivity) {
    std::mt19937_64 rng(40);
    for (int n = 3; n <= 5; ++n) {
        const cmatrix T = testsupport::random_unitary(rng, 7).topLeftCorner(n, n);
        const RateMatrix R = rate_matrix(testsupport::random_photons(rng, n, 100.0));
        const BasisVector v = basis_vector(T);
        double sum = 0.0;
        for (const auto& b : R.blocks) {
            const double p = partition_probability(b.partition, R, v);
            EXPECT_GE(p, -1e-14);
            sum += p;
        }
        EXPECT_NEAR(sum, probability(R, v), 1e-12);
        const double per_part = partition_probability(Partition({n}), R, v);
        EXPECT_NEAR(per_part, fractions(R).per * std::norm(permanent(T)), 1e-12);
    }
    const RateMatrix R = rate_matrix(identical(3));
    EXPECT_THROW(partition_probability(Partition({2, 2}), R, basis_vector(cmatrix::Identity(3, 3))), input_error);
}

TEST(Fractions, IntermediateDelaysLieBetweenExtremes) {
    const std::vector<GaussianPhoton> base = {GaussianPhoton::from_wavelength(789.35, 2.85),
                                              GaussianPhoton::from_wavelength(789.52, 2.79),
                                              GaussianPhoton::from_wavelength(789.41, 2.72)};
    const Fractions f = fractions(rate_matrix(base, {-300.0, -170.0}));
    EXPECT_GT(f.per, 1.0 / 6.0);
    EXPECT_LT(f.per, 1.0);
    EXPECT_GT(f.det, 0.0);
    EXPECT_LT(f.det, 1.0 / 6.0);
    const Fractions z = fractions(rate_matrix(base, {0.0, 0.0}));
    for (double d1 = -600; d1 <= 600; d1 += 100)
        for (double d2 = -600; d2 <= 600; d2 += 100) EXPECT_LE(fractions(rate_matrix(base, {d1, d2})).per, z.per + 1e-15);
}

TEST(Submatrix, Selection) {
    std::mt19937_64 rng(41);
    const cmatrix U = testsupport::random_unitary(rng, 5);
    const cmatrix T = submatrix(U, PortSelection{5, {1, 2, 4}, {3, 4, 5}});
    EXPECT_EQ(T(0, 0), U(2, 0));
    EXPECT_EQ(T(2, 1), U(4, 1));
    EXPECT_EQ(T(1, 2), U(3, 3));
    EXPECT_TRUE(submatrix(cmatrix::Identity(4, 4), PortSelection{4, {1, 3}, {1, 3}}).isIdentity());
    EXPECT_THROW(submatrix(U, PortSelection{5, {1, 2, 6}, {1, 2, 3}}), input_error);
    EXPECT_THROW(submatrix(U, PortSelection{5, {2, 1, 3}, {1, 2, 3}}), input_error);
    EXPECT_THROW(submatrix(U, PortSelection{4, {1, 2}, {1, 2}}), dimension_error);
}

TEST(Landscape, GridAndPlateau) {
    std::mt19937_64 rng(42);
    const cmatrix U = testsupport::random_unitary(rng, 5);
    const PortSelection sel{5, {1, 2, 4}, {1, 3, 5}};
    const auto ph = identical(3);
    GridSpec g;
    g.width = 5;
    g.height = 3;
    const Landscape L = landscape(U, sel, ph, g);
    ASSERT_EQ(L.probability.size(), 15u);
    EXPECT_DOUBLE_EQ(L.points.front().first, -1000.0);
    EXPECT_DOUBLE_EQ(L.points.back().second, 1000.0);
    for (double p : L.probability) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    const cmatrix T = submatrix(U, sel);
    const double plateau = permanent(T.cwiseAbs2().cast<complex>()).real();
    const Landscape far = landscape(U, sel, ph, std::vector<std::pair<double, double>>{{4000.0, -4000.0}});
    EXPECT_NEAR(far.probability[0], plateau, 1e-12);
    GridSpec one{0.0, 0.0, 1, 0.0, 0.0, 1};
    EXPECT_NEAR(landscape(U, sel, ph, one).probability[0], std::norm(permanent(T)), 1e-14);
    EXPECT_THROW(landscape(U, sel, ph, std::vector<std::pair<double, double>>{}), input_error);
    GridSpec empty;
    empty.width = 0;
    EXPECT_THROW(landscape(U, sel, ph, empty), input_error);
}

TEST(Distribution, NormalizationAndSize) {
    std::mt19937_64 rng(43);
    const cmatrix U = testsupport::random_unitary(rng, 5);
    const auto D = output_distribution(U, {1, 2, 4}, testsupport::random_photons(rng, 3, 0.0), {-300.0, -170.0});
    EXPECT_EQ(D.entries.size(), 10u);
    double total = 0.0;
    for (const auto& e : D.entries) {
        total += e.p_total;
        EXPECT_NEAR(e.p_per + e.p_imm + e.p_det, e.p_total, 1e-14);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(D.entries.front().outputs, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(D.entries.back().outputs, (std::vector<int>{3, 4, 5}));

    const auto same = output_distribution(U, {1, 2, 4}, identical(3));
    double per_total = 0.0;
    for (const auto& e : same.entries) {
        EXPECT_NEAR(e.p_det, 0.0, 1e-14);
        per_total += e.p_per;
    }
    EXPECT_NEAR(per_total, 1.0, 1e-12);
    EXPECT_EQ(collision_free_outputs(9, 5).size(), 126u);
    EXPECT_THROW(output_distribution(U, {1, 2, 3, 4, 5, 6}, identical(6)), input_error);
}
