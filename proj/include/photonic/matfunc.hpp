#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "symgroup.hpp"
#include "types.hpp"

namespace photonic {

inline constexpr int max_permanent_size = 20;

inline void require_square(const cmatrix& M, const char* what) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw shape_error(std::string(what) + ": expected a non-empty square matrix, got " +
                          std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

namespace detail {

inline complex permanent_naive(const cmatrix& M) {
    const auto n = M.rows();
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    complex total = 0.0;
    do {
        complex prod = 1.0;
        for (index_t i = 0; i < n; ++i) prod *= M(i, p[static_cast<std::size_t>(i)]);
        total += prod;
    } while (std::next_permutation(p.begin(), p.end()));
    return total;
}

// Ryser inclusion-exclusion, subsets visited in Gray-code order so each step
// adds or removes a single column from the running row sums.
inline complex permanent_ryser(const cmatrix& M) {
    const auto n = static_cast<int>(M.rows());
    cvector row_sums = cvector::Zero(n);
    complex total = 0.0;
    std::uint32_t gray = 0;
    const std::uint32_t count = 1u << n;
    for (std::uint32_t k = 1; k < count; ++k) {
        const int j = std::countr_zero(k);
        const std::uint32_t bit = 1u << j;
        gray ^= bit;
        if (gray & bit) {
            row_sums += M.col(j);
        } else {
            row_sums -= M.col(j);
        }
        complex prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= row_sums(i);
        if (std::popcount(gray) % 2 == 1) {
            total -= prod;
        } else {
            total += prod;
        }
    }
    return (n % 2 == 1) ? -total : total;
}

} // namespace detail

inline complex permanent(const cmatrix& M) {
    require_square(M, "permanent");
    if (M.rows() > max_permanent_size)
        throw size_limit_error("permanent: size " + std::to_string(M.rows()) + " exceeds " +
                               std::to_string(max_permanent_size));
    if (M.rows() <= 4) return detail::permanent_naive(M);
    return detail::permanent_ryser(M);
}

inline complex determinant(const cmatrix& M) {
    require_square(M, "determinant");
    return M.partialPivLu().determinant();
}

inline complex immanant(const Partition& lambda, const cmatrix& M) {
    require_square(M, "immanant");
    const auto n = static_cast<int>(M.rows());
    if (lambda.n() != n)
        throw dimension_error("immanant: partition " + lambda.str() + " does not match a " + std::to_string(n) +
                              "x" + std::to_string(n) + " matrix");
    check_degree(n, max_symmetric_degree, "immanant");
    std::map<Partition, long long> chi;
    for (const auto& c : partitions_of(n)) chi[c] = character(lambda, c);
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    complex total = 0.0;
    do {
        const long long x = chi.at(Permutation::from_zero_based(p).cycle_type());
        if (x == 0) continue;
        complex prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= M(i, p[static_cast<std::size_t>(i)]);
        total += static_cast<double>(x) * prod;
    } while (std::next_permutation(p.begin(), p.end()));
    return total;
}

// Row i of the result is row sigma(i) of M.
inline cmatrix row_permuted(const cmatrix& M, const Permutation& sigma) {
    if (sigma.n() != M.rows())
        throw dimension_error("row_permuted: permutation of degree " + std::to_string(sigma.n()) + " on " +
                              std::to_string(M.rows()) + " rows");
    cmatrix out(M.rows(), M.cols());
    for (index_t i = 0; i < M.rows(); ++i) out.row(i) = M.row(sigma.at(static_cast<int>(i)));
    return out;
}

} // namespace photonic
