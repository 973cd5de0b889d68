#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace irae {

// Row-major square matrix factorization PA = LU with partial pivoting.
struct LuDecomposition {
    std::size_t n = 0;
    std::vector<double> lu;  // unit-lower L below the diagonal, U on and above
    std::vector<std::size_t> pivots;
    int sign = 1;
    bool singular = false;  // an exactly zero pivot was met

    double determinant() const;
    double log_abs_determinant() const;
    std::vector<double> solve(std::span<const double> rhs) const;
    std::vector<double> inverse() const;
};

LuDecomposition lu_decompose(std::span<const double> matrix, std::size_t n);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of R's diagonal folded into Q.
std::vector<double> random_orthogonal(std::size_t n, std::mt19937_64& rng);

}  // namespace irae
