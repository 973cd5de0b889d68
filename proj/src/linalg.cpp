#include "irae/linalg.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <utility>

#include "irae/error.hpp"

namespace irae {

LuDecomposition lu_decompose(std::span<const double> matrix, std::size_t n)
{
    if (matrix.size() != n * n) throw ShapeError("lu_decompose: expected a square matrix");
    LuDecomposition d;
    d.n = n;
    d.lu.assign(matrix.begin(), matrix.end());
    d.pivots.resize(n);
    auto& a = d.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i * n + k]) > best) {
                best = std::abs(a[i * n + k]);
                p = i;
            }
        }
        d.pivots[k] = p;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
            d.sign = -d.sign;
        }
        const double pivot = a[k * n + k];
        if (pivot == 0.0) {
            d.singular = true;
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] / pivot;
            a[i * n + k] = f;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return d;
}

double LuDecomposition::determinant() const
{
    double det = sign;
    for (std::size_t i = 0; i < n; ++i) det *= lu[i * n + i];
    return det;
}

double LuDecomposition::log_abs_determinant() const
{
    if (singular) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::log(std::abs(lu[i * n + i]));
    return acc;
}

std::vector<double> LuDecomposition::solve(std::span<const double> rhs) const
{
    if (singular) throw SingularWeightError("cannot solve with a singular matrix");
    if (rhs.size() != n) throw ShapeError("LU solve: right-hand side has wrong length");
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[pivots[k]]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu[i * n + j] * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu[i * n + j] * x[j];
        x[i] /= lu[i * n + i];
    }
    return x;
}

std::vector<double> LuDecomposition::inverse() const
{
    std::vector<double> inv(n * n);
    std::vector<double> e(n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        e.assign(n, 0.0);
        e[col] = 1.0;
        auto x = solve(e);
        for (std::size_t row = 0; row < n; ++row) inv[row * n + col] = x[row];
    }
    return inv;
}

std::vector<double> random_orthogonal(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < n; ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = q(i, j);
    return out;
}

}  // namespace irae
