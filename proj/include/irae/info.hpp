#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace irae {

/// Finite joint distribution P(x, z), stored row-major as [|X|, |Z|].
class DiscreteJoint {
public:
    // Throws unless entries are >= 0 and sum to 1 within 1e-12.
    DiscreteJoint(std::size_t x_size, std::size_t z_size, std::vector<double> table);

    std::size_t x_size() const { return x_size_; }
    std::size_t z_size() const { return z_size_; }
    double operator()(std::size_t x, std::size_t z) const { return table_[x * z_size_ + z]; }
    std::span<const double> table() const { return table_; }

    std::vector<double> marginal_x() const;
    std::vector<double> marginal_z() const;
    DiscreteJoint transposed() const;

private:
    std::size_t x_size_;
    std::size_t z_size_;
    std::vector<double> table_;
};

/// Total deterministic map f: {0..n-1} -> {0..m-1}.
struct FiniteMap {
    std::vector<std::size_t> table;
    std::size_t codomain_size;

    FiniteMap(std::vector<std::size_t> table, std::size_t codomain_size);
    static FiniteMap identity(std::size_t n);

    std::size_t domain_size() const { return table.size(); }
    std::size_t operator()(std::size_t x) const { return table[x]; }
    // No two points of positive mass share an image.
    bool injective_on(std::span<const double> px) const;
    FiniteMap then(const FiniteMap& g) const;
};

// Shannon entropy in bits, 0 log 0 = 0.
double entropy_bits(std::span<const double> p);

// Sum of P(x,z) log2(P(x,z) / (P(x) P(z))) over positive entries.
double mutual_information(const DiscreteJoint& joint);

// P(x, z) = px(x) [f(x) = z].
DiscreteJoint push_forward(std::span<const double> px, const FiniteMap& f);

struct InformationLossReport {
    bool injective = false;
    double entropy_x = 0.0;
    double mutual_information = 0.0;
    double loss = 0.0;            // H(X) - I(X; f(X))
    bool posterior_certain = false;  // P(x|z) = 1 on every reachable (x, z)
};

InformationLossReport information_loss_check(std::span<const double> px, const FiniteMap& f);

// All codomain^domain maps in lexicographic order of their tables.
std::vector<FiniteMap> all_maps(std::size_t domain_size, std::size_t codomain_size);

}  // namespace irae
