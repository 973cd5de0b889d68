#include "irae/info.hpp"

#include <cmath>
#include <string>

#include "irae/error.hpp"

namespace irae {

namespace {

constexpr double kMassTolerance = 1e-12;

void check_distribution(std::span<const double> p, const char* what)
{
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw Error(std::string(what) + " has a negative or NaN entry");
        total += v;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw Error(std::string(what) + " must sum to 1, sums to " + std::to_string(total));
    }
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::size_t x_size, std::size_t z_size, std::vector<double> table)
    : x_size_(x_size), z_size_(z_size), table_(std::move(table))
{
    if (x_size == 0 || z_size == 0) throw Error("joint distribution needs non-empty supports");
    if (table_.size() != x_size * z_size) throw ShapeError("joint table size does not match |X| x |Z|");
    check_distribution(table_, "joint distribution");
}

std::vector<double> DiscreteJoint::marginal_x() const
{
    std::vector<double> m(x_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z) m[x] += (*this)(x, z);
    return m;
}

std::vector<double> DiscreteJoint::marginal_z() const
{
    std::vector<double> m(z_size_, 0.0);
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z) m[z] += (*this)(x, z);
    return m;
}

DiscreteJoint DiscreteJoint::transposed() const
{
    std::vector<double> t(table_.size());
    for (std::size_t x = 0; x < x_size_; ++x)
        for (std::size_t z = 0; z < z_size_; ++z) t[z * x_size_ + x] = (*this)(x, z);
    return DiscreteJoint(z_size_, x_size_, std::move(t));
}

FiniteMap::FiniteMap(std::vector<std::size_t> t, std::size_t m) : table(std::move(t)), codomain_size(m)
{
    for (auto z : table) {
        if (z >= codomain_size) throw Error("finite map value outside its codomain");
    }
}

FiniteMap FiniteMap::identity(std::size_t n)
{
    std::vector<std::size_t> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = i;
    return FiniteMap(std::move(t), n);
}

bool FiniteMap::injective_on(std::span<const double> px) const
{
    if (px.size() != table.size()) throw ShapeError("distribution and map domains differ");
    std::vector<bool> hit(codomain_size, false);
    for (std::size_t x = 0; x < table.size(); ++x) {
        if (px[x] <= 0.0) continue;
        if (hit[table[x]]) return false;
        hit[table[x]] = true;
    }
    return true;
}

FiniteMap FiniteMap::then(const FiniteMap& g) const
{
    if (g.domain_size() != codomain_size) throw ShapeError("map composition domains differ");
    std::vector<std::size_t> t(table.size());
    for (std::size_t x = 0; x < table.size(); ++x) t[x] = g(table[x]);
    return FiniteMap(std::move(t), g.codomain_size);
}

double entropy_bits(std::span<const double> p)
{
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

double mutual_information(const DiscreteJoint& joint)
{
    const auto px = joint.marginal_x();
    const auto pz = joint.marginal_z();
    double mi = 0.0;
    for (std::size_t x = 0; x < joint.x_size(); ++x)
        for (std::size_t z = 0; z < joint.z_size(); ++z) {
            const double p = joint(x, z);
            if (p > 0.0) mi += p * std::log2(p / (px[x] * pz[z]));
        }
    // Rounding can leave a tiny negative value for independent variables.
    return mi < 0.0 && mi > -kMassTolerance ? 0.0 : mi;
}

DiscreteJoint push_forward(std::span<const double> px, const FiniteMap& f)
{
    check_distribution(px, "input distribution");
    if (px.size() != f.domain_size()) throw ShapeError("distribution and map domains differ");
    std::vector<double> table(f.domain_size() * f.codomain_size, 0.0);
    for (std::size_t x = 0; x < f.domain_size(); ++x) table[x * f.codomain_size + f(x)] = px[x];
    return DiscreteJoint(f.domain_size(), f.codomain_size, std::move(table));
}

InformationLossReport information_loss_check(std::span<const double> px, const FiniteMap& f)
{
    const auto joint = push_forward(px, f);
    InformationLossReport r;
    r.injective = f.injective_on(px);
    r.entropy_x = entropy_bits(px);
    r.mutual_information = mutual_information(joint);
    r.loss = r.entropy_x - r.mutual_information;
    if (r.loss < 0.0 && r.loss > -kMassTolerance) r.loss = 0.0;
    const auto pz = joint.marginal_z();
    r.posterior_certain = true;
    for (std::size_t x = 0; x < joint.x_size(); ++x)
        for (std::size_t z = 0; z < joint.z_size(); ++z) {
            const double p = joint(x, z);
            if (p > 0.0 && std::abs(p / pz[z] - 1.0) > kMassTolerance) r.posterior_certain = false;
        }
    return r;
}

std::vector<FiniteMap> all_maps(std::size_t domain_size, std::size_t codomain_size)
{
    if (codomain_size == 0) throw Error("codomain must be non-empty");
    std::vector<FiniteMap> out;
    std::vector<std::size_t> t(domain_size, 0);
    while (true) {
        out.emplace_back(t, codomain_size);
        std::size_t i = domain_size;
        while (i > 0) {
            --i;
            if (++t[i] < codomain_size) break;
            t[i] = 0;
            if (i == 0) return out;
        }
        if (domain_size == 0) return out;
    }
}

}  // namespace irae
