#include "irae/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace irae {

template <typename T>
Tensor<T> finite_diff_grad(const std::function<Tensor<T>(const Tensor<T>&)>& f, const Tensor<T>& x, double h)
{
    if (!(h > 0.0)) throw Error("finite_diff_grad: step must be positive");
    NoGradGuard no_grad;
    std::vector<T> base(x.data().begin(), x.data().end());
    std::vector<T> grad(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        auto probe = base;
        probe[i] = static_cast<T>(static_cast<double>(base[i]) + h);
        const double up = static_cast<double>(f(Tensor<T>(x.shape(), probe)).item());
        probe[i] = static_cast<T>(static_cast<double>(base[i]) - h);
        const double down = static_cast<double>(f(Tensor<T>(x.shape(), probe)).item());
        grad[i] = static_cast<T>((up - down) / (2.0 * h));
    }
    return Tensor<T>(x.shape(), std::move(grad));
}

GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss, std::vector<Tensor<double>> wrt, double h)
{
    for (auto& t : wrt) {
        if (!t.is_leaf()) throw Error("check_gradients: can only perturb leaf tensors");
        t.zero_grad();
    }
    loss().backward();
    std::vector<std::vector<double>> analytic;
    for (auto& t : wrt) {
        if (t.has_grad()) {
            analytic.emplace_back(t.grad().begin(), t.grad().end());
        } else {
            analytic.emplace_back(t.numel(), 0.0);
        }
        t.zero_grad();
    }

    GradCheckResult result;
    NoGradGuard no_grad;
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        auto values = wrt[k].mutable_data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + h;
            const double up = loss().item();
            values[i] = original - h;
            const double down = loss().item();
            values[i] = original;
            const double fd = (up - down) / (2.0 * h);
            const double err = std::abs(analytic[k][i] - fd);
            result.max_abs_error = std::max(result.max_abs_error, err);
            result.max_relative_error = std::max(result.max_relative_error, err / (std::abs(fd) + 1e-8));
            ++result.checked;
        }
    }
    return result;
}

template Tensor<float> finite_diff_grad(const std::function<Tensor<float>(const Tensor<float>&)>&, const Tensor<float>&,
                                        double);
template Tensor<double> finite_diff_grad(const std::function<Tensor<double>(const Tensor<double>&)>&,
                                         const Tensor<double>&, double);

}  // namespace irae
