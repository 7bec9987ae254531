#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "bnsfuzzy/ml/model.hpp"

namespace bnsfuzzy::ml {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t tensor = 0;  // index into params() of the worst entry
    Index row = 0;
    Index col = 0;
};

/// Compares analytic gradients of the batch loss against central differences
/// for every entry of every parameter tensor, at the freshly initialized
/// network. Batch-norm networks are checked in training mode (batch statistics).
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
template <class Net>
GradCheckResult grad_check_net(Net& net, const Matrix& x, std::span<const int> y, double eps) {
    const std::vector<double> w(y.size(), 1.0);
    std::vector<Matrix> grads;
    net.loss(x, y, w, &grads, Mode::train);
    GradCheckResult res;
    auto ps = net.params();
    for (std::size_t t = 0; t < ps.size(); ++t) {
        Matrix& p = *ps[t];
        for (Index j = 0; j < p.cols(); ++j) {
            for (Index i = 0; i < p.rows(); ++i) {
                const double orig = p(i, j);
                p(i, j) = orig + eps;
                const double up = net.loss(x, y, w, nullptr, Mode::train);
                p(i, j) = orig - eps;
                const double down = net.loss(x, y, w, nullptr, Mode::train);
                p(i, j) = orig;
                const double numeric = (up - down) / (2.0 * eps);
                const double analytic = grads[t](i, j);
                const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
                const double rel = std::abs(analytic - numeric) / denom;
                if (rel > res.max_rel_error) {
                    res = {rel, t, i, j};
                }
            }
        }
    }
    return res;
}

/// Worst relative gradient error for a network kind (mlp, lstm, lstm_bn).
inline double grad_check(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y,
                         double eps) {
    spec.validate();
    Params net = detail::init_net(spec, x.cols());
    return std::visit(
        [&](auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Mlp> || std::is_same_v<T, Lstm>) {
                return grad_check_net(n, x, y, eps).max_rel_error;
            } else {
                return 0.0;
            }
        },
        net);
}

}  // namespace bnsfuzzy::ml
