#pragma once

#include <span>
#include <vector>

#include "bnsfuzzy/ml/common.hpp"

namespace bnsfuzzy::ml {

/// Logistic regression trained by full-batch gradient descent with L2 penalty.
struct LogisticModel {
    Vector weights;
    double bias = 0.0;

    double logit(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        return row.dot(weights.transpose()) + bias;
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        std::vector<double> out(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i) {
            out[static_cast<std::size_t>(i)] = sigmoid(logit(x.row(i)));
        }
        return out;
    }

    /// Mean weighted cross-entropy plus (l2/2)|w|^2.
    double loss(const Matrix& x, std::span<const int> y, std::span<const double> w,
                double l2) const {
        double acc = 0.0;
        double wsum = 0.0;
        for (Index i = 0; i < x.rows(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            acc += w[k] * bce_with_logit(logit(x.row(i)), y[k]);
            wsum += w[k];
        }
        return acc / wsum + 0.5 * l2 * weights.squaredNorm();
    }

    static LogisticModel fit(const Matrix& x, std::span<const int> y, double step, int epochs,
                             double l2, bool balanced, std::vector<double>& log) {
        LogisticModel m;
        m.weights = Vector::Zero(x.cols());
        const auto w = sample_weights(y, balanced);
        double wsum = 0.0;
        for (double v : w) {
            wsum += v;
        }
        for (int epoch = 0; epoch < epochs; ++epoch) {
            Vector gw = Vector::Zero(x.cols());
            double gb = 0.0;
            for (Index i = 0; i < x.rows(); ++i) {
                const auto k = static_cast<std::size_t>(i);
                const double r = w[k] * (sigmoid(m.logit(x.row(i))) - y[k]);
                gw += r * x.row(i).transpose();
                gb += r;
            }
            gw /= wsum;
            gb /= wsum;
            gw += l2 * m.weights;
            m.weights -= step * gw;
            m.bias -= step * gb;
            log.push_back(m.loss(x, y, w, l2));
            if (!std::isfinite(log.back())) {
                throw NumericError("logistic regression diverged at epoch " +
                                   std::to_string(epoch + 1));
            }
        }
        return m;
    }
};

}  // namespace bnsfuzzy::ml
