#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "bnsfuzzy/error.hpp"

namespace bnsfuzzy::ml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Binary cross-entropy of a logit: log(1 + e^z) - y z, stable for large |z|.
inline double bce_with_logit(double z, int y) {
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return softplus - static_cast<double>(y) * z;
}

/// Zero-mean, unit-variance scaling fitted on training rows only.
struct Standardizer {
    bool enabled = false;
    Vector mean;
    Vector scale;

    static Standardizer fit(const Matrix& x, bool enabled) {
        Standardizer s;
        s.enabled = enabled;
        s.mean = Vector::Zero(x.cols());
        s.scale = Vector::Ones(x.cols());
        if (!enabled || x.rows() == 0) {
            return s;
        }
        const double n = static_cast<double>(x.rows());
        for (Index j = 0; j < x.cols(); ++j) {
            const double m = x.col(j).sum() / n;
            const double var = (x.col(j).array() - m).square().sum() / n;
            s.mean(j) = m;
            s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }

    Matrix apply(const Matrix& x) const {
        if (!enabled) {
            return x;
        }
        Matrix out = x;
        for (Index j = 0; j < x.cols(); ++j) {
            out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
        }
        return out;
    }
};

/// Per-sample weights: all ones, or N / (2 N_c) per class when balancing.
inline std::vector<double> sample_weights(std::span<const int> y, bool balanced) {
    std::vector<double> w(y.size(), 1.0);
    if (!balanced) {
        return w;
    }
    double n1 = 0.0;
    for (int v : y) {
        n1 += v;
    }
    const double n = static_cast<double>(y.size());
    const double n0 = n - n1;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double nc = y[i] == 1 ? n1 : n0;
        w[i] = nc > 0.0 ? n / (2.0 * nc) : 1.0;
    }
    return w;
}

inline void require_both_classes(std::span<const int> y, const char* kind) {
    bool has0 = false;
    bool has1 = false;
    for (int v : y) {
        has0 |= v == 0;
        has1 |= v == 1;
    }
    if (!(has0 && has1)) {
        throw DegenerateDataError(std::string(kind) + " requires both classes in training data");
    }
}

inline void check_finite(const Matrix& m, const std::string& context) {
    if (!m.allFinite()) {
        throw NumericError("non-finite values in " + context);
    }
}

/// Adam optimizer state for a list of parameter tensors.
class Adam {
public:
    explicit Adam(double step, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : step_{step}, beta1_{beta1}, beta2_{beta2}, eps_{eps} {}

    void update(std::span<Matrix* const> params, std::span<const Matrix> grads) {
        if (m_.empty()) {
            for (const Matrix* p : params) {
                m_.push_back(Matrix::Zero(p->rows(), p->cols()));
                v_.push_back(Matrix::Zero(p->rows(), p->cols()));
            }
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
            params[i]->array() -=
                step_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
        }
    }

private:
    double step_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace bnsfuzzy::ml
