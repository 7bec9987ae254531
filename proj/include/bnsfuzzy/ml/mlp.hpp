#pragma once

/// Feed-forward network with two ReLU hidden layers and a sigmoid output,
/// plus the mini-batch Adam trainer shared with the recurrent models.

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bnsfuzzy/ml/common.hpp"
#include "bnsfuzzy/rng.hpp"

namespace bnsfuzzy::ml {

/// inference: running statistics, no caching; train: batch statistics;
/// train_update: batch statistics and running-average update.
enum class Mode { inference, train, train_update };

/// Weighted mean cross-entropy of logits and d(loss)/d(logit) per sample.
inline double bce_batch(const Vector& logits, std::span<const int> y, std::span<const double> w,
                        Vector* dlogits) {
    double wsum = 0.0;
    for (double v : w) {
        wsum += v;
    }
    double loss = 0.0;
    if (dlogits != nullptr) {
        dlogits->resize(logits.size());
    }
    for (Index i = 0; i < logits.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        loss += w[k] * bce_with_logit(logits(i), y[k]);
        if (dlogits != nullptr) {
            (*dlogits)(i) = w[k] * (sigmoid(logits(i)) - y[k]) / wsum;
        }
    }
    return loss / wsum;
}

class Mlp {
public:
    Matrix w1, b1, w2, b2, w3, b3;

    static Mlp init(Index inputs, Index hidden1, Index hidden2, std::uint64_t seed) {
        Engine rng = make_engine(seed, Stream::init);
        auto he = [&](Index out, Index in, double gain) {
            std::normal_distribution<double> n(0.0, std::sqrt(gain / static_cast<double>(in)));
            Matrix m(out, in);
            for (Index j = 0; j < in; ++j) {
                for (Index i = 0; i < out; ++i) {
                    m(i, j) = n(rng);
                }
            }
            return m;
        };
        Mlp net;
        net.w1 = he(hidden1, inputs, 2.0);
        net.b1 = Matrix::Zero(hidden1, 1);
        net.w2 = he(hidden2, hidden1, 2.0);
        net.b2 = Matrix::Zero(hidden2, 1);
        net.w3 = he(1, hidden2, 1.0);
        net.b3 = Matrix::Zero(1, 1);
        return net;
    }

    std::vector<Matrix*> params() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

    Vector logits(const Matrix& x) const {
        const Matrix a1 = ((x * w1.transpose()).rowwise() + b1.col(0).transpose()).cwiseMax(0.0);
        const Matrix a2 = ((a1 * w2.transpose()).rowwise() + b2.col(0).transpose()).cwiseMax(0.0);
        return (a2 * w3.transpose()).col(0).array() + b3(0, 0);
    }

    /// Loss on a batch (rows are samples); fills `grads` in params() order when non-null.
    double loss(const Matrix& x, std::span<const int> y, std::span<const double> w,
                std::vector<Matrix>* grads, Mode = Mode::train) {
        const Matrix z1 = (x * w1.transpose()).rowwise() + b1.col(0).transpose();
        const Matrix a1 = z1.cwiseMax(0.0);
        const Matrix z2 = (a1 * w2.transpose()).rowwise() + b2.col(0).transpose();
        const Matrix a2 = z2.cwiseMax(0.0);
        const Vector z = (a2 * w3.transpose()).col(0).array() + b3(0, 0);
        Vector dz;
        const double l = bce_batch(z, y, w, grads != nullptr ? &dz : nullptr);
        if (grads == nullptr) {
            return l;
        }
        grads->assign(6, Matrix{});
        auto& g = *grads;
        g[4] = dz.transpose() * a2;
        g[5] = Matrix::Constant(1, 1, dz.sum());
        Matrix d2 = (dz * w3).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
        g[2] = d2.transpose() * a1;
        g[3] = d2.colwise().sum().transpose();
        Matrix d1 = (d2 * w2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
        g[0] = d1.transpose() * x;
        g[1] = d1.colwise().sum().transpose();
        return l;
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        const Vector z = logits(x);
        std::vector<double> out(static_cast<std::size_t>(z.size()));
        for (Index i = 0; i < z.size(); ++i) {
            out[static_cast<std::size_t>(i)] = sigmoid(z(i));
        }
        return out;
    }
};

inline Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Index>(i)) = x.row(static_cast<Index>(idx[i]));
    }
    return out;
}

/// Mini-batch Adam with per-epoch reshuffling from the model seed. Records the
/// sample-weighted mean batch loss of each epoch in `log`.
template <class Net>
void train_minibatch(Net& net, const Matrix& x, std::span<const int> y,
                     std::span<const double> w, int epochs, int batch, double step,
                     std::uint64_t seed, std::vector<double>& log, const std::string& name) {
    Adam adam(step);
    Engine rng = make_engine(seed, Stream::shuffle);
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Matrix> grads;
    std::vector<int> yb;
    std::vector<double> wb;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        double wsum = 0.0;
        for (std::size_t start = 0, b = 0; start < n; start += static_cast<std::size_t>(batch), ++b) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(batch));
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const Matrix xb = gather_rows(x, idx);
            yb.clear();
            wb.clear();
            for (std::size_t k : idx) {
                yb.push_back(y[k]);
                wb.push_back(w[k]);
            }
            const double l = net.loss(xb, yb, wb, &grads, Mode::train_update);
            bool finite = std::isfinite(l);
            for (const auto& g : grads) {
                finite = finite && g.allFinite();
            }
            if (!finite) {
                throw NumericError(name + ": non-finite loss or gradient at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(b + 1));
            }
            auto ps = net.params();
            adam.update(ps, grads);
            const double bw = std::accumulate(wb.begin(), wb.end(), 0.0);
            total += l * bw;
            wsum += bw;
        }
        log.push_back(total / wsum);
    }
}

}  // namespace bnsfuzzy::ml
