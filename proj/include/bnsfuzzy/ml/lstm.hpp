#pragma once

/// Single-layer LSTM over the window read as a sequence of scalars, with a
/// sigmoid readout of the final hidden state. Gates use the sigmoid, the cell
/// input and cell output use tanh. Optionally batch-normalizes the
/// input-to-hidden pre-activations W_x x_t (statistics per time step).

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "bnsfuzzy/ml/common.hpp"
#include "bnsfuzzy/ml/mlp.hpp"
#include "bnsfuzzy/rng.hpp"

namespace bnsfuzzy::ml {

/// Normalizes each row of `u` over the batch (columns).
struct BatchNormResult {
    Matrix normalized;  // (u - mean) / sqrt(var + eps)
    Vector mean;
    Vector var;
    Vector inv_std;
};

inline BatchNormResult batch_norm_forward(const Matrix& u, double eps) {
    BatchNormResult r;
    const double b = static_cast<double>(u.cols());
    r.mean = u.rowwise().sum() / b;
    const Matrix centered = u.colwise() - r.mean;
    r.var = centered.array().square().rowwise().sum() / b;
    r.inv_std = (r.var.array() + eps).rsqrt();
    r.normalized = centered.array().colwise() * r.inv_std.array();
    return r;
}

class Lstm {
public:
    Index hidden = 0;
    bool batch_norm = false;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;

    Matrix wx;  // 4H x 1, gate order i, f, o, g
    Matrix wh;  // 4H x H
    Matrix b;   // 4H x 1
    Matrix wy;  // 1 x H
    Matrix by;  // 1 x 1
    Matrix gamma;  // 4H x 1 (batch norm only)
    Matrix beta;   // 4H x 1 (batch norm only)
    Matrix running_mean;  // 4H x T
    Matrix running_var;   // 4H x T

    static Lstm init(Index hidden, Index steps, bool batch_norm, std::uint64_t seed,
                     double bn_eps = 1e-5, double bn_momentum = 0.9) {
        Engine rng = make_engine(seed, Stream::init);
        const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
        std::uniform_real_distribution<double> u(-k, k);
        auto fill = [&](Index r, Index c) {
            Matrix m(r, c);
            for (Index j = 0; j < c; ++j) {
                for (Index i = 0; i < r; ++i) {
                    m(i, j) = u(rng);
                }
            }
            return m;
        };
        Lstm net;
        net.hidden = hidden;
        net.batch_norm = batch_norm;
        net.bn_eps = bn_eps;
        net.bn_momentum = bn_momentum;
        net.wx = fill(4 * hidden, 1);
        net.wh = fill(4 * hidden, hidden);
        net.b = Matrix::Zero(4 * hidden, 1);
        net.b.block(hidden, 0, hidden, 1).setOnes();  // forget-gate bias
        net.wy = fill(1, hidden);
        net.by = Matrix::Zero(1, 1);
        if (batch_norm) {
            net.gamma = Matrix::Ones(4 * hidden, 1);
            net.beta = Matrix::Zero(4 * hidden, 1);
            net.running_mean = Matrix::Zero(4 * hidden, steps);
            net.running_var = Matrix::Ones(4 * hidden, steps);
        }
        return net;
    }

    std::vector<Matrix*> params() {
        if (batch_norm) {
            return {&wx, &wh, &b, &wy, &by, &gamma, &beta};
        }
        return {&wx, &wh, &b, &wy, &by};
    }

    /// Hidden and cell state after the last step, both H x B.
    struct State {
        Matrix h;
        Matrix c;
    };

    State final_state(const Matrix& x, Mode mode = Mode::inference) const {
        Cache cache;
        return run(x, mode, cache, false);
    }

    Vector logits(const Matrix& x, Mode mode = Mode::inference) const {
        const State s = final_state(x, mode);
        return ((wy * s.h).array() + by(0, 0)).matrix().transpose();
    }

    double loss(const Matrix& x, std::span<const int> y, std::span<const double> w,
                std::vector<Matrix>* grads, Mode mode = Mode::train) {
        Cache cache;
        const State s = run(x, mode, cache, grads != nullptr);
        const Vector z = ((wy * s.h).array() + by(0, 0)).matrix().transpose();
        Vector dz;
        const double l = bce_batch(z, y, w, grads != nullptr ? &dz : nullptr);
        if (batch_norm && mode == Mode::train_update) {
            for (Index t = 0; t < static_cast<Index>(cache.steps.size()); ++t) {
                const auto& st = cache.steps[static_cast<std::size_t>(t)];
                running_mean.col(t) =
                    bn_momentum * running_mean.col(t) + (1.0 - bn_momentum) * st.bn_mean;
                running_var.col(t) =
                    bn_momentum * running_var.col(t) + (1.0 - bn_momentum) * st.bn_var;
            }
        }
        if (grads == nullptr) {
            return l;
        }
        backward(x, cache, s, dz, *grads, mode != Mode::inference);
        return l;
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        const Vector z = logits(x, Mode::inference);
        std::vector<double> out(static_cast<std::size_t>(z.size()));
        for (Index i = 0; i < z.size(); ++i) {
            out[static_cast<std::size_t>(i)] = sigmoid(z(i));
        }
        return out;
    }

private:
    struct StepCache {
        Matrix xt;        // 1 x B
        Matrix uhat;      // 4H x B normalized input projection
        Vector bn_mean;
        Vector bn_var;
        Vector inv_std;
        Matrix i, f, o, g;  // H x B gate activations
        Matrix c_prev, h_prev, c;
    };
    struct Cache {
        std::vector<StepCache> steps;
    };

    static Matrix sigmoid_m(const Matrix& a) {
        return a.unaryExpr([](double v) { return sigmoid(v); });
    }

    State run(const Matrix& x, Mode mode, Cache& cache, bool keep) const {
        const Index batch = x.rows();
        const Index steps = x.cols();
        const Index H = hidden;
        Matrix h = Matrix::Zero(H, batch);
        Matrix c = Matrix::Zero(H, batch);
        const bool batch_stats = mode != Mode::inference;
        const bool need_stats = batch_norm && batch_stats;
        if (keep || need_stats) {
            cache.steps.resize(static_cast<std::size_t>(steps));
        }
        for (Index t = 0; t < steps; ++t) {
            const Matrix xt = x.col(t).transpose();
            Matrix pre = wx * xt;
            if (batch_norm) {
                Matrix uhat;
                if (batch_stats) {
                    auto bn = batch_norm_forward(pre, bn_eps);
                    uhat = std::move(bn.normalized);
                    auto& st = cache.steps[static_cast<std::size_t>(t)];
                    st.bn_mean = std::move(bn.mean);
                    st.bn_var = std::move(bn.var);
                    st.inv_std = std::move(bn.inv_std);
                } else {
                    const Vector inv = (running_var.col(t).array() + bn_eps).rsqrt();
                    uhat = (pre.colwise() - running_mean.col(t)).array().colwise() * inv.array();
                }
                pre = (uhat.array().colwise() * gamma.col(0).array()).colwise() +
                      beta.col(0).array();
                if (keep) {
                    cache.steps[static_cast<std::size_t>(t)].uhat = uhat;
                }
            }
            pre += wh * h;
            pre.colwise() += b.col(0);
            Matrix ig = sigmoid_m(pre.topRows(H));
            Matrix fg = sigmoid_m(pre.middleRows(H, H));
            Matrix og = sigmoid_m(pre.middleRows(2 * H, H));
            Matrix gg = pre.bottomRows(H).array().tanh();
            Matrix c_new = fg.cwiseProduct(c) + ig.cwiseProduct(gg);
            Matrix h_new = og.cwiseProduct(Matrix(c_new.array().tanh()));
            if (keep) {
                auto& st = cache.steps[static_cast<std::size_t>(t)];
                st.xt = xt;
                st.i = std::move(ig);
                st.f = std::move(fg);
                st.o = std::move(og);
                st.g = std::move(gg);
                st.c_prev = c;
                st.h_prev = h;
                st.c = c_new;
            }
            c = std::move(c_new);
            h = std::move(h_new);
        }
        return {h, c};
    }

    void backward(const Matrix& x, const Cache& cache, const State& s, const Vector& dz,
                  std::vector<Matrix>& grads, bool batch_stats) const {
        const Index H = hidden;
        const Index batch = x.rows();
        Matrix dwx = Matrix::Zero(wx.rows(), wx.cols());
        Matrix dwh = Matrix::Zero(wh.rows(), wh.cols());
        Matrix db = Matrix::Zero(b.rows(), 1);
        Matrix dgamma;
        Matrix dbeta;
        if (batch_norm) {
            dgamma = Matrix::Zero(gamma.rows(), 1);
            dbeta = Matrix::Zero(beta.rows(), 1);
        }
        const Matrix dzr = dz.transpose();  // 1 x B
        Matrix dwy = dzr * s.h.transpose();
        Matrix dby = Matrix::Constant(1, 1, dz.sum());
        Matrix dh = wy.transpose() * dzr;  // H x B
        Matrix dc = Matrix::Zero(H, batch);
        Matrix da(4 * H, batch);
        for (Index t = static_cast<Index>(cache.steps.size()) - 1; t >= 0; --t) {
            const auto& st = cache.steps[static_cast<std::size_t>(t)];
            const Matrix tc = st.c.array().tanh();
            const Matrix d_o = dh.cwiseProduct(tc);
            dc += dh.cwiseProduct(st.o).cwiseProduct(Matrix((1.0 - tc.array().square()).matrix()));
            const Matrix d_i = dc.cwiseProduct(st.g);
            const Matrix d_g = dc.cwiseProduct(st.i);
            const Matrix d_f = dc.cwiseProduct(st.c_prev);
            da.topRows(H) = d_i.array() * st.i.array() * (1.0 - st.i.array());
            da.middleRows(H, H) = d_f.array() * st.f.array() * (1.0 - st.f.array());
            da.middleRows(2 * H, H) = d_o.array() * st.o.array() * (1.0 - st.o.array());
            da.bottomRows(H) = d_g.array() * (1.0 - st.g.array().square());
            dwh += da * st.h_prev.transpose();
            db += da.rowwise().sum();
            dh = wh.transpose() * da;
            dc = dc.cwiseProduct(st.f);
            if (batch_norm) {
                dgamma += (da.cwiseProduct(st.uhat)).rowwise().sum();
                dbeta += da.rowwise().sum();
                const Matrix duhat = da.array().colwise() * gamma.col(0).array();
                Matrix du;
                if (batch_stats) {
                    const double bsz = static_cast<double>(batch);
                    const Vector sum_d = duhat.rowwise().sum();
                    const Vector sum_dx = duhat.cwiseProduct(st.uhat).rowwise().sum();
                    du = ((bsz * duhat.array()).colwise() - sum_d.array() -
                          (st.uhat.array().colwise() * sum_dx.array()))
                             .colwise() *
                         (st.inv_std.array() / bsz);
                } else {
                    const Vector inv = (running_var.col(t).array() + bn_eps).rsqrt();
                    du = duhat.array().colwise() * inv.array();
                }
                dwx += du * st.xt.transpose();
            } else {
                dwx += da * st.xt.transpose();
            }
        }
        grads = {dwx, dwh, db, dwy, dby};
        if (batch_norm) {
            grads.push_back(dgamma);
            grads.push_back(dbeta);
        }
    }
};

}  // namespace bnsfuzzy::ml
