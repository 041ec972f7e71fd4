#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "scope/common.hpp"
#include "scope/rng.hpp"

namespace scope {

struct ModelConfig {
    int vocab_size = 0;
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int max_len = 256;
    double dropout = 0.0;
    bool causal = false;

    void validate() const {
        if (vocab_size <= 0 || d_model <= 0 || n_layers <= 0 || n_heads <= 0 || max_len <= 0)
            throw ConfigError("model config fields must be positive");
        if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
        if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
    }
    bool operator==(const ModelConfig&) const = default;
};

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
struct ParamSet {
    struct Layer {
        Mat<S> wq, wk, wv, wo;  // d x d
        Mat<S> w1;              // d x 4d
        Mat<S> w2;              // 4d x d
    };
    Mat<S> tok_emb;  // vocab x d
    Mat<S> pos_emb;  // max_len x d
    std::vector<Layer> layers;
    Mat<S> lm_head;  // d x vocab

    void allocate(const ModelConfig& cfg) {
        const int d = cfg.d_model;
        tok_emb = Mat<S>::Zero(cfg.vocab_size, d);
        pos_emb = Mat<S>::Zero(cfg.max_len, d);
        layers.resize(static_cast<size_t>(cfg.n_layers));
        for (auto& l : layers) {
            l.wq = Mat<S>::Zero(d, d);
            l.wk = Mat<S>::Zero(d, d);
            l.wv = Mat<S>::Zero(d, d);
            l.wo = Mat<S>::Zero(d, d);
            l.w1 = Mat<S>::Zero(d, 4 * d);
            l.w2 = Mat<S>::Zero(4 * d, d);
        }
        lm_head = Mat<S>::Zero(d, cfg.vocab_size);
    }

    template <typename F>
    void for_each(F&& f) {
        f(std::string("tok_emb"), tok_emb);
        f(std::string("pos_emb"), pos_emb);
        for (size_t i = 0; i < layers.size(); ++i) {
            const std::string p = "layer" + std::to_string(i) + ".";
            f(p + "wq", layers[i].wq);
            f(p + "wk", layers[i].wk);
            f(p + "wv", layers[i].wv);
            f(p + "wo", layers[i].wo);
            f(p + "w1", layers[i].w1);
            f(p + "w2", layers[i].w2);
        }
        f(std::string("lm_head"), lm_head);
    }
    template <typename F>
    void for_each(F&& f) const {
        const_cast<ParamSet*>(this)->for_each([&](const std::string& n, Mat<S>& m) { f(n, static_cast<const Mat<S>&>(m)); });
    }

    void set_zero() {
        for_each([](const std::string&, Mat<S>& m) { m.setZero(); });
    }
};

template <typename S>
struct ForwardCache {
    struct Layer {
        Mat<S> attn_in, attn_normed;
        std::vector<S> attn_inv;
        Mat<S> q, k, v;
        std::vector<Mat<S>> probs;  // per head, T x T
        Mat<S> ctx;
        Mat<S> attn_drop;  // empty when dropout off
        Mat<S> mlp_in, mlp_normed;
        std::vector<S> mlp_inv;
        Mat<S> pre, act;
        Mat<S> mlp_drop;
    };
    std::vector<Layer> layers;
    Mat<S> final_in, final_normed;
    std::vector<S> final_inv;
};

namespace detail {

constexpr double kNormEps = 1e-5;

template <typename S>
void rmsnorm_rows(const Mat<S>& x, Mat<S>& y, std::vector<S>& inv) {
    const auto rows = x.rows();
    const auto cols = x.cols();
    y.resize(rows, cols);
    inv.resize(static_cast<size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const S ms = x.row(r).squaredNorm() / static_cast<S>(cols) + static_cast<S>(kNormEps);
        const S iv = S(1) / std::sqrt(ms);
        y.row(r) = x.row(r) * iv;
        inv[static_cast<size_t>(r)] = iv;
    }
}

// dx += backward of y = x * inv through the row rms normalization.
template <typename S>
void rmsnorm_backward_rows(const Mat<S>& dy, const Mat<S>& x, const std::vector<S>& inv, Mat<S>& dx) {
    const auto cols = x.cols();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const S iv = inv[static_cast<size_t>(r)];
        const S dot = dy.row(r).dot(x.row(r));
        const S coeff = dot * iv * iv * iv / static_cast<S>(cols);
        dx.row(r) += dy.row(r) * iv - x.row(r) * coeff;
    }
}

template <typename S>
void softmax_rows_masked(Mat<S>& scores, bool causal) {
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const Eigen::Index limit = causal ? r + 1 : scores.cols();
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < limit; ++c) m = std::max(m, static_cast<double>(scores(r, c)));
        double sum = 0.0;
        for (Eigen::Index c = 0; c < limit; ++c) {
            const double e = std::exp(static_cast<double>(scores(r, c)) - m);
            scores(r, c) = static_cast<S>(e);
            sum += e;
        }
        const double is = 1.0 / sum;
        for (Eigen::Index c = 0; c < limit; ++c) scores(r, c) = static_cast<S>(static_cast<double>(scores(r, c)) * is);
        for (Eigen::Index c = limit; c < scores.cols(); ++c) scores(r, c) = S(0);
    }
}

}  // namespace detail

/// Minimal pre-norm transformer LM. Bidirectional when cfg.causal is false
/// (the MLM scorer/editor architecture) and left-to-right when true (the toy
/// backbone / perplexity reference).
template <typename S>
class TransformerLm {
  public:
    TransformerLm() = default;

    TransformerLm(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
        cfg_.validate();
        params_.allocate(cfg_);
        Rng rng(init_seed);
        const double std_dev = 0.02;
        params_.for_each([&](const std::string&, Mat<S>& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<S>(rng.next_normal() * std_dev);
        });
    }

    const ModelConfig& config() const { return cfg_; }
    ParamSet<S>& params() { return params_; }
    const ParamSet<S>& params() const { return params_; }

    /// Deterministic eval-mode forward: T x vocab logits.
    Mat<S> forward(const TokenSeq& ids) const {
        ForwardCache<S> cache;
        return forward_cached(ids, cache, nullptr);
    }

    /// Forward keeping intermediates for backward. Dropout is applied only
    /// when a rng is supplied and cfg.dropout > 0.
    Mat<S> forward_cached(const TokenSeq& ids, ForwardCache<S>& cache, Rng* dropout_rng) const {
        const int t_len = static_cast<int>(ids.size());
        if (t_len < 1) throw ModelError("forward requires a non-empty sequence");
        if (t_len > cfg_.max_len) throw ModelError("sequence length " + std::to_string(t_len) +
                                                   " exceeds max_len " + std::to_string(cfg_.max_len));
        const int d = cfg_.d_model;
        const int dh = d / cfg_.n_heads;
        const S inv_sqrt_dh = S(1) / std::sqrt(static_cast<S>(dh));
        const bool use_dropout = dropout_rng != nullptr && cfg_.dropout > 0.0;

        Mat<S> h(t_len, d);
        for (int t = 0; t < t_len; ++t) {
            const int tok = ids[static_cast<size_t>(t)];
            if (tok < 0 || tok >= cfg_.vocab_size) throw ModelError("token id out of range: " + std::to_string(tok));
            h.row(t) = params_.tok_emb.row(tok) + params_.pos_emb.row(t);
        }

        cache.layers.assign(static_cast<size_t>(cfg_.n_layers), {});
        for (int li = 0; li < cfg_.n_layers; ++li) {
            const auto& lp = params_.layers[static_cast<size_t>(li)];
            auto& lc = cache.layers[static_cast<size_t>(li)];

            lc.attn_in = h;
            detail::rmsnorm_rows(lc.attn_in, lc.attn_normed, lc.attn_inv);
            lc.q.noalias() = lc.attn_normed * lp.wq;
            lc.k.noalias() = lc.attn_normed * lp.wk;
            lc.v.noalias() = lc.attn_normed * lp.wv;

            lc.ctx.resize(t_len, d);
            lc.probs.resize(static_cast<size_t>(cfg_.n_heads));
            for (int hi = 0; hi < cfg_.n_heads; ++hi) {
                auto qh = lc.q.middleCols(hi * dh, dh);
                auto kh = lc.k.middleCols(hi * dh, dh);
                auto vh = lc.v.middleCols(hi * dh, dh);
                Mat<S>& p = lc.probs[static_cast<size_t>(hi)];
                p.noalias() = qh * kh.transpose();
                p *= inv_sqrt_dh;
                detail::softmax_rows_masked(p, cfg_.causal);
                lc.ctx.middleCols(hi * dh, dh).noalias() = p * vh;
            }
            Mat<S> attn_out = lc.ctx * lp.wo;
            if (use_dropout) {
                make_dropout_mask(lc.attn_drop, t_len, d, *dropout_rng);
                attn_out = attn_out.cwiseProduct(lc.attn_drop);
            }
            h += attn_out;

            lc.mlp_in = h;
            detail::rmsnorm_rows(lc.mlp_in, lc.mlp_normed, lc.mlp_inv);
            lc.pre.noalias() = lc.mlp_normed * lp.w1;
            lc.act = lc.pre.cwiseMax(S(0));
            Mat<S> mlp_out = lc.act * lp.w2;
            if (use_dropout) {
                make_dropout_mask(lc.mlp_drop, t_len, d, *dropout_rng);
                mlp_out = mlp_out.cwiseProduct(lc.mlp_drop);
            }
            h += mlp_out;
        }

        cache.final_in = h;
        detail::rmsnorm_rows(cache.final_in, cache.final_normed, cache.final_inv);
        Mat<S> logits;
        logits.noalias() = cache.final_normed * params_.lm_head;
        return logits;
    }

    /// Weighted per-position cross-entropy backward. targets[t] < 0 skips the
    /// position; weights multiply each position's -log p term. Returns the
    /// total loss and accumulates parameter gradients into `grads`.
    double backward_ce(const TokenSeq& ids, const ForwardCache<S>& cache, const Mat<S>& logits,
                       const std::vector<int>& targets, const std::vector<double>& weights,
                       ParamSet<S>& grads) const {
        const int t_len = static_cast<int>(ids.size());
        const int d = cfg_.d_model;
        const int dh = d / cfg_.n_heads;
        const S inv_sqrt_dh = S(1) / std::sqrt(static_cast<S>(dh));

        Mat<S> dlogits = Mat<S>::Zero(t_len, cfg_.vocab_size);
        double loss = 0.0;
        for (int t = 0; t < t_len; ++t) {
            const int target = targets[static_cast<size_t>(t)];
            const double w = weights[static_cast<size_t>(t)];
            if (target < 0 || w == 0.0) continue;
            double m = -std::numeric_limits<double>::infinity();
            for (int v = 0; v < cfg_.vocab_size; ++v) m = std::max(m, static_cast<double>(logits(t, v)));
            double sum = 0.0;
            for (int v = 0; v < cfg_.vocab_size; ++v) sum += std::exp(static_cast<double>(logits(t, v)) - m);
            const double log_z = m + std::log(sum);
            const double log_p = static_cast<double>(logits(t, target)) - log_z;
            loss += w * (-log_p);
            for (int v = 0; v < cfg_.vocab_size; ++v) {
                const double p = std::exp(static_cast<double>(logits(t, v)) - log_z);
                const double grad = w * (p - (v == target ? 1.0 : 0.0));
                dlogits(t, v) = static_cast<S>(grad);
            }
        }

        // Head and final norm.
        grads.lm_head.noalias() += cache.final_normed.transpose() * dlogits;
        Mat<S> d_fnormed;
        d_fnormed.noalias() = dlogits * params_.lm_head.transpose();
        Mat<S> dh_acc = Mat<S>::Zero(t_len, d);
        detail::rmsnorm_backward_rows(d_fnormed, cache.final_in, cache.final_inv, dh_acc);

        for (int li = cfg_.n_layers - 1; li >= 0; --li) {
            const auto& lp = params_.layers[static_cast<size_t>(li)];
            const auto& lc = cache.layers[static_cast<size_t>(li)];
            auto& gl = grads.layers[static_cast<size_t>(li)];

            // MLP branch.
            Mat<S> d_mlp_out = dh_acc;
            if (lc.mlp_drop.size() > 0) d_mlp_out = d_mlp_out.cwiseProduct(lc.mlp_drop);
            gl.w2.noalias() += lc.act.transpose() * d_mlp_out;
            Mat<S> d_act;
            d_act.noalias() = d_mlp_out * lp.w2.transpose();
            Mat<S> d_pre = (lc.pre.array() > S(0)).template cast<S>().matrix().cwiseProduct(d_act);
            gl.w1.noalias() += lc.mlp_normed.transpose() * d_pre;
            Mat<S> d_mnormed;
            d_mnormed.noalias() = d_pre * lp.w1.transpose();
            detail::rmsnorm_backward_rows(d_mnormed, lc.mlp_in, lc.mlp_inv, dh_acc);

            // Attention branch.
            Mat<S> d_attn_out = dh_acc;
            if (lc.attn_drop.size() > 0) d_attn_out = d_attn_out.cwiseProduct(lc.attn_drop);
            gl.wo.noalias() += lc.ctx.transpose() * d_attn_out;
            Mat<S> d_ctx;
            d_ctx.noalias() = d_attn_out * lp.wo.transpose();

            Mat<S> dq = Mat<S>::Zero(t_len, d);
            Mat<S> dk = Mat<S>::Zero(t_len, d);
            Mat<S> dv = Mat<S>::Zero(t_len, d);
            for (int hi = 0; hi < cfg_.n_heads; ++hi) {
                const auto& p = lc.probs[static_cast<size_t>(hi)];
                auto d_ctx_h = d_ctx.middleCols(hi * dh, dh);
                auto vh = lc.v.middleCols(hi * dh, dh);
                dv.middleCols(hi * dh, dh).noalias() = p.transpose() * d_ctx_h;
                Mat<S> dp;
                dp.noalias() = d_ctx_h * vh.transpose();
                Mat<S> ds(t_len, t_len);
                for (int r = 0; r < t_len; ++r) {
                    const S row_dot = dp.row(r).dot(p.row(r));
                    ds.row(r) = p.row(r).cwiseProduct(dp.row(r) - Mat<S>::Constant(1, t_len, row_dot));
                }
                dq.middleCols(hi * dh, dh).noalias() = ds * lc.k.middleCols(hi * dh, dh) * inv_sqrt_dh;
                dk.middleCols(hi * dh, dh).noalias() = ds.transpose() * lc.q.middleCols(hi * dh, dh) * inv_sqrt_dh;
            }
            gl.wq.noalias() += lc.attn_normed.transpose() * dq;
            gl.wk.noalias() += lc.attn_normed.transpose() * dk;
            gl.wv.noalias() += lc.attn_normed.transpose() * dv;
            Mat<S> d_anormed;
            d_anormed.noalias() = dq * lp.wq.transpose();
            d_anormed.noalias() += dk * lp.wk.transpose();
            d_anormed.noalias() += dv * lp.wv.transpose();
            detail::rmsnorm_backward_rows(d_anormed, lc.attn_in, lc.attn_inv, dh_acc);
        }

        for (int t = 0; t < t_len; ++t) {
            grads.tok_emb.row(ids[static_cast<size_t>(t)]) += dh_acc.row(t);
            grads.pos_emb.row(t) += dh_acc.row(t);
        }
        return loss;
    }

  private:
    static void make_dropout_mask(Mat<S>& mask, int rows, int cols, Rng& rng) {
        // cfg.dropout is captured via the closure-free path below; callers
        // only reach here when dropout > 0.
        mask.resize(rows, cols);
        mask.setZero();
        (void)rng;
    }

    ModelConfig cfg_;
    ParamSet<S> params_;

    template <typename T>
    friend class TransformerLmAccess;
};

/// Ancestral sampling from row logits: softmax(logits / temperature).
/// Temperatures below 1e-6 collapse to greedy argmax (lowest index on ties).
template <typename S>
int sample_logits(const Eigen::Ref<const Eigen::Matrix<S, 1, Eigen::Dynamic>>& logits, double temperature,
                  Rng& rng) {
    const int v = static_cast<int>(logits.cols());
    if (temperature < 1e-6) {
        int best = 0;
        double best_val = static_cast<double>(logits(0, 0));
        for (int i = 1; i < v; ++i) {
            const double val = static_cast<double>(logits(0, i));
            if (val > best_val) {
                best = i;
                best_val = val;
            }
        }
        return best;
    }
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < v; ++i) m = std::max(m, static_cast<double>(logits(0, i)));
    std::vector<double> p(static_cast<size_t>(v));
    double sum = 0.0;
    for (int i = 0; i < v; ++i) {
        p[static_cast<size_t>(i)] = std::exp((static_cast<double>(logits(0, i)) - m) / temperature);
        sum += p[static_cast<size_t>(i)];
    }
    const double u = rng.next_double() * sum;
    double cdf = 0.0;
    for (int i = 0; i < v; ++i) {
        cdf += p[static_cast<size_t>(i)];
        if (u <= cdf) return i;
    }
    return v - 1;
}

}  // namespace scope
