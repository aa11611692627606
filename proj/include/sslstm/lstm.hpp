#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sslstm/errors.hpp"
#include "sslstm/series.hpp"

namespace sslstm {

/// Gate weights operate on the concatenation [h_prev, x].
struct LstmParams {
    Eigen::MatrixXd Wf, Wi, Wc, Wo;
    Eigen::VectorXd bf, bi, bc, bo;
    int hidden = 0;
    int input = 0;
};

struct Hyperparams {
    int hidden_size = 200;
    double initial_lr = 0.015;
    int max_epochs = 1000;
    int lr_drop_period = 350;
    double lr_drop_factor = 0.01;
    double grad_clip = 1.0;

    void validate() const {
        if (hidden_size < 1 || max_epochs < 1 || lr_drop_period < 1)
            throw ConfigError("lstm hyperparameters must be positive");
        if (!(initial_lr > 0.0) || !(lr_drop_factor > 0.0) || lr_drop_factor > 1.0)
            throw ConfigError("lstm learning-rate settings out of range");
    }
};

struct CellCache {
    Eigen::VectorXd z;        // [h_prev, x]
    Eigen::VectorXd f, i, g, o;
    Eigen::VectorXd c, tanh_c;
    Eigen::VectorXd c_prev;
};

namespace detail {

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

}  // namespace detail

/// One step: forget, input, candidate, cell update, output.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> cell_forward(const Eigen::VectorXd& x,
                                                                const Eigen::VectorXd& h_prev,
                                                                const Eigen::VectorXd& c_prev,
                                                                const LstmParams& p,
                                                                CellCache* cache = nullptr) {
    if (x.size() != p.input || h_prev.size() != p.hidden || c_prev.size() != p.hidden)
        throw ShapeMismatch("cell_forward input shapes do not match the parameters");
    Eigen::VectorXd z(p.hidden + p.input);
    z << h_prev, x;
    const Eigen::VectorXd f = detail::sigmoid(p.Wf * z + p.bf);
    const Eigen::VectorXd i = detail::sigmoid(p.Wi * z + p.bi);
    const Eigen::VectorXd g = (p.Wc * z + p.bc).array().tanh();
    const Eigen::VectorXd c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    const Eigen::VectorXd o = detail::sigmoid(p.Wo * z + p.bo);
    const Eigen::VectorXd tanh_c = c.array().tanh();
    const Eigen::VectorXd h = o.cwiseProduct(tanh_c);
    if (cache != nullptr) {
        cache->z = z;
        cache->f = f;
        cache->i = i;
        cache->g = g;
        cache->o = o;
        cache->c = c;
        cache->tanh_c = tanh_c;
        cache->c_prev = c_prev;
    }
    return {h, c};
}

struct Gradients {
    Eigen::MatrixXd Wf, Wi, Wc, Wo, Wy;
    Eigen::VectorXd bf, bi, bc, bo, by;

    static Gradients zero(const LstmParams& p, long output) {
        Gradients g;
        g.Wf = Eigen::MatrixXd::Zero(p.hidden, p.hidden + p.input);
        g.Wi = g.Wf;
        g.Wc = g.Wf;
        g.Wo = g.Wf;
        g.bf = Eigen::VectorXd::Zero(p.hidden);
        g.bi = g.bf;
        g.bc = g.bf;
        g.bo = g.bf;
        g.Wy = Eigen::MatrixXd::Zero(output, p.hidden);
        g.by = Eigen::VectorXd::Zero(output);
        return g;
    }

    double squared_norm() const {
        return Wf.squaredNorm() + Wi.squaredNorm() + Wc.squaredNorm() + Wo.squaredNorm() +
               Wy.squaredNorm() + bf.squaredNorm() + bi.squaredNorm() + bc.squaredNorm() +
               bo.squaredNorm() + by.squaredNorm();
    }

    void scale(double s) {
        Wf *= s; Wi *= s; Wc *= s; Wo *= s; Wy *= s;
        bf *= s; bi *= s; bc *= s; bo *= s; by *= s;
    }
};

/// Trained network plus everything needed to reproduce or apply it.
struct LstmModel {
    LstmParams params;
    Eigen::MatrixXd Wy;   // output x hidden readout
    Eigen::VectorXd by;
    Normalizer normalizer;
    Hyperparams hyperparams;
    int window_length = 0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
};

/// Forward through a whole window (columns are time steps); readout on the
/// final hidden state.
inline Eigen::VectorXd forward_window(const Eigen::MatrixXd& window, const LstmParams& p,
                                      const Eigen::MatrixXd& Wy, const Eigen::VectorXd& by,
                                      std::vector<CellCache>* caches = nullptr) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(p.hidden);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p.hidden);
    if (caches != nullptr) caches->resize(window.cols());
    for (long t = 0; t < window.cols(); ++t) {
        CellCache* cache = caches != nullptr ? &(*caches)[t] : nullptr;
        auto [h_next, c_next] = cell_forward(window.col(t), h, c, p, cache);
        h = h_next;
        c = c_next;
    }
    return Wy * h + by;
}

/// Full backpropagation through time for one window given the gradient of
/// the loss with respect to the readout output.
inline Gradients backward(const std::vector<CellCache>& caches, const LstmParams& p,
                          const Eigen::MatrixXd& Wy, const Eigen::VectorXd& d_pred) {
    Gradients grads = Gradients::zero(p, d_pred.size());
    const long steps = static_cast<long>(caches.size());
    const Eigen::VectorXd& h_last = caches.back().o.cwiseProduct(caches.back().tanh_c);
    grads.Wy = d_pred * h_last.transpose();
    grads.by = d_pred;

    Eigen::VectorXd dh = Wy.transpose() * d_pred;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(p.hidden);
    for (long t = steps - 1; t >= 0; --t) {
        const CellCache& cc = caches[t];
        dc += dh.cwiseProduct(cc.o)
                  .cwiseProduct(Eigen::VectorXd::Ones(p.hidden) - cc.tanh_c.cwiseProduct(cc.tanh_c));
        const Eigen::VectorXd do_pre =
            dh.cwiseProduct(cc.tanh_c)
                .cwiseProduct(cc.o)
                .cwiseProduct(Eigen::VectorXd::Ones(p.hidden) - cc.o);
        const Eigen::VectorXd df_pre =
            dc.cwiseProduct(cc.c_prev)
                .cwiseProduct(cc.f)
                .cwiseProduct(Eigen::VectorXd::Ones(p.hidden) - cc.f);
        const Eigen::VectorXd di_pre =
            dc.cwiseProduct(cc.g)
                .cwiseProduct(cc.i)
                .cwiseProduct(Eigen::VectorXd::Ones(p.hidden) - cc.i);
        const Eigen::VectorXd dg_pre =
            dc.cwiseProduct(cc.i)
                .cwiseProduct(Eigen::VectorXd::Ones(p.hidden) - cc.g.cwiseProduct(cc.g));

        grads.Wf += df_pre * cc.z.transpose();
        grads.Wi += di_pre * cc.z.transpose();
        grads.Wc += dg_pre * cc.z.transpose();
        grads.Wo += do_pre * cc.z.transpose();
        grads.bf += df_pre;
        grads.bi += di_pre;
        grads.bc += dg_pre;
        grads.bo += do_pre;

        const Eigen::VectorXd dz = p.Wf.transpose() * df_pre + p.Wi.transpose() * di_pre +
                                   p.Wc.transpose() * dg_pre + p.Wo.transpose() * do_pre;
        dh = dz.head(p.hidden);
        dc = dc.cwiseProduct(cc.f);
    }
    return grads;
}

/// Stride-1 sliding windows over multichannel data; the target is the
/// vector of channel values one step past each window.
struct TrainingWindowSet {
    std::vector<Eigen::MatrixXd> inputs;   ///< channels x window_length each
    std::vector<Eigen::VectorXd> targets;  ///< channels each
    int window_length = 0;
};

inline TrainingWindowSet make_windows(const std::vector<std::vector<double>>& channels,
                                      int window_length) {
    if (channels.empty()) throw EmptyInput("make_windows needs at least one channel");
    const long n = static_cast<long>(channels.front().size());
    if (window_length < 1 || window_length >= n)
        throw WindowLengthMismatch("window length must be in [1, series length)");
    const long nch = static_cast<long>(channels.size());
    TrainingWindowSet set;
    set.window_length = window_length;
    for (long t = 0; t + window_length < n; ++t) {
        Eigen::MatrixXd win(nch, window_length);
        Eigen::VectorXd target(nch);
        for (long ch = 0; ch < nch; ++ch) {
            for (int j = 0; j < window_length; ++j) win(ch, j) = channels[ch][t + j];
            target(ch) = channels[ch][t + window_length];
        }
        set.inputs.push_back(std::move(win));
        set.targets.push_back(std::move(target));
    }
    return set;
}

namespace detail {

inline LstmParams init_params(int hidden, int input, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto fill_matrix = [&](Eigen::MatrixXd& m, long rows, long cols) {
        m.resize(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) m(r, c) = dist(rng);
    };
    auto fill_vector = [&](Eigen::VectorXd& v, long size) {
        v.resize(size);
        for (long r = 0; r < size; ++r) v(r) = dist(rng);
    };
    LstmParams p;
    p.hidden = hidden;
    p.input = input;
    fill_matrix(p.Wf, hidden, hidden + input);
    fill_matrix(p.Wi, hidden, hidden + input);
    fill_matrix(p.Wc, hidden, hidden + input);
    fill_matrix(p.Wo, hidden, hidden + input);
    fill_vector(p.bf, hidden);
    fill_vector(p.bi, hidden);
    fill_vector(p.bc, hidden);
    fill_vector(p.bo, hidden);
    return p;
}

}  // namespace detail

/// Gradient descent over normalized windows with norm clipping and the
/// step-decay schedule lr(e) = initial * factor^floor(e / period).
inline LstmModel train(const TrainingWindowSet& windows, const Hyperparams& hp,
                       std::uint64_t seed) {
    hp.validate();
    if (windows.inputs.empty()) throw EmptyInput("training window set is empty");
    const int input = static_cast<int>(windows.inputs.front().rows());
    const int output = static_cast<int>(windows.targets.front().size());

    std::mt19937_64 rng(seed);
    LstmModel model;
    model.params = detail::init_params(hp.hidden_size, input, rng);
    {
        const double bound = 1.0 / std::sqrt(static_cast<double>(hp.hidden_size));
        std::uniform_real_distribution<double> dist(-bound, bound);
        model.Wy.resize(output, hp.hidden_size);
        for (long r = 0; r < output; ++r)
            for (long c = 0; c < hp.hidden_size; ++c) model.Wy(r, c) = dist(rng);
        model.by = Eigen::VectorXd::Zero(output);
    }
    model.hyperparams = hp;
    model.window_length = windows.window_length;
    model.seed = seed;

    std::vector<CellCache> caches;
    for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
        const double lr = hp.initial_lr * std::pow(hp.lr_drop_factor, epoch / hp.lr_drop_period);
        double loss_sum = 0.0;
        for (std::size_t w = 0; w < windows.inputs.size(); ++w) {
            const Eigen::VectorXd pred =
                forward_window(windows.inputs[w], model.params, model.Wy, model.by, &caches);
            const Eigen::VectorXd err = pred - windows.targets[w];
            loss_sum += err.squaredNorm() / output;
            const Eigen::VectorXd d_pred = 2.0 * err / output;
            Gradients grads = backward(caches, model.params, model.Wy, d_pred);
            const double norm = std::sqrt(grads.squared_norm());
            if (norm > hp.grad_clip) grads.scale(hp.grad_clip / norm);
            model.params.Wf -= lr * grads.Wf;
            model.params.Wi -= lr * grads.Wi;
            model.params.Wc -= lr * grads.Wc;
            model.params.Wo -= lr * grads.Wo;
            model.params.bf -= lr * grads.bf;
            model.params.bi -= lr * grads.bi;
            model.params.bc -= lr * grads.bc;
            model.params.bo -= lr * grads.bo;
            model.Wy -= lr * grads.Wy;
            model.by -= lr * grads.by;
        }
        model.final_loss = loss_sum / windows.inputs.size();
        if (!std::isfinite(model.final_loss))
            throw DivergenceDetected("training loss became non-finite at epoch " +
                                     std::to_string(epoch));
    }
    return model;
}

/// Normalize raw channel data, window it, and train; the returned model
/// carries the fitted normalizer.
inline LstmModel fit_model(const std::vector<std::vector<double>>& channels, int window_length,
                           const Hyperparams& hp, std::uint64_t seed) {
    Normalizer norm = Normalizer::fit(channels);
    std::vector<std::vector<double>> scaled(channels.size());
    for (std::size_t ch = 0; ch < channels.size(); ++ch) {
        scaled[ch].resize(channels[ch].size());
        for (std::size_t t = 0; t < channels[ch].size(); ++t)
            scaled[ch][t] = norm.normalize(channels[ch][t], ch);
    }
    LstmModel model = train(make_windows(scaled, window_length), hp, seed);
    model.normalizer = norm;
    return model;
}

/// One-step-ahead prediction from a raw (unnormalized) window; channels are
/// rows, time steps are columns.
inline Eigen::VectorXd predict_one_step(const LstmModel& model, const Eigen::MatrixXd& window) {
    if (window.cols() != model.window_length)
        throw WindowLengthMismatch("expected window length " +
                                   std::to_string(model.window_length) + ", got " +
                                   std::to_string(window.cols()));
    if (window.rows() != model.params.input)
        throw ShapeMismatch("expected " + std::to_string(model.params.input) + " channels");
    Eigen::MatrixXd scaled(window.rows(), window.cols());
    for (long ch = 0; ch < window.rows(); ++ch)
        for (long t = 0; t < window.cols(); ++t)
            scaled(ch, t) = model.normalizer.normalize(window(ch, t), ch);
    Eigen::VectorXd pred = forward_window(scaled, model.params, model.Wy, model.by);
    for (long ch = 0; ch < pred.size(); ++ch)
        pred(ch) = model.normalizer.denormalize(pred(ch), ch);
    return pred;
}

// --- serialization -------------------------------------------------------

namespace detail {

inline void write_matrix(std::ostream& os, const char* name, const Eigen::MatrixXd& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
        os << '\n';
    }
}

inline Eigen::MatrixXd read_matrix(std::istream& is, const std::string& expected) {
    std::string name;
    long rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols) || name != expected)
        throw ParseError("model file: expected matrix '" + expected + "'");
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c)
            if (!(is >> m(r, c))) throw ParseError("model file: truncated matrix " + expected);
    return m;
}

}  // namespace detail

/// Versioned text container: header, hyperparameters, normalizer constants,
/// then the eight gate tensors and the readout.
inline void save_model(std::ostream& os, const LstmModel& model) {
    os.precision(17);
    os << "SSLSTM_MODEL 1\n";
    os << "hidden " << model.params.hidden << " input " << model.params.input << " output "
       << model.Wy.rows() << " window " << model.window_length << '\n';
    os << "hyperparams " << model.hyperparams.hidden_size << ' ' << model.hyperparams.initial_lr
       << ' ' << model.hyperparams.max_epochs << ' ' << model.hyperparams.lr_drop_period << ' '
       << model.hyperparams.lr_drop_factor << ' ' << model.hyperparams.grad_clip << '\n';
    os << "seed " << model.seed << '\n';
    os << "normalizer " << model.normalizer.channels();
    for (std::size_t ch = 0; ch < model.normalizer.channels(); ++ch)
        os << ' ' << model.normalizer.channel_min(ch) << ' ' << model.normalizer.channel_span(ch);
    os << '\n';
    detail::write_matrix(os, "Wf", model.params.Wf);
    detail::write_matrix(os, "Wi", model.params.Wi);
    detail::write_matrix(os, "Wc", model.params.Wc);
    detail::write_matrix(os, "Wo", model.params.Wo);
    detail::write_matrix(os, "bf", model.params.bf);
    detail::write_matrix(os, "bi", model.params.bi);
    detail::write_matrix(os, "bc", model.params.bc);
    detail::write_matrix(os, "bo", model.params.bo);
    detail::write_matrix(os, "Wy", model.Wy);
    detail::write_matrix(os, "by", model.by);
}

inline LstmModel load_model(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "SSLSTM_MODEL" || version != 1)
        throw ParseError("not a version-1 model file");
    LstmModel model;
    std::string key;
    long output = 0;
    is >> key >> model.params.hidden >> key >> model.params.input >> key >> output >> key >>
        model.window_length;
    is >> key >> model.hyperparams.hidden_size >> model.hyperparams.initial_lr >>
        model.hyperparams.max_epochs >> model.hyperparams.lr_drop_period >>
        model.hyperparams.lr_drop_factor >> model.hyperparams.grad_clip;
    is >> key >> model.seed;
    std::size_t channels = 0;
    is >> key >> channels;
    std::vector<double> mins(channels), spans(channels);
    for (std::size_t ch = 0; ch < channels; ++ch) is >> mins[ch] >> spans[ch];
    if (!is) throw ParseError("model file: truncated header");
    model.normalizer = Normalizer::from_constants(std::move(mins), std::move(spans));
    model.params.Wf = detail::read_matrix(is, "Wf");
    model.params.Wi = detail::read_matrix(is, "Wi");
    model.params.Wc = detail::read_matrix(is, "Wc");
    model.params.Wo = detail::read_matrix(is, "Wo");
    model.params.bf = detail::read_matrix(is, "bf");
    model.params.bi = detail::read_matrix(is, "bi");
    model.params.bc = detail::read_matrix(is, "bc");
    model.params.bo = detail::read_matrix(is, "bo");
    model.Wy = detail::read_matrix(is, "Wy");
    model.by = detail::read_matrix(is, "by");
    return model;
}

}  // namespace sslstm
