#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sslstm/embedding.hpp"
#include "sslstm/errors.hpp"
#include "sslstm/lstm.hpp"
#include "sslstm/metrics.hpp"
#include "sslstm/series.hpp"
#include "sslstm/sgvmd.hpp"
#include "sslstm/subspace.hpp"

namespace sslstm {

struct PipelineConfig {
    EmbeddingParams embedding{.d = 100, .tau = 1};
    int snapshot_window = 100;
    ExtractionConfig extraction;
    SgvmdConfig sgvmd;
    ClassifyConfig classify;
    Hyperparams trend_hp{.hidden_size = 200, .initial_lr = 0.015, .max_epochs = 1000,
                         .lr_drop_period = 350, .lr_drop_factor = 0.01};
    Hyperparams frequency_hp{.hidden_size = 250, .initial_lr = 0.01, .max_epochs = 1500,
                             .lr_drop_period = 300, .lr_drop_factor = 0.015};
    Hyperparams residue_hp{.hidden_size = 300, .initial_lr = 0.005, .max_epochs = 2000,
                           .lr_drop_period = 400, .lr_drop_factor = 0.005};
    Hyperparams baseline_hp{.hidden_size = 200, .initial_lr = 0.015, .max_epochs = 1000,
                            .lr_drop_period = 350, .lr_drop_factor = 0.01};
    int feature_window = 20;
    int train_count = 750;
    int test_count = 150;
    int fit_span = 0;   ///< 0: snapshot span L + d - 1
    std::uint64_t seed = 42;

    const Hyperparams& hyperparams_for(SeriesLabel label) const {
        switch (label) {
            case SeriesLabel::Trend: return trend_hp;
            case SeriesLabel::Frequency: return frequency_hp;
            default: return residue_hp;
        }
    }
};

struct SeriesDiagnostic {
    int row_index = 0;
    SeriesLabel label = SeriesLabel::Residue;
    bool sgvmd_converged = true;
};

struct ForecastReport {
    std::string model_name;
    double rmse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    double mape = 0.0;
    bool mape_valid = true;
    bool r2_valid = true;
    std::vector<double> predicted;
    std::vector<double> actual;
    std::vector<SeriesDiagnostic> diagnostics;
};

/// Which source supplies the per-snapshot feature values over the test
/// region; Oracle bypasses learning to isolate reconstruction fidelity.
enum class FeatureSource { Lstm, Oracle };

namespace detail {

inline void fill_metrics(ForecastReport& report) {
    report.rmse = rmse(report.actual, report.predicted);
    report.mae = mae(report.actual, report.predicted);
    try {
        report.r2 = r2(report.actual, report.predicted);
        report.r2_valid = true;
    } catch (const ZeroDenominator&) {
        report.r2 = 0.0;
        report.r2_valid = false;
    }
    try {
        report.mape = mape(report.actual, report.predicted);
        report.mape_valid = true;
    } catch (const ZeroDenominator&) {
        report.mape = 0.0;
        report.mape_valid = false;
    }
}

inline std::pair<SeriesLabel, bool> classify_with_flags(const std::vector<Complex>& series,
                                                        const SgvmdConfig& cfg,
                                                        const ClassifyConfig& ccfg) {
    std::vector<double> re(series.size()), im(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        re[t] = series[t].real();
        im[t] = series[t].imag();
    }
    const Decomposition dr = decompose(re, cfg);
    const Decomposition di = decompose(im, cfg);
    bool converged = true;
    for (const auto& m : dr.modes) converged = converged && m.converged;
    for (const auto& m : di.modes) converged = converged && m.converged;
    const SeriesLabel lr = classify_series(dr, ccfg);
    const SeriesLabel li = classify_series(di, ccfg);
    SeriesLabel label = SeriesLabel::Residue;
    if (lr == SeriesLabel::Trend || li == SeriesLabel::Trend)
        label = SeriesLabel::Trend;
    else if (lr == SeriesLabel::Frequency || li == SeriesLabel::Frequency)
        label = SeriesLabel::Frequency;
    return {label, converged};
}

/// One-step value prediction from predicted features: fit modal amplitudes
/// on the known window by least squares, then extrapolate one sample.
inline double extrapolate_step(const std::vector<Complex>& features,
                               const std::vector<double>& known_window) {
    const long span = static_cast<long>(known_window.size());
    const long m = static_cast<long>(features.size());
    Eigen::MatrixXcd basis(span, m);
    for (long i = 0; i < m; ++i) {
        Complex power(1.0, 0.0);
        for (long k = 0; k < span; ++k) {
            basis(k, i) = power;
            power *= features[i];
        }
    }
    Eigen::VectorXcd target(span);
    for (long k = 0; k < span; ++k) target(k) = Complex(known_window[k], 0.0);
    const Eigen::VectorXcd amplitudes = basis.colPivHouseholderQr().solve(target);
    Complex next(0.0, 0.0);
    for (long i = 0; i < m; ++i) next += amplitudes(i) * std::pow(features[i], double(span));
    return next.real();
}

}  // namespace detail

/// End-to-end combination forecast: embed, smooth, extract feature series,
/// classify, train one model per series with type-specific hyperparameters,
/// predict features over the test region, and reconstruct the series via
/// the predicted trajectory matrix and diagonal averaging.
inline ForecastReport run_ss_lstm(const TimeSeries& series, const PipelineConfig& cfg,
                                  FeatureSource source = FeatureSource::Lstm) {
    validate_series(series);
    const long n = static_cast<long>(series.size());
    const int d = cfg.embedding.d;
    const int L = cfg.snapshot_window;
    if (cfg.test_count < 1) throw ConfigError("test split must contain at least one point");

    TrajectoryMatrix traj;
    SnapshotSet snaps;
    try {
        traj = build_trajectory_matrix(series, cfg.embedding);
        snaps = build_snapshots(traj, L, 1);
    } catch (const Error& e) {
        throw ConfigError(std::string("embedding stage: ") + e.what());
    }
    const long S = static_cast<long>(snaps.size());
    if (cfg.test_count >= S)
        throw ConfigError("test split of " + std::to_string(cfg.test_count) +
                          " snapshots exceeds the " + std::to_string(S) + " available");
    const long train_end = S - cfg.test_count;

    ExtractionConfig ext = cfg.extraction;
    ext.dt = series.dt;
    std::vector<DynamicFeatureSeries> feature_series;
    try {
        feature_series = extract_feature_series(snaps, ext);
    } catch (const Error& e) {
        throw Error(std::string("extraction stage: ") + e.what());
    }

    ForecastReport report;
    report.model_name = source == FeatureSource::Oracle ? "ss-lstm-oracle" : "ss-lstm";

    // Classify on the training region only and train one model per series.
    const long m = static_cast<long>(feature_series.size());
    std::vector<LstmModel> models;
    const long train_begin = std::max<long>(0, train_end - cfg.train_count);
    for (long i = 0; i < m; ++i) {
        const auto& fs = feature_series[i];
        const std::vector<Complex> train_part(fs.values.begin() + train_begin,
                                              fs.values.begin() + train_end);
        SeriesDiagnostic diag;
        diag.row_index = fs.row_index;
        try {
            auto [label, converged] =
                detail::classify_with_flags(train_part, cfg.sgvmd, cfg.classify);
            diag.label = label;
            diag.sgvmd_converged = converged;
        } catch (const Error& e) {
            throw Error("classification stage, series " + std::to_string(i) + ": " + e.what());
        }
        report.diagnostics.push_back(diag);

        if (source == FeatureSource::Lstm) {
            std::vector<std::vector<double>> channels(2);
            for (const Complex& v : train_part) {
                channels[0].push_back(v.real());
                channels[1].push_back(v.imag());
            }
            try {
                models.push_back(fit_model(channels, cfg.feature_window,
                                           cfg.hyperparams_for(diag.label),
                                           cfg.seed + static_cast<std::uint64_t>(i)));
            } catch (const Error& e) {
                throw Error("training stage, series " + std::to_string(i) + ": " + e.what());
            }
        }
    }

    // Predict features for each test snapshot (one step ahead, rolling on
    // true past feature values), extrapolate the next sample, and assemble
    // the predicted trajectory matrix.
    const int fit_span = cfg.fit_span > 0 ? cfg.fit_span : L + d - 1;
    std::vector<double> predicted_points(cfg.test_count);
    for (long s = train_end; s < S; ++s) {
        std::vector<Complex> predicted_features(m);
        if (source == FeatureSource::Oracle) {
            for (long i = 0; i < m; ++i) predicted_features[i] = feature_series[i].values[s];
        } else {
            for (long i = 0; i < m; ++i) {
                Eigen::MatrixXd window(2, cfg.feature_window);
                for (int t = 0; t < cfg.feature_window; ++t) {
                    const Complex v = feature_series[i].values[s - cfg.feature_window + t];
                    window(0, t) = v.real();
                    window(1, t) = v.imag();
                }
                const Eigen::VectorXd p = predict_one_step(models[i], window);
                predicted_features[i] = Complex(p(0), p(1));
            }
        }
        const long e = s + L + d - 2;  // series index introduced by snapshot s
        if (e - fit_span < 0) throw ConfigError("fit span exceeds available history");
        std::vector<double> known(series.values.begin() + (e - fit_span),
                                  series.values.begin() + e);
        predicted_points[s - train_end] = detail::extrapolate_step(predicted_features, known);
    }

    // Predicted trajectory rows over the test region; known entries come
    // from the observed series, future entries from the predictions.
    Eigen::MatrixXd predicted_matrix(cfg.test_count, d);
    const long test_start_index = n - cfg.test_count;
    for (long s = train_end; s < S; ++s) {
        for (int j = 0; j < d; ++j) {
            const long idx = s + L - 1 + j;
            predicted_matrix(s - train_end, j) = idx >= test_start_index
                                                     ? predicted_points[idx - test_start_index]
                                                     : series.values[idx];
        }
    }
    const TimeSeries restored = diagonal_average(predicted_matrix, series.dt);
    report.predicted.assign(restored.values.end() - cfg.test_count, restored.values.end());
    report.actual.assign(series.values.end() - cfg.test_count, series.values.end());
    detail::fill_metrics(report);
    return report;
}

/// Plain windowed LSTM on the raw normalized series, same split and
/// metrics as the combination model.
inline ForecastReport run_lstm_baseline(const TimeSeries& series, const PipelineConfig& cfg) {
    validate_series(series);
    const long n = static_cast<long>(series.size());
    if (cfg.test_count < 1) throw ConfigError("test split must contain at least one point");
    const long train_end = n - cfg.test_count;
    if (train_end <= cfg.feature_window)
        throw ConfigError("training region shorter than the input window");

    const long train_begin = std::max<long>(0, train_end - cfg.train_count);
    std::vector<std::vector<double>> channels(1);
    channels[0].assign(series.values.begin() + train_begin, series.values.begin() + train_end);
    LstmModel model = fit_model(channels, cfg.feature_window, cfg.baseline_hp, cfg.seed);

    ForecastReport report;
    report.model_name = "lstm";
    report.predicted.resize(cfg.test_count);
    for (long t = train_end; t < n; ++t) {
        Eigen::MatrixXd window(1, cfg.feature_window);
        for (int j = 0; j < cfg.feature_window; ++j)
            window(0, j) = series.values[t - cfg.feature_window + j];
        report.predicted[t - train_end] = predict_one_step(model, window)(0);
    }
    report.actual.assign(series.values.end() - cfg.test_count, series.values.end());
    detail::fill_metrics(report);
    return report;
}

/// Minimal-skill reference: predict the previous observed value.
inline double persistence_rmse(const TimeSeries& series, int test_count) {
    const long n = static_cast<long>(series.size());
    if (test_count < 1 || test_count >= n) throw ConfigError("invalid persistence split");
    std::vector<double> actual(series.values.end() - test_count, series.values.end());
    std::vector<double> predicted(test_count);
    for (int t = 0; t < test_count; ++t) predicted[t] = series.values[n - test_count + t - 1];
    return rmse(actual, predicted);
}

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct AggregateReport {
    std::vector<ForecastReport> runs;
    MetricStats rmse, mae, mape, r2;
    bool mape_valid = true;
};

enum class ModelKind { SsLstm, Lstm };

/// Repeat a run with seeds seed+0 .. seed+trials-1 and aggregate the
/// metrics (population standard deviation).
inline AggregateReport repeat_experiment(const TimeSeries& series, const PipelineConfig& cfg,
                                         int trials, ModelKind kind) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    AggregateReport agg;
    for (int t = 0; t < trials; ++t) {
        PipelineConfig trial_cfg = cfg;
        trial_cfg.seed = cfg.seed + static_cast<std::uint64_t>(t);
        agg.runs.push_back(kind == ModelKind::SsLstm ? run_ss_lstm(series, trial_cfg)
                                                     : run_lstm_baseline(series, trial_cfg));
        agg.mape_valid = agg.mape_valid && agg.runs.back().mape_valid;
    }
    auto stats = [&](auto getter) {
        MetricStats s;
        for (const auto& r : agg.runs) s.mean += getter(r);
        s.mean /= trials;
        for (const auto& r : agg.runs) s.stddev += (getter(r) - s.mean) * (getter(r) - s.mean);
        s.stddev = std::sqrt(s.stddev / trials);
        return s;
    };
    agg.rmse = stats([](const ForecastReport& r) { return r.rmse; });
    agg.mae = stats([](const ForecastReport& r) { return r.mae; });
    agg.mape = stats([](const ForecastReport& r) { return r.mape; });
    agg.r2 = stats([](const ForecastReport& r) { return r.r2; });
    return agg;
}

}  // namespace sslstm
