#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "sslstm/errors.hpp"
#include "sslstm/subspace.hpp"

namespace sslstm {

/// Complex half-spectrum over a uniform non-negative frequency grid
/// (radians per sample).
struct Spectrum {
    Eigen::VectorXcd bins;
    Eigen::VectorXd omega;

    double energy() const { return bins.squaredNorm(); }
};

struct SpectralMode {
    Spectrum spectrum;             ///< on the mirror-extended grid
    double center_frequency = 0.0;
    std::vector<Complex> time_domain;  ///< inverse transform of spectrum (extended length)
    std::vector<double> samples;       ///< real part trimmed to the original length
    bool converged = true;
    int iterations = 0;

    double sample_energy() const {
        double e = 0.0;
        for (double v : samples) e += v * v;
        return e;
    }
};

struct SgvmdConfig {
    double alpha = 20.0;         ///< current-mode narrowband penalty (rad^-2)
    double beta = 1.0;           ///< residual narrowband penalty
    double eta = 1e-10;          ///< inner tolerance, relative to residual energy
    double epsilon = 1e-3;       ///< outer stop, relative to input energy
    int max_modes = 8;
    int max_inner_iters = 500;

    void validate() const {
        if (!(alpha > 0 && beta > 0 && eta > 0 && epsilon > 0))
            throw ConfigError("sgvmd penalties and tolerances must be positive");
        if (max_modes < 1 || max_inner_iters < 1)
            throw ConfigError("sgvmd iteration limits must be >= 1");
    }
};

struct Decomposition {
    std::vector<SpectralMode> modes;
    std::vector<double> residual;      ///< trimmed to the original length
    double residual_energy = 0.0;      ///< spectral energy on the extended grid
    double input_energy = 0.0;
    int original_length = 0;
    int pad = 0;
};

inline double center_frequency(const Spectrum& u) {
    double num = 0.0, den = 0.0;
    for (long k = 0; k < u.bins.size(); ++k) {
        const double p = std::norm(u.bins(k));
        num += u.omega(k) * p;
        den += p;
    }
    if (den <= 0.0) throw ZeroEnergy("spectrum has zero energy");
    return num / den;
}

/// Pointwise adaptive-filter update:
///   u(w) = f(w) * (1 + beta (w - wcr)^2) / (1 + alpha (w - wc)^2 + beta (w - wcr)^2)
inline Spectrum update_mode(const Spectrum& f_res, double omega_c, double omega_c_res,
                            double alpha, double beta) {
    Spectrum u;
    u.omega = f_res.omega;
    u.bins.resize(f_res.bins.size());
    for (long k = 0; k < f_res.bins.size(); ++k) {
        const double w = f_res.omega(k);
        const double dc = w - omega_c;
        const double dr = w - omega_c_res;
        const double num = 1.0 + beta * dr * dr;
        u.bins(k) = f_res.bins(k) * (num / (num + alpha * dc * dc));
    }
    return u;
}

namespace detail {

inline std::vector<Complex> mirror_extend_analytic_input(const std::vector<double>& x, int pad) {
    std::vector<Complex> ext;
    ext.reserve(x.size() + 2 * pad);
    for (int t = pad - 1; t >= 0; --t) ext.emplace_back(x[t], 0.0);
    for (double v : x) ext.emplace_back(v, 0.0);
    for (int t = 0; t < pad; ++t) ext.emplace_back(x[x.size() - 1 - t], 0.0);
    return ext;
}

/// One-sided spectrum of a real signal: positive-frequency DFT bins doubled
/// so the real part of the inverse transform reproduces the input.
inline Spectrum analytic_spectrum(const std::vector<Complex>& signal) {
    const long length = static_cast<long>(signal.size());
    Eigen::FFT<double> fft;
    std::vector<Complex> freq(signal.size());
    std::vector<Complex> in = signal;
    fft.fwd(freq, in);
    const long half = length / 2;
    Spectrum s;
    s.bins.resize(half + 1);
    s.omega.resize(half + 1);
    for (long k = 0; k <= half; ++k) {
        const bool self_conjugate = (k == 0) || (2 * k == length);
        s.bins(k) = self_conjugate ? freq[k] : 2.0 * freq[k];
        s.omega(k) = 2.0 * std::numbers::pi * k / length;
    }
    return s;
}

/// Inverse of analytic_spectrum onto the full extended length. The result
/// is the analytic signal; its real part reproduces the original samples.
inline std::vector<Complex> analytic_time(const Spectrum& s, long length) {
    Eigen::FFT<double> fft;
    std::vector<Complex> analytic_freq(length, Complex(0.0, 0.0));
    for (long k = 0; k < s.bins.size(); ++k) analytic_freq[k] = s.bins(k);
    std::vector<Complex> out(length);
    fft.inv(out, analytic_freq);
    return out;
}

}  // namespace detail

/// Inner fixed-point loop: alternate centroid updates and the adaptive
/// filter until successive iterates stop moving.
inline SpectralMode extract_one_mode(const Spectrum& f_res, const SgvmdConfig& cfg,
                                     const Spectrum& init) {
    cfg.validate();
    const double res_energy = f_res.energy();
    if (res_energy <= 0.0) throw ZeroEnergy("residual spectrum has zero energy");

    SpectralMode mode;
    Spectrum u = init;
    double gap = 0.0;
    int s = 0;
    for (; s < cfg.max_inner_iters; ++s) {
        const double wc = center_frequency(u);
        Spectrum remainder;
        remainder.omega = f_res.omega;
        remainder.bins = f_res.bins - u.bins;
        double wcr = wc;
        if (remainder.energy() > 1e-30 * res_energy) wcr = center_frequency(remainder);
        Spectrum next = update_mode(f_res, wc, wcr, cfg.alpha, cfg.beta);
        gap = (next.bins - u.bins).squaredNorm();
        u = std::move(next);
        if (gap <= cfg.eta * res_energy) {
            ++s;
            break;
        }
    }
    mode.spectrum = std::move(u);
    mode.center_frequency = center_frequency(mode.spectrum);
    mode.iterations = s;
    mode.converged = gap <= cfg.eta * res_energy;
    return mode;
}

/// Sequentially peel narrowband modes off a real series until the spectral
/// residual drops below epsilon times the input energy. The series is
/// mirror-extended by half its length at both ends; returned samples are
/// trimmed back.
inline Decomposition decompose(const std::vector<double>& series, const SgvmdConfig& cfg) {
    cfg.validate();
    if (series.size() < 8) throw EmptyInput("sgvmd needs at least 8 samples");
    const int n = static_cast<int>(series.size());
    const int pad = n / 2;
    const std::vector<Complex> extended = detail::mirror_extend_analytic_input(series, pad);
    const long ext_len = static_cast<long>(extended.size());

    Spectrum residual = detail::analytic_spectrum(extended);
    Decomposition dec;
    dec.original_length = n;
    dec.pad = pad;
    dec.input_energy = residual.energy();

    while (static_cast<int>(dec.modes.size()) < cfg.max_modes &&
           residual.energy() > cfg.epsilon * dec.input_energy) {
        // Seed from a narrow band around the residual's strongest peak.
        long peak = 0;
        residual.bins.cwiseAbs().maxCoeff(&peak);
        Spectrum init;
        init.omega = residual.omega;
        init.bins = Eigen::VectorXcd::Zero(residual.bins.size());
        for (long k = std::max<long>(0, peak - 3);
             k <= std::min<long>(residual.bins.size() - 1, peak + 3); ++k)
            init.bins(k) = residual.bins(k);

        SpectralMode mode = extract_one_mode(residual, cfg, init);
        residual.bins -= mode.spectrum.bins;

        mode.time_domain = detail::analytic_time(mode.spectrum, ext_len);
        mode.samples.resize(n);
        for (int t = 0; t < n; ++t) mode.samples[t] = mode.time_domain[pad + t].real();
        dec.modes.push_back(std::move(mode));
    }

    dec.residual_energy = residual.energy();
    const std::vector<Complex> res_time = detail::analytic_time(residual, ext_len);
    dec.residual.resize(n);
    for (int t = 0; t < n; ++t) dec.residual[t] = res_time[pad + t].real();
    return dec;
}

/// Sum of mode samples plus residual; equals the input by linearity.
inline std::vector<double> reconstruct(const Decomposition& dec) {
    std::vector<double> out = dec.residual;
    for (const auto& mode : dec.modes)
        for (int t = 0; t < dec.original_length; ++t) out[t] += mode.samples[t];
    return out;
}

struct ClassifyConfig {
    double trend_cutoff = 0.0;   ///< rad/sample; 0 selects four DFT bins of the series length
    double energy_share = 0.5;
};

/// Label a decomposed real series by where its energy concentrates.
inline SeriesLabel classify_series(const Decomposition& dec, const ClassifyConfig& cfg = {}) {
    const double cutoff = cfg.trend_cutoff > 0.0
                              ? cfg.trend_cutoff
                              : 4.0 * 2.0 * std::numbers::pi / dec.original_length;
    double total = 0.0;
    for (double v : dec.residual) total += v * v;
    for (const auto& mode : dec.modes) total += mode.sample_energy();
    if (total <= 0.0) return SeriesLabel::Residue;

    const SpectralMode* lowest = nullptr;
    for (const auto& mode : dec.modes)
        if (lowest == nullptr || mode.center_frequency < lowest->center_frequency) lowest = &mode;
    if (lowest != nullptr && lowest->center_frequency < cutoff &&
        lowest->sample_energy() / total >= cfg.energy_share)
        return SeriesLabel::Trend;
    for (const auto& mode : dec.modes)
        if (mode.center_frequency >= cutoff && mode.sample_energy() / total >= cfg.energy_share)
            return SeriesLabel::Frequency;
    return SeriesLabel::Residue;
}

/// Complex feature series are labeled channelwise: Trend wins over
/// Frequency wins over Residue across the real and imaginary parts.
inline SeriesLabel classify_feature_series(const std::vector<Complex>& series,
                                           const SgvmdConfig& cfg,
                                           const ClassifyConfig& ccfg = {}) {
    std::vector<double> re(series.size()), im(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        re[t] = series[t].real();
        im[t] = series[t].imag();
    }
    const SeriesLabel lr = classify_series(decompose(re, cfg), ccfg);
    const SeriesLabel li = classify_series(decompose(im, cfg), ccfg);
    if (lr == SeriesLabel::Trend || li == SeriesLabel::Trend) return SeriesLabel::Trend;
    if (lr == SeriesLabel::Frequency || li == SeriesLabel::Frequency) return SeriesLabel::Frequency;
    return SeriesLabel::Residue;
}

}  // namespace sslstm
