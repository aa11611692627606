#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sslstm/errors.hpp"

namespace sslstm {

/// Real-valued, uniformly sampled sequence.
struct TimeSeries {
    std::vector<double> values;
    double dt = 1.0;

    std::size_t size() const { return values.size(); }
};

inline void validate_series(const TimeSeries& s) {
    if (s.values.empty()) throw EmptyInput("time series is empty");
    if (!(s.dt > 0.0)) throw ConfigError("sampling interval dt must be positive");
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!std::isfinite(s.values[i]))
            throw NonFiniteInput("non-finite value at index " + std::to_string(i));
    }
}

/// Per-channel min-max scaler. Constant channels are mapped to 0 with a
/// unit span so the round trip stays exact.
class Normalizer {
public:
    Normalizer() = default;

    static Normalizer fit(const std::vector<std::vector<double>>& channels) {
        Normalizer n;
        n.min_.reserve(channels.size());
        n.span_.reserve(channels.size());
        for (const auto& ch : channels) {
            if (ch.empty()) throw EmptyInput("cannot fit normalizer on empty channel");
            double lo = ch[0], hi = ch[0];
            for (double v : ch) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            double span = hi - lo;
            if (span <= 0.0) span = 1.0;
            n.min_.push_back(lo);
            n.span_.push_back(span);
        }
        return n;
    }

    std::size_t channels() const { return min_.size(); }

    double normalize(double x, std::size_t channel) const {
        return (x - min_[channel]) / span_[channel];
    }
    double denormalize(double y, std::size_t channel) const {
        return y * span_[channel] + min_[channel];
    }

    double channel_min(std::size_t c) const { return min_[c]; }
    double channel_span(std::size_t c) const { return span_[c]; }

    // Used by model deserialization.
    static Normalizer from_constants(std::vector<double> mins, std::vector<double> spans) {
        Normalizer n;
        n.min_ = std::move(mins);
        n.span_ = std::move(spans);
        return n;
    }

private:
    std::vector<double> min_;
    std::vector<double> span_;
};

}  // namespace sslstm
