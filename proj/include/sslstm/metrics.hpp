#pragma once

#include <cmath>
#include <vector>

#include "sslstm/errors.hpp"

namespace sslstm {

namespace detail {

inline void check_lengths(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.empty()) throw LengthMismatch("metrics need at least one point");
    if (y.size() != yhat.size())
        throw LengthMismatch("actual and predicted lengths differ: " + std::to_string(y.size()) +
                             " vs " + std::to_string(yhat.size()));
}

}  // namespace detail

inline double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    detail::check_lengths(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(acc / y.size());
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
    detail::check_lengths(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::abs(y[i] - yhat[i]);
    return acc / y.size();
}

inline double mape(const std::vector<double>& y, const std::vector<double>& yhat) {
    detail::check_lengths(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) throw ZeroDenominator("mape undefined for zero actual values");
        acc += std::abs((y[i] - yhat[i]) / y[i]);
    }
    return acc / y.size();
}

/// Ratio of regression to total sum of squares about the actual mean; can
/// exceed 1 for over-dispersed predictions.
inline double r2(const std::vector<double>& y, const std::vector<double>& yhat) {
    detail::check_lengths(y, yhat);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ssr += (yhat[i] - mean) * (yhat[i] - mean);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (sst == 0.0) throw ZeroDenominator("r2 undefined for constant actual values");
    return ssr / sst;
}

}  // namespace sslstm
