#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sslstm/errors.hpp"
#include "sslstm/series.hpp"

namespace sslstm {

struct EmbeddingParams {
    int d = 100;   ///< embedding dimension (columns)
    int tau = 1;   ///< delay between columns

    void validate(std::size_t series_length) const {
        if (d < 1 || tau < 1) throw ConfigError("embedding requires d >= 1 and tau >= 1");
        if (static_cast<std::size_t>(d - 1) * tau >= series_length)
            throw EmbeddingTooLong("(d-1)*tau = " + std::to_string((d - 1) * tau) +
                                   " does not fit a series of length " +
                                   std::to_string(series_length));
    }
};

/// Delay embedding of a series: row i, column j holds values[i + j*tau].
/// Hankel-structured when tau == 1. Rows m = n - (d-1)*tau.
struct TrajectoryMatrix {
    Eigen::MatrixXd data;
    EmbeddingParams params;
    long source_length = 0;
};

inline TrajectoryMatrix build_trajectory_matrix(const TimeSeries& series,
                                                const EmbeddingParams& params) {
    validate_series(series);
    params.validate(series.size());
    const long n = static_cast<long>(series.size());
    const long m = n - static_cast<long>(params.d - 1) * params.tau;
    TrajectoryMatrix traj;
    traj.data.resize(m, params.d);
    for (long i = 0; i < m; ++i)
        for (int j = 0; j < params.d; ++j)
            traj.data(i, j) = series.values[i + static_cast<long>(j) * params.tau];
    traj.params = params;
    traj.source_length = n;
    return traj;
}

/// Contiguous row-windows of a trajectory matrix.
struct SnapshotSet {
    std::vector<Eigen::MatrixXd> snapshots;
    int window_length = 0;
    int step = 1;

    std::size_t size() const { return snapshots.size(); }
};

inline SnapshotSet build_snapshots(const TrajectoryMatrix& traj, int window_length, int step) {
    const long rows = traj.data.rows();
    if (window_length < 1 || window_length > rows)
        throw WindowTooLarge("window length " + std::to_string(window_length) +
                             " exceeds " + std::to_string(rows) + " trajectory rows");
    if (step < 1) throw InvalidStep("snapshot step must be >= 1");
    SnapshotSet set;
    set.window_length = window_length;
    set.step = step;
    const long count = (rows - window_length) / step + 1;
    set.snapshots.reserve(count);
    for (long k = 0; k < count; ++k)
        set.snapshots.push_back(traj.data.middleRows(k * step, window_length));
    return set;
}

/// Anti-diagonal averaging: element k of the output is the mean of all
/// entries (i, j) with i + j == k. Inverse of the tau=1 Hankel embedding.
inline TimeSeries diagonal_average(const Eigen::MatrixXd& matrix, double dt = 1.0) {
    const long m = matrix.rows();
    const long d = matrix.cols();
    if (m < 1 || d < 1) throw EmptyMatrix("diagonal_average requires a non-empty matrix");
    const long n = m + d - 1;
    std::vector<double> sums(n, 0.0);
    std::vector<long> counts(n, 0);
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < d; ++j) {
            sums[i + j] += matrix(i, j);
            ++counts[i + j];
        }
    }
    TimeSeries out;
    out.dt = dt;
    out.values.resize(n);
    for (long k = 0; k < n; ++k) out.values[k] = sums[k] / counts[k];
    return out;
}

}  // namespace sslstm
