#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sslstm/embedding.hpp"
#include "sslstm/errors.hpp"

namespace sslstm {

using Complex = std::complex<double>;

/// Hermitian sample correlation matrix, columns treated as observations.
struct CorrelationMatrix {
    Eigen::MatrixXcd data;
    long sample_count = 0;
};

inline CorrelationMatrix sample_correlation(const Eigen::MatrixXcd& snapshot) {
    if (snapshot.rows() < 1 || snapshot.cols() < 1)
        throw EmptyInput("sample_correlation requires a non-empty matrix");
    CorrelationMatrix r;
    r.sample_count = snapshot.cols();
    r.data = (snapshot * snapshot.adjoint()) / static_cast<double>(snapshot.cols());
    // Force exact Hermitian symmetry against floating-point drift.
    r.data = (r.data + r.data.adjoint().eval()) / 2.0;
    return r;
}

/// Mean of the sample correlations of P overlapping sub-arrays; sub-array k
/// covers rows [k, k + subarray_len).
inline CorrelationMatrix spatial_smooth(const Eigen::MatrixXcd& window, int subarray_len,
                                        int smoothing_degree) {
    if (smoothing_degree < 1) throw ConfigError("smoothing degree must be >= 1");
    if (subarray_len < 1) throw ConfigError("sub-array length must be >= 1");
    if (subarray_len + smoothing_degree - 1 > window.rows())
        throw InsufficientRows("sub-array length " + std::to_string(subarray_len) +
                               " with smoothing degree " + std::to_string(smoothing_degree) +
                               " needs more than " + std::to_string(window.rows()) + " rows");
    CorrelationMatrix out;
    out.data = Eigen::MatrixXcd::Zero(subarray_len, subarray_len);
    out.sample_count = window.cols() * smoothing_degree;
    for (int k = 0; k < smoothing_degree; ++k) {
        CorrelationMatrix sub = sample_correlation(window.middleRows(k, subarray_len));
        out.data += sub.data;
    }
    out.data /= static_cast<double>(smoothing_degree);
    return out;
}

/// Rule for picking the signal-subspace dimension m.
struct ModelOrderRule {
    enum class Kind { EnergyFraction, Fixed };
    Kind kind = Kind::EnergyFraction;
    double energy_fraction = 0.95;
    int fixed_order = 1;

    static ModelOrderRule energy(double fraction) {
        return {Kind::EnergyFraction, fraction, 1};
    }
    static ModelOrderRule fixed(int m) { return {Kind::Fixed, 0.95, m}; }
};

struct SubspaceSplit {
    Eigen::MatrixXcd signal_basis;   ///< L x m, orthonormal columns
    Eigen::MatrixXcd noise_basis;    ///< L x (L - m)
    Eigen::VectorXd eigenvalues;     ///< descending
    int model_order = 0;
};

inline SubspaceSplit split_subspace(const CorrelationMatrix& corr, const ModelOrderRule& rule) {
    const long L = corr.data.rows();
    if (L < 2) throw EmptyInput("correlation matrix must be at least 2x2");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(corr.data);
    if (solver.info() != Eigen::Success)
        throw DegenerateSpectrum("eigendecomposition failed to converge");

    // Eigen returns ascending order; flip to descending.
    SubspaceSplit split;
    split.eigenvalues.resize(L);
    Eigen::MatrixXcd vectors(L, L);
    for (long i = 0; i < L; ++i) {
        split.eigenvalues(i) = solver.eigenvalues()(L - 1 - i);
        vectors.col(i) = solver.eigenvectors().col(L - 1 - i);
    }

    int m = 0;
    if (rule.kind == ModelOrderRule::Kind::Fixed) {
        if (rule.fixed_order < 1 || rule.fixed_order >= L)
            throw ConfigError("fixed model order must be in [1, L-1]");
        m = rule.fixed_order;
    } else {
        const double total = split.eigenvalues.sum();
        if (total <= 0.0) throw DegenerateSpectrum("correlation matrix has no energy");
        double mass = 0.0;
        for (long i = 0; i < L; ++i) {
            mass += split.eigenvalues(i);
            if (mass / total >= rule.energy_fraction) {
                m = static_cast<int>(i) + 1;
                break;
            }
        }
        m = std::min<int>(m, static_cast<int>(L) - 1);
        m = std::max(m, 1);
    }

    const double gap = split.eigenvalues(m - 1) - split.eigenvalues(m);
    const double scale = std::max(std::abs(split.eigenvalues(0)), 1.0);
    if (gap < 1e-12 * scale)
        throw DegenerateSpectrum("eigengap at order " + std::to_string(m) +
                                 " is below tolerance; subspace split is ambiguous");

    split.model_order = m;
    split.signal_basis = vectors.leftCols(m);
    split.noise_basis = vectors.rightCols(L - m);
    return split;
}

/// Complex modal ratio V = e^{a dt}: ln|V|/dt is the growth trend,
/// arg(V)/dt the oscillation frequency (principal branch).
struct DynamicFeature {
    Complex value;
    double growth = 0.0;
    double frequency = 0.0;

    static DynamicFeature from_value(Complex v, double dt) {
        DynamicFeature f;
        f.value = v;
        f.growth = std::log(std::abs(v)) / dt;
        f.frequency = std::arg(v) / dt;
        return f;
    }
};

/// Shift-invariance eigenvalue extraction: solve the least-squares relation
/// between the first-rows and last-rows blocks of the signal basis and take
/// the eigenvalues of the solution.
inline std::vector<DynamicFeature> esprit_features(const SubspaceSplit& split, double dt = 1.0) {
    const long L = split.signal_basis.rows();
    const long m = split.signal_basis.cols();
    if (L < 2) throw EmptyInput("signal basis needs at least 2 rows");
    const Eigen::MatrixXcd upper = split.signal_basis.topRows(L - 1);
    const Eigen::MatrixXcd lower = split.signal_basis.bottomRows(L - 1);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(upper);
    if (qr.rank() < m)
        throw RankDeficientBlock("upper signal-basis block has column rank " +
                                 std::to_string(qr.rank()) + " < " + std::to_string(m));

    // Normal-equation solve; orthogonal factorization when badly conditioned.
    const Eigen::MatrixXcd gram = upper.adjoint() * upper;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(gram);
    const double cond = ges.eigenvalues()(m - 1) / std::max(ges.eigenvalues()(0), 1e-300);
    Eigen::MatrixXcd phi;
    if (cond > 1e8) {
        phi = qr.solve(lower);
    } else {
        phi = gram.ldlt().solve(upper.adjoint() * lower);
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(phi);
    if (es.info() != Eigen::Success)
        throw RankDeficientBlock("eigensolve of the shift relation failed");

    std::vector<DynamicFeature> features;
    features.reserve(m);
    for (long i = 0; i < m; ++i) features.push_back(DynamicFeature::from_value(es.eigenvalues()(i), dt));
    std::sort(features.begin(), features.end(), [](const DynamicFeature& a, const DynamicFeature& b) {
        return std::abs(a.value) > std::abs(b.value);
    });
    return features;
}

enum class SeriesLabel { Trend, Frequency, Residue };

inline const char* to_string(SeriesLabel label) {
    switch (label) {
        case SeriesLabel::Trend: return "Trend";
        case SeriesLabel::Frequency: return "Frequency";
        default: return "Residue";
    }
}

/// One aligned per-snapshot sequence of complex feature values.
struct DynamicFeatureSeries {
    std::vector<Complex> values;
    SeriesLabel label = SeriesLabel::Residue;
    int row_index = 0;
};

struct ExtractionConfig {
    int subarray_len = 0;       ///< 0: half the snapshot row count
    int smoothing_degree = 0;   ///< 0: maximum degree for the sub-array length
    ModelOrderRule order;
    double dt = 1.0;
};

namespace detail {

/// Greedy nearest-neighbor assignment of current features to the previous
/// aligned values, ties broken by descending |V|.
inline std::vector<Complex> align_features(const std::vector<Complex>& previous,
                                           const std::vector<DynamicFeature>& current) {
    const std::size_t m = previous.size();
    std::vector<Complex> aligned = previous;  // carry-over for unmatched slots
    std::vector<bool> slot_used(m, false), feat_used(current.size(), false);
    for (std::size_t pick = 0; pick < std::min(m, current.size()); ++pick) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bs = 0, bf = 0;
        for (std::size_t s = 0; s < m; ++s) {
            if (slot_used[s]) continue;
            for (std::size_t f = 0; f < current.size(); ++f) {
                if (feat_used[f]) continue;
                const double dist = std::abs(previous[s] - current[f].value);
                const bool better =
                    dist < best ||
                    (dist == best && std::abs(current[f].value) > std::abs(current[bf].value));
                if (better) {
                    best = dist;
                    bs = s;
                    bf = f;
                }
            }
        }
        slot_used[bs] = true;
        feat_used[bf] = true;
        aligned[bs] = current[bf].value;
    }
    return aligned;
}

}  // namespace detail

/// Run smooth -> split -> shift-invariance extraction per snapshot and align
/// the resulting features into per-slot series. The model order is locked
/// from the first snapshot so every series has one value per snapshot.
inline std::vector<DynamicFeatureSeries> extract_feature_series(const SnapshotSet& snapshots,
                                                                const ExtractionConfig& cfg) {
    if (snapshots.size() < 2) throw EmptyInput("feature extraction needs at least 2 snapshots");
    const long L = snapshots.snapshots.front().rows();
    const int subarray_len = cfg.subarray_len > 0 ? cfg.subarray_len : static_cast<int>(L / 2);
    const int degree = cfg.smoothing_degree > 0 ? cfg.smoothing_degree
                                                : static_cast<int>(L) - subarray_len + 1;

    auto features_of = [&](const Eigen::MatrixXcd& snap, const ModelOrderRule& rule) {
        CorrelationMatrix smoothed = spatial_smooth(snap, subarray_len, degree);
        SubspaceSplit split = split_subspace(smoothed, rule);
        return esprit_features(split, cfg.dt);
    };

    std::vector<DynamicFeatureSeries> series;
    ModelOrderRule locked = cfg.order;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        try {
            const Eigen::MatrixXcd snap = snapshots.snapshots[k].cast<Complex>();
            std::vector<DynamicFeature> feats = features_of(snap, locked);
            if (k == 0) {
                locked = ModelOrderRule::fixed(static_cast<int>(feats.size()));
                series.resize(feats.size());
                for (std::size_t s = 0; s < feats.size(); ++s) {
                    series[s].row_index = static_cast<int>(s);
                    series[s].values.reserve(snapshots.size());
                    series[s].values.push_back(feats[s].value);
                }
            } else {
                std::vector<Complex> previous(series.size());
                for (std::size_t s = 0; s < series.size(); ++s) previous[s] = series[s].values.back();
                std::vector<Complex> aligned = detail::align_features(previous, feats);
                for (std::size_t s = 0; s < series.size(); ++s) series[s].values.push_back(aligned[s]);
            }
        } catch (const Error& e) {
            throw Error("snapshot " + std::to_string(k) + ": " + e.what());
        }
    }
    return series;
}

}  // namespace sslstm
