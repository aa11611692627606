#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sslstm/embedding.hpp"
#include "sslstm/subspace.hpp"

using namespace sslstm;

namespace {

// Multi-source array-style window: rows indexed by element, columns by
// observation, element response (1, V, V^2, ...) per source.
Eigen::MatrixXcd source_window(const std::vector<Complex>& modes,
                               const std::vector<Eigen::VectorXcd>& waveforms, int rows) {
    const long cols = waveforms.front().size();
    Eigen::MatrixXcd window = Eigen::MatrixXcd::Zero(rows, cols);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        Eigen::VectorXcd steering(rows);
        Complex p(1.0, 0.0);
        for (int r = 0; r < rows; ++r) {
            steering(r) = p;
            p *= modes[i];
        }
        window += steering * waveforms[i].transpose();
    }
    return window;
}

Eigen::VectorXcd random_waveform(long length, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    Eigen::VectorXcd w(length);
    for (long t = 0; t < length; ++t) w(t) = Complex(dist(rng), dist(rng));
    return w;
}

// Largest principal angle between span(U) and the span of the steering
// vectors, via singular values of Q_a^H Q_u.
double principal_angle(const Eigen::MatrixXcd& basis, const std::vector<Complex>& modes) {
    const long rows = basis.rows();
    Eigen::MatrixXcd steering(rows, modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        Complex p(1.0, 0.0);
        for (long r = 0; r < rows; ++r) {
            steering(r, i) = p;
            p *= modes[i];
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(steering);
    Eigen::MatrixXcd qa = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, modes.size());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(qa.adjoint() * basis);
    const double cosine = std::min(1.0, svd.singularValues().minCoeff());
    return std::acos(cosine);
}

Eigen::MatrixXcd series_window(const std::vector<double>& x, int rows, int cols) {
    Eigen::MatrixXcd w(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = Complex(x[r + c], 0.0);
    return w;
}

}  // namespace

TEST_CASE("sample correlation basics") {
    Eigen::MatrixXcd zeros = Eigen::MatrixXcd::Zero(4, 6);
    CHECK(sample_correlation(zeros).data.norm() == doctest::Approx(0.0));

    Eigen::VectorXcd v(3);
    v << Complex(1, 1), Complex(0, 2), Complex(-1, 0);
    auto r = sample_correlation(v);
    CHECK(r.data.isApprox(v * v.adjoint(), 1e-14));
    CHECK(r.sample_count == 1);

    Eigen::MatrixXcd empty(0, 0);
    CHECK_THROWS_AS(sample_correlation(empty), EmptyInput);
}

TEST_CASE("white-noise correlation approaches the identity") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd snapshot(6, 1000);
    for (long r = 0; r < 6; ++r)
        for (long c = 0; c < 1000; ++c) snapshot(r, c) = Complex(dist(rng), dist(rng));
    auto corr = sample_correlation(snapshot);
    for (long i = 0; i < 6; ++i) {
        CHECK(corr.data(i, i).real() == doctest::Approx(1.0).epsilon(0.2));
        for (long j = 0; j < 6; ++j)
            if (i != j) CHECK(std::abs(corr.data(i, j)) < 0.15);
    }
}

TEST_CASE("smoothing with degree 1 equals the first sub-array correlation") {
    std::mt19937_64 rng(5);
    std::vector<Complex> modes{std::polar(1.0, 0.4)};
    auto window = source_window(modes, {random_waveform(50, rng)}, 12);
    auto smoothed = spatial_smooth(window, 8, 1);
    auto direct = sample_correlation(window.topRows(8));
    CHECK(smoothed.data.isApprox(direct.data, 1e-12));
}

TEST_CASE("smoothing restores the rank lost to coherent sources") {
    std::mt19937_64 rng(17);
    // Both sources share one waveform: perfectly coherent.
    const Eigen::VectorXcd shared = random_waveform(200, rng);
    std::vector<Complex> modes{std::polar(1.0, 0.3), std::polar(1.0, 1.1)};
    auto window = source_window(modes, {shared, 0.7 * shared}, 16);

    auto rank1 = spatial_smooth(window, 8, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s1(rank1.data);
    const auto& ev1 = s1.eigenvalues();
    CHECK(ev1(7) / std::max(ev1(6), 1e-300) > 1e6);  // rank 1

    auto rank2 = spatial_smooth(window, 8, 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s2(rank2.data);
    const auto& ev2 = s2.eigenvalues();
    CHECK(ev2(7) / std::max(ev2(6), 1e-300) < 1e6);   // second eigenvalue live
    CHECK(ev2(6) / std::max(ev2(5), 1e-300) > 1e6);   // but rank exactly 2
}

TEST_CASE("three incoherent sources give exactly three large eigenvalues") {
    std::mt19937_64 rng(23);
    std::vector<Complex> modes{std::polar(1.0, 0.2), std::polar(1.0, 0.9), std::polar(1.0, 1.7)};
    auto window = source_window(
        modes, {random_waveform(300, rng), random_waveform(300, rng), random_waveform(300, rng)},
        14);
    auto smoothed = spatial_smooth(window, 8, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(smoothed.data);
    const auto& ev = solver.eigenvalues();
    for (int k = 0; k < 5; ++k) CHECK(ev(k) < 1e-6 * ev(7));
    for (int k = 5; k < 8; ++k) CHECK(ev(k) > 1e-6 * ev(7));
}

TEST_CASE("smoothing errors and invariants") {
    Eigen::MatrixXcd window = Eigen::MatrixXcd::Random(10, 20);
    CHECK_THROWS_AS(spatial_smooth(window, 8, 4), InsufficientRows);
    auto r = spatial_smooth(window, 6, 5);
    CHECK((r.data - r.data.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(r.data);
    CHECK(solver.eigenvalues().minCoeff() > -1e-8 * solver.eigenvalues().maxCoeff());
}

TEST_CASE("identity correlation has no usable eigengap") {
    CorrelationMatrix corr;
    corr.data = Eigen::MatrixXcd::Identity(3, 3);
    corr.sample_count = 3;
    CHECK_THROWS_AS(split_subspace(corr, ModelOrderRule::fixed(1)), DegenerateSpectrum);
}

TEST_CASE("diagonal correlation splits on the energy rule") {
    CorrelationMatrix corr;
    corr.data = Eigen::Vector3cd(5.0, 1e-9, 1e-9).asDiagonal();
    corr.sample_count = 10;
    auto split = split_subspace(corr, ModelOrderRule::energy(0.95));
    CHECK(split.model_order == 1);
    CHECK(std::abs(split.signal_basis(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(split.signal_basis(1, 0)) < 1e-12);
    CHECK((split.signal_basis.adjoint() * split.signal_basis)
              .isApprox(Eigen::MatrixXcd::Identity(1, 1), 1e-8));
}

TEST_CASE("signal subspace spans the steering vectors") {
    std::mt19937_64 rng(41);
    const Eigen::VectorXcd shared = random_waveform(400, rng);
    std::vector<Complex> modes{std::polar(1.0, 0.5), std::polar(1.0, 1.4)};
    auto window = source_window(modes, {shared, Complex(0.3, 0.4) * shared}, 20);
    auto smoothed = spatial_smooth(window, 10, 8);
    auto split = split_subspace(smoothed, ModelOrderRule::fixed(2));
    CHECK(principal_angle(split.signal_basis, modes) < 1e-6);
    // signal and noise bases are orthogonal complements
    CHECK((split.signal_basis.adjoint() * split.noise_basis).norm() < 1e-8);
}

TEST_CASE("geometric decay series recovers its ratio") {
    std::vector<double> x(80);
    for (int t = 0; t < 80; ++t) x[t] = std::pow(0.98, t);
    auto window = series_window(x, 30, 40);
    auto smoothed = spatial_smooth(window, 10, 10);
    auto split = split_subspace(smoothed, ModelOrderRule::fixed(1));
    auto features = esprit_features(split, 1.0);
    REQUIRE(features.size() == 1);
    CHECK(std::abs(features[0].value - Complex(0.98, 0.0)) < 1e-6);
    CHECK(features[0].frequency == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(features[0].growth == doctest::Approx(std::log(0.98)).epsilon(1e-6));
}

TEST_CASE("complex rotation recovers frequency") {
    std::mt19937_64 rng(3);
    std::vector<Complex> modes{std::polar(1.0, 0.3)};
    auto window = source_window(modes, {random_waveform(60, rng)}, 16);
    auto smoothed = spatial_smooth(window, 8, 6);
    auto split = split_subspace(smoothed, ModelOrderRule::fixed(1));
    auto features = esprit_features(split, 1.0);
    REQUIRE(features.size() == 1);
    CHECK(std::abs(features[0].value - std::polar(1.0, 0.3)) < 1e-6);
    CHECK(features[0].growth == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(features[0].frequency == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("real sinusoid yields a conjugate pair on the unit circle") {
    std::vector<double> x(100);
    for (int t = 0; t < 100; ++t) x[t] = std::cos(0.4 * t);
    auto window = series_window(x, 40, 50);
    auto smoothed = spatial_smooth(window, 12, 12);
    auto split = split_subspace(smoothed, ModelOrderRule::fixed(2));
    auto features = esprit_features(split, 1.0);
    REQUIRE(features.size() == 2);
    CHECK(std::abs(std::abs(features[0].value) - 1.0) < 1e-6);
    CHECK(std::abs(std::abs(features[1].value) - 1.0) < 1e-6);
    const double f0 = std::abs(features[0].frequency);
    const double f1 = std::abs(features[1].frequency);
    CHECK(f0 == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(f1 == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(features[0].frequency == doctest::Approx(-features[1].frequency).epsilon(1e-6));
}

TEST_CASE("noise-free mixtures are recovered exactly") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> mag(0.9, 1.05);
    std::uniform_real_distribution<double> phase(0.1, 2.8);
    for (int m = 1; m <= 4; ++m) {
        std::vector<Complex> modes;
        std::vector<Eigen::VectorXcd> waveforms;
        for (int i = 0; i < m; ++i) {
            modes.push_back(std::polar(mag(rng), phase(rng) * (i + 1) / m));
            waveforms.push_back(random_waveform(100, rng));
        }
        auto window = source_window(modes, waveforms, 20);
        auto smoothed = spatial_smooth(window, 10, 8);
        auto split = split_subspace(smoothed, ModelOrderRule::fixed(m));
        auto features = esprit_features(split, 1.0);
        REQUIRE(static_cast<int>(features.size()) == m);
        // nearest-pair matching
        std::vector<bool> used(m, false);
        for (const auto& f : features) {
            double best = 1e9;
            int arg = -1;
            for (int i = 0; i < m; ++i) {
                if (used[i]) continue;
                if (std::abs(f.value - modes[i]) < best) {
                    best = std::abs(f.value - modes[i]);
                    arg = i;
                }
            }
            used[arg] = true;
            CHECK(best < 1e-6);
        }
    }
}

TEST_CASE("mild noise perturbs recovered magnitudes mildly") {
    std::mt19937_64 rng(2718);
    std::normal_distribution<double> noise_dist;
    int failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Complex> modes{std::polar(1.0, 0.6), std::polar(1.0, 1.5)};
        auto window =
            source_window(modes, {random_waveform(300, rng), random_waveform(300, rng)}, 16);
        const double signal_power = window.squaredNorm() / window.size();
        const double sigma = std::sqrt(signal_power * 1e-4 / 2.0);  // 40 dB SNR
        for (long r = 0; r < window.rows(); ++r)
            for (long c = 0; c < window.cols(); ++c)
                window(r, c) += Complex(sigma * noise_dist(rng), sigma * noise_dist(rng));
        auto split = split_subspace(spatial_smooth(window, 8, 6), ModelOrderRule::fixed(2));
        for (const auto& f : esprit_features(split, 1.0))
            if (std::abs(std::abs(f.value) - 1.0) >= 1e-2) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("identical snapshots give constant feature series") {
    std::mt19937_64 rng(11);
    std::vector<Complex> modes{std::polar(1.0, 0.7)};
    auto window = source_window(modes, {random_waveform(40, rng)}, 12);
    SnapshotSet set;
    set.window_length = 12;
    set.step = 1;
    Eigen::MatrixXd real_window = window.real();
    // complex windows are not representable in SnapshotSet; use a real one
    std::vector<double> x(60);
    for (int t = 0; t < 60; ++t) x[t] = std::cos(0.7 * t) + 0.3 * std::cos(1.9 * t);
    Eigen::MatrixXd snap = series_window(x, 16, 20).real();
    for (int k = 0; k < 5; ++k) set.snapshots.push_back(snap);

    ExtractionConfig cfg;
    cfg.order = ModelOrderRule::fixed(4);
    auto series = extract_feature_series(set, cfg);
    REQUIRE(series.size() == 4);
    for (const auto& s : series) {
        REQUIRE(s.values.size() == 5);
        for (const auto& v : s.values) CHECK(std::abs(v - s.values.front()) < 1e-10);
    }
}

TEST_CASE("feature series length equals snapshot count") {
    std::vector<double> x(260);
    for (int t = 0; t < 260; ++t) x[t] = std::cos(0.35 * t) + 0.01 * t;
    TimeSeries ts{x, 1.0};
    auto traj = build_trajectory_matrix(ts, {.d = 20, .tau = 1});
    auto snaps = build_snapshots(traj, 40, 1);
    ExtractionConfig cfg;
    cfg.order = ModelOrderRule::fixed(3);
    auto series = extract_feature_series(snaps, cfg);
    REQUIRE(!series.empty());
    for (const auto& s : series) CHECK(s.values.size() == snaps.size());
}

TEST_CASE("increasing damping shows up as decreasing feature magnitude") {
    std::vector<double> x(400);
    for (int t = 0; t < 400; ++t) x[t] = std::exp(-0.00005 * t * t) * std::cos(0.3 * t);
    TimeSeries ts{x, 1.0};
    auto traj = build_trajectory_matrix(ts, {.d = 24, .tau = 1});
    auto snaps = build_snapshots(traj, 48, 1);
    ExtractionConfig cfg;
    cfg.order = ModelOrderRule::fixed(2);
    auto series = extract_feature_series(snaps, cfg);
    REQUIRE(series.size() == 2);
    for (const auto& s : series) {
        for (std::size_t k = 1; k < s.values.size(); ++k)
            CHECK(std::abs(s.values[k]) <= std::abs(s.values[k - 1]) + 1e-3);
    }
}
