#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qmem/analysis.hpp"
#include "qmem/errors.hpp"
#include "qmem/noise.hpp"
#include "qmem/sde.hpp"

using namespace qmem;

namespace {

std::vector<HysteresisSample> circle_samples(int n, double t0 = 0.0, double periods = 1.0,
                                             bool mirrored = false, double center = 0.0) {
    std::vector<HysteresisSample> s(n);
    for (int k = 0; k < n; ++k) {
        const double t = periods * kTwoPi * k / (n - 1);
        const double v = mirrored ? center - std::cos(t) : center + std::cos(t);
        s[k] = {t0 + t, v, std::sin(t), 0.0, 0.0, 0.0};
    }
    return s;
}

GaussianState fig3_init() { return GaussianState{20.0, 0.0, 0.5, 0.5, 0.0, 0.0}; }

}  // namespace

TEST_CASE("hysteresis area of a unit circle") {
    const HysteresisCurve curve = hysteresis_from_samples(circle_samples(1000));
    CHECK(curve.total_area == doctest::Approx(std::numbers::pi).epsilon(1e-4));
    CHECK(curve.total_area_se == 0.0);
}

TEST_CASE("a segment traversed forth and back encloses nothing") {
    std::vector<HysteresisSample> s;
    const int n = 101;
    for (int k = 0; k < n; ++k) {
        const double v = -1.0 + 2.0 * k / (n - 1);
        s.push_back({static_cast<double>(k), v, 0.3 * v, 0.0, 0.0, 0.0});
    }
    for (int k = 1; k < n; ++k) {
        const double v = 1.0 - 2.0 * k / (n - 1);
        s.push_back({static_cast<double>(n - 1 + k), v, 0.3 * v, 0.0, 0.0, 0.0});
    }
    CHECK(hysteresis_from_samples(s).total_area < 1e-12);
}

TEST_CASE("figure-eight lobes add up by absolute value") {
    // two unit circles through the origin with opposite orientation
    std::vector<HysteresisSample> s;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
        const double t = kTwoPi * k / (n - 1);
        s.push_back({t, std::cos(t) - 1.0, std::sin(t), 0.0, 0.0, 0.0});
    }
    for (int k = 1; k < n; ++k) {
        const double t = kTwoPi * k / (n - 1);
        s.push_back({kTwoPi + t, 1.0 - std::cos(t), std::sin(t), 0.0, 0.0, 0.0});
    }
    const HysteresisCurve curve = hysteresis_from_samples(s);
    CHECK(curve.total_area == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-4));
    // the two main lobes have opposite signed areas
    double max_area = 0.0;
    double min_area = 0.0;
    for (const Lobe& l : curve.lobes) {
        max_area = std::max(max_area, l.signed_area);
        min_area = std::min(min_area, l.signed_area);
    }
    CHECK(max_area == doctest::Approx(std::numbers::pi).epsilon(1e-3));
    CHECK(min_area == doctest::Approx(-std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("time reversal flips lobe signs but keeps the total area") {
    const auto samples = circle_samples(500);
    const HysteresisCurve fwd = hysteresis_from_samples(samples);
    auto reversed = samples;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        reversed[k].v = samples[samples.size() - 1 - k].v;
        reversed[k].i = samples[samples.size() - 1 - k].i;
    }
    const HysteresisCurve bwd = hysteresis_from_samples(reversed);
    CHECK(bwd.total_area == doctest::Approx(fwd.total_area).epsilon(1e-12));
    REQUIRE(bwd.lobes.size() == fwd.lobes.size());
    for (std::size_t k = 0; k < fwd.lobes.size(); ++k)
        CHECK(bwd.lobes[k].signed_area ==
              doctest::Approx(-fwd.lobes[fwd.lobes.size() - 1 - k].signed_area).epsilon(1e-10));
}

TEST_CASE("lobes partition the record") {
    const HysteresisCurve curve = hysteresis_from_samples(circle_samples(300, 0.0, 2.0));
    CHECK(curve.lobes.front().t_start == curve.samples.front().t);
    CHECK(curve.lobes.back().t_end == curve.samples.back().t);
    for (std::size_t k = 0; k + 1 < curve.lobes.size(); ++k)
        CHECK(curve.lobes[k].t_end == curve.lobes[k + 1].t_start);
}

TEST_CASE("degenerate curves are rejected") {
    CHECK_THROWS_AS(hysteresis_from_samples(std::vector<HysteresisSample>{
                        {0.0, 1.0, 0.0}, {1.0, 0.5, 0.2}, {2.0, -0.5, 0.1}}),
                    DegenerateCurve);
    std::vector<HysteresisSample> positive;
    for (int k = 0; k < 10; ++k)
        positive.push_back({static_cast<double>(k), 1.0 + k, 0.5, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(hysteresis_from_samples(positive), DegenerateCurve);
}

TEST_CASE("first-period restriction") {
    const HysteresisCurve two = hysteresis_from_samples(circle_samples(2001, 0.0, 2.0));
    CHECK(two.total_area == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-4));
    CHECK(first_period_area(two).area == doctest::Approx(std::numbers::pi).epsilon(1e-4));

    const HysteresisCurve half = hysteresis_from_samples(circle_samples(500, 0.0, 0.51));
    CHECK_THROWS_AS(first_period_area(half), DegenerateCurve);
}

TEST_CASE("classical loop area is positive and step-size converged") {
    SimParams p;
    p.tau = 0.2;
    p.t_final = kTwoPi + 0.01;
    auto area_at = [&](double dt, std::int64_t stride) {
        SimParams run = p;
        run.dt = dt;
        run.record_stride = stride;
        const auto samples = integrate_classical(run, {20.0, 0.0, 0.0});
        std::vector<HysteresisSample> hs(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k)
            hs[k] = {samples[k].t, samples[k].state.q, samples[k].i_m, 0.0, 0.0, 0.0};
        return first_period_area(hysteresis_from_samples(hs)).area;
    };
    const double coarse = area_at(1e-3, 1);
    const double fine = area_at(1e-4, 10);
    CHECK(coarse > 0.0);
    CHECK(std::abs(coarse - fine) / fine < 1e-4);
}

TEST_CASE("stationary moments match the frozen closed-form values") {
    const StationaryMoments m = stationary_moments(0.1, 10.0, 0.2);
    CHECK(m.c_st == doctest::Approx(oracle::kCSt02).epsilon(1e-12));
    CHECK(m.vq_st == doctest::Approx(oracle::kVqSt02).epsilon(1e-12));
    CHECK(m.vphi_st == doctest::Approx(oracle::kVphiSt02).epsilon(1e-12));
    CHECK(m.c_st < 0.0);
}

TEST_CASE("stationary moments agree with relaxing the moment equations") {
    const StationaryMoments m = stationary_moments(0.1, 10.0, 0.2);
    const oracle::Moments relaxed =
        oracle::integrate_frozen_moments({0.5, 0.5, 0.0}, 0.1, 10.0, 0.2, 1e-3, 200.0);
    CHECK(relaxed.cov == doctest::Approx(m.c_st).epsilon(1e-6));
    CHECK(relaxed.var_q == doctest::Approx(m.vq_st).epsilon(1e-6));
    CHECK(relaxed.var_phi == doctest::Approx(m.vphi_st).epsilon(1e-6));
}

TEST_CASE("stationary moments limits") {
    const StationaryMoments weak = stationary_moments(0.1, 10.0, 1e-8);
    CHECK(std::abs(weak.c_st) < 1e-6);
    CHECK(weak.vq_st == doctest::Approx(10.0).epsilon(1e-4));  // thermal variance

    const StationaryMoments strong = stationary_moments(0.1, 10.0, 4.0);
    CHECK(strong.vq_st == doctest::Approx(oracle::kVqSt4).epsilon(1e-12));
    CHECK(strong.vq_st < 0.5);  // squeezed below vacuum
}

TEST_CASE("noise sum values and divergences") {
    CHECK(noise_sum(0.2, 0.1, 10.0) == doctest::Approx(oracle::kNoiseSum02).epsilon(1e-12));
    CHECK(noise_sum(10.0, 0.1, 10.0) == doctest::Approx(oracle::kNoiseSum10).epsilon(1e-9));
    CHECK(noise_sum(100.0, 0.1, 10.0) == doctest::Approx(oracle::kNoiseSum100).epsilon(1e-9));
    CHECK(noise_sum(1e-8, 0.1, 10.0) > 1e3);
    CHECK(noise_sum(10.0, 0.1, 10.0) > noise_sum(0.2, 0.1, 10.0));
    CHECK(noise_sum(100.0, 0.1, 10.0) > noise_sum(10.0, 0.1, 10.0));
}

TEST_CASE("optimal projection frequency") {
    const TauOptReport report = optimize_tau(0.1, 10.0);
    CHECK(!report.grid_fallback);
    CHECK(report.tau_opt > 0.15);
    CHECK(report.tau_opt < 0.25);
    for (const auto& [tau, d] : report.samples) CHECK(report.d_min <= d + 1e-12);

    const double grid = oracle::grid_minimum(
        [](double t) { return noise_sum(t, 0.1, 10.0); }, 1e-3, 10.0, 10000);
    CHECK(report.tau_opt == doctest::Approx(grid).epsilon(5e-3));
}

TEST_CASE("optimizer shifts with the thermal frequency") {
    const TauOptReport cold = optimize_tau(0.1, 1.0);
    const double grid = oracle::grid_minimum(
        [](double t) { return noise_sum(t, 0.1, 1.0); }, 1e-3, 10.0, 10000);
    CHECK(cold.tau_opt == doctest::Approx(grid).epsilon(5e-3));
    CHECK(std::abs(cold.tau_opt - optimize_tau(0.1, 10.0).tau_opt) > 0.01);
}

TEST_CASE("optimizer is stable under bracket halving") {
    const TauOptReport wide = optimize_tau(0.1, 10.0);
    const TauOptReport narrow =
        optimize_tau(0.1, 10.0, {0.5 * wide.tau_opt, 2.0 * wide.tau_opt});
    CHECK(narrow.tau_opt == doctest::Approx(wide.tau_opt).epsilon(1e-3));
}

TEST_CASE("boundary minimum falls back to the scan") {
    const TauOptReport report = optimize_tau(0.1, 10.0, {1.0, 10.0});
    CHECK(report.grid_fallback);
    CHECK(report.tau_opt == doctest::Approx(1.0));
    CHECK_THROWS_AS(optimize_tau(0.1, 10.0, {-1.0, 2.0}), ConfigError);
}

TEST_CASE("collapse time") {
    EnsembleStats stats;
    stats.times = {0.0, 1.0, 2.0};
    stats.var_mu = {0.0, 10.0, 50.0};
    const auto t = collapse_time(stats);
    REQUIRE(t.has_value());
    const double w = (kTwoPi - std::sqrt(10.0)) / (std::sqrt(50.0) - std::sqrt(10.0));
    CHECK(*t == doctest::Approx(1.0 + w).epsilon(1e-12));

    stats.var_mu = {0.0, 1.0, 2.0};
    CHECK(!collapse_time(stats).has_value());
}

TEST_CASE("collapse never happens with a frozen state variable") {
    SimParams p;
    p.tau = 0.2;
    p.nu = 0.0;
    p.n_traj = 50;
    p.t_final = 4.0;
    const EnsembleStats stats = run_ensemble(p, fig3_init());
    for (double v : stats.var_mu) CHECK(v == 0.0);
    CHECK(!collapse_time(stats).has_value());
}

TEST_CASE("memory window ratios") {
    SimParams p;
    p.tau = 0.2;
    MemoryWindowReport r = memory_window_check(p, 20.0, kTwoPi, 1.53, -0.175);
    CHECK(r.r1 == doctest::Approx(1.6 * 1.53 * kTwoPi / (4.0 * std::numbers::pi * std::numbers::pi))
                      .epsilon(1e-12));
    CHECK(r.r1 == doctest::Approx(0.39).epsilon(0.01));
    CHECK(!r.ok1);
    CHECK(r.ok3);  // t_c / (8 tau m) ~ 0.1 at tau = 0.2

    p.tau = 4.0;
    r = memory_window_check(p, 20.0, kTwoPi, 0.387, -0.47);
    CHECK(r.r3 == doctest::Approx(0.005).epsilon(0.01));
    CHECK(r.ok3);
    CHECK(!r.ok1);  // back-action dominated

    r = memory_window_check(p, 20.0, 1e-12, 0.387, -0.47);
    CHECK(r.ok1);
    CHECK(r.ok2);
    CHECK(r.ok3);
}

TEST_CASE("localization window") {
    const auto [lo, hi] = localization_window(20.0);
    CHECK(lo == 0.005);
    CHECK(hi == 1600.0);
    const auto [lo1, hi1] = localization_window(1.0);
    CHECK(lo1 == 2.0);
    CHECK(hi1 == 4.0);
    // the weak-measurement regime sits exactly at the lower edge
    CHECK(lo == 0.005);
}

TEST_CASE("squeezing crossings on a constructed record") {
    TrajectoryRecord rec;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kTwoPi * k / (n - 1);
        GaussianState s;
        s.var_q = 0.5 + 0.2 * std::sin(t);
        s.var_phi = 0.5;
        rec.times.push_back(t);
        rec.states.push_back(s);
        rec.gammas.push_back(0.1);
    }
    const std::vector<double> crossings = squeezing_crossings(rec);
    REQUIRE(crossings.size() >= 3);
    for (std::size_t k = 0; k < crossings.size(); ++k)
        CHECK(crossings[k] == doctest::Approx((k + 1) * std::numbers::pi).epsilon(1e-6));

    for (auto& s : rec.states) s.var_q = s.var_phi;  // identical variances: no crossing
    CHECK(squeezing_crossings(rec).empty());
}

TEST_CASE("a weakly measured cold state swaps its squeezing axis") {
    // low-thermal regime: lambda=0.5, gamma0=0.01, tau=0.05, initial V_q=0.3,
    // V_phi=0.9 (tau chosen weak enough that the axis swaps before the
    // measurement mixes the variances into their stationary values)
    SimParams p;
    p.gamma0 = 0.01;
    p.epsilon = 0.0;
    p.lambda = 0.5;
    p.nu = 0.1;
    p.tau = 0.05;
    p.t_final = 2.0 * kTwoPi;
    p.record_stride = 1;
    GaussianState init;
    init.var_q = 0.3;
    init.var_phi = 0.9;
    NoiseStream noise(5, 0);
    const TrajectoryRecord rec = integrate_trajectory(p, init, noise);
    const std::vector<double> crossings = squeezing_crossings(rec);
    CHECK(crossings.size() >= 2);

    // cross-check the first crossing against an independent integration of
    // the deterministic second-moment equations
    oracle::Moments m{0.9, 0.3, 0.0};
    double t_oracle = -1.0;
    const double dt = 1e-4;
    double prev = m.var_q - m.var_phi;
    for (int k = 1; k * dt < 2.0 * kTwoPi; ++k) {
        m = oracle::integrate_frozen_moments(m, p.gamma0, p.lambda, p.tau, dt, dt);
        const double cur = m.var_q - m.var_phi;
        if (prev < 0.0 && cur >= 0.0) {
            t_oracle = k * dt;
            break;
        }
        prev = cur;
    }
    REQUIRE(t_oracle > 0.0);
    CHECK(crossings.front() == doctest::Approx(t_oracle).epsilon(1e-2));
}

TEST_CASE("coupled-path convergence study") {
    SimParams p;
    p.tau = 0.2;
    p.n_traj = 200;
    p.t_final = kTwoPi;
    const std::vector<double> dts = {4e-3, 2e-3, 1e-3};
    const ConvergenceReport report = convergence_study(p, fig3_init(), dts);
    REQUIRE(report.dts.size() == 2);
    CHECK(report.max_gamma_gaps[0] > report.max_gamma_gaps[1]);
    CHECK(report.monotone);
}

TEST_CASE("convergence study with frozen gamma sees no gap") {
    SimParams p;
    p.tau = 0.2;
    p.epsilon = 0.0;
    p.n_traj = 50;
    p.t_final = 2.0;
    const std::vector<double> dts = {4e-3, 2e-3, 1e-3};
    const ConvergenceReport report = convergence_study(p, fig3_init(), dts);
    for (double gap : report.max_gamma_gaps) CHECK(gap < 1e-13);
}

TEST_CASE("convergence study input validation") {
    SimParams p;
    const std::vector<double> single = {1e-3};
    CHECK_THROWS_AS(convergence_study(p, fig3_init(), single), ConfigError);
    const std::vector<double> ascending = {1e-3, 2e-3};
    CHECK_THROWS_AS(convergence_study(p, fig3_init(), ascending), ConfigError);
    const std::vector<double> incommensurate = {3.1e-3, 1e-3, 7e-4};
    CHECK_THROWS_AS(convergence_study(p, fig3_init(), incommensurate), ConfigError);
}

TEST_CASE("deviation at crossings of a constructed ensemble") {
    EnsembleStats stats;
    const int n = 1000;
    const double shift = 0.025;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kTwoPi * k / (n - 1);
        stats.times.push_back(t);
        stats.e_q.push_back(std::sin(t));
        stats.e_gamma.push_back(0.1);
        stats.e_gamma_q.push_back(0.1 * std::sin(t) + shift);
        stats.e_gamma_q2.push_back(1.0);
        stats.var_mu.push_back(0.0);
        stats.se_q.push_back(0.01);
        stats.se_gamma.push_back(0.001);
        stats.se_gamma_q.push_back(0.002);
        stats.cov_q_gamma_q.push_back(0.0);
    }
    const auto crossings = deviation_at_crossings(stats);
    REQUIRE(crossings.size() >= 3);
    for (std::size_t k = 0; k < crossings.size(); ++k) {
        CHECK(crossings[k].time == doctest::Approx((k + 1) * std::numbers::pi).epsilon(1e-4));
        CHECK(crossings[k].delta == doctest::Approx(shift).epsilon(1e-6));
        CHECK(crossings[k].se > 0.0);
    }
}
