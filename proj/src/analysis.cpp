#include "qmem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "qmem/errors.hpp"
#include "qmem/sde.hpp"

namespace qmem {

namespace {

// A zero of the value series: either exactly at sample `seg` (w == 0) or on
// the segment (seg, seg+1) at interpolation weight w in (0, 1).
struct ZeroCrossing {
    std::size_t seg;
    double w;
    double t;
};

std::vector<ZeroCrossing> find_zero_crossings(std::span<const double> times,
                                              std::span<const double> values) {
    std::vector<ZeroCrossing> out;
    const std::size_t n = values.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = values[k];
        const double b = values[k + 1];
        if (a == 0.0) {
            // an exact zero ends the current lobe at the sample itself
            if (k > 0) out.push_back({k, 0.0, times[k]});
        } else if (a * b < 0.0) {
            const double w = a / (a - b);
            out.push_back({k, w, times[k] + w * (times[k + 1] - times[k])});
        }
    }
    return out;
}

double shoelace_path(std::span<const double> x, std::span<const double> y) {
    double twice = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k)
        twice += x[k] * y[k + 1] - x[k + 1] * y[k];
    return 0.5 * twice;
}

// Delta-method variance of the total area over the sample path. Lobe
// orientation signs cancel (every term is quadratic within one lobe), so the
// gradient can be taken on the raw path; distinct times are treated as
// independent, the per-time (v, i) covariance is kept.
double area_variance(std::span<const HysteresisSample> s) {
    const std::size_t n = s.size();
    double var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ip = k + 1 < n ? s[k + 1].i : s[k].i;
        const double im = k > 0 ? s[k - 1].i : s[k].i;
        const double vp = k + 1 < n ? s[k + 1].v : s[k].v;
        const double vm = k > 0 ? s[k - 1].v : s[k].v;
        const double da_dv = 0.5 * (ip - im);
        const double da_di = 0.5 * (vm - vp);
        var += da_dv * da_dv * s[k].se_v * s[k].se_v + da_di * da_di * s[k].se_i * s[k].se_i +
               2.0 * da_dv * da_di * s[k].cov_vi;
    }
    return std::max(var, 0.0);
}

std::vector<Lobe> partition_lobes(std::span<const HysteresisSample> s) {
    std::vector<double> ts(s.size()), vs(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        ts[k] = s[k].t;
        vs[k] = s[k].v;
    }
    const auto crossings = find_zero_crossings(ts, vs);
    if (crossings.empty()) throw DegenerateCurve("hysteresis curve has no zero crossing");

    std::vector<double> xs{s[0].v};
    std::vector<double> ys{s[0].i};
    double t_start = s[0].t;
    std::vector<Lobe> lobes;
    std::size_t next = 0;
    auto close_lobe = [&](double t_end) {
        lobes.push_back({t_start, t_end, shoelace_path(xs, ys)});
        t_start = t_end;
    };
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (next < crossings.size() && crossings[next].seg == k) {
            const ZeroCrossing& c = crossings[next++];
            if (c.w == 0.0) {
                // boundary is the sample itself (already the last path point)
                const double i_here = ys.back();
                close_lobe(c.t);
                xs.assign(1, 0.0);
                ys.assign(1, i_here);
            } else {
                const double ic = s[k].i + c.w * (s[k + 1].i - s[k].i);
                xs.push_back(0.0);
                ys.push_back(ic);
                close_lobe(c.t);
                xs.assign(1, 0.0);
                ys.assign(1, ic);
            }
        }
        xs.push_back(s[k + 1].v);
        ys.push_back(s[k + 1].i);
    }
    close_lobe(s.back().t);
    return lobes;
}

std::vector<HysteresisSample> clip_to(std::span<const HysteresisSample> s, double t_max) {
    std::vector<HysteresisSample> out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k].t <= t_max + 1e-12) {
            out.push_back(s[k]);
        } else {
            if (k == 0) break;
            const HysteresisSample& a = s[k - 1];
            const HysteresisSample& b = s[k];
            const double w = (t_max - a.t) / (b.t - a.t);
            out.push_back({t_max, a.v + w * (b.v - a.v), a.i + w * (b.i - a.i),
                           a.se_v + w * (b.se_v - a.se_v), a.se_i + w * (b.se_i - a.se_i),
                           a.cov_vi + w * (b.cov_vi - a.cov_vi)});
            break;
        }
    }
    return out;
}

double golden_section(double a, double b, const std::function<double(double)>& f,
                      double rel_tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > rel_tol * b) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

HysteresisCurve hysteresis_from_samples(std::vector<HysteresisSample> samples) {
    if (samples.size() < 4) throw DegenerateCurve("hysteresis curve needs at least 4 samples");
    HysteresisCurve curve;
    curve.samples = std::move(samples);
    curve.lobes = partition_lobes(curve.samples);
    curve.total_area = 0.0;
    for (const Lobe& l : curve.lobes) curve.total_area += std::abs(l.signed_area);
    curve.total_area_se = std::sqrt(area_variance(curve.samples));
    return curve;
}

HysteresisCurve hysteresis_curve(const EnsembleStats& stats) {
    std::vector<HysteresisSample> samples(stats.times.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        samples[k] = {stats.times[k],      stats.e_q[k],  stats.e_gamma_q[k],
                      stats.se_q[k],       stats.se_gamma_q[k],
                      stats.cov_q_gamma_q[k]};
    return hysteresis_from_samples(std::move(samples));
}

AreaEstimate first_period_area(const HysteresisCurve& curve, double period) {
    if (curve.samples.empty() || curve.samples.back().t + 1e-9 < period)
        throw DegenerateCurve("hysteresis curve spans less than one period");
    const std::vector<HysteresisSample> clipped = clip_to(curve.samples, period);
    if (clipped.size() < 4) throw DegenerateCurve("hysteresis curve needs at least 4 samples");
    const std::vector<Lobe> lobes = partition_lobes(clipped);
    AreaEstimate est;
    for (const Lobe& l : lobes) est.area += std::abs(l.signed_area);
    est.se = std::sqrt(area_variance(clipped));
    return est;
}

StationaryMoments stationary_moments(double gamma0, double lambda, double tau) {
    const double c = -(std::sqrt(1.0 + 16.0 * tau * tau) - 1.0) / (8.0 * tau);
    const double vq =
        (std::sqrt(gamma0 * gamma0 + 4.0 * tau * (2.0 * gamma0 * lambda - c)) - gamma0) /
        (4.0 * tau);
    const double vphi = vq - c * (2.0 * gamma0 + 8.0 * tau * vq);
    return {c, vq, vphi};
}

double noise_sum(double tau, double gamma0, double lambda) {
    const StationaryMoments m = stationary_moments(gamma0, lambda, tau);
    const double root8tau = std::sqrt(8.0 * tau);
    return root8tau * m.vq_st + root8tau * std::abs(m.c_st) + 1.0 / root8tau;
}

TauOptReport optimize_tau(double gamma0, double lambda, std::pair<double, double> bracket) {
    const auto [lo, hi] = bracket;
    if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("tau bracket must satisfy 0 < lo < hi");

    TauOptReport report;
    report.bracket = bracket;

    constexpr int kScan = 200;
    report.samples.reserve(kScan);
    const double ratio = hi / lo;
    for (int j = 0; j < kScan; ++j) {
        const double t = lo * std::pow(ratio, static_cast<double>(j) / (kScan - 1));
        report.samples.emplace_back(t, noise_sum(t, gamma0, lambda));
    }

    std::size_t i_min = 0;
    for (std::size_t j = 1; j < report.samples.size(); ++j)
        if (report.samples[j].second < report.samples[i_min].second) i_min = j;

    int direction_changes = 0;
    int prev_sign = 0;
    for (std::size_t j = 1; j < report.samples.size(); ++j) {
        const double diff = report.samples[j].second - report.samples[j - 1].second;
        const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
        if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++direction_changes;
        if (sign != 0) prev_sign = sign;
    }

    if (direction_changes > 1 || i_min == 0 || i_min + 1 == report.samples.size()) {
        // not unimodal on this bracket (or the minimum sits on the boundary):
        // fall back to the scan minimum
        report.grid_fallback = true;
        report.tau_opt = report.samples[i_min].first;
        report.d_min = report.samples[i_min].second;
        return report;
    }

    report.tau_opt = golden_section(
        lo, hi, [&](double t) { return noise_sum(t, gamma0, lambda); }, 1e-4);
    report.d_min = noise_sum(report.tau_opt, gamma0, lambda);
    return report;
}

std::optional<double> collapse_time(const EnsembleStats& stats) {
    for (std::size_t k = 0; k < stats.var_mu.size(); ++k) {
        const double spread = std::sqrt(stats.var_mu[k]);
        if (spread >= kTwoPi) {
            if (k == 0) return stats.times[0];
            const double prev = std::sqrt(stats.var_mu[k - 1]);
            const double w = (kTwoPi - prev) / (spread - prev);
            return stats.times[k - 1] + w * (stats.times[k] - stats.times[k - 1]);
        }
    }
    return std::nullopt;
}

MemoryWindowReport memory_window_check(const SimParams& params, double q_typical, double t_c,
                                       double vq, double cov, double threshold) {
    const double m = std::min(q_typical * q_typical, 4.0 * std::numbers::pi * std::numbers::pi);
    const double eight_tau = 8.0 * params.tau;
    MemoryWindowReport r{};
    r.r1 = eight_tau * vq * t_c / m;
    r.r2 = eight_tau * std::abs(cov) * t_c / m;
    r.r3 = t_c / (eight_tau * m);
    r.threshold = threshold;
    r.ok1 = r.r1 <= threshold;
    r.ok2 = r.r2 <= threshold;
    r.ok3 = r.r3 <= threshold;
    return r;
}

std::pair<double, double> localization_window(double q_typical) {
    const double s = q_typical * q_typical;
    return {2.0 / s, 4.0 * s};
}

std::vector<double> squeezing_crossings(const TrajectoryRecord& record) {
    std::vector<double> diff(record.states.size());
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff[k] = record.states[k].var_q - record.states[k].var_phi;

    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < diff.size(); ++k) {
        const double a = diff[k];
        const double b = diff[k + 1];
        if (a == 0.0) {
            // count a touching zero only if the sign actually flips across it
            if (k > 0 && k + 1 < diff.size() && diff[k - 1] * b < 0.0)
                out.push_back(record.times[k]);
        } else if (a * b < 0.0) {
            const double w = a / (a - b);
            out.push_back(record.times[k] + w * (record.times[k + 1] - record.times[k]));
        }
    }
    return out;
}

ConvergenceReport convergence_study(const SimParams& params, const GaussianState& init,
                                    std::span<const double> dts, const EnsembleOptions& options) {
    if (dts.size() < 2) throw ConfigError("convergence study needs >= 2 step sizes");
    for (std::size_t i = 0; i + 1 < dts.size(); ++i)
        if (!(dts[i] > dts[i + 1])) throw ConfigError("step sizes must be strictly descending");

    const double dt_min = dts.back();
    std::vector<std::int64_t> mult(dts.size());
    for (std::size_t i = 0; i < dts.size(); ++i) {
        mult[i] = std::llround(dts[i] / dt_min);
        if (mult[i] < 1 || std::abs(mult[i] * dt_min - dts[i]) > 1e-9 * dts[i])
            throw ConfigError("each step size must be an integer multiple of the finest");
        if (mult[0] % mult[i] != 0)
            throw ConfigError("the largest step size must be a multiple of each step size");
    }

    // shared record grid: one sample per coarsest step
    const auto n_rec = static_cast<std::int64_t>(std::floor(params.t_final / dts[0] + 1e-9));

    std::vector<std::vector<double>> gamma_curves(dts.size());
    for (std::size_t i = 0; i < dts.size(); ++i) {
        SimParams p = params;
        p.dt = dts[i];
        p.record_stride = mult[0] / mult[i];
        // land exactly on n_rec * record_stride integration steps
        p.t_final = (static_cast<double>(n_rec * p.record_stride) + 0.5) * p.dt;
        EnsembleOptions opt = options;
        opt.noise_aggregation = static_cast<int>(mult[i]);
        gamma_curves[i] = run_ensemble(p, init, opt).e_gamma;
    }

    ConvergenceReport report;
    for (std::size_t i = 0; i + 1 < dts.size(); ++i) {
        double gap = 0.0;
        for (std::size_t r = 0; r < gamma_curves[i].size(); ++r)
            gap = std::max(gap, std::abs(gamma_curves[i][r] - gamma_curves.back()[r]));
        report.dts.push_back(dts[i]);
        report.max_gamma_gaps.push_back(gap);
    }
    report.monotone = true;
    for (std::size_t i = 0; i + 1 < report.max_gamma_gaps.size(); ++i)
        if (!(report.max_gamma_gaps[i] > report.max_gamma_gaps[i + 1])) report.monotone = false;
    return report;
}

std::vector<CrossingDeviation> deviation_at_crossings(const EnsembleStats& stats) {
    const DeviationSeries dev = factorization_deviation(stats);
    const auto crossings = find_zero_crossings(stats.times, stats.e_q);
    std::vector<CrossingDeviation> out;
    out.reserve(crossings.size());
    for (const ZeroCrossing& c : crossings) {
        const std::size_t k = c.seg;
        out.push_back({c.t, dev.delta[k] + c.w * (dev.delta[k + 1] - dev.delta[k]),
                       dev.se[k] + c.w * (dev.se[k + 1] - dev.se[k])});
    }
    return out;
}

}  // namespace qmem
