#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace qmem {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// All physical and numerical parameters of one experiment. Quantities are
/// adimensional: frequencies in units of the circuit frequency, charge and
/// flux in units of their vacuum fluctuations, time in inverse circuit
/// frequencies.
struct SimParams {
    double gamma0 = 0.1;    ///< mean damping rate
    double epsilon = 0.5;   ///< feedback depth, in [0, 1]
    double lambda = 10.0;   ///< thermal frequency k_B T / hbar
    double nu = 0.1;        ///< memory frequency (state-variable rate per unit charge)
    double tau = 0.2;       ///< projection frequency of the continuous measurement
    double dt = 1e-3;       ///< integration step
    double t_final = 3.0 * kTwoPi;
    std::int64_t n_traj = 3000;
    std::uint64_t master_seed = 1;
    std::int64_t record_stride = 10;  ///< sampling decimation; never changes the step
};

/// Checks all parameter bounds; returns the record unchanged if they hold.
/// Throws ConfigError naming every violated bound.
SimParams validate(const SimParams& params);

/// First and second moments of (flux, charge) plus the memristor state
/// variable mu. This is the per-trajectory conditioned state.
/// mu is deliberately not wrapped modulo 2*pi: the ensemble spread of the
/// unwrapped variable is the collapse diagnostic.
struct GaussianState {
    double mean_phi = 0.0;
    double mean_q = 0.0;
    double var_phi = 0.5;
    double var_q = 0.5;
    double cov = 0.0;
    double mu = 0.0;
};

/// V_phi * V_q - C^2; below 1/4 the state violates the uncertainty
/// relation. Monitored as a warning, not an abort: the high-temperature
/// damping form may transiently leave the physical domain.
inline double uncertainty_product(const GaussianState& s) {
    return s.var_phi * s.var_q - s.cov * s.cov;
}

struct ClassicalState {
    double phi = 0.0;
    double q = 0.0;
    double mu = 0.0;
};

/// Time series of one conditioned trajectory, decimated by record_stride.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<GaussianState> states;
    std::vector<double> gammas;  ///< damping rate at each recorded state
    /// Measurement record averaged over each inter-sample block; one entry
    /// per interval, so size == times.size() - 1 when present.
    std::optional<std::vector<double>> measurement_record;
    std::int64_t uncertainty_violations = 0;
};

/// Time-gridded ensemble averages over the trajectories (the unconditioned
/// picture), with standard errors of the means.
struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> e_q;         ///< E[<q>]
    std::vector<double> e_phi;       ///< E[<phi>]
    std::vector<double> e_gamma;     ///< E[gamma(mu)]
    std::vector<double> e_gamma_q;   ///< E[gamma(mu) <q>] — the current proxy
    std::vector<double> e_gamma_q2;  ///< E[gamma(mu) (<q>^2 + V_q)] — emitted power proxy
    std::vector<double> var_mu;      ///< ensemble variance of mu
    std::vector<double> se_q;
    std::vector<double> se_gamma;
    std::vector<double> se_gamma_q;
    std::vector<double> cov_q_gamma_q;  ///< sampling covariance of (e_q, e_gamma_q)
    std::int64_t n_traj = 0;
    std::int64_t uncertainty_violations = 0;
};

struct HysteresisSample {
    double t = 0.0;
    double v = 0.0;  ///< voltage proxy
    double i = 0.0;  ///< current proxy
    double se_v = 0.0;
    double se_i = 0.0;
    double cov_vi = 0.0;
};

/// One sub-curve between consecutive zero crossings of the voltage proxy,
/// closed through the interpolated crossing points.
struct Lobe {
    double t_start = 0.0;
    double t_end = 0.0;
    double signed_area = 0.0;
};

struct HysteresisCurve {
    std::vector<HysteresisSample> samples;
    std::vector<Lobe> lobes;  ///< partition of the sample range, no overlap
    double total_area = 0.0;  ///< sum of |signed lobe areas|
    double total_area_se = 0.0;
};

}  // namespace qmem
