#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qmem/ensemble.hpp"
#include "qmem/types.hpp"

namespace qmem {

/// Builds the hysteresis curve (v, i) = (e_q, e_gamma_q) in time order,
/// splits it into lobes at zero crossings of v (sign change plus linear
/// interpolation; an exact zero ends the current lobe), and computes per-lobe
/// signed shoelace areas over the closed sub-curves. The closing chord of an
/// interior lobe lies on v = 0 and contributes nothing, so partial lobes at
/// the ends of the record need no special casing.
/// Throws DegenerateCurve for fewer than 4 samples or no zero crossing.
HysteresisCurve hysteresis_curve(const EnsembleStats& stats);

/// Same construction from raw samples (synthetic curves, classical runs).
HysteresisCurve hysteresis_from_samples(std::vector<HysteresisSample> samples);

struct AreaEstimate {
    double area = 0.0;
    double se = 0.0;
};

/// Sum of |signed lobe areas| restricted to t in [0, period], with the
/// curve clipped (interpolated) at the period boundary. The standard error
/// is delta-method propagation over the clipped samples; distinct times are
/// treated as independent, the (v, i) covariance at equal times is kept.
AreaEstimate first_period_area(const HysteresisCurve& curve, double period = kTwoPi);

inline double loop_area_first_period(const HysteresisCurve& curve, double period = kTwoPi) {
    return first_period_area(curve, period).area;
}

/// Stationary second moments with the damping rate frozen at gamma0:
///   C^st    = -(sqrt(1 + 16 tau^2) - 1) / (8 tau)      (root of the V_phi drift)
///   V_q^st  = (sqrt(gamma0^2 + 4 tau (2 gamma0 lambda - C^st)) - gamma0) / (4 tau)
///   V_phi^st = V_q^st - C^st (2 gamma0 + 8 tau V_q^st)  (root of the C drift)
/// Together they zero the drift of all three second-moment equations.
struct StationaryMoments {
    double c_st;
    double vq_st;
    double vphi_st;
};
StationaryMoments stationary_moments(double gamma0, double lambda, double tau);

/// Sum of the diffusion amplitudes of first moments and state variable at
/// the stationary point: D = sqrt(8 tau) V_q^st + sqrt(8 tau) |C^st| + 1/sqrt(8 tau).
/// Diverges for tau -> 0 (measurement noise) and tau -> inf (back-action).
double noise_sum(double tau, double gamma0, double lambda);

struct TauOptReport {
    double tau_opt = 0.0;
    double d_min = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    std::vector<std::pair<double, double>> samples;  ///< log-spaced (tau, D) scan
    bool grid_fallback = false;  ///< scan was not unimodal or the minimum sat on the boundary
};

/// Golden-section minimization of the noise sum to relative tolerance 1e-4.
/// A log-spaced scan guards the unimodality assumption; if it fails (or the
/// minimum sits on the bracket boundary) the scan minimum is returned with
/// grid_fallback set.
TauOptReport optimize_tau(double gamma0, double lambda,
                          std::pair<double, double> bracket = {1e-3, 10.0});

/// Earliest recorded time with sqrt(var_mu) >= 2*pi, linearly interpolated
/// between samples; nullopt if the spread never reaches a full period of the
/// damping law.
std::optional<double> collapse_time(const EnsembleStats& stats);

/// The three accumulated-noise ratios that must stay small against
/// min(q_typical^2, 4 pi^2) for hysteresis to survive up to time t_c.
/// "Much less than" is operationalized as ratio <= threshold (default 0.1).
struct MemoryWindowReport {
    double r1;  ///< back-action via V_q:  8 tau V_q t_c / m
    double r2;  ///< back-action via |C|:  8 tau |C| t_c / m
    double r3;  ///< measurement noise:    t_c / (8 tau m)
    double threshold;
    bool ok1, ok2, ok3;
};
MemoryWindowReport memory_window_check(const SimParams& params, double q_typical, double t_c,
                                       double vq, double cov, double threshold = 0.1);

/// Projection-frequency window (2 / q_typical^2, 4 q_typical^2) for
/// well-localized trajectories; q_typical^2 estimates the typical action.
std::pair<double, double> localization_window(double q_typical);

/// Times where sign(V_q - V_phi) changes (squeezing axis swaps between
/// charge and flux), located by linear interpolation.
std::vector<double> squeezing_crossings(const TrajectoryRecord& record);

struct ConvergenceReport {
    std::vector<double> dts;             ///< compared step sizes, descending (finest excluded)
    std::vector<double> max_gamma_gaps;  ///< max_t |e_gamma^dt - e_gamma^finest|
    bool monotone = false;               ///< gaps strictly decrease with dt
};

/// Reruns the ensemble for each step size with the same master seed and
/// Brownian paths coupled across levels (coarser runs consume the same
/// normals in aggregated form), then compares e_gamma against the finest run
/// on the shared record grid. Step sizes must be descending, integer
/// multiples of the finest, with the record grid of the largest.
ConvergenceReport convergence_study(const SimParams& params, const GaussianState& init,
                                    std::span<const double> dts,
                                    const EnsembleOptions& options = {});

struct CrossingDeviation {
    double time;
    double delta;
    double se;
};

/// factorization_deviation evaluated at the zero crossings of e_q; the
/// non-pinching diagnostic of the unconditioned hysteresis.
std::vector<CrossingDeviation> deviation_at_crossings(const EnsembleStats& stats);

}  // namespace qmem
