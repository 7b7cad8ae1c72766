#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/errors.hpp"
#include "qmem/noise.hpp"
#include "qmem/types.hpp"

namespace qmem {

/// One explicit Euler-Maruyama step in Ito convention: the damping rate and
/// all coefficients are evaluated at the pre-step state, and the SAME scalar
/// increment dW = gauss * sqrt(dt) drives <phi>, <q> and mu (one measurement
/// record feeds both the back-action and the state-variable update).
/// Throws NonPositiveVariance if a variance leaves the positive domain.
inline GaussianState euler_step(const GaussianState& s, const SimParams& p, double gauss,
                                const DampingLaw& law = {}) {
    const DriftIncrement a = drift(s, p, law);
    const DiffusionCoefficients b = diffusion(s, p);
    const double dt = p.dt;
    const double dw = gauss * std::sqrt(dt);
    GaussianState next;
    next.mean_phi = s.mean_phi + a.d_mean_phi * dt + b.g_mean_phi * dw;
    next.mean_q = s.mean_q + a.d_mean_q * dt + b.g_mean_q * dw;
    next.var_phi = s.var_phi + a.d_var_phi * dt;
    next.var_q = s.var_q + a.d_var_q * dt;
    next.cov = s.cov + a.d_cov * dt;
    next.mu = s.mu + a.d_mu * dt + b.g_mu * dw;
    if (!(next.var_phi > 0.0) || !(next.var_q > 0.0)) {
        throw NonPositiveVariance(next.var_q > 0.0 ? "V_phi became non-positive"
                                                   : "V_q became non-positive");
    }
    return next;
}

/// Instantaneous measurement record M_k = <q> + dW / (sqrt(8 tau) dt)
/// (a voltage in these units), built from the same dW as the state update;
/// the state-variable step is then d(mu) = nu * M_k * dt.
inline double measurement_record(const GaussianState& before, double dw, const SimParams& p) {
    return before.mean_q + dw / (std::sqrt(8.0 * p.tau) * p.dt);
}

inline std::int64_t step_count(const SimParams& p) {
    return static_cast<std::int64_t>(std::floor(p.t_final / p.dt + 1e-9));
}

namespace detail {

/// Shared fixed-grid driver for one conditioned trajectory.
///
/// on_sample(record_index, time, state) fires at step 0 and every
/// record_stride steps; on_step(record_value, state_before) fires once per
/// step. noise_aggregation m > 1 draws m normals per step and applies their
/// normalized sum, i.e. the same Brownian path seen at a coarser resolution
/// (used by the dt-convergence study to couple runs across step sizes).
template <class OnSample, class OnStep>
void run_conditioned_path(const SimParams& p, GaussianState state, NoiseStream& noise,
                          int noise_aggregation, const DampingLaw& law, OnSample&& on_sample,
                          OnStep&& on_step) {
    const std::int64_t n_steps = step_count(p);
    const double root_m = std::sqrt(static_cast<double>(noise_aggregation));
    const double sqrt_dt = std::sqrt(p.dt);
    std::int64_t rec = 0;
    for (std::int64_t k = 0;; ++k) {
        if (k % p.record_stride == 0) on_sample(rec++, k * p.dt, state);
        if (k == n_steps) break;
        double gauss = 0.0;
        for (int j = 0; j < noise_aggregation; ++j) gauss += noise.normal();
        gauss /= root_m;
        try {
            const GaussianState before = state;
            state = euler_step(before, p, gauss, law);
            on_step(measurement_record(before, gauss * sqrt_dt, p), before);
        } catch (const NonPositiveVariance& e) {
            throw NonPositiveVariance(std::string(e.what()) + " at t=" +
                                          std::to_string((k + 1) * p.dt) +
                                          " (dt too large for this regime?)",
                                      (k + 1) * p.dt);
        }
    }
}

}  // namespace detail

/// Integrates one conditioned trajectory on the fixed grid, recording every
/// record_stride-th state. The record has floor(t_final/dt)/record_stride + 1
/// samples, and gammas[k] is the damping rate at states[k]. Identical
/// (params, init, stream) reproduce the record bit-for-bit.
TrajectoryRecord integrate_trajectory(const SimParams& params, const GaussianState& init,
                                      NoiseStream& noise, bool with_measurement_record = false,
                                      const DampingLaw& law = {});

/// Classical fourth-order Runge-Kutta update of (phi, q, mu).
ClassicalState rk4_step_classical(const ClassicalState& state, const SimParams& params,
                                  const DampingLaw& law = {});

struct ClassicalSample {
    double t;
    ClassicalState state;
    double gamma;
    double i_m;  ///< memristor current gamma(mu) * q
};

/// Deterministic classical trajectory on the same time grid as the quantum
/// runs. Initial conditions conventionally mirror the quantum means.
std::vector<ClassicalSample> integrate_classical(const SimParams& params,
                                                 const ClassicalState& init,
                                                 const DampingLaw& law = {});

}  // namespace qmem
