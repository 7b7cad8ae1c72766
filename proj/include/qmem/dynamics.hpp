#pragma once

#include <cmath>
#include <functional>

#include "qmem/types.hpp"

namespace qmem {

/// Alternative conductance laws gamma(mu) can be plugged in where accepted;
/// an empty function means the default cosine law built from the params.
using DampingLaw = std::function<double(double)>;

/// Damping rate gamma(mu) = gamma0 (1 + epsilon cos mu). Periodic in mu
/// with period 2*pi and bounded in [gamma0 (1-epsilon), gamma0 (1+epsilon)].
inline double damping_rate(double mu, double gamma0, double epsilon) {
    return gamma0 * (1.0 + epsilon * std::cos(mu));
}

inline double eval_damping(double mu, const SimParams& p, const DampingLaw& law) {
    return law ? law(mu) : damping_rate(mu, p.gamma0, p.epsilon);
}

/// Deterministic per-unit-time rates of the conditioned-state moments.
struct DriftIncrement {
    double d_mean_phi;
    double d_mean_q;
    double d_var_phi;
    double d_var_q;
    double d_cov;
    double d_mu;
};

/// Coefficients multiplying the single shared Wiener increment dW.
/// The second moments carry no noise.
struct DiffusionCoefficients {
    double g_mean_phi;  ///< sqrt(8 tau) * C
    double g_mean_q;    ///< sqrt(8 tau) * V_q
    double g_mu;        ///< nu / sqrt(8 tau)
};

inline DriftIncrement drift(const GaussianState& s, const SimParams& p,
                            const DampingLaw& law = {}) {
    const double g = eval_damping(s.mu, p, law);
    const double tau = p.tau;
    return DriftIncrement{
        s.mean_q,
        -s.mean_phi - 2.0 * g * s.mean_q,
        2.0 * s.cov + 2.0 * tau * (1.0 - 4.0 * s.cov * s.cov),
        -2.0 * s.cov - 4.0 * g * (s.var_q - p.lambda) - 8.0 * tau * s.var_q * s.var_q,
        (s.var_q - s.var_phi) - s.cov * (2.0 * g + 8.0 * tau * s.var_q),
        p.nu * s.mean_q,
    };
}

inline DiffusionCoefficients diffusion(const GaussianState& s, const SimParams& p) {
    const double root8tau = std::sqrt(8.0 * p.tau);
    return DiffusionCoefficients{root8tau * s.cov, root8tau * s.var_q, p.nu / root8tau};
}

struct ClassicalRates {
    double d_phi;
    double d_q;
    double d_mu;
};

/// Right-hand side of the classical circuit: the same oscillator with a
/// state-variable-controlled damping and deterministic state update.
inline ClassicalRates classical_rhs(const ClassicalState& s, const SimParams& p,
                                    const DampingLaw& law = {}) {
    const double g = eval_damping(s.mu, p, law);
    return ClassicalRates{s.q, -s.phi - 2.0 * g * s.q, p.nu * s.q};
}

/// Mean energy (<q>^2 + <phi>^2 + V_q + V_phi) / 2 of the Gaussian state.
inline double mean_energy(const GaussianState& s) {
    return 0.5 * (s.mean_q * s.mean_q + s.mean_phi * s.mean_phi + s.var_q + s.var_phi);
}

}  // namespace qmem
