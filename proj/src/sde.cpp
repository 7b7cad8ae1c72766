#include "qmem/sde.hpp"

namespace qmem {

TrajectoryRecord integrate_trajectory(const SimParams& params, const GaussianState& init,
                                      NoiseStream& noise, bool with_measurement_record,
                                      const DampingLaw& law) {
    const std::int64_t n_rec = step_count(params) / params.record_stride + 1;
    TrajectoryRecord rec;
    rec.times.reserve(n_rec);
    rec.states.reserve(n_rec);
    rec.gammas.reserve(n_rec);

    // block-average of the per-step record between consecutive samples
    double m_sum = 0.0;
    std::int64_t m_count = 0;
    if (with_measurement_record) rec.measurement_record.emplace();

    detail::run_conditioned_path(
        params, init, noise, 1, law,
        [&](std::int64_t, double t, const GaussianState& s) {
            if (with_measurement_record && !rec.times.empty()) {
                rec.measurement_record->push_back(m_sum / static_cast<double>(m_count));
                m_sum = 0.0;
                m_count = 0;
            }
            rec.times.push_back(t);
            rec.states.push_back(s);
            rec.gammas.push_back(eval_damping(s.mu, params, law));
            if (uncertainty_product(s) < 0.25 - 1e-9) ++rec.uncertainty_violations;
        },
        [&](double m, const GaussianState&) {
            if (with_measurement_record) {
                m_sum += m;
                ++m_count;
            }
        });
    return rec;
}

ClassicalState rk4_step_classical(const ClassicalState& s, const SimParams& p,
                                  const DampingLaw& law) {
    const double dt = p.dt;
    auto advance = [](const ClassicalState& base, const ClassicalRates& r, double h) {
        return ClassicalState{base.phi + h * r.d_phi, base.q + h * r.d_q, base.mu + h * r.d_mu};
    };
    const ClassicalRates k1 = classical_rhs(s, p, law);
    const ClassicalRates k2 = classical_rhs(advance(s, k1, 0.5 * dt), p, law);
    const ClassicalRates k3 = classical_rhs(advance(s, k2, 0.5 * dt), p, law);
    const ClassicalRates k4 = classical_rhs(advance(s, k3, dt), p, law);
    return ClassicalState{
        s.phi + dt / 6.0 * (k1.d_phi + 2.0 * k2.d_phi + 2.0 * k3.d_phi + k4.d_phi),
        s.q + dt / 6.0 * (k1.d_q + 2.0 * k2.d_q + 2.0 * k3.d_q + k4.d_q),
        s.mu + dt / 6.0 * (k1.d_mu + 2.0 * k2.d_mu + 2.0 * k3.d_mu + k4.d_mu),
    };
}

std::vector<ClassicalSample> integrate_classical(const SimParams& params,
                                                 const ClassicalState& init,
                                                 const DampingLaw& law) {
    const std::int64_t n_steps = step_count(params);
    std::vector<ClassicalSample> out;
    out.reserve(n_steps / params.record_stride + 1);
    ClassicalState s = init;
    for (std::int64_t k = 0;; ++k) {
        if (k % params.record_stride == 0) {
            const double g = eval_damping(s.mu, params, law);
            out.push_back({k * params.dt, s, g, g * s.q});
        }
        if (k == n_steps) break;
        s = rk4_step_classical(s, params, law);
    }
    return out;
}

}  // namespace qmem
