#pragma once

#include <cstdint>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/types.hpp"

namespace qmem {

struct EnsembleOptions {
    int workers = 0;            ///< 0 = hardware concurrency
    int noise_aggregation = 1;  ///< normals summed per step (dt-convergence coupling)
    DampingLaw law = {};
};

/// Runs n_traj independent conditioned trajectories and reduces them to the
/// unconditioned ensemble averages on the recorded time grid.
///
/// Trajectories are processed in fixed-size blocks; sums accumulate in index
/// order within a block and blocks merge in a pairwise tree fixed by block
/// index, so the result is bit-identical for any worker count or execution
/// order. A failed trajectory fails the whole ensemble (dropping it would
/// bias the averages).
EnsembleStats run_ensemble(const SimParams& params, const GaussianState& init,
                           const EnsembleOptions& options = {});

struct DeviationSeries {
    std::vector<double> times;
    std::vector<double> delta;
    std::vector<double> se;
};

/// Deviation from factorization delta_q(t) = E[gamma q] - E[gamma] E[q],
/// the witness for damping-charge correlations (non-Markovianity). The
/// standard error is propagated from the per-time standard errors of the
/// three means, treated as independent.
DeviationSeries factorization_deviation(const EnsembleStats& stats);

}  // namespace qmem
