#include "qmem/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "qmem/errors.hpp"
#include "qmem/sde.hpp"

namespace qmem {

namespace {

// Trajectories accumulate into fixed blocks of this many, in index order;
// blocks then merge in a pairwise tree fixed by block index. Workers only
// pick which block to compute, never the order of any floating-point sum.
constexpr std::int64_t kBlock = 32;

// per-sample running sums, laid out [sample][field]
enum Field : int {
    kQ = 0,
    kQ2,
    kPhi,
    kGamma,
    kGamma2,
    kGammaQ,
    kGammaQ_2,
    kGammaQ2V,  // gamma * (<q>^2 + V_q)
    kMu,
    kMu2,
    kQGammaQ,
    kFieldCount,
};

struct BlockAccum {
    std::vector<double> sums;
    std::int64_t uncertainty_violations = 0;

    explicit BlockAccum(std::size_t n_rec) : sums(n_rec * kFieldCount, 0.0) {}

    void merge(const BlockAccum& other) {
        for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += other.sums[i];
        uncertainty_violations += other.uncertainty_violations;
    }
};

BlockAccum reduce_blocks(std::vector<BlockAccum>& blocks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(blocks[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    BlockAccum left = reduce_blocks(blocks, lo, mid);
    left.merge(reduce_blocks(blocks, mid, hi));
    return left;
}

}  // namespace

EnsembleStats run_ensemble(const SimParams& params, const GaussianState& init,
                           const EnsembleOptions& options) {
    validate(params);
    if (params.n_traj < 2) throw ConfigError("ensemble requires >= 2 trajectories");

    const std::int64_t n_rec = step_count(params) / params.record_stride + 1;
    const std::int64_t n_blocks = (params.n_traj + kBlock - 1) / kBlock;
    std::vector<BlockAccum> blocks(n_blocks, BlockAccum(n_rec));

    std::atomic<std::int64_t> next_block{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::vector<std::pair<std::int64_t, std::string>> failures;

    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next_block.fetch_add(1);
            if (b >= n_blocks || failed.load()) return;
            BlockAccum& acc = blocks[b];
            const std::int64_t first = b * kBlock;
            const std::int64_t last = std::min(first + kBlock, params.n_traj);
            for (std::int64_t traj = first; traj < last; ++traj) {
                if (failed.load()) return;
                NoiseStream noise(params.master_seed, static_cast<std::uint64_t>(traj));
                try {
                    detail::run_conditioned_path(
                        params, init, noise, options.noise_aggregation, options.law,
                        [&](std::int64_t rec, double, const GaussianState& s) {
                            const double g = eval_damping(s.mu, params, options.law);
                            const double q = s.mean_q;
                            const double gq = g * q;
                            double* row = acc.sums.data() + rec * kFieldCount;
                            row[kQ] += q;
                            row[kQ2] += q * q;
                            row[kPhi] += s.mean_phi;
                            row[kGamma] += g;
                            row[kGamma2] += g * g;
                            row[kGammaQ] += gq;
                            row[kGammaQ_2] += gq * gq;
                            row[kGammaQ2V] += g * (q * q + s.var_q);
                            row[kMu] += s.mu;
                            row[kMu2] += s.mu * s.mu;
                            row[kQGammaQ] += q * gq;
                            if (uncertainty_product(s) < 0.25 - 1e-9)
                                ++acc.uncertainty_violations;
                        },
                        [](double, const GaussianState&) {});
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    failures.emplace_back(traj, e.what());
                    failed.store(true);
                    return;
                }
            }
        }
    };

    int n_workers = options.workers > 0 ? options.workers
                                        : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::clamp<int>(n_workers, 1, static_cast<int>(n_blocks));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        std::string msg = "ensemble aborted:";
        for (const auto& [traj, what] : failures)
            msg += " trajectory " + std::to_string(traj) + ": " + what + ";";
        throw SimulationError(msg);
    }

    const BlockAccum total = reduce_blocks(blocks, 0, blocks.size());
    const double n = static_cast<double>(params.n_traj);

    EnsembleStats stats;
    stats.n_traj = params.n_traj;
    stats.uncertainty_violations = total.uncertainty_violations;
    stats.times.resize(n_rec);
    stats.e_q.resize(n_rec);
    stats.e_phi.resize(n_rec);
    stats.e_gamma.resize(n_rec);
    stats.e_gamma_q.resize(n_rec);
    stats.e_gamma_q2.resize(n_rec);
    stats.var_mu.resize(n_rec);
    stats.se_q.resize(n_rec);
    stats.se_gamma.resize(n_rec);
    stats.se_gamma_q.resize(n_rec);
    stats.cov_q_gamma_q.resize(n_rec);

    // sample variance of one trajectory quantity from its sums
    auto sample_var = [n](double s1, double s2) {
        return std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
    };

    for (std::int64_t r = 0; r < n_rec; ++r) {
        const double* row = total.sums.data() + r * kFieldCount;
        stats.times[r] = static_cast<double>(r * params.record_stride) * params.dt;
        stats.e_q[r] = row[kQ] / n;
        stats.e_phi[r] = row[kPhi] / n;
        stats.e_gamma[r] = row[kGamma] / n;
        stats.e_gamma_q[r] = row[kGammaQ] / n;
        stats.e_gamma_q2[r] = row[kGammaQ2V] / n;
        stats.var_mu[r] = sample_var(row[kMu], row[kMu2]);
        stats.se_q[r] = std::sqrt(sample_var(row[kQ], row[kQ2]) / n);
        stats.se_gamma[r] = std::sqrt(sample_var(row[kGamma], row[kGamma2]) / n);
        stats.se_gamma_q[r] = std::sqrt(sample_var(row[kGammaQ], row[kGammaQ_2]) / n);
        stats.cov_q_gamma_q[r] =
            (row[kQGammaQ] - row[kQ] * row[kGammaQ] / n) / (n - 1.0) / n;
    }
    return stats;
}

DeviationSeries factorization_deviation(const EnsembleStats& stats) {
    DeviationSeries out;
    out.times = stats.times;
    const std::size_t n = stats.times.size();
    out.delta.resize(n);
    out.se.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.delta[k] = stats.e_gamma_q[k] - stats.e_gamma[k] * stats.e_q[k];
        out.se[k] = std::sqrt(stats.se_gamma_q[k] * stats.se_gamma_q[k] +
                              stats.e_gamma[k] * stats.e_gamma[k] * stats.se_q[k] * stats.se_q[k] +
                              stats.e_q[k] * stats.e_q[k] * stats.se_gamma[k] * stats.se_gamma[k]);
    }
    return out;
}

}  // namespace qmem
