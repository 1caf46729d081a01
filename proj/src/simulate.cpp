#include "unistab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>
#include <vector>

#include "unistab/sphere.hpp"

namespace unistab {

namespace {

void validate_config(const SimulationConfig& config) {
    const int d = config.spec.dim();
    if (d < 1) throw ZeroDimension("simulation needs a nonempty spectrum");
    if (config.x0.size() != d) throw DimensionMismatch("x0 dimension differs from the spectrum");
    if (config.horizon < 1) throw InvalidRange("horizon must be >= 1");
    if (config.trials < 1) throw InvalidRange("trials must be >= 1");
    if (config.record_weighted && config.record_weighted->dim() != d) {
        throw DimensionMismatch("recording weights dimension differs from the spectrum");
    }
    if (const auto* greedy = std::get_if<GreedyPolicy>(&config.policy)) {
        if (greedy->w.dim() != d) {
            throw DimensionMismatch("greedy weights dimension differs from the spectrum");
        }
    } else if (const auto* mixed = std::get_if<MixedPolicy>(&config.policy)) {
        if (mixed->m < 1 || mixed->m >= d) throw InvalidRange("mixed policy needs 1 <= m < d");
        if (mixed->p_sub.dim() != mixed->m) {
            throw DimensionMismatch("subsystem weights must have dimension m");
        }
        if (!(mixed->q > 0.0) || !(mixed->q < 1.0)) {
            throw InvalidRange("survival probability must lie in (0, 1)");
        }
        if (!(mixed->h > 0.0)) throw InvalidRange("drop threshold must be positive");
    }
}

double policy_control(const ControlPolicy& policy, const GainSpectrum& spec, const StateVector& x,
                      const ActuationDirection& b) {
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ZeroPolicy>) {
                return 0.0;
            } else if constexpr (std::is_same_v<P, GreedyPolicy>) {
                return greedy_control(p.w, spec, x, b);
            } else {
                MixedStrategyParams params;
                params.m = p.m;
                params.q = p.q;
                params.h = p.h;
                params.p_sub = p.p_sub;
                return mixed_control(params, p.p_sub, spec, x, b);
            }
        },
        policy);
}

struct ChunkSums {
    Vec sum_sq;        // per-step sums of ||X||^2 over the chunk's trials
    Vec sum_sq2;       // per-step sums of ||X||^4
    Vec sum_w;         // per-step sums of the weighted norm (when recorded)
    Vec sum_w2;
    Eigen::MatrixXd sum_coord;  // d x (N+1)
    long n_diverged = 0;
};

ChunkSums run_chunk(const SimulationConfig& config, long first_trial, long n_trials) {
    const int n_points = config.horizon + 1;
    const bool weighted = config.record_weighted.has_value();
    ChunkSums sums;
    sums.sum_sq = Vec::Zero(n_points);
    sums.sum_sq2 = Vec::Zero(n_points);
    if (weighted) {
        sums.sum_w = Vec::Zero(n_points);
        sums.sum_w2 = Vec::Zero(n_points);
    }
    sums.sum_coord = Eigen::MatrixXd::Zero(config.spec.dim(), n_points);
    for (long k = 0; k < n_trials; ++k) {
        const TrajectoryResult traj = run_trajectory(config, first_trial + k);
        sums.sum_sq += traj.sq_norms;
        sums.sum_sq2 += traj.sq_norms.cwiseAbs2();
        if (weighted) {
            sums.sum_w += traj.weighted;
            sums.sum_w2 += traj.weighted.cwiseAbs2();
        }
        sums.sum_coord += traj.coord_sq;
        if (traj.diverged_step) ++sums.n_diverged;
    }
    return sums;
}

// Least-squares line through (n, log y_n); rate = exp(slope). Values are
// clamped below at 1e-290 so fully decayed trajectories stay finite in logs.
void fit_growth(const Vec& series, int first, int last, EnsembleStats& stats) {
    const int n_points = last - first + 1;
    double tail_max = 0.0;
    for (int n = first; n <= last; ++n) tail_max = std::max(tail_max, series(n));
    if (tail_max < 1e-280) {
        // The tail has fully decayed to (numerical) zero: bounded by
        // inspection, and a log fit on clamped constants would say rate 1.
        stats.growth_rate = 0.0;
        stats.growth_rate_std_error = 0.0;
        stats.verdict = EmpiricalVerdict::bounded;
        return;
    }
    double sx = 0.0, sy = 0.0;
    for (int n = first; n <= last; ++n) {
        sx += n;
        sy += std::log(std::max(series(n), 1e-290));
    }
    const double xbar = sx / n_points;
    const double ybar = sy / n_points;
    double sxx = 0.0, sxy = 0.0;
    for (int n = first; n <= last; ++n) {
        const double dx = n - xbar;
        sxx += dx * dx;
        sxy += dx * (std::log(std::max(series(n), 1e-290)) - ybar);
    }
    const double slope = sxy / sxx;
    stats.growth_rate = std::exp(slope);
    if (n_points < 3) {
        stats.growth_rate_std_error = 0.0;
        stats.verdict = EmpiricalVerdict::indeterminate;
        return;
    }
    double ssr = 0.0;
    for (int n = first; n <= last; ++n) {
        const double fit = ybar + slope * (n - xbar);
        const double res = std::log(std::max(series(n), 1e-290)) - fit;
        ssr += res * res;
    }
    const double slope_se = std::sqrt(ssr / (n_points - 2) / sxx);
    stats.growth_rate_std_error = stats.growth_rate * slope_se;
    if (stats.growth_rate < 1.0 - 3.0 * stats.growth_rate_std_error) {
        stats.verdict = EmpiricalVerdict::bounded;
    } else if (stats.growth_rate > 1.0 + 3.0 * stats.growth_rate_std_error) {
        stats.verdict = EmpiricalVerdict::growing;
    } else {
        stats.verdict = EmpiricalVerdict::indeterminate;
    }
}

}  // namespace

StateVector step(const StateVector& x, double u, const ActuationDirection& b,
                 const GainSpectrum& spec) {
    const int d = spec.dim();
    if (x.size() != d || b.dim() != d) throw DimensionMismatch("step dimensions differ");
    StateVector next(d);
    for (int i = 0; i < d; ++i) next(i) = spec[i] * x(i) + b.b(i) * u;
    return next;
}

TrajectoryResult run_trajectory(const SimulationConfig& config, long trial_index) {
    validate_config(config);
    const int d = config.spec.dim();
    const int n_points = config.horizon + 1;
    const bool weighted = config.record_weighted.has_value();

    TrajectoryResult result;
    result.sq_norms = Vec::Zero(n_points);
    if (weighted) result.weighted = Vec::Zero(n_points);
    result.coord_sq = Eigen::MatrixXd::Zero(d, n_points);

    SeededRng rng(config.seed, static_cast<std::uint64_t>(trial_index));
    StateVector x = config.x0;
    for (int n = 0; n < n_points; ++n) {
        const double sq = x.squaredNorm();
        if (!result.diverged_step && (!(sq <= kDivergenceCap) || !std::isfinite(sq))) {
            result.diverged_step = n;
            // Hold the remaining samples at the cap, preserving the direction
            // at divergence so per-coordinate columns still sum to the cap.
            Vec shape = x.cwiseAbs2();
            const double shape_sum = shape.sum();
            if (!std::isfinite(shape_sum) || shape_sum <= 0.0) {
                shape = Vec::Constant(d, 1.0 / d);
            } else {
                shape /= shape_sum;
            }
            for (int k = n; k < n_points; ++k) {
                result.sq_norms(k) = kDivergenceCap;
                result.coord_sq.col(k) = shape * kDivergenceCap;
                if (weighted) {
                    result.weighted(k) =
                        (config.record_weighted->w.array() * shape.array()).sum() * kDivergenceCap;
                }
            }
            break;
        }
        result.sq_norms(n) = sq;
        result.coord_sq.col(n) = x.cwiseAbs2();
        if (weighted) result.weighted(n) = weighted_norm_sq(x, *config.record_weighted);
        if (n == config.horizon) break;
        const ActuationDirection b = sample_uniform(d, rng);
        const double u = policy_control(config.policy, config.spec, x, b);
        x = step(x, u, b, config.spec);
    }
    return result;
}

EnsembleStats run_ensemble(const SimulationConfig& config, int n_threads) {
    validate_config(config);
    const int d = config.spec.dim();
    const int n_points = config.horizon + 1;
    const bool weighted = config.record_weighted.has_value();
    const long trials = config.trials;

    // Fixed 64-trial chunks merged in chunk order: the reduction tree does not
    // depend on the thread count, so the stats are bit-identical everywhere.
    constexpr long kChunk = 64;
    const long n_chunks = (trials + kChunk - 1) / kChunk;
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }

    ChunkSums total;
    total.sum_sq = Vec::Zero(n_points);
    total.sum_sq2 = Vec::Zero(n_points);
    if (weighted) {
        total.sum_w = Vec::Zero(n_points);
        total.sum_w2 = Vec::Zero(n_points);
    }
    total.sum_coord = Eigen::MatrixXd::Zero(d, n_points);

    auto merge = [&](const ChunkSums& part) {
        total.sum_sq += part.sum_sq;
        total.sum_sq2 += part.sum_sq2;
        if (weighted) {
            total.sum_w += part.sum_w;
            total.sum_w2 += part.sum_w2;
        }
        total.sum_coord += part.sum_coord;
        total.n_diverged += part.n_diverged;
    };

    for (long chunk_base = 0; chunk_base < n_chunks;) {
        const long batch = std::min<long>(n_threads, n_chunks - chunk_base);
        if (batch == 1) {
            const long first = chunk_base * kChunk;
            merge(run_chunk(config, first, std::min(kChunk, trials - first)));
            ++chunk_base;
            continue;
        }
        std::vector<std::future<ChunkSums>> futures;
        futures.reserve(batch);
        for (long j = 0; j < batch; ++j) {
            const long first = (chunk_base + j) * kChunk;
            futures.push_back(std::async(std::launch::async, run_chunk, std::cref(config), first,
                                         std::min(kChunk, trials - first)));
        }
        for (auto& f : futures) merge(f.get());
        chunk_base += batch;
    }

    EnsembleStats stats;
    stats.mean_sq_norm = total.sum_sq / static_cast<double>(trials);
    stats.per_coord_mean_sq = total.sum_coord / static_cast<double>(trials);
    stats.std_errors = Vec::Zero(n_points);
    if (weighted) {
        stats.mean_weighted = total.sum_w / static_cast<double>(trials);
        stats.weighted_std_errors = Vec::Zero(n_points);
    }
    if (trials > 1) {
        const double t = static_cast<double>(trials);
        for (int n = 0; n < n_points; ++n) {
            const double var_sq =
                std::max(0.0, (total.sum_sq2(n) - total.sum_sq(n) * total.sum_sq(n) / t) / (t - 1));
            stats.std_errors(n) = std::sqrt(var_sq / t);
            if (weighted) {
                const double var_w = std::max(
                    0.0, (total.sum_w2(n) - total.sum_w(n) * total.sum_w(n) / t) / (t - 1));
                stats.weighted_std_errors(n) = std::sqrt(var_w / t);
            }
        }
    }
    stats.n_diverged = total.n_diverged;

    const Vec& series = weighted ? stats.mean_weighted : stats.mean_sq_norm;
    fit_growth(series, config.horizon / 2, config.horizon, stats);
    if (stats.n_diverged > 0) stats.verdict = EmpiricalVerdict::growing;
    return stats;
}

double run_coupled(const SimulationConfig& config, int m) {
    validate_config(config);
    const int d = config.spec.dim();
    if (m < 1 || m >= d) throw InvalidRange("coupled run needs 1 <= m < d");
    const MixedPolicy* mixed = std::get_if<MixedPolicy>(&config.policy);
    if (!mixed && !std::holds_alternative<ZeroPolicy>(config.policy)) {
        throw InvalidRange("coupled run needs the mixed or zero policy");
    }
    if (mixed && mixed->m != m) {
        throw DimensionMismatch("coupled subsystem dimension differs from the policy's m");
    }

    const GainSpectrum sub = config.spec.head(m);
    SeededRng rng(config.seed, 0);
    StateVector x = config.x0;
    StateVector xp = config.x0.head(m);
    double max_err = (x.head(m) - xp).norm();
    for (int n = 0; n < config.horizon; ++n) {
        if (!(x.squaredNorm() <= kDivergenceCap)) break;
        const ActuationDirection b = sample_uniform(d, rng);
        const double tb_norm = b.b.head(m).norm();
        // The common increment c = (T b / ||T b||) u' is evaluated once and
        // applied to both systems; the full control u = u'/||T b|| then gives
        // b_i u = c_i on the first m coordinates algebraically.
        Vec c = Vec::Zero(m);
        double u = 0.0;
        if (mixed && tb_norm >= 1e-300 && tb_norm * mixed->h > 1.0) {
            const ActuationDirection b_sub(b.b.head(m) / tb_norm);
            const double u_sub = greedy_control(mixed->p_sub, sub, xp, b_sub);
            c = b_sub.b * u_sub;
            u = u_sub / tb_norm;
        }
        for (int i = 0; i < m; ++i) x(i) = config.spec[i] * x(i) + c(i);
        for (int i = m; i < d; ++i) x(i) = config.spec[i] * x(i) + b.b(i) * u;
        for (int i = 0; i < m; ++i) xp(i) = sub[i] * xp(i) + c(i);
        max_err = std::max(max_err, (x.head(m) - xp).norm());
    }
    return max_err;
}

const char* to_string(EmpiricalVerdict v) {
    switch (v) {
        case EmpiricalVerdict::bounded: return "bounded";
        case EmpiricalVerdict::growing: return "growing";
        case EmpiricalVerdict::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

}  // namespace unistab
