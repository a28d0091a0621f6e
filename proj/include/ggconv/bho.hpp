#pragma once

#include <array>
#include <functional>
#include <limits>

#include "ggconv/nn.hpp"
#include "ggconv/rng.hpp"

namespace ggconv {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Search box for the six power-law parameters. The defaults are the usual
/// bond-length-motivated ranges: r0 in [1, 3] A (dihedral-edge r0 up to
/// 4 A), exponents in [2, 6].
struct HyperparamSpace {
    Interval r0{1.0, 3.0};
    Interval n{2.0, 6.0};
    Interval r0_theta{1.0, 3.0};
    Interval n_theta{2.0, 6.0};
    Interval r0_phi{1.0, 4.0};
    Interval n_phi{2.0, 6.0};

    std::array<Interval, 6> dims() const {
        return {r0, n, r0_theta, n_theta, r0_phi, n_phi};
    }

    /// Maps a unit-cube point into the box (clamped).
    PowerLawParams from_unit(const std::array<double, 6>& u) const;
    std::array<double, 6> to_unit(const PowerLawParams& p) const;
    bool contains(const PowerLawParams& p) const;
    bool valid() const;  // lo < hi per dimension
};

/// One optimization trial. objective is meaningful only when ok.
struct TrialRecord {
    int trial_index = 0;
    PowerLawParams point;
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    double wall_time_sec = 0.0;
};

/// Gaussian-process surrogate: Matern-5/2 kernel with per-dimension length
/// scales, inputs normalized to the unit cube, outputs standardized.
class GpSurrogate {
public:
    struct Posterior {
        double mean = 0.0;
        double stddev = 0.0;  // original objective units
    };

    Posterior posterior(const PowerLawParams& point) const;
    Posterior posterior_unit(const std::array<double, 6>& u) const;

    double log_marginal_likelihood() const { return lml_; }
    int num_points() const { return static_cast<int>(y_.size()); }

    /// Smallest objective among the fitted trials, in original units.
    double incumbent() const { return y_mean_ + y_std_ * y_.minCoeff(); }
    const std::array<double, 6>& length_scales() const { return length_scales_; }
    double signal_variance() const { return signal_var_; }
    double noise_variance() const { return noise_var_; }

private:
    friend GpSurrogate fit_gp(const std::vector<TrialRecord>&, const HyperparamSpace&);

    Matrix x_;  // n x 6, unit cube
    Vector y_;  // standardized
    double y_mean_ = 0.0;
    double y_std_ = 1.0;
    std::array<double, 6> length_scales_{};
    double signal_var_ = 1.0;
    double noise_var_ = 1e-6;
    double lml_ = 0.0;
    Matrix chol_lower_;  // Cholesky factor of K
    Vector alpha_;       // K^{-1} y
    HyperparamSpace space_;
};

/// Fits the surrogate to the successful trials (>= 2 required). Kernel
/// hyperparameters maximize the log marginal likelihood via multi-start
/// gradient ascent with 8 restarts. A failing Cholesky retries with 10x
/// jitter up to 3 times before throwing SingularKernel.
GpSurrogate fit_gp(const std::vector<TrialRecord>& trials, const HyperparamSpace& space);

/// Closed-form expected improvement under a normal posterior,
/// minimization convention: E[max(best - Y, 0)].
double expected_improvement_normal(double mean, double stddev, double best_objective);

double expected_improvement(const GpSurrogate& surrogate, const PowerLawParams& candidate,
                            double best_objective);

/// Argmax of expected improvement over 4096 shifted-Halton candidates plus
/// pattern-search refinement from the top 8; ties break toward the lowest
/// candidate index. The result always lies inside the space.
PowerLawParams propose_next(const GpSurrogate& surrogate, const HyperparamSpace& space, Rng& rng);

struct OptimizeResult {
    PowerLawParams best_point;
    double best_objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<TrialRecord> trials;
};

using ObjectiveFn = std::function<double(const PowerLawParams&)>;
using TrialCallback = std::function<void(const TrialRecord&)>;

/// Sequential optimization loop: the first max(5, total_trials / 4) trials
/// come from a shifted-Halton design, the rest from GP + EI. Objective
/// exceptions are recorded as failed trials and skipped. Deterministic
/// given seed. prior_trials (e.g. from a resumed log) seed the surrogate;
/// new trial indices continue after them.
OptimizeResult optimize(const ObjectiveFn& objective, const HyperparamSpace& space,
                        int total_trials, uint64_t seed,
                        const std::vector<TrialRecord>& prior_trials = {},
                        const TrialCallback& on_trial = nullptr);

/// Builds geometric adjacencies with the given parameters, trains for
/// config.epochs, and returns the validation RMSE (the BHO objective).
double train_evaluate(const PowerLawParams& params, const std::vector<Graph3D>& train_set,
                      const std::vector<Graph3D>& val_set, const ModelConfig& config);

}  // namespace ggconv
