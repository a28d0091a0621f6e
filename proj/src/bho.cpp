#include "ggconv/bho.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "ggconv/errors.hpp"

namespace ggconv {

namespace {

constexpr int kDims = 6;
constexpr double kSqrt5 = 2.2360679774997896;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Radical-inverse Halton point, one prime base per dimension.
double halton(uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

constexpr std::array<int, kDims> kHaltonBases = {2, 3, 5, 7, 11, 13};

std::array<double, kDims> halton_point(uint64_t index, const std::array<double, kDims>& shift) {
    std::array<double, kDims> u;
    for (int d = 0; d < kDims; ++d) {
        double v = halton(index, kHaltonBases[d]) + shift[d];
        u[d] = v - std::floor(v);  // Cranley-Patterson rotation
    }
    return u;
}

double matern52(double r) {
    return (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
}

struct KernelHyper {
    std::array<double, kDims> log_ls{};
    double log_signal = 0.0;
    double log_noise = std::log(1e-4);

    static constexpr double kLogLsLo = -3.5;    // ls ~ 0.03
    static constexpr double kLogLsHi = 3.4;     // ls ~ 30
    static constexpr double kLogSigLo = -7.0;
    static constexpr double kLogSigHi = 7.0;
    static constexpr double kLogNoiseLo = -23.0;  // ~1e-10
    static constexpr double kLogNoiseHi = 0.0;

    void clamp() {
        for (double& v : log_ls) v = std::clamp(v, kLogLsLo, kLogLsHi);
        log_signal = std::clamp(log_signal, kLogSigLo, kLogSigHi);
        log_noise = std::clamp(log_noise, kLogNoiseLo, kLogNoiseHi);
    }
};

Matrix kernel_matrix(const Matrix& x, const KernelHyper& h) {
    const Eigen::Index n = x.rows();
    const double sig = std::exp(h.log_signal);
    Matrix k(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        k(a, a) = sig;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            double r2 = 0.0;
            for (int d = 0; d < kDims; ++d) {
                const double u = (x(a, d) - x(b, d)) / std::exp(h.log_ls[d]);
                r2 += u * u;
            }
            const double v = sig * matern52(std::sqrt(r2));
            k(a, b) = v;
            k(b, a) = v;
        }
    }
    return k;
}

/// Cholesky with jitter escalation (x10, three retries) before giving up.
Eigen::LLT<Matrix> robust_cholesky(const Matrix& k, double noise) {
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Matrix kn = k;
        kn.diagonal().array() += noise + jitter;
        Eigen::LLT<Matrix> llt(kn);
        if (llt.info() == Eigen::Success) return llt;
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    }
    throw SingularKernel("kernel matrix not positive definite after jitter escalation");
}

struct LmlResult {
    double value = -std::numeric_limits<double>::infinity();
    Vector alpha;
    Matrix chol_lower;
};

LmlResult log_marginal(const Matrix& x, const Vector& y, const KernelHyper& h,
                       std::array<double, kDims + 2>* grad = nullptr) {
    const Eigen::Index n = x.rows();
    const Matrix kf = kernel_matrix(x, h);
    const double noise = std::exp(h.log_noise);
    const Eigen::LLT<Matrix> llt = robust_cholesky(kf, noise);

    LmlResult res;
    res.alpha = llt.solve(y);
    res.chol_lower = llt.matrixL();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(res.chol_lower(i, i));
    res.value = -0.5 * y.dot(res.alpha) - log_det_half -
                0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

    if (grad) {
        // d lml / d theta = 0.5 alpha' dK alpha - 0.5 tr(K^-1 dK)
        const Matrix kinv = llt.solve(Matrix::Identity(n, n));
        const double sig = std::exp(h.log_signal);

        // Shared length-scale factor: d k / d (u_d^2) for the Matern-5/2
        // form, evaluated once per pair.
        Matrix shared(n, n);
        shared.setZero();
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = a + 1; b < n; ++b) {
                double r2 = 0.0;
                for (int dd = 0; dd < kDims; ++dd) {
                    const double u = (x(a, dd) - x(b, dd)) / std::exp(h.log_ls[dd]);
                    r2 += u * u;
                }
                const double r = std::sqrt(r2);
                const double v = sig * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
                shared(a, b) = v;
                shared(b, a) = v;
            }
        }

        for (int d = 0; d < kDims; ++d) {
            const double ls = std::exp(h.log_ls[d]);
            double quad = 0.0, trace = 0.0;
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = 0; b < n; ++b) {
                    if (a == b) continue;
                    const double ud = (x(a, d) - x(b, d)) / ls;
                    const double dk = shared(a, b) * ud * ud;
                    quad += res.alpha[a] * dk * res.alpha[b];
                    trace += kinv(a, b) * dk;
                }
            }
            (*grad)[d] = 0.5 * quad - 0.5 * trace;
        }
        // signal: dK = Kf itself
        (*grad)[kDims] = 0.5 * res.alpha.dot(kf * res.alpha) - 0.5 * (kinv * kf).trace();
        // noise: dK = noise * I
        (*grad)[kDims + 1] =
            0.5 * noise * res.alpha.squaredNorm() - 0.5 * noise * kinv.trace();
    }
    return res;
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

PowerLawParams HyperparamSpace::from_unit(const std::array<double, 6>& u) const {
    const auto box = dims();
    std::array<double, 6> v;
    for (int d = 0; d < 6; ++d) v[d] = box[d].lo + clamp01(u[d]) * (box[d].hi - box[d].lo);
    return PowerLawParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::array<double, 6> HyperparamSpace::to_unit(const PowerLawParams& p) const {
    const auto box = dims();
    const std::array<double, 6> v = {p.r0, p.n, p.r0_theta, p.n_theta, p.r0_phi, p.n_phi};
    std::array<double, 6> u;
    for (int d = 0; d < 6; ++d) u[d] = clamp01((v[d] - box[d].lo) / (box[d].hi - box[d].lo));
    return u;
}

bool HyperparamSpace::contains(const PowerLawParams& p) const {
    const auto box = dims();
    const std::array<double, 6> v = {p.r0, p.n, p.r0_theta, p.n_theta, p.r0_phi, p.n_phi};
    for (int d = 0; d < 6; ++d)
        if (v[d] < box[d].lo - 1e-12 || v[d] > box[d].hi + 1e-12) return false;
    return true;
}

bool HyperparamSpace::valid() const {
    for (const auto& iv : dims())
        if (!(iv.lo < iv.hi)) return false;
    return true;
}

GpSurrogate fit_gp(const std::vector<TrialRecord>& trials, const HyperparamSpace& space) {
    std::vector<const TrialRecord*> ok;
    for (const auto& t : trials)
        if (t.ok && std::isfinite(t.objective)) ok.push_back(&t);
    if (ok.size() < 2)
        throw std::invalid_argument("fit_gp needs at least two successful trials");

    GpSurrogate gp;
    gp.space_ = space;
    const Eigen::Index n = static_cast<Eigen::Index>(ok.size());
    gp.x_.resize(n, kDims);
    Vector raw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = space.to_unit(ok[i]->point);
        for (int d = 0; d < kDims; ++d) gp.x_(i, d) = u[d];
        raw[i] = ok[i]->objective;
    }
    gp.y_mean_ = raw.mean();
    const double var = (raw.array() - gp.y_mean_).square().sum() / static_cast<double>(n);
    gp.y_std_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    gp.y_ = (raw.array() - gp.y_mean_) / gp.y_std_;

    // Multi-start gradient ascent on the log marginal likelihood.
    Rng rng(0x5eedc0de);
    KernelHyper best_h;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 8; ++restart) {
        KernelHyper h;
        if (restart > 0) {
            for (double& v : h.log_ls) v = std::log(rng.uniform(0.05, 2.0));
            h.log_signal = std::log(rng.uniform(0.1, 10.0));
            h.log_noise = std::log(rng.uniform(1e-8, 1e-2));
        } else {
            for (double& v : h.log_ls) v = std::log(0.5);
            h.log_noise = std::log(1e-6);
        }
        h.clamp();

        std::array<double, kDims + 2> grad{};
        double lml;
        try {
            lml = log_marginal(gp.x_, gp.y_, h, &grad).value;
        } catch (const SingularKernel&) {
            continue;
        }
        double step = 0.1;
        const int max_iters = n <= 16 ? 160 : 60;
        for (int iter = 0; iter < max_iters && step > 1e-5; ++iter) {
            KernelHyper trial = h;
            for (int d = 0; d < kDims; ++d) trial.log_ls[d] += step * grad[d];
            trial.log_signal += step * grad[kDims];
            trial.log_noise += step * grad[kDims + 1];
            trial.clamp();

            double trial_lml;
            try {
                trial_lml = log_marginal(gp.x_, gp.y_, trial).value;
            } catch (const SingularKernel&) {
                step *= 0.5;
                continue;
            }
            if (trial_lml > lml + 1e-12) {
                h = trial;
                lml = log_marginal(gp.x_, gp.y_, h, &grad).value;
                step = std::min(step * 1.5, 1.0);
            } else {
                step *= 0.5;
            }
        }
        if (lml > best_lml) {
            best_lml = lml;
            best_h = h;
        }
    }
    if (!std::isfinite(best_lml))
        throw SingularKernel("no kernel hyperparameter setting yielded a usable fit");

    for (int d = 0; d < kDims; ++d) gp.length_scales_[d] = std::exp(best_h.log_ls[d]);
    gp.signal_var_ = std::exp(best_h.log_signal);
    gp.noise_var_ = std::exp(best_h.log_noise);
    auto final_fit = log_marginal(gp.x_, gp.y_, best_h);
    gp.lml_ = final_fit.value;
    gp.alpha_ = std::move(final_fit.alpha);
    gp.chol_lower_ = std::move(final_fit.chol_lower);
    return gp;
}

GpSurrogate::Posterior GpSurrogate::posterior_unit(const std::array<double, 6>& u) const {
    const Eigen::Index n = y_.size();
    Vector k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double r2 = 0.0;
        for (int d = 0; d < kDims; ++d) {
            const double du = (u[d] - x_(i, d)) / length_scales_[d];
            r2 += du * du;
        }
        k_star[i] = signal_var_ * matern52(std::sqrt(r2));
    }
    const double mean_std = k_star.dot(alpha_);
    const Vector v = chol_lower_.triangularView<Eigen::Lower>().solve(k_star);
    const double var = std::max(signal_var_ - v.squaredNorm(), 0.0);
    return Posterior{y_mean_ + y_std_ * mean_std, y_std_ * std::sqrt(var)};
}

GpSurrogate::Posterior GpSurrogate::posterior(const PowerLawParams& point) const {
    return posterior_unit(space_.to_unit(point));
}

double expected_improvement_normal(double mean, double stddev, double best_objective) {
    const double gap = best_objective - mean;
    if (stddev < 1e-15) return std::max(gap, 0.0);
    const double z = gap / stddev;
    return gap * normal_cdf(z) + stddev * normal_pdf(z);
}

double expected_improvement(const GpSurrogate& surrogate, const PowerLawParams& candidate,
                            double best_objective) {
    const auto post = surrogate.posterior(candidate);
    return expected_improvement_normal(post.mean, post.stddev, best_objective);
}

PowerLawParams propose_next(const GpSurrogate& surrogate, const HyperparamSpace& space, Rng& rng) {
    constexpr int kCandidates = 4096;
    constexpr int kRefined = 8;

    const double best_obj = surrogate.incumbent();

    std::array<double, kDims> shift;
    for (double& s : shift) s = rng.uniform01();

    std::vector<std::array<double, kDims>> candidates(kCandidates);
    std::vector<double> ei(kCandidates);
    for (int c = 0; c < kCandidates; ++c) {
        candidates[c] = halton_point(static_cast<uint64_t>(c) + 1, shift);
        const auto post = surrogate.posterior_unit(candidates[c]);
        ei[c] = expected_improvement_normal(post.mean, post.stddev, best_obj);
    }

    std::vector<int> idx(kCandidates);
    for (int c = 0; c < kCandidates; ++c) idx[c] = c;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (ei[a] != ei[b]) return ei[a] > ei[b];
        return a < b;  // deterministic tie-break: lowest candidate index
    });

    std::array<double, kDims> best_u = candidates[idx[0]];
    double best_ei = ei[idx[0]];

    // Pattern-search refinement around the strongest candidates.
    for (int t = 0; t < std::min(kRefined, kCandidates); ++t) {
        std::array<double, kDims> u = candidates[idx[t]];
        double u_ei = ei[idx[t]];
        double step = 0.08;
        int probes = 0;
        while (step > 1e-3 && probes < 600) {
            bool improved = false;
            for (int d = 0; d < kDims; ++d) {
                for (double sign : {1.0, -1.0}) {
                    std::array<double, kDims> probe = u;
                    probe[d] = clamp01(probe[d] + sign * step);
                    const auto post = surrogate.posterior_unit(probe);
                    const double probe_ei =
                        expected_improvement_normal(post.mean, post.stddev, best_obj);
                    ++probes;
                    if (probe_ei > u_ei) {
                        u = probe;
                        u_ei = probe_ei;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (u_ei > best_ei) {
            best_ei = u_ei;
            best_u = u;
        }
    }

    return space.from_unit(best_u);
}

OptimizeResult optimize(const ObjectiveFn& objective, const HyperparamSpace& space,
                        int total_trials, uint64_t seed,
                        const std::vector<TrialRecord>& prior_trials,
                        const TrialCallback& on_trial) {
    if (total_trials < 1) throw std::invalid_argument("total_trials must be >= 1");
    if (!space.valid()) throw std::invalid_argument("hyperparameter space has empty dimensions");

    Rng rng(seed);
    std::array<double, kDims> shift;
    for (double& s : shift) s = rng.uniform01();

    OptimizeResult result;
    result.trials = prior_trials;
    int next_index = 0;
    for (const auto& t : prior_trials) next_index = std::max(next_index, t.trial_index + 1);

    const int n_init = std::max(5, total_trials / 4);

    while (static_cast<int>(result.trials.size()) < total_trials) {
        const int t = next_index;
        int ok_count = 0;
        for (const auto& tr : result.trials)
            if (tr.ok) ++ok_count;

        PowerLawParams point;
        if (t < n_init || ok_count < 2) {
            point = space.from_unit(halton_point(static_cast<uint64_t>(t) + 1, shift));
        } else {
            try {
                const GpSurrogate gp = fit_gp(result.trials, space);
                point = propose_next(gp, space, rng);
            } catch (const SingularKernel&) {
                point = space.from_unit(halton_point(static_cast<uint64_t>(t) + 1, shift));
            }
        }

        TrialRecord record;
        record.trial_index = t;
        record.point = point;
        const auto start = std::chrono::steady_clock::now();
        try {
            const double obj = objective(point);
            if (std::isfinite(obj)) {
                record.objective = obj;
                record.ok = true;
            }
        } catch (const Error&) {
            // recorded as a failed trial; the loop continues
        }
        record.wall_time_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (on_trial) on_trial(record);
        result.trials.push_back(record);
        next_index = t + 1;
    }

    result.best_objective = std::numeric_limits<double>::quiet_NaN();
    for (const auto& tr : result.trials) {
        if (tr.ok && (!std::isfinite(result.best_objective) || tr.objective < result.best_objective)) {
            result.best_objective = tr.objective;
            result.best_point = tr.point;
        }
    }
    return result;
}

double train_evaluate(const PowerLawParams& params, const std::vector<Graph3D>& train_set,
                      const std::vector<Graph3D>& val_set, const ModelConfig& config) {
    const TrainedModel trained = train(train_set, val_set, config, params);
    return trained.val_rmse.back();
}

}  // namespace ggconv
