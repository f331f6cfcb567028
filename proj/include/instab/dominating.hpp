#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "instab/engine.hpp"
#include "instab/model.hpp"
#include "instab/param_set.hpp"
#include "instab/rng.hpp"

namespace instab {

/// Configuration of the dominating chain W_k = W_{k-1} + Z(W_{k-1}).
struct DominatingConfig {
    double delta = 0.05;  // drift margin
    long sigma = 1;       // drift horizon
    double kappa = 1.0;   // small-state threshold
    double phi = 1.0;     // increment bound phi_f
    TauSchedule tau;      // shared c, d with the engine
    double alpha = 0.05;  // significance level

    void validate() const;
};

/// Coefficients of the two-Gaussian tail bound at level w.
struct ZCoefficients {
    long n;     // smallest integer with sigma*n >= tau(w)
    double a1;  // sigma*phi - sigma*n*delta
    double a2;  // (phi+delta)^2 * sigma^2 * n
    double a3;  // sigma*phi - w + kappa
    double a4;  // phi^2 * sigma^2 * n
};

ZCoefficients z_coefficients(double w, const DominatingConfig& cfg);

/// Raw tail: 1 for z <= 0, else the capped two-exponential expression.
double z_tail(double w, double z, const DominatingConfig& cfg);

/// Monotone (non-increasing in z) envelope of z_tail, used for sampling.
/// Coincides with min(1, z_tail) wherever the raw tail is already
/// non-increasing (both Gaussian peaks at z <= 0), and never exceeds it.
double z_tail_monotone(double w, double z, const DominatingConfig& cfg);

/// Smallest w at which both a1(w) <= 0 and a3(w) <= 0; above this level the
/// raw tail is non-increasing on z > 0. Diagnostic only.
double w_star(const DominatingConfig& cfg);

/// Inverse-transform sample: smallest z >= 0 with z_tail_monotone <= u,
/// bisected to 1e-9; support truncated where the tail drops below 1e-12.
double sample_z(double w, const DominatingConfig& cfg, double u);

struct WPath {
    std::vector<double> values;  // W_0 .. W_K, nondecreasing
};

WPath simulate_w(double w0, long k_max, const DominatingConfig& cfg, Rng& rng,
                 bool double_increment = false);

/// Empirical (1-alpha)-quantiles of W_k over n_reps independent paths,
/// order statistic at rank ceil((1-alpha)*n_reps), isotonic in k.
/// double_increment selects the local-search recursion W += Z + Z'.
std::vector<double> estimate_quantiles(double w0, long k_max,
                                       const DominatingConfig& cfg,
                                       long n_reps, std::uint64_t seed,
                                       bool double_increment = false,
                                       int workers = 1);

struct Verdict {
    bool unstable = false;
    long k = 0;          // comparison iteration
    long t = 0;          // T_k at the comparison iteration
    double f_value = 0;  // f(Y_k)
    double quantile = 0; // q_k^(alpha)
    double alpha = 0;
    long k_star = 0;
    std::uint64_t seed = 0;
};

struct TestOptions {
    long n_reps = 10000;  // W replications for quantile estimation
    int workers = 1;
    bool use_cache = true;
};

/// Runs the annealer to budget exhaustion, estimates q_k^(alpha) at the
/// comparison iteration with W_0 = f(Y_0), and compares. When out_trajectory
/// is non-null the full annealer path is recorded into it.
Verdict instability_test(const ChainModel& model, const ParameterSet& set,
                         const EngineConfig& engine_cfg,
                         const DominatingConfig& dom_cfg,
                         const TestOptions& options = {},
                         Trajectory* out_trajectory = nullptr);

/// Process-wide cache of quantile tables; the W process depends only on
/// (delta, sigma, kappa, phi, c, d, alpha, w0, increment arity, n_reps),
/// not on the model, so tables are shared across replications and sweeps.
class QuantileCache {
public:
    static QuantileCache& instance();

    std::shared_ptr<const std::vector<double>> get(
        const DominatingConfig& cfg, double w0, bool double_increment,
        long n_reps, long k_max, int workers);

    void clear();

private:
    QuantileCache() = default;
    struct Impl;
    std::shared_ptr<Impl> impl_ = make_impl();
    static std::shared_ptr<Impl> make_impl();
};

void write_quantiles_csv(std::ostream& os, const std::vector<double>& q);
void write_verdict_csv(std::ostream& os, const Verdict& v);

} // namespace instab
