#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "instab/model.hpp"
#include "instab/param_set.hpp"
#include "instab/rng.hpp"

namespace instab {

/// Per-iteration simulation budget tau(x) = c*f(x) + d, rounded up to an
/// integer number of embedded steps.
struct TauSchedule {
    double c = 0.5;
    double d = 1.0;

    long steps(double f_value) const {
        long n = static_cast<long>(std::ceil(c * f_value + d));
        return n < 1 ? 1 : n;
    }

    /// Real-valued budget, used by the dominating process.
    double value(double w) const { return c * w + d; }
};

long tau_of(const TauSchedule& schedule, double f_value);

/// Accept iff u < exp(eta * min{0, f_candidate - f_incumbent}).
/// Always true when the candidate does not decrease f.
bool metropolis_accept(double f_candidate, double f_incumbent, double eta,
                       double u);

enum class Algorithm { global, local };

struct EngineConfig {
    double eta = 1.0;
    TauSchedule tau;
    Algorithm algorithm = Algorithm::global;
    std::uint64_t seed = 1;
    long k_star = 1;

    void validate() const;
};

/// The bivariate process (Y_k, Lambda_k) with accumulated time T_k.
struct AnnealerState {
    ChainState y;
    Param lambda;
    long k = 0;
    long t = 0;             // T_k, embedded steps charged
    bool accepted = false;  // last iteration's Metropolis outcome
    long sim_steps = 0;     // wall-clock embedded steps (2*tau per local iter)
};

AnnealerState global_step(const AnnealerState& state, const ChainModel& model,
                          const ParameterSet& set, const EngineConfig& config,
                          Rng& rng);

AnnealerState local_step(const AnnealerState& state, const ChainModel& model,
                         const ParameterSet& set, const EngineConfig& config,
                         Rng& rng);

struct TrajectoryRecord {
    long k;
    long t;
    double f_y;
    Param lambda;
    bool accepted;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;  // k = 0 .. K
    long total_sim_steps = 0;
};

/// Stepwise driver for the annealing state machine; run_annealer wraps it.
class Annealer {
public:
    Annealer(const ChainModel& model, const ParameterSet& set,
             const EngineConfig& config);
    Annealer(const ChainModel& model, const ParameterSet& set,
             const EngineConfig& config, ChainState y0, Param lambda0);

    const AnnealerState& state() const { return state_; }
    double f() const { return model_.f(state_.y); }

    /// True at the first k with T_k + tau(Y_k) > k*.
    bool budget_exhausted() const;

    void step();

private:
    const ChainModel& model_;
    const ParameterSet& set_;
    EngineConfig config_;
    AnnealerState state_;
    Rng rng_;
};

/// Runs until the budget stopping rule fires; deterministic given the seed.
Trajectory run_annealer(const ChainModel& model, const ParameterSet& set,
                        const EngineConfig& config,
                        std::optional<ChainState> initial_y = std::nullopt,
                        std::optional<Param> initial_lambda = std::nullopt);

/// Pointwise (k, f(Y_k)/T_k); the k=0 entry (T_0 = 0) is skipped.
std::vector<std::pair<long, double>> drift_ratio(const Trajectory& trajectory);

/// CSV: k,T_k,f_Y,lambda_1..lambda_I,accepted; floats at 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

} // namespace instab
