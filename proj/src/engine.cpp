#include "instab/engine.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace instab {

long tau_of(const TauSchedule& schedule, double f_value) {
    if (!(schedule.c > 0.0) || !(schedule.d > 0.0)) {
        throw std::invalid_argument("tau schedule requires c > 0 and d > 0");
    }
    return schedule.steps(f_value);
}

bool metropolis_accept(double f_candidate, double f_incumbent, double eta,
                       double u) {
    if (f_candidate >= f_incumbent) return true;
    return u < std::exp(eta * (f_candidate - f_incumbent));
}

void EngineConfig::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("engine: eta must be positive");
    if (!(tau.c > 0.0) || !(tau.d > 0.0)) {
        throw std::invalid_argument("engine: tau schedule requires c > 0 and d > 0");
    }
    if (k_star < 1) throw std::invalid_argument("engine: k_star must be >= 1");
}

namespace {

ChainState run_chain(const ChainModel& model, ChainState from,
                     const Param& gamma, long tau, Rng& rng) {
    for (long i = 0; i < tau; ++i) {
        model.step(from, gamma, rng);
    }
    return from;
}

} // namespace

AnnealerState global_step(const AnnealerState& state, const ChainModel& model,
                          const ParameterSet& set, const EngineConfig& config,
                          Rng& rng) {
    const long tau = config.tau.steps(model.f(state.y));
    Param gamma = set.sample_uniform(rng);
    ChainState y = run_chain(model, state.y, gamma, tau, rng);

    AnnealerState next;
    next.k = state.k + 1;
    next.t = state.t + tau;
    next.sim_steps = state.sim_steps + tau;
    next.accepted =
        metropolis_accept(model.f(y), model.f(state.y), config.eta, rng.uniform());
    if (next.accepted) {
        next.y = std::move(y);
        next.lambda = gamma;
    } else {
        next.y = state.y;
        next.lambda = state.lambda;
    }
    return next;
}

AnnealerState local_step(const AnnealerState& state, const ChainModel& model,
                         const ParameterSet& set, const EngineConfig& config,
                         Rng& rng) {
    if (set.kind != ParameterSet::Kind::grid) {
        throw std::invalid_argument("local search requires a grid parameter set");
    }
    const long tau = config.tau.steps(model.f(state.y));
    Param gamma = set.sample_neighborhood(state.lambda, rng);
    // Two trajectories from the same start, independent randomness.
    ChainState x_prime = run_chain(model, state.y, state.lambda, tau, rng);
    ChainState y = run_chain(model, state.y, gamma, tau, rng);

    AnnealerState next;
    next.k = state.k + 1;
    next.t = state.t + tau;  // one iteration's budget charge
    next.sim_steps = state.sim_steps + 2 * tau;
    next.accepted =
        metropolis_accept(model.f(y), model.f(x_prime), config.eta, rng.uniform());
    if (next.accepted) {
        next.y = std::move(y);
        next.lambda = gamma;
    } else {
        next.y = std::move(x_prime);
        next.lambda = state.lambda;
    }
    return next;
}

Annealer::Annealer(const ChainModel& model, const ParameterSet& set,
                   const EngineConfig& config)
    : model_(model), set_(set), config_(config),
      rng_(Rng(config.seed)) {
    config_.validate();
    set_.validate();
    state_.y = model_.initial_state();
    state_.lambda = set_.sample_uniform(rng_);
}

Annealer::Annealer(const ChainModel& model, const ParameterSet& set,
                   const EngineConfig& config, ChainState y0, Param lambda0)
    : model_(model), set_(set), config_(config),
      rng_(Rng(config.seed)) {
    config_.validate();
    set_.validate();
    if (!set_.contains(lambda0)) {
        throw std::invalid_argument("initial lambda outside the parameter set");
    }
    state_.y = std::move(y0);
    state_.lambda = std::move(lambda0);
}

bool Annealer::budget_exhausted() const {
    return state_.t + config_.tau.steps(model_.f(state_.y)) > config_.k_star;
}

void Annealer::step() {
    if (config_.algorithm == Algorithm::global) {
        state_ = global_step(state_, model_, set_, config_, rng_);
    } else {
        state_ = local_step(state_, model_, set_, config_, rng_);
    }
}

Trajectory run_annealer(const ChainModel& model, const ParameterSet& set,
                        const EngineConfig& config,
                        std::optional<ChainState> initial_y,
                        std::optional<Param> initial_lambda) {
    ChainState y0 = initial_y ? std::move(*initial_y) : model.initial_state();
    std::optional<Annealer> ann;
    if (initial_lambda) {
        ann.emplace(model, set, config, std::move(y0), std::move(*initial_lambda));
    } else {
        ann.emplace(model, set, config);
        if (initial_y) {
            // Rebuild with the explicit state but the default lambda draw.
            Param lambda0 = ann->state().lambda;
            ann.emplace(model, set, config, std::move(y0), std::move(lambda0));
        }
    }

    Trajectory traj;
    auto record = [&]() {
        const AnnealerState& s = ann->state();
        traj.records.push_back(
            {s.k, s.t, model.f(s.y), s.lambda, s.accepted});
    };
    record();
    while (!ann->budget_exhausted()) {
        ann->step();
        record();
    }
    traj.total_sim_steps = ann->state().sim_steps;
    return traj;
}

std::vector<std::pair<long, double>> drift_ratio(const Trajectory& trajectory) {
    std::vector<std::pair<long, double>> out;
    out.reserve(trajectory.records.size());
    for (const auto& r : trajectory.records) {
        if (r.t <= 0) continue;  // k = 0 entry
        out.emplace_back(r.k, r.f_y / static_cast<double>(r.t));
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    if (trajectory.records.empty()) return;
    const std::size_t dim = trajectory.records.front().lambda.size();
    os << "k,T_k,f_Y";
    for (std::size_t i = 1; i <= dim; ++i) os << ",lambda_" << i;
    os << ",accepted\n";
    char buf[64];
    for (const auto& r : trajectory.records) {
        os << r.k << ',' << r.t << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", r.f_y);
        os << buf;
        for (double v : r.lambda) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << ',' << buf;
        }
        os << ',' << (r.accepted ? 1 : 0) << '\n';
    }
}

} // namespace instab
