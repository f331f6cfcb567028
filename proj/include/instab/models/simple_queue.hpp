#pragma once

#include "instab/model.hpp"

namespace instab::models {

/// Deterministic part of the slotted single-queue update: arrival first,
/// then service (only effective on a non-empty queue).
inline double simple_queue_update(double x, bool arrival, bool service) {
    double post_arrival = x + (arrival ? 1.0 : 0.0);
    if (service && post_arrival > 0.0) post_arrival -= 1.0;
    return post_arrival;
}

/// Discrete time queue: arrival w.p. p at the start of each slot, then a
/// service w.p. 0.5. Parameter: p in [0,1].
class SimpleQueue final : public ChainModel {
public:
    std::string id() const override { return "simple-queue"; }
    ChainState initial_state() const override { return {0.0}; }
    int param_dim() const override { return 1; }
    double phi_f() const override { return 1.0; }
    double f(const ChainState& x) const override { return x[0]; }

    void step(ChainState& x, const Param& lambda, Rng& rng) const override {
        x[0] = simple_queue_update(x[0], rng.bernoulli(lambda[0]),
                                   rng.bernoulli(0.5));
    }
};

} // namespace instab::models
