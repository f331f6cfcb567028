#pragma once

#include <stdexcept>
#include <vector>

#include "instab/model.hpp"

namespace instab::models {

/// Critical arrival probability (4/5)*(1-(1/5)^N)/N for N parallel queues.
double parallel_critical_rate(int n_queues);

/// LQF service: decrement the longest connected non-zero queue (ties to the
/// lowest index) when the success draw hits. Deterministic; exposed for tests.
void lqf_serve(std::vector<double>& x, const std::vector<bool>& connected,
               bool success);

/// N parallel queues, single server: per-queue Bernoulli(p) arrivals, random
/// connectivity, longest-connected-queue-first service.
class ParallelQueues final : public ChainModel {
public:
    explicit ParallelQueues(int n_queues = 4, double connect_prob = 0.8,
                            double service_prob = 0.8)
        : n_(n_queues), connect_prob_(connect_prob), service_prob_(service_prob) {
        if (n_ < 1) throw std::invalid_argument("parallel: N must be >= 1");
    }

    std::string id() const override { return "parallel"; }
    ChainState initial_state() const override {
        return ChainState(static_cast<std::size_t>(n_), 0.0);
    }
    int param_dim() const override { return 1; }
    double phi_f() const override { return static_cast<double>(n_); }
    double f(const ChainState& x) const override {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }

    void step(ChainState& x, const Param& lambda, Rng& rng) const override {
        const double p = lambda[0];
        for (auto& q : x) {
            if (rng.bernoulli(p)) q += 1.0;
        }
        // Longest connected non-zero queue, ties to the lowest index.
        int best = -1;
        double best_len = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (rng.bernoulli(connect_prob_) && x[i] > best_len) {
                best = static_cast<int>(i);
                best_len = x[i];
            }
        }
        if (best >= 0 && rng.bernoulli(service_prob_)) {
            x[static_cast<std::size_t>(best)] -= 1.0;
        }
    }

    int n_queues() const { return n_; }

private:
    int n_;
    double connect_prob_;
    double service_prob_;
};

} // namespace instab::models
