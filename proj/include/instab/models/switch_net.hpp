#pragma once

#include <cstddef>
#include <stdexcept>

#include "instab/model.hpp"

namespace instab::models {

/// Ring of four main switches with an auxiliary switch on each link.
///
/// Queue layout (52 entries):
///   0..39   external input queues, ten per main switch i at 10*i..10*i+9
///   40..47  internal input queues, two per main switch i at 40+2*i, 40+2*i+1
///   48..51  auxiliary switch queues, one per auxiliary switch i
///
/// Packets arriving at main switch i are of type i and follow the route
/// main_i -> aux_i -> main_{(i+1) mod 4} -> out. Each slot, after external
/// arrivals, every switch forwards one packet from its longest non-zero
/// input queue (ties to the lowest index); a main switch sends external
/// packets to its auxiliary and lets internal packets depart, while an
/// auxiliary sends to one of the next main switch's two internal queues,
/// picked uniformly. Forwarded packets only become visible next slot.
///
/// The route tables are a stand-in for an unpublished topology; see the
/// README for the exact wiring.
class SwitchNetwork final : public ChainModel {
public:
    static constexpr int kDim = 52;
    static constexpr int kExternal = 40;

    std::string id() const override { return "switch"; }
    ChainState initial_state() const override { return ChainState(kDim, 0.0); }
    int param_dim() const override { return 1; }
    double phi_f() const override { return static_cast<double>(kExternal); }
    double f(const ChainState& x) const override {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }

    void step(ChainState& x, const Param& p, Rng& rng) const override {
        const double r = p[0];
        if (r < 0.0 || r > 1.0) {
            throw std::invalid_argument("switch: r must lie in [0,1]");
        }
        const double arrival_prob = r / 30.0;
        for (int q = 0; q < kExternal; ++q) {
            if (rng.bernoulli(arrival_prob)) x[q] += 1.0;
        }

        // Selection sees post-arrival counts; transfers land next slot.
        double pending[kDim] = {};
        for (int i = 0; i < 4; ++i) {
            const int winner = longest_main_queue(x, i);
            if (winner < 0) continue;
            x[static_cast<std::size_t>(winner)] -= 1.0;
            if (winner < kExternal) {
                pending[48 + i] += 1.0;
            }
            // Internal winners depart the network.
        }
        for (int i = 0; i < 4; ++i) {
            const int aux_q = 48 + i;
            if (x[static_cast<std::size_t>(aux_q)] <= 0.0) continue;
            x[static_cast<std::size_t>(aux_q)] -= 1.0;
            const int next_main = (i + 1) % 4;
            const int slot = rng.bernoulli(0.5) ? 1 : 0;
            pending[40 + 2 * next_main + slot] += 1.0;
        }
        for (int q = 0; q < kDim; ++q) {
            x[static_cast<std::size_t>(q)] += pending[q];
        }
    }

    /// Longest non-zero input queue of main switch i (ten external plus two
    /// internal), ties to the lowest index; -1 when all are empty.
    static int longest_main_queue(const ChainState& x, int i) {
        int best = -1;
        double best_len = 0.0;
        auto consider = [&](int q) {
            const double v = x[static_cast<std::size_t>(q)];
            if (v > best_len) {
                best = q;
                best_len = v;
            }
        };
        for (int q = 10 * i; q < 10 * (i + 1); ++q) consider(q);
        consider(40 + 2 * i);
        consider(40 + 2 * i + 1);
        return best;
    }
};

} // namespace instab::models
