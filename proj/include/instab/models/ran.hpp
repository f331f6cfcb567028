#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "instab/model.hpp"

namespace instab::models {

/// Six-node random access network, embedded jump chain of the CTMC.
///
/// State: 12 entries, queue lengths x_1..x_6 followed by activity bits
/// u_1..u_6. The interference graph has two triangles {1,3,6} and {2,4,5}
/// joined by the edges 3-4 and 5-6 (1-based labels); adjacent nodes are
/// never simultaneously active.
///
/// Per node i the enabled transitions and rates are
///   arrival          lambda_i = rho * kappa_i * mu_i        x_i += 1
///   activation       nu_i, if x_i > 0, u_i = 0, no active neighbor
///   serve, keep      mu_i * (1 - psi(x_i)), if u_i = 1       x_i -= 1
///   serve, release   mu_i * psi(x_i), if u_i = 1             x_i -= 1, u_i = 0
/// with psi(x) = 1 for x <= 1, (1+x)^-2 otherwise, so the medium is always
/// released after the last packet. Defaults: mu_i = nu_i = 1 and
/// kappa = (0.4, 0.4, 0.4, 0.4, 0.2, 0.2). Parameter: rho.
class RandomAccessNetwork final : public ChainModel {
public:
    static constexpr int kNodes = 6;

    explicit RandomAccessNetwork(
        std::array<double, 6> kappa = {0.4, 0.4, 0.4, 0.4, 0.2, 0.2},
        std::array<double, 6> nu = {1, 1, 1, 1, 1, 1},
        std::array<double, 6> mu = {1, 1, 1, 1, 1, 1})
        : kappa_(kappa), nu_(nu), mu_(mu) {
        for (int i = 0; i < kNodes; ++i) {
            if (kappa_[i] < 0.0 || !(nu_[i] > 0.0) || !(mu_[i] > 0.0)) {
                throw std::invalid_argument("ran: rates must be positive");
            }
        }
    }

    std::string id() const override { return "ran"; }
    ChainState initial_state() const override {
        return ChainState(2 * kNodes, 0.0);
    }
    int param_dim() const override { return 1; }
    double phi_f() const override { return 1.0; }
    double f(const ChainState& s) const override {
        double total = 0.0;
        for (int i = 0; i < kNodes; ++i) total += s[i];
        return total;
    }

    static double psi(double x) {
        if (x <= 1.0) return 1.0;
        return 1.0 / ((1.0 + x) * (1.0 + x));
    }

    /// Edges of the interference graph, 0-based node labels.
    static const std::array<std::pair<int, int>, 8>& edges() {
        static const std::array<std::pair<int, int>, 8> e = {
            {{0, 2}, {0, 5}, {2, 5}, {1, 3}, {1, 4}, {3, 4}, {2, 3}, {4, 5}}};
        return e;
    }

    static bool neighbor_active(const ChainState& s, int i) {
        for (const auto& [a, b] : edges()) {
            if (a == i && s[kNodes + b] > 0.5) return true;
            if (b == i && s[kNodes + a] > 0.5) return true;
        }
        return false;
    }

    static void validate_state(const ChainState& s) {
        if (s.size() != 2 * kNodes) {
            throw std::invalid_argument("ran: state must have 12 entries");
        }
        for (int i = 0; i < kNodes; ++i) {
            const double u = s[kNodes + i];
            if (u != 0.0 && u != 1.0) {
                throw std::invalid_argument("ran: activity bits must be 0 or 1");
            }
        }
        for (const auto& [a, b] : edges()) {
            if (s[kNodes + a] > 0.5 && s[kNodes + b] > 0.5) {
                throw std::invalid_argument(
                    "ran: adjacent nodes active, corrupt state");
            }
        }
    }

    /// Enabled transitions at state s. Encoding: 4*i + t with t = 0 arrival,
    /// 1 activation, 2 serve-keep, 3 serve-release.
    std::vector<std::pair<int, double>> enabled(const ChainState& s,
                                                double rho) const {
        std::vector<std::pair<int, double>> out;
        out.reserve(3 * kNodes);
        for (int i = 0; i < kNodes; ++i) {
            const double lambda = rho * kappa_[i] * mu_[i];
            if (lambda > 0.0) out.emplace_back(4 * i, lambda);
            const bool active = s[kNodes + i] > 0.5;
            if (!active && s[i] > 0.0 && !neighbor_active(s, i)) {
                out.emplace_back(4 * i + 1, nu_[i]);
            }
            if (active) {
                const double p = psi(s[i]);
                if (p < 1.0) out.emplace_back(4 * i + 2, mu_[i] * (1.0 - p));
                out.emplace_back(4 * i + 3, mu_[i] * p);
            }
        }
        return out;
    }

    static void apply(ChainState& s, int transition) {
        const int i = transition / 4;
        switch (transition % 4) {
        case 0: s[i] += 1.0; break;
        case 1: s[kNodes + i] = 1.0; break;
        case 2: s[i] -= 1.0; break;
        default:
            s[i] -= 1.0;
            s[kNodes + i] = 0.0;
            break;
        }
    }

    void step(ChainState& s, const Param& p, Rng& rng) const override {
        const double rho = p[0];
        if (rho < 0.0) throw std::invalid_argument("ran: rho must be >= 0");
        validate_state(s);
        const auto trans = enabled(s, rho);
        if (trans.empty()) return;  // rho = 0 and the network is empty
        double total = 0.0;
        for (const auto& [t, rate] : trans) total += rate;
        double u = rng.uniform() * total;
        for (const auto& [t, rate] : trans) {
            if (u < rate) {
                apply(s, t);
                return;
            }
            u -= rate;
        }
        apply(s, trans.back().first);
    }

private:
    std::array<double, 6> kappa_;
    std::array<double, 6> nu_;
    std::array<double, 6> mu_;
};

} // namespace instab::models
