#include "instab/models/registry.hpp"

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "instab/models/parallel_queues.hpp"
#include "instab/models/ran.hpp"
#include "instab/models/rybko_stolyar.hpp"
#include "instab/models/simple_queue.hpp"
#include "instab/models/switch_net.hpp"
#include "instab/models/tandem.hpp"

namespace instab::models {

double parallel_critical_rate(int n_queues) {
    if (n_queues < 1) {
        throw std::invalid_argument("parallel_critical_rate: N must be >= 1");
    }
    const double n = static_cast<double>(n_queues);
    return 0.8 * (1.0 - std::pow(0.2, n)) / n;
}

void lqf_serve(std::vector<double>& x, const std::vector<bool>& connected,
               bool success) {
    if (connected.size() != x.size()) {
        throw std::invalid_argument("lqf_serve: size mismatch");
    }
    if (!success) return;
    int best = -1;
    double best_len = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (connected[i] && x[i] > best_len) {
            best = static_cast<int>(i);
            best_len = x[i];
        }
    }
    if (best >= 0) x[static_cast<std::size_t>(best)] -= 1.0;
}

namespace {

void check_keys(const nlohmann::json& overrides, const std::string& id,
                std::initializer_list<const char*> allowed) {
    if (overrides.is_null()) return;
    if (!overrides.is_object()) {
        throw std::invalid_argument("model " + id +
                                    ": overrides must be an object");
    }
    for (const auto& item : overrides.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument("model " + id +
                                        ": unknown override key '" +
                                        item.key() + "'");
        }
    }
}

std::array<double, 6> six_vector(const nlohmann::json& j,
                                 const std::string& key,
                                 std::array<double, 6> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 6) {
        throw std::invalid_argument("ran: '" + key +
                                    "' must be an array of 6 numbers");
    }
    std::array<double, 6> out{};
    for (std::size_t i = 0; i < 6; ++i) out[i] = v[i].get<double>();
    return out;
}

} // namespace

std::vector<std::string> model_ids() {
    return {"simple-queue", "parallel",      "tandem-mm1", "tandem-renewal",
            "rybko-stolyar", "switch", "ran"};
}

std::unique_ptr<ChainModel> make_model(const std::string& id,
                                       const nlohmann::json& overrides) {
    if (id == "simple-queue") {
        check_keys(overrides, id, {});
        return std::make_unique<SimpleQueue>();
    }
    if (id == "parallel") {
        check_keys(overrides, id, {"n_queues", "connect_prob", "service_prob"});
        int n = 4;
        double connect = 0.8;
        double service = 0.8;
        if (!overrides.is_null()) {
            n = overrides.value("n_queues", n);
            connect = overrides.value("connect_prob", connect);
            service = overrides.value("service_prob", service);
        }
        return std::make_unique<ParallelQueues>(n, connect, service);
    }
    if (id == "tandem-mm1") {
        check_keys(overrides, id, {});
        return std::make_unique<TandemMM1>();
    }
    if (id == "tandem-renewal") {
        check_keys(overrides, id, {});
        return std::make_unique<TandemRenewal>();
    }
    if (id == "rybko-stolyar") {
        check_keys(overrides, id, {"lambda", "mu_r"});
        double lambda = 1.0;
        double mu_r = 4.0;
        if (!overrides.is_null()) {
            lambda = overrides.value("lambda", lambda);
            mu_r = overrides.value("mu_r", mu_r);
        }
        return std::make_unique<RybkoStolyar>(lambda, mu_r);
    }
    if (id == "switch") {
        check_keys(overrides, id, {});
        return std::make_unique<SwitchNetwork>();
    }
    if (id == "ran") {
        check_keys(overrides, id, {"kappa", "nu", "mu"});
        std::array<double, 6> kappa = {0.4, 0.4, 0.4, 0.4, 0.2, 0.2};
        std::array<double, 6> nu = {1, 1, 1, 1, 1, 1};
        std::array<double, 6> mu = {1, 1, 1, 1, 1, 1};
        if (!overrides.is_null() && overrides.is_object()) {
            kappa = six_vector(overrides, "kappa", kappa);
            nu = six_vector(overrides, "nu", nu);
            mu = six_vector(overrides, "mu", mu);
        }
        return std::make_unique<RandomAccessNetwork>(kappa, nu, mu);
    }
    throw std::invalid_argument("unknown model id '" + id + "'");
}

} // namespace instab::models
