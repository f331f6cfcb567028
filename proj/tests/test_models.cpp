#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "instab/models/registry.hpp"
#include "instab/models/parallel_queues.hpp"
#include "instab/models/ran.hpp"
#include "instab/models/rybko_stolyar.hpp"
#include "instab/models/simple_queue.hpp"
#include "instab/models/switch_net.hpp"
#include "instab/models/tandem.hpp"

using namespace instab;
using namespace instab::models;

namespace {

/// Runs `steps` random steps and checks nonnegativity, the f-increment
/// bound and determinism per seed.
void check_model_invariants(const ChainModel& model, const Param& lambda,
                            long steps, std::uint64_t seed) {
    ChainState x = model.initial_state();
    ChainState x2 = model.initial_state();
    Rng rng(seed), rng2(seed);
    double f_prev = model.f(x);
    for (long i = 0; i < steps; ++i) {
        model.step(x, lambda, rng);
        model.step(x2, lambda, rng2);
        REQUIRE(x == x2);
        for (double v : x) REQUIRE(v >= 0.0);
        const double f_cur = model.f(x);
        REQUIRE(std::abs(f_cur - f_prev) <= model.phi_f() + 1e-12);
        f_prev = f_cur;
    }
}

} // namespace

TEST_CASE("registry lists the seven models and builds each") {
    auto ids = model_ids();
    REQUIRE(ids.size() == 7);
    for (const auto& id : ids) {
        auto m = make_model(id);
        CHECK(m->id() == id);
        CHECK(m->param_dim() >= 1);
        CHECK(m->phi_f() > 0.0);
    }
    CHECK_THROWS_AS(make_model("no-such-model"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("parallel", {{"bogus", 1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_model("simple-queue", {{"n_queues", 2}}),
                    std::invalid_argument);
}

TEST_CASE("registry overrides reach the models") {
    auto m = make_model("parallel", {{"n_queues", 2}});
    CHECK(m->initial_state().size() == 2);
    CHECK(m->phi_f() == 2.0);
    auto rs = make_model("rybko-stolyar", {{"mu_r", 2.5}});
    CHECK(dynamic_cast<RybkoStolyar&>(*rs).mu_r() == 2.5);
    CHECK_THROWS_AS(make_model("ran", {{"kappa", {1, 2}}}),
                    std::invalid_argument);
}

TEST_CASE("invariants hold for every model on random steps") {
    const long steps = 200000;
    check_model_invariants(SimpleQueue{}, {0.6}, steps, 1);
    check_model_invariants(ParallelQueues{}, {0.25}, steps, 2);
    check_model_invariants(TandemMM1{}, {0.9, 1.1}, steps, 3);
    check_model_invariants(TandemRenewal{}, {0.9, 1.1}, steps, 4);
    check_model_invariants(RybkoStolyar{}, {1.5}, steps, 5);
    check_model_invariants(SwitchNetwork{}, {0.9}, steps, 6);
    check_model_invariants(RandomAccessNetwork{}, {0.8}, steps, 7);
}

// --- simple queue ---------------------------------------------------------

TEST_CASE("simple queue deterministic update") {
    CHECK(simple_queue_update(0.0, false, false) == 0.0);
    CHECK(simple_queue_update(0.0, false, true) == 0.0);   // empty stays empty
    CHECK(simple_queue_update(0.0, true, true) == 0.0);    // +1 then -1
    CHECK(simple_queue_update(5.0, true, true) == 5.0);
    CHECK(simple_queue_update(5.0, false, true) == 4.0);
    CHECK(simple_queue_update(5.0, true, false) == 6.0);
}

TEST_CASE("simple queue drift is p - 0.5 conditioned on a busy queue") {
    SimpleQueue model;
    for (double p : {0.2, 0.5, 0.8}) {
        Rng rng(static_cast<std::uint64_t>(p * 100));
        ChainState x = {50.0};  // start busy; stays busy long enough
        double drift_sum = 0.0;
        long n = 0;
        const long steps = 1000000;
        for (long i = 0; i < steps; ++i) {
            if (x[0] == 0.0) {  // re-seed the queue, do not count this step
                x[0] = 50.0;
                continue;
            }
            const double before = x[0];
            model.step(x, {p}, rng);
            drift_sum += x[0] - before;
            ++n;
        }
        CHECK(std::abs(drift_sum / static_cast<double>(n) - (p - 0.5)) < 0.003);
    }
}

// --- parallel queues ------------------------------------------------------

TEST_CASE("critical rate formula") {
    CHECK(parallel_critical_rate(4) == doctest::Approx(0.19968).epsilon(1e-10));
    CHECK(parallel_critical_rate(1) == doctest::Approx(0.64).epsilon(1e-12));
    CHECK_THROWS_AS(parallel_critical_rate(0), std::invalid_argument);
    double prev = 1.0;
    for (int n = 1; n <= 20; ++n) {
        const double cur = parallel_critical_rate(n);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("lqf_serve picks the longest connected queue, lowest index ties") {
    std::vector<double> x = {3.0, 3.0, 1.0, 0.0};
    lqf_serve(x, {true, true, true, true}, true);
    CHECK(x == std::vector<double>{2.0, 3.0, 1.0, 0.0});

    x = {3.0, 3.0, 1.0, 0.0};
    lqf_serve(x, {false, true, true, true}, true);  // queue 0 disconnected
    CHECK(x == std::vector<double>{3.0, 2.0, 1.0, 0.0});

    x = {3.0, 3.0, 1.0, 0.0};
    lqf_serve(x, {true, true, true, true}, false);  // service draw misses
    CHECK(x == std::vector<double>{3.0, 3.0, 1.0, 0.0});

    x = {0.0, 0.0};
    lqf_serve(x, {true, true}, true);  // nothing to serve
    CHECK(x == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(lqf_serve(x, {true}, true), std::invalid_argument);
}

TEST_CASE("parallel queues are stable below and transient above critical") {
    ParallelQueues model;
    const double crit = parallel_critical_rate(4);

    // Below: the running maximum of f over 10^6 steps stays modest.
    {
        Rng rng(1001);
        ChainState x = model.initial_state();
        double running_max = 0.0;
        for (long i = 0; i < 1000000; ++i) {
            model.step(x, {crit - 0.05}, rng);
            running_max = std::max(running_max, model.f(x));
        }
        CHECK(running_max < 100.0);
    }

    // Above: f keeps growing between steps 1e5 and 1e6.
    {
        Rng rng(1002);
        ChainState x = model.initial_state();
        double f_mid = 0.0;
        for (long i = 0; i < 1000000; ++i) {
            model.step(x, {crit + 0.06}, rng);
            if (i == 100000) f_mid = model.f(x);
        }
        CHECK(model.f(x) > f_mid);
    }
}

// --- tandem ---------------------------------------------------------------

TEST_CASE("tandem rates gate on busy stations") {
    auto r = tandem_mm1_rates({0.0, 0.0}, 1.0, 1.0);
    CHECK(r == std::array<double, 3>{1.0, 0.0, 0.0});
    r = tandem_mm1_rates({1.0, 0.0}, 1.0, 1.0);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 1.0);  // P(station-1 completion) = 1/(1+1) = 0.5
    CHECK(r[2] == 0.0);
    r = tandem_mm1_rates({2.0, 3.0}, 2.0, 4.0);
    CHECK(r[1] == doctest::Approx(0.5));
    CHECK(r[2] == doctest::Approx(0.25));
}

TEST_CASE("empty tandem only admits arrivals") {
    TandemMM1 model;
    Rng rng(3);
    ChainState x = {0.0, 0.0};
    model.step(x, {1.0, 1.0}, rng);
    CHECK(x == ChainState{1.0, 0.0});
}

TEST_CASE("station-1 completion frequency matches the rate ratio") {
    // From (1,0) with mu1 = mu2 = 1 the next event is a station-1
    // completion with probability 1/2.
    TandemMM1 model;
    Rng rng(8);
    long completions = 0;
    const long trials = 200000;
    for (long i = 0; i < trials; ++i) {
        ChainState x = {1.0, 0.0};
        model.step(x, {1.0, 1.0}, rng);
        if (x[0] == 0.0) ++completions;
    }
    CHECK(std::abs(static_cast<double>(completions) / trials - 0.5) < 0.005);
}

TEST_CASE("embedded tandem chain is near stationarity at mu = 0.5") {
    // Service means 0.5 with arrival rate 1 give rho = 0.5 per station, so
    // in continuous time each queue is geometric with mean rho/(1-rho) = 1.
    // The embedded jump chain reweights states by their total exit rate
    // r(x) = 1 + 2*1{x1>0} + 2*1{x2>0}, which lifts the per-station mean to
    // E[x*r]/E[r] = (1 + 2 + 1)/(1 + 1 + 1) = 4/3.
    TandemMM1 model;
    Rng rng(21);
    ChainState x = model.initial_state();
    double s1 = 0.0, s2 = 0.0;
    const long steps = 10000000;
    for (long i = 0; i < steps; ++i) {
        model.step(x, {0.5, 0.5}, rng);
        s1 += x[0];
        s2 += x[1];
    }
    const double expected = 4.0 / 3.0;
    CHECK(std::abs(s1 / static_cast<double>(steps) - expected) < 0.1 * expected);
    CHECK(std::abs(s2 / static_cast<double>(steps) - expected) < 0.1 * expected);
}

TEST_CASE("renewal draws have the documented means") {
    Rng rng(31);
    const long n = 1000000;
    double ia = 0.0, sv = 0.0;
    for (long i = 0; i < n; ++i) {
        ia += tandem_interarrival(rng);
        sv += tandem_weibull_service(1.0, rng);
    }
    CHECK(std::abs(ia / static_cast<double>(n) - 1.0) < 0.002);
    CHECK(std::abs(sv / static_cast<double>(n) - 0.886226925452758) < 0.002);
}

TEST_CASE("empty renewal tandem fires an arrival first") {
    TandemRenewal model;
    Rng rng(4);
    ChainState s = model.initial_state();
    model.step(s, {1.0, 1.0}, rng);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == 0.0);
}

// --- Rybko-Stolyar --------------------------------------------------------

TEST_CASE("empty network sees both arrivals equally often") {
    auto r = rybko_stolyar_rates({0.0, 0.0, 0.0, 0.0}, 1.0, 2.0, 4.0);
    CHECK(r == std::array<double, 4>{1.0, 1.0, 0.0, 0.0});
}

TEST_CASE("second-stage work preempts first-stage work") {
    // Left station holds a class-1 stage-1 and a class-2 stage-2 job; the
    // completion serves the stage-2 job.
    ChainState x = {1.0, 0.0, 0.0, 1.0};
    rybko_stolyar_apply(x, 2);
    CHECK(x == ChainState{1.0, 0.0, 0.0, 0.0});
    // Without stage-2 work, a left completion advances class 1.
    x = {1.0, 0.0, 0.0, 0.0};
    rybko_stolyar_apply(x, 2);
    CHECK(x == ChainState{0.0, 1.0, 0.0, 0.0});
    // Mirror image at the right station.
    x = {0.0, 1.0, 1.0, 0.0};
    rybko_stolyar_apply(x, 3);
    CHECK(x == ChainState{0.0, 0.0, 1.0, 0.0});
    x = {0.0, 0.0, 1.0, 0.0};
    rybko_stolyar_apply(x, 3);
    CHECK(x == ChainState{0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("rybko-stolyar rates respect busy servers only") {
    auto r = rybko_stolyar_rates({0.0, 2.0, 0.0, 0.0}, 1.0, 2.0, 4.0);
    CHECK(r[2] == 0.0);  // left station idle
    CHECK(r[3] == 4.0);
    r = rybko_stolyar_rates({3.0, 0.0, 0.0, 1.0}, 1.0, 2.0, 4.0);
    CHECK(r[2] == 2.0);
    CHECK(r[3] == 0.0);
}

// --- switch ---------------------------------------------------------------

TEST_CASE("empty switch network stays empty without arrivals") {
    SwitchNetwork model;
    Rng rng(6);
    ChainState x = model.initial_state();
    model.step(x, {0.0}, rng);
    CHECK(model.f(x) == 0.0);
}

TEST_CASE("a lone packet follows its route and departs") {
    SwitchNetwork model;
    Rng rng(7);
    ChainState x = model.initial_state();
    x[3] = 1.0;  // external queue of main switch 0

    model.step(x, {0.0}, rng);  // hop 1: into auxiliary 0
    CHECK(x[3] == 0.0);
    CHECK(x[48] == 1.0);
    CHECK(model.f(x) == 1.0);

    model.step(x, {0.0}, rng);  // hop 2: into an internal queue of main 1
    CHECK(x[48] == 0.0);
    CHECK(x[42] + x[43] == 1.0);
    CHECK(model.f(x) == 1.0);

    model.step(x, {0.0}, rng);  // hop 3: departs
    CHECK(model.f(x) == 0.0);
}

TEST_CASE("main switch selection prefers the longest queue, ties low") {
    ChainState x(SwitchNetwork::kDim, 0.0);
    x[5] = 2.0;
    x[8] = 2.0;
    x[41] = 1.0;
    CHECK(SwitchNetwork::longest_main_queue(x, 0) == 5);
    x[41] = 3.0;
    CHECK(SwitchNetwork::longest_main_queue(x, 0) == 41);
    CHECK(SwitchNetwork::longest_main_queue(x, 2) == -1);
}

TEST_CASE("switch rejects out-of-range arrival parameter") {
    SwitchNetwork model;
    Rng rng(9);
    ChainState x = model.initial_state();
    CHECK_THROWS_AS(model.step(x, {1.5}, rng), std::invalid_argument);
}

// --- random access network ------------------------------------------------

TEST_CASE("empty inactive network enables only arrivals") {
    RandomAccessNetwork model;
    ChainState s = model.initial_state();
    auto trans = model.enabled(s, 0.8);
    REQUIRE(trans.size() == 6);
    for (const auto& [t, rate] : trans) {
        CHECK(t % 4 == 0);  // all arrivals
    }
    CHECK(trans[0].second == doctest::Approx(0.8 * 0.4));
    CHECK(trans[5].second == doctest::Approx(0.8 * 0.2));
}

TEST_CASE("last-packet completion always releases the medium") {
    RandomAccessNetwork model;
    ChainState s = model.initial_state();
    s[0] = 1.0;
    s[6] = 1.0;  // node 0 active with one packet
    auto trans = model.enabled(s, 0.5);
    // psi(1) = 1: no serve-and-keep transition may appear for node 0.
    for (const auto& [t, rate] : trans) {
        CHECK(t != 2);
        if (t == 3) CHECK(rate == doctest::Approx(1.0));
    }
}

TEST_CASE("activation is blocked by active neighbors") {
    RandomAccessNetwork model;
    ChainState s = model.initial_state();
    s[2] = 1.0;        // node 2 has work
    s[6 + 0] = 1.0;    // node 0 active; 0-2 is an interference edge
    s[0] = 1.0;
    bool node2_activation = false;
    for (const auto& [t, rate] : model.enabled(s, 0.5)) {
        if (t == 4 * 2 + 1) node2_activation = true;
    }
    CHECK_FALSE(node2_activation);
}

TEST_CASE("corrupt activity states are rejected") {
    RandomAccessNetwork model;
    Rng rng(12);
    ChainState s = model.initial_state();
    s[6] = 1.0;
    s[8] = 1.0;  // nodes 0 and 2 adjacent and both active
    CHECK_THROWS_AS(model.step(s, {0.5}, rng), std::invalid_argument);
    ChainState bad = model.initial_state();
    bad[7] = 0.5;  // non-binary activity
    CHECK_THROWS_AS(model.step(bad, {0.5}, rng), std::invalid_argument);
}

TEST_CASE("no adjacent nodes are ever active along a simulated path") {
    RandomAccessNetwork model;
    Rng rng(13);
    ChainState s = model.initial_state();
    for (long i = 0; i < 200000; ++i) {
        model.step(s, {0.9}, rng);
        for (const auto& [a, b] : RandomAccessNetwork::edges()) {
            const bool both_active = s[6 + a] > 0.5 && s[6 + b] > 0.5;
            REQUIRE_FALSE(both_active);
        }
    }
}
