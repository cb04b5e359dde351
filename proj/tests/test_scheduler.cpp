#include <doctest.h>

#include <cmath>
#include <random>

#include "noma/beamformer.hpp"
#include "noma/scheduler.hpp"
#include "oracles.hpp"

using namespace noma;

namespace {

NetworkConfig small_config(std::size_t bs, std::size_t users, std::size_t carriers, std::size_t antennas) {
    NetworkConfig cfg;
    cfg.num_bs = bs;
    cfg.num_users = users;
    cfg.num_subcarriers = carriers;
    cfg.num_antennas = antennas;
    return cfg;
}

// Rate of user k on (m, s) recomputed from scratch: drop k's committed links, add the
// candidate link, and run the full SINR evaluation.
double brute_force_probe(const ChannelState& ch, const Allocation& committed, const VectorArray& beams,
                         const LinkArray<double>& powers, double noise, double bandwidth, std::size_t k,
                         std::size_t m, std::size_t s) {
    Allocation a = committed;
    const Dims d = ch.dims();
    for (std::size_t n = 0; n < d.bs; ++n)
        for (std::size_t c = 0; c < d.carriers; ++c) {
            a.rho(n, k, c) = 0;
            a.p(n, k, c) = 0.0;
        }
    a.rho(m, k, s) = 1;
    auto src = beams(m, k, s);
    std::copy(src.begin(), src.end(), a.w(m, k, s).begin());
    a.p(m, k, s) = powers(m, k, s);
    return compute_rates(compute_sinr(ch, a, noise), bandwidth)(m, k, s);
}

} // namespace

TEST_CASE("single candidate equals the closed form") {
    const auto cfg = small_config(1, 1, 1, 2);
    const auto ch = oracle::random_channels(cfg.dims(), 3, 1e-6);
    const auto beams = mrt_all(ch);
    const double P = cfg.power_budget_watts();
    const double noise = noise_power(cfg);
    const auto table = marginal_rates(ch, Allocation::empty(cfg.dims()), beams, LinkArray<double>(cfg.dims(), P),
                                      noise, cfg.bandwidth);
    const double expected = cfg.bandwidth * std::log2(1.0 + norm_sq(ch.h(0, 0, 0)) * P / noise);
    CHECK(oracle::rel_err(table(0, 0, 0), expected) <= 1e-12);
}

TEST_CASE("users with identical channels get identical rows") {
    const Dims d{2, 2, 3, 2};
    auto ch = oracle::random_channels(d, 4);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t s = 0; s < 3; ++s) {
            auto src = ch.h(m, 0, s);
            std::copy(src.begin(), src.end(), ch.h(m, 1, s).begin());
        }
    const auto beams = mrt_all(ch);
    const auto table = marginal_rates(ch, Allocation::empty(d), beams, LinkArray<double>(d, 1.0), 0.1, 1e3);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t s = 0; s < 3; ++s) CHECK(table(0, m, s) == table(1, m, s));
}

TEST_CASE("marginal rates match per-candidate recomputation") {
    const Dims d{2, 3, 2, 2};
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ch = oracle::random_channels(d, rng());
        const auto committed = oracle::random_allocation(d, 1.0, rng(), 0.6);
        VectorArray beams(d);
        for (std::size_t i = 0; i < d.links(); ++i) {
            const auto w = oracle::random_unit(d.antennas, rng);
            std::copy(w.begin(), w.end(), beams.flat().begin() + static_cast<long>(i * d.antennas));
        }
        LinkArray<double> powers(d, 0.0);
        for (auto& p : powers.flat()) p = 0.1 + static_cast<double>(rng() % 100) / 100.0;

        const auto table = marginal_rates(ch, committed, beams, powers, 0.2, 1e4);
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t m = 0; m < d.bs; ++m)
                for (std::size_t s = 0; s < d.carriers; ++s)
                    CHECK(oracle::rel_err(table(k, m, s),
                                          brute_force_probe(ch, committed, beams, powers, 0.2, 1e4, k, m, s)) <= 1e-12);
    }
}

TEST_CASE("dominant BS wins the association") {
    const auto cfg = small_config(2, 1, 1, 2);
    ChannelState ch{VectorArray(cfg.dims()), {}, {}};
    ch.h(0, 0, 0)[0] = std::sqrt(10.0) * 1e-4;
    ch.h(1, 0, 0)[0] = 1e-4;
    const auto decision = schedule_users(ch, mrt_all(ch), cfg);
    REQUIRE(decision.assignment[0].has_value());
    CHECK(decision.assignment[0]->bs == 0);
    CHECK(decision.phi[0] == 1.0);
}

TEST_CASE("zero channels leave everyone unscheduled") {
    const auto cfg = small_config(2, 3, 2, 2);
    ChannelState ch{VectorArray(cfg.dims()), {}, {}};
    const auto decision = schedule_users(ch, mrt_all(ch), cfg);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK_FALSE(decision.assignment[k].has_value());
        CHECK(decision.phi[k] == 0.0);
    }
    const auto alloc = apply_schedule(decision, mrt_all(ch), cfg);
    CHECK(alloc.scheduled_links().empty());
}

TEST_CASE("ties go to the lowest BS, then lowest carrier") {
    const auto cfg = small_config(2, 1, 2, 1);
    ChannelState ch{VectorArray(cfg.dims()), {}, {}};
    for (auto& x : ch.h.flat()) x = 1e-3;
    const auto decision = schedule_users(ch, mrt_all(ch), cfg);
    REQUIRE(decision.assignment[0].has_value());
    CHECK(*decision.assignment[0] == Slot{0, 0});
}

TEST_CASE("processing order is by descending best channel norm") {
    const Dims d{1, 3, 1, 1};
    ChannelState ch{VectorArray(d), {}, {}};
    ch.h(0, 0, 0)[0] = 1.0;
    ch.h(0, 1, 0)[0] = 3.0;
    ch.h(0, 2, 0)[0] = 2.0;
    CHECK(scheduling_order(ch) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("schedules satisfy the structural constraints and the carrier cap") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = small_config(3, 10, 3, 2);
        if (trial % 2) cfg.max_users_per_carrier = 1;
        const auto ch = generate_network(cfg, rng());
        const auto alloc = apply_schedule(schedule_users(ch, mrt_all(ch), cfg), mrt_all(ch), cfg);
        const auto report = check_feasibility(ch, alloc, cfg);
        CHECK(report.schedule_valid);
        CHECK(report.carrier_cap_ok);
        CHECK(report.feasible(cfg.power_budget_watts()));
        if (cfg.max_users_per_carrier) CHECK(alloc.scheduled_links().size() <= 9);
    }
}

TEST_CASE("scheduling is deterministic") {
    const auto cfg = small_config(2, 6, 3, 2);
    const auto ch = generate_network(cfg, 77);
    const auto a = schedule_users(ch, mrt_all(ch), cfg);
    const auto b = schedule_users(ch, mrt_all(ch), cfg);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("greedy schedule is close to the exhaustive optimum") {
    const auto cfg = small_config(2, 3, 2, 2);
    const double noise = noise_power(cfg);
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto ch = generate_network(cfg, derive_seed(2024, seed));
        const auto alloc = apply_schedule(schedule_users(ch, mrt_all(ch), cfg), mrt_all(ch), cfg);
        const double greedy = oracle::sum_rate_literal(ch, alloc, noise, cfg.bandwidth);
        const double best = oracle::exhaustive_schedule_optimum(ch, cfg.power_budget_watts(), noise, cfg.bandwidth);
        REQUIRE(best > 0.0);
        CHECK(greedy <= best * (1.0 + 1e-12));
        ratio_sum += greedy / best;
    }
    CHECK(ratio_sum / 50.0 >= 0.85);
}
