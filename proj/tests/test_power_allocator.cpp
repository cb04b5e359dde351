#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "noma/beamformer.hpp"
#include "noma/power_allocator.hpp"
#include "oracles.hpp"

using namespace noma;

namespace {

NetworkConfig synthetic_config(const Dims& d) {
    NetworkConfig cfg;
    cfg.num_bs = d.bs;
    cfg.num_users = d.users;
    cfg.num_subcarriers = d.carriers;
    cfg.num_antennas = d.antennas;
    cfg.bandwidth = 1.0;
    cfg.noise_figure = 0.0;
    cfg.noise_psd = -30.0; // 1e-6 W
    cfg.power_budget_dbm = 30.0;
    return cfg;
}

Allocation one_user_per_bs(const Dims& d, const ChannelState& ch, double p) {
    Allocation a = Allocation::empty(d);
    for (std::size_t m = 0; m < d.bs; ++m) a.rho(m, m, 0) = 1;
    a.w = mrt_init(ch, a.rho);
    for (std::size_t m = 0; m < d.bs; ++m) a.p(m, m, 0) = p;
    return a;
}

double kkt_spread(std::span<const double> a, std::span<const double> c, std::span<const double> p, double B) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (p[k] <= 0.0) continue;
        const double marginal = B * a[k] / ((1.0 + a[k] * p[k]) * std::numbers::ln2) + c[k];
        lo = std::min(lo, marginal);
        hi = std::max(hi, marginal);
    }
    return hi < lo ? 0.0 : (hi - lo) / std::max(std::abs(hi), 1e-300);
}

} // namespace

TEST_CASE("surrogate of a lone link") {
    const Dims d{1, 1, 1, 2};
    const auto cfg = synthetic_config(d);
    const auto ch = oracle::random_channels(d, 1, 1e-5);
    const auto a = one_user_per_bs(d, ch, 0.5);
    const auto coeffs = surrogate_build(ch, a, noise_power(cfg), cfg.bandwidth);
    CHECK(coeffs.c(0, 0, 0) == 0.0);
    CHECK(oracle::rel_err(coeffs.a(0, 0, 0), norm_sq(ch.h(0, 0, 0)) / noise_power(cfg)) <= 1e-12);
}

TEST_CASE("interference prices are negative and match finite differences") {
    const Dims d{2, 2, 1, 2};
    const auto cfg = synthetic_config(d);
    const double noise = noise_power(cfg);
    const double P = cfg.power_budget_watts();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ch = oracle::random_channels(d, rng(), 1e-5);
        auto a = one_user_per_bs(d, ch, 0.3 + 0.05 * trial);
        const auto coeffs = surrogate_build(ch, a, noise, cfg.bandwidth);
        for (std::size_t m = 0; m < 2; ++m) {
            const LinkId own{m, m, 0};
            const LinkId victim{1 - m, 1 - m, 0};
            CHECK(coeffs.c[own] < 0.0);
            const double base = a.p[own];
            const double fd = oracle::central_diff(
                [&](double x) {
                    a.p[own] = x;
                    const double r = oracle::rate_literal(
                        oracle::sinr_literal(ch, a, noise, victim.bs, victim.user, 0), cfg.bandwidth);
                    a.p[own] = base;
                    return r;
                },
                base, 1e-8 * P);
            CHECK(oracle::rel_err(coeffs.c[own], fd) <= 1e-4);
        }
    }
}

TEST_CASE("surrogate is tangent to the sum rate at the expansion point") {
    const Dims d{2, 3, 2, 2};
    const auto cfg = synthetic_config(d);
    const double noise = noise_power(cfg);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ch = oracle::random_channels(d, rng(), 1e-5);
        const auto a = oracle::random_allocation(d, 1.0, rng(), 1.0);
        const auto coeffs = surrogate_build(ch, a, noise, cfg.bandwidth);
        CHECK(oracle::rel_err(surrogate_value(coeffs, a.p), oracle::sum_rate_literal(ch, a, noise, cfg.bandwidth)) <=
              1e-6);

        for (const auto& l : a.scheduled_links()) {
            const double base = a.p[l];
            const double step = 1e-6 * std::max(base, 1e-3);
            LinkArray<double> p = a.p;
            Allocation probe = a;
            const double surrogate_fd = oracle::central_diff(
                [&](double x) {
                    p[l] = x;
                    return surrogate_value(coeffs, p);
                },
                base, step);
            const double true_fd = oracle::central_diff(
                [&](double x) {
                    probe.p[l] = x;
                    return oracle::sum_rate_literal(ch, probe, noise, cfg.bandwidth);
                },
                base, step);
            CHECK(oracle::rel_err(surrogate_fd, true_fd) <= 1e-6);
            const auto analytic = sum_rate_power_gradient(ch, a, noise, cfg.bandwidth);
            CHECK(oracle::rel_err(analytic[l], true_fd) <= 1e-6);
        }
    }
}

TEST_CASE("waterfilling closed cases") {
    SUBCASE("symmetric links split evenly") {
        const std::vector<double> a{5.0, 5.0}, c{0.0, 0.0};
        const auto p = waterfill(a, c, 2.0, 1.0, 1e-12);
        CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("a lone unpriced link takes the whole budget") {
        const std::vector<double> a{0.3}, c{0.0};
        const auto p = waterfill(a, c, 1e6, 1.0, 1e-4);
        CHECK(p[0] <= 1e6);
        CHECK(p[0] >= 1e6 - 1e-4);
    }
    SUBCASE("strong prices leave budget unused") {
        const std::vector<double> a{10.0}, c{-1.0};
        const auto p = waterfill(a, c, 100.0, 1.0, 1e-12);
        CHECK(oracle::rel_err(p[0], 1.0 / std::numbers::ln2 - 0.1) <= 1e-12);
    }
    SUBCASE("links with zero gain get nothing") {
        const std::vector<double> a{0.0, 2.0}, c{0.0, 0.0};
        const auto p = waterfill(a, c, 1.0, 1.0, 1e-12);
        CHECK(p[0] == 0.0);
        CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("invalid coefficients") {
        const std::vector<double> nan{std::nan("")}, zero{0.0}, pos{1.0}, one{1.0};
        CHECK_THROWS_AS(waterfill(nan, zero, 1.0, 1.0, 1e-9), BisectionError);
        CHECK_THROWS_AS(waterfill(one, pos, 1.0, 1.0, 1e-9), BisectionError);
    }
}

TEST_CASE("waterfilling matches simplex grid search") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double B = 1.0, P = 1.0;
        std::vector<double> a(3), c(3);
        for (int k = 0; k < 3; ++k) {
            a[k] = std::pow(10.0, 3.0 * u(rng) - 1.0);
            c[k] = -0.8 * u(rng);
        }
        const auto p = waterfill(a, c, P, B, 1e-10 * P);
        auto term = [&](std::size_t k, double x) { return B * std::log2(1.0 + a[k] * x) + c[k] * x; };
        double value = 0.0, used = 0.0, lipschitz = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            value += term(k, p[k]);
            used += p[k];
            lipschitz = std::max(lipschitz, B * a[k] / std::numbers::ln2 + std::abs(c[k]));
        }
        const std::size_t steps = 2000;
        const double grid = oracle::simplex_grid_max3(term, P, steps);
        const double cell_bound = 3.0 * lipschitz * P / static_cast<double>(steps);
        CHECK(used <= P * (1.0 + 1e-12));
        CHECK(value >= grid - cell_bound);
        CHECK(value <= grid + cell_bound);
        CHECK(kkt_spread(a, c, p, B) < 1e-8);
    }
}

TEST_CASE("SPCA on a single link spends the whole budget") {
    const Dims d{1, 1, 1, 2};
    const auto cfg = synthetic_config(d);
    const auto ch = oracle::random_channels(d, 2, 1e-5);
    const auto a = one_user_per_bs(d, ch, 0.1);
    const auto res = spca_iterate(ch, a, cfg);
    CHECK(res.trace.size() <= 3);
    CHECK(res.p(0, 0, 0) == doctest::Approx(cfg.power_budget_watts()).epsilon(1e-9));
}

TEST_CASE("scheduled link with a dead channel gets no power") {
    const Dims d{1, 2, 1, 2};
    const auto cfg = synthetic_config(d);
    auto ch = oracle::random_channels(d, 3, 1e-5);
    for (auto& x : ch.h(0, 1, 0)) x = 0.0;
    Allocation a = Allocation::empty(d);
    a.rho(0, 0, 0) = a.rho(0, 1, 0) = 1;
    a.w = mrt_init(ch, a.rho);
    a.w(0, 1, 0)[0] = 1.0;
    a.p(0, 0, 0) = a.p(0, 1, 0) = 0.5;
    const auto res = spca_iterate(ch, a, cfg);
    CHECK(res.p(0, 1, 0) == 0.0);
    CHECK(res.p(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("SPCA iterates stay feasible and the Armijo trace is monotone") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const Dims d{2, 5, 2, 2};
        const auto cfg = synthetic_config(d);
        const double P = cfg.power_budget_watts();
        const auto ch = oracle::random_channels(d, rng(), 1e-5);
        auto a = oracle::random_allocation(d, P, rng(), 1.0);
        for (const auto& l : a.scheduled_links()) a.w[l] = mrt_init(ch, a.rho)[l];

        SpcaSettings settings;
        settings.step_rule = trial % 4 == 3 ? StepRule::diminishing : StepRule::armijo;
        bool ok = true;
        const auto res = spca_iterate(ch, a, cfg, settings, [&](const LinkArray<double>& p) {
            for (std::size_t m = 0; m < d.bs; ++m) {
                double used = 0.0;
                for (std::size_t k = 0; k < d.users; ++k)
                    for (std::size_t s = 0; s < d.carriers; ++s) {
                        ok = ok && p(m, k, s) >= 0.0;
                        if (!a.rho(m, k, s)) ok = ok && p(m, k, s) == 0.0;
                        used += p(m, k, s);
                    }
                ok = ok && used <= P + 1e-9 * P;
            }
        });
        CHECK(ok);
        if (settings.step_rule == StepRule::armijo)
            for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] >= res.trace[i - 1] - 1e-12);
    }
}

TEST_CASE("two-cell power allocation against uniform power and a 400x400 grid") {
    const Dims d{2, 2, 1, 2};
    const auto cfg = synthetic_config(d);
    const double noise = noise_power(cfg);
    const double P = cfg.power_budget_watts();
    int at_least_99 = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ch = oracle::random_channels(d, 500 + seed, 1e-5);
        const auto uniform = one_user_per_bs(d, ch, P);
        const auto local = spca_iterate(ch, uniform, cfg);
        const auto res = allocate_power(ch, uniform, cfg);
        Allocation probe = uniform;
        double grid = 0.0;
        for (int i = 0; i < 400; ++i)
            for (int j = 0; j < 400; ++j) {
                probe.p(0, 0, 0) = P * i / 399.0;
                probe.p(1, 1, 0) = P * j / 399.0;
                grid = std::max(grid, oracle::sum_rate_literal(ch, probe, noise, cfg.bandwidth));
            }
        CHECK(local.trace.back() >= local.trace.front());
        CHECK(res.trace.back() >= local.trace.back());
        CHECK(res.trace.back() <= grid * (1.0 + 1e-9) + 1e-12);
        if (res.trace.back() >= 0.99 * grid) ++at_least_99;
    }
    CHECK(at_least_99 == 20);
}

TEST_CASE("binary power control start") {
    const Dims d{2, 2, 1, 2};
    const auto cfg = synthetic_config(d);
    const double P = cfg.power_budget_watts();
    // Equal strong cross links: one active cell beats two interfering ones.
    ChannelState ch{VectorArray(d), {}, {}};
    for (auto& x : ch.h.flat()) x = 1e-2;
    const auto a = one_user_per_bs(d, ch, P);
    const auto p = binary_power_start(ch, a, cfg);
    CHECK((p(0, 0, 0) == 0.0) != (p(1, 1, 0) == 0.0));
    CHECK(p(0, 0, 0) + p(1, 1, 0) == P);

    // Without cross links nothing is switched off.
    ChannelState iso{VectorArray(d), {}, {}};
    iso.h(0, 0, 0)[0] = iso.h(1, 1, 0)[0] = 1e-2;
    const auto q = binary_power_start(iso, one_user_per_bs(d, iso, P), cfg);
    CHECK(q(0, 0, 0) == P);
    CHECK(q(1, 1, 0) == P);
}
