#include "noma/rate_engine.hpp"

#include <cmath>
#include <numeric>

namespace noma {

Allocation Allocation::empty(const Dims& dims) {
    return {LinkArray<std::uint8_t>(dims, 0), VectorArray(dims), LinkArray<double>(dims, 0.0)};
}

std::vector<LinkId> Allocation::scheduled_links() const {
    std::vector<LinkId> out;
    const Dims d = dims();
    for (std::size_t m = 0; m < d.bs; ++m)
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s)
                if (rho(m, k, s)) out.push_back({m, k, s});
    return out;
}

std::vector<LinkId> Allocation::links_at(std::size_t m) const {
    std::vector<LinkId> out;
    const Dims d = dims();
    for (std::size_t k = 0; k < d.users; ++k)
        for (std::size_t s = 0; s < d.carriers; ++s)
            if (rho(m, k, s)) out.push_back({m, k, s});
    return out;
}

double Allocation::power_used(std::size_t m) const {
    double total = 0.0;
    const Dims d = dims();
    for (std::size_t k = 0; k < d.users; ++k)
        for (std::size_t s = 0; s < d.carriers; ++s)
            if (rho(m, k, s)) total += p(m, k, s);
    return total;
}

bool RateReport::feasible(double power_budget, double rel_tol) const {
    if (!schedule_valid || !carrier_cap_ok || !powers_valid || !beams_unit_norm) return false;
    for (double slack : budget_slack)
        if (slack < -rel_tol * power_budget) return false;
    return true;
}

void require_same_shape(const ChannelState& ch, const Allocation& alloc) {
    const Dims d = ch.dims();
    if (!(alloc.w.dims() == d) || !alloc.rho.same_shape(d) || !alloc.p.same_shape(d))
        throw ShapeError("allocation shape does not match channel state");
}

std::vector<CarrierCoupling> build_coupling(const ChannelState& ch, const Allocation& alloc, bool sic_mode) {
    require_same_shape(ch, alloc);
    const Dims d = ch.dims();
    std::vector<CarrierCoupling> out(d.carriers);
    for (std::size_t s = 0; s < d.carriers; ++s) out[s].carrier = s;
    for (const auto& l : alloc.scheduled_links()) out[l.carrier].links.push_back(l);

    for (auto& cc : out) {
        const std::size_t n = cc.links.size();
        cc.gains.assign(n * n, 0.0);
        cc.mask.assign(n * n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const LinkId& rx = cc.links[i];
            for (std::size_t j = 0; j < n; ++j) {
                const LinkId& tx = cc.links[j];
                cc.gains[i * n + j] = std::norm(inner(ch.h(tx.bs, rx.user, cc.carrier), alloc.w[tx]));
            }
            cc.mask[i * n + i] = 0;
        }
        if (sic_mode) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j && cc.links[i].bs == cc.links[j].bs &&
                        cc.gains[j * n + j] < cc.gains[i * n + i])
                        cc.mask[i * n + j] = 0;
        }
    }
    return out;
}

double interference(const CarrierCoupling& cc, std::size_t i, const LinkArray<double>& p, double noise) {
    double total = noise;
    for (std::size_t j = 0; j < cc.size(); ++j)
        if (cc.counts(i, j)) total += cc.gain(i, j) * p[cc.links[j]];
    return total;
}

LinkArray<double> compute_sinr(const ChannelState& ch, const Allocation& alloc, double noise, bool sic_mode) {
    LinkArray<double> sinr(ch.dims(), 0.0);
    for (const auto& cc : build_coupling(ch, alloc, sic_mode)) {
        for (std::size_t i = 0; i < cc.size(); ++i) {
            const LinkId& l = cc.links[i];
            sinr[l] = cc.gain(i, i) * alloc.p[l] / interference(cc, i, alloc.p, noise);
        }
    }
    return sinr;
}

LinkArray<double> compute_rates(const LinkArray<double>& sinr, double bandwidth) {
    LinkArray<double> rate = sinr;
    for (auto& r : rate.flat()) r = bandwidth * std::log2(1.0 + r);
    return rate;
}

double sum_rate(const LinkArray<double>& rates) {
    return std::accumulate(rates.flat().begin(), rates.flat().end(), 0.0);
}

double evaluate_sum_rate(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg) {
    return sum_rate(compute_rates(compute_sinr(ch, alloc, noise_power(cfg), cfg.sic_mode), cfg.bandwidth));
}

RateContext RateContext::from(const NetworkConfig& cfg) {
    return {noise_power(cfg), cfg.bandwidth, cfg.min_rate, cfg.power_budget_watts(), cfg.sic_mode,
            cfg.max_users_per_carrier};
}

RateReport check_feasibility(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg) {
    return check_feasibility(ch, alloc, RateContext::from(cfg));
}

RateReport check_feasibility(const ChannelState& ch, const Allocation& alloc, const RateContext& ctx) {
    require_same_shape(ch, alloc);
    const Dims d = ch.dims();
    RateReport report;
    report.sinr = compute_sinr(ch, alloc, ctx.noise, ctx.sic_mode);
    report.rate = compute_rates(report.sinr, ctx.bandwidth);
    report.sum_rate = sum_rate(report.rate);

    const double budget = ctx.power_budget;
    report.budget_slack.resize(d.bs);
    for (std::size_t m = 0; m < d.bs; ++m) report.budget_slack[m] = budget - alloc.power_used(m);

    report.schedule_valid = true;
    for (auto v : alloc.rho.flat())
        if (v > 1) report.schedule_valid = false;
    for (std::size_t k = 0; k < d.users; ++k) {
        std::size_t slots = 0;
        for (std::size_t m = 0; m < d.bs; ++m)
            for (std::size_t s = 0; s < d.carriers; ++s) slots += alloc.rho(m, k, s) ? 1 : 0;
        if (slots > 1) report.schedule_valid = false;
    }

    if (ctx.max_users_per_carrier) {
        for (std::size_t m = 0; m < d.bs; ++m)
            for (std::size_t s = 0; s < d.carriers; ++s) {
                std::size_t load = 0;
                for (std::size_t k = 0; k < d.users; ++k) load += alloc.rho(m, k, s) ? 1 : 0;
                if (load > *ctx.max_users_per_carrier) report.carrier_cap_ok = false;
            }
    }

    report.powers_valid = true;
    for (std::size_t m = 0; m < d.bs; ++m)
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s) {
                const double p = alloc.p(m, k, s);
                if (!(p >= 0.0) || !std::isfinite(p)) report.powers_valid = false;
                if (!alloc.rho(m, k, s) && p != 0.0) report.powers_valid = false;
            }

    report.beams_unit_norm = true;
    for (const auto& l : alloc.scheduled_links()) {
        report.qos_slack.push_back({l, report.rate[l] - ctx.min_rate});
        if (std::abs(std::sqrt(norm_sq(alloc.w[l])) - 1.0) > 1e-9) report.beams_unit_norm = false;
    }
    return report;
}

} // namespace noma
