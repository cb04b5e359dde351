#include "noma/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noma {

namespace {

// Interference-plus-noise at user k on carrier s from every committed link of another user.
double snapshot_interference(const ChannelState& ch, const std::vector<std::vector<LinkId>>& by_carrier,
                             const Allocation& committed, std::size_t k, std::size_t s, double noise) {
    double total = noise;
    for (const auto& t : by_carrier[s]) {
        if (t.user == k) continue;
        total += std::norm(inner(ch.h(t.bs, k, s), committed.w[t])) * committed.p[t];
    }
    return total;
}

std::vector<std::vector<LinkId>> links_by_carrier(const Allocation& alloc) {
    std::vector<std::vector<LinkId>> out(alloc.dims().carriers);
    for (const auto& l : alloc.scheduled_links()) out[l.carrier].push_back(l);
    return out;
}

// Sum rate after adding link l to the committed set with BS l.bs re-split uniformly.
double commit_value(const ChannelState& ch, Allocation& snapshot, const LinkId& l, double budget, double noise,
                    double bandwidth) {
    const auto before = snapshot.links_at(l.bs);
    const double share = budget / static_cast<double>(before.size() + 1);
    snapshot.rho[l] = 1;
    for (const auto& t : before) snapshot.p[t] = share;
    snapshot.p[l] = share;
    const double value = sum_rate(compute_rates(compute_sinr(ch, snapshot, noise), bandwidth));
    snapshot.rho[l] = 0;
    snapshot.p[l] = 0.0;
    const double old_share = before.empty() ? 0.0 : budget / static_cast<double>(before.size());
    for (const auto& t : before) snapshot.p[t] = old_share;
    return value;
}

} // namespace

MarginalRates marginal_rates(const ChannelState& ch, const Allocation& committed,
                             const VectorArray& candidate_beams, const LinkArray<double>& candidate_powers,
                             double noise, double bandwidth) {
    require_same_shape(ch, committed);
    const Dims d = ch.dims();
    if (!(candidate_beams.dims() == d) || !candidate_powers.same_shape(d))
        throw ShapeError("candidate beams/powers do not match channel state");

    const auto by_carrier = links_by_carrier(committed);
    MarginalRates table(d.users, d.bs, d.carriers);
    for (std::size_t k = 0; k < d.users; ++k)
        for (std::size_t s = 0; s < d.carriers; ++s) {
            const double in = snapshot_interference(ch, by_carrier, committed, k, s, noise);
            for (std::size_t m = 0; m < d.bs; ++m) {
                const double signal = std::norm(inner(ch.h(m, k, s), candidate_beams(m, k, s))) *
                                      candidate_powers(m, k, s);
                table(k, m, s) = bandwidth * std::log2(1.0 + signal / in);
            }
        }
    return table;
}

std::vector<std::size_t> scheduling_order(const ChannelState& ch) {
    const Dims d = ch.dims();
    std::vector<double> best(d.users, 0.0);
    for (std::size_t m = 0; m < d.bs; ++m)
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s)
                best[k] = std::max(best[k], norm_sq(ch.h(m, k, s)));

    std::vector<std::size_t> order(d.users);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return best[a] > best[b]; });
    return order;
}

void assign_uniform_power(Allocation& alloc, double power_budget) {
    const Dims d = alloc.dims();
    for (std::size_t m = 0; m < d.bs; ++m) {
        const auto links = alloc.links_at(m);
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s) alloc.p(m, k, s) = 0.0;
        if (links.empty()) continue;
        const double share = power_budget / static_cast<double>(links.size());
        for (const auto& l : links) alloc.p[l] = share;
    }
}

ScheduleDecision schedule_users(const ChannelState& ch, const VectorArray& beams, const NetworkConfig& cfg) {
    const Dims d = ch.dims();
    if (!(beams.dims() == d)) throw ShapeError("beams do not match channel state");

    const double budget = cfg.power_budget_watts();
    const double noise = noise_power(cfg);

    ScheduleDecision decision{std::vector<std::optional<Slot>>(d.users), std::vector<double>(d.users, 0.0)};
    Allocation snapshot = Allocation::empty(d);
    snapshot.w = beams;
    std::vector<std::size_t> bs_load(d.bs, 0);
    std::vector<std::size_t> slot_load(d.bs * d.carriers, 0);

    double committed_rate = 0.0;
    for (const std::size_t k : scheduling_order(ch)) {
        double best_gain = 0.0;
        std::optional<Slot> best;
        for (std::size_t m = 0; m < d.bs; ++m) {
            for (std::size_t s = 0; s < d.carriers; ++s) {
                if (cfg.max_users_per_carrier && slot_load[m * d.carriers + s] >= *cfg.max_users_per_carrier)
                    continue;
                const double gain = commit_value(ch, snapshot, {m, k, s}, budget, noise, cfg.bandwidth) -
                                    committed_rate;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = Slot{m, s};
                }
            }
        }
        if (!best) continue;

        decision.assignment[k] = best;
        decision.phi[k] = 1.0;
        snapshot.rho(best->bs, k, best->carrier) = 1;
        ++bs_load[best->bs];
        ++slot_load[best->bs * d.carriers + best->carrier];
        const double share = budget / static_cast<double>(bs_load[best->bs]);
        for (const auto& l : snapshot.links_at(best->bs)) snapshot.p[l] = share;
        committed_rate = sum_rate(compute_rates(compute_sinr(ch, snapshot, noise), cfg.bandwidth));
    }
    return decision;
}

Allocation apply_schedule(const ScheduleDecision& decision, const VectorArray& beams, const NetworkConfig& cfg) {
    Allocation alloc = Allocation::empty(beams.dims());
    for (std::size_t k = 0; k < decision.assignment.size(); ++k) {
        if (!decision.assignment[k]) continue;
        const LinkId l{decision.assignment[k]->bs, k, decision.assignment[k]->carrier};
        alloc.rho[l] = 1;
        auto src = beams[l];
        std::copy(src.begin(), src.end(), alloc.w[l].begin());
    }
    assign_uniform_power(alloc, cfg.power_budget_watts());
    return alloc;
}

} // namespace noma
