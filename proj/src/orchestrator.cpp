#include "noma/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "noma/parallel.hpp"
#include "noma/scheduler.hpp"

namespace noma {

SolveResult solve_baseline(const ChannelState& ch, const NetworkConfig& cfg, const BaselineSettings& settings) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.alloc = Allocation::empty(ch.dims());
    double best = -1.0;

    VectorArray probe_beams = mrt_all(ch);
    for (int round = 1; round <= settings.max_rounds; ++round) {
        result.rounds = round;
        const auto decision = schedule_users(ch, probe_beams, cfg);
        Allocation alloc = apply_schedule(decision, probe_beams, cfg);

        auto beams = beamform_update(ch, alloc, cfg, settings.beam);
        alloc.w = std::move(beams.w);
        result.stages.push_back({round, "beam", std::move(beams.trace)});

        auto powers = allocate_power(ch, alloc, cfg, settings.power);
        alloc.p = std::move(powers.p);
        result.stages.push_back({round, "power", std::move(powers.trace)});
        // Links switched off by the power stage carry no rate; drop them from the schedule.
        for (const auto& l : alloc.scheduled_links()) {
            if (alloc.p[l] > 0.0) continue;
            alloc.rho[l] = 0;
            for (auto& x : alloc.w[l]) x = 0.0;
        }

        const double value = evaluate_sum_rate(ch, alloc, cfg);
        if (value < best) break;

        const double previous = best;
        result.alloc = alloc;
        result.outer_trace.push_back(value);
        best = value;
        if (previous >= 0.0 && value - previous <= settings.rel_tol * std::abs(previous)) break;
        if (previous < 0.0 && value == 0.0) break;

        // Optimized beams become the probes for links that stay scheduled.
        for (const auto& l : alloc.scheduled_links()) {
            auto src = alloc.w[l];
            std::copy(src.begin(), src.end(), probe_beams[l].begin());
        }
    }

    result.report = check_feasibility(ch, result.alloc, cfg);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

Allocation random_heuristic(const ChannelState& ch, const NetworkConfig& cfg, Rng& rng) {
    const Dims d = ch.dims();
    Allocation alloc = Allocation::empty(d);
    std::vector<std::size_t> slot_load(d.bs * d.carriers, 0);
    for (std::size_t k = 0; k < d.users; ++k) {
        std::vector<std::size_t> open;
        for (std::size_t slot = 0; slot < slot_load.size(); ++slot)
            if (!cfg.max_users_per_carrier || slot_load[slot] < *cfg.max_users_per_carrier) open.push_back(slot);
        if (open.empty()) continue;
        const std::size_t slot = open[rng() % open.size()];
        ++slot_load[slot];
        alloc.rho(slot / d.carriers, k, slot % d.carriers) = 1;
    }
    alloc.w = mrt_init(ch, alloc.rho);
    assign_uniform_power(alloc, cfg.power_budget_watts());
    return alloc;
}

Allocation project_prediction(const SampleRecord& rec, std::optional<std::size_t> max_users_per_carrier) {
    const Dims d = rec.cfg_digest.dims();
    Allocation alloc = Allocation::empty(d);

    // Most confident users pick first so a carrier cap is filled by the strongest claims.
    std::vector<std::pair<double, std::size_t>> confidence;
    for (std::size_t k = 0; k < d.users; ++k) {
        double top = 0.0;
        for (std::size_t m = 0; m < d.bs; ++m)
            for (std::size_t s = 0; s < d.carriers; ++s) top = std::max(top, rec.rho(m, k, s));
        confidence.emplace_back(top, k);
    }
    std::stable_sort(confidence.begin(), confidence.end(), [](auto& a, auto& b) { return a.first > b.first; });

    std::vector<std::size_t> slot_load(d.bs * d.carriers, 0);
    for (const auto& [top, k] : confidence) {
        double best = 0.5;
        std::optional<LinkId> choice;
        for (std::size_t m = 0; m < d.bs; ++m)
            for (std::size_t s = 0; s < d.carriers; ++s) {
                if (max_users_per_carrier && slot_load[m * d.carriers + s] >= *max_users_per_carrier) continue;
                const double v = rec.rho(m, k, s);
                if (v >= best && (!choice || v > best)) {
                    best = v;
                    choice = LinkId{m, k, s};
                }
            }
        if (!choice) continue;
        alloc.rho[*choice] = 1;
        ++slot_load[choice->bs * d.carriers + choice->carrier];
    }

    for (const auto& l : alloc.scheduled_links()) {
        auto out = alloc.w[l];
        auto src = rec.w[l];
        double n2 = norm_sq(src);
        if (!(n2 > 0.0) || !std::isfinite(n2)) {
            src = rec.h[l];
            n2 = norm_sq(src);
        }
        const double n = std::sqrt(n2);
        for (std::size_t a = 0; a < out.size(); ++a) out[a] = n > 0.0 ? src[a] / n : cplx{a == 0 ? 1.0 : 0.0, 0.0};
        const double p = rec.p[l];
        alloc.p[l] = std::isfinite(p) ? std::max(0.0, p) : 0.0;
    }

    const double budget = dbm_to_watts(rec.cfg_digest.power_budget_dbm);
    for (std::size_t m = 0; m < d.bs; ++m) {
        const double used = alloc.power_used(m);
        if (used <= budget) continue;
        const double factor = budget / used;
        for (const auto& l : alloc.links_at(m)) alloc.p[l] *= factor;
        // Rounding can leave the scaled sum a hair above the budget.
        while (alloc.power_used(m) > budget)
            for (const auto& l : alloc.links_at(m)) alloc.p[l] = std::nextafter(alloc.p[l], 0.0);
    }
    return alloc;
}

std::vector<CdfRow> empirical_cdf(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    std::vector<CdfRow> rows;
    rows.reserve(samples.size());
    const auto n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) rows.push_back({samples[i], static_cast<double>(i + 1) / n});
    return rows;
}

std::vector<double> sample_sum_rates(const NetworkConfig& cfg, std::size_t num_samples, std::uint64_t base_seed,
                                     SolverKind solver, std::size_t workers, const BaselineSettings& settings) {
    std::vector<double> out(num_samples, 0.0);
    parallel_for(num_samples, workers, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(base_seed, i);
        const ChannelState ch = generate_network(cfg, seed);
        if (solver == SolverKind::baseline) {
            out[i] = solve_baseline(ch, cfg, settings).report.sum_rate;
        } else {
            Rng rng(derive_seed(seed, 1));
            out[i] = evaluate_sum_rate(ch, random_heuristic(ch, cfg, rng), cfg);
        }
    });
    return out;
}

std::vector<double> score_predictions(const std::vector<SampleRecord>& records, std::size_t workers) {
    std::vector<double> out(records.size(), 0.0);
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const auto& rec = records[i];
        const Allocation alloc = project_prediction(rec);
        out[i] = check_feasibility(channel_of(rec), alloc, rec.cfg_digest.rate_context()).sum_rate;
    });
    return out;
}

std::vector<CdfRow> evaluate_cdf(const NetworkConfig& cfg, std::size_t num_samples, std::uint64_t base_seed,
                                 SolverKind solver, std::size_t workers) {
    return empirical_cdf(sample_sum_rates(cfg, num_samples, base_seed, solver, workers));
}

void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "sum_rate_bps,cum_prob\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", row.sum_rate, row.cum_prob);
        out << buf;
    }
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace noma
