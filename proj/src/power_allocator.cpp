#include "noma/power_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <numbers>
#include <string>

namespace noma {

namespace {

constexpr double kStepFloor = 1e-4;
constexpr int kMaxBracketExpansions = 200;
constexpr int kMaxBisections = 400;

double total_power(std::span<const double> a, std::span<const double> c, double lambda, double bandwidth,
                   std::vector<double>& out) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double p = 0.0;
        if (a[k] > 0.0) {
            const double denom = (lambda - c[k]) * std::numbers::ln2;
            p = denom > 0.0 ? std::max(0.0, bandwidth / denom - 1.0 / a[k])
                            : std::numeric_limits<double>::infinity();
        }
        out[k] = p;
        sum += p;
    }
    return sum;
}

} // namespace

SurrogateCoefficients surrogate_build(const ChannelState& ch, const Allocation& alloc_at_pt, double noise,
                                      double bandwidth, bool sic_mode) {
    const Dims d = ch.dims();
    SurrogateCoefficients out{LinkArray<double>(d, 0.0), LinkArray<double>(d, 0.0), alloc_at_pt.p,
                              alloc_at_pt.scheduled_links(), bandwidth};
    const double scale = bandwidth / std::numbers::ln2;

    for (const auto& cc : build_coupling(ch, alloc_at_pt, sic_mode)) {
        for (std::size_t i = 0; i < cc.size(); ++i) {
            const LinkId& rx = cc.links[i];
            const double in = interference(cc, i, alloc_at_pt.p, noise);
            const double total = in + cc.gain(i, i) * alloc_at_pt.p[rx];
            out.a[rx] = cc.gain(i, i) / in;
            // rx is the victim; charge its rate loss to every transmitter it hears.
            for (std::size_t j = 0; j < cc.size(); ++j)
                if (j != i && cc.counts(i, j))
                    out.c[cc.links[j]] += scale * cc.gain(i, j) * (1.0 / total - 1.0 / in);
        }
    }
    return out;
}

double surrogate_value(const SurrogateCoefficients& coeffs, const LinkArray<double>& p) {
    double value = 0.0;
    for (const auto& l : coeffs.links)
        value += coeffs.bandwidth * std::log2(1.0 + coeffs.a[l] * p[l]) + coeffs.c[l] * (p[l] - coeffs.expansion[l]);
    return value;
}

LinkArray<double> sum_rate_power_gradient(const ChannelState& ch, const Allocation& alloc, double noise,
                                          double bandwidth, bool sic_mode) {
    LinkArray<double> grad(ch.dims(), 0.0);
    const double scale = bandwidth / std::numbers::ln2;
    for (const auto& cc : build_coupling(ch, alloc, sic_mode)) {
        for (std::size_t i = 0; i < cc.size(); ++i) {
            const LinkId& rx = cc.links[i];
            const double in = interference(cc, i, alloc.p, noise);
            const double total = in + cc.gain(i, i) * alloc.p[rx];
            grad[rx] += scale * cc.gain(i, i) / total;
            for (std::size_t j = 0; j < cc.size(); ++j)
                if (j != i && cc.counts(i, j)) grad[cc.links[j]] += scale * cc.gain(i, j) * (1.0 / total - 1.0 / in);
        }
    }
    return grad;
}

std::vector<double> waterfill(std::span<const double> a, std::span<const double> c, double budget,
                              double bandwidth, double tol) {
    if (a.size() != c.size()) throw ShapeError("waterfill: coefficient lengths differ");
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!std::isfinite(a[k]) || a[k] < 0.0 || !std::isfinite(c[k]) || c[k] > 0.0)
            throw BisectionError("waterfill: invalid coefficients at link " + std::to_string(k) +
                                 " (a=" + std::to_string(a[k]) + ", c=" + std::to_string(c[k]) + ")");
    }
    std::vector<double> p(a.size(), 0.0);
    if (a.empty() || budget <= 0.0) return p;

    if (total_power(a, c, 0.0, bandwidth, p) <= budget) return p;

    double hi = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) hi = std::max(hi, c[k] + bandwidth * a[k] / std::numbers::ln2 + 1.0);
    int expansions = 0;
    while (total_power(a, c, hi, bandwidth, p) > budget) {
        if (++expansions > kMaxBracketExpansions) throw BisectionError("waterfill: multiplier not bracketed");
        hi *= 2.0;
    }

    double lo = 0.0;
    for (int it = 0; it < kMaxBisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double used = total_power(a, c, mid, bandwidth, p);
        if (used > budget) {
            lo = mid;
        } else {
            hi = mid;
            if (budget - used <= tol) break;
        }
    }
    total_power(a, c, hi, bandwidth, p);
    return p;
}

LinkArray<double> waterfill_fixed_point(const SurrogateCoefficients& coeffs, double budget, double tol) {
    LinkArray<double> p(Dims{coeffs.a.bs(), coeffs.a.users(), coeffs.a.carriers(), 0}, 0.0);
    for (std::size_t m = 0; m < coeffs.a.bs(); ++m) {
        std::vector<LinkId> links;
        std::vector<double> a, c;
        for (const auto& l : coeffs.links) {
            if (l.bs != m) continue;
            links.push_back(l);
            a.push_back(coeffs.a[l]);
            c.push_back(coeffs.c[l]);
        }
        const auto pm = waterfill(a, c, budget, coeffs.bandwidth, tol);
        for (std::size_t i = 0; i < links.size(); ++i) p[links[i]] = pm[i];
    }
    return p;
}

PowerResult spca_iterate(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                         const SpcaSettings& settings, const PowerObserver& observer) {
    const double noise = noise_power(cfg);
    const double budget = cfg.power_budget_watts();
    const double tol = settings.bisection_rel_tol * budget;
    const auto links = alloc.scheduled_links();

    Allocation current = alloc;
    double value = evaluate_sum_rate(ch, current, cfg);
    PowerResult result{current.p, {value}};
    if (observer) observer(current.p);
    if (links.empty()) return result;

    Allocation trial = current;
    for (int t = 0; t < settings.outer_iters; ++t) {
        const auto coeffs = surrogate_build(ch, current, noise, cfg.bandwidth, cfg.sic_mode);
        const auto target = waterfill_fixed_point(coeffs, budget, tol);

        auto blend = [&](double gamma) {
            for (const auto& l : links) trial.p[l] = current.p[l] + gamma * (target[l] - current.p[l]);
        };

        const double previous = value;
        if (settings.step_rule == StepRule::armijo) {
            bool accepted = false;
            for (double gamma = 1.0; gamma >= kStepFloor; gamma *= 0.5) {
                blend(gamma);
                const double candidate = evaluate_sum_rate(ch, trial, cfg);
                if (candidate > value) {
                    value = candidate;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
        } else {
            blend(1.0 / std::pow(static_cast<double>(t + 1), 0.6));
            value = evaluate_sum_rate(ch, trial, cfg);
        }

        current.p = trial.p;
        result.trace.push_back(value);
        if (observer) observer(current.p);
        if (std::abs(value - previous) <= settings.rel_tol * std::abs(previous)) break;
    }
    result.p = current.p;
    return result;
}

LinkArray<double> binary_power_start(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg) {
    const double budget = cfg.power_budget_watts();
    const Dims d = ch.dims();
    LinkArray<std::uint8_t> on = alloc.rho;

    Allocation trial = alloc;
    auto spread = [&](const LinkArray<std::uint8_t>& active) {
        for (std::size_t m = 0; m < d.bs; ++m) {
            const auto links = alloc.links_at(m);
            std::size_t n = 0;
            for (const auto& l : links) n += active[l] ? 1 : 0;
            for (const auto& l : links) trial.p[l] = active[l] ? budget / static_cast<double>(n) : 0.0;
        }
        return evaluate_sum_rate(ch, trial, cfg);
    };

    double value = spread(on);
    const auto links = alloc.scheduled_links();
    for (;;) {
        double best = value;
        std::optional<LinkId> drop;
        for (const auto& l : links) {
            if (!on[l]) continue;
            on[l] = 0;
            const double v = spread(on);
            on[l] = 1;
            if (v > best) {
                best = v;
                drop = l;
            }
        }
        if (!drop) break;
        on[*drop] = 0;
        value = best;
    }
    spread(on);
    return trial.p;
}

PowerResult allocate_power(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                           const SpcaSettings& settings, const PowerObserver& observer) {
    auto from_input = spca_iterate(ch, alloc, cfg, settings, observer);
    Allocation start = alloc;
    start.p = binary_power_start(ch, alloc, cfg);
    if (start.p == alloc.p) return from_input;
    auto from_binary = spca_iterate(ch, start, cfg, settings, observer);
    return from_binary.trace.back() > from_input.trace.back() ? from_binary : from_input;
}

} // namespace noma
