#include "noma/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace noma {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kMinStep = 1e-12;

void normalize(std::span<cplx> v) {
    const double n = std::sqrt(norm_sq(v));
    if (n > 0.0)
        for (auto& x : v) x /= n;
}

} // namespace

BeamProblem BeamProblem::from(const NetworkConfig& cfg, const BeamSolverSettings& settings) {
    return {noise_power(cfg), cfg.bandwidth, cfg.min_rate, settings.qos_penalty, cfg.sic_mode};
}

VectorArray mrt_init(const ChannelState& ch, const LinkArray<std::uint8_t>& rho) {
    const Dims d = ch.dims();
    VectorArray w(d);
    for (std::size_t m = 0; m < d.bs; ++m)
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s) {
                if (!rho(m, k, s)) continue;
                auto h = ch.h(m, k, s);
                auto out = w(m, k, s);
                std::copy(h.begin(), h.end(), out.begin());
                normalize(out);
            }
    return w;
}

VectorArray mrt_all(const ChannelState& ch) {
    return mrt_init(ch, LinkArray<std::uint8_t>(ch.dims(), 1));
}

double beam_objective(const ChannelState& ch, const Allocation& alloc, const BeamProblem& problem) {
    const auto rates = compute_rates(compute_sinr(ch, alloc, problem.noise, problem.sic_mode), problem.bandwidth);
    double value = sum_rate(rates);
    if (problem.qos_penalty > 0.0) {
        for (const auto& l : alloc.scheduled_links()) {
            const double shortfall = std::max(0.0, problem.min_rate - rates[l]);
            value -= problem.qos_penalty * shortfall * shortfall;
        }
    }
    return value;
}

VectorArray beam_gradient(const ChannelState& ch, const Allocation& alloc, const BeamProblem& problem) {
    VectorArray grad(ch.dims());
    const double scale = problem.bandwidth / std::numbers::ln2;

    for (const auto& cc : build_coupling(ch, alloc, problem.sic_mode)) {
        const std::size_t n = cc.size();
        for (std::size_t i = 0; i < n; ++i) {
            const LinkId& rx = cc.links[i];
            const double in = interference(cc, i, alloc.p, problem.noise);
            const double total = in + cc.gain(i, i) * alloc.p[rx];

            double weight = 1.0;
            if (problem.qos_penalty > 0.0) {
                const double rate = scale * std::log(total / in);
                weight += 2.0 * problem.qos_penalty * std::max(0.0, problem.min_rate - rate);
            }

            for (std::size_t j = 0; j < n; ++j) {
                double coeff;
                if (j == i)
                    coeff = 1.0 / total;
                else if (cc.counts(i, j))
                    coeff = 1.0 / total - 1.0 / in;
                else
                    continue;
                const LinkId& tx = cc.links[j];
                auto h = ch.h(tx.bs, rx.user, cc.carrier);
                const cplx proj = inner(h, alloc.w[tx]);
                const cplx factor = 2.0 * weight * scale * coeff * alloc.p[tx] * proj;
                auto g = grad[tx];
                for (std::size_t a = 0; a < h.size(); ++a) g[a] += factor * h[a];
            }
        }
    }
    return grad;
}

BeamResult beamform_update(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                           const BeamSolverSettings& settings) {
    const BeamProblem problem = BeamProblem::from(cfg, settings);
    const auto links = alloc.scheduled_links();

    Allocation current = alloc;
    double value = beam_objective(ch, current, problem);
    BeamResult result{current.w, {value}};
    if (links.empty()) return result;

    double step = settings.step_init;
    for (int iter = 0; iter < settings.max_iters; ++iter) {
        VectorArray dir = beam_gradient(ch, current, problem);

        // Project onto the tangent space of each sphere.
        double max_norm = 0.0;
        double dir_sq = 0.0;
        for (const auto& l : links) {
            auto w = current.w[l];
            auto g = dir[l];
            const double radial = std::real(inner(w, g));
            for (std::size_t a = 0; a < w.size(); ++a) g[a] -= radial * w[a];
            const double n2 = norm_sq(g);
            dir_sq += n2;
            max_norm = std::max(max_norm, std::sqrt(n2));
        }
        if (!(max_norm > 0.0) || !std::isfinite(max_norm)) break;
        const double slope = dir_sq / max_norm; // directional derivative along dir / max_norm

        bool accepted = false;
        Allocation trial = current;
        for (; step >= kMinStep; step *= settings.armijo_shrink) {
            for (const auto& l : links) {
                auto w = current.w[l];
                auto g = dir[l];
                auto out = trial.w[l];
                for (std::size_t a = 0; a < w.size(); ++a) out[a] = w[a] + (step / max_norm) * g[a];
                normalize(out);
            }
            const double candidate = beam_objective(ch, trial, problem);
            if (candidate > value && candidate >= value + kArmijoC * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        const double previous = value;
        current.w = trial.w;
        value = beam_objective(ch, current, problem);
        result.trace.push_back(value);
        step = std::min(settings.step_init, step / settings.armijo_shrink);
        if ((value - previous) <= settings.rel_tol * std::abs(previous)) break;
    }
    result.w = current.w;
    return result;
}

} // namespace noma
