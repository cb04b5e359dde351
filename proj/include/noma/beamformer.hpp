#pragma once

#include <vector>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/rate_engine.hpp"

namespace noma {

struct BeamSolverSettings {
    int max_iters = 200;
    double step_init = 1.0;
    double armijo_shrink = 0.5;
    double rel_tol = 1e-6;
    double qos_penalty = 0.0; // mu
};

/// Scalars the beam objective depends on besides channels and the allocation.
struct BeamProblem {
    double noise = 0.0;
    double bandwidth = 0.0;
    double min_rate = 0.0;
    double qos_penalty = 0.0;
    bool sic_mode = false;

    static BeamProblem from(const NetworkConfig& cfg, const BeamSolverSettings& settings);
};

struct BeamResult {
    VectorArray w;
    std::vector<double> trace; // objective at the start and after every accepted step
};

/// w = h / |h| on every link with rho = 1; zero elsewhere.
VectorArray mrt_init(const ChannelState& ch, const LinkArray<std::uint8_t>& rho);

/// w = h / |h| on every (m, k, s); candidate beams for scheduling probes.
VectorArray mrt_all(const ChannelState& ch);

/// Sum rate minus qos_penalty * sum over scheduled links of max(0, r_min - r)^2.
double beam_objective(const ChannelState& ch, const Allocation& alloc, const BeamProblem& problem);

/// Real gradient of beam_objective packed as re + i*im per beam entry (twice the Wirtinger
/// derivative with respect to conj(w)). Zero on unscheduled links.
VectorArray beam_gradient(const ChannelState& ch, const Allocation& alloc, const BeamProblem& problem);

/// Riemannian projected ascent on the product of unit spheres with Armijo backtracking.
/// Steps are only accepted when the objective increases, so the trace is non-decreasing
/// and the worst case returns the input beams.
BeamResult beamform_update(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                           const BeamSolverSettings& settings = {});

} // namespace noma
