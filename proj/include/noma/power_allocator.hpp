#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/rate_engine.hpp"

namespace noma {

/// Waterfilling coefficients that do not admit a bracketed Lagrange multiplier.
class BisectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class StepRule { armijo, diminishing };

struct SpcaSettings {
    int outer_iters = 100;
    double bisection_rel_tol = 1e-10; // relative to P_m
    double rel_tol = 1e-6;
    StepRule step_rule = StepRule::armijo;
};

/// Per-link surrogate data around an expansion point p_t:
///   r~_l(p_l) = B log2(1 + a_l p_l) + c_l (p_l - p_t,l)
/// a_l is the own-link gain over interference-plus-noise at p_t (1/W);
/// c_l is the sum over other links of d r / d p_l at p_t (bit/s/W, <= 0).
struct SurrogateCoefficients {
    LinkArray<double> a;
    LinkArray<double> c;
    LinkArray<double> expansion; // p_t
    std::vector<LinkId> links;   // scheduled links
    double bandwidth = 0.0;
};

SurrogateCoefficients surrogate_build(const ChannelState& ch, const Allocation& alloc_at_pt, double noise,
                                      double bandwidth, bool sic_mode = false);

/// Sum over scheduled links of the surrogate at powers p.
double surrogate_value(const SurrogateCoefficients& coeffs, const LinkArray<double>& p);

/// d(sum rate)/dp for every scheduled link, zero elsewhere.
LinkArray<double> sum_rate_power_gradient(const ChannelState& ch, const Allocation& alloc, double noise,
                                          double bandwidth, bool sic_mode = false);

/// Maximizes sum_k B log2(1 + a_k p_k) + c_k p_k subject to sum_k p_k <= budget, p >= 0:
///   p_k = max(0, B / ((lambda - c_k) ln 2) - 1 / a_k),
/// with lambda = 0 when that already fits, otherwise found by bisection so the budget binds.
/// Links with a_k == 0 get no power.
std::vector<double> waterfill(std::span<const double> a, std::span<const double> c, double budget,
                              double bandwidth, double tol);

/// Runs waterfill independently for every BS.
LinkArray<double> waterfill_fixed_point(const SurrogateCoefficients& coeffs, double budget, double tol);

struct PowerResult {
    LinkArray<double> p;
    std::vector<double> trace; // true sum rate at the start and after every accepted step
};

/// Called with every outer iterate, including the starting point.
using PowerObserver = std::function<void(const LinkArray<double>&)>;

/// SPCA: p <- p + gamma (p* - p) where p* maximizes the surrogate built at p.
/// alloc.p must meet the per-BS budgets; every iterate does too.
PowerResult spca_iterate(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                         const SpcaSettings& settings = {}, const PowerObserver& observer = {});

/// Binary power control: starting from a uniform split over the scheduled links, repeatedly
/// switch off the link whose removal raises the sum rate most (its BS re-splits uniformly)
/// until no removal helps.
LinkArray<double> binary_power_start(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg);

/// SPCA from alloc.p and from binary_power_start(); returns the run with the higher final
/// sum rate. The observer sees the iterates of both runs.
PowerResult allocate_power(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg,
                           const SpcaSettings& settings = {}, const PowerObserver& observer = {});

} // namespace noma
