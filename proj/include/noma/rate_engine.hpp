#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/types.hpp"

namespace noma {

/// Decision triple: binary schedule, unit-norm beams and transmit powers (W).
struct Allocation {
    LinkArray<std::uint8_t> rho;
    VectorArray w;
    LinkArray<double> p;

    static Allocation empty(const Dims& dims);

    Dims dims() const { return w.dims(); }
    bool scheduled(const LinkId& l) const { return rho[l] != 0; }
    std::vector<LinkId> scheduled_links() const;
    /// Scheduled links at BS m.
    std::vector<LinkId> links_at(std::size_t m) const;
    double power_used(std::size_t m) const;
    bool operator==(const Allocation&) const = default;
};

struct QosSlack {
    LinkId link;
    double slack = 0.0; // r - r_min, bit/s
};

struct RateReport {
    LinkArray<double> sinr;
    LinkArray<double> rate;
    double sum_rate = 0.0;
    std::vector<double> budget_slack; // P_m - sum(rho p), watts
    std::vector<QosSlack> qos_slack;  // scheduled links only
    bool schedule_valid = false;      // binary rho, at most one slot per user
    bool carrier_cap_ok = true;       // max_users_per_carrier respected
    bool powers_valid = false;        // p >= 0 everywhere, p = 0 where unscheduled
    bool beams_unit_norm = false;     // |w| = 1 on scheduled links

    /// Every structural constraint holds and no budget is exceeded beyond rel_tol * P_m.
    /// QoS is reported through qos_slack but not required.
    bool feasible(double power_budget, double rel_tol = 1e-9) const;
};

/// Per-subcarrier interference coupling among the scheduled links.
///
/// gain(i, j) = |h_{bs(j), user(i), s}^H w_j|^2 is the power gain from
/// transmitter j to receiver i. counts(i, j) tells whether j's signal is left
/// in i's interference (always true for i != j unless cancelled by SIC).
struct CarrierCoupling {
    std::size_t carrier = 0;
    std::vector<LinkId> links;
    std::vector<double> gains;
    std::vector<std::uint8_t> mask;

    std::size_t size() const { return links.size(); }
    double gain(std::size_t i, std::size_t j) const { return gains[i * links.size() + j]; }
    bool counts(std::size_t i, std::size_t j) const { return mask[i * links.size() + j] != 0; }
};

std::vector<CarrierCoupling> build_coupling(const ChannelState& ch, const Allocation& alloc, bool sic_mode);

/// Interference-plus-noise seen by link i of a coupling under powers p.
double interference(const CarrierCoupling& cc, std::size_t i, const LinkArray<double>& p, double noise);

/// Linear SINR per link; zero where rho = 0.
/// With sic_mode, a user cancels intra-cell signals of users whose effective gain |h^H w|^2 is smaller.
LinkArray<double> compute_sinr(const ChannelState& ch, const Allocation& alloc, double noise,
                               bool sic_mode = false);

/// B log2(1 + sinr), elementwise.
LinkArray<double> compute_rates(const LinkArray<double>& sinr, double bandwidth);

double sum_rate(const LinkArray<double>& rates);

/// Network sum rate of an allocation in one call.
double evaluate_sum_rate(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg);

/// Scalars needed to score an allocation, detached from the scenario geometry.
struct RateContext {
    double noise = 0.0;
    double bandwidth = 0.0;
    double min_rate = 0.0;
    double power_budget = 0.0;
    bool sic_mode = false;
    std::optional<std::size_t> max_users_per_carrier;

    static RateContext from(const NetworkConfig& cfg);
};

/// Fills every slack field; constraint violations are reported, never thrown.
RateReport check_feasibility(const ChannelState& ch, const Allocation& alloc, const RateContext& ctx);
RateReport check_feasibility(const ChannelState& ch, const Allocation& alloc, const NetworkConfig& cfg);

void require_same_shape(const ChannelState& ch, const Allocation& alloc);

} // namespace noma
