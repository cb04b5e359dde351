#pragma once

#include <optional>
#include <vector>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/rate_engine.hpp"

namespace noma {

struct Slot {
    std::size_t bs = 0;
    std::size_t carrier = 0;
    bool operator==(const Slot&) const = default;
};

struct ScheduleDecision {
    std::vector<std::optional<Slot>> assignment; // per user
    std::vector<double> phi;                     // 1 if scheduled, else 0
};

/// Rate table indexed (user, bs, carrier).
class MarginalRates {
public:
    MarginalRates(std::size_t users, std::size_t bs, std::size_t carriers)
        : bs_(bs), carriers_(carriers), data_(users * bs * carriers, 0.0) {}

    double& operator()(std::size_t k, std::size_t m, std::size_t s) { return data_[(k * bs_ + m) * carriers_ + s]; }
    double operator()(std::size_t k, std::size_t m, std::size_t s) const { return data_[(k * bs_ + m) * carriers_ + s]; }

private:
    std::size_t bs_, carriers_;
    std::vector<double> data_;
};

/// Rate user k would obtain on (m, s) with beam candidate_beams(m,k,s) and power
/// candidate_powers(m,k,s), against the interference of the links already in `committed`
/// (excluding any link of user k itself).
MarginalRates marginal_rates(const ChannelState& ch, const Allocation& committed,
                             const VectorArray& candidate_beams, const LinkArray<double>& candidate_powers,
                             double noise, double bandwidth);

/// Users ordered by descending best channel norm max_{m,s} |h(m,k,s)|; ties keep index order.
std::vector<std::size_t> scheduling_order(const ChannelState& ch);

/// Greedy joint BS association and subcarrier allocation.
///
/// Users are visited in scheduling_order(). Each probes every admissible (m, s)
/// with its beam from `beams` and power P_m / (load_m + 1). The value of a probe
/// is the change in sum rate of the committed set: the user's own rate plus the
/// rate change of every committed link once BS m re-splits its budget and the new
/// link interferes. The user commits to the argmax (lowest m, then s, on ties)
/// unless the best change is <= 0.
ScheduleDecision schedule_users(const ChannelState& ch, const VectorArray& beams, const NetworkConfig& cfg);

/// Allocation realizing a decision with the given beams and a uniform per-BS power split.
Allocation apply_schedule(const ScheduleDecision& decision, const VectorArray& beams, const NetworkConfig& cfg);

/// Uniform split of P_m over the scheduled links of each BS; unscheduled links get 0.
void assign_uniform_power(Allocation& alloc, double power_budget);

} // namespace noma
