#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noma/beamformer.hpp"
#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/dataset_io.hpp"
#include "noma/power_allocator.hpp"
#include "noma/rate_engine.hpp"

namespace noma {

struct BaselineSettings {
    int max_rounds = 10;
    double rel_tol = 1e-4;
    BeamSolverSettings beam;
    SpcaSettings power;
};

/// Objective trace of one sub-solver call inside one alternation round.
struct StageTrace {
    int round = 0;
    std::string stage; // "beam" or "power"
    std::vector<double> values;
};

struct SolveResult {
    Allocation alloc;
    RateReport report;
    std::vector<double> outer_trace; // sum rate of every accepted round
    int rounds = 0;                  // rounds executed, including a rejected last one
    double wall_time = 0.0;          // seconds
    std::vector<StageTrace> stages;
};

/// Alternates scheduling, beamforming and power allocation starting from MRT beams and
/// uniform powers. A round is kept only if it does not lower the sum rate; the loop stops
/// on a rejected round, on relative improvement below rel_tol, or after max_rounds.
SolveResult solve_baseline(const ChannelState& ch, const NetworkConfig& cfg, const BaselineSettings& settings = {});

/// Comparison heuristic: every user on a uniformly random admissible (m, s), MRT beams,
/// uniform per-BS power split.
Allocation random_heuristic(const ChannelState& ch, const NetworkConfig& cfg, Rng& rng);

/// Makes a raw prediction scoreable: per-user argmax of rho with threshold 0.5 (respecting
/// max_users_per_carrier), beams renormalized (MRT if the predicted beam is zero), powers
/// clipped at zero and scaled down per BS when the budget is exceeded.
Allocation project_prediction(const SampleRecord& rec, std::optional<std::size_t> max_users_per_carrier = {});

enum class SolverKind { baseline, heuristic };

struct CdfRow {
    double sum_rate = 0.0;
    double cum_prob = 0.0;
};

/// Sorted samples with cumulative probability (i + 1) / n.
std::vector<CdfRow> empirical_cdf(std::vector<double> samples);

/// Sum rate of sample i in [0, n), drawn with derive_seed(base_seed, i).
std::vector<double> sample_sum_rates(const NetworkConfig& cfg, std::size_t num_samples, std::uint64_t base_seed,
                                     SolverKind solver, std::size_t workers, const BaselineSettings& settings = {});

/// Projects and re-scores every prediction record.
std::vector<double> score_predictions(const std::vector<SampleRecord>& records, std::size_t workers);

std::vector<CdfRow> evaluate_cdf(const NetworkConfig& cfg, std::size_t num_samples, std::uint64_t base_seed,
                                 SolverKind solver, std::size_t workers);

/// Writes `sum_rate_bps,cum_prob` rows with 17 significant digits.
void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path);

} // namespace noma
