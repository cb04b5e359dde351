#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/rate_engine.hpp"

namespace noma {

inline constexpr int kSchemaVersion = 1;

/// Malformed or invariant-violating dataset content. line/record are 1-based / 0-based.
class DatasetError : public std::runtime_error {
public:
    DatasetError(const std::string& what, std::size_t line, std::size_t record)
        : std::runtime_error(what), line_(line), record_(record) {}
    std::size_t line() const { return line_; }
    std::size_t record() const { return record_; }

private:
    std::size_t line_;
    std::size_t record_;
};

/// Scenario scalars carried with every record.
struct ScenarioDigest {
    std::size_t num_bs = 0;
    std::size_t num_users = 0;
    std::size_t num_subcarriers = 0;
    std::size_t num_antennas = 0;
    double power_budget_dbm = 0.0;
    double min_rate = 0.0;
    double bandwidth = 0.0;
    double noise_power = 0.0;

    static ScenarioDigest from(const NetworkConfig& cfg);
    Dims dims() const { return {num_bs, num_users, num_subcarriers, num_antennas}; }
    RateContext rate_context() const;
    bool operator==(const ScenarioDigest&) const = default;
};

/// One dataset row. For label records rho is 0/1 and sum_rate is present; prediction
/// records carry raw scheduling probabilities in rho and no sum_rate.
struct SampleRecord {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    ScenarioDigest cfg_digest;
    VectorArray h;
    LinkArray<double> rho;
    VectorArray w;
    LinkArray<double> p;
    std::optional<double> sum_rate;

    bool is_prediction() const { return !sum_rate.has_value(); }
    bool operator==(const SampleRecord&) const = default;
};

struct DatasetMeta {
    int schema_version = kSchemaVersion;
    std::size_t count = 0;
    std::size_t train = 0;
    std::size_t val = 0;
};

/// 90/10 split by record index: the first train records are the training split.
DatasetMeta split_sizes(std::size_t count);

SampleRecord make_record(std::uint64_t seed, const NetworkConfig& cfg, const ChannelState& ch,
                         const Allocation& alloc, double sum_rate);

ChannelState channel_of(const SampleRecord& rec);

/// Label records only: rho must be binary.
Allocation allocation_of(const SampleRecord& rec);

std::string to_json_line(const SampleRecord& rec);

/// Parses one line; checks schema version and array lengths only.
SampleRecord parse_record(const std::string& line, std::size_t line_no, std::size_t index);

/// Throws DatasetError if a label record breaks any invariant: binary schedule,
/// unit-norm beams on scheduled links and zeros elsewhere, feasible powers, and
/// stored sum_rate within 1e-6 relative of the recomputed value.
void validate_label(const SampleRecord& rec, std::size_t line_no, std::size_t index);

/// Writes JSONL plus `<path>.meta.json`. Returns the number of records written.
std::size_t write_dataset(const std::vector<SampleRecord>& records, const std::string& path);

/// Reads and fully validates a label dataset.
std::vector<SampleRecord> read_dataset(const std::string& path);

/// Reads a file that may hold predictions; only structural checks are applied.
std::vector<SampleRecord> read_records(const std::string& path);

DatasetMeta read_meta(const std::string& path);

} // namespace noma
