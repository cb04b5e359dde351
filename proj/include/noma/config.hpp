#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "noma/types.hpp"

namespace noma {

/// Scenario parameters for one multi-cell multi-carrier downlink network.
///
/// Defaults reproduce the reference setup: 4 BSs with 12 users each, S = K/2
/// subcarriers of 250 kHz, N = 2 antennas, path-loss exponent 3.7, -80 dBm/Hz
/// noise density with a 7 dB noise figure and 500 m cells.
struct NetworkConfig {
    std::size_t num_bs = 4;
    std::size_t num_users = 48;
    std::size_t num_subcarriers = 24;
    std::size_t num_antennas = 2;
    double power_budget_dbm = 30.0;
    double min_rate = 1e5;          // bit/s
    double bandwidth = 250e3;       // Hz, per subcarrier
    double noise_psd = -80.0;       // dBm/Hz
    double noise_figure = 7.0;      // dB
    double cell_radius = 500.0;     // m
    double min_distance = 10.0;     // m
    double pathloss_exponent = 3.7;
    double carrier_freq = 2.4e9;    // Hz; recorded only
    std::optional<std::size_t> max_users_per_carrier; // unset = unlimited
    bool sic_mode = false;
    std::uint64_t rng_seed = 1;

    Dims dims() const { return {num_bs, num_users, num_subcarriers, num_antennas}; }
    double power_budget_watts() const;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Thermal noise power per subcarrier in watts.
double noise_power(const NetworkConfig& cfg);

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
NetworkConfig parse_config(std::istream& in);
NetworkConfig load_config(const std::string& path);

/// Writes every field in the same format parse_config accepts.
void write_config(std::ostream& out, const NetworkConfig& cfg);

} // namespace noma
