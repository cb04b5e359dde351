#include "noma/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace noma {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double NetworkConfig::power_budget_watts() const { return dbm_to_watts(power_budget_dbm); }

double noise_power(const NetworkConfig& cfg) {
    return dbm_to_watts(cfg.noise_psd + 10.0 * std::log10(cfg.bandwidth) + cfg.noise_figure);
}

void NetworkConfig::validate() const {
    if (num_bs == 0 || num_users == 0 || num_subcarriers == 0 || num_antennas == 0)
        throw ConfigError("num_bs, num_users, num_subcarriers and num_antennas must be >= 1");
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
    if (!(cell_radius > 0.0)) throw ConfigError("cell_radius must be > 0");
    if (!(min_distance >= 0.0) || min_distance >= cell_radius)
        throw ConfigError("min_distance must lie in [0, cell_radius)");
    if (!(pathloss_exponent > 0.0)) throw ConfigError("pathloss_exponent must be > 0");
    if (!(carrier_freq > 0.0)) throw ConfigError("carrier_freq must be > 0");
    if (!(min_rate >= 0.0)) throw ConfigError("min_rate must be >= 0");
    if (!std::isfinite(power_budget_dbm)) throw ConfigError("power_budget_dbm must be finite");
    if (max_users_per_carrier && *max_users_per_carrier == 0)
        throw ConfigError("max_users_per_carrier must be >= 1 or unlimited");
    const double sigma2 = noise_power(*this);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("derived noise power must be > 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("bad value for '" + key + "': '" + text + "'");
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

using Setter = std::function<void(NetworkConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"num_bs", [](auto& c, auto& k, auto& v) { c.num_bs = parse_number<std::size_t>(k, v); }},
        {"num_users", [](auto& c, auto& k, auto& v) { c.num_users = parse_number<std::size_t>(k, v); }},
        {"num_subcarriers", [](auto& c, auto& k, auto& v) { c.num_subcarriers = parse_number<std::size_t>(k, v); }},
        {"num_antennas", [](auto& c, auto& k, auto& v) { c.num_antennas = parse_number<std::size_t>(k, v); }},
        {"power_budget_dbm", [](auto& c, auto& k, auto& v) { c.power_budget_dbm = parse_number<double>(k, v); }},
        {"min_rate", [](auto& c, auto& k, auto& v) { c.min_rate = parse_number<double>(k, v); }},
        {"bandwidth", [](auto& c, auto& k, auto& v) { c.bandwidth = parse_number<double>(k, v); }},
        {"noise_psd", [](auto& c, auto& k, auto& v) { c.noise_psd = parse_number<double>(k, v); }},
        {"noise_figure", [](auto& c, auto& k, auto& v) { c.noise_figure = parse_number<double>(k, v); }},
        {"cell_radius", [](auto& c, auto& k, auto& v) { c.cell_radius = parse_number<double>(k, v); }},
        {"min_distance", [](auto& c, auto& k, auto& v) { c.min_distance = parse_number<double>(k, v); }},
        {"pathloss_exponent", [](auto& c, auto& k, auto& v) { c.pathloss_exponent = parse_number<double>(k, v); }},
        {"carrier_freq", [](auto& c, auto& k, auto& v) { c.carrier_freq = parse_number<double>(k, v); }},
        {"max_users_per_carrier",
         [](auto& c, auto& k, auto& v) {
             if (v == "unlimited")
                 c.max_users_per_carrier.reset();
             else
                 c.max_users_per_carrier = parse_number<std::size_t>(k, v);
         }},
        {"sic_mode", [](auto& c, auto& k, auto& v) { c.sic_mode = parse_bool(k, v); }},
        {"rng_seed", [](auto& c, auto& k, auto& v) { c.rng_seed = parse_number<std::uint64_t>(k, v); }},
    };
    return table;
}

} // namespace

NetworkConfig parse_config(std::istream& in) {
    NetworkConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

NetworkConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_config(std::ostream& out, const NetworkConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "num_bs = " << cfg.num_bs << '\n'
       << "num_users = " << cfg.num_users << '\n'
       << "num_subcarriers = " << cfg.num_subcarriers << '\n'
       << "num_antennas = " << cfg.num_antennas << '\n'
       << "power_budget_dbm = " << cfg.power_budget_dbm << '\n'
       << "min_rate = " << cfg.min_rate << '\n'
       << "bandwidth = " << cfg.bandwidth << '\n'
       << "noise_psd = " << cfg.noise_psd << '\n'
       << "noise_figure = " << cfg.noise_figure << '\n'
       << "cell_radius = " << cfg.cell_radius << '\n'
       << "min_distance = " << cfg.min_distance << '\n'
       << "pathloss_exponent = " << cfg.pathloss_exponent << '\n'
       << "carrier_freq = " << cfg.carrier_freq << '\n'
       << "max_users_per_carrier = ";
    if (cfg.max_users_per_carrier)
        os << *cfg.max_users_per_carrier;
    else
        os << "unlimited";
    os << '\n'
       << "sic_mode = " << (cfg.sic_mode ? "true" : "false") << '\n'
       << "rng_seed = " << cfg.rng_seed << '\n';
    out << os.str();
}

} // namespace noma
