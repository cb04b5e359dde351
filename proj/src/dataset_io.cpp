#include "noma/dataset_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace noma {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kSumRateRelTol = 1e-6;
constexpr double kUnitNormTol = 1e-9;

ojson complex_list(const VectorArray& v) {
    ojson out = ojson::array();
    for (const auto& x : v.flat()) out.push_back(ojson::array({x.real(), x.imag()}));
    return out;
}

void read_complex_list(const ojson& j, VectorArray& v, const char* key) {
    if (!j.is_array() || j.size() != v.flat().size())
        throw std::invalid_argument(std::string("'") + key + "' has length " +
                                    std::to_string(j.is_array() ? j.size() : 0) + ", expected " +
                                    std::to_string(v.flat().size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& pair = j[i];
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument(std::string("'") + key + "' entry " + std::to_string(i) + " is not [re, im]");
        v.flat()[i] = {pair[0].get<double>(), pair[1].get<double>()};
    }
}

void read_real_list(const ojson& j, LinkArray<double>& v, const char* key) {
    if (!j.is_array() || j.size() != v.size())
        throw std::invalid_argument(std::string("'") + key + "' has length " +
                                    std::to_string(j.is_array() ? j.size() : 0) + ", expected " +
                                    std::to_string(v.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v.flat()[i] = j[i].get<double>();
}

std::string meta_path(const std::string& path) { return path + ".meta.json"; }

} // namespace

ScenarioDigest ScenarioDigest::from(const NetworkConfig& cfg) {
    return {cfg.num_bs,           cfg.num_users,    cfg.num_subcarriers, cfg.num_antennas,
            cfg.power_budget_dbm, cfg.min_rate,     cfg.bandwidth,       noma::noise_power(cfg)};
}

RateContext ScenarioDigest::rate_context() const {
    return {noise_power, bandwidth, min_rate, dbm_to_watts(power_budget_dbm), false, std::nullopt};
}

DatasetMeta split_sizes(std::size_t count) {
    const std::size_t train = count * 9 / 10;
    return {kSchemaVersion, count, train, count - train};
}

SampleRecord make_record(std::uint64_t seed, const NetworkConfig& cfg, const ChannelState& ch,
                         const Allocation& alloc, double sum_rate) {
    SampleRecord rec;
    rec.seed = seed;
    rec.cfg_digest = ScenarioDigest::from(cfg);
    rec.h = ch.h;
    rec.rho = LinkArray<double>(ch.dims(), 0.0);
    for (std::size_t i = 0; i < alloc.rho.size(); ++i) rec.rho.flat()[i] = alloc.rho.flat()[i] ? 1.0 : 0.0;
    rec.w = VectorArray(ch.dims());
    for (const auto& l : alloc.scheduled_links()) {
        auto src = alloc.w[l];
        std::copy(src.begin(), src.end(), rec.w[l].begin());
    }
    rec.p = alloc.p;
    rec.sum_rate = sum_rate;
    return rec;
}

ChannelState channel_of(const SampleRecord& rec) { return ChannelState{rec.h, {}, {}}; }

Allocation allocation_of(const SampleRecord& rec) {
    const Dims d = rec.cfg_digest.dims();
    Allocation alloc = Allocation::empty(d);
    for (std::size_t i = 0; i < rec.rho.size(); ++i) {
        const double v = rec.rho.flat()[i];
        if (v != 0.0 && v != 1.0) throw std::invalid_argument("rho is not binary");
        alloc.rho.flat()[i] = v == 1.0 ? 1 : 0;
    }
    alloc.w = rec.w;
    alloc.p = rec.p;
    return alloc;
}

std::string to_json_line(const SampleRecord& rec) {
    ojson j;
    j["schema_version"] = rec.schema_version;
    j["seed"] = rec.seed;
    const auto& d = rec.cfg_digest;
    j["cfg_digest"] = ojson{{"num_bs", d.num_bs},
                            {"num_users", d.num_users},
                            {"num_subcarriers", d.num_subcarriers},
                            {"num_antennas", d.num_antennas},
                            {"power_budget_dbm", d.power_budget_dbm},
                            {"min_rate", d.min_rate},
                            {"bandwidth", d.bandwidth},
                            {"noise_power", d.noise_power}};
    j["h"] = complex_list(rec.h);

    bool binary = true;
    for (double v : rec.rho.flat()) binary = binary && (v == 0.0 || v == 1.0);
    ojson rho = ojson::array();
    for (double v : rec.rho.flat()) {
        if (binary)
            rho.push_back(v == 1.0 ? 1 : 0);
        else
            rho.push_back(v);
    }
    j["rho"] = std::move(rho);
    j["w"] = complex_list(rec.w);
    j["p"] = rec.p.flat();
    if (rec.sum_rate) j["sum_rate"] = *rec.sum_rate;
    return j.dump();
}

SampleRecord parse_record(const std::string& line, std::size_t line_no, std::size_t index) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
        throw DatasetError("line " + std::to_string(line_no) + ": parse error: " + e.what(), line_no, index);
    }

    SampleRecord rec;
    try {
        rec.schema_version = j.at("schema_version").get<int>();
        if (rec.schema_version != kSchemaVersion)
            throw std::invalid_argument("schema_version " + std::to_string(rec.schema_version) + " is not supported");
        rec.seed = j.at("seed").get<std::uint64_t>();
        const auto& dj = j.at("cfg_digest");
        auto& d = rec.cfg_digest;
        d.num_bs = dj.at("num_bs").get<std::size_t>();
        d.num_users = dj.at("num_users").get<std::size_t>();
        d.num_subcarriers = dj.at("num_subcarriers").get<std::size_t>();
        d.num_antennas = dj.at("num_antennas").get<std::size_t>();
        d.power_budget_dbm = dj.at("power_budget_dbm").get<double>();
        d.min_rate = dj.at("min_rate").get<double>();
        d.bandwidth = dj.at("bandwidth").get<double>();
        d.noise_power = dj.at("noise_power").get<double>();
        if (d.dims().links() == 0 || d.num_antennas == 0) throw std::invalid_argument("cfg_digest has a zero dimension");

        const Dims dims = d.dims();
        rec.h = VectorArray(dims);
        rec.w = VectorArray(dims);
        rec.rho = LinkArray<double>(dims, 0.0);
        rec.p = LinkArray<double>(dims, 0.0);
        read_complex_list(j.at("h"), rec.h, "h");
        read_real_list(j.at("rho"), rec.rho, "rho");
        read_complex_list(j.at("w"), rec.w, "w");
        read_real_list(j.at("p"), rec.p, "p");
        if (j.contains("sum_rate") && !j["sum_rate"].is_null()) rec.sum_rate = j["sum_rate"].get<double>();
    } catch (const DatasetError&) {
        throw;
    } catch (const std::exception& e) {
        throw DatasetError("line " + std::to_string(line_no) + " (record " + std::to_string(index) + "): " + e.what(),
                           line_no, index);
    }
    return rec;
}

void validate_label(const SampleRecord& rec, std::size_t line_no, std::size_t index) {
    auto fail = [&](const std::string& why) {
        throw DatasetError("record " + std::to_string(index) + " (line " + std::to_string(line_no) + "): " + why,
                           line_no, index);
    };
    if (!rec.sum_rate) fail("missing sum_rate");

    Allocation alloc;
    try {
        alloc = allocation_of(rec);
    } catch (const std::exception& e) {
        fail(e.what());
    }
    for (const auto& x : rec.h.flat())
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) fail("non-finite channel entry");

    const Dims d = rec.cfg_digest.dims();
    for (std::size_t m = 0; m < d.bs; ++m)
        for (std::size_t k = 0; k < d.users; ++k)
            for (std::size_t s = 0; s < d.carriers; ++s) {
                const auto w = rec.w(m, k, s);
                if (alloc.rho(m, k, s)) {
                    if (std::abs(std::sqrt(norm_sq(w)) - 1.0) > kUnitNormTol) fail("beam is not unit norm");
                } else if (norm_sq(w) != 0.0) {
                    fail("beam is nonzero on an unscheduled link");
                }
            }

    const RateContext ctx = rec.cfg_digest.rate_context();
    const RateReport report = check_feasibility(channel_of(rec), alloc, ctx);
    if (!report.schedule_valid) fail("schedule violates the one-slot-per-user constraint");
    if (!report.powers_valid) fail("powers are negative or nonzero on unscheduled links");
    for (std::size_t m = 0; m < d.bs; ++m)
        if (report.budget_slack[m] < -1e-9 * ctx.power_budget) fail("BS " + std::to_string(m) + " exceeds its power budget");

    const double stored = *rec.sum_rate;
    const double diff = std::abs(report.sum_rate - stored);
    if (!(diff <= kSumRateRelTol * std::max(std::abs(stored), std::abs(report.sum_rate))))
        fail("stored sum_rate " + std::to_string(stored) + " differs from recomputed " + std::to_string(report.sum_rate));
}

std::size_t write_dataset(const std::vector<SampleRecord>& records, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
        for (const auto& rec : records) out << to_json_line(rec) << '\n';
        if (!out) throw std::runtime_error("write to '" + path + "' failed");
    }
    const DatasetMeta meta = split_sizes(records.size());
    ojson mj;
    mj["schema_version"] = meta.schema_version;
    mj["count"] = meta.count;
    mj["train"] = meta.train;
    mj["val"] = meta.val;
    std::ofstream out(meta_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + meta_path(path) + "' for writing");
    out << mj.dump(2) << '\n';
    if (!out) throw std::runtime_error("write to '" + meta_path(path) + "' failed");
    return records.size();
}

std::vector<SampleRecord> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open '" + path + "'", 0, 0);
    std::vector<SampleRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_record(line, line_no, out.size()));
    }
    return out;
}

std::vector<SampleRecord> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open '" + path + "'", 0, 0);
    std::vector<SampleRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto rec = parse_record(line, line_no, out.size());
        validate_label(rec, line_no, out.size());
        out.push_back(std::move(rec));
    }
    return out;
}

DatasetMeta read_meta(const std::string& path) {
    std::ifstream in(meta_path(path));
    if (!in) throw DatasetError("cannot open '" + meta_path(path) + "'", 0, 0);
    try {
        const auto j = ojson::parse(in);
        return {j.at("schema_version").get<int>(), j.at("count").get<std::size_t>(), j.at("train").get<std::size_t>(),
                j.at("val").get<std::size_t>()};
    } catch (const std::exception& e) {
        throw DatasetError(std::string("bad meta file: ") + e.what(), 0, 0);
    }
}

} // namespace noma
