#include "dfstomo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dfstomo/errors.hpp"

namespace dfstomo {

using json = nlohmann::ordered_json;

namespace {

constexpr int RECORD_FORMAT_VERSION = 1;
constexpr const char* CONVENTION_LINE =
    "vacuum-variance-1/2 (paper axes = these/√2)";

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    return is;
}

std::string sci6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

json config_to_json(const AcquisitionConfig& c) {
    json j;
    j["state"] = c.state.format();
    j["n_samples"] = c.n_samples;
    j["theta_start"] = c.theta_start;
    j["theta_step"] = c.theta_step;
    j["raw_scale"] = c.raw_scale;
    j["electronic_noise"] = c.electronic_noise;
    j["seed"] = c.seed;
    return j;
}

AcquisitionConfig config_from_json(const json& j) {
    AcquisitionConfig c;
    c.state = StateModel::parse(j.at("state").get<std::string>());
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.theta_start = j.at("theta_start").get<double>();
    c.theta_step = j.at("theta_step").get<double>();
    c.raw_scale = j.at("raw_scale").get<double>();
    c.electronic_noise = j.at("electronic_noise").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const SampleRecord> records, std::string_view kind) {
    std::ofstream os = open_out(path);
    json header;
    header["format"] = "dfstomo-records";
    header["version"] = RECORD_FORMAT_VERSION;
    header["kind"] = std::string(kind);
    header["count"] = records.size();
    os << header.dump() << '\n';
    for (const auto& r : records) {
        json line;
        line["m"] = r.m;
        line["x_raw"] = r.x_raw;
        os << line.dump() << '\n';
    }
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<SampleRecord> read_records_jsonl(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty record file: " + path.string());
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw IoError("bad record header in " + path.string() + ": " + e.what());
    }
    if (header.value("format", "") != "dfstomo-records")
        throw IoError("not a dfstomo record file: " + path.string());
    const std::size_t count = header.at("count").get<std::size_t>();
    std::vector<SampleRecord> out;
    out.reserve(count);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("bad record line in " + path.string() + ": " + e.what());
        }
        out.push_back(SampleRecord{j.at("m").get<std::size_t>(), j.at("x_raw").get<double>()});
    }
    if (out.size() != count)
        throw IoError("record count mismatch in " + path.string() + ": header says " +
                      std::to_string(count) + ", found " + std::to_string(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].m != i) throw IoError("record indices not contiguous in " + path.string());
    return out;
}

void write_truth_sidecar(const std::filesystem::path& path, const TruthSidecar& truth) {
    std::ofstream os = open_out(path);
    json j;
    j["format"] = "dfstomo-truth";
    j["version"] = RECORD_FORMAT_VERSION;
    j["config"] = config_to_json(truth.config);
    j["theta"] = truth.theta;
    os << j.dump() << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

TruthSidecar read_truth_sidecar(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw IoError("bad truth sidecar " + path.string() + ": " + e.what());
    }
    TruthSidecar t;
    t.config = config_from_json(j.at("config"));
    t.theta = j.at("theta").get<std::vector<double>>();
    if (t.theta.size() != t.config.n_samples)
        throw IoError("sidecar theta length does not match n_samples");
    return t;
}

namespace {

// '# key: values' header parsing shared by the plain-text formats
struct HeaderReader {
    std::ifstream is;
    std::string pending;

    explicit HeaderReader(const std::filesystem::path& path) : is(open_in(path)) {}

    bool next_header(std::string& key, std::string& value) {
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (line[0] != '#') {
                pending = line;
                return false;
            }
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            key = line.substr(1, colon - 1);
            while (!key.empty() && key.front() == ' ') key.erase(key.begin());
            while (!key.empty() && key.back() == ' ') key.pop_back();
            value = line.substr(colon + 1);
            while (!value.empty() && value.front() == ' ') value.erase(value.begin());
            return true;
        }
        return false;
    }
};

GridSpec axis_from_header(const std::string& v) {
    GridSpec g;
    if (std::sscanf(v.c_str(), "%lf %lf %lf", &g.min, &g.max, &g.step) != 3)
        throw IoError("bad axis header: " + v);
    g.count();
    return g;
}

} // namespace

void write_wigner_grid(const std::filesystem::path& path, const WignerGrid& grid) {
    std::ofstream os = open_out(path);
    char buf[128];
    os << "# wigner-grid v1\n";
    std::snprintf(buf, sizeof buf, "# X: %.10g %.10g %.10g\n", grid.x_axis.min, grid.x_axis.max,
                  grid.x_axis.step);
    os << buf;
    std::snprintf(buf, sizeof buf, "# P: %.10g %.10g %.10g\n", grid.p_axis.min, grid.p_axis.max,
                  grid.p_axis.step);
    os << buf;
    std::snprintf(buf, sizeof buf, "# kc: %.10g\n", grid.k_c);
    os << buf;
    os << "# N: " << grid.n_samples << '\n';
    os << "# state: " << grid.state_label << '\n';
    os << "# convention: " << CONVENTION_LINE << '\n';
    const int nx = grid.x_axis.count();
    const int np = grid.p_axis.count();
    for (int ip = 0; ip < np; ++ip) {
        for (int ix = 0; ix < nx; ++ix) {
            if (ix) os << ' ';
            os << sci6(grid.at(ip, ix));
        }
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path.string());
}

WignerGrid read_wigner_grid(const std::filesystem::path& path) {
    HeaderReader hr(path);
    WignerGrid grid;
    std::string key, value;
    bool have_x = false, have_p = false;
    while (hr.next_header(key, value)) {
        if (key == "X") {
            grid.x_axis = axis_from_header(value);
            have_x = true;
        } else if (key == "P") {
            grid.p_axis = axis_from_header(value);
            have_p = true;
        } else if (key == "kc") {
            grid.k_c = std::stod(value);
        } else if (key == "N") {
            grid.n_samples = std::stoull(value);
        } else if (key == "state") {
            grid.state_label = value;
        }
    }
    if (!have_x || !have_p) throw IoError("grid file missing axis headers: " + path.string());
    const std::size_t expect =
        static_cast<std::size_t>(grid.x_axis.count()) * grid.p_axis.count();
    grid.values.reserve(expect);
    std::string data = hr.pending;
    do {
        std::istringstream row(data);
        double v;
        while (row >> v) grid.values.push_back(v);
    } while (std::getline(hr.is, data));
    if (grid.values.size() != expect)
        throw IoError("grid value count mismatch in " + path.string());
    return grid;
}

void write_radial_profile(const std::filesystem::path& path, const RadialProfile& profile) {
    std::ofstream os = open_out(path);
    char buf[128];
    os << "# radial-profile v1\n";
    std::snprintf(buf, sizeof buf, "# r: 0 %.10g %.10g\n",
                  profile.r(static_cast<int>(profile.w.size()) - 1), profile.r_step);
    os << buf;
    os << "# N: " << profile.n_samples << '\n';
    os << "# state: " << profile.state_label << '\n';
    os << "# convention: " << CONVENTION_LINE << '\n';
    for (std::size_t k = 0; k < profile.w.size(); ++k)
        os << sci6(profile.r(static_cast<int>(k))) << ' ' << sci6(profile.w[k]) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

RadialProfile read_radial_profile(const std::filesystem::path& path) {
    HeaderReader hr(path);
    RadialProfile prof;
    std::string key, value;
    while (hr.next_header(key, value)) {
        if (key == "r") {
            GridSpec g = axis_from_header(value);
            prof.r_step = g.step;
        } else if (key == "N") {
            prof.n_samples = std::stoull(value);
        } else if (key == "state") {
            prof.state_label = value;
        }
    }
    std::string data = hr.pending;
    do {
        if (data.empty()) continue;
        std::istringstream row(data);
        double r, w;
        if (row >> r >> w) prof.w.push_back(w);
    } while (std::getline(hr.is, data));
    if (prof.w.empty()) throw IoError("empty radial profile: " + path.string());
    return prof;
}

void write_diagonals(const std::filesystem::path& path,
                     std::span<const DiagonalEstimate> diagonals) {
    std::ofstream os = open_out(path);
    os << "# diagonals v1\n";
    os << "# columns: n rho_nn stderr\n";
    for (const auto& d : diagonals)
        os << d.n << ' ' << sci6(d.rho) << ' ' << sci6(d.std_error) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<DiagonalEstimate> read_diagonals(const std::filesystem::path& path) {
    HeaderReader hr(path);
    std::string key, value;
    while (hr.next_header(key, value)) {
    }
    std::vector<DiagonalEstimate> out;
    std::string data = hr.pending;
    do {
        if (data.empty()) continue;
        std::istringstream row(data);
        DiagonalEstimate d;
        if (row >> d.n >> d.rho >> d.std_error) out.push_back(d);
    } while (std::getline(hr.is, data));
    if (out.empty()) throw IoError("empty diagonals file: " + path.string());
    return out;
}

} // namespace dfstomo
