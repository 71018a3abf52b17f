#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensemble/axioms.hpp"
#include "ensemble/diagnostics.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/grid.hpp"

namespace ens {

enum class SnapshotFormat { csv, binary };

/// Round-trip exact text for a double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

template <class T>
std::string join(const std::vector<T>& v, const char* sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        if constexpr (std::is_floating_point_v<T>) os << fmt(v[i]);
        else os << v[i];
    }
    return os.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

} // namespace detail

/// Named columns on a grid at one time.
struct Snapshot {
    GridSpec grid;
    double time = 0.0;
    std::vector<std::string> names;
    std::vector<RealField> columns;

    const RealField& column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return columns[i];
        throw ConfigError("snapshot has no column '" + name + "'");
    }
};

/// Header line shared by both layouts:
///   # dims=2 points=128x128 lower=-10,-10 upper=10,10 time=0.5 fields=p,S
/// CSV then has one row per grid point (row-major, last axis fastest); the
/// binary layout has the header line followed by little-endian doubles in the
/// same order, fields interleaved per point.
inline std::string snapshot_header(const Snapshot& s) {
    return "# dims=" + std::to_string(s.grid.dims()) + " points=" + detail::join(s.grid.points, "x") +
           " lower=" + detail::join(s.grid.lower, ",") + " upper=" + detail::join(s.grid.upper, ",") +
           " time=" + fmt(s.time) + " fields=" + detail::join(s.names, ",");
}

inline void write_snapshot(const std::filesystem::path& path, const Snapshot& s, SnapshotFormat f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << snapshot_header(s) << '\n';
    const std::size_t n = s.grid.size();
    if (f == SnapshotFormat::csv) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t c = 0; c < s.columns.size(); ++c) {
                if (c) os << ',';
                os << fmt(s.columns[c][j]);
            }
            os << '\n';
        }
    } else {
        for (std::size_t j = 0; j < n; ++j)
            for (const auto& col : s.columns) os.write(reinterpret_cast<const char*>(&col[j]), sizeof(double));
    }
}

inline Snapshot state_snapshot(const FieldState& s) { return {s.grid, s.time, {"p", "S"}, {s.p, s.S}}; }

/// Reads either layout; binary is recognised by the file extension `.bin`.
inline Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path.string());
    std::string header;
    std::getline(is, header);
    if (header.rfind("# ", 0) != 0) throw ConfigError(path.string() + ": missing snapshot header");
    std::map<std::string, std::string> kv;
    for (const auto& tok : detail::split(header.substr(2), ' ')) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* key : {"dims", "points", "lower", "upper", "time", "fields"})
        if (!kv.count(key)) throw ConfigError(path.string() + ": header lacks '" + key + "'");
    Snapshot s;
    try {
        std::vector<std::size_t> pts;
        for (const auto& t : detail::split(kv["points"], 'x')) pts.push_back(std::stoul(t));
        std::vector<double> lo, hi;
        for (const auto& t : detail::split(kv["lower"], ',')) lo.push_back(std::stod(t));
        for (const auto& t : detail::split(kv["upper"], ',')) hi.push_back(std::stod(t));
        s.grid = GridSpec(pts, lo, hi);
        if (std::stoul(kv["dims"]) != s.grid.dims()) throw ConfigError("dims does not match points");
        s.time = std::stod(kv["time"]);
    } catch (const std::logic_error&) {
        throw ConfigError(path.string() + ": malformed snapshot header");
    }
    s.names = detail::split(kv["fields"], ',');
    const std::size_t n = s.grid.size(), nc = s.names.size();
    s.columns.assign(nc, RealField(n));
    if (path.extension() == ".bin") {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t c = 0; c < nc; ++c) is.read(reinterpret_cast<char*>(&s.columns[c][j]), sizeof(double));
        if (!is) throw ConfigError(path.string() + ": truncated binary snapshot");
    } else {
        std::string line;
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::getline(is, line)) throw ConfigError(path.string() + ": expected " + std::to_string(n) + " rows");
            const auto cells = detail::split(line, ',');
            if (cells.size() != nc) throw ConfigError(path.string() + ": row " + std::to_string(j + 2) + " has the wrong column count");
            for (std::size_t c = 0; c < nc; ++c) s.columns[c][j] = std::stod(cells[c]);
        }
    }
    return s;
}

inline std::string observables_header(std::size_t dims) {
    std::string h = "time,norm,energy";
    for (std::size_t k = 0; k < dims; ++k) h += ",mean_" + std::to_string(k) + ",var_" + std::to_string(k);
    return h + ",maxQ";
}

inline void write_observables(const std::filesystem::path& path, const std::vector<ObservableRecord>& rows,
                              std::size_t dims) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << observables_header(dims) << '\n';
    for (const auto& r : rows) {
        os << fmt(r.time) << ',' << fmt(r.norm) << ',' << fmt(r.energy);
        for (std::size_t k = 0; k < dims; ++k) os << ',' << fmt(r.mean[k]) << ',' << fmt(r.variance[k]);
        os << ',' << fmt(r.max_abs_Q) << '\n';
    }
}

inline nlohmann::json to_json(const AxiomReport& r) {
    nlohmann::json j;
    j["axiom"] = r.axiom;
    j["deviation"] = r.deviation;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["control"] = r.control;
    j["details"] = r.details;
    return j;
}

inline std::string axiom_table(const std::vector<AxiomReport>& reports) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-48s %12s %10s  %s\n", "axiom", "deviation", "tolerance", "result");
    os << line;
    for (const auto& r : reports) {
        const char* verdict = r.control ? (r.pass ? "CONTROL NOT REJECTED" : "rejected (expected)")
                                        : (r.pass ? "pass" : "FAIL");
        std::snprintf(line, sizeof line, "%-48s %12.3e %10.1e  %s\n", r.axiom.c_str(), r.deviation, r.tolerance, verdict);
        os << line;
    }
    return os.str();
}

inline void write_axiom_report(const std::filesystem::path& dir, const std::vector<AxiomReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    std::ofstream(dir / "axioms.json") << arr.dump(2) << '\n';
    std::ofstream(dir / "axioms.txt") << axiom_table(reports);
}

} // namespace ens
