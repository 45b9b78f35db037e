#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fit.hpp"

#ifndef NGLAT_VERSION
#define NGLAT_VERSION "0.0.0"
#endif

namespace nglat {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct FitRecord {
    LinearFit fit;
    std::string x, y;  // what was regressed on what
};

/// One experiment's output: parameters, a numeric table, fits and any
/// per-stage error records.
struct ExperimentReport {
    std::string name;
    std::string module;
    std::string operation;
    json parameters = json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, FitRecord> fits;
    json summary = json::object();
    std::vector<std::string> errors;
    std::string version = NGLAT_VERSION;

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) throw std::logic_error("row width does not match columns of " + name);
        rows.push_back(std::move(row));
    }

    std::vector<double> column(const std::string& col) const {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] != col) continue;
            std::vector<double> out;
            for (const auto& r : rows) out.push_back(r[c]);
            return out;
        }
        throw std::out_of_range("no column " + col + " in " + name);
    }

    bool ok() const noexcept { return errors.empty(); }

    json to_json() const {
        json j;
        j["name"] = name;
        j["provenance"] = {{"module", module}, {"operation", operation}, {"version", version}};
        j["parameters"] = parameters;
        j["columns"] = columns;
        json rs = json::array();
        for (const auto& r : rows) {
            json row = json::array();
            for (double v : r) {
                if (std::isfinite(v))
                    row.push_back(v);
                else
                    row.push_back(nullptr);
            }
            rs.push_back(std::move(row));
        }
        j["rows"] = std::move(rs);
        json fs = json::object();
        for (const auto& [k, f] : fits)
            fs[k] = {{"x", f.x},
                     {"y", f.y},
                     {"slope", f.fit.slope},
                     {"intercept", f.fit.intercept},
                     {"r2", f.fit.r2}};
        j["fits"] = std::move(fs);
        j["summary"] = summary;
        j["errors"] = errors;
        return j;
    }

    /// Flat CSV: one line per row, with name/module/operation as leading
    /// provenance columns. Non-finite cells are written as "nan".
    std::string to_csv() const {
        std::ostringstream os;
        os << "experiment,module,operation";
        for (const auto& c : columns) os << ',' << c;
        os << '\n';
        for (const auto& r : rows) {
            os << name << ',' << module << ',' << operation;
            for (double v : r) os << ',' << (std::isfinite(v) ? format_double(v) : std::string("nan"));
            os << '\n';
        }
        return os.str();
    }
};

}  // namespace nglat
