/*
   Copyright 2026 The hetavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/


#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "hetavg/core/errors.hpp"

#ifndef HETAVG_VERSION
#define HETAVG_VERSION "0.0.0"
#endif

namespace hetavg {

inline constexpr const char* kVersion = HETAVG_VERSION;

/// Rows of reals under named columns, plus the metadata needed to rerun them.
/// `metadata` echoes every parameter; `summary` holds headline numbers.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();

    explicit ResultTable(std::vector<std::string> names = {}) : columns(std::move(names)) {}

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) {
            throw DomainError("row has " + std::to_string(row.size()) + " values for " +
                              std::to_string(columns.size()) + " columns");
        }
        rows.push_back(std::move(row));
    }

    /// UTF-8 CSV, header row, '.' decimals, round-trip precision. Contains no
    /// timing information, so identical inputs give identical bytes.
    std::string to_csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += columns[c];
        }
        out += '\n';
        char buf[40];
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                if (std::isnan(row[c])) {
                    out += "nan";
                } else if (std::isinf(row[c])) {
                    out += row[c] > 0 ? "inf" : "-inf";
                } else {
                    std::snprintf(buf, sizeof buf, "%.17g", row[c]);
                    out += buf;
                }
            }
            out += '\n';
        }
        return out;
    }

    nlohmann::ordered_json to_json(double wall_seconds) const {
        nlohmann::ordered_json j;
        j["tool"] = "hetavg";
        j["version"] = kVersion;
        j["config"] = metadata;
        j["summary"] = summary;
        j["columns"] = columns;
        j["row_count"] = rows.size();
        j["wall_clock_seconds"] = wall_seconds;
        return j;
    }
};

namespace detail {

inline std::filesystem::path temp_sibling(const std::filesystem::path& target) {
    auto tmp = target;
    tmp += ".tmp";
    return tmp;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    os.close();
    if (!os) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace detail

/// Writes `content` to a temporary sibling and renames it into place, so a
/// reader never sees a half-written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = detail::temp_sibling(path);
    try {
        detail::write_file(tmp, content);
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

/// Writes `<prefix>.csv` and `<prefix>.json`. Both are staged before either
/// is renamed; on failure neither is left behind.
inline void write_results(const ResultTable& table, const std::string& prefix, double wall_seconds) {
    const std::filesystem::path csv = prefix + ".csv", json = prefix + ".json";
    if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
    const auto csv_tmp = detail::temp_sibling(csv), json_tmp = detail::temp_sibling(json);
    std::error_code ec;
    bool csv_placed = false;
    try {
        detail::write_file(csv_tmp, table.to_csv());
        detail::write_file(json_tmp, table.to_json(wall_seconds).dump(2) + "\n");
        std::filesystem::rename(csv_tmp, csv);
        csv_placed = true;
        std::filesystem::rename(json_tmp, json);
    } catch (...) {
        std::filesystem::remove(csv_tmp, ec);
        std::filesystem::remove(json_tmp, ec);
        if (csv_placed) std::filesystem::remove(csv, ec);
        throw;
    }
}

}  // namespace hetavg
