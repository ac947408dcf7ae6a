// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "gcrmf/errors.hpp"
#include "gcrmf/graph.hpp"
#include "gcrmf/metrics.hpp"

namespace gcrmf {

// shortest decimal form that round-trips; keeps output byte-stable across
// runs without pinning a precision
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc{}) throw NumericError("csv: cannot format value");
    return std::string(buf, res.ptr);
}

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("csv: cannot open for writing: " + path);
    return out;
}

inline void write_alerts_csv(const std::string& path,
                             const std::vector<std::pair<NodeId, double>>& ranked) {
    std::ofstream out = open_csv(path);
    out << "node_id,score\n";
    for (const auto& [id, score] : ranked) out << id << ',' << format_double(score) << '\n';
    if (!out) throw DataError("csv: write failed: " + path);
}

template <class Row>
inline void write_loss_csv(const std::string& path, const std::vector<Row>& rows) {
    std::ofstream out = open_csv(path);
    out << "window,epoch,l_struct,l_temp,l_cls,l_total\n";
    for (const Row& r : rows)
        out << r.window << ',' << r.epoch << ',' << format_double(r.l_struct) << ','
            << format_double(r.l_temp) << ',' << format_double(r.l_cls) << ','
            << format_double(r.l_total) << '\n';
    if (!out) throw DataError("csv: write failed: " + path);
}

// one row per metric label, quartile summary across seeds
inline void write_boxstats_csv(const std::string& path,
                               const std::vector<std::pair<std::string, BoxStats>>& rows) {
    std::ofstream out = open_csv(path);
    out << "metric,min,q1,median,q3,max\n";
    for (const auto& [label, b] : rows)
        out << label << ',' << format_double(b.min) << ',' << format_double(b.q1) << ','
            << format_double(b.median) << ',' << format_double(b.q3) << ','
            << format_double(b.max) << '\n';
    if (!out) throw DataError("csv: write failed: " + path);
}

} // namespace gcrmf
