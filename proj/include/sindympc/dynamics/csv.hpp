#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/trajectory.hpp"

namespace sindympc::io {

/// Shortest text that round-trips a double (17 significant digits).
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& text, int line)
{
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b == e) throw ParseError("empty numeric field", line);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data() + b, text.data() + e, value);
    if (ec != std::errc() || ptr != text.data() + e) throw ParseError("invalid number '" + text + "'", line);
    return value;
}

inline std::string trajectory_header(int n, int q)
{
    std::string h = "t";
    for (int i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
    for (int j = 1; j <= q; ++j) h += ",u" + std::to_string(j);
    return h;
}

inline void write_trajectory_csv(std::ostream& os, const dynamics::Trajectory& traj)
{
    os << trajectory_header(traj.n(), traj.q()) << '\n';
    for (int k = 0; k < traj.size(); ++k) {
        os << format_double(traj.times(k));
        for (int i = 0; i < traj.n(); ++i) os << ',' << format_double(traj.states(i, k));
        for (int j = 0; j < traj.q(); ++j) os << ',' << format_double(traj.inputs(j, k));
        os << '\n';
    }
}

inline void write_trajectory_csv(const std::string& path, const dynamics::Trajectory& traj)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_trajectory_csv(os, traj);
}

/// Parses the `t,x1..xn,u1..uq` format. Measured derivatives are not part of the format.
inline dynamics::Trajectory read_trajectory_csv(std::istream& is)
{
    std::string line;
    int line_no = 0;
    if (!std::getline(is, line)) throw ParseError("empty CSV", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "t") throw ParseError("header must start with 't'", line_no);
    int n = 0, q = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name == "x" + std::to_string(n + 1) && q == 0) {
            ++n;
        } else if (name == "u" + std::to_string(q + 1)) {
            ++q;
        } else {
            throw ParseError("unexpected column '" + name + "'", line_no);
        }
    }
    if (n == 0) throw ParseError("header has no state columns", line_no);

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(cells.size()),
                             line_no);
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_double(cells[c], line_no);
        if (!rows.empty() && !(row[0] > rows.back()[0])) throw ParseError("times must be strictly increasing", line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("CSV has no data rows", line_no);

    const auto m = static_cast<Eigen::Index>(rows.size());
    dynamics::Trajectory traj;
    traj.times.resize(m);
    traj.states.resize(n, m);
    traj.inputs.resize(q, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& r = rows[static_cast<std::size_t>(k)];
        traj.times(k) = r[0];
        for (int i = 0; i < n; ++i) traj.states(i, k) = r[1 + i];
        for (int j = 0; j < q; ++j) traj.inputs(j, k) = r[1 + n + j];
    }
    return traj;
}

inline dynamics::Trajectory read_trajectory_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_trajectory_csv(is);
}

} // namespace sindympc::io
