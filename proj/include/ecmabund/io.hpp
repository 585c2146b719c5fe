#pragma once

// Count-table CSV serialization shared by the CLI subcommands.
// Schema: time,cell_x,cell_y,count with '.' decimal separator.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rect.hpp"
#include "study.hpp"

namespace ecmabund {

inline std::string counts_csv(const std::vector<double>& times, const Grid& g,
                              const std::vector<std::vector<std::uint64_t>>& counts) {
    std::string s = "time,cell_x,cell_y,count\n";
    const auto centers = g.centers();
    for (std::size_t k = 0; k < times.size(); ++k)
        for (int l = 0; l < g.n_cells(); ++l) {
            s += fmt_num(times[k]);
            s += ',' + fmt_num(centers[static_cast<std::size_t>(l)].first);
            s += ',' + fmt_num(centers[static_cast<std::size_t>(l)].second);
            s += ',' + std::to_string(counts[k][static_cast<std::size_t>(l)]) + '\n';
        }
    return s;
}

// Reads counts back against a known design (times and grid must match).
inline std::vector<std::vector<std::uint64_t>> read_counts_csv(const std::string& path, const std::vector<double>& times,
                                                               const Grid& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty data file: " + path);
    std::vector<std::vector<std::uint64_t>> counts(times.size(),
                                                   std::vector<std::uint64_t>(static_cast<std::size_t>(g.n_cells()), 0));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        double vals[3];
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("data file line " + std::to_string(lineno) + ": missing field");
            vals[i] = std::stod(tok);
        }
        if (!std::getline(ss, tok, ',')) throw std::runtime_error("data file line " + std::to_string(lineno) + ": missing count");
        const std::uint64_t c = std::stoull(tok);
        int k = -1;
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::fabs(times[i] - vals[0]) < 1e-9) k = static_cast<int>(i);
        const int l = g.locate(vals[1], vals[2]);
        if (k < 0 || l < 0)
            throw std::runtime_error("data file line " + std::to_string(lineno) + ": time/cell not in design");
        counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = c;
    }
    return counts;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

} // namespace ecmabund
