#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dpsub/erm/dataset.hpp"
#include "dpsub/errors.hpp"

namespace dpsub::bench {

/// Shortest text that parses back to the same double; "NA" for NaN.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s)
{
    if (s == "NA" || s == "nan") return std::nan("");
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string dataset_header(std::size_t p)
{
    std::string h;
    for (std::size_t j = 1; j <= p; ++j) h += "x" + std::to_string(j) + ",";
    return h + "y";
}

/// Header x1,...,xp,y then one row per point; LF line ends.
inline void write_dataset_csv(std::ostream& os, const Dataset& d)
{
    os << dataset_header(d.p()) << '\n';
    const auto cols = static_cast<Eigen::Index>(d.p());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.n()); ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) os << format_double(d.X()(i, j)) << ',';
        os << format_double(d.y()[i]) << '\n';
    }
}

inline void write_dataset_csv(const std::string& path, const Dataset& d)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_dataset_csv(os, d);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

/// Reads the format written above. A trailing CR is tolerated.
inline Dataset read_dataset_csv(std::istream& is, const std::string& what = "dataset")
{
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument(what + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto head = split(line, ',');
    dpsub::detail::require(head.size() >= 2, what + ": header needs at least x1,y");
    const std::size_t p = head.size() - 1;
    dpsub::detail::require(line == dataset_header(p), what + ": header must be " + dataset_header(p));

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        dpsub::detail::require(cells.size() == p + 1, what + ": line " + std::to_string(lineno) + " has " +
                                                   std::to_string(cells.size()) + " fields, expected " +
                                                   std::to_string(p + 1));
        for (auto c : cells) {
            const auto v = parse_double(c);
            dpsub::detail::require(v && std::isfinite(*v),
                            what + ": line " + std::to_string(lineno) + ": bad number '" + std::string(c) + "'");
            values.push_back(*v);
        }
        ++rows;
    }
    dpsub::detail::require(rows >= 1, what + ": no data rows");
    Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (p + 1) + j];
        y[static_cast<Eigen::Index>(i)] = values[i * (p + 1) + p];
    }
    return Dataset(std::move(X), std::move(y));
}

inline Dataset read_dataset_csv(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("cannot open dataset '" + path + "'");
    return read_dataset_csv(is, path);
}

} // namespace dpsub::bench
