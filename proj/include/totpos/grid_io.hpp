#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "totpos/matrix.hpp"

namespace totpos {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw IoError("cannot parse number: '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size()) throw IoError("trailing garbage in number: '" + tok + "'");
    return v;
}

}  // namespace detail

/// CSV: one line per grid row, '.'-decimal, comma separated, no header.
inline void write_csv(const Mat<double>& m, std::ostream& out) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << detail::format_double(m(i, j));
        }
        out << '\n';
    }
}

inline void write_csv(const Mat<std::int64_t>& m, std::ostream& out) {
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

inline Mat<double> read_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) row.push_back(detail::parse_double(tok));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty CSV grid");
    Mat<double> m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        if (static_cast<int>(rows[i].size()) != m.cols())
            throw DimensionMismatch("CSV rows have differing lengths");
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

inline Mat<std::int64_t> read_csv_counts(std::istream& in) {
    Mat<double> m = read_csv_matrix(in);
    Mat<std::int64_t> c(m.rows(), m.cols());
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double v = m.data()[k];
        const auto iv = static_cast<std::int64_t>(v);
        if (static_cast<double>(iv) != v) throw IoError("count CSV contains a non-integer entry");
        c.data()[k] = iv;
    }
    return c;
}

/// JSON envelope {n1, n2, data: row-major flat list}.
inline nlohmann::json to_json_envelope(const Mat<double>& m) {
    return nlohmann::json{{"n1", m.rows()}, {"n2", m.cols()}, {"data", m.data()}};
}

inline Mat<double> from_json_envelope(const nlohmann::json& j) {
    const int n1 = j.at("n1").get<int>();
    const int n2 = j.at("n2").get<int>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (n1 < 1 || n2 < 1) throw DimensionMismatch("JSON envelope dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2))
        throw DimensionMismatch("JSON envelope data length does not match n1*n2");
    Mat<double> m(n1, n2);
    m.data() = data;
    return m;
}

inline Mat<double> read_csv_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv_matrix(in);
}

inline Mat<std::int64_t> read_csv_counts_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_csv_counts(in);
}

template <typename M>
inline void write_csv_file(const M& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(m, out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace totpos
