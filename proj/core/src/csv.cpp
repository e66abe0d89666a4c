#include "igpk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "igpk/errors.hpp"

namespace igpk {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n") != std::string::npos;
}

std::string quote(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << quote(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << quote(row[i]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& A) {
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(A.cols()));
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        header.push_back("c" + std::to_string(j));
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        std::vector<std::string> row;
        row.reserve(static_cast<std::size_t>(A.cols()));
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            row.push_back(format_real(A(i, j)));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (first) {
            if (header) *header = std::move(fields);
            first = false;
        } else {
            rows.push_back(std::move(fields));
        }
    }
    if (first) throw IoError("missing header row: " + path.string());
    return rows;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::vector<std::string> header;
    const auto rows = read_csv(path, &header);
    const auto n_cols = header.size();
    Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n_cols) {
            throw IoError("ragged CSV row in " + path.string());
        }
        for (std::size_t j = 0; j < n_cols; ++j) {
            const auto& s = rows[i][j];
            double v;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{}) {
                throw IoError("bad real '" + s + "' in " + path.string());
            }
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return A;
}

}  // namespace igpk
