#include "blindmm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

namespace blindmm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_cell(std::string_view cell, std::string_view source, std::size_t line) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::Parse, fmt::format("{}:{}: not a number: '{}'", source, line, cell));
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFinite, fmt::format("{}:{}: non-finite value", source, line));
    }
    return value;
}

}  // namespace

Matrix parse_matrix_csv(std::string_view text, std::string_view source) {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;

        std::size_t count = 0;
        while (true) {
            const auto comma = line.find(',');
            data.push_back(parse_cell(line.substr(0, comma), source, line_no));
            ++count;
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw Error(ErrorCode::Parse, fmt::format("{}:{}: ragged row ({} cells, expected {})",
                                                      source, line_no, count, cols));
        }
        ++rows;
    }
    if (rows == 0) throw Error(ErrorCode::Parse, fmt::format("{}: empty matrix", source));
    return Matrix(rows, cols, std::move(data));
}

Vector parse_vector_csv(std::string_view text, std::string_view source) {
    Matrix m = parse_matrix_csv(text, source);
    if (m.cols() != 1) {
        throw Error(ErrorCode::Parse,
                    fmt::format("{}: expected a single-column vector, got {} columns", source, m.cols()));
    }
    return Vector(std::vector<double>(m.values().begin(), m.values().end()));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    return parse_matrix_csv(read_file(path), path.string());
}

Vector read_vector_csv(const std::filesystem::path& path) {
    return parse_vector_csv(read_file(path), path.string());
}

std::string format_matrix_csv(const Matrix& a) {
    std::string out;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) out += ',';
            out += fmt::format("{}", a(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_vector_csv(const Vector& x) {
    std::string out;
    for (double v : x) out += fmt::format("{}\n", v);
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::Io, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace blindmm
