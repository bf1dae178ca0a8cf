#include "pfa/io.hpp"

#include "pfa/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pfa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Calls fn(line_number, line) for every non-blank line.
template <class F>
void for_each_line(std::string_view text, F&& fn) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        line = trim(line);
        if (!line.empty()) fn(lineno, line);
    }
}

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::Io, "error reading " + path.string());
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Io, "error writing " + path.string());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::string_view context) {
    field = trim(field);
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && field.front() == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (field.empty() || res.ec != std::errc() || res.ptr != last)
        throw Error(ErrorCode::Parse, std::string(context) + ": not a number: '" + std::string(field) + "'");
    return v;
}

Matrix parse_matrix_csv(std::string_view text, std::string_view source) {
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    for_each_line(text, [&](std::size_t lineno, std::string_view line) {
        std::size_t count = 0;
        while (true) {
            const std::size_t comma = line.find(',');
            values.push_back(parse_double(line.substr(0, comma), where(source, lineno)));
            ++count;
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (rows == 0)
            cols = count;
        else if (count != cols)
            throw Error(ErrorCode::Parse, where(source, lineno) + ": expected " + std::to_string(cols) +
                                              " fields, found " + std::to_string(count));
        ++rows;
    });
    if (rows == 0) throw Error(ErrorCode::Parse, std::string(source) + ": no data");
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data().begin());
    return m;
}

std::vector<double> parse_vector_csv(std::string_view text, std::string_view source) {
    std::vector<double> v;
    for_each_line(text, [&](std::size_t lineno, std::string_view line) {
        if (line.find(',') != std::string_view::npos)
            throw Error(ErrorCode::Parse, where(source, lineno) + ": expected a single column");
        v.push_back(parse_double(line, where(source, lineno)));
    });
    if (v.empty()) throw Error(ErrorCode::Parse, std::string(source) + ": no data");
    return v;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    return parse_matrix_csv(read_text(path), path.string());
}

std::vector<double> read_vector_csv(const std::filesystem::path& path) {
    return parse_vector_csv(read_text(path), path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::string out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    write_text(path, out);
}

void write_vector_csv(const std::filesystem::path& path, std::span<const double> v) {
    std::string out;
    for (double x : v) {
        out += format_double(x);
        out += '\n';
    }
    write_text(path, out);
}

}  // namespace pfa
