#include "cnade/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cnade/error.hpp"
#include "cnade/netcore.hpp"

namespace cnade {

Dataset::Dataset(std::vector<std::string> columns, std::vector<bool> hidden)
    : columns_(std::move(columns)), hidden_(std::move(hidden)) {
    if (hidden_.empty()) hidden_.assign(columns_.size(), false);
    if (hidden_.size() != columns_.size()) {
        throw Error(ErrorCode::length_mismatch, "hidden flags do not match columns");
    }
    std::set<std::string> seen;
    for (const auto& c : columns_) {
        if (c.empty()) throw Error(ErrorCode::invalid_name, "empty column name");
        if (!seen.insert(c).second) throw Error(ErrorCode::duplicate_name, "column '" + c + "' repeated");
    }
}

void Dataset::add_row(std::span<const double> values) {
    if (values.size() != cols()) {
        throw Error(ErrorCode::length_mismatch, "row has " + std::to_string(values.size()) + " values, expected " +
                                                    std::to_string(cols()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::domain_error, "non-finite cell");
    }
    if (cols() == 0) {
        ++empty_rows_;
        return;
    }
    data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] == name) return c;
    }
    return std::nullopt;
}

std::size_t Dataset::require(std::string_view name) const {
    const auto c = find(name);
    if (!c) throw Error(ErrorCode::missing_column, "no column '" + std::string(name) + "'");
    if (hidden_[*c]) {
        throw Error(ErrorCode::missing_column, "column '" + std::string(name) + "' is flagged unobservable");
    }
    return *c;
}

std::vector<double> Dataset::column(std::string_view name) const {
    const std::size_t c = require(name);
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
}

std::vector<double> Dataset::raw_column(std::string_view name) const {
    const auto c = find(name);
    if (!c) throw Error(ErrorCode::missing_column, "no column '" + std::string(name) + "'");
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, *c);
    return out;
}

Dataset Dataset::observable() const {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols(); ++c) {
        if (!hidden_[c]) names.push_back(columns_[c]);
    }
    return select(names);
}

Dataset Dataset::select(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    std::vector<bool> flags;
    for (const auto& n : names) {
        const auto c = find(n);
        if (!c) throw Error(ErrorCode::missing_column, "no column '" + n + "'");
        idx.push_back(*c);
        flags.push_back(hidden_[*c]);
    }
    Dataset out({names.begin(), names.end()}, flags);
    out.reserve(rows());
    std::vector<double> buf(idx.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t k = 0; k < idx.size(); ++k) buf[k] = at(r, idx[k]);
        out.add_row(buf);
    }
    return out;
}

Dataset Dataset::resample(Rng& rng) const {
    Dataset out(columns_, hidden_);
    const std::size_t n = rows();
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) out.add_row(row(rng.index(n)));
    return out;
}

Dataset Dataset::head(std::size_t n) const {
    Dataset out(columns_, hidden_);
    for (std::size_t r = 0; r < std::min(n, rows()); ++r) out.add_row(row(r));
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "missing CSV header");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> names;
    std::vector<bool> hidden;
    for (auto& h : split(line)) {
        const bool hid = !h.empty() && h.front() == '~';
        names.push_back(hid ? h.substr(1) : h);
        hidden.push_back(hid);
    }
    Dataset data(names, hidden);
    std::vector<double> values(names.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != names.size()) {
            throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected " +
                                                    std::to_string(names.size()) + " cells");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                values[c] = parse_double(cells[c]);
            } catch (const Error&) {
                throw Error(ErrorCode::parse_error,
                            "line " + std::to_string(lineno) + ": bad number '" + cells[c] + "'");
            }
        }
        data.add_row(values);
    }
    return data;
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
        if (c) out << ',';
        if (data.hidden(c)) out << '~';
        out << data.columns()[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            out << format_double(data.at(r, c));
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    write_csv(out, data);
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace cnade
