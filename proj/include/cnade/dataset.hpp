#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cnade/rng.hpp"

namespace cnade {

/// Row-major table of finite doubles. Columns may be flagged hidden
/// (unobservable ground-truth variables); hidden columns travel with the data
/// but `require` refuses them, so estimators cannot consume them by accident.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> columns, std::vector<bool> hidden = {});

    std::size_t rows() const { return cols() == 0 ? empty_rows_ : data_.size() / cols(); }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    bool hidden(std::size_t c) const { return hidden_[c]; }

    void reserve(std::size_t rows) { data_.reserve(rows * cols()); }
    void add_row(std::span<const double> values);
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Index of an observable column; missing_column if absent or hidden.
    std::size_t require(std::string_view name) const;
    /// Copy of an observable column.
    std::vector<double> column(std::string_view name) const;
    /// Copy of any column, hidden or not (oracles and diagnostics only).
    std::vector<double> raw_column(std::string_view name) const;

    /// Drops hidden columns.
    Dataset observable() const;
    Dataset select(std::span<const std::string> names) const;
    /// n rows drawn uniformly with replacement.
    Dataset resample(Rng& rng) const;
    Dataset head(std::size_t n) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::string> columns_;
    std::vector<bool> hidden_;
    std::vector<double> data_;
    std::size_t empty_rows_ = 0;
};

/// CSV with a mandatory header; hidden columns carry a '~' name prefix.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace cnade
