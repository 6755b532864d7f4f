#include "gqcc/data.hpp"

#include <cmath>
#include <string>

#include "gqcc/errors.hpp"

namespace gqcc {

Dataset::Dataset(std::vector<double> x, std::vector<double> y, std::size_t dim)
    : x_(std::move(x)), y_(std::move(y)), dim_(dim) {
    if (dim_ == 0) throw DataError("dataset dimension must be >= 1");
    if (x_.size() != y_.size() * dim_)
        throw DataError("covariate matrix has " + std::to_string(x_.size()) + " entries, expected " +
                        std::to_string(y_.size() * dim_));
    if (y_.size() < 2) throw DataError("dataset needs at least 2 observations");
    for (std::size_t i = 0; i < y_.size(); ++i) {
        bool finite = std::isfinite(y_[i]);
        for (std::size_t j = 0; j < dim_; ++j) finite = finite && std::isfinite(x_[i * dim_ + j]);
        if (!finite) throw DataError("non-finite value in observation " + std::to_string(i + 1));
    }
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = x(i, j);
    return out;
}

Dataset Dataset::with_y(std::vector<double> y) const { return Dataset(x_, std::move(y), dim_); }

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw ConfigError("grid needs at least one axis");
    size_ = 1;
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        const auto& a = axes_[j];
        if (!(a.lo < a.hi))
            throw ConfigError("grid axis " + std::to_string(j + 1) + ": lower bound must be below upper bound");
        if (a.count < 2) throw ConfigError("grid axis " + std::to_string(j + 1) + ": needs at least 2 points");
        size_ *= a.count;
    }
}

GridSpec GridSpec::standard(std::size_t dim) { return GridSpec(std::vector<Axis>(dim, Axis{})); }

void GridSpec::unravel(std::size_t index, std::span<std::size_t> out) const {
    for (std::size_t j = axes_.size(); j-- > 0;) {
        out[j] = index % axes_[j].count;
        index /= axes_[j].count;
    }
}

std::size_t GridSpec::ravel(std::span<const std::size_t> idx) const {
    std::size_t index = 0;
    for (std::size_t j = 0; j < axes_.size(); ++j) index = index * axes_[j].count + idx[j];
    return index;
}

void GridSpec::point(std::size_t index, std::span<double> out) const {
    for (std::size_t j = axes_.size(); j-- > 0;) {
        out[j] = axes_[j].node(index % axes_[j].count);
        index /= axes_[j].count;
    }
}

std::vector<double> GridSpec::point(std::size_t index) const {
    std::vector<double> p(dim());
    point(index, p);
    return p;
}

double GridSpec::volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.hi - a.lo;
    return v;
}

bool operator==(const GridSpec& a, const GridSpec& b) {
    if (a.axes_.size() != b.axes_.size()) return false;
    for (std::size_t j = 0; j < a.axes_.size(); ++j) {
        const auto& x = a.axes_[j];
        const auto& y = b.axes_[j];
        if (x.lo != y.lo || x.hi != y.hi || x.count != y.count) return false;
    }
    return true;
}

}  // namespace gqcc
