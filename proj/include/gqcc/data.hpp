#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gqcc {

/// Regression sample (X_i, Y_i), i = 1..n, with X stored row-major.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<double> x, std::vector<double> y, std::size_t dim);

    [[nodiscard]] std::size_t size() const { return y_.size(); }
    [[nodiscard]] std::size_t dim() const { return dim_; }

    [[nodiscard]] std::span<const double> x(std::size_t i) const {
        return {x_.data() + i * dim_, dim_};
    }
    [[nodiscard]] double x(std::size_t i, std::size_t j) const { return x_[i * dim_ + j]; }
    [[nodiscard]] double y(std::size_t i) const { return y_[i]; }

    [[nodiscard]] const std::vector<double>& x_data() const { return x_; }
    [[nodiscard]] const std::vector<double>& y_data() const { return y_; }

    [[nodiscard]] std::vector<double> column(std::size_t j) const;

    // Copy with responses replaced.
    [[nodiscard]] Dataset with_y(std::vector<double> y) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::size_t dim_ = 1;
};

struct Axis {
    double lo = 0.1;
    double hi = 0.9;
    std::size_t count = 20;

    [[nodiscard]] double node(std::size_t k) const {
        return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    }
};

/// Cartesian evaluation grid. Node index runs with the last axis fastest.
class GridSpec {
public:
    GridSpec() = default;
    explicit GridSpec(std::vector<Axis> axes);

    // [0.1, 0.9]^d with 20 points per axis.
    static GridSpec standard(std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return axes_.size(); }
    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] const std::vector<Axis>& axes() const { return axes_; }
    [[nodiscard]] const Axis& axis(std::size_t j) const { return axes_[j]; }

    // Per-axis indices of node `index`.
    void unravel(std::size_t index, std::span<std::size_t> out) const;
    [[nodiscard]] std::size_t ravel(std::span<const std::size_t> idx) const;

    void point(std::size_t index, std::span<double> out) const;
    [[nodiscard]] std::vector<double> point(std::size_t index) const;

    // Lebesgue measure of the covered box.
    [[nodiscard]] double volume() const;

    friend bool operator==(const GridSpec& a, const GridSpec& b);

private:
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
};

}  // namespace gqcc
