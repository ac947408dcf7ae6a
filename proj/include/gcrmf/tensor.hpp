// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcrmf/errors.hpp"

namespace gcrmf {

// Dense rank-1 or rank-2 tensor of doubles, row-major. Shape is fixed at
// construction. Rank-1 tensors are stored as (n x 1) columns; a scalar is a
// rank-1 tensor of size 1.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros_vec(int n) {
        check_dim(n);
        Tensor t;
        t.rows_ = n;
        t.cols_ = 1;
        t.rank_ = 1;
        t.v_.assign(static_cast<std::size_t>(n), 0.0);
        return t;
    }

    static Tensor zeros_mat(int rows, int cols) {
        check_dim(rows);
        check_dim(cols);
        Tensor t;
        t.rows_ = rows;
        t.cols_ = cols;
        t.rank_ = 2;
        t.v_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
        return t;
    }

    static Tensor scalar(double v) {
        Tensor t = zeros_vec(1);
        t.v_[0] = v;
        return t;
    }

    static Tensor vec(std::vector<double> values) {
        if (values.empty()) throw DomainError("tensor: empty vector");
        Tensor t;
        t.rows_ = static_cast<int>(values.size());
        t.cols_ = 1;
        t.rank_ = 1;
        t.v_ = std::move(values);
        return t;
    }

    static Tensor mat(int rows, int cols, std::vector<double> values) {
        check_dim(rows);
        check_dim(cols);
        if (values.size() != static_cast<std::size_t>(rows) * cols)
            throw DimensionError("tensor: value count does not match shape");
        Tensor t;
        t.rows_ = rows;
        t.cols_ = cols;
        t.rank_ = 2;
        t.v_ = std::move(values);
        return t;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int rank() const { return rank_; }
    int size() const { return static_cast<int>(v_.size()); }
    bool empty() const { return v_.empty(); }

    bool is_scalar() const { return v_.size() == 1; }
    bool is_vector() const { return cols_ == 1; }

    double scalar_value() const {
        if (!is_scalar()) throw DimensionError("tensor: not a scalar");
        return v_[0];
    }

    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    double at(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& at(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<const double> data() const { return v_; }
    std::vector<double>& raw() { return v_; }
    const std::vector<double>& raw() const { return v_; }

    bool same_shape(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && rank_ == o.rank_;
    }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void require_finite(const std::string& context) const {
        if (!all_finite()) throw NumericError("non-finite value in " + context);
    }

    Tensor zeros_like() const {
        Tensor t = *this;
        for (double& x : t.v_) x = 0.0;
        return t;
    }

private:
    static void check_dim(int d) {
        if (d <= 0) throw DomainError("tensor: dimension must be positive");
    }

    int rows_ = 0;
    int cols_ = 0;
    int rank_ = 1;
    std::vector<double> v_;
};

} // namespace gcrmf
