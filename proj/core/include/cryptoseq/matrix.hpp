#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

enum class Activation { Sigmoid, Tanh, Identity };

/// Dense row-major matrix of 64-bit reals. All reductions run in a fixed
/// order (inner index ascending), so repeated calls on identical inputs are
/// bitwise identical.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix column(const std::vector<double>& values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    /// Row r as an height x 1 column vector (used to peel timesteps off a window).
    Matrix row_as_column(std::size_t r) const;

    void fill(double value);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

bool operator==(const Matrix& a, const Matrix& b);

/// Standard product, summation over k strictly ascending.
Matrix matmul(const Matrix& a, const Matrix& b);

/// w^T * v for w (m x n) and column v (m x 1), without materializing w^T.
Matrix matmul_transposed(const Matrix& w, const Matrix& v);

/// acc += d * u^T for column vectors d (m x 1) and u (n x 1).
void add_outer_product(Matrix& acc, const Matrix& d, const Matrix& u);

/// Elementwise activation. Sigmoid outputs lie strictly in (0, 1) and tanh
/// strictly in (-1, 1): saturated values are nudged one ulp inside.
Matrix activate(const Matrix& x, Activation kind);

double sigmoid_scalar(double x);
double tanh_scalar(double x);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);
void add_in_place(Matrix& acc, const Matrix& delta);
void scale_in_place(Matrix& m, double s);

/// Stack two column vectors: result = [top; bottom].
Matrix concat_columns(const Matrix& top, const Matrix& bottom);

} // namespace cryptoseq
