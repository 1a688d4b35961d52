#include "cryptoseq/matrix.hpp"

#include <cmath>

namespace cryptoseq {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Matrix: dimensions must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r > 0 ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("Matrix::from_rows: ragged row lengths");
        }
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(const std::vector<double>& values) {
    Matrix m(values.size(), 1);
    m.values_ = values;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix Matrix::row_as_column(std::size_t r) const {
    Matrix out(cols_, 1);
    for (std::size_t j = 0; j < cols_; ++j) out(j, 0) = (*this)(r, j);
    return out;
}

void Matrix::fill(double value) {
    for (double& v : values_) v = value;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.values() == b.values();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t inner = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < inner; ++k) {
                sum += a(i, k) * b(k, j);
            }
            out(i, j) = sum;
        }
    }
    return out;
}

Matrix matmul_transposed(const Matrix& w, const Matrix& v) {
    if (w.rows() != v.rows() || v.cols() != 1) {
        throw ShapeError("matmul_transposed: incompatible shapes " + w.shape_str() + " and " +
                         v.shape_str());
    }
    Matrix out(w.cols(), 1);
    for (std::size_t k = 0; k < w.rows(); ++k) {
        const double vk = v(k, 0);
        for (std::size_t j = 0; j < w.cols(); ++j) {
            out(j, 0) += w(k, j) * vk;
        }
    }
    return out;
}

void add_outer_product(Matrix& acc, const Matrix& d, const Matrix& u) {
    if (d.cols() != 1 || u.cols() != 1 || acc.rows() != d.rows() || acc.cols() != u.rows()) {
        throw ShapeError("add_outer_product: incompatible shapes " + acc.shape_str() + ", " +
                         d.shape_str() + ", " + u.shape_str());
    }
    for (std::size_t i = 0; i < d.rows(); ++i) {
        const double di = d(i, 0);
        for (std::size_t j = 0; j < u.rows(); ++j) {
            acc(i, j) += di * u(j, 0);
        }
    }
}

double sigmoid_scalar(double x) {
    // Branch keeps exp() argument non-positive so large |x| saturates cleanly.
    // Saturated outputs are nudged one ulp inside (0, 1): gate values are
    // contractually strict, and downstream (1 - z) factors must stay nonzero.
    double v;
    if (x >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        v = e / (1.0 + e);
    }
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    if (v <= 0.0) v = std::nextafter(0.0, 1.0);
    return v;
}

double tanh_scalar(double x) {
    double v = std::tanh(x);
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    if (v <= -1.0) v = std::nextafter(-1.0, 0.0);
    return v;
}

Matrix activate(const Matrix& x, Activation kind) {
    Matrix out = x;
    switch (kind) {
        case Activation::Sigmoid:
            for (double& v : out.values()) v = sigmoid_scalar(v);
            break;
        case Activation::Tanh:
            for (double& v : out.values()) v = tanh_scalar(v);
            break;
        case Activation::Identity:
            break;
    }
    return out;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                         b.shape_str());
    }
}
} // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.values()) v *= s;
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

void add_in_place(Matrix& acc, const Matrix& delta) {
    require_same_shape(acc, delta, "add_in_place");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.values()[i] += delta.values()[i];
}

void scale_in_place(Matrix& m, double s) {
    for (double& v : m.values()) v *= s;
}

Matrix concat_columns(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != 1 || bottom.cols() != 1) {
        throw ShapeError("concat_columns: expected column vectors, got " + top.shape_str() +
                         " and " + bottom.shape_str());
    }
    Matrix out(top.rows() + bottom.rows(), 1);
    for (std::size_t i = 0; i < top.rows(); ++i) out(i, 0) = top(i, 0);
    for (std::size_t i = 0; i < bottom.rows(); ++i) out(top.rows() + i, 0) = bottom(i, 0);
    return out;
}

} // namespace cryptoseq
