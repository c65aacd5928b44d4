#include "samn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace samn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
        if (r.size() != cols_) throw DimensionError("ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row_vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Matrix(1, n, std::move(values));
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void ensure_finite(const Matrix& m, const char* where) {
    if (!m.all_finite()) {
        throw NumericError(std::string("non-finite value produced by ") + where);
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul shape mismatch: " + a.shape_str() + " x " +
                             b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("add shape mismatch: " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("sub shape mismatch: " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("hadamard shape mismatch: " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.data()) v *= s;
    return out;
}

Matrix add_row_vector(const Matrix& m, const Matrix& v) {
    if (v.rows() != 1 || v.cols() != m.cols()) {
        throw DimensionError("add_row_vector shape mismatch: " + m.shape_str() +
                             " + " + v.shape_str());
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) += v(0, j);
    return out;
}

Matrix row_mean(const Matrix& m) {
    if (m.rows() == 0) throw DimensionError("row_mean of empty matrix");
    Matrix out(1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(0, j) += m(i, j);
    const double inv = 1.0 / static_cast<double>(m.rows());
    for (double& v : out.data()) v *= inv;
    return out;
}

Matrix row_softmax(const Matrix& m) {
    if (m.empty()) throw DimensionError("row_softmax of empty matrix");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mx = m(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

Matrix sigmoid(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) {
        if (v >= 0.0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    return out;
}

Matrix tanh_elem(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = std::tanh(v);
    return out;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= m.rows()) {
            throw DimensionError("gather_rows index " + std::to_string(rows[i]) +
                                 " out of range for " + m.shape_str());
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(rows[i], j);
    }
    return out;
}

double sum_all(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v;
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

double cosine(std::span<const double> u, std::span<const double> v, double eps) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine length mismatch: " + std::to_string(u.size()) +
                             " vs " + std::to_string(v.size()));
    }
    const double nu = std::max(norm2(u), eps);
    const double nv = std::max(norm2(v), eps);
    return dot(u, v) / (nu * nv);
}

double cosine(const Matrix& u, const Matrix& v, double eps) {
    if (u.rows() != 1 || v.rows() != 1) {
        throw DimensionError("cosine expects 1-row vectors, got " + u.shape_str() +
                             " and " + v.shape_str());
    }
    return cosine(u.row(0), v.row(0), eps);
}

}  // namespace samn
