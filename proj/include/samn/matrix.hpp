// Dense row-major double matrix. Rows index samples, columns index features.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "samn/errors.hpp"

namespace samn {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);
    static Matrix row_vector(std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;
    std::string shape_str() const;

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Plain (non-differentiable) matrix math. The tape ops reuse these for their
// forward values; oracles and inference paths call them directly.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Matrix add_row_vector(const Matrix& m, const Matrix& v);  // v is 1 x cols
Matrix row_mean(const Matrix& m);                         // 1 x cols
Matrix row_softmax(const Matrix& m);
Matrix sigmoid(const Matrix& m);
Matrix tanh_elem(const Matrix& m);
Matrix relu(const Matrix& m);
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows);
double sum_all(const Matrix& m);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// u.v / (max(|u|,eps) * max(|v|,eps)); operands are 1 x d row vectors.
double cosine(std::span<const double> u, std::span<const double> v, double eps = 1e-12);
double cosine(const Matrix& u, const Matrix& v, double eps = 1e-12);

// Throws NumericError naming `where` if m holds a NaN or infinity.
void ensure_finite(const Matrix& m, const char* where);

}  // namespace samn
