#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace sscl {

/// Dense row-major 2-D array of doubles. Vectors are 1xN or Nx1 matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0);
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);
    static Matrix row(std::initializer_list<double> values);
    static Matrix identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
void add_inplace(Matrix& a, const Matrix& b, double c = 1.0);

double dot(const Matrix& a, const Matrix& b);
double l2_norm(const Matrix& m);

/// Numerically stable softmax of a row vector.
Matrix softmax(const Matrix& z);

/// Cross entropy of logits z against class index y, in nats: -log softmax(z)[y].
double cross_entropy(const Matrix& z, std::size_t y);

/// d cross_entropy / d z = softmax(z) - onehot(y). The "vanilla gradient".
Matrix grad_cross_entropy(const Matrix& z, std::size_t y);

}  // namespace sscl
