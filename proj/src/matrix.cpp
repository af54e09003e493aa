#include "sscl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sscl {

namespace {
void check_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("Matrix: non-finite entry");
    }
}
}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {
    if (!std::isfinite(fill)) throw std::invalid_argument("Matrix: non-finite fill");
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) throw std::invalid_argument("Matrix: data length != rows*cols");
    check_finite(data);
}

Matrix Matrix::row(std::initializer_list<double> values) {
    return Matrix(1, values.size(), std::vector<double>(values));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (double& x : out.data) x *= c;
    return out;
}

void add_inplace(Matrix& a, const Matrix& b, double c) {
    if (!a.same_shape(b)) throw std::invalid_argument("add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += c * b.data[i];
}

double dot(const Matrix& a, const Matrix& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double l2_norm(const Matrix& m) { return std::sqrt(dot(m, m)); }

Matrix softmax(const Matrix& z) {
    if (z.size() == 0) throw std::invalid_argument("softmax: empty input");
    const double zmax = *std::max_element(z.data.begin(), z.data.end());
    Matrix out = z;
    double sum = 0.0;
    for (double& x : out.data) {
        x = std::exp(x - zmax);
        sum += x;
    }
    for (double& x : out.data) x /= sum;
    return out;
}

double cross_entropy(const Matrix& z, std::size_t y) {
    if (y >= z.size()) throw std::out_of_range("cross_entropy: label out of range");
    const double zmax = *std::max_element(z.data.begin(), z.data.end());
    double sum = 0.0;
    for (double x : z.data) sum += std::exp(x - zmax);
    return std::log(sum) - (z.data[y] - zmax);
}

Matrix grad_cross_entropy(const Matrix& z, std::size_t y) {
    if (y >= z.size()) throw std::out_of_range("grad_cross_entropy: label out of range");
    Matrix g = softmax(z);
    g.data[y] -= 1.0;
    return g;
}

}  // namespace sscl
