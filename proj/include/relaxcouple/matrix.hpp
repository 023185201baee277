#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaxcouple {

/// Dense real matrix, row-major, double precision. Sizes with zero rows or
/// columns are valid values; products involving them follow the usual
/// dimension rules (an empty sum is zero).
class Mat {
public:
    Mat() = default;

    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
        : rows_(rows), cols_(cols), a_(entries) {
        if (a_.size() != rows * cols)
            throw std::invalid_argument("Mat: initializer size does not match rows*cols");
    }

    Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), a_(std::move(entries)) {
        if (a_.size() != rows * cols)
            throw std::invalid_argument("Mat: entry count does not match rows*cols");
    }

    static Mat identity(std::size_t n) {
        Mat I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
        assert(i0 + r <= rows_ && j0 + c <= cols_);
        Mat b(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
        return b;
    }

    void set_block(std::size_t i0, std::size_t j0, const Mat& b) {
        assert(i0 + b.rows() <= rows_ && j0 + b.cols() <= cols_);
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
    }

    std::vector<double> col(std::size_t j) const {
        assert(j < cols_);
        std::vector<double> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    void set_col(std::size_t j, const std::vector<double>& v) {
        assert(j < cols_ && v.size() == rows_);
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

    void scale_col(std::size_t j, double s) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) *= s;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : a_) m = std::max(m, std::abs(x));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (double x : a_) s += x * x;
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (double x : a_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    Mat operator-() const {
        Mat r = *this;
        for (double& x : r.a_) x = -x;
        return r;
    }

    Mat& operator+=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (double& x : a_) x *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }
    friend Mat operator*(double s, Mat a) { return a *= s; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        assert(a.cols_ == b.rows_);
        Mat c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend std::vector<double> operator*(const Mat& a, const std::vector<double>& x) {
        assert(a.cols_ == x.size());
        std::vector<double> y(a.rows_, 0.0);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline Mat hcat(const Mat& a, const Mat& b) {
    assert(a.rows() == b.rows() || a.cols() == 0 || b.cols() == 0);
    const std::size_t rows = a.cols() ? a.rows() : b.rows();
    Mat c(rows, a.cols() + b.cols());
    if (a.cols()) c.set_block(0, 0, a);
    if (b.cols()) c.set_block(0, a.cols(), b);
    return c;
}

/// Stacks a on top of b.
inline Mat vcat(const Mat& a, const Mat& b) {
    assert(a.cols() == b.cols() || a.rows() == 0 || b.rows() == 0);
    const std::size_t cols = a.rows() ? a.cols() : b.cols();
    Mat c(a.rows() + b.rows(), cols);
    if (a.rows()) c.set_block(0, 0, a);
    if (b.rows()) c.set_block(a.rows(), 0, b);
    return c;
}

inline Mat diag(const std::vector<double>& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

inline Mat from_column(const std::vector<double>& v) {
    Mat m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace relaxcouple
