#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "totpos/errors.hpp"

namespace totpos {

/// Dense row-major matrix. Design envelope is grids up to 512x512.
template <typename T>
class Mat {
public:
    Mat() = default;

    Mat(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0) throw InvalidParameters("matrix dimensions must be nonnegative");
        data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
    }

    static Mat from_rows(std::initializer_list<std::initializer_list<T>> rows) {
        Mat m(static_cast<int>(rows.size()), rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
        int i = 0;
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != m.cols_) throw DimensionMismatch("ragged initializer rows");
            int j = 0;
            for (const T& v : r) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

inline void require_same_shape(const Mat<double>& a, const Mat<double>& b, const char* what) {
    if (!a.same_shape(b)) throw DimensionMismatch(std::string(what) + ": shapes differ");
}

inline double frobenius_norm(const Mat<double>& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

inline double max_abs_diff(const Mat<double>& a, const Mat<double>& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

/// ||cur - prev||_F / max(||prev||_F, 1e-12); the shared convergence metric
/// of both the projection sweeps and the outer Newton loop.
inline double relative_change(const Mat<double>& cur, const Mat<double>& prev) {
    require_same_shape(cur, prev, "relative_change");
    double num = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
        const double d = cur.data()[k] - prev.data()[k];
        num += d * d;
    }
    return std::sqrt(num) / std::max(frobenius_norm(prev), 1e-12);
}

}  // namespace totpos
