#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace extsumm {

// Dense row-major matrix. Deliberately minimal: the model code spells out its
// own loops so the gradient derivation stays auditable.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    T operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<T> row(std::size_t r) {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const T> row(std::size_t r) const {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <typename T>
T sigmoid(T x) {
    // Split on sign to avoid overflow in exp.
    if (x >= T(0)) {
        const T z = std::exp(-x);
        return T(1) / (T(1) + z);
    }
    const T z = std::exp(x);
    return z / (T(1) + z);
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    assert(a.size() == b.size());
    T acc = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Numerically stable softmax over the positions where mask is nonzero; masked
// positions come out exactly zero. At least one position must be unmasked.
template <typename T>
std::vector<T> masked_softmax(std::span<const T> logits, std::span<const std::uint8_t> mask) {
    assert(logits.size() == mask.size());
    std::vector<T> out(logits.size(), T(0));
    T max_logit = -std::numeric_limits<T>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] && logits[i] > max_logit) max_logit = logits[i];
    }
    T denom = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i]) {
            out[i] = std::exp(logits[i] - max_logit);
            denom += out[i];
        }
    }
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i]) out[i] /= denom;
    }
    return out;
}

}  // namespace extsumm
