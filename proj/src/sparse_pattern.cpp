#include "mwtgc/sparse_pattern.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mwtgc {

SparsePatternMatrix SparsePatternMatrix::from_entries(Index rows, Index cols,
                                                      std::vector<Entry> entries) {
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("SparsePatternMatrix: negative dimensions");
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparsePatternMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_.reserve(entries.size());
    m.col_.reserve(entries.size());
    m.values_.resize(static_cast<Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& e = entries[i];
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
            throw std::invalid_argument("SparsePatternMatrix: entry (" + std::to_string(e.row) +
                                        "," + std::to_string(e.col) + ") out of range for " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
        }
        if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
            throw std::invalid_argument("SparsePatternMatrix: duplicate entry (" +
                                        std::to_string(e.row) + "," + std::to_string(e.col) + ")");
        }
        m.row_.push_back(e.row);
        m.col_.push_back(e.col);
        m.values_[static_cast<Index>(i)] = e.value;
    }
    return m;
}

void SparsePatternMatrix::set_values(const Vector& values) {
    if (values.size() != values_.size()) {
        throw std::invalid_argument("SparsePatternMatrix::set_values: got " +
                                    std::to_string(values.size()) + " values for a pattern of " +
                                    std::to_string(values_.size()));
    }
    values_ = values;
}

double SparsePatternMatrix::coeff(Index i, Index j) const {
    for (std::size_t k = 0; k < row_.size(); ++k) {
        if (row_[k] == i && col_[k] == j) {
            return values_[static_cast<Index>(k)];
        }
    }
    return 0.0;
}

bool SparsePatternMatrix::has_entry(Index i, Index j) const {
    for (std::size_t k = 0; k < row_.size(); ++k) {
        if (row_[k] == i && col_[k] == j) {
            return true;
        }
    }
    return false;
}

Matrix SparsePatternMatrix::to_dense() const {
    Matrix d = Matrix::Zero(rows_, cols_);
    for (std::size_t k = 0; k < row_.size(); ++k) {
        d(row_[k], col_[k]) = values_[static_cast<Index>(k)];
    }
    return d;
}

Vector SparsePatternMatrix::apply(const Vector& x) const {
    if (x.size() != cols_) {
        throw std::invalid_argument("SparsePatternMatrix::apply: vector of size " +
                                    std::to_string(x.size()) + " against " + std::to_string(rows_) +
                                    "x" + std::to_string(cols_));
    }
    Vector y = Vector::Zero(rows_);
    for (std::size_t k = 0; k < row_.size(); ++k) {
        y[row_[k]] += values_[static_cast<Index>(k)] * x[col_[k]];
    }
    return y;
}

Vector sparse_apply(const SparsePatternMatrix& m, const Vector& x) { return m.apply(x); }

} // namespace mwtgc
