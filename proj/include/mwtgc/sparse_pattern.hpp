#pragma once

#include "mwtgc/types.hpp"

#include <vector>

namespace mwtgc {

/// Sparse matrix with an immutable position pattern and mutable values.
/// Entries are kept in row-major (row, col) order; values may be zero without
/// dropping the slot, so two matrices built on the same pattern stay aligned
/// entry-for-entry (the graph convolution pairs a fixed weighted adjacency
/// with a learnable parameter array this way).
class SparsePatternMatrix {
public:
    SparsePatternMatrix() = default;

    struct Entry {
        Index row = 0;
        Index col = 0;
        double value = 0.0;
    };

    /// Builds from entries; sorts them row-major. Throws std::invalid_argument
    /// on out-of-range positions or duplicates.
    static SparsePatternMatrix from_entries(Index rows, Index cols, std::vector<Entry> entries);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return static_cast<Index>(row_.size()); }

    const std::vector<Index>& row_indices() const { return row_; }
    const std::vector<Index>& col_indices() const { return col_; }
    const Vector& values() const { return values_; }

    /// Replaces the value array; the pattern is fixed.
    void set_values(const Vector& values);

    /// Value at (i, j), zero when the slot is not in the pattern.
    double coeff(Index i, Index j) const;
    bool has_entry(Index i, Index j) const;

    Matrix to_dense() const;

    /// Matrix-vector product equal to to_dense() * x.
    Vector apply(const Vector& x) const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_;
    std::vector<Index> col_;
    Vector values_;
};

/// Free-function spelling of SparsePatternMatrix::apply.
Vector sparse_apply(const SparsePatternMatrix& m, const Vector& x);

} // namespace mwtgc
