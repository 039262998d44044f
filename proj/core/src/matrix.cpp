#include "loadsr/matrix.hpp"

#include <cassert>

namespace loadsr {

std::vector<double> Matrix::column(std::size_t c) const
{
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

void Matrix::append_row(std::span<const double> values)
{
    if (rows_ == 0 && cols_ == 0) {
        cols_ = values.size();
    }
    assert(values.size() == cols_);
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

} // namespace loadsr
