#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fftu {

using Complex = std::complex<double>;

/// Multi-index into a d-dimensional array or processor grid.
using Coord = std::vector<std::size_t>;

/// Rejected shape/grid combination or malformed run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed signal file.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Extents (n_1, ..., n_d) of a d-dimensional array, stored row-major
/// (last dimension fastest-varying). d >= 1 and every extent >= 1.
class TensorShape {
public:
    explicit TensorShape(std::vector<std::size_t> dims);
    TensorShape(std::initializer_list<std::size_t> dims)
        : TensorShape(std::vector<std::size_t>(dims)) {}

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t extent(std::size_t dim) const { return dims_.at(dim); }
    std::size_t total() const { return total_; }

    bool operator==(const TensorShape&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t total_ = 1;
};

/// Dense complex array of a given shape, row-major.
struct TensorSignal {
    explicit TensorSignal(TensorShape s);
    TensorSignal(TensorShape s, std::vector<Complex> values);

    TensorShape shape;
    std::vector<Complex> data;
};

// Row-major indexing helpers shared by the distribution and transform code.
std::vector<std::size_t> row_major_strides(std::span<const std::size_t> extents);
std::size_t linearize(std::span<const std::size_t> coord, std::span<const std::size_t> strides);
Coord delinearize(std::size_t index, std::span<const std::size_t> extents);

/// Odometer step over a row-major index box; returns false when the
/// coordinate wraps back to all zeros. On return, `changed` (if given)
/// receives the slowest dimension that was incremented.
bool advance_coord(Coord& coord, std::span<const std::size_t> extents,
                   std::size_t* changed = nullptr);

/// Applies fn(base_offset) to every line along `dim` of a row-major box.
template <typename Fn>
void for_each_line(const TensorShape& box, std::size_t dim, Fn&& fn) {
    const auto strides = row_major_strides(box.dims());
    Coord c(box.rank(), 0);
    const std::size_t lines = box.total() / box.extent(dim);
    for (std::size_t i = 0; i < lines; ++i) {
        fn(linearize(c, strides));
        // odometer over every dimension except `dim`
        for (std::size_t l = box.rank(); l-- > 0;) {
            if (l == dim) continue;
            if (++c[l] < box.extent(l)) break;
            c[l] = 0;
        }
    }
}

/// ||a - b||_2 / ||b||_2 (plain ||a - b||_2 when b is zero).
double relative_l2(std::span<const Complex> actual, std::span<const Complex> reference);

/// Residual threshold for transform verification, mildly relaxed with size:
/// 1e-11 * max(1, log2(n)/10).
double verification_tolerance(std::size_t n);

}  // namespace fftu
