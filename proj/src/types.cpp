#include "fftu/types.hpp"

#include <algorithm>
#include <cmath>

namespace fftu {

TensorShape::TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("shape: need at least one dimension");
    for (std::size_t l = 0; l < dims_.size(); ++l) {
        if (dims_[l] == 0)
            throw ConfigError("shape: dimension " + std::to_string(l) + " has extent 0");
        total_ *= dims_[l];
    }
}

TensorSignal::TensorSignal(TensorShape s) : shape(std::move(s)), data(shape.total()) {}

TensorSignal::TensorSignal(TensorShape s, std::vector<Complex> values)
    : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape.total())
        throw ConfigError("signal: data size " + std::to_string(data.size()) +
                          " does not match shape total " + std::to_string(shape.total()));
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> extents) {
    std::vector<std::size_t> strides(extents.size(), 1);
    for (std::size_t l = extents.size(); l-- > 1;)
        strides[l - 1] = strides[l] * extents[l];
    return strides;
}

std::size_t linearize(std::span<const std::size_t> coord, std::span<const std::size_t> strides) {
    std::size_t index = 0;
    for (std::size_t l = 0; l < coord.size(); ++l) index += coord[l] * strides[l];
    return index;
}

Coord delinearize(std::size_t index, std::span<const std::size_t> extents) {
    Coord coord(extents.size(), 0);
    for (std::size_t l = extents.size(); l-- > 0;) {
        coord[l] = index % extents[l];
        index /= extents[l];
    }
    return coord;
}

bool advance_coord(Coord& coord, std::span<const std::size_t> extents, std::size_t* changed) {
    for (std::size_t l = coord.size(); l-- > 0;) {
        if (++coord[l] < extents[l]) {
            if (changed) *changed = l;
            return true;
        }
        coord[l] = 0;
    }
    if (changed) *changed = 0;
    return false;
}

double relative_l2(std::span<const Complex> actual, std::span<const Complex> reference) {
    if (actual.size() != reference.size())
        throw ConfigError("relative_l2: length mismatch");
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        diff += std::norm(actual[i] - reference[i]);
        ref += std::norm(reference[i]);
    }
    diff = std::sqrt(diff);
    ref = std::sqrt(ref);
    return ref > 0.0 ? diff / ref : diff;
}

double verification_tolerance(std::size_t n) {
    const double relax = n > 1 ? std::log2(static_cast<double>(n)) / 10.0 : 1.0;
    return 1e-11 * std::max(1.0, relax);
}

}  // namespace fftu
