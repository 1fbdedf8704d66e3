#pragma once

#include "fftu/types.hpp"

namespace fftu {

enum class Direction { forward, inverse };

/// Accumulates real floating-point operations performed by the transform
/// kernels. Counting convention: complex multiply = 6, complex add = 2,
/// a radix-2 butterfly = 10 per output pair (so a power-of-two transform
/// of length n costs exactly 5 n log2 n).
struct FlopCounter {
    std::uint64_t value = 0;
};

inline void add_flops(FlopCounter* c, std::uint64_t n) {
    if (c) c->value += n;
}

/// e^(-2 pi i e / n). The exponent is reduced mod n before any floating
/// arithmetic, so omega(n, e + n) == omega(n, e) bit for bit. n must be > 0.
Complex omega(std::size_t n, std::int64_t exponent);

/// Literal O(n^2) evaluation of y_k = sum_j x_j omega_n^(jk). Oracle only.
std::vector<Complex> dft_naive(std::span<const Complex> x);

/// Literal nested-sum evaluation of the d-dimensional transform. Oracle only.
TensorSignal dft_naive_md(const TensorSignal& x);

/// Mixed-radix transform, decimating by the smallest prime factor at each
/// level. Prime lengths above 64 are rejected. Direction::inverse conjugates
/// the roots and scales by 1/n.
std::vector<Complex> fft_1d(std::span<const Complex> x, Direction dir = Direction::forward);
void fft_1d_inplace(std::span<Complex> x, Direction dir = Direction::forward,
                    FlopCounter* flops = nullptr);

/// Transforms the `count` elements buffer[offset + j*stride] in place and
/// leaves every other slot of `buffer` untouched. stride >= 1; the touched
/// slots must lie inside the buffer.
void fft_strided(std::span<Complex> buffer, std::size_t offset, std::size_t stride,
                 std::size_t count, Direction dir = Direction::forward,
                 FlopCounter* flops = nullptr);

/// d-dimensional transform as one strided 1-D pass per dimension.
TensorSignal fft_md(const TensorSignal& x, Direction dir = Direction::forward);
void fft_md_inplace(std::span<Complex> data, const TensorShape& box,
                    Direction dir = Direction::forward, FlopCounter* flops = nullptr);

}  // namespace fftu
