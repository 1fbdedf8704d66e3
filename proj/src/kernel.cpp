#include "fftu/kernel.hpp"

#include <array>
#include <unordered_map>

namespace fftu {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Limit for the naive base case; any prime factor above this is rejected.
constexpr std::size_t kMaxRadix = 64;

std::size_t smallest_prime_factor(std::size_t n) {
    if (n % 2 == 0) return 2;
    for (std::size_t f = 3; f * f <= n; f += 2)
        if (n % f == 0) return f;
    return n;
}

// Forward roots omega_n^k for k in [0, n), entry k bit-identical to
// omega(n, k). Cached per thread; references stay valid (node-based map).
const std::vector<Complex>& root_table(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::vector<Complex>> cache;
    auto& table = cache[n];
    if (table.empty()) {
        table.reserve(n);
        for (std::size_t k = 0; k < n; ++k) table.push_back(omega(n, static_cast<std::int64_t>(k)));
    }
    return table;
}

inline Complex load_root(const std::vector<Complex>& table, std::size_t index, bool conjugate) {
    const Complex w = table[index];
    return conjugate ? std::conj(w) : w;
}

// Mixed-radix step on a contiguous array of length n, decimating by the
// smallest prime factor q. `scratch` must hold n elements and is trashed;
// the recursion reuses `a` as the child scratch, which is safe because the
// decimation has already copied everything out. `table` belongs to the
// top-level length; the current level addresses it with stride
// `table_stride` = n_top / n.
void transform_rec(Complex* a, std::size_t n, Complex* scratch,
                   const std::vector<Complex>& table, std::size_t table_stride,
                   bool conjugate, FlopCounter* flops) {
    if (n == 1) return;
    const std::size_t q = smallest_prime_factor(n);
    if (q > kMaxRadix)
        throw std::domain_error("fft: length " + std::to_string(n) + " has prime factor " +
                                std::to_string(q) + ", above the naive base-case limit of " +
                                std::to_string(kMaxRadix));
    const std::size_t m = n / q;

    for (std::size_t s = 0; s < q; ++s)
        for (std::size_t k = 0; k < m; ++k) scratch[s * m + k] = a[k * q + s];

    for (std::size_t s = 0; s < q; ++s)
        transform_rec(scratch + s * m, m, a, table, table_stride * q, conjugate, flops);

    if (q == 2) {
        for (std::size_t k = 0; k < m; ++k) {
            const Complex w = load_root(table, k * table_stride, conjugate);
            const Complex u0 = scratch[k];
            const Complex u1 = scratch[m + k] * w;
            a[k] = u0 + u1;
            a[m + k] = u0 - u1;
        }
        add_flops(flops, 10 * static_cast<std::uint64_t>(m));
    } else {
        std::array<Complex, kMaxRadix> u;
        for (std::size_t k = 0; k < m; ++k) {
            u[0] = scratch[k];
            for (std::size_t s = 1; s < q; ++s)
                u[s] = scratch[s * m + k] * load_root(table, s * k * table_stride, conjugate);
            for (std::size_t t = 0; t < q; ++t) {
                Complex acc = u[0];
                for (std::size_t s = 1; s < q; ++s)
                    acc += u[s] * load_root(table, ((s * t) % q) * m * table_stride, conjugate);
                a[t * m + k] = acc;
            }
        }
        add_flops(flops, static_cast<std::uint64_t>(m) * (6 * (q - 1) + 8 * q * (q - 1)));
    }
}

void transform_contiguous(std::span<Complex> a, Direction dir, FlopCounter* flops) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    const auto& table = root_table(n);
    thread_local std::vector<Complex> scratch;
    if (scratch.size() < n) scratch.resize(n);
    transform_rec(a.data(), n, scratch.data(), table, 1, dir == Direction::inverse, flops);
    if (dir == Direction::inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= scale;
        add_flops(flops, 2 * static_cast<std::uint64_t>(n));
    }
}

}  // namespace

Complex omega(std::size_t n, std::int64_t exponent) {
    if (n == 0) throw std::domain_error("omega: order must be positive");
    const auto order = static_cast<std::int64_t>(n);
    std::int64_t r = exponent % order;
    if (r < 0) r += order;
    const double angle = -(kTwoPi * static_cast<double>(r)) / static_cast<double>(n);
    return {std::cos(angle), std::sin(angle)};
}

std::vector<Complex> dft_naive(std::span<const Complex> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::domain_error("dft_naive: empty input");
    const auto& table = root_table(n);
    std::vector<Complex> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) acc += x[j] * table[(j * k) % n];
        y[k] = acc;
    }
    return y;
}

TensorSignal dft_naive_md(const TensorSignal& x) {
    const std::size_t d = x.shape.rank();
    const std::size_t total = x.shape.total();
    std::vector<const std::vector<Complex>*> tables(d);
    for (std::size_t l = 0; l < d; ++l) tables[l] = &root_table(x.shape.extent(l));

    TensorSignal y(x.shape);
    Coord k(d, 0);
    for (std::size_t ok = 0; ok < total; ++ok) {
        Complex acc{0.0, 0.0};
        Coord j(d, 0);
        for (std::size_t oj = 0; oj < total; ++oj) {
            Complex w{1.0, 0.0};
            for (std::size_t l = 0; l < d; ++l)
                w *= (*tables[l])[(j[l] * k[l]) % x.shape.extent(l)];
            acc += x.data[oj] * w;
            advance_coord(j, x.shape.dims());
        }
        y.data[ok] = acc;
        advance_coord(k, x.shape.dims());
    }
    return y;
}

std::vector<Complex> fft_1d(std::span<const Complex> x, Direction dir) {
    std::vector<Complex> y(x.begin(), x.end());
    fft_1d_inplace(y, dir);
    return y;
}

void fft_1d_inplace(std::span<Complex> x, Direction dir, FlopCounter* flops) {
    if (x.empty()) throw std::domain_error("fft: empty input");
    transform_contiguous(x, dir, flops);
}

void fft_strided(std::span<Complex> buffer, std::size_t offset, std::size_t stride,
                 std::size_t count, Direction dir, FlopCounter* flops) {
    if (stride == 0) throw std::out_of_range("fft_strided: stride must be positive");
    if (count == 0) throw std::out_of_range("fft_strided: count must be positive");
    const std::size_t last = offset + (count - 1) * stride;
    if (last >= buffer.size())
        throw std::out_of_range("fft_strided: slot " + std::to_string(last) +
                                " is outside a buffer of size " + std::to_string(buffer.size()));
    if (stride == 1) {
        transform_contiguous(buffer.subspan(offset, count), dir, flops);
        return;
    }
    thread_local std::vector<Complex> gathered;
    if (gathered.size() < count) gathered.resize(count);
    for (std::size_t j = 0; j < count; ++j) gathered[j] = buffer[offset + j * stride];
    transform_contiguous(std::span<Complex>(gathered.data(), count), dir, flops);
    for (std::size_t j = 0; j < count; ++j) buffer[offset + j * stride] = gathered[j];
}

TensorSignal fft_md(const TensorSignal& x, Direction dir) {
    TensorSignal y = x;
    fft_md_inplace(y.data, y.shape, dir, nullptr);
    return y;
}

void fft_md_inplace(std::span<Complex> data, const TensorShape& box, Direction dir,
                    FlopCounter* flops) {
    if (data.size() != box.total())
        throw ConfigError("fft_md: data size does not match shape total");
    const auto strides = row_major_strides(box.dims());
    for (std::size_t l = 0; l < box.rank(); ++l) {
        if (box.extent(l) == 1) continue;
        for_each_line(box, l, [&](std::size_t base) {
            fft_strided(data, base, strides[l], box.extent(l), dir, flops);
        });
    }
}

}  // namespace fftu
