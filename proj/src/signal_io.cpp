#include "fftu/signal_io.hpp"

#include <bit>
#include <fstream>
#include <limits>
#include <random>

namespace fftu {

namespace {

constexpr char kMagic[4] = {'F', 'F', 'T', 'U'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxDims = 64;

void write_bytes_le(std::ostream& out, std::uint64_t v, int n) {
    char b[8];
    for (int i = 0; i < n; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, n);
}

void write_f64(std::ostream& out, double v) {
    write_bytes_le(out, std::bit_cast<std::uint64_t>(v), 8);
}

[[noreturn]] void fail_at(std::size_t offset, const std::string& what) {
    throw FormatError("signal file: " + what + " at byte offset " + std::to_string(offset));
}

std::uint64_t read_bytes_le(std::istream& in, std::size_t offset, int n, const char* field) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), n);
    if (in.gcount() != n)
        fail_at(offset + static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0)),
                std::string("truncated ") + field);
    std::uint64_t v = 0;
    for (int i = n; i-- > 0;) v = (v << 8) | b[i];
    return v;
}

}  // namespace

TensorSignal generate_input(const TensorShape& shape, std::uint64_t seed) {
    // mt19937_64 has a fully specified output stream, so the signal depends
    // only on the seed. Raw 64-bit words are mapped to [-1, 1) directly;
    // a distribution object would not be portable.
    std::mt19937_64 rng(seed);
    const auto draw = [&rng] {
        return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    };
    TensorSignal signal(shape);
    for (auto& v : signal.data) {
        const double re = draw();
        const double im = draw();
        v = {re, im};
    }
    return signal;
}

TensorSignal read_signal(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("signal file: cannot open '" + path.string() + "'");

    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4) fail_at(static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0)), "truncated magic");
    for (int i = 0; i < 4; ++i)
        if (magic[i] != kMagic[i]) fail_at(0, "bad magic (expected \"FFTU\")");

    const auto version = static_cast<std::uint32_t>(read_bytes_le(in, 4, 4, "version"));
    if (version != kVersion) fail_at(4, "unsupported version " + std::to_string(version));

    const auto d = static_cast<std::uint32_t>(read_bytes_le(in, 8, 4, "dimension count"));
    if (d == 0) fail_at(8, "dimension count is zero");
    if (d > kMaxDims) fail_at(8, "implausible dimension count " + std::to_string(d));

    std::vector<std::size_t> dims(d);
    std::size_t total = 1;
    for (std::uint32_t l = 0; l < d; ++l) {
        const std::size_t off = 12 + 8 * static_cast<std::size_t>(l);
        const std::uint64_t e = read_bytes_le(in, off, 8, "extent");
        if (e == 0) fail_at(off, "zero extent for dimension " + std::to_string(l));
        if (e > std::numeric_limits<std::size_t>::max() / total)
            fail_at(off, "extent overflow");
        total *= static_cast<std::size_t>(e);
        dims[l] = static_cast<std::size_t>(e);
    }

    const std::size_t payload_start = 12 + 8 * static_cast<std::size_t>(d);
    std::vector<Complex> data(total);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t off = payload_start + 16 * i;
        const double re = std::bit_cast<double>(read_bytes_le(in, off, 8, "payload"));
        const double im = std::bit_cast<double>(read_bytes_le(in, off + 8, 8, "payload"));
        data[i] = {re, im};
    }

    char extra;
    in.read(&extra, 1);
    if (in.gcount() != 0) fail_at(payload_start + 16 * total, "trailing data");

    return {TensorShape(std::move(dims)), std::move(data)};
}

void write_signal(const std::filesystem::path& path, const TensorSignal& signal) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("signal file: cannot open '" + path.string() + "' for writing");
    out.write(kMagic, 4);
    write_bytes_le(out, kVersion, 4);
    write_bytes_le(out, static_cast<std::uint32_t>(signal.shape.rank()), 4);
    for (auto e : signal.shape.dims()) write_bytes_le(out, e, 8);
    for (const auto& v : signal.data) {
        write_f64(out, v.real());
        write_f64(out, v.imag());
    }
    if (!out) throw FormatError("signal file: write failed for '" + path.string() + "'");
}

}  // namespace fftu
