#pragma once

#include "fftu/types.hpp"

#include <filesystem>

namespace fftu {

/// Deterministic test signal: independent components uniform on [-1, 1),
/// row-major, real part before imaginary part. The stream depends only on
/// the seed, never on platform or library state.
TensorSignal generate_input(const TensorShape& shape, std::uint64_t seed);

/// Binary signal file, little-endian:
///   bytes 0-3   magic "FFTU"
///   bytes 4-7   format version (u32, currently 1)
///   bytes 8-11  dimension count d (u32)
///   then        d extents (u64 each)
///   then        N complex values, row-major, interleaved re/im (f64 each)
/// Read errors report the byte offset of the offending field.
TensorSignal read_signal(const std::filesystem::path& path);
void write_signal(const std::filesystem::path& path, const TensorSignal& signal);

}  // namespace fftu
