#pragma once

#include "fftu/types.hpp"

#include <array>

namespace fftu {

/// Processor grid (p_1, ..., p_d). Ranks are linearized row-major, last
/// coordinate fastest, matching the array layout.
class ProcGrid {
public:
    explicit ProcGrid(std::vector<std::size_t> dims);
    ProcGrid(std::initializer_list<std::size_t> dims)
        : ProcGrid(std::vector<std::size_t>(dims)) {}

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t extent(std::size_t dim) const { return dims_.at(dim); }
    std::size_t processors() const { return total_; }

    std::size_t rank_of(std::span<const std::size_t> coord) const;
    Coord rank_coord(std::size_t rank) const;

    bool operator==(const ProcGrid&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t total_ = 1;
};

/// Cyclic distribution: global index j_l lives on processor coordinate
/// j_l mod p_l at local index j_l div p_l. Requires p_l | n_l in every
/// dimension; there is no padding.
class CyclicMap {
public:
    CyclicMap(TensorShape shape, ProcGrid grid);

    const TensorShape& shape() const { return shape_; }
    const ProcGrid& grid() const { return grid_; }
    std::size_t processors() const { return grid_.processors(); }

    /// Extents n_l / p_l of the block held by every rank.
    const TensorShape& local_box() const { return local_; }
    std::vector<std::size_t> local_extents(std::size_t rank) const;

    /// phi(s, k) = s + k * p, componentwise.
    Coord local_to_global(std::span<const std::size_t> proc, std::span<const std::size_t> local) const;
    Coord to_global(std::size_t rank, std::span<const std::size_t> local) const;

    /// Inverse map: j -> (j mod p, j div p).
    std::pair<Coord, Coord> global_to_local(std::span<const std::size_t> global) const;

    bool operator==(const CyclicMap&) const = default;

private:
    TensorShape shape_;
    ProcGrid grid_;
    TensorShape local_;
};

/// Slab (block) distribution over one dimension: p consecutive chunks of
/// extent n_split / p. Requires p | n_split.
class SlabMap {
public:
    SlabMap(TensorShape shape, std::size_t processors, std::size_t split_dim = 0);

    const TensorShape& shape() const { return shape_; }
    std::size_t processors() const { return processors_; }
    std::size_t split_dim() const { return split_dim_; }

    std::vector<std::size_t> local_extents(std::size_t rank) const;
    Coord to_global(std::size_t rank, std::span<const std::size_t> local) const;

private:
    TensorShape shape_;
    std::size_t processors_;
    std::size_t split_dim_;
};

/// Pencil distribution: a p_a x p_b grid blocks two distinct dimensions;
/// every other dimension stays whole. Ranks are row-major over (s_a, s_b).
class PencilMap {
public:
    PencilMap(TensorShape shape, std::array<std::size_t, 2> grid, std::array<std::size_t, 2> dims);

    const TensorShape& shape() const { return shape_; }
    std::size_t processors() const { return grid_[0] * grid_[1]; }

    std::vector<std::size_t> local_extents(std::size_t rank) const;
    Coord to_global(std::size_t rank, std::span<const std::size_t> local) const;

private:
    TensorShape shape_;
    std::array<std::size_t, 2> grid_;
    std::array<std::size_t, 2> dims_;
};

/// Splits a global signal into per-rank blocks, local row-major order.
template <typename Map>
std::vector<std::vector<Complex>> scatter(const Map& map, const TensorSignal& global) {
    if (global.shape != map.shape())
        throw ConfigError("scatter: signal shape does not match distribution shape");
    const auto gstrides = row_major_strides(global.shape.dims());
    std::vector<std::vector<Complex>> blocks(map.processors());
    for (std::size_t r = 0; r < map.processors(); ++r) {
        const auto ext = map.local_extents(r);
        std::size_t count = 1;
        for (auto e : ext) count *= e;
        blocks[r].resize(count);
        Coord local(ext.size(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            const Coord g = map.to_global(r, local);
            blocks[r][i] = global.data[linearize(g, gstrides)];
            advance_coord(local, ext);
        }
    }
    return blocks;
}

/// Inverse of scatter. Every global element must be covered exactly once.
template <typename Map>
TensorSignal gather(const Map& map, const std::vector<std::vector<Complex>>& blocks) {
    if (blocks.size() != map.processors())
        throw ConfigError("gather: block count does not match processor count");
    TensorSignal global(map.shape());
    const auto gstrides = row_major_strides(global.shape.dims());
    for (std::size_t r = 0; r < map.processors(); ++r) {
        const auto ext = map.local_extents(r);
        std::size_t count = 1;
        for (auto e : ext) count *= e;
        if (blocks[r].size() != count)
            throw ConfigError("gather: block size mismatch on rank " + std::to_string(r));
        Coord local(ext.size(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            const Coord g = map.to_global(r, local);
            global.data[linearize(g, gstrides)] = blocks[r][i];
            advance_coord(local, ext);
        }
    }
    return global;
}

/// Distribution family for capacity queries.
struct DistStrategy {
    enum class Kind { cyclic, slab, pencil, rdim };
    Kind kind = Kind::cyclic;
    std::size_t param = 0;  // slab: split dimension; rdim: r

    static DistStrategy cyclic() { return {Kind::cyclic, 0}; }
    static DistStrategy slab(std::size_t dim = 0) { return {Kind::slab, dim}; }
    static DistStrategy pencil() { return {Kind::pencil, 0}; }
    static DistStrategy rdim(std::size_t r) { return {Kind::rdim, r}; }
};

/// Largest processor count the strategy admits for this shape.
///   cyclic     prod_l max{ q : q^2 | n_l }
///   slab       min(n_split, N / n_split)
///   pencil     d = 3: best two-dimensional grid; d > 3: rdim(2)
///   rdim(r)    max over r-subsets S of min(prod S, N / prod S); needs r < d
std::size_t max_processors(const TensorShape& shape, const DistStrategy& strategy);

}  // namespace fftu
