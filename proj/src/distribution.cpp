#include "fftu/distribution.hpp"

#include <cmath>

namespace fftu {

namespace {

// Largest q with q^2 dividing n.
std::size_t largest_square_divisor_root(std::size_t n) {
    for (std::size_t q = static_cast<std::size_t>(std::sqrt(static_cast<double>(n))); q > 1; --q)
        if (n % (q * q) == 0) return q;
    return 1;
}

}  // namespace

ProcGrid::ProcGrid(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("grid: need at least one dimension");
    for (std::size_t l = 0; l < dims_.size(); ++l) {
        if (dims_[l] == 0)
            throw ConfigError("grid: dimension " + std::to_string(l) + " has extent 0");
        total_ *= dims_[l];
    }
}

std::size_t ProcGrid::rank_of(std::span<const std::size_t> coord) const {
    if (coord.size() != dims_.size()) throw ConfigError("grid: coordinate rank mismatch");
    std::size_t r = 0;
    for (std::size_t l = 0; l < dims_.size(); ++l) {
        if (coord[l] >= dims_[l]) throw std::out_of_range("grid: coordinate out of range");
        r = r * dims_[l] + coord[l];
    }
    return r;
}

Coord ProcGrid::rank_coord(std::size_t rank) const {
    if (rank >= total_) throw std::out_of_range("grid: rank out of range");
    return delinearize(rank, dims_);
}

CyclicMap::CyclicMap(TensorShape shape, ProcGrid grid)
    : shape_(std::move(shape)), grid_(std::move(grid)), local_([&] {
          if (shape_.rank() != grid_.rank())
              throw ConfigError("cyclic: shape has " + std::to_string(shape_.rank()) +
                                " dimensions but grid has " + std::to_string(grid_.rank()));
          std::vector<std::size_t> ext(shape_.rank());
          for (std::size_t l = 0; l < shape_.rank(); ++l) {
              if (shape_.extent(l) % grid_.extent(l) != 0)
                  throw ConfigError("cyclic: dimension " + std::to_string(l) + ": p = " +
                                    std::to_string(grid_.extent(l)) + " does not divide n = " +
                                    std::to_string(shape_.extent(l)));
              ext[l] = shape_.extent(l) / grid_.extent(l);
          }
          return TensorShape(std::move(ext));
      }()) {}

std::vector<std::size_t> CyclicMap::local_extents(std::size_t rank) const {
    if (rank >= processors()) throw std::out_of_range("cyclic: rank out of range");
    return local_.dims();
}

Coord CyclicMap::local_to_global(std::span<const std::size_t> proc,
                                 std::span<const std::size_t> local) const {
    if (proc.size() != shape_.rank() || local.size() != shape_.rank())
        throw ConfigError("cyclic: coordinate rank mismatch");
    Coord global(shape_.rank());
    for (std::size_t l = 0; l < shape_.rank(); ++l) {
        if (proc[l] >= grid_.extent(l) || local[l] >= local_.extent(l))
            throw std::out_of_range("cyclic: coordinate out of range");
        global[l] = proc[l] + local[l] * grid_.extent(l);
    }
    return global;
}

Coord CyclicMap::to_global(std::size_t rank, std::span<const std::size_t> local) const {
    return local_to_global(grid_.rank_coord(rank), local);
}

std::pair<Coord, Coord> CyclicMap::global_to_local(std::span<const std::size_t> global) const {
    if (global.size() != shape_.rank()) throw ConfigError("cyclic: coordinate rank mismatch");
    Coord proc(shape_.rank()), local(shape_.rank());
    for (std::size_t l = 0; l < shape_.rank(); ++l) {
        if (global[l] >= shape_.extent(l)) throw std::out_of_range("cyclic: index out of range");
        proc[l] = global[l] % grid_.extent(l);
        local[l] = global[l] / grid_.extent(l);
    }
    return {std::move(proc), std::move(local)};
}

SlabMap::SlabMap(TensorShape shape, std::size_t processors, std::size_t split_dim)
    : shape_(std::move(shape)), processors_(processors), split_dim_(split_dim) {
    if (processors_ == 0) throw ConfigError("slab: need at least one processor");
    if (split_dim_ >= shape_.rank())
        throw ConfigError("slab: split dimension " + std::to_string(split_dim_) +
                          " out of range for a " + std::to_string(shape_.rank()) +
                          "-dimensional shape");
    if (shape_.extent(split_dim_) % processors_ != 0)
        throw ConfigError("slab: p = " + std::to_string(processors_) + " does not divide n = " +
                          std::to_string(shape_.extent(split_dim_)));
}

std::vector<std::size_t> SlabMap::local_extents(std::size_t rank) const {
    if (rank >= processors_) throw std::out_of_range("slab: rank out of range");
    auto ext = shape_.dims();
    ext[split_dim_] /= processors_;
    return ext;
}

Coord SlabMap::to_global(std::size_t rank, std::span<const std::size_t> local) const {
    const auto ext = local_extents(rank);
    if (local.size() != ext.size()) throw ConfigError("slab: coordinate rank mismatch");
    Coord global(local.begin(), local.end());
    for (std::size_t l = 0; l < ext.size(); ++l)
        if (local[l] >= ext[l]) throw std::out_of_range("slab: coordinate out of range");
    global[split_dim_] += rank * ext[split_dim_];
    return global;
}

PencilMap::PencilMap(TensorShape shape, std::array<std::size_t, 2> grid,
                     std::array<std::size_t, 2> dims)
    : shape_(std::move(shape)), grid_(grid), dims_(dims) {
    if (dims_[0] == dims_[1]) throw ConfigError("pencil: split dimensions must differ");
    for (int i = 0; i < 2; ++i) {
        if (dims_[i] >= shape_.rank())
            throw ConfigError("pencil: split dimension " + std::to_string(dims_[i]) +
                              " out of range");
        if (grid_[i] == 0) throw ConfigError("pencil: grid extent must be positive");
        if (shape_.extent(dims_[i]) % grid_[i] != 0)
            throw ConfigError("pencil: p = " + std::to_string(grid_[i]) +
                              " does not divide n = " + std::to_string(shape_.extent(dims_[i])));
    }
}

std::vector<std::size_t> PencilMap::local_extents(std::size_t rank) const {
    if (rank >= processors()) throw std::out_of_range("pencil: rank out of range");
    auto ext = shape_.dims();
    ext[dims_[0]] /= grid_[0];
    ext[dims_[1]] /= grid_[1];
    return ext;
}

Coord PencilMap::to_global(std::size_t rank, std::span<const std::size_t> local) const {
    const auto ext = local_extents(rank);
    if (local.size() != ext.size()) throw ConfigError("pencil: coordinate rank mismatch");
    for (std::size_t l = 0; l < ext.size(); ++l)
        if (local[l] >= ext[l]) throw std::out_of_range("pencil: coordinate out of range");
    Coord global(local.begin(), local.end());
    global[dims_[0]] += (rank / grid_[1]) * ext[dims_[0]];
    global[dims_[1]] += (rank % grid_[1]) * ext[dims_[1]];
    return global;
}

std::size_t max_processors(const TensorShape& shape, const DistStrategy& strategy) {
    const std::size_t d = shape.rank();
    const std::size_t total = shape.total();

    // Best r-subset for block distributions: maximize min(prod, N/prod)
    // over all r-element dimension subsets.
    const auto best_rdim = [&](std::size_t r) {
        std::size_t best = 1;
        std::vector<std::size_t> pick(r);
        for (std::size_t l = 0; l < r; ++l) pick[l] = l;
        while (true) {
            std::size_t prod = 1;
            for (auto l : pick) prod *= shape.extent(l);
            best = std::max(best, std::min(prod, total / prod));
            // next lexicographic subset
            std::size_t l = r;
            while (l > 0 && pick[l - 1] == d - r + l - 1) --l;
            if (l == 0) return best;
            ++pick[l - 1];
            for (std::size_t j = l; j < r; ++j) pick[j] = pick[j - 1] + 1;
        }
    };

    switch (strategy.kind) {
        case DistStrategy::Kind::cyclic: {
            std::size_t p = 1;
            for (std::size_t l = 0; l < d; ++l) p *= largest_square_divisor_root(shape.extent(l));
            return p;
        }
        case DistStrategy::Kind::slab: {
            if (strategy.param >= d)
                throw std::domain_error("max_processors: slab dimension out of range");
            const std::size_t n = shape.extent(strategy.param);
            return std::min(n, total / n);
        }
        case DistStrategy::Kind::pencil: {
            if (d < 3)
                throw std::domain_error("max_processors: pencil needs at least 3 dimensions");
            return best_rdim(2);
        }
        case DistStrategy::Kind::rdim: {
            if (strategy.param == 0 || strategy.param >= d)
                throw std::domain_error(
                    "max_processors: rdim needs 1 <= r < d (a full split leaves no dimension to "
                    "transform locally)");
            return best_rdim(strategy.param);
        }
    }
    throw std::logic_error("max_processors: unknown strategy");
}

}  // namespace fftu
