#include "fftu/engine.hpp"

namespace fftu {

namespace {

CyclicMap checked_map(TensorShape shape, ProcGrid grid) {
    if (shape.rank() != grid.rank())
        throw ConfigError("plan: shape has " + std::to_string(shape.rank()) +
                          " dimensions but grid has " + std::to_string(grid.rank()));
    for (std::size_t l = 0; l < shape.rank(); ++l) {
        const std::size_t p = grid.extent(l);
        if (shape.extent(l) % (p * p) != 0)
            throw ConfigError("plan: dimension " + std::to_string(l) + ": p^2 = " +
                              std::to_string(p * p) + " does not divide n = " +
                              std::to_string(shape.extent(l)));
    }
    return CyclicMap(std::move(shape), std::move(grid));
}

}  // namespace

FftuPlan::FftuPlan(TensorShape shape, ProcGrid grid, Direction direction)
    : map_(checked_map(std::move(shape), std::move(grid))), direction_(direction) {
    const std::size_t d = map_.shape().rank();
    packet_extents_.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
        const std::size_t p = map_.grid().extent(l);
        packet_extents_[l] = map_.shape().extent(l) / (p * p);
    }
    const bool conj = direction_ == Direction::inverse;
    twiddles_.resize(map_.processors());
    for (std::size_t r = 0; r < map_.processors(); ++r) {
        const Coord s = map_.grid().rank_coord(r);
        twiddles_[r].resize(d);
        for (std::size_t l = 0; l < d; ++l) {
            const std::size_t n = map_.shape().extent(l);
            const std::size_t m = map_.local_box().extent(l);
            auto& table = twiddles_[r][l];
            table.reserve(m);
            for (std::size_t k = 0; k < m; ++k) {
                const Complex w = omega(n, static_cast<std::int64_t>(k * s[l]));
                table.push_back(conj ? std::conj(w) : w);
            }
        }
    }
}

std::size_t FftuPlan::twiddle_entries_per_rank() const {
    std::size_t entries = 0;
    for (std::size_t l = 0; l < map_.shape().rank(); ++l)
        entries += map_.local_box().extent(l);
    return entries;
}

std::vector<std::vector<Complex>> pack_and_twiddle(std::span<const Complex> local,
                                                   std::span<const std::size_t> proc_coord,
                                                   const FftuPlan& plan, FlopCounter* flops) {
    const auto& box = plan.map().local_box();
    const auto& grid = plan.grid();
    const std::size_t d = box.rank();
    if (local.size() != box.total())
        throw ConfigError("pack: local block size does not match the plan's box");
    const std::size_t rank = grid.rank_of(proc_coord);

    const auto& u = plan.packet_extents();
    const auto ustrides = row_major_strides(u);
    std::size_t packet_words = 1;
    for (auto e : u) packet_words *= e;

    std::vector<std::vector<Complex>> packets(plan.processors());
    for (auto& pk : packets) pk.resize(packet_words);

    // Row-major sweep with a factor chain: when dimension `changed` ticks,
    // only factors[changed..d-1] need recomputing. Every element costs two
    // complex multiplies in the innermost dimension (chain tail + scale).
    std::vector<Complex> factors(d);
    Coord t(d, 0);
    Coord kcoord(d), pos(d);
    std::size_t changed = 0;
    std::uint64_t muls = 0;
    for (std::size_t i = 0; i < local.size(); ++i) {
        for (std::size_t l = changed; l < d; ++l) {
            const Complex prev = l == 0 ? Complex{1.0, 0.0} : factors[l - 1];
            factors[l] = prev * plan.twiddles(rank, l)[t[l]];
            ++muls;
        }
        for (std::size_t l = 0; l < d; ++l) {
            kcoord[l] = t[l] % grid.extent(l);
            pos[l] = t[l] / grid.extent(l);
        }
        packets[grid.rank_of(kcoord)][linearize(pos, ustrides)] = local[i] * factors[d - 1];
        ++muls;
        advance_coord(t, box.dims(), &changed);
    }
    add_flops(flops, 6 * muls);
    return packets;
}

DistributedSignal::DistributedSignal(CyclicMap m, std::vector<std::vector<Complex>> b)
    : map(std::move(m)), blocks(std::move(b)) {
    if (blocks.size() != map.processors())
        throw ConfigError("distributed signal: expected " + std::to_string(map.processors()) +
                          " blocks, got " + std::to_string(blocks.size()));
    for (std::size_t r = 0; r < blocks.size(); ++r)
        if (blocks[r].size() != map.local_box().total())
            throw ConfigError("distributed signal: block " + std::to_string(r) +
                              " has wrong size");
}

DistributedSignal::DistributedSignal(const CyclicMap& m, const TensorSignal& global)
    : map(m), blocks(scatter(m, global)) {}

TensorSignal DistributedSignal::collect() const { return gather(map, blocks); }

bsp::Trace fftu_transform(DistributedSignal& x, const FftuPlan& plan,
                          const bsp::ExecOptions& options) {
    if (!(x.map == plan.map()))
        throw ConfigError("transform: signal distribution does not match the plan");
    const int p = static_cast<int>(plan.processors());
    const auto& box = plan.map().local_box();
    const Direction dir = plan.direction();

    if (p == 1) {
        return bsp::run_spmd(
            1,
            [&](bsp::Context& ctx) {
                fft_md_inplace(x.blocks[0], box, dir, &ctx.flops());
            },
            options);
    }

    const auto& grid = plan.grid();
    const std::size_t d = box.rank();
    const auto& u = plan.packet_extents();
    const auto strides = row_major_strides(box.dims());

    const auto program = [&](bsp::Context& ctx) {
        const int r = ctx.rank();
        const std::span<Complex> block(x.blocks[r]);
        ctx.register_buffer("cyclic_block", block);

        // local tensor transform, then twiddle and split into packets
        fft_md_inplace(block, box, dir, &ctx.flops());
        const Coord s = grid.rank_coord(static_cast<std::size_t>(r));
        auto packets = pack_and_twiddle(block, s, plan, &ctx.flops());
        ctx.sync();

        // the single all-to-all: this rank's share of destination k's block
        // is the sub-box starting at s_l * u_l
        for (int dest = 0; dest < p; ++dest) {
            bsp::PutDescriptor where;
            where.stride = strides;
            where.count = u;
            where.start.resize(d);
            for (std::size_t l = 0; l < d; ++l) where.start[l] = s[l] * u[l];
            ctx.put(dest, "cyclic_block", std::move(where),
                    std::move(packets[static_cast<std::size_t>(dest)]));
        }
        ctx.sync();

        // remaining short transforms: length p_l at stride u_l along each
        // split dimension
        for (std::size_t l = 0; l < d; ++l) {
            const std::size_t pl = grid.extent(l);
            if (pl == 1) continue;
            for_each_line(box, l, [&](std::size_t base) {
                for (std::size_t tl = 0; tl < u[l]; ++tl)
                    fft_strided(block, base + tl * strides[l], u[l] * strides[l], pl, dir,
                                &ctx.flops());
            });
        }
    };
    return bsp::run_spmd(p, program, options);
}

bsp::Trace fftu_forward(DistributedSignal& x, const bsp::ExecOptions& options) {
    const FftuPlan plan(x.map.shape(), x.map.grid(), Direction::forward);
    return fftu_transform(x, plan, options);
}

bsp::Trace fftu_inverse(DistributedSignal& x, const bsp::ExecOptions& options) {
    const FftuPlan plan(x.map.shape(), x.map.grid(), Direction::inverse);
    return fftu_transform(x, plan, options);
}

}  // namespace fftu
