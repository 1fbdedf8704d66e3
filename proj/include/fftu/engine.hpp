#pragma once

#include "fftu/bsp.hpp"
#include "fftu/distribution.hpp"
#include "fftu/kernel.hpp"

namespace fftu {

/// Precomputed plan for the distributed transform on a cyclic map.
/// Requires p_l^2 | n_l in every dimension. The twiddle tables hold, per
/// rank and dimension, omega_{n_l}^(k * s_l) for k in [0, n_l/p_l)
/// (conjugated for the inverse direction): sum_l n_l/p_l entries per rank.
class FftuPlan {
public:
    FftuPlan(TensorShape shape, ProcGrid grid, Direction direction);

    const CyclicMap& map() const { return map_; }
    const TensorShape& shape() const { return map_.shape(); }
    const ProcGrid& grid() const { return map_.grid(); }
    Direction direction() const { return direction_; }
    std::size_t processors() const { return map_.processors(); }

    /// Extents n_l / p_l^2 of one packet, the per-destination share of a
    /// local block.
    const std::vector<std::size_t>& packet_extents() const { return packet_extents_; }

    std::size_t twiddle_entries_per_rank() const;
    const std::vector<Complex>& twiddles(std::size_t rank, std::size_t dim) const {
        return twiddles_[rank][dim];
    }

private:
    CyclicMap map_;
    Direction direction_;
    std::vector<std::size_t> packet_extents_;
    std::vector<std::vector<std::vector<Complex>>> twiddles_;
};

/// Scales the local block by the rank's twiddles and splits it into one
/// row-major packet per destination rank:
///   packet_{t mod p}[t div p] = local[t] * prod_l omega_{n_l}^(t_l * s_l).
/// The inner loop spends exactly two complex multiplies per element (one
/// factor-chain update, one element scale).
std::vector<std::vector<Complex>> pack_and_twiddle(std::span<const Complex> local,
                                                   std::span<const std::size_t> proc_coord,
                                                   const FftuPlan& plan,
                                                   FlopCounter* flops = nullptr);

/// A signal held in cyclically distributed blocks, one per rank.
struct DistributedSignal {
    DistributedSignal(CyclicMap m, std::vector<std::vector<Complex>> b);
    DistributedSignal(const CyclicMap& m, const TensorSignal& global);

    TensorSignal collect() const;

    CyclicMap map;
    std::vector<std::vector<Complex>> blocks;
};

/// Distributed transform in place: one local-transform superstep, one
/// all-to-all exchange, one strided local-transform superstep. Input and
/// output live in the same cyclic distribution. With p = 1 this is a plain
/// local transform and no communication superstep appears in the trace.
bsp::Trace fftu_transform(DistributedSignal& x, const FftuPlan& plan,
                          const bsp::ExecOptions& options = {});

/// Convenience wrappers building the plan with the matching direction.
bsp::Trace fftu_forward(DistributedSignal& x, const bsp::ExecOptions& options = {});
bsp::Trace fftu_inverse(DistributedSignal& x, const bsp::ExecOptions& options = {});

}  // namespace fftu
