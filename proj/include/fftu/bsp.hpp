#pragma once

#include "fftu/kernel.hpp"

#include <functional>
#include <memory>

namespace fftu::bsp {

/// Destination region of a one-sided put: a strided box inside a named
/// buffer registered by the receiving rank. The payload is row-major over
/// `count`; element i lands at linear offset
///   sum_l (start[l] + i[l]) * stride[l].
struct PutDescriptor {
    std::vector<std::size_t> start;
    std::vector<std::size_t> stride;
    std::vector<std::size_t> count;

    std::size_t words() const;
};

enum class StepKind { compute, communicate };

/// One superstep of a finished run. Word counts are complex elements.
/// A sync is charged only when the superstep communicated.
struct SuperstepRecord {
    StepKind kind = StepKind::compute;
    std::uint64_t max_flops = 0;
    std::uint64_t max_words_sent = 0;
    std::uint64_t max_words_received = 0;
    int sync_charged = 0;
    std::vector<std::uint64_t> flops_per_rank;
    std::vector<std::uint64_t> words_sent_per_rank;
    std::vector<std::uint64_t> words_received_per_rank;
};

struct Trace {
    int processors = 1;
    std::vector<SuperstepRecord> supersteps;

    std::size_t communicate_count() const;
    std::uint64_t syncs_charged() const;
    std::uint64_t total_flops(std::size_t rank) const;
};

/// BSP machine parameters: g = cost per word in an h-relation, l = cost of
/// one charged synchronization.
struct CostModel {
    double g = 0.0;
    double l = 0.0;
};

/// sum over supersteps of max_flops + g * max(sent, received) + l * sync.
double cost_report(const Trace& trace, const CostModel& model);

std::string trace_to_json(const Trace& trace);

struct ExecOptions {
    enum class Mode { automatic, parallel, serial };
    /// automatic defers to the FFTU_SERIAL environment variable.
    Mode mode = Mode::automatic;
    /// Reject puts whose destination regions overlap within a superstep.
    bool check_overlaps = true;
};

namespace detail {
struct RunState;
}

/// Per-rank handle inside a running SPMD program.
///
/// A superstep ends at sync(); puts issued during a superstep become visible
/// in the destination buffers immediately after it, never earlier. Put
/// application order is (source rank, issue order), but overlapping
/// destination regions are a program error and are rejected when
/// check_overlaps is on. Supersteps in which nothing happened (no flops, no
/// puts) are not recorded.
class Context {
public:
    int rank() const { return rank_; }
    int processors() const;

    /// Makes `storage` a put target for this rank under `name`. The storage
    /// must stay valid for the rest of the run.
    void register_buffer(const std::string& name, std::span<Complex> storage);

    void put(int dest_rank, const std::string& buffer, PutDescriptor where,
             std::vector<Complex> payload);
    void put(int dest_rank, const std::string& buffer, PutDescriptor where,
             std::span<const Complex> payload);

    void sync();

    /// Flop counter feeding the current superstep's record.
    FlopCounter& flops();

private:
    friend detail::RunState;
    Context(detail::RunState* state, int rank) : state_(state), rank_(rank) {}

    detail::RunState* state_;
    int rank_;
};

/// Runs `program` on ranks 0..processors-1 and returns the superstep trace.
/// Parallel mode uses one thread per rank; serial mode runs the ranks
/// round-robin within each superstep on worker threads that take turns, and
/// produces bit-identical results. An exception thrown by a rank aborts the
/// run and is rethrown here (lowest rank wins if several throw).
Trace run_spmd(int processors, const std::function<void(Context&)>& program,
               const ExecOptions& options = {});

}  // namespace fftu::bsp
