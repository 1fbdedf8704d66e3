#include "fftu/bsp.hpp"

#include <json.hpp>

#include <atomic>
#include <barrier>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

namespace fftu::bsp {

std::size_t PutDescriptor::words() const {
    std::size_t w = 1;
    for (auto c : count) w *= c;
    return w;
}

std::size_t Trace::communicate_count() const {
    std::size_t n = 0;
    for (const auto& s : supersteps) n += s.kind == StepKind::communicate;
    return n;
}

std::uint64_t Trace::syncs_charged() const {
    std::uint64_t n = 0;
    for (const auto& s : supersteps) n += s.sync_charged;
    return n;
}

std::uint64_t Trace::total_flops(std::size_t rank) const {
    std::uint64_t n = 0;
    for (const auto& s : supersteps) n += s.flops_per_rank.at(rank);
    return n;
}

double cost_report(const Trace& trace, const CostModel& model) {
    double cost = 0.0;
    for (const auto& s : trace.supersteps) {
        cost += static_cast<double>(s.max_flops);
        cost += model.g * static_cast<double>(std::max(s.max_words_sent, s.max_words_received));
        cost += model.l * s.sync_charged;
    }
    return cost;
}

std::string trace_to_json(const Trace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : trace.supersteps) {
        steps.push_back({
            {"kind", s.kind == StepKind::communicate ? "communicate" : "compute"},
            {"max_flops", s.max_flops},
            {"max_words_sent", s.max_words_sent},
            {"max_words_received", s.max_words_received},
            {"sync_charged", s.sync_charged},
            {"flops_per_rank", s.flops_per_rank},
            {"words_sent_per_rank", s.words_sent_per_rank},
            {"words_received_per_rank", s.words_received_per_rank},
        });
    }
    nlohmann::json j = {
        {"processors", trace.processors},
        {"communication_supersteps", trace.communicate_count()},
        {"syncs_charged", trace.syncs_charged()},
        {"supersteps", std::move(steps)},
    };
    return j.dump(2);
}

namespace detail {

// Internal unwinding token: the run was aborted by another rank's error.
struct AbortRun {};

struct PendingPut {
    int src;
    int dest;
    std::string buffer;
    PutDescriptor where;
    std::vector<Complex> payload;
};

struct RankData {
    std::unordered_map<std::string, std::span<Complex>> buffers;
    std::vector<PendingPut> outgoing;  // current superstep
    FlopCounter flops;                 // current superstep
    std::uint64_t words_sent = 0;      // current superstep
};

namespace {

bool env_requests_serial() {
    const char* v = std::getenv("FFTU_SERIAL");
    return v != nullptr && *v != '\0' && std::strcmp(v, "0") != 0;
}

}  // namespace

struct RunState {
    int p = 1;
    bool serial = false;
    bool check_overlaps = true;
    std::vector<RankData> ranks;
    Trace trace;

    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::exception_ptr error;
    int error_rank = 0;

    struct Finalize {
        RunState* state;
        void operator()() noexcept { state->finalize_superstep(); }
    };
    std::optional<std::barrier<Finalize>> barrier;

    // serial scheduler: ranks run one at a time, in rank order per superstep
    std::mutex turn_mutex;
    std::condition_variable turn_cv;
    int cursor = 0;
    std::vector<char> done;
    int active = 0;

    Context make_context(int r) { return Context(this, r); }

    void record_error(int rank, std::exception_ptr e) {
        const std::lock_guard lock(error_mutex);
        if (!error || rank < error_rank) {
            error = std::move(e);
            error_rank = rank;
        }
        abort.store(true);
    }

    void apply_put(PendingPut& put,
                   std::map<std::pair<int, std::string>, std::vector<char>>& claimed) {
        auto& dest = ranks[put.dest];
        const auto it = dest.buffers.find(put.buffer);
        if (it == dest.buffers.end())
            throw ConfigError("put: buffer '" + put.buffer + "' is not registered on rank " +
                              std::to_string(put.dest));
        const std::span<Complex> buf = it->second;
        const auto& w = put.where;
        const std::size_t words = w.words();
        if (words == 0) return;
        std::size_t last = 0;
        for (std::size_t l = 0; l < w.count.size(); ++l)
            last += (w.start[l] + w.count[l] - 1) * w.stride[l];
        if (last >= buf.size())
            throw std::out_of_range("put: destination region ends at slot " +
                                    std::to_string(last) + " in buffer '" + put.buffer +
                                    "' of size " + std::to_string(buf.size()) + " on rank " +
                                    std::to_string(put.dest));
        std::vector<char>* marks = nullptr;
        if (check_overlaps) {
            marks = &claimed[{put.dest, put.buffer}];
            if (marks->size() < buf.size()) marks->resize(buf.size(), 0);
        }
        Coord c(w.count.size(), 0);
        for (std::size_t i = 0; i < words; ++i) {
            std::size_t off = 0;
            for (std::size_t l = 0; l < c.size(); ++l) off += (w.start[l] + c[l]) * w.stride[l];
            if (marks) {
                if ((*marks)[off])
                    throw ConfigError("put: overlapping destination regions at slot " +
                                      std::to_string(off) + " of buffer '" + put.buffer +
                                      "' on rank " + std::to_string(put.dest));
                (*marks)[off] = 1;
            }
            buf[off] = put.payload[i];
            advance_coord(c, w.count);
        }
    }

    // Ends the current superstep: delivers every queued put (source rank
    // order, then issue order), appends the trace record, resets per-rank
    // counters. A superstep in which nothing happened is not recorded.
    // Runs single-threaded: from the barrier completion in parallel mode,
    // under turn_mutex from the last rank of a round in serial mode.
    void finalize_superstep() noexcept {
        try {
            SuperstepRecord rec;
            rec.flops_per_rank.resize(p);
            rec.words_sent_per_rank.resize(p);
            rec.words_received_per_rank.resize(p);
            bool any_comm = false;
            bool any_flops = false;
            for (int r = 0; r < p; ++r) {
                rec.flops_per_rank[r] = ranks[r].flops.value;
                rec.words_sent_per_rank[r] = ranks[r].words_sent;
                any_flops = any_flops || ranks[r].flops.value > 0;
                any_comm = any_comm || !ranks[r].outgoing.empty();
            }

            std::map<std::pair<int, std::string>, std::vector<char>> claimed;
            for (int src = 0; src < p && !abort.load(); ++src) {
                for (auto& put : ranks[src].outgoing) {
                    rec.words_received_per_rank[put.dest] += put.payload.size();
                    try {
                        apply_put(put, claimed);
                    } catch (...) {
                        record_error(src, std::current_exception());
                        break;
                    }
                }
            }

            if (any_comm || any_flops) {
                rec.kind = any_comm ? StepKind::communicate : StepKind::compute;
                rec.sync_charged = any_comm ? 1 : 0;
                for (int r = 0; r < p; ++r) {
                    rec.max_flops = std::max(rec.max_flops, rec.flops_per_rank[r]);
                    rec.max_words_sent = std::max(rec.max_words_sent, rec.words_sent_per_rank[r]);
                    rec.max_words_received =
                        std::max(rec.max_words_received, rec.words_received_per_rank[r]);
                }
                trace.supersteps.push_back(std::move(rec));
            }

            for (int r = 0; r < p; ++r) {
                ranks[r].flops.value = 0;
                ranks[r].words_sent = 0;
                ranks[r].outgoing.clear();
            }
        } catch (...) {
            record_error(0, std::current_exception());
        }
    }

    // -- serial scheduling ---------------------------------------------

    void wait_turn(int r) {
        std::unique_lock lock(turn_mutex);
        turn_cv.wait(lock, [&] { return abort.load() || cursor == r; });
        if (abort.load()) throw AbortRun{};
    }

    // Ends rank r's segment of the current superstep and hands the turn to
    // the next rank still in the run; the last rank of a round finalizes
    // the superstep and restarts the round.
    void end_segment(int r, bool final_segment) {
        {
            const std::lock_guard lock(turn_mutex);
            if (final_segment) {
                done[r] = 1;
                --active;
            }
            int next = -1;
            for (int i = r + 1; i < p; ++i)
                if (!done[i]) {
                    next = i;
                    break;
                }
            if (next == -1) {
                finalize_superstep();
                next = p;  // off the end: nobody, unless someone is still active
                for (int i = 0; i < p; ++i)
                    if (!done[i]) {
                        next = i;
                        break;
                    }
            }
            cursor = next;
        }
        turn_cv.notify_all();
    }

    void notify_abort() {
        { const std::lock_guard lock(turn_mutex); }
        turn_cv.notify_all();
    }
};

namespace {

void worker_parallel(RunState* st, int r, const std::function<void(Context&)>& program) {
    Context ctx = st->make_context(r);
    try {
        program(ctx);
        st->barrier->arrive_and_drop();  // final drain; last one records the tail superstep
    } catch (AbortRun&) {
        st->barrier->arrive_and_drop();
    } catch (...) {
        st->record_error(r, std::current_exception());
        st->barrier->arrive_and_drop();
    }
}

void worker_serial(RunState* st, int r, const std::function<void(Context&)>& program) {
    Context ctx = st->make_context(r);
    try {
        st->wait_turn(r);
        program(ctx);
        st->end_segment(r, true);
    } catch (AbortRun&) {
        // aborted elsewhere; bookkeeping no longer matters
    } catch (...) {
        st->record_error(r, std::current_exception());
        st->notify_abort();
    }
}

}  // namespace

}  // namespace detail

int Context::processors() const { return state_->p; }

FlopCounter& Context::flops() { return state_->ranks[rank_].flops; }

void Context::register_buffer(const std::string& name, std::span<Complex> storage) {
    state_->ranks[rank_].buffers.insert_or_assign(name, storage);
}

void Context::put(int dest_rank, const std::string& buffer, PutDescriptor where,
                  std::vector<Complex> payload) {
    if (dest_rank < 0 || dest_rank >= state_->p)
        throw std::out_of_range("put: destination rank " + std::to_string(dest_rank) +
                                " out of range");
    if (where.start.size() != where.stride.size() || where.start.size() != where.count.size())
        throw ConfigError("put: descriptor start/stride/count ranks differ");
    if (payload.size() != where.words())
        throw ConfigError("put: payload holds " + std::to_string(payload.size()) +
                          " words but the descriptor covers " + std::to_string(where.words()));
    auto& mine = state_->ranks[rank_];
    mine.words_sent += payload.size();
    mine.outgoing.push_back(detail::PendingPut{rank_, dest_rank, buffer, std::move(where),
                                               std::move(payload)});
}

void Context::put(int dest_rank, const std::string& buffer, PutDescriptor where,
                  std::span<const Complex> payload) {
    put(dest_rank, buffer, std::move(where),
        std::vector<Complex>(payload.begin(), payload.end()));
}

void Context::sync() {
    if (state_->serial) {
        state_->end_segment(rank_, false);
        state_->wait_turn(rank_);
    } else {
        state_->barrier->arrive_and_wait();
        if (state_->abort.load()) throw detail::AbortRun{};
    }
}

Trace run_spmd(int processors, const std::function<void(Context&)>& program,
               const ExecOptions& options) {
    if (processors < 1) throw ConfigError("run_spmd: need at least one processor");
    detail::RunState st;
    st.p = processors;
    st.serial = options.mode == ExecOptions::Mode::serial ||
                (options.mode == ExecOptions::Mode::automatic && detail::env_requests_serial());
    st.check_overlaps = options.check_overlaps;
    st.ranks.resize(processors);
    st.trace.processors = processors;
    if (st.serial) {
        st.done.assign(processors, 0);
        st.active = processors;
        st.cursor = 0;
    } else {
        st.barrier.emplace(processors, detail::RunState::Finalize{&st});
    }

    std::vector<std::thread> threads;
    threads.reserve(processors);
    for (int r = 0; r < processors; ++r)
        threads.emplace_back(st.serial ? detail::worker_serial : detail::worker_parallel, &st, r,
                             std::cref(program));
    for (auto& t : threads) t.join();

    if (st.error) std::rethrow_exception(st.error);
    return std::move(st.trace);
}

}  // namespace fftu::bsp
