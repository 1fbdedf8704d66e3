// Acceptance gate: one line per criterion, exit code = number of failures.
//
// Tolerances are pinned here, not derived at runtime:
//   kOracleTol   1e-11  relative l2 against the quadratic oracle
//   kFlopSlack   1.1    measured flops vs the per-rank cost bound

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fftu/engine.hpp"
#include "fftu/fourstep.hpp"
#include "fftu/signal_io.hpp"

using namespace fftu;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleTol = 1e-11;
constexpr double kFlopSlack = 1.1;

struct Outcome {
    enum Status { pass, fail, skip } status = pass;
    std::string detail;
};

Outcome passed(std::string detail = "") { return {Outcome::pass, std::move(detail)}; }
Outcome failed(std::string detail) { return {Outcome::fail, std::move(detail)}; }
Outcome skipped(std::string detail) { return {Outcome::skip, std::move(detail)}; }

std::string fmt(double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(2) << v;
    return s.str();
}

// ---- shared run set ------------------------------------------------------

// every grid with p_l^2 | n_l, cartesian over dimensions
std::vector<std::vector<std::size_t>> legal_grids(const TensorShape& shape) {
    std::vector<std::vector<std::size_t>> per_dim(shape.rank());
    for (std::size_t l = 0; l < shape.rank(); ++l)
        for (std::size_t q = 1; q * q <= shape.extent(l); ++q)
            if (shape.extent(l) % (q * q) == 0) per_dim[l].push_back(q);

    std::vector<std::vector<std::size_t>> grids;
    std::vector<std::size_t> pick(shape.rank(), 0);
    for (;;) {
        std::vector<std::size_t> g(shape.rank());
        for (std::size_t l = 0; l < shape.rank(); ++l) g[l] = per_dim[l][pick[l]];
        grids.push_back(std::move(g));
        std::size_t l = shape.rank();
        while (l-- > 0) {
            if (++pick[l] < per_dim[l].size()) break;
            pick[l] = 0;
            if (l == 0) return grids;
        }
    }
}

const std::vector<std::vector<std::size_t>>& acceptance_shapes() {
    static const std::vector<std::vector<std::size_t>> shapes = {
        {16}, {64}, {8, 8}, {16, 4}, {8, 8, 8}, {4, 4, 4, 4}, {8, 4, 2}, {4, 4, 2, 2, 2},
    };
    return shapes;
}

struct RunRecord {
    TensorShape shape;
    ProcGrid grid;
    double residual = 0.0;        // collect() vs oracle
    double placement_residual = 0.0;  // per-block audit vs oracle, no gather
    bool map_unchanged = false;
    std::size_t twiddle_entries = 0;
    bsp::Trace trace;
};

// one forward transform per (shape, grid); the oracle is computed once per
// shape and shared
std::vector<RunRecord> forward_run_set() {
    std::vector<RunRecord> runs;
    std::size_t shape_index = 0;
    for (const auto& dims : acceptance_shapes()) {
        TensorShape shape(dims);
        const auto input = generate_input(shape, 1000 + shape_index++);
        const auto oracle = dft_naive_md(input);
        const auto gstrides = row_major_strides(shape.dims());
        double oracle_norm = 0.0;
        for (const auto& v : oracle.data) oracle_norm += std::norm(v);
        oracle_norm = std::sqrt(oracle_norm);

        for (const auto& gdims : legal_grids(shape)) {
            RunRecord rec{shape, ProcGrid(gdims)};
            FftuPlan plan(shape, rec.grid, Direction::forward);
            rec.twiddle_entries = plan.twiddle_entries_per_rank();

            DistributedSignal sig(plan.map(), input);
            const CyclicMap before = sig.map;
            rec.trace = fftu_transform(sig, plan);
            rec.map_unchanged = (sig.map == before);

            rec.residual = relative_l2(sig.collect().data, oracle.data);

            // audit every block element at its cyclic global position
            double diff2 = 0.0;
            for (std::size_t r = 0; r < sig.map.processors(); ++r) {
                const auto ext = sig.map.local_extents(r);
                Coord local(ext.size(), 0);
                for (std::size_t i = 0; i < sig.blocks[r].size(); ++i) {
                    const auto g = sig.map.to_global(r, local);
                    diff2 += std::norm(sig.blocks[r][i] - oracle.data[linearize(g, gstrides)]);
                    advance_coord(local, ext);
                }
            }
            rec.placement_residual =
                oracle_norm > 0 ? std::sqrt(diff2) / oracle_norm : std::sqrt(diff2);

            runs.push_back(std::move(rec));
        }
    }
    return runs;
}

std::string run_name(const RunRecord& rec) {
    std::ostringstream s;
    for (std::size_t l = 0; l < rec.shape.rank(); ++l)
        s << (l ? "x" : "") << rec.shape.extent(l);
    s << "/";
    for (std::size_t l = 0; l < rec.grid.rank(); ++l)
        s << (l ? "x" : "") << rec.grid.extent(l);
    return s.str();
}

// ---- criteria ------------------------------------------------------------

Outcome criterion_forward_oracle(const std::vector<RunRecord>& runs) {
    double worst = 0.0;
    for (const auto& rec : runs) {
        if (rec.residual > kOracleTol)
            return failed(run_name(rec) + " residual " + fmt(rec.residual));
        worst = std::max(worst, rec.residual);
    }
    return passed(std::to_string(runs.size()) + " runs, max residual " + fmt(worst));
}

Outcome criterion_four_step() {
    const auto largest_prime_factor = [](std::size_t v) {
        std::size_t m = 1;
        for (std::size_t f = 2; f * f <= v; ++f)
            while (v % f == 0) {
                m = std::max(m, f);
                v /= f;
            }
        return v > 1 ? std::max(m, v) : m;
    };

    std::size_t cases = 0, outside_domain = 0;
    double worst = 0.0;
    for (std::size_t n = 1; n <= 256; ++n) {
        if (largest_prime_factor(n) > 64) {
            // the kernel's documented domain ends at prime factor 64
            ++outside_domain;
            continue;
        }
        const auto x = generate_input(TensorShape({n}), 2000 + n);
        const auto ref = dft_naive(x.data);
        for (std::size_t p = 1; p * p <= n; ++p) {
            if (n % (p * p) != 0) continue;
            const auto y = four_step(x.data, SplitPlan(n, p));
            const double res = relative_l2(y, ref);
            if (res > kOracleTol)
                return failed("n = " + std::to_string(n) + ", p = " + std::to_string(p) +
                              ", residual " + fmt(res));
            worst = std::max(worst, res);
            ++cases;
        }
    }
    return passed(std::to_string(cases) + " splits, " + std::to_string(outside_domain) +
                  " lengths beyond the radix limit excluded, max residual " + fmt(worst));
}

Outcome criterion_placement(const std::vector<RunRecord>& runs) {
    double worst = 0.0;
    for (const auto& rec : runs) {
        if (!rec.map_unchanged) return failed(run_name(rec) + " redistributed its map");
        if (rec.placement_residual > kOracleTol)
            return failed(run_name(rec) + " placement residual " +
                          fmt(rec.placement_residual));
        worst = std::max(worst, rec.placement_residual);
    }
    return passed("per-rank audit, max residual " + fmt(worst));
}

Outcome criterion_single_superstep(const std::vector<RunRecord>& runs) {
    for (const auto& rec : runs) {
        const auto comm = rec.trace.communicate_count();
        const auto syncs = rec.trace.syncs_charged();
        if (rec.grid.processors() == 1) {
            if (comm != 0 || syncs != 0)
                return failed(run_name(rec) + " has communication with p = 1");
        } else if (comm != 1 || syncs != 1) {
            return failed(run_name(rec) + " has " + std::to_string(comm) +
                          " communication supersteps, " + std::to_string(syncs) +
                          " charged syncs");
        }
    }
    return passed("every p > 1 run: exactly 1 exchange, 1 charged sync");
}

Outcome criterion_balanced_words(const std::vector<RunRecord>& runs) {
    for (const auto& rec : runs) {
        const std::size_t p = rec.grid.processors();
        if (p == 1) continue;
        const std::uint64_t expect = rec.shape.total() / p;
        for (const auto& step : rec.trace.supersteps) {
            for (std::size_t r = 0; r < p; ++r) {
                const auto sent = step.words_sent_per_rank[r];
                const auto received = step.words_received_per_rank[r];
                if (step.kind == bsp::StepKind::communicate) {
                    if (sent != expect || received != expect)
                        return failed(run_name(rec) + " rank " + std::to_string(r) +
                                      " moved " + std::to_string(sent) + "/" +
                                      std::to_string(received) + " words, expected " +
                                      std::to_string(expect));
                } else if (sent != 0 || received != 0) {
                    return failed(run_name(rec) + " moved words in a compute superstep");
                }
            }
        }
    }
    return passed("sent = received = N/p on every rank");
}

Outcome criterion_flop_bound() {
    TensorShape shape({8, 8, 8});
    const auto input = generate_input(shape, 3000);
    const double n = static_cast<double>(shape.total());
    double worst_ratio = 0.0;
    for (std::size_t a : {1, 2})
        for (std::size_t b : {1, 2})
            for (std::size_t c : {1, 2}) {
                ProcGrid grid({a, b, c});
                const double p = static_cast<double>(grid.processors());
                const double bound = 5.0 * (n / p) * std::log2(n) + 12.0 * (n / p);

                FftuPlan plan(shape, grid, Direction::forward);
                DistributedSignal sig(plan.map(), input);
                const auto trace = fftu_transform(sig, plan);
                for (std::size_t r = 0; r < grid.processors(); ++r) {
                    const double ratio = static_cast<double>(trace.total_flops(r)) / bound;
                    worst_ratio = std::max(worst_ratio, ratio);
                    if (ratio > kFlopSlack) {
                        std::ostringstream s;
                        s << "grid " << a << "x" << b << "x" << c << " rank " << r << ": "
                          << trace.total_flops(r) << " flops vs bound " << bound;
                        return failed(s.str());
                    }
                }
            }
    return passed("8 grids on 8x8x8, worst ratio " + fmt(worst_ratio) + " of bound");
}

Outcome criterion_roundtrip() {
    double worst = 0.0;
    std::size_t count = 0;
    std::size_t shape_index = 0;
    for (const auto& dims : acceptance_shapes()) {
        TensorShape shape(dims);
        const auto input = generate_input(shape, 4000 + shape_index++);
        for (const auto& gdims : legal_grids(shape)) {
            CyclicMap map(shape, ProcGrid(gdims));
            DistributedSignal sig(map, input);
            fftu_forward(sig);
            if (!(sig.map == map)) return failed("map changed between the two calls");
            fftu_inverse(sig);
            const double res = relative_l2(sig.collect().data, input.data);
            if (res > kOracleTol) {
                RunRecord rec{shape, ProcGrid(gdims)};
                return failed(run_name(rec) + " roundtrip residual " + fmt(res));
            }
            worst = std::max(worst, res);
            ++count;
        }
    }
    return passed(std::to_string(count) + " runs, max residual " + fmt(worst));
}

Outcome criterion_capacity() {
    const auto check = [](const std::vector<std::size_t>& dims, std::size_t want) {
        return max_processors(TensorShape(dims), DistStrategy::cyclic()) == want;
    };
    if (!check({1024, 1024, 1024}, 32768)) return failed("1024x1024x1024 capacity wrong");
    if (!check({16777216, 64}, 32768)) return failed("16777216x64 capacity wrong");

    for (const auto& dims : {std::vector<std::size_t>{4, 4}, std::vector<std::size_t>{16, 16},
                             std::vector<std::size_t>{256}, std::vector<std::size_t>{36, 49}}) {
        TensorShape shape(dims);
        const auto p = max_processors(shape, DistStrategy::cyclic());
        if (p * p != shape.total()) {
            std::ostringstream s;
            s << "square shape capacity " << p << " is not sqrt(N = " << shape.total() << ")";
            return failed(s.str());
        }
    }
    return passed("32768 on both reference shapes, sqrt(N) on square shapes");
}

Outcome criterion_twiddle_memory(const std::vector<RunRecord>& runs) {
    for (const auto& rec : runs) {
        std::size_t want = 0;
        for (std::size_t l = 0; l < rec.shape.rank(); ++l)
            want += rec.shape.extent(l) / rec.grid.extent(l);
        if (rec.twiddle_entries != want)
            return failed(run_name(rec) + " holds " + std::to_string(rec.twiddle_entries) +
                          " twiddle entries, expected " + std::to_string(want));
    }
    return passed("sum of n_l/p_l entries per rank on every plan");
}

// ---- criterion 10: the installed binary, spawned twice per mode ----------

std::string find_cli() {
    if (const char* env = std::getenv("FFTU_CLI_BIN")) return env;
    for (const char* guess : {"./fftu", "../fftu", "./build/fftu"}) {
        std::error_code ec;
        if (fs::exists(guess, ec)) return guess;
    }
    return "";
}

int spawn(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

Outcome criterion_cli_determinism() {
    const std::string bin = find_cli();
    if (bin.empty()) return skipped("fftu binary not found; set FFTU_CLI_BIN");

    const auto dir = fs::temp_directory_path() / "fftu_acceptance";
    fs::create_directories(dir);
    const std::string base = "\"" + bin + "\" --shape 16x8 --grid 2x2 --seed 5 --output ";

    const auto p1 = dir / "par1.fftu", p2 = dir / "par2.fftu";
    const auto s1 = dir / "ser1.fftu", s2 = dir / "ser2.fftu";
    const std::vector<std::pair<fs::path, std::string>> invocations = {
        {p1, ""}, {p2, ""}, {s1, " --serial"}, {s2, " --serial"}};
    for (const auto& [path, extra] : invocations) {
        if (spawn(base + path.string() + extra + " > /dev/null 2>&1") != 0)
            return failed("run writing " + path.filename().string() + " exited nonzero");
    }

    const auto par = slurp(p1);
    if (par.empty()) return failed("no output written");
    if (slurp(p2) != par) return failed("parallel outputs differ between identical runs");
    const auto ser = slurp(s1);
    if (slurp(s2) != ser) return failed("serial outputs differ between identical runs");
    if (ser != par) return failed("serial and parallel outputs differ");
    return passed("bit-identical files per mode, and across modes");
}

// ---- criterion 11: parallel speedup, honest about the machine ------------

Outcome criterion_speedup() {
    TensorShape shape({256, 256, 16});
    const auto input = generate_input(shape, 5000);

    bsp::ExecOptions opts;
    opts.check_overlaps = false;  // timing path, matches the CLI

    const auto time_grid = [&](const std::vector<std::size_t>& gdims) {
        FftuPlan plan(shape, ProcGrid(gdims), Direction::forward);
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < 3; ++rep) {
            DistributedSignal sig(plan.map(), input);
            const auto t0 = std::chrono::steady_clock::now();
            fftu_transform(sig, plan, opts);
            const auto t1 = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        }
        return best;
    };

    const double t1 = time_grid({1, 1, 1});
    const double t4 = time_grid({2, 2, 1});
    std::ostringstream times;
    times << "p=1: " << fmt(t1) << "s, p=4: " << fmt(t4) << "s";

    const unsigned cores = std::thread::hardware_concurrency();
    if (cores < 4)
        return skipped("needs >= 4 hardware threads, this machine reports " +
                       std::to_string(cores) + "; observed " + times.str());
    if (t4 >= t1) return failed("no speedup: " + times.str());
    return passed(times.str() + ", speedup " + fmt(t1 / t4) + "x");
}

}  // namespace

int main() {
    const auto runs = forward_run_set();

    struct Entry {
        const char* title;
        Outcome outcome;
    };
    std::vector<Entry> entries;
    entries.push_back({"forward transform matches the quadratic oracle on every legal grid",
                       criterion_forward_oracle(runs)});
    entries.push_back({"sequential four-step matches the oracle for every admissible split",
                       criterion_four_step()});
    entries.push_back(
        {"output occupies the input distribution, audited rank by rank",
         criterion_placement(runs)});
    entries.push_back({"one communication superstep and one charged sync per transform",
                       criterion_single_superstep(runs)});
    entries.push_back({"every rank sends and receives exactly N/p words",
                       criterion_balanced_words(runs)});
    entries.push_back({"measured flops stay within 1.1x of the per-rank cost bound",
                       criterion_flop_bound()});
    entries.push_back({"inverse returns the input in place, same distribution",
                       criterion_roundtrip()});
    entries.push_back({"cyclic processor capacity matches the closed form",
                       criterion_capacity()});
    entries.push_back({"twiddle storage is sum of n_l/p_l entries per rank",
                       criterion_twiddle_memory(runs)});
    entries.push_back({"command line runs are bit-deterministic in both modes",
                       criterion_cli_determinism()});
    entries.push_back({"four ranks beat one rank on a million-point transform",
                       criterion_speedup()});

    int failures = 0, skips = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const char* tag = e.outcome.status == Outcome::pass   ? "PASS"
                          : e.outcome.status == Outcome::fail ? "FAIL"
                                                              : "SKIP";
        failures += e.outcome.status == Outcome::fail;
        skips += e.outcome.status == Outcome::skip;
        std::cout << "[" << std::setw(2) << (i + 1) << "] " << tag << "  " << e.title;
        if (!e.outcome.detail.empty()) std::cout << " (" << e.outcome.detail << ")";
        std::cout << "\n";
    }
    std::cout << entries.size() - failures - skips << " passed, " << failures << " failed, "
              << skips << " skipped\n";
    return failures;
}
