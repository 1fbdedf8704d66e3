// fftu: cyclic-distributed multidimensional FFT with one all-to-all exchange.

#include <CLI11.hpp>
#include <json.hpp>

#include "fftu/engine.hpp"
#include "fftu/signal_io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace fftu;
using nlohmann::json;

struct RunConfig {
    std::vector<std::size_t> shape_dims;
    std::vector<std::size_t> grid_dims;
    bool inverse = false;
    bool roundtrip = false;
    bool verify = false;
    bool serial = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t iterations = 1;
    std::size_t oracle_cap = 65536;
    std::string input, output, trace_path, baseline;
    std::string report_format = "text";
};

std::vector<std::size_t> parse_extents(const std::string& text, const char* what) {
    std::vector<std::size_t> dims;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, 'x')) {
        if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError(std::string(what) + ": expected AxBxC with positive integers, got '" +
                              text + "'");
        const unsigned long long v = std::stoull(token);
        if (v == 0) throw ConfigError(std::string(what) + ": extents must be positive");
        dims.push_back(static_cast<std::size_t>(v));
    }
    if (dims.empty() || text.back() == 'x')
        throw ConfigError(std::string(what) + ": expected AxBxC with positive integers, got '" +
                          text + "'");
    return dims;
}

std::string extents_to_string(std::span<const std::size_t> dims) {
    std::string s;
    for (std::size_t l = 0; l < dims.size(); ++l) {
        if (l) s += 'x';
        s += std::to_string(dims[l]);
    }
    return s;
}

TensorSignal naive_reference(const TensorSignal& input, Direction dir) {
    if (dir == Direction::forward) return dft_naive_md(input);
    TensorSignal conj_in = input;
    for (auto& v : conj_in.data) v = std::conj(v);
    TensorSignal out = dft_naive_md(conj_in);
    const double scale = 1.0 / static_cast<double>(input.shape.total());
    for (auto& v : out.data) v = std::conj(v) * scale;
    return out;
}

void append_trace(bsp::Trace& into, bsp::Trace&& tail) {
    for (auto& s : tail.supersteps) into.supersteps.push_back(std::move(s));
}

struct VerifyResult {
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::optional<std::size_t> first_mismatch;
};

VerifyResult verify_output(const TensorSignal& output, const TensorSignal& reference) {
    VerifyResult v;
    v.residual = relative_l2(output.data, reference.data);
    v.tolerance = verification_tolerance(output.shape.total());
    v.passed = v.residual <= v.tolerance;
    if (!v.passed) {
        double ref_norm = 0.0;
        for (const auto& r : reference.data) ref_norm += std::norm(r);
        ref_norm = std::sqrt(ref_norm);
        const double root_n = std::sqrt(static_cast<double>(output.shape.total()));
        // if every per-element error were below this, the L2 residual could
        // not have exceeded the tolerance
        const double threshold = v.tolerance * (ref_norm > 0.0 ? ref_norm : 1.0) / root_n;
        for (std::size_t i = 0; i < output.data.size(); ++i) {
            if (std::abs(output.data[i] - reference.data[i]) >= threshold) {
                v.first_mismatch = i;
                break;
            }
        }
    }
    return v;
}

int run(const RunConfig& cfg) {
    // input signal
    std::optional<TensorSignal> input;
    if (!cfg.input.empty()) {
        input = read_signal(cfg.input);
        if (!cfg.shape_dims.empty() && cfg.shape_dims != input->shape.dims())
            throw ConfigError("--shape " + extents_to_string(cfg.shape_dims) +
                              " does not match the input file's shape " +
                              extents_to_string(input->shape.dims()));
    } else {
        if (cfg.shape_dims.empty()) throw ConfigError("need --shape or --input");
        input = generate_input(TensorShape(cfg.shape_dims), cfg.seed);
    }
    const TensorShape shape = input->shape;
    const std::size_t total = shape.total();

    if (cfg.inverse && cfg.roundtrip)
        throw ConfigError("--inverse and --roundtrip are mutually exclusive");
    if (cfg.iterations < 1) throw ConfigError("--iterations must be at least 1");

    std::vector<std::size_t> grid_dims = cfg.grid_dims;
    if (grid_dims.empty()) grid_dims.assign(shape.rank(), 1);
    const ProcGrid grid(grid_dims);

    if (cfg.verify && total > cfg.oracle_cap) {
        std::cerr << "error: --verify uses the quadratic oracle and is capped at N = "
                  << cfg.oracle_cap << "; this run has N = " << total
                  << " (raise --oracle-cap to override)\n";
        return 3;
    }

    bsp::ExecOptions opts;
    opts.mode = cfg.serial ? bsp::ExecOptions::Mode::serial : bsp::ExecOptions::Mode::automatic;
    opts.check_overlaps = false;  // production path; the test suites run with checks on

    const std::string mode =
        cfg.roundtrip ? "roundtrip" : (cfg.inverse ? "inverse" : "forward");

    std::optional<FftuPlan> forward_plan, inverse_plan;
    if (mode != "inverse") forward_plan.emplace(shape, grid, Direction::forward);
    if (mode != "forward") inverse_plan.emplace(shape, grid, Direction::inverse);
    const CyclicMap& map = forward_plan ? forward_plan->map() : inverse_plan->map();

    const auto apply = [&](DistributedSignal& work) {
        bsp::Trace trace;
        if (forward_plan) trace = fftu_transform(work, *forward_plan, opts);
        if (inverse_plan) {
            auto t = fftu_transform(work, *inverse_plan, opts);
            if (forward_plan)
                append_trace(trace, std::move(t));
            else
                trace = std::move(t);
        }
        return trace;
    };

    // reference run: produces the output payload and the trace
    DistributedSignal reference(map, *input);
    const bsp::Trace trace = apply(reference);
    const TensorSignal output = reference.collect();

    std::optional<VerifyResult> verification;
    if (cfg.verify) {
        TensorSignal oracle = cfg.roundtrip
                                  ? *input
                                  : naive_reference(*input, cfg.inverse ? Direction::inverse
                                                                        : Direction::forward);
        verification = verify_output(output, oracle);
    }

    // timed region: cfg.iterations transforms back to back on one payload
    DistributedSignal timed(map, *input);
    std::vector<double> iteration_seconds(cfg.iterations);
    const auto clock_start = std::chrono::steady_clock::now();
    auto last = clock_start;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        apply(timed);
        const auto now = std::chrono::steady_clock::now();
        iteration_seconds[it] = std::chrono::duration<double>(now - last).count();
        last = now;
    }
    const double total_seconds =
        std::chrono::duration<double>(last - clock_start).count();
    const double seconds_per_iteration = total_seconds / static_cast<double>(cfg.iterations);

    const double transforms_per_iteration = cfg.roundtrip ? 2.0 : 1.0;
    const double model_flops = 5.0 * static_cast<double>(total) *
                               std::log2(static_cast<double>(total)) * transforms_per_iteration;
    const double gflops =
        seconds_per_iteration > 0.0 ? model_flops / seconds_per_iteration / 1e9 : 0.0;

    if (!cfg.output.empty()) write_signal(cfg.output, output);
    if (!cfg.trace_path.empty()) {
        std::ofstream out(cfg.trace_path);
        if (!out) throw ConfigError("cannot open trace file '" + cfg.trace_path + "'");
        out << bsp::trace_to_json(trace) << "\n";
    }

    std::optional<json> baseline;
    if (!cfg.baseline.empty()) {
        std::ifstream in(cfg.baseline);
        if (!in) throw ConfigError("cannot open baseline report '" + cfg.baseline + "'");
        json prior = json::parse(in, nullptr, false);
        if (prior.is_discarded() || !prior.contains("timing") ||
            !prior["timing"].contains("seconds_per_iteration"))
            throw ConfigError("baseline report '" + cfg.baseline +
                              "' lacks timing.seconds_per_iteration");
        const double base = prior["timing"]["seconds_per_iteration"].get<double>();
        baseline = json{{"path", cfg.baseline},
                        {"seconds_per_iteration", base},
                        {"speedup", seconds_per_iteration > 0.0 ? base / seconds_per_iteration
                                                                : 0.0}};
    }

    std::uint64_t max_flops_per_rank = 0;
    for (int r = 0; r < trace.processors; ++r)
        max_flops_per_rank =
            std::max(max_flops_per_rank, trace.total_flops(static_cast<std::size_t>(r)));
    std::uint64_t max_sent = 0, max_received = 0;
    for (const auto& s : trace.supersteps) {
        max_sent = std::max(max_sent, s.max_words_sent);
        max_received = std::max(max_received, s.max_words_received);
    }

    json report{
        {"report", "fftu-run"},
        {"version", 1},
        {"shape", shape.dims()},
        {"grid", grid.dims()},
        {"processors", grid.processors()},
        {"mode", mode},
        {"serial", cfg.serial},
        {"seed", cfg.input.empty() ? json(cfg.seed) : json(nullptr)},
        {"input_path", cfg.input.empty() ? json(nullptr) : json(cfg.input)},
        {"output_path", cfg.output.empty() ? json(nullptr) : json(cfg.output)},
        {"iterations", cfg.iterations},
        {"timing",
         {{"total_seconds", total_seconds},
          {"seconds_per_iteration", seconds_per_iteration},
          {"iteration_seconds", iteration_seconds}}},
        {"performance", {{"model_flops_per_iteration", model_flops}, {"gflops", gflops}}},
        {"trace",
         {{"supersteps", trace.supersteps.size()},
          {"communication_supersteps", trace.communicate_count()},
          {"syncs_charged", trace.syncs_charged()},
          {"max_words_sent", max_sent},
          {"max_words_received", max_received},
          {"max_flops_per_rank", max_flops_per_rank}}},
        {"baseline", baseline ? *baseline : json(nullptr)},
    };
    json v{{"requested", cfg.verify}};
    if (verification) {
        v["residual"] = verification->residual;
        v["tolerance"] = verification->tolerance;
        v["passed"] = verification->passed;
        v["first_mismatch_index"] = verification->first_mismatch
                                        ? json(*verification->first_mismatch)
                                        : json(nullptr);
    }
    report["verification"] = std::move(v);

    if (cfg.report_format == "json") {
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << "shape             " << extents_to_string(shape.dims()) << " (N = " << total
                  << ")\n";
        std::cout << "grid              " << extents_to_string(grid.dims())
                  << " (p = " << grid.processors() << ")\n";
        std::cout << "mode              " << mode << (cfg.serial ? ", serial" : "") << "\n";
        std::cout << "iterations        " << cfg.iterations << "\n";
        std::cout << "time/iteration    " << seconds_per_iteration << " s\n";
        std::cout << "model gflops      " << gflops << "\n";
        std::cout << "supersteps        " << trace.supersteps.size() << " (communication "
                  << trace.communicate_count() << ", syncs charged " << trace.syncs_charged()
                  << ")\n";
        std::cout << "max words sent    " << max_sent << "\n";
        std::cout << "max words recv    " << max_received << "\n";
        std::cout << "max flops/rank    " << max_flops_per_rank << "\n";
        if (verification) {
            std::cout << "verification      " << (verification->passed ? "passed" : "FAILED")
                      << " (residual " << verification->residual << ", tolerance "
                      << verification->tolerance << ")\n";
            if (verification->first_mismatch) {
                const Coord c = delinearize(*verification->first_mismatch, shape.dims());
                std::cout << "first mismatch    global index " << *verification->first_mismatch
                          << " = (" << extents_to_string(c) << ")\n";
            }
        }
        if (baseline)
            std::cout << "speedup           " << (*baseline)["speedup"].get<double>() << "x vs "
                      << cfg.baseline << "\n";
        if (!cfg.output.empty()) std::cout << "output            " << cfg.output << "\n";
        if (!cfg.trace_path.empty()) std::cout << "trace             " << cfg.trace_path << "\n";
    }

    if (verification && !verification->passed) {
        std::cerr << "error: verification failed (residual " << verification->residual << " > "
                  << verification->tolerance << ")\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyclic-distributed multidimensional FFT with one all-to-all exchange"};
    RunConfig cfg;
    std::string shape_arg, grid_arg;

    app.add_option("--shape", shape_arg, "signal extents, e.g. 8x8x8");
    app.add_option("--grid", grid_arg, "processor grid, e.g. 2x2x2 (default: all ones)");
    app.add_flag("--inverse", cfg.inverse, "apply the inverse transform");
    app.add_flag("--roundtrip", cfg.roundtrip, "apply forward then inverse");
    app.add_option("--iterations", cfg.iterations, "transforms in the timed region");
    app.add_option("--seed", cfg.seed, "seed for the generated input signal");
    app.add_flag("--verify", cfg.verify, "check the output against the quadratic oracle");
    app.add_option("--oracle-cap", cfg.oracle_cap, "largest N --verify will accept");
    app.add_option("--input", cfg.input, "read the input signal from this file");
    app.add_option("--output", cfg.output, "write the transformed signal to this file");
    app.add_option("--trace", cfg.trace_path, "write the superstep trace (JSON) to this file");
    app.add_option("--baseline", cfg.baseline, "prior JSON report to compute speedup against");
    app.add_option("--report", cfg.report_format, "report format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--serial", cfg.serial, "run ranks round-robin on one thread at a time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // fold CLI11's many parse-error codes into the documented usage-error code
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!shape_arg.empty()) cfg.shape_dims = parse_extents(shape_arg, "--shape");
        if (!grid_arg.empty()) cfg.grid_dims = parse_extents(grid_arg, "--grid");
        return run(cfg);
    } catch (const fftu::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fftu::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
