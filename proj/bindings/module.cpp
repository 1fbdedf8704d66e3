#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fftu/engine.hpp"
#include "fftu/fourstep.hpp"
#include "fftu/signal_io.hpp"

#include <cstring>

namespace py = pybind11;
using namespace fftu;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

TensorSignal signal_from_array(const ComplexArray& a) {
    if (a.ndim() < 1) throw ConfigError("expected an array with at least one dimension");
    std::vector<std::size_t> dims(static_cast<std::size_t>(a.ndim()));
    for (py::ssize_t l = 0; l < a.ndim(); ++l)
        dims[static_cast<std::size_t>(l)] = static_cast<std::size_t>(a.shape(l));
    TensorSignal s{TensorShape(std::move(dims))};
    std::memcpy(s.data.data(), a.data(), sizeof(Complex) * s.data.size());
    return s;
}

py::array signal_to_array(const TensorSignal& s) {
    std::vector<py::ssize_t> dims(s.shape.rank());
    for (std::size_t l = 0; l < s.shape.rank(); ++l)
        dims[l] = static_cast<py::ssize_t>(s.shape.extent(l));
    py::array_t<Complex> a(dims);
    std::memcpy(a.mutable_data(), s.data.data(), sizeof(Complex) * s.data.size());
    return a;
}

ProcGrid grid_for(const TensorShape& shape, const std::optional<std::vector<std::size_t>>& grid) {
    if (grid) return ProcGrid(*grid);
    return ProcGrid(std::vector<std::size_t>(shape.rank(), 1));
}

bsp::ExecOptions options_for(bool serial) {
    bsp::ExecOptions opts;
    opts.mode = serial ? bsp::ExecOptions::Mode::serial : bsp::ExecOptions::Mode::automatic;
    return opts;
}

py::list trace_to_pylist(const bsp::Trace& trace) {
    py::list steps;
    for (const auto& s : trace.supersteps) {
        py::dict d;
        d["kind"] = s.kind == bsp::StepKind::communicate ? "communicate" : "compute";
        d["max_flops"] = s.max_flops;
        d["max_words_sent"] = s.max_words_sent;
        d["max_words_received"] = s.max_words_received;
        d["sync_charged"] = s.sync_charged;
        d["flops_per_rank"] = s.flops_per_rank;
        d["words_sent_per_rank"] = s.words_sent_per_rank;
        d["words_received_per_rank"] = s.words_received_per_rank;
        steps.append(std::move(d));
    }
    return steps;
}

std::pair<TensorSignal, bsp::Trace> run_transform(const ComplexArray& a,
                                                  const std::optional<std::vector<std::size_t>>& grid,
                                                  bool inverse, bool serial) {
    TensorSignal x = signal_from_array(a);
    const ProcGrid g = grid_for(x.shape, grid);
    const FftuPlan plan(x.shape, g, inverse ? Direction::inverse : Direction::forward);
    DistributedSignal dist(plan.map(), x);
    bsp::Trace trace;
    {
        py::gil_scoped_release release;
        trace = fftu_transform(dist, plan, options_for(serial));
    }
    return {dist.collect(), std::move(trace)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cyclic-distributed multidimensional FFT with one all-to-all exchange";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "FftuConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FftuFormatError", PyExc_ValueError);

    m.def(
        "fft",
        [](const ComplexArray& a, const std::optional<std::vector<std::size_t>>& grid,
           bool inverse, bool serial) {
            return signal_to_array(run_transform(a, grid, inverse, serial).first);
        },
        py::arg("x"), py::arg("grid") = std::nullopt, py::arg("inverse") = false,
        py::arg("serial") = false,
        "Distributed FFT over a cyclic processor grid; returns the transformed array.");

    m.def(
        "fft_with_trace",
        [](const ComplexArray& a, const std::optional<std::vector<std::size_t>>& grid,
           bool inverse, bool serial) {
            auto [signal, trace] = run_transform(a, grid, inverse, serial);
            return py::make_tuple(signal_to_array(signal), trace_to_pylist(trace));
        },
        py::arg("x"), py::arg("grid") = std::nullopt, py::arg("inverse") = false,
        py::arg("serial") = false,
        "Like fft(), but also returns the superstep trace as a list of dicts.");

    m.def(
        "dft_naive",
        [](const ComplexArray& a) { return signal_to_array(dft_naive_md(signal_from_array(a))); },
        py::arg("x"), "Quadratic reference transform (oracle).");

    m.def(
        "four_step",
        [](const std::vector<Complex>& x, std::size_t p) {
            return four_step(x, SplitPlan(x.size(), p));
        },
        py::arg("x"), py::arg("p"), "Sequential four-step FFT with split p (p^2 must divide n).");

    m.def(
        "max_processors",
        [](const std::vector<std::size_t>& shape, const std::string& strategy, std::size_t dim,
           std::size_t r) {
            DistStrategy s;
            if (strategy == "cyclic")
                s = DistStrategy::cyclic();
            else if (strategy == "slab")
                s = DistStrategy::slab(dim);
            else if (strategy == "pencil")
                s = DistStrategy::pencil();
            else if (strategy == "rdim")
                s = DistStrategy::rdim(r);
            else
                throw ConfigError("unknown strategy '" + strategy +
                                  "' (expected cyclic, slab, pencil, or rdim)");
            return max_processors(TensorShape(shape), s);
        },
        py::arg("shape"), py::arg("strategy") = "cyclic", py::arg("dim") = 0, py::arg("r") = 0,
        "Largest processor count a distribution strategy admits for a shape.");

    m.def(
        "generate_input",
        [](const std::vector<std::size_t>& shape, std::uint64_t seed) {
            return signal_to_array(generate_input(TensorShape(shape), seed));
        },
        py::arg("shape"), py::arg("seed"),
        "Deterministic test signal, components uniform on [-1, 1).");

    m.def(
        "read_signal",
        [](const std::string& path) { return signal_to_array(read_signal(path)); },
        py::arg("path"), "Read a binary signal file.");

    m.def(
        "write_signal",
        [](const std::string& path, const ComplexArray& a) {
            write_signal(path, signal_from_array(a));
        },
        py::arg("path"), py::arg("x"), "Write a binary signal file.");
}
