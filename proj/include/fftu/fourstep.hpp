#pragma once

#include "fftu/kernel.hpp"

#include <functional>

namespace fftu {

/// Factorization n = p * (n/p) with p^2 | n, the shape of the four-step
/// split: p transforms of length n/p, a twiddle, a transpose, then n/p
/// transforms of length p.
struct SplitPlan {
    SplitPlan(std::size_t n, std::size_t p);

    std::size_t n;
    std::size_t p;
};

/// Sequential four-step transform:
///   step 0  z^(s)      = F_{n/p} (x(s : p : n)), in the decimated slots
///   step 1  z^(s)_k   *= omega_n^(k s)
///   step 2  y[s*(n/p) + k] = z^(s)_k (transpose into strided storage)
///   step 3  F_p on y(k : n/p : n) for every k
/// With p = 1, steps 1-3 degenerate and the result is exactly fft_1d.
std::vector<Complex> four_step(std::span<const Complex> x, const SplitPlan& plan);

/// Same arithmetic, one auxiliary length-n buffer used only for the step-2
/// permutation (none at all when p = 1).
void four_step_inplace(std::span<Complex> x, const SplitPlan& plan);

/// Observer receives the full working buffer after each step (0..3), so the
/// intermediate states can be checked against their definitions.
using StepObserver = std::function<void(int step, std::span<const Complex>)>;
std::vector<Complex> four_step_observed(std::span<const Complex> x, const SplitPlan& plan,
                                        const StepObserver& observer);

}  // namespace fftu
