#include "fftu/fourstep.hpp"

namespace fftu {

SplitPlan::SplitPlan(std::size_t n_, std::size_t p_) : n(n_), p(p_) {
    if (n == 0) throw ConfigError("four-step: length must be positive");
    if (p == 0) throw ConfigError("four-step: split must be positive");
    if (n % (p * p) != 0)
        throw ConfigError("four-step: p^2 = " + std::to_string(p * p) + " does not divide n = " +
                          std::to_string(n));
}

namespace {

// Steps 0-1 in place: decimated transforms, then the twiddle.
void transform_and_twiddle(std::span<Complex> z, const SplitPlan& plan) {
    const std::size_t m = plan.n / plan.p;
    for (std::size_t s = 0; s < plan.p; ++s)
        fft_strided(z, s, plan.p, m, Direction::forward);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t s = 0; s < plan.p; ++s)
            z[k * plan.p + s] *= omega(plan.n, static_cast<std::int64_t>(k * s));
}

void strided_final(std::span<Complex> y, const SplitPlan& plan) {
    const std::size_t m = plan.n / plan.p;
    for (std::size_t k = 0; k < m; ++k) fft_strided(y, k, m, plan.p, Direction::forward);
}

}  // namespace

std::vector<Complex> four_step_observed(std::span<const Complex> x, const SplitPlan& plan,
                                        const StepObserver& observer) {
    if (x.size() != plan.n)
        throw ConfigError("four-step: input length " + std::to_string(x.size()) +
                          " does not match plan length " + std::to_string(plan.n));
    std::vector<Complex> z(x.begin(), x.end());
    const auto observe = [&](int step, std::span<const Complex> v) {
        if (observer) observer(step, v);
    };

    if (plan.p == 1) {
        fft_1d_inplace(z, Direction::forward);
        for (int step = 0; step < 4; ++step) observe(step, z);
        return z;
    }

    const std::size_t m = plan.n / plan.p;
    for (std::size_t s = 0; s < plan.p; ++s)
        fft_strided(z, s, plan.p, m, Direction::forward);
    observe(0, z);

    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t s = 0; s < plan.p; ++s)
            z[k * plan.p + s] *= omega(plan.n, static_cast<std::int64_t>(k * s));
    observe(1, z);

    std::vector<Complex> y(plan.n);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t s = 0; s < plan.p; ++s) y[s * m + k] = z[k * plan.p + s];
    observe(2, y);

    strided_final(y, plan);
    observe(3, y);
    return y;
}

std::vector<Complex> four_step(std::span<const Complex> x, const SplitPlan& plan) {
    return four_step_observed(x, plan, nullptr);
}

void four_step_inplace(std::span<Complex> x, const SplitPlan& plan) {
    if (x.size() != plan.n)
        throw ConfigError("four-step: input length " + std::to_string(x.size()) +
                          " does not match plan length " + std::to_string(plan.n));
    if (plan.p == 1) {
        // steps 1-3 degenerate; no permutation buffer needed
        fft_1d_inplace(x, Direction::forward);
        return;
    }
    transform_and_twiddle(x, plan);
    // the single auxiliary buffer, used only to realize the transpose
    std::vector<Complex> aux(x.begin(), x.end());
    const std::size_t m = plan.n / plan.p;
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t s = 0; s < plan.p; ++s) x[s * m + k] = aux[k * plan.p + s];
    strided_final(x, plan);
}

}  // namespace fftu
