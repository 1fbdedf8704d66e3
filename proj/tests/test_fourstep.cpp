#include <doctest.h>

#include <vector>

#include "fftu/fourstep.hpp"
#include "test_util.hpp"

using namespace fftu;
using testutil::bits_equal;
using testutil::random_signal;

TEST_CASE("split plan requires p^2 to divide n") {
    CHECK_NOTHROW(SplitPlan(16, 4));
    CHECK_NOTHROW(SplitPlan(18, 3));
    CHECK_THROWS_AS(SplitPlan(16, 3), ConfigError);
    CHECK_THROWS_AS(SplitPlan(8, 4), ConfigError);
    CHECK_THROWS_AS(SplitPlan(0, 1), ConfigError);
    CHECK_THROWS_AS(SplitPlan(16, 0), ConfigError);
}

TEST_CASE("four step with p = 1 is exactly fft_1d") {
    auto x = random_signal(20, 60);
    auto split = four_step(x, SplitPlan(20, 1));
    auto plain = fft_1d(x, Direction::forward);
    CHECK(bits_equal(split, plain));
}

TEST_CASE("four step matches the naive oracle") {
    auto x = random_signal(16, 3);
    auto y = four_step(x, SplitPlan(16, 2));
    auto ref = dft_naive(x);
    CHECK(relative_l2(y, ref) <= 1e-12);
}

TEST_CASE("four step of a delta is flat") {
    std::vector<Complex> x(64, Complex{0, 0});
    x[0] = {1, 0};
    auto y = four_step(x, SplitPlan(64, 4));
    for (auto& v : y) CHECK(std::abs(v - Complex{1.0, 0.0}) <= 1e-12);
}

TEST_CASE("in-place four step is bit identical to the buffered one") {
    auto x = random_signal(64, 5);
    auto ref = four_step(x, SplitPlan(64, 4));
    auto buf = x;
    four_step_inplace(buf, SplitPlan(64, 4));
    CHECK(bits_equal(buf, ref));

    auto y = random_signal(24, 14);
    auto plain = fft_1d(y, Direction::forward);
    four_step_inplace(y, SplitPlan(24, 1));
    CHECK(bits_equal(y, plain));
}

TEST_CASE("four step at the maximal split p = sqrt(n)") {
    auto x = random_signal(16, 15);
    auto y = four_step(x, SplitPlan(16, 4));
    auto ref = dft_naive(x);
    CHECK(relative_l2(y, ref) <= 1e-12);
}

TEST_CASE("four step agrees with naive for every admissible split through 256") {
    for (std::size_t n = 1; n <= 256; ++n) {
        bool covered = false;
        for (std::size_t p = 2; p * p <= n; ++p)
            if (n % (p * p) == 0) covered = true;
        if (!covered) continue;
        auto x = random_signal(n, 700 + n);
        auto ref = dft_naive(x);
        for (std::size_t p = 1; p * p <= n; ++p) {
            if (n % (p * p) != 0) continue;
            // skip splits whose short transforms hit the radix limit
            if (p > 64 || n / p > 256) continue;
            auto y = four_step(x, SplitPlan(n, p));
            CAPTURE(n);
            CAPTURE(p);
            CHECK(relative_l2(y, ref) <= 1e-11);
        }
    }
}

TEST_CASE("step 0 computes the decimated transforms in place") {
    const std::size_t n = 36, p = 3, m = n / p;
    auto x = random_signal(n, 16);

    std::vector<Complex> after_step0;
    four_step_observed(x, SplitPlan(n, p), [&](int step, std::span<const Complex> buf) {
        if (step == 0) after_step0.assign(buf.begin(), buf.end());
    });
    REQUIRE(after_step0.size() == n);

    for (std::size_t s = 0; s < p; ++s) {
        std::vector<Complex> sub(m), got(m);
        for (std::size_t k = 0; k < m; ++k) {
            sub[k] = x[s + k * p];
            got[k] = after_step0[s + k * p];
        }
        auto want = fft_1d(sub, Direction::forward);
        CAPTURE(s);
        CHECK(bits_equal(got, want));
    }
}

TEST_CASE("all admissible splits of one signal agree") {
    auto x = random_signal(64, 17);
    auto p1 = four_step(x, SplitPlan(64, 1));
    auto p2 = four_step(x, SplitPlan(64, 2));
    auto p4 = four_step(x, SplitPlan(64, 4));
    auto p8 = four_step(x, SplitPlan(64, 8));
    CHECK(relative_l2(p2, p1) <= 1e-12);
    CHECK(relative_l2(p4, p1) <= 1e-12);
    CHECK(relative_l2(p8, p1) <= 1e-12);
}

TEST_CASE("four step rejects mismatched input length") {
    auto x = random_signal(8, 18);
    CHECK_THROWS_AS((void)four_step(x, SplitPlan(16, 2)), ConfigError);
}
