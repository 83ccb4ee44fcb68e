#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "segkit/distill.hpp"
#include "segkit/gradcheck.hpp"
#include "segkit/rng.hpp"

using namespace segkit;

namespace {

// Direct double-sum evaluation of the channel-wise loss in long double, with
// the softmax computed naively (no max subtraction).
double cwd_oracle(const Grid& teacher, const Grid& student, double t) {
    const int c = teacher.extent(0);
    const std::size_t n = teacher.size() / static_cast<std::size_t>(c);
    long double total = 0.0L;
    for (int k = 0; k < c; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * n;
        long double dt = 0.0L, ds = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            dt += std::exp(static_cast<long double>(teacher[base + i]) / t);
            ds += std::exp(static_cast<long double>(student[base + i]) / t);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const long double pt = std::exp(static_cast<long double>(teacher[base + i]) / t) / dt;
            const long double ps = std::exp(static_cast<long double>(student[base + i]) / t) / ds;
            total += pt * std::log(pt / ps);
        }
    }
    return static_cast<double>(static_cast<long double>(t * t) / c * total);
}

double channel_entropy(const Grid& probs, int channel) {
    const std::size_t n = probs.size() / static_cast<std::size_t>(probs.extent(0));
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = probs[static_cast<std::size_t>(channel) * n + i];
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

} // namespace

TEST_CASE("soften_logits normalizes, flattens at high T, and matches hand value") {
    std::vector<double> z{1.0, -0.5, 2.0};
    auto p = soften_logits(z, 1.0);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    auto flat = soften_logits(z, 1e6);
    for (double v : flat) CHECK(std::fabs(v - 1.0 / 3.0) < 1e-4);

    // exp(ln 9 / 2) = 3, so [0, ln 9] at T=2 softens to [0.25, 0.75]
    auto hand = soften_logits({0.0, std::log(9.0)}, 2.0);
    CHECK(hand[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(hand[1] == doctest::Approx(0.75).epsilon(1e-14));

    CHECK_THROWS_AS(soften_logits(z, 0.0), std::invalid_argument);
}

TEST_CASE("kd_loss is zero at equality, nonnegative, and gradient-correct") {
    Rng rng(11);
    Grid t = random_uniform({4, 3, 3}, rng, -2.0, 2.0);
    CHECK(kd_loss(t, t, 2.0).value == doctest::Approx(0.0).epsilon(1e-15));

    for (int trial = 0; trial < 10; ++trial) {
        Grid teacher = random_uniform({4, 3, 3}, rng, -2.0, 2.0);
        Grid student = random_uniform({4, 3, 3}, rng, -2.0, 2.0);
        const double temp = 1.0 + rng.next_double() * 3.0;
        auto r = kd_loss(student, teacher, temp);
        CHECK(r.value >= 0.0);
        auto f = [&](const Grid& g) { return kd_loss(g, teacher, temp).value; };
        CHECK(finite_diff_check(f, r.grad, student, 1e-4) < 1e-4);
    }

    Grid small({2, 2, 2});
    CHECK_THROWS_AS(kd_loss(small, t, 2.0), std::invalid_argument);
}

TEST_CASE("channel_softmax basics") {
    SUBCASE("constant channel becomes uniform over W*H") {
        Grid m = Grid::full({2, 3, 4}, 0.7);
        Grid p = channel_softmax(m, 1.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(p[i] == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    }
    SUBCASE("channels sum to one") {
        Rng rng(13);
        Grid m = random_uniform({3, 5, 4}, rng, -4.0, 4.0);
        Grid p = channel_softmax(m, 2.0);
        const std::size_t n = 20;
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += p[static_cast<std::size_t>(c) * n + i];
            CHECK(std::fabs(sum - 1.0) < 1e-12);
        }
    }
    SUBCASE("hand value on a 1x1x2 map") {
        Grid m({1, 1, 2}, {0.0, std::log(3.0)});
        Grid p = channel_softmax(m, 1.0);
        CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));
    }
    SUBCASE("adding a constant to a channel leaves its softmax unchanged") {
        Rng rng(17);
        Grid m = random_uniform({2, 4, 4}, rng, -1.0, 1.0);
        Grid shifted = m;
        for (std::size_t i = 0; i < 16; ++i) shifted[i] += 3.25;
        Grid a = channel_softmax(m, 1.5);
        Grid b = channel_softmax(shifted, 1.5);
        for (std::size_t i = 0; i < 16; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("channel_softmax entropy is nondecreasing in temperature") {
    Rng rng(19);
    Grid m = random_uniform({3, 6, 6}, rng, -5.0, 5.0);
    const double temps[] = {1.0, 2.0, 4.0, 8.0};
    for (int c = 0; c < 3; ++c) {
        double prev = -1.0;
        for (double t : temps) {
            const double h = channel_entropy(channel_softmax(m, t), c);
            CHECK(h >= prev - 1e-12);
            prev = h;
        }
    }
}

TEST_CASE("adapt_channels identity, zero, and per-pixel matmul oracle") {
    Rng rng(23);
    Grid s = random_uniform({2, 3, 3}, rng, -1.0, 1.0);

    Rng arng(1);
    ChannelAdapter id = make_adapter(2, 2, arng);
    Grid same = adapt_channels(s, id);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(same[i] == s[i]);

    ChannelAdapter zero{Grid({3, 2, 1, 1})};
    Grid z = adapt_channels(s, zero);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);

    ChannelAdapter up{random_uniform({3, 2, 1, 1}, rng, -1.0, 1.0)};
    Grid out = adapt_channels(s, up);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            for (int c = 0; c < 3; ++c) {
                double want = 0.0;
                for (int b = 0; b < 2; ++b) want += up.kernel.at(c, b, 0, 0) * s.at(b, y, x);
                CHECK(out.at(c, y, x) == want);
            }
}

TEST_CASE("cwd_loss zero at equality and nonnegative over random pairs") {
    Rng rng(29);
    Grid t = random_uniform({3, 4, 4}, rng, -2.0, 2.0);
    ActivationPair same{t, t, 4.0};
    CHECK(cwd_loss(same).value == doctest::Approx(0.0).epsilon(1e-15));

    for (int trial = 0; trial < 100; ++trial) {
        ActivationPair pair{random_uniform({3, 4, 4}, rng, -3.0, 3.0),
                            random_uniform({3, 4, 4}, rng, -3.0, 3.0), 2.0};
        const double v = cwd_loss(pair).value;
        CHECK(v >= 0.0);
        CHECK(v > 0.0); // distinct random pairs never coincide
    }
}

TEST_CASE("cwd_loss matches the direct-summation oracle and is asymmetric") {
    Rng rng(31);
    Grid teacher = random_uniform({3, 4, 4}, rng, -2.0, 2.0);
    Grid student = random_uniform({3, 4, 4}, rng, -2.0, 2.0);

    for (double t : {1.0, 2.0}) {
        ActivationPair pair{teacher, student, t};
        CHECK(cwd_loss(pair).value == doctest::Approx(cwd_oracle(teacher, student, t)).epsilon(1e-12));
    }

    ActivationPair fwd{teacher, student, 2.0};
    ActivationPair rev{student, teacher, 2.0};
    CHECK(cwd_loss(fwd).value != doctest::Approx(cwd_loss(rev).value).epsilon(1e-9));
}

TEST_CASE("cwd_loss student gradient passes finite differences") {
    Rng rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        Grid teacher = random_uniform({3, 3, 3}, rng, -2.0, 2.0);
        Grid student = random_uniform({3, 3, 3}, rng, -2.0, 2.0);
        ActivationPair pair{teacher, student, 2.0};
        auto r = cwd_loss(pair);
        auto f = [&](const Grid& g) {
            ActivationPair probe{teacher, g, 2.0};
            return cwd_loss(probe).value;
        };
        CHECK(finite_diff_check(f, r.grad, student, 1e-4) < 1e-4);
    }
}

TEST_CASE("cwd_loss with adapter: gradients for student and kernel") {
    Rng rng(41);
    Grid teacher = random_uniform({4, 3, 3}, rng, -2.0, 2.0);
    Grid student = random_uniform({2, 3, 3}, rng, -2.0, 2.0);
    ChannelAdapter adapter = make_adapter(4, 2, rng);

    ActivationPair pair{teacher, student, 2.0};
    Grid kernel_grad;
    auto r = cwd_loss(pair, &adapter, &kernel_grad);
    CHECK(r.value >= 0.0);

    auto fs = [&](const Grid& g) {
        ActivationPair probe{teacher, g, 2.0};
        return cwd_loss(probe, &adapter).value;
    };
    CHECK(finite_diff_check(fs, r.grad, student, 1e-4) < 1e-4);

    auto fk = [&](const Grid& g) {
        ChannelAdapter probe{g};
        ActivationPair p2{teacher, student, 2.0};
        return cwd_loss(p2, &probe).value;
    };
    CHECK(finite_diff_check(fk, kernel_grad, adapter.kernel, 1e-4) < 1e-4);

    ActivationPair mismatched{teacher, student, 2.0};
    CHECK_THROWS_AS(cwd_loss(mismatched), std::invalid_argument);
}
