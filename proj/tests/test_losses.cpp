#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "segkit/gradcheck.hpp"
#include "segkit/losses.hpp"
#include "segkit/rng.hpp"

using namespace segkit;

namespace {

// Independent set-counting Jaccard, straight from the definition.
double brute_jaccard(const std::vector<int>& pred, const std::vector<int>& truth, int c) {
    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == c, t = truth[i] == c;
        inter += (p && t) ? 1 : 0;
        uni += (p || t) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

// Saturated logits encoding a hard prediction: +50 on the predicted class,
// -50 elsewhere.
Grid saturated_logits(const LabelMask& pred, int num_classes) {
    Grid z({num_classes, pred.height, pred.width});
    const std::size_t n = pred.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < num_classes; ++c) {
            z[static_cast<std::size_t>(c) * n + i] = c == pred.labels[i] ? 50.0 : -50.0;
        }
    }
    return z;
}

LabelMask random_mask(int h, int w, int num_classes, Rng& rng) {
    LabelMask m(h, w);
    for (auto& v : m.labels) v = rng.next_int(0, num_classes - 1);
    return m;
}

// True when every adjacent pair of sorted per-class errors is separated by
// more than the finite-difference step; near ties make the Lovasz
// subgradient side-dependent.
bool lovasz_tie_free(const Grid& logits, const LabelMask& truth, double min_gap) {
    const int c = logits.extent(0);
    const std::size_t n = truth.size();
    // softmax per pixel
    for (int k = 0; k < c; ++k) {
        bool present = false;
        for (int label : truth.labels) present |= label == k;
        if (!present) continue;
        std::vector<double> m(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mx = logits[i];
            for (int a = 1; a < c; ++a)
                mx = std::max(mx, logits[static_cast<std::size_t>(a) * n + i]);
            double sum = 0.0;
            for (int a = 0; a < c; ++a)
                sum += std::exp(logits[static_cast<std::size_t>(a) * n + i] - mx);
            const double p = std::exp(logits[static_cast<std::size_t>(k) * n + i] - mx) / sum;
            m[i] = truth.labels[i] == k ? 1.0 - p : p;
        }
        std::sort(m.begin(), m.end(), std::greater<>());
        for (std::size_t i = 1; i < n; ++i)
            if (m[i - 1] - m[i] < min_gap) return false;
    }
    return true;
}

} // namespace

TEST_CASE("jaccard_index identity, absent-class convention, and counting") {
    LabelMask a(2, 2, {1, 0, 0, 0});
    LabelMask b(2, 2, {1, 1, 0, 0});
    CHECK(jaccard_index(a, a, 1) == 1.0);
    CHECK(jaccard_index(a, b, 2) == 1.0); // absent from both: 0/0 = 1
    CHECK(jaccard_index(a, b, 1) == 0.5); // |inter| = 1, |union| = 2
    CHECK(jaccard_loss(a, a, 1) == 0.0);
    CHECK(jaccard_loss(a, b, 1) == 0.5);
    LabelMask c(2, 2, {0, 1, 0, 0});
    CHECK(jaccard_loss(a, c, 1) == 1.0); // disjoint nonempty sets
    LabelMask bad(3, 2, {0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(jaccard_index(a, bad, 1), std::invalid_argument);
}

TEST_CASE("cross_entropy uniform logits give ln C") {
    for (int c = 2; c <= 5; ++c) {
        Grid z({c, 2, 2});
        LabelMask t(2, 2, {0, c - 1, 1 % c, 0});
        auto r = cross_entropy_loss(z, t);
        CHECK(r.value == doctest::Approx(std::log(static_cast<double>(c))).epsilon(1e-14));
    }
}

TEST_CASE("cross_entropy saturated correct prediction is ~0") {
    Rng rng(1);
    LabelMask t = random_mask(3, 3, 3, rng);
    Grid z = saturated_logits(t, 3);
    auto r = cross_entropy_loss(z, t);
    CHECK(r.value >= 0.0);
    CHECK(r.value < 1e-9);
}

TEST_CASE("cross_entropy matches a direct-summation oracle and finite differences") {
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        Grid z = random_uniform({3, 4, 4}, rng, -2.0, 2.0);
        LabelMask t = random_mask(4, 4, 3, rng);
        auto r = cross_entropy_loss(z, t);

        // Direct summation without max subtraction, long double accumulators.
        long double total = 0.0L;
        const std::size_t n = t.size();
        for (std::size_t i = 0; i < n; ++i) {
            long double denom = 0.0L;
            for (int c = 0; c < 3; ++c)
                denom += std::exp(static_cast<long double>(z[static_cast<std::size_t>(c) * n + i]));
            const long double pt =
                std::exp(static_cast<long double>(z[static_cast<std::size_t>(t.labels[i]) * n + i])) / denom;
            total += -std::log(pt);
        }
        CHECK(r.value == doctest::Approx(static_cast<double>(total / n)).epsilon(1e-12));

        auto f = [&](const Grid& g) { return cross_entropy_loss(g, t).value; };
        CHECK(finite_diff_check(f, r.grad, z, 1e-4) < 1e-6);
    }
}

TEST_CASE("focal gamma=0 alpha=1 equals cross entropy exactly") {
    Rng rng(3);
    Grid z = random_uniform({4, 5, 3}, rng, -3.0, 3.0);
    LabelMask t = random_mask(5, 3, 4, rng);
    auto ce = cross_entropy_loss(z, t);
    auto fo = focal_loss(z, t, 0.0, 1.0);
    CHECK(fo.value == ce.value);
    for (std::size_t i = 0; i < ce.grad.size(); ++i) CHECK(fo.grad[i] == ce.grad[i]);
}

TEST_CASE("focal saturated prediction vanishes and gradient checks out") {
    Rng rng(4);
    LabelMask t = random_mask(4, 4, 3, rng);
    Grid sat = saturated_logits(t, 3);
    CHECK(focal_loss(sat, t, 2.0, 0.25).value < 1e-9);

    for (int trial = 0; trial < 5; ++trial) {
        Grid z = random_uniform({3, 4, 4}, rng, -2.0, 2.0);
        LabelMask tt = random_mask(4, 4, 3, rng);
        auto r = focal_loss(z, tt, 2.0, 0.25);
        auto f = [&](const Grid& g) { return focal_loss(g, tt, 2.0, 0.25).value; };
        CHECK(finite_diff_check(f, r.grad, z, 1e-4) < 1e-4);
    }
}

TEST_CASE("dice saturated correct ~0, saturated wrong ~1, gradient checks out") {
    Rng rng(5);
    LabelMask t = random_mask(4, 4, 2, rng);
    Grid sat = saturated_logits(t, 2);
    CHECK(dice_loss(sat, t).value < 1e-6);

    LabelMask flipped(4, 4);
    for (std::size_t i = 0; i < t.size(); ++i) flipped.labels[i] = 1 - t.labels[i];
    Grid wrong = saturated_logits(flipped, 2);
    CHECK(dice_loss(wrong, t).value == doctest::Approx(1.0).epsilon(1e-4));

    for (int trial = 0; trial < 5; ++trial) {
        Grid z = random_uniform({3, 4, 4}, rng, -2.0, 2.0);
        LabelMask tt = random_mask(4, 4, 3, rng);
        auto r = dice_loss(z, tt);
        auto f = [&](const Grid& g) { return dice_loss(g, tt).value; };
        CHECK(finite_diff_check(f, r.grad, z, 1e-4) < 1e-4);
    }
}

TEST_CASE("lovasz_grad hand cases") {
    SUBCASE("all ones gives 1/n everywhere") {
        for (int n = 1; n <= 6; ++n) {
            std::vector<double> ind(n, 1.0);
            auto g = lovasz_grad(ind);
            for (double v : g) CHECK(v == doctest::Approx(1.0 / n).epsilon(1e-14));
        }
    }
    SUBCASE("single element") {
        auto g = lovasz_grad({1.0});
        REQUIRE(g.size() == 1);
        CHECK(g[0] == 1.0);
    }
    SUBCASE("empty rejected") { CHECK_THROWS_AS(lovasz_grad({}), std::invalid_argument); }
}

TEST_CASE("lovasz_grad reproduces 1-Jaccard over all length-4 binary pairs") {
    for (int pbits = 0; pbits < 16; ++pbits) {
        for (int tbits = 0; tbits < 16; ++tbits) {
            std::vector<int> pred(4), truth(4);
            for (int i = 0; i < 4; ++i) {
                pred[i] = (pbits >> i) & 1;
                truth[i] = (tbits >> i) & 1;
            }
            std::vector<double> m(4);
            for (int i = 0; i < 4; ++i) m[i] = std::fabs(pred[i] - truth[i]);
            std::vector<std::size_t> order(4);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
            std::vector<double> ind(4);
            for (int r = 0; r < 4; ++r) ind[r] = truth[order[r]];
            auto g = lovasz_grad(ind);
            double loss = 0.0;
            for (int r = 0; r < 4; ++r) loss += m[order[r]] * g[r];
            CHECK(loss == doctest::Approx(1.0 - brute_jaccard(pred, truth, 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("lovasz_softmax is ~0 at a perfect vertex") {
    Rng rng(6);
    LabelMask t = random_mask(4, 4, 3, rng);
    Grid z = saturated_logits(t, 3);
    CHECK(lovasz_softmax_loss(z, t).value < 1e-6);
}

TEST_CASE("lovasz_softmax agrees with the set-function loss at hard vertices") {
    // Exhaustive over all 2-class 2x2 mask pairs; the full 3x3 sweep runs in
    // the acceptance suite.
    for (int pbits = 0; pbits < 16; ++pbits) {
        for (int tbits = 0; tbits < 16; ++tbits) {
            LabelMask pred(2, 2), truth(2, 2);
            for (int i = 0; i < 4; ++i) {
                pred.labels[i] = (pbits >> i) & 1;
                truth.labels[i] = (tbits >> i) & 1;
            }
            Grid z = saturated_logits(pred, 2);
            const double got = lovasz_softmax_loss(z, truth).value;

            double want = 0.0;
            int present = 0;
            for (int c = 0; c < 2; ++c) {
                bool has = false;
                for (int v : truth.labels) has |= v == c;
                if (!has) continue;
                ++present;
                want += 1.0 - brute_jaccard(pred.labels, truth.labels, c);
            }
            want /= present;
            CHECK(got == doctest::Approx(want).epsilon(1e-6));
        }
    }
}

TEST_CASE("lovasz_softmax gradient passes finite differences away from ties") {
    Rng rng(7);
    int done = 0, attempts = 0;
    while (done < 5) {
        REQUIRE(++attempts < 20000);
        Grid z = random_uniform({3, 6, 6}, rng, -2.0, 2.0);
        LabelMask t = random_mask(6, 6, 3, rng);
        // A h=1e-3 logit step moves any error by at most h/4, so a 1e-3 gap
        // keeps the sort order fixed on both sides of the difference.
        if (!lovasz_tie_free(z, t, 1e-3)) continue;
        auto r = lovasz_softmax_loss(z, t);
        auto f = [&](const Grid& g) { return lovasz_softmax_loss(g, t).value; };
        CHECK(finite_diff_check(f, r.grad, z, 1e-3) < 1e-4);
        ++done;
    }
}

TEST_CASE("all losses are nonnegative and vanish at saturated correct predictions") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        LabelMask t = random_mask(3, 5, 3, rng);
        Grid sat = saturated_logits(t, 3);
        CHECK(cross_entropy_loss(sat, t).value < 1e-6);
        CHECK(focal_loss(sat, t).value < 1e-6);
        CHECK(dice_loss(sat, t).value < 1e-6);
        CHECK(lovasz_softmax_loss(sat, t).value < 1e-6);

        Grid z = random_uniform({3, 3, 5}, rng, -3.0, 3.0);
        CHECK(cross_entropy_loss(z, t).value >= 0.0);
        CHECK(focal_loss(z, t).value >= 0.0);
        CHECK(dice_loss(z, t).value >= 0.0);
        CHECK(lovasz_softmax_loss(z, t).value >= 0.0);
    }
}

TEST_CASE("losses are permutation equivariant") {
    Rng rng(9);
    Grid z = random_uniform({3, 4, 5}, rng, -2.0, 2.0);
    LabelMask t = random_mask(4, 5, 3, rng);
    const std::size_t n = t.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Fisher-Yates with the fixed rng
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[static_cast<std::size_t>(rng.next_int(0, static_cast<int>(i)))]);
    }
    Grid zp(z.shape());
    LabelMask tp(4, 5);
    for (std::size_t i = 0; i < n; ++i) {
        tp.labels[perm[i]] = t.labels[i];
        for (int c = 0; c < 3; ++c)
            zp[static_cast<std::size_t>(c) * n + perm[i]] = z[static_cast<std::size_t>(c) * n + i];
    }
    CHECK(cross_entropy_loss(zp, tp).value ==
          doctest::Approx(cross_entropy_loss(z, t).value).epsilon(1e-12));
    CHECK(focal_loss(zp, tp).value == doctest::Approx(focal_loss(z, t).value).epsilon(1e-12));
    CHECK(dice_loss(zp, tp).value == doctest::Approx(dice_loss(z, t).value).epsilon(1e-12));
    CHECK(lovasz_softmax_loss(zp, tp).value ==
          doctest::Approx(lovasz_softmax_loss(z, t).value).epsilon(1e-12));
}
