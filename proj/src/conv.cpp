#include "segkit/conv.hpp"

#include "segkit/check.hpp"

namespace segkit {

namespace {

struct ConvDims {
    int cin, h, w;
    int cout, kh, kw;
    int oh, ow;
};

ConvDims conv_dims(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    require(input.rank() == 3, "conv2d: input must be [C_in,H,W]");
    require(kernel.rank() == 4, "conv2d: kernel must be [C_out,C_in,kh,kw]");
    require(spec.stride_h >= 1 && spec.stride_w >= 1, "conv2d: stride must be >= 1");
    require(spec.pad_h >= 0 && spec.pad_w >= 0, "conv2d: padding must be >= 0");

    ConvDims d{};
    d.cin = input.extent(0);
    d.h = input.extent(1);
    d.w = input.extent(2);
    d.cout = kernel.extent(0);
    d.kh = kernel.extent(2);
    d.kw = kernel.extent(3);
    require(kernel.extent(1) == d.cin, "conv2d: kernel C_in does not match input channels");
    require(d.kh <= d.h + 2 * spec.pad_h && d.kw <= d.w + 2 * spec.pad_w,
            "conv2d: kernel larger than padded input");
    d.oh = (d.h + 2 * spec.pad_h - d.kh) / spec.stride_h + 1;
    d.ow = (d.w + 2 * spec.pad_w - d.kw) / spec.stride_w + 1;
    require(d.oh >= 1 && d.ow >= 1, "conv2d: output extent < 1");
    return d;
}

/// One output plane, accumulated tap by tap in (ci, ky, kx) order so every
/// output element sees the same addition order as the plain quadruple-loop
/// sum. The inner ox loop runs over a precomputed valid range, branch-free.
inline void conv_plane(const double* in, const double* k, const ConvDims& d, const ConvSpec& spec,
                       int co, double* out_plane) {
    for (std::size_t i = 0, n = static_cast<std::size_t>(d.oh) * d.ow; i < n; ++i) {
        out_plane[i] = 0.0;
    }
    for (int ci = 0; ci < d.cin; ++ci) {
        const double* in_c = in + static_cast<std::size_t>(ci) * d.h * d.w;
        const double* k_c = k + (static_cast<std::size_t>(co) * d.cin + ci) * d.kh * d.kw;
        for (int ky = 0; ky < d.kh; ++ky) {
            for (int kx = 0; kx < d.kw; ++kx) {
                const double w = k_c[ky * d.kw + kx];
                // valid output columns: 0 <= ox*sw - pw + kx < d.w
                int ox_lo = 0;
                if (kx < spec.pad_w) {
                    ox_lo = (spec.pad_w - kx + spec.stride_w - 1) / spec.stride_w;
                }
                int ox_hi = d.ow; // exclusive
                {
                    const int max_ix = d.w - 1 + spec.pad_w - kx;
                    if (max_ix < 0) {
                        ox_hi = 0;
                    } else {
                        ox_hi = std::min(d.ow, max_ix / spec.stride_w + 1);
                    }
                }
                const std::ptrdiff_t shift = kx - spec.pad_w;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * spec.stride_h - spec.pad_h + ky;
                    if (iy < 0 || iy >= d.h) {
                        continue;
                    }
                    const double* row = in_c + static_cast<std::size_t>(iy) * d.w;
                    double* out_row = out_plane + static_cast<std::size_t>(oy) * d.ow;
                    for (int ox = ox_lo; ox < ox_hi; ++ox) {
                        out_row[ox] += w * row[static_cast<std::ptrdiff_t>(ox) * spec.stride_w + shift];
                    }
                }
            }
        }
    }
}

/// Flip the kernel spatially and swap its channel axes so that a stride-1
/// conv2d over the zero-inserted input realizes the transposed convolution.
Grid flip_for_transpose(const Grid& kernel) {
    const int cin = kernel.extent(0);
    const int cout = kernel.extent(1);
    const int kh = kernel.extent(2);
    const int kw = kernel.extent(3);
    Grid flipped({cout, cin, kh, kw});
    for (int a = 0; a < cin; ++a) {
        for (int b = 0; b < cout; ++b) {
            for (int i = 0; i < kh; ++i) {
                for (int j = 0; j < kw; ++j) {
                    flipped.at(b, a, i, j) = kernel.at(a, b, kh - 1 - i, kw - 1 - j);
                }
            }
        }
    }
    return flipped;
}

ConvSpec transpose_equiv_spec(const Grid& kernel, const ConvSpec& spec) {
    require(kernel.rank() == 4, "transposed_conv2d: kernel must be [C_in,C_out,kh,kw]");
    require(spec.stride_h >= 1 && spec.stride_w >= 1, "transposed_conv2d: stride must be >= 1");
    const int kh = kernel.extent(2);
    const int kw = kernel.extent(3);
    require(spec.pad_h >= 0 && spec.pad_h <= kh - 1 && spec.pad_w >= 0 && spec.pad_w <= kw - 1,
            "transposed_conv2d: padding must be in [0, k-1]");
    return ConvSpec{1, 1, kh - 1 - spec.pad_h, kw - 1 - spec.pad_w};
}

void check_transpose_output(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    require(input.rank() == 3, "transposed_conv2d: input must be [C_in,h,w]");
    require(kernel.extent(0) == input.extent(0),
            "transposed_conv2d: kernel C_in does not match input channels");
    const int oh = (input.extent(1) - 1) * spec.stride_h + kernel.extent(2) - 2 * spec.pad_h;
    const int ow = (input.extent(2) - 1) * spec.stride_w + kernel.extent(3) - 2 * spec.pad_w;
    require(oh >= 1 && ow >= 1, "transposed_conv2d: output extent < 1");
}

} // namespace

Grid zero_insert(const Grid& input, int stride_h, int stride_w) {
    require(input.rank() == 3, "zero_insert: input must be [C,h,w]");
    require(stride_h >= 1 && stride_w >= 1, "zero_insert: stride must be >= 1");
    const int c = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    const int dh = (h - 1) * stride_h + 1;
    const int dw = (w - 1) * stride_w + 1;
    Grid out({c, dh, dw});
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out.at(ci, y * stride_h, x * stride_w) = input.at(ci, y, x);
            }
        }
    }
    return out;
}

Grid conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    const ConvDims d = conv_dims(input, kernel, spec);
    Grid out({d.cout, d.oh, d.ow});
    const double* in = input.data();
    const double* k = kernel.data();
    double* o = out.data();
#pragma omp parallel for schedule(static)
    for (int co = 0; co < d.cout; ++co) {
        conv_plane(in, k, d, spec, co, o + static_cast<std::size_t>(co) * d.oh * d.ow);
    }
    return out;
}

Grid transposed_conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    check_transpose_output(input, kernel, spec);
    const ConvSpec equiv = transpose_equiv_spec(kernel, spec);
    return conv2d(zero_insert(input, spec.stride_h, spec.stride_w), flip_for_transpose(kernel), equiv);
}

ConvGrads conv2d_backward(const Grid& input, const Grid& kernel, const ConvSpec& spec,
                          const Grid& grad_out) {
    const ConvDims d = conv_dims(input, kernel, spec);
    require(grad_out.rank() == 3 && grad_out.extent(0) == d.cout && grad_out.extent(1) == d.oh &&
                grad_out.extent(2) == d.ow,
            "conv2d_backward: grad_out shape mismatch");

    ConvGrads g{Grid(input.shape()), Grid(kernel.shape())};
    const double* in = input.data();
    const double* k = kernel.data();
    const double* go = grad_out.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < d.cout; ++co) {
        for (int ci = 0; ci < d.cin; ++ci) {
            const double* in_c = in + static_cast<std::size_t>(ci) * d.h * d.w;
            const double* go_c = go + static_cast<std::size_t>(co) * d.oh * d.ow;
            double* gk = g.kernel.data() + (static_cast<std::size_t>(co) * d.cin + ci) * d.kh * d.kw;
            for (int ky = 0; ky < d.kh; ++ky) {
                for (int kx = 0; kx < d.kw; ++kx) {
                    int ox_lo = 0;
                    if (kx < spec.pad_w) {
                        ox_lo = (spec.pad_w - kx + spec.stride_w - 1) / spec.stride_w;
                    }
                    int ox_hi = 0;
                    const int max_ix = d.w - 1 + spec.pad_w - kx;
                    if (max_ix >= 0) {
                        ox_hi = std::min(d.ow, max_ix / spec.stride_w + 1);
                    }
                    const std::ptrdiff_t shift = kx - spec.pad_w;
                    double acc = 0.0;
                    for (int oy = 0; oy < d.oh; ++oy) {
                        const int iy = oy * spec.stride_h - spec.pad_h + ky;
                        if (iy < 0 || iy >= d.h) {
                            continue;
                        }
                        const double* in_row = in_c + static_cast<std::size_t>(iy) * d.w;
                        const double* go_row = go_c + static_cast<std::size_t>(oy) * d.ow;
                        for (int ox = ox_lo; ox < ox_hi; ++ox) {
                            acc += go_row[ox] *
                                   in_row[static_cast<std::ptrdiff_t>(ox) * spec.stride_w + shift];
                        }
                    }
                    gk[ky * d.kw + kx] = acc;
                }
            }
        }
    }

#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < d.cin; ++ci) {
        double* gi = g.input.data() + static_cast<std::size_t>(ci) * d.h * d.w;
        for (int co = 0; co < d.cout; ++co) {
            const double* go_c = go + static_cast<std::size_t>(co) * d.oh * d.ow;
            const double* k_c = k + (static_cast<std::size_t>(co) * d.cin + ci) * d.kh * d.kw;
            for (int ky = 0; ky < d.kh; ++ky) {
                for (int kx = 0; kx < d.kw; ++kx) {
                    const double w = k_c[ky * d.kw + kx];
                    int ox_lo = 0;
                    if (kx < spec.pad_w) {
                        ox_lo = (spec.pad_w - kx + spec.stride_w - 1) / spec.stride_w;
                    }
                    int ox_hi = 0;
                    const int max_ix = d.w - 1 + spec.pad_w - kx;
                    if (max_ix >= 0) {
                        ox_hi = std::min(d.ow, max_ix / spec.stride_w + 1);
                    }
                    const std::ptrdiff_t shift = kx - spec.pad_w;
                    for (int oy = 0; oy < d.oh; ++oy) {
                        const int iy = oy * spec.stride_h - spec.pad_h + ky;
                        if (iy < 0 || iy >= d.h) {
                            continue;
                        }
                        double* gi_row = gi + static_cast<std::size_t>(iy) * d.w;
                        const double* go_row = go_c + static_cast<std::size_t>(oy) * d.ow;
                        for (int ox = ox_lo; ox < ox_hi; ++ox) {
                            gi_row[static_cast<std::ptrdiff_t>(ox) * spec.stride_w + shift] +=
                                w * go_row[ox];
                        }
                    }
                }
            }
        }
    }
    return g;
}

ConvGrads transposed_conv2d_backward(const Grid& input, const Grid& kernel, const ConvSpec& spec,
                                     const Grid& grad_out) {
    check_transpose_output(input, kernel, spec);
    const ConvSpec equiv = transpose_equiv_spec(kernel, spec);
    const Grid dilated = zero_insert(input, spec.stride_h, spec.stride_w);
    const Grid flipped = flip_for_transpose(kernel);
    const ConvGrads inner = conv2d_backward(dilated, flipped, equiv, grad_out);

    ConvGrads g{Grid(input.shape()), Grid(kernel.shape())};
    const int c = input.extent(0), h = input.extent(1), w = input.extent(2);
    for (int ci = 0; ci < c; ++ci) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                g.input.at(ci, y, x) = inner.input.at(ci, y * spec.stride_h, x * spec.stride_w);
            }
        }
    }
    const int kh = kernel.extent(2), kw = kernel.extent(3);
    for (int a = 0; a < kernel.extent(0); ++a) {
        for (int b = 0; b < kernel.extent(1); ++b) {
            for (int i = 0; i < kh; ++i) {
                for (int j = 0; j < kw; ++j) {
                    g.kernel.at(a, b, i, j) = inner.kernel.at(b, a, kh - 1 - i, kw - 1 - j);
                }
            }
        }
    }
    return g;
}

namespace serial {

Grid conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    const ConvDims d = conv_dims(input, kernel, spec);
    Grid out({d.cout, d.oh, d.ow});
    const double* in = input.data();
    const double* k = kernel.data();
    double* o = out.data();
    for (int co = 0; co < d.cout; ++co) {
        conv_plane(in, k, d, spec, co, o + static_cast<std::size_t>(co) * d.oh * d.ow);
    }
    return out;
}

Grid transposed_conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec) {
    check_transpose_output(input, kernel, spec);
    const ConvSpec equiv = transpose_equiv_spec(kernel, spec);
    return serial::conv2d(zero_insert(input, spec.stride_h, spec.stride_w),
                          flip_for_transpose(kernel), equiv);
}

} // namespace serial

} // namespace segkit
