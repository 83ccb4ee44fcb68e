#pragma once

#include "segkit/grid.hpp"

namespace segkit {

/// Per-axis stride and zero padding. Zero fill is the only padding mode.
struct ConvSpec {
    int stride_h = 1;
    int stride_w = 1;
    int pad_h = 0;
    int pad_w = 0;
};

/// 2-D cross-correlation (no kernel flip): input [C_in,H,W] against kernel
/// [C_out,C_in,kh,kw] gives [C_out,H',W'] with H' = (H + 2p - kh)/s + 1
/// (floor), likewise W'. The kernel flip lives only inside
/// transposed_conv2d's equivalent-convolution path, which keeps the pair
/// exactly adjoint: <conv2d(x,k), y> == <x, transposed_conv2d(y,k)>.
Grid conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec);

/// Fractionally-strided convolution: input [C_in,h,w] against kernel
/// [C_in,C_out,kh,kw] gives [C_out,H,W] with H = (h-1)*s + kh - 2p.
/// Realized literally as zero insertion: (stride-1) zeros go between input
/// elements, then a stride-1 conv2d with the spatially flipped kernel and
/// padding (k-1-p). Requires p <= k-1 per axis.
Grid transposed_conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec);

/// Inserts (stride-1) zeros between neighboring elements along each spatial
/// axis of a [C,h,w] grid; output is [C,(h-1)*sh+1,(w-1)*sw+1].
Grid zero_insert(const Grid& input, int stride_h, int stride_w);

/// Gradients of a conv-style op with respect to its input and kernel, given
/// the gradient at its output.
struct ConvGrads {
    Grid input;
    Grid kernel;
};

/// Reverse-mode gradients of conv2d. Rows/columns of the input that no
/// window touches (floor truncation in the output formula) get zero
/// gradient.
ConvGrads conv2d_backward(const Grid& input, const Grid& kernel, const ConvSpec& spec,
                          const Grid& grad_out);

/// Reverse-mode gradients of transposed_conv2d, computed through its
/// zero-insertion decomposition.
ConvGrads transposed_conv2d_backward(const Grid& input, const Grid& kernel, const ConvSpec& spec,
                                     const Grid& grad_out);

// Plain single-thread reference kernels. The OpenMP versions above must
// produce bit-identical results; tests and the benchmark tool compare them.
namespace serial {
Grid conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec);
Grid transposed_conv2d(const Grid& input, const Grid& kernel, const ConvSpec& spec);
} // namespace serial

} // namespace segkit
