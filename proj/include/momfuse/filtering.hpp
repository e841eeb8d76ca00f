#pragma once

#include <array>

#include "momfuse/image.hpp"

namespace momfuse {

// 3x3 mask; out = scale * sum(coeffs[dr+1][dc+1] * in(r+dr, c+dc)).
struct Kernel3 {
    std::array<std::array<double, 3>, 3> coeffs{};
    double scale = 1.0;

    Kernel3() = default;
    Kernel3(const std::array<std::array<double, 3>, 3>& c, double s);

    double dc_gain() const noexcept;
    friend bool operator==(const Kernel3&, const Kernel3&) = default;
};

inline constexpr double kHighpassCenter = 17.9;

/// The preprocessing high-pass mask: center 17.9, eight neighbours -1,
/// scaled by 1/9. DC gain is 1.1, so flat regions come out 10% brighter.
/// `center` exists so the constant can be varied experimentally.
Kernel3 highpass_mask(double center = kHighpassCenter);

Kernel3 identity_kernel();

/// Correlates `img` with `k` over a replicate-padded border. Output is not
/// clamped. Throws std::domain_error on a non-finite input sample.
ImageF convolve3(const ImageF& img, const Kernel3& k, BorderPolicy policy = BorderPolicy::Replicate);

ImageF preprocess(const ImageU8& img, const Kernel3& mask = highpass_mask());

}  // namespace momfuse
