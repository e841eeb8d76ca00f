#include "momfuse/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace momfuse {

Kernel3::Kernel3(const std::array<std::array<double, 3>, 3>& c, double s) : coeffs(c), scale(s) {
    bool finite = std::isfinite(scale);
    for (const auto& row : coeffs)
        for (double v : row) finite = finite && std::isfinite(v);
    if (!finite) throw std::invalid_argument("Kernel3: non-finite coefficient or scale");
}

double Kernel3::dc_gain() const noexcept {
    double sum = 0.0;
    for (const auto& row : coeffs)
        for (double v : row) sum += v;
    return sum * scale;
}

Kernel3 highpass_mask(double center) {
    return Kernel3({{{-1.0, -1.0, -1.0}, {-1.0, center, -1.0}, {-1.0, -1.0, -1.0}}}, 1.0 / 9.0);
}

Kernel3 identity_kernel() { return Kernel3({{{0, 0, 0}, {0, 1, 0}, {0, 0, 0}}}, 1.0); }

ImageF convolve3(const ImageF& img, const Kernel3& k, BorderPolicy policy) {
    for (double v : img.samples())
        if (!std::isfinite(v)) throw std::domain_error("convolve3: non-finite input sample");

    const ImageF padded = pad(img, 1, policy);
    ImageF out(img.width(), img.height());
    const auto& m = k.coeffs;
    for (int r = 0; r < img.height(); ++r) {
        const auto up = padded.row(r);
        const auto mid = padded.row(r + 1);
        const auto down = padded.row(r + 2);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) {
            const double acc = m[0][0] * up[c] + m[0][1] * up[c + 1] + m[0][2] * up[c + 2] +
                               m[1][0] * mid[c] + m[1][1] * mid[c + 1] + m[1][2] * mid[c + 2] +
                               m[2][0] * down[c] + m[2][1] * down[c + 1] + m[2][2] * down[c + 2];
            dst[c] = k.scale * acc;
        }
    }
    return out;
}

ImageF preprocess(const ImageU8& img, const Kernel3& mask) {
    return convolve3(widen(img), mask, BorderPolicy::Replicate);
}

}  // namespace momfuse
