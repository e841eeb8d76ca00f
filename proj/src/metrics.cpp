#include "momfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace momfuse {

namespace {

void require_nonempty(const ImageU8& img, const char* what) {
    if (img.empty()) throw std::invalid_argument(std::string(what) + ": empty image");
}

}  // namespace

Histogram256 histogram(const ImageU8& img) {
    Histogram256 h;
    for (std::uint8_t v : img.samples()) ++h.counts[v];
    h.total = img.size();
    return h;
}

double entropy(const ImageU8& img) {
    require_nonempty(img, "entropy");
    const Histogram256 h = histogram(img);
    const double n = static_cast<double>(h.total);
    double bits = 0.0;
    for (auto c : h.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        bits -= p * std::log2(p);
    }
    return std::max(bits, 0.0);
}

double std_dev(const ImageU8& img) {
    require_nonempty(img, "std_dev");
    const Histogram256 h = histogram(img);
    const double n = static_cast<double>(h.total);
    double mean = 0.0;
    for (int k = 0; k < 256; ++k) mean += k * static_cast<double>(h.counts[k]);
    mean /= n;
    double var = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double d = k - mean;
        var += d * d * static_cast<double>(h.counts[k]);
    }
    return std::sqrt(var / n);
}

double mutual_information(const ImageU8& a, const ImageU8& f) {
    require_same_shape(a, f, "mutual_information");
    require_nonempty(a, "mutual_information");

    std::vector<std::uint32_t> joint(256 * 256, 0);
    std::array<std::uint64_t, 256> ha{}, hf{};
    auto sa = a.samples();
    auto sf = f.samples();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        ++joint[std::size_t(sa[i]) * 256 + sf[i]];
        ++ha[sa[i]];
        ++hf[sf[i]];
    }

    const double n = static_cast<double>(sa.size());
    double mi = 0.0;
    for (std::size_t u = 0; u < 256; ++u) {
        if (ha[u] == 0) continue;
        for (std::size_t v = 0; v < 256; ++v) {
            const auto c = joint[u * 256 + v];
            if (c == 0) continue;
            const double p = c / n;
            mi += p * std::log2(c * n / (static_cast<double>(ha[u]) * static_cast<double>(hf[v])));
        }
    }
    return mi;
}

double mim(const ImageU8& a, const ImageU8& b, const ImageU8& f) {
    require_same_shape(a, f, "mim");
    require_same_shape(b, f, "mim");
    return mutual_information(a, f) + mutual_information(b, f);
}

EdgeMap sobel_edges(const ImageU8& img) {
    require_nonempty(img, "sobel_edges");
    const ImageF p = pad(widen(img), 1, BorderPolicy::Replicate);
    EdgeMap e{Raster<double>(img.width(), img.height()), Raster<double>(img.width(), img.height())};
    for (int r = 0; r < img.height(); ++r) {
        const auto up = p.row(r);
        const auto mid = p.row(r + 1);
        const auto down = p.row(r + 2);
        auto g = e.strength.row(r);
        auto alpha = e.orientation.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const double sx = (up[c + 2] + 2.0 * mid[c + 2] + down[c + 2]) - (up[c] + 2.0 * mid[c] + down[c]);
            const double sy = (down[c] + 2.0 * down[c + 1] + down[c + 2]) - (up[c] + 2.0 * up[c + 1] + up[c + 2]);
            g[c] = std::sqrt(sx * sx + sy * sy);
            alpha[c] = sx == 0.0 ? std::numbers::pi / 2.0 : std::atan(sy / sx);
        }
    }
    return e;
}

void QabfConstants::validate() const {
    for (double v : {gamma_g, kappa_g, sigma_g, gamma_a, kappa_a, sigma_a, L})
        if (!std::isfinite(v)) throw std::invalid_argument("qabf constants: non-finite value");
    if (!(gamma_g > 0.0 && gamma_g <= 1.0) || !(gamma_a > 0.0 && gamma_a <= 1.0))
        throw std::invalid_argument("qabf constants: gamma_g and gamma_a must lie in (0, 1]");
    if (L < 0.0) throw std::invalid_argument("qabf constants: L must be >= 0");
}

double QabfConstants::q_max() const {
    return gamma_g / (1.0 + std::exp(kappa_g * (1.0 - sigma_g))) * (gamma_a / (1.0 + std::exp(kappa_a * (1.0 - sigma_a))));
}

double edge_preservation(double g_src, double a_src, double g_fused, double a_fused, const QabfConstants& k) {
    if (g_src == 0.0) return 0.0;
    const double g_rel = std::min(g_fused, g_src) / std::max(g_fused, g_src);

    double d = std::abs(a_src - a_fused);
    d = std::min(d, std::numbers::pi - d);
    d = std::clamp(d, 0.0, std::numbers::pi / 2.0);
    const double a_rel = 1.0 - d / (std::numbers::pi / 2.0);

    const double qg = k.gamma_g / (1.0 + std::exp(k.kappa_g * (g_rel - k.sigma_g)));
    const double qa = k.gamma_a / (1.0 + std::exp(k.kappa_a * (a_rel - k.sigma_a)));
    return qg * qa;
}

QabfScore qabf(const ImageU8& a, const ImageU8& b, const ImageU8& f, const QabfConstants& k) {
    require_same_shape(a, f, "qabf");
    require_same_shape(b, f, "qabf");
    k.validate();

    const EdgeMap ea = sobel_edges(a);
    const EdgeMap eb = sobel_edges(b);
    const EdgeMap ef = sobel_edges(f);

    auto ga = ea.strength.samples(), gb = eb.strength.samples(), gf = ef.strength.samples();
    auto aa = ea.orientation.samples(), ab = eb.orientation.samples(), af = ef.orientation.samples();

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gf.size(); ++i) {
        const double wa = std::pow(ga[i], k.L);
        const double wb = std::pow(gb[i], k.L);
        const double qa = edge_preservation(ga[i], aa[i], gf[i], af[i], k);
        const double qb = edge_preservation(gb[i], ab[i], gf[i], af[i], k);
        num += qa * wa + qb * wb;
        den += wa + wb;
    }
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

MetricsRecord evaluate(const ImageU8& a, const ImageU8& b, const ImageU8& f, const QabfConstants& k) {
    require_same_shape(a, f, "evaluate");
    require_same_shape(b, f, "evaluate");
    const QabfScore q = qabf(a, b, f, k);
    return {entropy(f), std_dev(f), mim(a, b, f), q.value, q.degenerate};
}

}  // namespace momfuse
