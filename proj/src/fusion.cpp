#include "momfuse/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace momfuse {

void FusionConfig::validate() const {
    if (window < 1 || window % 2 == 0) throw std::invalid_argument("fusion config: window must be odd and >= 1");
    if (moment_order_p < 0 || moment_order_p > 4 || moment_order_q < 0 || moment_order_q > 4)
        throw std::invalid_argument("fusion config: moment orders must lie in [0, 4]");
    if (!std::isfinite(mask_center)) throw std::invalid_argument("fusion config: mask center must be finite");
}

namespace {

std::vector<double> index_powers(int window, int order) {
    std::vector<double> w(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i) w[static_cast<std::size_t>(i)] = std::pow(double(i + 1), order);
    return w;
}

}  // namespace

MomentMap local_moment_map(const ImageF& img, const FusionConfig& cfg) {
    cfg.validate();
    const int half = cfg.window / 2;
    ImageF values = pad(img, half, cfg.border);
    if (cfg.use_magnitude)
        for (double& v : values.samples()) v = std::abs(v);

    // The weight r^p c^q factors, so do a row pass with c^q then a column
    // pass with r^p.
    const auto col_w = index_powers(cfg.window, cfg.moment_order_q);
    const auto row_w = index_powers(cfg.window, cfg.moment_order_p);

    ImageF rows(img.width(), values.height());
    for (int r = 0; r < values.height(); ++r) {
        const auto src = values.row(r);
        auto dst = rows.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < col_w.size(); ++j) acc += col_w[j] * src[c + j];
            dst[c] = acc;
        }
    }

    MomentMap out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r) {
        auto dst = out.row(r);
        for (std::size_t i = 0; i < row_w.size(); ++i) {
            const auto src = rows.row(r + static_cast<int>(i));
            const double w = row_w[i];
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
        }
    }
    return out;
}

DecisionMap decision_map(const MomentMap& mx, const MomentMap& my) {
    require_same_shape(mx, my, "decision_map");
    DecisionMap out(mx.width(), mx.height(), Select::X);
    auto a = mx.samples();
    auto b = my.samples();
    auto d = out.samples();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] >= b[i] ? Select::X : Select::Y;
    return out;
}

std::string_view method_name(FusionMethod m) {
    switch (m) {
        case FusionMethod::Moment:
            return "moment";
        case FusionMethod::Average:
            return "average";
        case FusionMethod::Pca:
            return "pca";
    }
    return "unknown";
}

std::optional<FusionMethod> parse_method(std::string_view name) {
    for (auto m : {FusionMethod::Moment, FusionMethod::Average, FusionMethod::Pca})
        if (method_name(m) == name) return m;
    return std::nullopt;
}

FusionResult fuse_moment(const ImageU8& x, const ImageU8& y, const FusionConfig& cfg) {
    require_same_shape(x, y, "fuse_moment");
    cfg.validate();

    const Kernel3 mask = highpass_mask(cfg.mask_center);
    ImageF fx = preprocess(x, mask);
    ImageF fy = preprocess(y, mask);

    FusionResult res;
    res.method = FusionMethod::Moment;
    res.moments_x = local_moment_map(fx, cfg);
    res.moments_y = local_moment_map(fy, cfg);
    res.decision = decision_map(*res.moments_x, *res.moments_y);

    ImageF sx = cfg.output_source == OutputSource::Filtered ? std::move(fx) : widen(x);
    const ImageF sy = cfg.output_source == OutputSource::Filtered ? std::move(fy) : widen(y);
    auto pick = res.decision->samples();
    auto out = sx.samples();
    auto other = sy.samples();
    for (std::size_t i = 0; i < out.size(); ++i)
        if (pick[i] == Select::Y) out[i] = other[i];

    res.fused_f = std::move(sx);
    res.fused_u8 = quantize(res.fused_f);
    return res;
}

FusionResult fuse_average(const ImageU8& x, const ImageU8& y) {
    require_same_shape(x, y, "fuse_average");
    ImageF out(x.width(), x.height());
    auto a = x.samples();
    auto b = y.samples();
    auto o = out.samples();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (double(a[i]) + double(b[i])) / 2.0;

    FusionResult res;
    res.method = FusionMethod::Average;
    res.fused_u8 = quantize(out);
    res.fused_f = std::move(out);
    return res;
}

PcaWeights pca_weights(const ImageU8& x, const ImageU8& y) {
    require_same_shape(x, y, "pca_weights");
    auto a = x.samples();
    auto b = y.samples();
    const double n = static_cast<double>(a.size());

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_x += a[i];
        mean_y += b[i];
    }
    mean_x /= n;
    mean_y /= n;

    double cxx = 0.0, cyy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dx = a[i] - mean_x, dy = b[i] - mean_y;
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    cxx /= n;
    cyy /= n;
    cxy /= n;

    // Largest eigenvalue of [[cxx, cxy], [cxy, cyy]] and its eigenvector,
    // taken from whichever row of (C - lambda I) is better conditioned.
    const double half_diff = (cxx - cyy) / 2.0;
    const double lambda = (cxx + cyy) / 2.0 + std::sqrt(half_diff * half_diff + cxy * cxy);
    double e1, e2;
    if (cxx >= cyy) {
        e1 = lambda - cyy;
        e2 = cxy;
    } else {
        e1 = cxy;
        e2 = lambda - cxx;
    }
    if (e1 + e2 < 0.0) {
        e1 = -e1;
        e2 = -e2;
    }

    PcaWeights w;
    const double sum = e1 + e2;
    const double norm = std::abs(e1) + std::abs(e2);
    if (!(sum > 1e-12 * norm) || norm == 0.0) {
        w.degenerate = true;
        return w;
    }
    w.wx = e1 / sum;
    w.wy = e2 / sum;
    return w;
}

FusionResult fuse_pca(const ImageU8& x, const ImageU8& y) {
    const PcaWeights w = pca_weights(x, y);
    ImageF out(x.width(), x.height());
    auto a = x.samples();
    auto b = y.samples();
    auto o = out.samples();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = w.wx * a[i] + w.wy * b[i];

    FusionResult res;
    res.method = FusionMethod::Pca;
    res.fused_u8 = quantize(out);
    res.fused_f = std::move(out);
    res.pca = w;
    return res;
}

FusionResult fuse(FusionMethod method, const ImageU8& x, const ImageU8& y, const FusionConfig& cfg) {
    switch (method) {
        case FusionMethod::Moment:
            return fuse_moment(x, y, cfg);
        case FusionMethod::Average:
            return fuse_average(x, y);
        case FusionMethod::Pca:
            return fuse_pca(x, y);
    }
    throw std::invalid_argument("fuse: unknown method");
}

}  // namespace momfuse
