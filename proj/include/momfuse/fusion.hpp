#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "momfuse/filtering.hpp"
#include "momfuse/image.hpp"

namespace momfuse {

enum class OutputSource { Filtered, Original };

struct FusionConfig {
    int moment_order_p = 1;  // exponent on the local row index
    int moment_order_q = 1;  // exponent on the local column index
    int window = 3;
    bool use_magnitude = true;
    OutputSource output_source = OutputSource::Filtered;
    BorderPolicy border = BorderPolicy::Replicate;
    double mask_center = kHighpassCenter;

    /// Throws std::invalid_argument unless window is odd and >= 1 and
    /// both orders are in [0, 4].
    void validate() const;
};

using MomentMap = Raster<double>;

enum class Select : std::uint8_t { X = 0, Y = 1 };
using DecisionMap = Raster<Select>;

/// Local geometric moment of every pixel:
///   M(a) = sum_{r=1..w} sum_{c=1..w} r^p c^q V(b)
/// where (r, c) are 1-based coordinates inside the w x w window centred on
/// a, and V is |img| (or img when use_magnitude is off). Windows hanging
/// over the border read the replicate-padded raster.
MomentMap local_moment_map(const ImageF& img, const FusionConfig& cfg = {});

/// X where mx >= my, Y where my > mx.
DecisionMap decision_map(const MomentMap& mx, const MomentMap& my);

enum class FusionMethod { Moment, Average, Pca };

std::string_view method_name(FusionMethod m);
std::optional<FusionMethod> parse_method(std::string_view name);

struct PcaWeights {
    double wx = 0.5;
    double wy = 0.5;
    bool degenerate = false;
};

struct FusionResult {
    FusionMethod method = FusionMethod::Moment;
    ImageU8 fused_u8;
    ImageF fused_f;
    // Only set by the moment fuser.
    std::optional<DecisionMap> decision;
    std::optional<MomentMap> moments_x;
    std::optional<MomentMap> moments_y;
    // Only set by the PCA fuser.
    std::optional<PcaWeights> pca;
};

FusionResult fuse_moment(const ImageU8& x, const ImageU8& y, const FusionConfig& cfg = {});
FusionResult fuse_average(const ImageU8& x, const ImageU8& y);

PcaWeights pca_weights(const ImageU8& x, const ImageU8& y);
FusionResult fuse_pca(const ImageU8& x, const ImageU8& y);

FusionResult fuse(FusionMethod method, const ImageU8& x, const ImageU8& y, const FusionConfig& cfg = {});

}  // namespace momfuse
