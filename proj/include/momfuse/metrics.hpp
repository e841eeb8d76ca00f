#pragma once

#include <array>
#include <cstdint>

#include "momfuse/image.hpp"

namespace momfuse {

struct Histogram256 {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;
};

Histogram256 histogram(const ImageU8& img);

/// Shannon entropy of the grey-level histogram, in bits.
double entropy(const ImageU8& img);

/// Population (1/N) standard deviation of the samples.
double std_dev(const ImageU8& img);

/// Mutual information of the 256x256 joint histogram, in bits.
double mutual_information(const ImageU8& a, const ImageU8& f);

/// MI(a, f) + MI(b, f).
double mim(const ImageU8& a, const ImageU8& b, const ImageU8& f);

// Sobel edge strength and orientation. Orientation is atan(sy / sx) in
// (-pi/2, pi/2], with pi/2 wherever sx == 0.
struct EdgeMap {
    Raster<double> strength;
    Raster<double> orientation;
};

EdgeMap sobel_edges(const ImageU8& img);

// Sigmoid parameters of the gradient-preservation metric. The defaults are
// the commonly published Xydeas-Petrovic constants.
struct QabfConstants {
    double gamma_g = 0.9994;
    double kappa_g = -15.0;
    double sigma_g = 0.5;
    double gamma_a = 0.9879;
    double kappa_a = -22.0;
    double sigma_a = 0.8;
    double L = 1.0;

    void validate() const;
    /// Per-pixel preservation score when strength and orientation match
    /// perfectly (G = A = 1); the upper bound of any Q^AF value.
    double q_max() const;
};

struct QabfScore {
    double value = 0.0;
    // Both sources are gradient-free everywhere, so the weight total is 0.
    bool degenerate = false;
};

/// Edge preservation value of a single source pixel against the fused one.
double edge_preservation(double g_src, double a_src, double g_fused, double a_fused, const QabfConstants& k);

QabfScore qabf(const ImageU8& a, const ImageU8& b, const ImageU8& f, const QabfConstants& k = {});

struct MetricsRecord {
    double entropy_bits = 0.0;
    double sd = 0.0;
    double mim_bits = 0.0;
    double qabf = 0.0;
    bool degenerate_qabf = false;
};

MetricsRecord evaluate(const ImageU8& a, const ImageU8& b, const ImageU8& f, const QabfConstants& k = {});

}  // namespace momfuse
