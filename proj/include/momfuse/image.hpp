#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace momfuse {

// Row-major single-channel raster. Width and height are always >= 1 for
// images that come out of the public API; a default-constructed raster is
// empty and only useful as a placeholder.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, T fill = T{})
        : width_(check_dim(width)), height_(check_dim(height)),
          samples_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
    Raster(int width, int height, std::vector<T> samples)
        : width_(check_dim(width)), height_(check_dim(height)), samples_(std::move(samples)) {
        if (samples_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
            throw std::invalid_argument("raster: sample count does not match dimensions");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    T& at(int row, int col) noexcept { return samples_[index(row, col)]; }
    const T& at(int row, int col) const noexcept { return samples_[index(row, col)]; }

    std::span<T> row(int r) & noexcept { return {samples_.data() + index(r, 0), static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int r) const& noexcept {
        return {samples_.data() + index(r, 0), static_cast<std::size_t>(width_)};
    }
    std::span<const T> row(int r) && = delete;

    // Views are only handed out for lvalues; a temporary would dangle.
    std::span<T> samples() & noexcept { return samples_; }
    std::span<const T> samples() const& noexcept { return samples_; }
    std::span<const T> samples() && = delete;

    bool same_shape(const Raster& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    template <typename U>
    bool same_shape(const Raster<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static int check_dim(int d) {
        if (d < 1) throw std::invalid_argument("raster: dimensions must be >= 1");
        return d;
    }
    std::size_t index(int r, int c) const noexcept {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> samples_;
};

using ImageU8 = Raster<std::uint8_t>;
using ImageF = Raster<double>;

enum class BorderPolicy { Replicate };

/// Thrown when two rasters that must be registered have different shapes.
class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(const std::string& what, int w1, int h1, int w2, int h2);
};

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
    if (!a.same_shape(b)) throw DimensionMismatch(what, a.width(), a.height(), b.width(), b.height());
}

enum class PgmErrorKind {
    BadMagic,         // not a P2/P5 stream (P1, P3, P6, garbage, ...)
    MalformedHeader,  // missing or non-numeric width/height/maxval
    ZeroDimension,
    MaxvalOutOfRange, // maxval > 255 or 0
    Truncated,        // fewer samples than width*height
    SampleOutOfRange, // ASCII sample above maxval
    Io,
};

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    PgmErrorKind kind() const noexcept { return kind_; }

private:
    PgmErrorKind kind_;
};

ImageU8 load_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_pgm(const ImageU8& img, bool binary = true);

ImageU8 read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const ImageU8& img, bool binary = true);

ImageF widen(const ImageU8& img);

// Replicate-pads by `margin` pixels on every side.
ImageF pad(const ImageF& img, int margin, BorderPolicy policy = BorderPolicy::Replicate);

/// Clamps to [0,255] and rounds half away from zero. Throws
/// std::domain_error on NaN/inf.
ImageU8 quantize(const ImageF& img);

}  // namespace momfuse
