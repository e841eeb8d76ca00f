#include "momfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string_view>

namespace momfuse {

DimensionMismatch::DimensionMismatch(const std::string& what, int w1, int h1, int w2, int h2)
    : std::invalid_argument(what + ": dimension mismatch (" + std::to_string(w1) + "x" + std::to_string(h1) +
                            " vs " + std::to_string(w2) + "x" + std::to_string(h2) + ")") {}

namespace {

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments that run to end of line.
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    // Returns -1 if no digits are present, -2 on overflow.
    long read_uint() {
        skip_separators();
        std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) return -2;
            ++pos_;
        }
        return pos_ == start ? -1 : value;
    }

    bool at_end() const { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const { return bytes_[pos_]; }
    void advance(std::size_t n = 1) { pos_ += n; }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

long header_field(HeaderReader& in, const char* name) {
    long v = in.read_uint();
    if (v == -1) {
        if (in.at_end()) throw PgmError(PgmErrorKind::MalformedHeader, std::string("pgm: header ends before ") + name);
        throw PgmError(PgmErrorKind::MalformedHeader, std::string("pgm: expected a number for ") + name);
    }
    if (v == -2) throw PgmError(PgmErrorKind::MalformedHeader, std::string("pgm: ") + name + " is too large");
    return v;
}

}  // namespace

ImageU8 load_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw PgmError(PgmErrorKind::BadMagic, "pgm: unsupported magic number (expected P2 or P5)");
    const bool binary = bytes[1] == '5';

    HeaderReader in(bytes);
    in.advance(2);
    if (!in.at_end() && !is_space(in.peek()) && in.peek() != '#')
        throw PgmError(PgmErrorKind::BadMagic, "pgm: unsupported magic number");

    const long width = header_field(in, "width");
    const long height = header_field(in, "height");
    const long maxval = header_field(in, "maxval");
    if (width == 0 || height == 0) throw PgmError(PgmErrorKind::ZeroDimension, "pgm: zero image dimension");
    if (maxval == 0 || maxval > 255)
        throw PgmError(PgmErrorKind::MaxvalOutOfRange, "pgm: maxval " + std::to_string(maxval) + " outside 1..255");
    if (width * height > (1L << 30)) throw PgmError(PgmErrorKind::MalformedHeader, "pgm: image too large");

    const auto count = static_cast<std::size_t>(width * height);
    std::vector<std::uint8_t> samples;
    samples.reserve(count);

    if (binary) {
        // Exactly one whitespace byte separates maxval from the raster.
        if (in.at_end() || !is_space(in.peek()))
            throw PgmError(PgmErrorKind::Truncated, "pgm: missing raster after header");
        in.advance();
        if (in.remaining() < count)
            throw PgmError(PgmErrorKind::Truncated, "pgm: truncated raster (" + std::to_string(in.remaining()) +
                                                        " of " + std::to_string(count) + " bytes)");
        auto first = bytes.begin() + static_cast<std::ptrdiff_t>(in.pos());
        samples.assign(first, first + static_cast<std::ptrdiff_t>(count));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            long v = in.read_uint();
            if (v == -1) {
                if (in.at_end())
                    throw PgmError(PgmErrorKind::Truncated, "pgm: truncated raster (" + std::to_string(i) + " of " +
                                                                std::to_string(count) + " samples)");
                throw PgmError(PgmErrorKind::MalformedHeader, "pgm: non-numeric sample");
            }
            if (v < 0 || v > maxval)
                throw PgmError(PgmErrorKind::SampleOutOfRange, "pgm: sample exceeds maxval");
            samples.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return ImageU8(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

std::vector<std::uint8_t> save_pgm(const ImageU8& img, bool binary) {
    std::string header = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    if (binary) {
        auto s = img.samples();
        out.insert(out.end(), s.begin(), s.end());
        return out;
    }
    for (int r = 0; r < img.height(); ++r) {
        auto row = img.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string tok = std::to_string(row[c]);
            out.insert(out.end(), tok.begin(), tok.end());
            out.push_back(c + 1 == row.size() ? '\n' : ' ');
        }
    }
    return out;
}

ImageU8 read_pgm_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw PgmError(PgmErrorKind::Io, "pgm: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
        return load_pgm(bytes);
    } catch (const PgmError& e) {
        throw PgmError(e.kind(), path + ": " + e.what());
    }
}

void write_pgm_file(const std::string& path, const ImageU8& img, bool binary) {
    auto bytes = save_pgm(img, binary);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PgmError(PgmErrorKind::Io, "pgm: cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw PgmError(PgmErrorKind::Io, "pgm: write failed for " + path);
}

ImageF widen(const ImageU8& img) {
    std::vector<double> out(img.samples().begin(), img.samples().end());
    return ImageF(img.width(), img.height(), std::move(out));
}

ImageF pad(const ImageF& img, int margin, BorderPolicy policy) {
    if (margin < 0) throw std::invalid_argument("pad: negative margin");
    switch (policy) {
        case BorderPolicy::Replicate:
            break;
    }
    const int w = img.width(), h = img.height();
    ImageF out(w + 2 * margin, h + 2 * margin);
    for (int r = 0; r < out.height(); ++r) {
        const auto src = img.row(std::clamp(r - margin, 0, h - 1));
        auto dst = out.row(r);
        std::fill(dst.begin(), dst.begin() + margin, src.front());
        std::copy(src.begin(), src.end(), dst.begin() + margin);
        std::fill(dst.begin() + margin + w, dst.end(), src.back());
    }
    return out;
}

ImageU8 quantize(const ImageF& img) {
    std::vector<std::uint8_t> out(img.size());
    auto in = img.samples();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!std::isfinite(in[i])) throw std::domain_error("quantize: non-finite sample");
        // std::round is half-away-from-zero.
        out[i] = static_cast<std::uint8_t>(std::round(std::clamp(in[i], 0.0, 255.0)));
    }
    return ImageU8(img.width(), img.height(), std::move(out));
}

}  // namespace momfuse
