#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "momfuse/fusion.hpp"
#include "momfuse/metrics.hpp"

namespace momfuse {

/// Bad user input that is not a data problem (unknown method name, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyBatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PairSpec {
    std::string id;
    std::filesystem::path path_a;
    std::filesystem::path path_b;
};

/// Parses a comma-separated method list ("moment,average,pca"). Duplicates
/// are dropped; the result is in first-seen order.
std::vector<FusionMethod> parse_methods(const std::string& list);

struct MethodOutcome {
    FusionMethod method;
    FusionResult fusion;
    MetricsRecord metrics;
};

std::vector<MethodOutcome> run_pair(const ImageU8& a, const ImageU8& b, const FusionConfig& cfg,
                                    const QabfConstants& k, std::span<const FusionMethod> methods);
std::vector<MethodOutcome> run_pair(const PairSpec& spec, const FusionConfig& cfg, const QabfConstants& k,
                                    std::span<const FusionMethod> methods);

struct ReportRow {
    std::string pair_id;
    std::string method;
    MetricsRecord metrics;
};

struct MethodAggregate {
    std::string method;
    std::size_t pairs = 0;
    double mim = 0.0;
    double sd = 0.0;
    double entropy = 0.0;
    double qabf = 0.0;
};

struct SkippedPair {
    std::string id;
    std::string reason;
};

struct BatchReport {
    std::vector<ReportRow> per_pair;          // sorted by (pair_id, method)
    std::vector<MethodAggregate> aggregates;  // sorted by method
    std::vector<SkippedPair> skipped;         // sorted by id
};

/// Sorts rows and skipped entries and computes per-method means.
BatchReport build_report(std::vector<ReportRow> rows, std::vector<SkippedPair> skipped = {});

struct PairDiscovery {
    std::vector<PairSpec> pairs;
    std::vector<SkippedPair> orphans;
};

/// Pairs `<id>_a.pgm` with `<id>_b.pgm` in `dir` (non-recursive). A file
/// with no partner is reported as an orphan.
PairDiscovery discover_pairs(const std::filesystem::path& dir);

/// Manifest lines are `id path_a path_b`, whitespace separated. Blank lines
/// and lines starting with '#' are ignored. Relative paths resolve against
/// the manifest's directory.
std::vector<PairSpec> read_manifest(const std::filesystem::path& manifest);

struct BatchOptions {
    FusionConfig fusion;
    QabfConstants qabf;
    std::vector<FusionMethod> methods{FusionMethod::Moment, FusionMethod::Average, FusionMethod::Pca};
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Runs every pair; pairs that fail to decode or mismatch in size go to
/// `skipped`. Throws EmptyBatchError when no pair could be evaluated.
BatchReport run_batch(const std::vector<PairSpec>& pairs, const BatchOptions& opts,
                      std::vector<SkippedPair> pre_skipped = {});

/// `source` is either a directory (naming convention) or a manifest file.
BatchReport run_batch(const std::filesystem::path& source, const BatchOptions& opts);

enum class ReportFormat { Csv, Json };

std::string emit_report(const BatchReport& report, ReportFormat format);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_number(double v);

// Synthetic complementary-blur pairs.

/// Separable Gaussian blur (radius ceil(3 sigma), replicate border). sigma
/// <= 0 returns the input unchanged.
ImageU8 gaussian_blur(const ImageU8& img, double sigma);

struct SyntheticPair {
    ImageU8 a;  // blurred left of the seam
    ImageU8 b;  // blurred from the seam rightwards
    DecisionMap truth;
    int seam = 0;
};

SyntheticPair generate_synthetic_pair(const ImageU8& base, int seam, double blur_sigma);

/// Random bright speckle on a black bed, lit at about 40% of pixels, so blur
/// changes the neighbourhood of every pixel.
ImageU8 synthetic_base(int width, int height, std::uint64_t seed);

struct SyntheticSetOptions {
    int count = 20;
    double sigma = 2.0;
    std::uint64_t seed = 1;
    int width = 256;   // used when no base image is supplied
    int height = 256;
};

/// Builds `count` pairs. With a base image every pair uses a random
/// circular shift of it; without one every pair gets a fresh synthetic
/// scene. Seams are drawn from the middle half of the width.
std::vector<SyntheticPair> generate_synthetic_set(const SyntheticSetOptions& opts,
                                                  const std::optional<ImageU8>& base = std::nullopt);

/// Writes `<id>_a.pgm`, `<id>_b.pgm`, `truth/<id>_truth.pgm` and a
/// manifest.txt into `dir`. Ids are pair_000, pair_001, ...
void write_synthetic_set(const std::filesystem::path& dir, const std::vector<SyntheticPair>& pairs);

/// 255 where X is selected, 0 where Y is.
ImageU8 decision_to_image(const DecisionMap& d);

}  // namespace momfuse
