#include "momfuse/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace momfuse {

namespace fs = std::filesystem;

std::vector<FusionMethod> parse_methods(const std::string& list) {
    std::vector<FusionMethod> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) continue;
        auto m = parse_method(tok);
        if (!m) throw UsageError("unknown fusion method '" + tok + "' (expected moment, average or pca)");
        if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
    if (out.empty()) throw UsageError("no fusion method given");
    return out;
}

std::vector<MethodOutcome> run_pair(const ImageU8& a, const ImageU8& b, const FusionConfig& cfg,
                                    const QabfConstants& k, std::span<const FusionMethod> methods) {
    require_same_shape(a, b, "run_pair");
    std::vector<MethodOutcome> out;
    out.reserve(methods.size());
    for (FusionMethod m : methods) {
        FusionResult fused = fuse(m, a, b, cfg);
        MetricsRecord rec = evaluate(a, b, fused.fused_u8, k);
        out.push_back({m, std::move(fused), rec});
    }
    return out;
}

std::vector<MethodOutcome> run_pair(const PairSpec& spec, const FusionConfig& cfg, const QabfConstants& k,
                                    std::span<const FusionMethod> methods) {
    const ImageU8 a = read_pgm_file(spec.path_a.string());
    const ImageU8 b = read_pgm_file(spec.path_b.string());
    return run_pair(a, b, cfg, k, methods);
}

BatchReport build_report(std::vector<ReportRow> rows, std::vector<SkippedPair> skipped) {
    BatchReport rep;
    std::sort(rows.begin(), rows.end(), [](const ReportRow& l, const ReportRow& r) {
        return std::tie(l.pair_id, l.method) < std::tie(r.pair_id, r.method);
    });
    std::sort(skipped.begin(), skipped.end(),
              [](const SkippedPair& l, const SkippedPair& r) { return std::tie(l.id, l.reason) < std::tie(r.id, r.reason); });

    std::map<std::string, MethodAggregate> agg;
    for (const auto& row : rows) {
        auto& a = agg[row.method];
        a.method = row.method;
        ++a.pairs;
        a.mim += row.metrics.mim_bits;
        a.sd += row.metrics.sd;
        a.entropy += row.metrics.entropy_bits;
        a.qabf += row.metrics.qabf;
    }
    for (auto& [name, a] : agg) {
        const double n = static_cast<double>(a.pairs);
        a.mim /= n;
        a.sd /= n;
        a.entropy /= n;
        a.qabf /= n;
        rep.aggregates.push_back(a);
    }
    rep.per_pair = std::move(rows);
    rep.skipped = std::move(skipped);
    return rep;
}

PairDiscovery discover_pairs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw PgmError(PgmErrorKind::Io, "not a directory: " + dir.string());

    std::map<std::string, std::pair<fs::path, fs::path>> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        constexpr std::string_view suffix_a = "_a.pgm", suffix_b = "_b.pgm";
        if (name.size() <= suffix_a.size()) continue;
        const std::string_view tail = std::string_view(name).substr(name.size() - suffix_a.size());
        const std::string id = name.substr(0, name.size() - suffix_a.size());
        if (tail == suffix_a)
            found[id].first = entry.path();
        else if (tail == suffix_b)
            found[id].second = entry.path();
    }

    PairDiscovery out;
    for (auto& [id, paths] : found) {
        if (paths.first.empty() || paths.second.empty()) {
            const fs::path& present = paths.first.empty() ? paths.second : paths.first;
            out.orphans.push_back({id, "orphan file without partner: " + present.filename().string()});
            continue;
        }
        out.pairs.push_back({id, paths.first, paths.second});
    }
    return out;
}

std::vector<PairSpec> read_manifest(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw PgmError(PgmErrorKind::Io, "cannot open manifest " + manifest.string());
    const fs::path base = manifest.parent_path();
    std::vector<PairSpec> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string id, a, b, extra;
        if (!(ls >> id) || id.front() == '#') continue;
        if (!(ls >> a >> b) || (ls >> extra))
            throw UsageError(manifest.string() + ":" + std::to_string(lineno) + ": expected 'id path_a path_b'");
        auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
        out.push_back({id, resolve(a), resolve(b)});
    }
    return out;
}

BatchReport run_batch(const std::vector<PairSpec>& pairs, const BatchOptions& opts,
                      std::vector<SkippedPair> pre_skipped) {
    if (pairs.empty()) throw EmptyBatchError("batch: no image pairs found");
    opts.fusion.validate();
    opts.qabf.validate();
    if (opts.methods.empty()) throw UsageError("batch: no fusion method given");

    struct Slot {
        std::vector<ReportRow> rows;
        std::optional<SkippedPair> skipped;
    };
    std::vector<Slot> slots(pairs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            const PairSpec& spec = pairs[i];
            try {
                for (auto& o : run_pair(spec, opts.fusion, opts.qabf, opts.methods))
                    slots[i].rows.push_back({spec.id, std::string(method_name(o.method)), o.metrics});
            } catch (const PgmError& e) {
                slots[i].rows.clear();
                slots[i].skipped = SkippedPair{spec.id, e.what()};
            } catch (const DimensionMismatch& e) {
                slots[i].rows.clear();
                slots[i].skipped = SkippedPair{spec.id, e.what()};
            }
        }
    };

    unsigned n_threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, pairs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }

    std::vector<ReportRow> rows;
    for (auto& s : slots) {
        if (s.skipped) pre_skipped.push_back(*s.skipped);
        for (auto& r : s.rows) rows.push_back(std::move(r));
    }
    if (rows.empty()) throw EmptyBatchError("batch: every pair failed to load");
    return build_report(std::move(rows), std::move(pre_skipped));
}

BatchReport run_batch(const fs::path& source, const BatchOptions& opts) {
    if (fs::is_directory(source)) {
        PairDiscovery d = discover_pairs(source);
        return run_batch(d.pairs, opts, std::move(d.orphans));
    }
    return run_batch(read_manifest(source), opts);
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string emit_report(const BatchReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out = "pair_id,method,mim,sd,entropy,qabf,degenerate\n";
        for (const auto& r : report.per_pair) {
            out += r.pair_id + "," + r.method + "," + format_number(r.metrics.mim_bits) + "," +
                   format_number(r.metrics.sd) + "," + format_number(r.metrics.entropy_bits) + "," +
                   format_number(r.metrics.qabf) + "," + (r.metrics.degenerate_qabf ? "true" : "false") + "\n";
        }
        return out;
    }

    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.per_pair) {
        j["rows"].push_back({{"pair_id", r.pair_id},
                             {"method", r.method},
                             {"mim", r.metrics.mim_bits},
                             {"sd", r.metrics.sd},
                             {"entropy", r.metrics.entropy_bits},
                             {"qabf", r.metrics.qabf},
                             {"degenerate", r.metrics.degenerate_qabf}});
    }
    j["aggregates"] = nlohmann::ordered_json::object();
    for (const auto& a : report.aggregates) {
        j["aggregates"][a.method] = {
            {"pairs", a.pairs}, {"mim", a.mim}, {"sd", a.sd}, {"entropy", a.entropy}, {"qabf", a.qabf}};
    }
    j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& s : report.skipped) j["skipped"].push_back({{"id", s.id}, {"reason", s.reason}});
    return j.dump(2) + "\n";
}

ImageU8 gaussian_blur(const ImageU8& img, double sigma) {
    if (!std::isfinite(sigma)) throw std::invalid_argument("gaussian_blur: sigma must be finite");
    if (sigma <= 0.0) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& t : taps) t /= total;

    const int w = img.width(), h = img.height();
    ImageF horiz(w, h);
    for (int r = 0; r < h; ++r) {
        const auto src = img.row(r);
        auto dst = horiz.row(r);
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += taps[static_cast<std::size_t>(i + radius)] * src[static_cast<std::size_t>(std::clamp(c + i, 0, w - 1))];
            dst[static_cast<std::size_t>(c)] = acc;
        }
    }
    ImageF out(w, h);
    for (int r = 0; r < h; ++r) {
        auto dst = out.row(r);
        for (int i = -radius; i <= radius; ++i) {
            const auto src = horiz.row(std::clamp(r + i, 0, h - 1));
            const double t = taps[static_cast<std::size_t>(i + radius)];
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += t * src[c];
        }
    }
    return quantize(out);
}

SyntheticPair generate_synthetic_pair(const ImageU8& base, int seam, double blur_sigma) {
    if (base.empty()) throw std::invalid_argument("synthetic pair: empty base image");
    if (seam <= 0 || seam >= base.width())
        throw std::invalid_argument("synthetic pair: seam must lie strictly inside the image width");

    const ImageU8 blurred = gaussian_blur(base, blur_sigma);
    SyntheticPair p{base, base, DecisionMap(base.width(), base.height(), Select::X), seam};
    for (int r = 0; r < base.height(); ++r) {
        for (int c = 0; c < base.width(); ++c) {
            if (c < seam) {
                p.a.at(r, c) = blurred.at(r, c);
                p.truth.at(r, c) = Select::Y;
            } else {
                p.b.at(r, c) = blurred.at(r, c);
            }
        }
    }
    return p;
}

namespace {

// Uniform in [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int below(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

}  // namespace

ImageU8 synthetic_base(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ImageF scene(width, height, 0.0);

    // A few large patches modulate how bright the speckle gets locally.
    const int patches = 4 + below(rng, 8);
    std::vector<std::array<double, 4>> patch(static_cast<std::size_t>(patches));
    for (auto& p : patch) p = {unit(rng) * height, unit(rng) * width, 8.0 + unit(rng) * width / 3.0, unit(rng)};

    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            if (unit(rng) >= 0.4) continue;
            double gain = 0.6;
            for (const auto& [pr, pc, rad, g] : patch)
                if ((r - pr) * (r - pr) + (c - pc) * (c - pc) <= rad * rad) gain = 0.6 + 0.4 * g;
            scene.at(r, c) = gain * (100.0 + 155.0 * unit(rng));
        }
    return quantize(scene);
}

std::vector<SyntheticPair> generate_synthetic_set(const SyntheticSetOptions& opts, const std::optional<ImageU8>& base) {
    if (opts.count < 1) throw std::invalid_argument("synthetic set: count must be >= 1");
    const int width = base ? base->width() : opts.width;
    const int height = base ? base->height() : opts.height;
    if (width < 2) throw std::invalid_argument("synthetic set: width must be >= 2");

    std::mt19937_64 rng(opts.seed);
    std::vector<SyntheticPair> out;
    out.reserve(static_cast<std::size_t>(opts.count));
    for (int i = 0; i < opts.count; ++i) {
        ImageU8 scene;
        if (base) {
            const int dr = below(rng, height), dc = below(rng, width);
            scene = ImageU8(width, height);
            for (int r = 0; r < height; ++r)
                for (int c = 0; c < width; ++c) scene.at(r, c) = base->at((r + dr) % height, (c + dc) % width);
        } else {
            scene = synthetic_base(width, height, rng());
        }
        const int seam = width >= 4 ? width / 4 + below(rng, std::max(1, width / 2)) : width / 2;
        out.push_back(generate_synthetic_pair(scene, std::clamp(seam, 1, width - 1), opts.sigma));
    }
    return out;
}

ImageU8 decision_to_image(const DecisionMap& d) {
    ImageU8 out(d.width(), d.height());
    auto src = d.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] == Select::X ? 255 : 0;
    return out;
}

void write_synthetic_set(const fs::path& dir, const std::vector<SyntheticPair>& pairs) {
    fs::create_directories(dir / "truth");
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw PgmError(PgmErrorKind::Io, "cannot write manifest in " + dir.string());
    manifest << "# id path_a path_b\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "pair_%03zu", i);
        const std::string sid(id);
        write_pgm_file((dir / (sid + "_a.pgm")).string(), pairs[i].a);
        write_pgm_file((dir / (sid + "_b.pgm")).string(), pairs[i].b);
        write_pgm_file((dir / "truth" / (sid + "_truth.pgm")).string(), decision_to_image(pairs[i].truth));
        manifest << sid << ' ' << sid << "_a.pgm " << sid << "_b.pgm\n";
    }
}

}  // namespace momfuse
