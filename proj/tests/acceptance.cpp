// Acceptance gate: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "momfuse/cli.hpp"
#include "momfuse/filtering.hpp"
#include "momfuse/fusion.hpp"
#include "momfuse/harness.hpp"
#include "momfuse/metrics.hpp"
#include "oracles.hpp"

using namespace momfuse;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ImageF scaled(const ImageF& img, double s) {
    ImageF out = img;
    for (double& v : out.samples()) v *= s;
    return out;
}

DecisionMap decisions_from_float(const ImageF& x, const ImageF& y, const FusionConfig& cfg = {}) {
    const Kernel3 k = highpass_mask(cfg.mask_center);
    return decision_map(local_moment_map(convolve3(x, k), cfg), local_moment_map(convolve3(y, k), cfg));
}

// Shared by criteria 10 to 12.
struct SyntheticScores {
    std::vector<SyntheticPair> set;
    std::vector<MetricsRecord> moment, average;
    std::vector<DecisionMap> decisions;
    double seconds = 0.0;
};

const SyntheticScores& synthetic_scores() {
    static const SyntheticScores s = [] {
        SyntheticScores out;
        const auto t0 = Clock::now();
        SyntheticSetOptions opts;
        opts.count = 20;
        opts.sigma = 2.0;
        opts.seed = 1;
        opts.width = opts.height = 256;
        out.set = generate_synthetic_set(opts);
        for (const auto& p : out.set) {
            const FusionResult m = fuse_moment(p.a, p.b);
            const FusionResult a = fuse_average(p.a, p.b);
            out.moment.push_back(evaluate(p.a, p.b, m.fused_u8));
            out.average.push_back(evaluate(p.a, p.b, a.fused_u8));
            out.decisions.push_back(*m.decision);
        }
        out.seconds = seconds_since(t0);
        return out;
    }();
    return s;
}

Outcome convolution_oracle() {
    const auto t0 = Clock::now();
    std::mt19937 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int w = 5 + int(rng() % 60), h = 5 + int(rng() % 60);
        const ImageU8 img = oracle::random_u8(w, h, rng);
        const ImageF got = preprocess(img);
        const ImageF ref = oracle::naive_convolve(widen(img), highpass_mask());
        for (std::size_t j = 0; j < got.size(); ++j)
            worst = std::max(worst, std::abs(got.samples()[j] - ref.samples()[j]));
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-12 && t < 5.0, fmt("max |diff| %.3g over 50 images, %.2f s", worst, t)};
}

Outcome moment_oracle() {
    const auto t0 = Clock::now();
    std::mt19937 rng(202);
    double worst = 0.0;
    for (auto [p, q] : {std::pair{0, 0}, {1, 1}, {2, 1}}) {
        FusionConfig cfg;
        cfg.moment_order_p = p;
        cfg.moment_order_q = q;
        for (int i = 0; i < 20; ++i) {
            const int w = 1 + int(rng() % 64), h = 1 + int(rng() % 64);
            const ImageF img = oracle::random_f(w, h, rng);
            const MomentMap got = local_moment_map(img, cfg);
            const ImageF ref = oracle::naive_moment(img, p, q, cfg.window, true);
            for (std::size_t j = 0; j < got.size(); ++j)
                worst = std::max(worst, std::abs(got.samples()[j] - ref.samples()[j]));
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-9 && t < 5.0, fmt("max |diff| %.3g over 60 maps, %.2f s", worst, t)};
}

Outcome decision_semantics() {
    std::mt19937 rng(303);
    std::uniform_int_distribution<int> small(0, 20);
    std::uniform_real_distribution<double> real(0.0, 1e4);
    long pixels = 0, mismatches = 0, ties = 0;
    while (pixels < 1'000'000) {
        const int w = 64 + int(rng() % 192), h = 64 + int(rng() % 192);
        MomentMap mx(w, h), my(w, h);
        for (std::size_t i = 0; i < mx.size(); ++i) {
            switch (rng() % 3) {
            case 0:  // forced tie
                mx.samples()[i] = my.samples()[i] = real(rng);
                break;
            case 1:  // coarse values, frequent accidental ties
                mx.samples()[i] = small(rng);
                my.samples()[i] = small(rng);
                break;
            default:
                mx.samples()[i] = real(rng);
                my.samples()[i] = real(rng);
            }
        }
        const DecisionMap d = decision_map(mx, my);
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const Select want = mx.samples()[i] >= my.samples()[i] ? Select::X : Select::Y;
            mismatches += d.samples()[i] != want;
            ties += mx.samples()[i] == my.samples()[i];
        }
        pixels += static_cast<long>(mx.size());
    }
    return {mismatches == 0, fmt("%ld mismatches over %ld pixels (%ld ties)", mismatches, pixels, ties)};
}

Outcome selection_property() {
    std::mt19937 rng(404);
    long bad = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
        const int w = 3 + int(rng() % 40), h = 3 + int(rng() % 40);
        const ImageU8 x = oracle::random_u8(w, h, rng), y = oracle::random_u8(w, h, rng);
        const FusionResult r = fuse_moment(x, y);
        const ImageF fx = preprocess(x), fy = preprocess(y);
        for (std::size_t j = 0; j < r.fused_f.size(); ++j) {
            const double v = r.fused_f.samples()[j];
            bad += v != fx.samples()[j] && v != fy.samples()[j];
            ++total;
        }
    }
    return {bad == 0, fmt("%ld of %ld fused samples not taken from a source", bad, total)};
}

Outcome idempotence() {
    std::mt19937 rng(505);
    int failures = 0;
    for (int i = 0; i < 20; ++i) {
        const ImageU8 x = oracle::random_u8(4 + int(rng() % 50), 4 + int(rng() % 50), rng);
        const FusionResult r = fuse_moment(x, x);
        bool all_x = true;
        for (Select s : r.decision->samples()) all_x = all_x && s == Select::X;
        failures += !(r.fused_f == preprocess(x)) || !all_x;
    }
    return {failures == 0, fmt("%d of 20 images failed", failures)};
}

Outcome scaling_invariance() {
    std::mt19937 rng(606);
    long differing = 0, total = 0;
    for (int i = 0; i < 20; ++i) {
        const int w = 8 + int(rng() % 56), h = 8 + int(rng() % 56);
        const ImageF x = widen(oracle::random_u8(w, h, rng)), y = widen(oracle::random_u8(w, h, rng));
        const DecisionMap ref = decisions_from_float(x, y);
        for (double s : {0.5, 2.0}) {
            const DecisionMap d = decisions_from_float(scaled(x, s), scaled(y, s));
            for (std::size_t j = 0; j < d.size(); ++j) differing += d.samples()[j] != ref.samples()[j];
            total += static_cast<long>(d.size());
        }
    }
    return {differing == 0, fmt("%ld of %ld decisions changed under scaling", differing, total)};
}

Outcome metric_identities() {
    std::vector<std::string> failed;
    const ImageU8 constant(32, 32, std::uint8_t{77});
    if (entropy(constant) != 0.0) failed.push_back("entropy(const)");

    ImageU8 uniform(256, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 256; ++c) uniform.at(r, c) = static_cast<std::uint8_t>(c);
    if (std::abs(entropy(uniform) - 8.0) > 1e-12) failed.push_back("entropy(uniform)");

    ImageU8 halves(16, 16, std::uint8_t{0});
    for (int r = 8; r < 16; ++r)
        for (int c = 0; c < 16; ++c) halves.at(r, c) = 255;
    if (std::abs(std_dev(halves) - 127.5) > 1e-12) failed.push_back("sd(halves)");

    std::mt19937 rng(707);
    const ImageU8 x = oracle::random_u8(40, 30, rng);
    if (std::abs(mutual_information(x, x) - entropy(x)) > 1e-9) failed.push_back("MI(X,X)");
    if (std::abs(mim(x, x, x) - 2.0 * entropy(x)) > 1e-9) failed.push_back("MIM(A,A,A)");

    std::string detail = failed.empty() ? "all five identities hold" : "failed:";
    for (const auto& f : failed) detail += " " + f;
    return {failed.empty(), detail};
}

Outcome mi_oracle() {
    std::mt19937 rng(808);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        // Narrow ranges on some pairs so the joint table has repeated cells.
        const int hi = i % 2 ? 255 : 7;
        const ImageU8 a = oracle::random_u8(8, 8, rng, 0, hi), f = oracle::random_u8(8, 8, rng, 0, hi);
        worst = std::max(worst, std::abs(mutual_information(a, f) - oracle::brute_mi(a, f)));
    }
    return {worst <= 1e-9, fmt("max |diff| %.3g over 50 pairs", worst)};
}

Outcome qabf_range() {
    std::mt19937 rng(909);
    int out_of_range = 0;
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int top = i % 3 == 0 ? 3 : 255;
        const ImageU8 a = oracle::random_u8(8, 8, rng, 0, top), b = oracle::random_u8(8, 8, rng, 0, top),
                      f = oracle::random_u8(8, 8, rng, 0, top);
        const double q = qabf(a, b, f).value;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        out_of_range += !(q >= 0.0 && q <= 1.0);
    }
    const ImageU8 flat(8, 8, std::uint8_t{50});
    const QabfScore degenerate = qabf(flat, flat, flat);

    ImageU8 ramp(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) ramp.at(r, c) = static_cast<std::uint8_t>(10 * c);
    const double q_ramp = qabf(ramp, ramp, ramp).value;
    const QabfConstants k;
    const double q_max = k.gamma_g / (1.0 + std::exp(k.kappa_g * (1.0 - k.sigma_g))) * k.gamma_a /
                         (1.0 + std::exp(k.kappa_a * (1.0 - k.sigma_a)));

    const bool ok = out_of_range == 0 && degenerate.value == 0.0 && degenerate.degenerate &&
                    std::abs(q_ramp - q_max) <= 1e-9;
    return {ok, fmt("range [%.4f, %.4f], %d out of [0,1]; constant -> (%g, %s); ramp %.12f vs q_max %.12f", lo, hi,
                    out_of_range, degenerate.value, degenerate.degenerate ? "degenerate" : "not degenerate", q_ramp,
                    q_max)};
}

Outcome qabf_ordering() {
    const SyntheticScores& s = synthetic_scores();
    double mean_m = 0.0, mean_a = 0.0;
    int wins = 0;
    const int n = static_cast<int>(s.set.size());
    for (int i = 0; i < n; ++i) {
        mean_m += s.moment[i].qabf / n;
        mean_a += s.average[i].qabf / n;
        wins += s.moment[i].qabf > s.average[i].qabf;
    }
    const bool ok = n >= 20 && mean_m > mean_a && wins >= 0.8 * n && s.seconds < 30.0;
    return {ok, fmt("mean Q^AB/F moment %.4f vs average %.4f, moment wins %d/%d, %.2f s", mean_m, mean_a, wins, n,
                    s.seconds)};
}

Outcome contrast_and_mim() {
    const SyntheticScores& s = synthetic_scores();
    int sd_wins = 0, mim_wins = 0;
    double sd_m = 0.0, sd_a = 0.0, mim_m = 0.0, mim_a = 0.0;
    const int n = static_cast<int>(s.set.size());
    for (int i = 0; i < n; ++i) {
        sd_wins += s.moment[i].sd > s.average[i].sd;
        mim_wins += s.moment[i].mim_bits > s.average[i].mim_bits;
        sd_m += s.moment[i].sd / n;
        sd_a += s.average[i].sd / n;
        mim_m += s.moment[i].mim_bits / n;
        mim_a += s.average[i].mim_bits / n;
    }
    const bool ok = sd_wins >= 0.8 * n && mim_wins >= 0.8 * n;
    return {ok, fmt("SD wins %d/%d (mean %.2f vs %.2f), MIM wins %d/%d (mean %.3f vs %.3f bits)", sd_wins, n, sd_m,
                    sd_a, mim_wins, n, mim_m, mim_a)};
}

Outcome decision_accuracy() {
    const SyntheticScores& s = synthetic_scores();
    long hits = 0, total = 0;
    double worst_pair = 1.0;
    for (std::size_t i = 0; i < s.set.size(); ++i) {
        const SyntheticPair& p = s.set[i];
        long pair_hits = 0, pair_total = 0;
        for (int r = 0; r < p.truth.height(); ++r)
            for (int c = 0; c < p.truth.width(); ++c) {
                if (std::abs(c - p.seam) <= 3) continue;
                pair_hits += s.decisions[i].at(r, c) == p.truth.at(r, c);
                ++pair_total;
            }
        worst_pair = std::min(worst_pair, double(pair_hits) / double(pair_total));
        hits += pair_hits;
        total += pair_total;
    }
    const double acc = double(hits) / double(total);
    return {acc >= 0.9 && worst_pair >= 0.9, fmt("accuracy %.4f overall, worst pair %.4f", acc, worst_pair)};
}

Outcome performance() {
    const SyntheticPair p = generate_synthetic_pair(synthetic_base(512, 512, 13), 256, 2.0);
    const auto t0 = Clock::now();
    const FusionResult r = fuse_moment(p.a, p.b);
    const MetricsRecord m = evaluate(p.a, p.b, r.fused_u8);
    const double t = seconds_since(t0);
    return {t < 1.0, fmt("512x512 fuse + four metrics in %.3f s (qabf %.4f)", t, m.qabf)};
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "momfuse");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome batch_determinism() {
    const fs::path root = fs::temp_directory_path() / ("momfuse_accept_" + std::to_string(std::random_device{}()));
    std::string reports[2];
    int codes = 0;
    for (int i = 0; i < 2; ++i) {
        const fs::path dir = root / ("run" + std::to_string(i));
        codes |= run({"synth", "--out-dir", (dir / "set").string(), "--pairs", "20", "--sigma", "2", "--seed", "1"});
        codes |= run({"batch", "--dir", (dir / "set").string(), "--seed", "1", "--threads", i == 0 ? "1" : "4",
                      "--report", (dir / "report.csv").string()});
        reports[i] = slurp(dir / "report.csv");
    }
    fs::remove_all(root);
    const bool ok = codes == 0 && !reports[0].empty() && reports[0] == reports[1];
    return {ok, fmt("exit codes %s, reports %zu and %zu bytes, %s", codes == 0 ? "ok" : "non-zero", reports[0].size(),
                    reports[1].size(), reports[0] == reports[1] ? "identical" : "different")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"convolution oracle", convolution_oracle},
        {"moment oracle", moment_oracle},
        {"decision rule", decision_semantics},
        {"selection property", selection_property},
        {"idempotence", idempotence},
        {"scaling invariance", scaling_invariance},
        {"metric identities", metric_identities},
        {"mutual information oracle", mi_oracle},
        {"Q^AB/F range and degeneracy", qabf_range},
        {"Q^AB/F ordering vs averaging", qabf_ordering},
        {"SD and MIM vs averaging", contrast_and_mim},
        {"decision accuracy", decision_accuracy},
        {"performance", performance},
        {"batch determinism", batch_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
