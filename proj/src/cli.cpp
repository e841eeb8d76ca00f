#include "momfuse/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "momfuse/harness.hpp"

namespace momfuse {

namespace {

struct FusionFlags {
    std::string source = "filtered";
    bool signed_moments = false;
    FusionConfig cfg;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--source", source, "Where fused pixels come from")
            ->check(CLI::IsMember({"filtered", "original"}))
            ->capture_default_str();
        cmd->add_option("--p", cfg.moment_order_p, "Moment exponent on the local row index")
            ->check(CLI::Range(0, 4))
            ->capture_default_str();
        cmd->add_option("--q", cfg.moment_order_q, "Moment exponent on the local column index")
            ->check(CLI::Range(0, 4))
            ->capture_default_str();
        cmd->add_option("--window", cfg.window, "Moment window side (odd)")->capture_default_str();
        cmd->add_option("--center", cfg.mask_center, "Center coefficient of the preprocessing mask")
            ->capture_default_str();
        cmd->add_flag("--signed-moments", signed_moments, "Compute moments on signed filter output");
    }

    FusionConfig resolve() const {
        FusionConfig out = cfg;
        out.output_source = source == "original" ? OutputSource::Original : OutputSource::Filtered;
        out.use_magnitude = !signed_moments;
        out.validate();
        return out;
    }
};

void add_qabf_flags(CLI::App* cmd, QabfConstants& k) {
    cmd->add_option("--qabf-gamma-g", k.gamma_g)->capture_default_str();
    cmd->add_option("--qabf-kappa-g", k.kappa_g)->capture_default_str();
    cmd->add_option("--qabf-sigma-g", k.sigma_g)->capture_default_str();
    cmd->add_option("--qabf-gamma-a", k.gamma_a)->capture_default_str();
    cmd->add_option("--qabf-kappa-a", k.kappa_a)->capture_default_str();
    cmd->add_option("--qabf-sigma-a", k.sigma_a)->capture_default_str();
    cmd->add_option("--qabf-L", k.L, "Edge-strength weight exponent")->capture_default_str();
}

// Flat key=value files carry no section; file every bare key under the
// subcommand being run so "method=average" reaches `fuse --method`.
class FlatConfig : public CLI::ConfigINI {
public:
    explicit FlatConfig(std::string section) : section_(std::move(section)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigINI::from_config(input);
        for (auto& item : items)
            if (item.parents.empty() || item.parents == std::vector<std::string>{"default"})
                item.parents = {section_};
        return items;
    }

private:
    std::string section_;
};

std::string first_subcommand(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "fuse" || arg == "eval" || arg == "batch" || arg == "synth") return arg;
    }
    return {};
}

nlohmann::ordered_json metrics_json(const MetricsRecord& m) {
    return {{"mim", m.mim_bits},
            {"sd", m.sd},
            {"entropy", m.entropy_bits},
            {"qabf", m.qabf},
            {"degenerate", m.degenerate_qabf}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PgmError(PgmErrorKind::Io, "cannot write " + path);
    f << text;
    if (!f) throw PgmError(PgmErrorKind::Io, "write failed for " + path);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moment-based multi-sensor image fusion and fusion-quality metrics", "momfuse"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file with defaults for any flag");
    app.config_formatter(std::make_shared<FlatConfig>(first_subcommand(argc, argv)));
    app.fallthrough();

    // fuse
    std::string in_a, in_b, out_path, dump_decision, method = "moment";
    bool ascii = false;
    FusionFlags fuse_flags;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a registered PGM pair");
    fuse_cmd->add_option("--in-a", in_a, "First source PGM")->required();
    fuse_cmd->add_option("--in-b", in_b, "Second source PGM")->required();
    fuse_cmd->add_option("--out", out_path, "Fused PGM")->required();
    fuse_cmd->add_option("--method", method)->check(CLI::IsMember({"moment", "average", "pca"}))->capture_default_str();
    fuse_cmd->add_option("--dump-decision", dump_decision, "Write the decision map (255 = A, 0 = B)");
    fuse_cmd->add_flag("--ascii", ascii, "Write plain (P2) PGM");
    fuse_flags.add_to(fuse_cmd);

    // eval
    std::string fused_path;
    bool as_json = false;
    QabfConstants eval_k;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a fused image against its sources");
    eval_cmd->add_option("--in-a", in_a)->required();
    eval_cmd->add_option("--in-b", in_b)->required();
    eval_cmd->add_option("--fused", fused_path)->required();
    eval_cmd->add_flag("--json", as_json);
    add_qabf_flags(eval_cmd, eval_k);

    // batch
    std::string dir, manifest, methods = "moment,average,pca", report_path, format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    FusionFlags batch_flags;
    QabfConstants batch_k;
    auto* batch_cmd = app.add_subcommand("batch", "Fuse and evaluate a collection of pairs");
    auto* dir_opt = batch_cmd->add_option("--dir", dir, "Directory of <id>_a.pgm / <id>_b.pgm files");
    auto* manifest_opt = batch_cmd->add_option("--manifest", manifest, "Manifest of 'id path_a path_b' lines");
    dir_opt->excludes(manifest_opt);
    manifest_opt->excludes(dir_opt);
    batch_cmd->add_option("--methods", methods)->capture_default_str();
    batch_cmd->add_option("--report", report_path, "Report file ('-' for stdout)")->required();
    batch_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    batch_cmd->add_option("--seed", seed, "Accepted for symmetry with synth; batch itself is deterministic");
    batch_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    batch_flags.add_to(batch_cmd);
    add_qabf_flags(batch_cmd, batch_k);

    // synth
    std::string base_path, out_dir;
    SyntheticSetOptions synth_opts;
    auto* synth_cmd = app.add_subcommand("synth", "Generate complementary-blur test pairs");
    synth_cmd->add_option("--base", base_path, "Base PGM (a random scene is generated when omitted)");
    synth_cmd->add_option("--out-dir", out_dir)->required();
    synth_cmd->add_option("--pairs", synth_opts.count)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--sigma", synth_opts.sigma)->check(CLI::NonNegativeNumber)->capture_default_str();
    synth_cmd->add_option("--seed", synth_opts.seed)->capture_default_str();
    synth_cmd->add_option("--width", synth_opts.width)->check(CLI::Range(2, 1 << 15))->capture_default_str();
    synth_cmd->add_option("--height", synth_opts.height)->check(CLI::Range(1, 1 << 15))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fuse_cmd->parsed()) {
            const FusionConfig cfg = fuse_flags.resolve();
            const ImageU8 a = read_pgm_file(in_a);
            const ImageU8 b = read_pgm_file(in_b);
            const FusionResult res = fuse(*parse_method(method), a, b, cfg);
            if (!dump_decision.empty()) {
                if (!res.decision) throw UsageError("--dump-decision needs --method moment");
                write_pgm_file(dump_decision, decision_to_image(*res.decision), !ascii);
            }
            write_pgm_file(out_path, res.fused_u8, !ascii);
            if (res.pca && res.pca->degenerate)
                err << "warning: degenerate covariance, PCA fell back to equal weights\n";
        } else if (eval_cmd->parsed()) {
            const ImageU8 a = read_pgm_file(in_a);
            const ImageU8 b = read_pgm_file(in_b);
            const ImageU8 f = read_pgm_file(fused_path);
            const MetricsRecord m = evaluate(a, b, f, eval_k);
            if (as_json) {
                out << metrics_json(m).dump(2) << "\n";
            } else {
                out << "mim " << format_number(m.mim_bits) << "\n"
                    << "sd " << format_number(m.sd) << "\n"
                    << "entropy " << format_number(m.entropy_bits) << "\n"
                    << "qabf " << format_number(m.qabf) << (m.degenerate_qabf ? " (degenerate)" : "") << "\n";
            }
        } else if (batch_cmd->parsed()) {
            if (dir.empty() == manifest.empty()) throw UsageError("batch needs exactly one of --dir or --manifest");
            BatchOptions opts;
            opts.fusion = batch_flags.resolve();
            opts.qabf = batch_k;
            opts.methods = parse_methods(methods);
            opts.threads = threads;
            const BatchReport rep = run_batch(dir.empty() ? manifest : dir, opts);
            const std::string text = emit_report(rep, format == "json" ? ReportFormat::Json : ReportFormat::Csv);
            if (report_path == "-")
                out << text;
            else
                write_text_file(report_path, text);
            for (const auto& s : rep.skipped) err << "skipped " << s.id << ": " << s.reason << "\n";
        } else if (synth_cmd->parsed()) {
            std::optional<ImageU8> base;
            if (!base_path.empty()) base = read_pgm_file(base_path);
            write_synthetic_set(out_dir, generate_synthetic_set(synth_opts, base));
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EmptyBatchError& e) {
        err << "error: " << e.what() << "\n";
        return kExitEmptyBatch;
    } catch (const PgmError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace momfuse
