#pragma once

// The `planforge` command line. run() is the whole program; main() only wires
// it to the standard streams so tests can drive it in-process.
//
// Exit codes: 0 success, 1 domain error ("error: <Code>: <message>"),
// 2 usage error (message plus usage text).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "planforge/boundary.hpp"
#include "planforge/compliance.hpp"
#include "planforge/config.hpp"
#include "planforge/constraints_io.hpp"
#include "planforge/difflab/checkpoint.hpp"
#include "planforge/difflab/embedding.hpp"
#include "planforge/feature_io.hpp"
#include "planforge/graph.hpp"
#include "planforge/graph_io.hpp"
#include "planforge/metrics.hpp"
#include "planforge/png_io.hpp"
#include "planforge/prompt.hpp"
#include "planforge/raster.hpp"

namespace planforge::cli {

namespace fs = std::filesystem;

namespace detail {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Io {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

inline std::string read_text(const std::string& path, Io& io) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(io.in), {});
    return features::detail::slurp(path);
}

inline void write_text(const std::string& path, const std::string& text, Io& io) {
    if (path.empty() || path == "-")
        io.out << text;
    else
        features::detail::spit(path, text);
}

// A directory expands to its regular files with one of `exts`, sorted by name;
// anything else is taken as a single file.
inline std::vector<fs::path> inputs(const std::string& arg, std::initializer_list<std::string_view> exts) {
    if (arg == "-" || !fs::is_directory(arg)) return {fs::path(arg)};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(arg)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (std::find(exts.begin(), exts.end(), ext) != exts.end()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("EmptyInput", "no input files in " + arg);
    return files;
}

// Runs `each(input, output)` over one file or a directory. With a directory
// input the output must name a directory; files keep their stem and take
// `out_ext`.
template <typename F>
void for_each_input(const std::string& in, const std::string& out, std::initializer_list<std::string_view> exts,
                    const std::string& out_ext, F&& each) {
    const bool batch = in != "-" && fs::is_directory(in);
    if (!batch) return each(fs::path(in), out);
    if (out.empty() || out == "-") throw UsageError("a directory input needs --out <directory>");
    fs::create_directories(out);
    for (const auto& p : inputs(in, exts)) each(p, (fs::path(out) / p.stem()).string() + out_ext);
}

inline RasterPlan read_plan(const fs::path& p) { return decode_plan(png::read(p)); }

inline std::string json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "\"Infinite\"" : "\"-Infinite\"";
    return jsonutil::Json(v).dump();
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    using detail::Io;
    Io io{in, out, err};
    PipelineConfig cfg;
    std::vector<std::pair<std::string, std::string>> overrides;

    CLI::App app{"Floor-plan dataset tooling: preprocessing, knowledge graphs, prompts, compliance, "
                 "edge maps, metrics and a small diffusion lab.",
                 "planforge"};
    app.require_subcommand(0, 1);
    std::string config_path;
    bool show_config = false;
    app.add_option("--config", config_path, "key = value config file (default: $PLANFORGE_CONFIG)");
    app.add_flag("--show-config", show_config, "print the effective configuration and exit");

    // A flag that overrides a config key; values are checked after parsing.
    auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        return sub->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
    };
    auto bind_flag = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        return sub->add_flag_callback(flag, [&overrides, key] { overrides.emplace_back(key, "true"); }, help);
    };

    // preprocess
    std::string pre_in, pre_out;
    bool pre_recolor = false;
    auto* pre = app.add_subcommand("preprocess", "decode an RGBA plan, upsample it, write the result");
    pre->add_option("input", pre_in, "plan PNG or directory")->required();
    pre->add_option("--out", pre_out, "output PNG or directory")->required();
    bind(pre, "--factor", "upsample_factor", "upsample factor");
    pre->add_flag("--recolor", pre_recolor, "write the color rendering instead of the 4-channel plan");

    // extract-graph
    std::string ex_in, ex_out = "-";
    auto* ex = app.add_subcommand("extract-graph", "extract the room knowledge graph of a plan");
    ex->add_option("input", ex_in, "plan PNG or directory")->required();
    ex->add_option("--out", ex_out, "graph JSON (default stdout) or directory");
    bind(ex, "--dilation", "dilation", "bbox dilation in pixels");
    bool ex_upsampled = false;
    ex->add_flag("--upsampled", ex_upsampled, "input came from preprocess: scale dilation by upsample_factor");

    // emit-prompt
    std::string em_in = "-", em_out = "-", em_sections = "counts,areas,connections";
    auto* em = app.add_subcommand("emit-prompt", "write the prompt text of a graph");
    em->add_option("input,--in", em_in, "graph JSON, directory, or - for stdin");
    em->add_option("--out", em_out, "prompt file (default stdout) or directory");
    em->add_option("--sections", em_sections, "comma list of counts, areas, connections");
    bind(em, "--area-divisor", "area_divisor", "pixels per area unit at base resolution");

    // parse-prompt
    std::string pp_in = "-", pp_out = "-";
    auto* pp = app.add_subcommand("parse-prompt", "parse prompt text into a constraint document");
    pp->add_option("input,--in", pp_in, "prompt file or - for stdin");
    pp->add_option("--out", pp_out, "constraint JSON (default stdout)");

    // check
    std::string ck_graph, ck_constraints, ck_prompt, ck_plan, ck_out = "-";
    bool ck_strict = false;
    auto* ck = app.add_subcommand("check", "check a graph against constraints");
    ck->add_option("--graph", ck_graph, "graph JSON or - for stdin")->required();
    auto* ck_c = ck->add_option("--constraints", ck_constraints, "constraint JSON");
    auto* ck_p = ck->add_option("--prompt", ck_prompt, "prompt text file");
    ck_c->excludes(ck_p);
    ck->add_option("--plan", ck_plan, "plan PNG of the graph (enables compactness)");
    ck->add_option("--out", ck_out, "report JSON (default stdout)");
    ck->add_flag("--strict", ck_strict, "exit 1 when an applicable rule fails");
    bind(ck, "--area-divisor", "area_divisor", "pixels per area unit at base resolution");
    bind(ck, "--tolerance", "compliance.area_tolerance", "relative area tolerance");
    bind(ck, "--norms", "compliance.norms", "adjacency norms such as living-kitchen, or none");

    // canny
    std::string cn_in, cn_out, cn_source = "plan";
    auto* cn = app.add_subcommand("canny", "edge map of a plan boundary or an image");
    cn->add_option("input", cn_in, "PNG or directory")->required();
    cn->add_option("--out", cn_out, "edge PNG or directory")->required();
    cn->add_option("--source", cn_source, "plan (boundary of an RGBA plan) or image (luminance)")
        ->check(CLI::IsMember({"plan", "image"}));
    bind(cn, "--sigma", "canny.sigma", "Gaussian sigma");
    bind(cn, "--low", "canny.low", "low threshold (fraction of max gradient)");
    bind(cn, "--high", "canny.high", "high threshold (fraction of max gradient)");

    // eval
    std::string ev_gen, ev_ref, ev_gen_feat, ev_ref_feat, ev_gen_layers, ev_ref_layers, ev_out = "-";
    auto* ev = app.add_subcommand("eval", "PSNR, SSIM, LPIPS and FID over image pairs");
    ev->add_option("--generated", ev_gen, "generated PNG or directory")->required();
    ev->add_option("--reference", ev_ref, "reference PNG or directory")->required();
    auto* gf = ev->add_option("--generated-features", ev_gen_feat, "feature matrix of the generated set");
    auto* rf = ev->add_option("--reference-features", ev_ref_feat, "feature matrix of the reference set");
    gf->needs(rf);
    rf->needs(gf);
    auto* gl = ev->add_option("--generated-layers", ev_gen_layers, "layer features (file or directory)");
    auto* rl = ev->add_option("--reference-layers", ev_ref_layers, "layer features (file or directory)");
    gl->needs(rl);
    rl->needs(gl);
    ev->add_option("--out", ev_out, "report JSON (default stdout)");
    bind(ev, "--ssim-mode", "ssim.mode", "windowed or global");
    bind_flag(ev, "--lpips-normalize", "lpips.normalize", "unit-normalize channel vectors");
    bind(ev, "--max-value", "max_value", "peak signal value");

    // difflab
    auto* dl = app.add_subcommand("difflab", "toy diffusion experiments");
    dl->require_subcommand(1);
    auto common_train = [&](CLI::App* s) {
        bind(s, "--seed", "difflab.seed", "random seed");
        bind(s, "--T", "difflab.T", "number of diffusion steps");
        bind(s, "--schedule", "difflab.schedule", "linear:<b1>:<bT> or constant:<alpha>");
    };
    std::string tr_data, tr_cond, tr_ctrl, tr_init, tr_out, tr_trace;
    auto* tr = dl->add_subcommand("train", "train a denoiser on a data matrix");
    tr->add_option("--data", tr_data, "clean samples, one per row")->required();
    tr->add_option("--cond", tr_cond, "per-sample text conditioning matrix");
    tr->add_option("--ctrl", tr_ctrl, "per-sample control feature matrix");
    tr->add_option("--init", tr_init, "checkpoint to continue from");
    tr->add_option("--out", tr_out, "checkpoint to write")->required();
    tr->add_option("--trace", tr_trace, "loss trace CSV");
    common_train(tr);
    bind(tr, "--steps", "difflab.steps", "SGD steps");
    bind(tr, "--batch", "difflab.batch", "batch size");
    bind(tr, "--lr", "difflab.learning_rate", "learning rate");
    bind(tr, "--lambda1", "difflab.lambda1", "task loss weight");
    bind(tr, "--lambda2", "difflab.lambda2", "LoRA factor penalty weight");
    bind(tr, "--hidden", "difflab.hidden", "hidden width");
    bind(tr, "--depth", "difflab.depth", "number of layers");
    bind_flag(tr, "--lora", "difflab.lora", "train LoRA factors on frozen weights");
    bind(tr, "--lora-rank", "difflab.lora_rank", "LoRA rank");
    bind(tr, "--lora-scale", "difflab.lora_scale", "LoRA scale r");
    bind_flag(tr, "--control", "difflab.control", "train a zero-initialized control branch");
    bind(tr, "--control-alpha", "difflab.control_alpha", "control branch weight");

    std::string sm_ck, sm_prompt, sm_boundary, sm_out = "-";
    auto* sm = dl->add_subcommand("sample", "draw samples from a checkpoint");
    sm->add_option("--checkpoint", sm_ck, "checkpoint file")->required();
    sm->add_option("--prompt", sm_prompt, "prompt text for a text-conditioned model");
    sm->add_option("--boundary", sm_boundary, "one-row control feature matrix");
    sm->add_option("--out", sm_out, "sample CSV (default stdout)");
    bind(sm, "--count", "difflab.sample_count", "number of samples");
    bind(sm, "--seed", "difflab.seed", "random seed");

    std::string gc_out = "-";
    double gc_tol = 1e-4;
    auto* gc = dl->add_subcommand("gradcheck", "finite-difference check of every gradient");
    gc->add_option("--out", gc_out, "report CSV (default stdout)");
    gc->add_option("--tolerance", gc_tol, "largest accepted relative error");
    bind(gc, "--seed", "difflab.seed", "fixture seed");

    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (config_path.empty())
            if (const char* env = std::getenv("PLANFORGE_CONFIG"); env && *env) config_path = env;
        if (!config_path.empty()) cfg = load_config(config_path, cfg);
        for (const auto& [key, value] : overrides) {
            try {
                set_config_value(cfg, key, value);
            } catch (const Error& e) {
                throw detail::UsageError(e.what());
            }
        }
        validate(cfg);

        if (show_config) {
            out << format_config(cfg);
            return 0;
        }
        if (app.get_subcommands().empty()) throw detail::UsageError("a subcommand is required");

        if (pre->parsed()) {
            detail::for_each_input(pre_in, pre_out, {".png"}, ".png", [&](const fs::path& p, const std::string& o) {
                const RasterPlan up = upsample(detail::read_plan(p), cfg.upsample_factor);
                png::write(o, pre_recolor ? recolor(up) : to_image(up));
            });
        } else if (ex->parsed()) {
            detail::for_each_input(ex_in, ex_out, {".png"}, ".json", [&](const fs::path& p, const std::string& o) {
                const int d = ex_upsampled ? cfg.dilation * cfg.upsample_factor : cfg.dilation;
                detail::write_text(o, serialize_graph(extract_graph(detail::read_plan(p), d)), io);
            });
        } else if (em->parsed()) {
            Sections s{false, false, false};
            for (const auto& part : config_detail::split(em_sections, ',')) {
                if (part == "counts")
                    s.counts = true;
                else if (part == "areas")
                    s.areas = true;
                else if (part == "connections")
                    s.connections = true;
                else
                    throw detail::UsageError("unknown section '" + part + "'");
            }
            detail::for_each_input(em_in, em_out, {".json"}, ".txt", [&](const fs::path& p, const std::string& o) {
                const KnowledgeGraph kg = deserialize_graph(detail::read_text(p.string(), io));
                detail::write_text(o, emit_prompt(kg, effective_area_divisor(cfg, kg.image_width), s) + "\n", io);
            });
        } else if (pp->parsed()) {
            const ConstraintSet cs = parse_prompt(detail::read_text(pp_in, io));
            const auto warnings = check_consistency(cs);
            for (const auto& w : warnings) err << "warning: " << w.code() << ": " << w.message() << "\n";
            detail::write_text(pp_out, serialize_constraints(cs, warnings), io);
        } else if (ck->parsed()) {
            if (ck_constraints.empty() && ck_prompt.empty())
                throw detail::UsageError("check needs --constraints or --prompt");
            const KnowledgeGraph kg = deserialize_graph(detail::read_text(ck_graph, io));
            const ConstraintSet cs = ck_prompt.empty()
                                         ? deserialize_constraints(detail::read_text(ck_constraints, io))
                                         : parse_prompt(detail::read_text(ck_prompt, io));
            ComplianceOptions opt = compliance_options(cfg, kg.image_width);
            if (!ck_plan.empty()) {
                const RasterPlan plan = detail::read_plan(ck_plan);
                if (plan.width() != kg.image_width || plan.height() != kg.image_height)
                    throw Error("DimensionMismatch", "plan size differs from the graph's image size");
                opt.interior_pixels = static_cast<long long>(plan.interior_pixel_count());
            }
            const ComplianceReport rep = check_compliance(kg, cs, opt);
            detail::write_text(ck_out, serialize_report(rep), io);
            if (ck_strict && !rep.all_applicable_pass()) {
                std::string failed;
                for (const auto& r : rep.rules)
                    if (r.status == RuleStatus::fail) failed += std::string(failed.empty() ? "" : ",") + rule_letter(r.rule);
                throw Error("ComplianceFailed", "rules " + failed + " failed");
            }
        } else if (cn->parsed()) {
            detail::for_each_input(cn_in, cn_out, {".png"}, ".png", [&](const fs::path& p, const std::string& o) {
                const GrayImage g =
                    cn_source == "plan" ? boundary_image(detail::read_plan(p)) : luminance(png::read(p));
                png::write(o, edge_png(canny(g, cfg.canny)));
            });
        } else if (ev->parsed()) {
            const auto gens = detail::inputs(ev_gen, {".png"});
            const auto refs = detail::inputs(ev_ref, {".png"});
            if (gens.size() != refs.size())
                throw Error("MismatchedBatch", std::to_string(gens.size()) + " generated images but " +
                                                   std::to_string(refs.size()) + " references");
            std::vector<fs::path> gen_layers, ref_layers;
            if (!ev_gen_layers.empty()) {
                gen_layers = detail::inputs(ev_gen_layers, {".plnl"});
                ref_layers = detail::inputs(ev_ref_layers, {".plnl"});
                if (gen_layers.size() != gens.size() || ref_layers.size() != refs.size())
                    throw Error("MismatchedBatch", "layer feature files do not match the image count");
            }
            std::vector<metrics::BatchPair> pairs;
            for (std::size_t i = 0; i < gens.size(); ++i) {
                metrics::BatchPair bp;
                bp.generated = metrics::from_image8(png::read(gens[i]));
                bp.reference = metrics::from_image8(png::read(refs[i]));
                if (!gen_layers.empty()) {
                    bp.generated_layers = features::load_layers(gen_layers[i]);
                    bp.reference_layers = features::load_layers(ref_layers[i]);
                }
                pairs.push_back(std::move(bp));
            }
            std::optional<Eigen::MatrixXd> gfeat, rfeat;
            if (!ev_gen_feat.empty()) {
                gfeat = features::load_matrix(ev_gen_feat);
                rfeat = features::load_matrix(ev_ref_feat);
            }
            metrics::BatchOptions bo;
            bo.max_value = cfg.max_value;
            bo.ssim.mode = cfg.ssim_mode;
            bo.ssim.dynamic_range = cfg.max_value;
            bo.lpips_normalize = cfg.lpips_normalize;
            const metrics::BatchReport rep = metrics::evaluate_batch(pairs, gfeat, rfeat, bo);

            std::ostringstream j;
            j << "{\n  \"pairs\": " << rep.pairs << ",\n  \"fid\": "
              << (rep.fid ? detail::json_number(*rep.fid) : "null") << ",\n  \"psnr\": "
              << detail::json_number(rep.mean_psnr) << ",\n  \"psnr_infinite\": " << rep.psnr_infinite
              << ",\n  \"lpips\": " << (rep.mean_lpips ? detail::json_number(*rep.mean_lpips) : "null")
              << ",\n  \"ssim\": " << detail::json_number(rep.mean_ssim) << ",\n  \"per_pair\": [";
            for (std::size_t i = 0; i < rep.per_pair.size(); ++i) {
                const auto& s = rep.per_pair[i];
                j << (i ? "," : "") << "\n    {\"generated\": " << jsonutil::Json(gens[i].filename().string()).dump()
                  << ", \"reference\": " << jsonutil::Json(refs[i].filename().string()).dump()
                  << ", \"psnr\": " << detail::json_number(s.psnr) << ", \"ssim\": " << detail::json_number(s.ssim)
                  << ", \"lpips\": " << (s.lpips ? detail::json_number(*s.lpips) : "null") << "}";
            }
            j << "\n  ]\n}\n";
            detail::write_text(ev_out, j.str(), io);
        } else if (tr->parsed()) {
            difflab::Dataset data;
            data.x0 = features::load_matrix(tr_data);
            if (!tr_cond.empty()) data.cond = features::load_matrix(tr_cond);
            if (!tr_ctrl.empty()) data.ctrl = features::load_matrix(tr_ctrl);
            std::optional<difflab::Denoiser> init;
            if (!tr_init.empty()) init = difflab::load_checkpoint(tr_init).net;
            const difflab::TrainResult res = difflab::train(data, cfg.difflab, init);
            difflab::save_checkpoint(tr_out, {res.net, cfg.difflab.T, cfg.difflab.schedule});
            if (!tr_trace.empty()) features::detail::spit(tr_trace, difflab::format_loss_trace(res.loss_trace));
            if (!res.loss_trace.empty())
                out << "trained " << res.loss_trace.size() << " steps, final loss "
                    << config_detail::fmt(res.loss_trace.back()) << "\n";
        } else if (sm->parsed()) {
            const difflab::Checkpoint c = difflab::load_checkpoint(sm_ck);
            difflab::Condition cond;
            if (c.net.cfg.cond_dim > 0) {
                if (sm_prompt.empty()) throw detail::UsageError("this model is text-conditioned; pass --prompt");
                cond.text = difflab::embed_text(parse_prompt(detail::read_text(sm_prompt, io)), c.net.cfg.cond_dim);
            }
            if (c.net.cfg.control_dim > 0) {
                if (sm_boundary.empty()) throw detail::UsageError("this model takes control features; pass --boundary");
                const Eigen::MatrixXd b = features::load_matrix(sm_boundary);
                if (b.rows() != 1) throw Error("DimensionMismatch", "--boundary must hold exactly one row");
                cond.boundary = b.row(0).transpose();
            }
            std::mt19937_64 rng(cfg.difflab.seed);
            const Eigen::MatrixXd x =
                difflab::sample(c.net, cond, difflab::make_schedule(c.T, c.schedule), cfg.sample_count, rng);
            detail::write_text(sm_out, features::format_csv(x), io);
        } else if (gc->parsed()) {
            const difflab::GradCheckFixture f = difflab::gradcheck_fixture(cfg.difflab.seed);
            const auto report = difflab::gradcheck(f.net, f.batch, f.eps, f.loss);
            std::string csv = "tensor,entries,max_rel_error,max_abs_error\n";
            double worst = 0.0;
            for (const auto& e : report) {
                csv += e.tensor + "," + std::to_string(e.entries) + "," + config_detail::fmt(e.max_rel_error) + "," +
                       config_detail::fmt(e.max_abs_error) + "\n";
                worst = std::max(worst, e.max_rel_error);
            }
            detail::write_text(gc_out, csv, io);
            if (worst > gc_tol)
                throw Error("GradCheckFailed",
                            "max relative error " + config_detail::fmt(worst) + " exceeds " + config_detail::fmt(gc_tol));
        }
        return 0;
    } catch (const detail::UsageError& e) {
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << "\n";
        return 1;
    }
}

inline int run(int argc, const char* const* argv) { return run(argc, argv, std::cin, std::cout, std::cerr); }

}  // namespace planforge::cli
