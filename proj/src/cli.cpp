#include "utrack/cli.hpp"

#include <cstdio>
#include <sstream>

#include <CLI11.hpp>

#include "utrack/assignment.hpp"
#include "utrack/config.hpp"
#include "utrack/error.hpp"
#include "utrack/motmetrics.hpp"
#include "utrack/scoring.hpp"
#include "utrack/svg.hpp"

namespace utrack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json manifest_header(const std::string& command) {
    return {{"tool", "utrack"}, {"version", kVersion}, {"command", command}};
}

fs::path normalized_absolute(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

void write_manifest(const fs::path& path, const json& manifest) {
    io::write_file_atomic(path, manifest.dump(2) + "\n");
}

void set_extension(TrackerConfig& cfg, const std::string& name, bool on) {
    if (name == "kfcov" || name == "all") cfg.enable_kfcov = on;
    if (name == "ellipse" || name == "all") cfg.enable_ellipse = on;
    if (name == "relax" || name == "all") cfg.enable_relax = on;
    if (name == "greedy" || name == "all") cfg.enable_greedy = on;
}

std::string eval_table(const motmetrics::EvalReport& r) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %8s %8s %8s\n", "class", "MOTA", "IDF1", "FP", "FN", "IDs",
                  "GT");
    out += line;
    auto row = [&](const std::string& name, const motmetrics::ClassMetrics& m) {
        std::snprintf(line, sizeof(line), "%-10s %8.4f %8.4f %8zu %8zu %8zu %8zu\n", name.c_str(), m.mota, m.idf1,
                      m.tally.fp, m.tally.fn, m.tally.ids, m.tally.gt_count);
        out += line;
    };
    for (const auto& [label, m] : r.per_class) row(std::to_string(label), m);
    std::snprintf(line, sizeof(line), "%-10s %8.4f %8.4f\n", "mean", r.mmota, r.midf1);
    out += line;
    row("overall", r.overall);
    return out;
}

// Hungarian IoU matching of detections to gt, per frame, for distribution scoring.
void match_for_scoring(const Sequence& dets, const GtSequence& gt, double iou_thr, std::vector<BoxTlbr>& gts_out,
                       std::vector<GaussianBox>& dets_out) {
    std::map<int, const FrameDetections*> by_frame;
    for (const auto& f : dets) by_frame[f.frame] = &f;
    for (const auto& g : gt) {
        auto it = by_frame.find(g.frame);
        if (it == by_frame.end()) continue;
        const auto& fd = it->second->dets;
        CostMatrix c(static_cast<Eigen::Index>(g.objects.size()), static_cast<Eigen::Index>(fd.size()));
        for (int r = 0; r < c.rows(); ++r) {
            for (int k = 0; k < c.cols(); ++k) {
                const double o = geometry::iou(g.objects[r].box, fd[k].mean);
                c(r, k) = (o >= iou_thr && g.objects[r].label == fd[k].label) ? 1.0 - o : CostMatrix::kForbidden;
            }
        }
        for (const auto& [r, k] : assignment::hungarian(c, 1.0).pairs) {
            gts_out.push_back(g.objects[r].box);
            dets_out.push_back(fd[k]);
        }
    }
}

fs::path redirect(const fs::path& recorded, const fs::path& out_dir) {
    return out_dir.empty() ? recorded : out_dir / recorded.filename();
}

}  // namespace

nlohmann::json run_track(const TrackJob& job, std::ostream& err) {
    const auto seq = io::load_detections(job.detections);
    Tracker tracker(job.config);
    std::vector<FrameResult> results;
    results.reserve(seq.size());
    for (const auto& f : seq) results.push_back(tracker.step(f));
    if (tracker.covariance_fallbacks() > 0) {
        err << "warning: " << tracker.covariance_fallbacks()
            << " detections carried no covariance; used the heuristic measurement noise\n";
    }
    io::write_results(job.results, results);

    json m = manifest_header("track");
    m["detections"] = normalized_absolute(job.detections).string();
    m["outputs"] = {{"results", normalized_absolute(job.results).string()}};
    m["config"] = config::to_json(job.config);
    m["seed"] = job.seed;
    m["frames"] = seq.size();
    m["covariance_fallbacks"] = tracker.covariance_fallbacks();
    return m;
}

nlohmann::json run_synth(const SynthJob& job) {
    const auto data = synth::generate(job.scenario);
    io::write_detections(job.detections, data.dets, job.cov);
    io::write_gt(job.gt, data.gt);
    json m = manifest_header("synth");
    m["scenario"] = config::to_json(job.scenario);
    m["cov"] = io::to_string(job.cov);
    m["seed"] = job.scenario.seed;
    m["outputs"] = {{"detections", normalized_absolute(job.detections).string()}, {"gt", normalized_absolute(job.gt).string()}};
    return m;
}

void replay(const nlohmann::json& manifest, const fs::path& out_dir) {
    const auto command = manifest.at("command").get<std::string>();
    if (command == "track") {
        TrackJob job;
        job.detections = manifest.at("detections").get<std::string>();
        job.results = redirect(manifest.at("outputs").at("results").get<std::string>(), out_dir);
        job.config = config::tracker_config_from_json(manifest.at("config"));
        job.seed = manifest.at("seed").get<std::uint64_t>();
        std::ostringstream quiet;
        run_track(job, quiet);
    } else if (command == "synth") {
        SynthJob job;
        job.scenario = config::scenario_from_json(manifest.at("scenario"));
        job.cov = io::parse_cov_arity(manifest.at("cov").get<std::string>());
        job.detections = redirect(manifest.at("outputs").at("detections").get<std::string>(), out_dir);
        job.gt = redirect(manifest.at("outputs").at("gt").get<std::string>(), out_dir);
        run_synth(job);
    } else {
        throw Error("manifest command '" + command + "' cannot be replayed");
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Uncertainty-aware multi-object tracking toolkit", "utrack"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // track
    auto* track = app.add_subcommand("track", "Track a detection file and write MOT-style results");
    std::string t_dets, t_out, t_manifest, t_config;
    std::vector<std::string> t_enable, t_disable;
    std::optional<double> t_tau1, t_tau2;
    std::uint64_t seed = 0;
    track->add_option("-d,--detections", t_dets, "Detection CSV")->required();
    track->add_option("-o,--out", t_out, "Results CSV")->required();
    track->add_option("--manifest", t_manifest, "Manifest path (default: <out>.manifest.json)");
    track->add_option("--config", t_config, "Tracker config file (key = value)");
    track->add_option("--tau1", t_tau1, "Intake ellipse threshold");
    track->add_option("--tau2", t_tau2, "Ellipse threshold before relaxed matching");
    const std::vector<std::string> extensions{"kfcov", "ellipse", "relax", "greedy", "all"};
    track->add_option("--enable", t_enable, "Enable an extension")->check(CLI::IsMember(extensions));
    track->add_option("--disable", t_disable, "Disable an extension")->check(CLI::IsMember(extensions));
    track->add_option("--seed", seed, "Seed recorded in the manifest");

    // eval
    auto* eval = app.add_subcommand("eval", "CLEAR MOT and IDF1 of results against ground truth");
    std::string e_results, e_gt, e_json;
    double iou_thr = motmetrics::kDefaultIouThreshold;
    bool e_print_json = false;
    eval->add_option("-r,--results", e_results, "Results CSV")->required();
    eval->add_option("-g,--gt", e_gt, "Ground-truth CSV")->required();
    eval->add_option("--iou", iou_thr, "Match threshold")->check(CLI::Range(0.0, 1.0));
    eval->add_option("--json", e_json, "Write metrics JSON to this path");
    eval->add_flag("--print-json", e_print_json, "Print JSON instead of the table");

    // score
    auto* score = app.add_subcommand("score", "NLL, energy score and Sample-IoU of detections against ground truth");
    std::string s_dets, s_gt, s_json;
    std::size_t s_samples = 1000;
    double s_iou = 0.5;
    score->add_option("-d,--detections", s_dets, "Detection CSV")->required();
    score->add_option("-g,--gt", s_gt, "Ground-truth CSV")->required();
    score->add_option("-m,--samples", s_samples, "Samples per pair")->check(CLI::Range(2, 100000000));
    score->add_option("--iou", s_iou, "Match threshold")->check(CLI::Range(0.0, 1.0));
    score->add_option("--seed", seed, "Sampling seed");
    score->add_option("--json", s_json, "Also write the report to this path");

    // synth
    auto* syn = app.add_subcommand("synth", "Generate a synthetic scenario");
    std::string y_scenario, y_spec, y_dets, y_gt, y_manifest, y_cov = "full10";
    std::optional<std::uint64_t> y_seed;
    auto* y_named = syn->add_option("--scenario", y_scenario, "Named scenario");
    syn->add_option("--spec", y_spec, "Scenario file (key = value)")->excludes(y_named);
    syn->add_option("--detections", y_dets, "Detection CSV to write")->required();
    syn->add_option("--gt", y_gt, "Ground-truth CSV to write")->required();
    syn->add_option("--cov", y_cov, "Covariance arity")->check(CLI::IsMember({"none", "diag4", "full10"}));
    syn->add_option("--seed", y_seed, "Override the scenario seed");
    syn->add_option("--manifest", y_manifest, "Manifest path (default: <detections>.manifest.json)");

    // viz
    auto* viz = app.add_subcommand("viz", "Render one frame as SVG");
    std::string v_dets, v_results, v_gt, v_out;
    int v_frame = 1;
    double v_w = 1280.0, v_h = 720.0;
    viz->add_option("--frame", v_frame, "Frame index")->required();
    viz->add_option("-o,--out", v_out, "SVG path")->required();
    viz->add_option("--detections", v_dets, "Detection CSV (draws 95% corner ellipses)");
    auto* v_res_opt = viz->add_option("--results", v_results, "Results CSV");
    auto* v_gt_opt = viz->add_option("--gt", v_gt, "Ground-truth CSV");
    v_res_opt->needs(v_gt_opt);
    v_gt_opt->needs(v_res_opt);
    viz->add_option("--width", v_w, "Canvas width");
    viz->add_option("--height", v_h, "Canvas height");
    viz->add_option("--iou", iou_thr, "Match threshold")->check(CLI::Range(0.0, 1.0));

    // replay
    auto* rep = app.add_subcommand("replay", "Re-run a recorded manifest");
    std::string r_manifest, r_out_dir;
    rep->add_option("manifest", r_manifest, "Manifest JSON")->required();
    rep->add_option("--out-dir", r_out_dir, "Write outputs here instead of their recorded paths");

    std::vector<std::string> argv_store;
    argv_store.push_back("utrack");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code != 0) err << app.help();
        return code;
    }

    try {
        if (*track) {
            TrackJob job;
            job.detections = t_dets;
            job.results = t_out;
            job.seed = seed;
            job.config = t_config.empty() ? TrackerConfig{} : config::load_tracker_config(t_config);
            for (const auto& d : t_disable) set_extension(job.config, d, false);
            for (const auto& e : t_enable) set_extension(job.config, e, true);
            if (t_tau1) job.config.tau1 = *t_tau1;
            if (t_tau2) job.config.tau2 = *t_tau2;
            job.config.validate();
            const auto manifest = run_track(job, err);
            write_manifest(t_manifest.empty() ? t_out + ".manifest.json" : t_manifest, manifest);
        } else if (*eval) {
            const auto gt = io::load_gt(e_gt);
            const auto results = io::load_results(e_results);
            const auto report = motmetrics::evaluate(gt, results, iou_thr);
            const auto j = config::to_json(report);
            if (!e_json.empty()) io::write_file_atomic(e_json, j.dump(2) + "\n");
            out << (e_print_json ? j.dump(2) + "\n" : eval_table(report));
        } else if (*score) {
            const auto dets = io::load_detections(s_dets);
            const auto gt = io::load_gt(s_gt);
            std::vector<BoxTlbr> gts;
            std::vector<GaussianBox> matched;
            match_for_scoring(dets, gt, s_iou, gts, matched);
            const auto report = scoring::score_pairs(gts, matched, s_samples, seed);
            auto j = config::to_json(report);
            j["seed"] = seed;
            if (!s_json.empty()) io::write_file_atomic(s_json, j.dump(2) + "\n");
            out << j.dump(2) << "\n";
        } else if (*syn) {
            if (y_scenario.empty() && y_spec.empty()) throw Error("synth needs --scenario or --spec");
            SynthJob job;
            job.scenario = y_spec.empty() ? synth::named(y_scenario) : config::load_scenario(y_spec);
            if (y_seed) job.scenario.seed = *y_seed;
            job.detections = y_dets;
            job.gt = y_gt;
            job.cov = io::parse_cov_arity(y_cov);
            const auto manifest = run_synth(job);
            write_manifest(y_manifest.empty() ? y_dets + ".manifest.json" : y_manifest, manifest);
        } else if (*viz) {
            svg::Scene scene;
            scene.width = v_w;
            scene.height = v_h;
            scene.frame = v_frame;
            Sequence dets;
            GtSequence gt;
            std::vector<FrameResult> results;
            ClearMotResult cm;
            if (!v_dets.empty()) {
                dets = io::load_detections(v_dets);
                for (const auto& f : dets)
                    if (f.frame == v_frame) scene.dets = f.dets;
            }
            if (!v_results.empty()) {
                gt = io::load_gt(v_gt);
                results = io::load_results(v_results);
                cm = motmetrics::clear_mot(gt, results, iou_thr);
                static const std::vector<GtObject> no_gt;
                static const std::vector<TrackOutput> no_pred;
                scene.gt = no_gt;
                scene.pred = no_pred;
                for (const auto& f : gt)
                    if (f.frame == v_frame) scene.gt = f.objects;
                for (const auto& f : results)
                    if (f.frame == v_frame) scene.pred = f.outputs;
                for (const auto& ev : cm.frames)
                    if (ev.frame == v_frame) scene.events = &ev;
                if (scene.events == nullptr) throw Error("frame " + std::to_string(v_frame) + " not in ground truth");
            }
            io::write_file_atomic(v_out, svg::render(scene));
        } else if (*rep) {
            const auto manifest = json::parse(io::read_file(r_manifest));
            replay(manifest, r_out_dir);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace utrack::cli
