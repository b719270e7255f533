// Command-line front end: generate / run / score / verify / report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <mtpose/mtpose.hpp>

namespace {

namespace fs = std::filesystem;

fs::path default_out_root() {
    const char* env = std::getenv("MTPOSE_OUT");
    if (env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path("mtpose-out");
}

std::set<mtpose::MrId> parse_mrs(const std::string& spec) {
    std::set<mtpose::MrId> mrs;
    if (spec.empty() || spec == "none") {
        return mrs;
    }
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) {
            mrs.insert(mtpose::mr_from_string(token));
        }
    }
    return mrs;
}

std::map<std::string, double> load_fail_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw mtpose::IoError("cannot open failure table '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw mtpose::ParseError("failure table '" + path.string() +
                                 "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw mtpose::ParseError("failure table must be a JSON object of tc_id -> probability");
    }
    std::map<std::string, double> table;
    for (const auto& [tc, p] : j.items()) {
        table[tc] = p.get<double>();
    }
    return table;
}

// Flag values shared by several subcommands, with the canonical defaults.
struct Options {
    std::string manifest;
    std::string out;
    std::string suite;
    std::string predictions;
    std::string metrics;
    std::string run_file;

    std::string mrs = "MR1,MR2,MR3,MR4";
    double radius = 10.0;
    int kernel_size = 20;
    int image_side = 244;
    bool preprocess = false;
    double crop_scale = 2.2;
    bool followups_with_object = false;

    double iou_threshold = 0.5;
    double ed_threshold = 10.0;
    double epsilon = 0.05;
    double rho = 0.8;
    bool no_supplementary = false;

    std::string adapter = "oracle";
    std::string command;
    std::string adapter_cwd;
    int timeout_ms = 30'000;
    std::string fail_table;
    double fail_coeff = -1.0;  // negative means unset
    double noise = 0.0;
    uint64_t seed = 0;
    std::string degrader_mode = "probabilistic";

    int workers = 1;
};

void add_generation_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--mrs", opt.mrs,
                    "Comma-separated MR selection (MR1..MR4); 'none' for baseline only");
    cmd->add_option("--radius", opt.radius, "Occlusion disc radius in pixels")
        ->capture_default_str();
    cmd->add_option("--kernel-size", opt.kernel_size, "Motion blur kernel side length")
        ->capture_default_str();
    cmd->add_option("--image-side", opt.image_side,
                    "Square side for preprocessed inputs (with --preprocess)")
        ->capture_default_str();
    cmd->add_flag("--preprocess", opt.preprocess,
                  "Crop a square hand patch and resize it before transforming");
    cmd->add_option("--crop-scale", opt.crop_scale,
                    "Patch side as a multiple of the hand bounding box (with --preprocess)")
        ->capture_default_str();
    cmd->add_flag("--followups-with-object", opt.followups_with_object,
                  "Generate follow-up cases for with-object samples too");
}

void add_scoring_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--iou-threshold", opt.iou_threshold,
                    "Segmentation TP requires IoU strictly above this")
        ->capture_default_str();
    cmd->add_option("--ed-threshold", opt.ed_threshold,
                    "Localisation TP requires mean keypoint distance strictly below this")
        ->capture_default_str();
}

void add_verify_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--epsilon", opt.epsilon,
                    "Max tolerated relative degradation for MR2/MR3/MR4")
        ->capture_default_str();
    cmd->add_option("--rho", opt.rho,
                    "MR1 requires rank correlation at or below minus this value")
        ->capture_default_str();
    cmd->add_flag("--no-supplementary", opt.no_supplementary,
                  "Emit only f1 verdicts, no precision/recall ones");
}

void add_adapter_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--adapter", opt.adapter, "Model adapter: oracle, degrader or external")
        ->check(CLI::IsMember({"oracle", "degrader", "external"}))
        ->capture_default_str();
    cmd->add_option("--command", opt.command, "Launch command for the external adapter");
    cmd->add_option("--adapter-cwd", opt.adapter_cwd, "Working directory for the external adapter");
    cmd->add_option("--timeout-ms", opt.timeout_ms, "Per-request adapter timeout in ms")
        ->capture_default_str();
    cmd->add_option("--fail-table", opt.fail_table,
                    "JSON file mapping tc_id to degrader failure probability");
    cmd->add_option("--fail-coeff", opt.fail_coeff,
                    "Degrader fails occlusion level n with probability min(1, coeff*n)");
    cmd->add_option("--noise", opt.noise, "Degrader keypoint noise magnitude in pixels")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Degrader random seed")->capture_default_str();
    cmd->add_option("--degrader-mode", opt.degrader_mode,
                    "Degrader failure draw: probabilistic or expected (exact counts)")
        ->check(CLI::IsMember({"probabilistic", "expected"}))
        ->capture_default_str();
}

mtpose::GenerationConfig generation_config(const Options& opt) {
    mtpose::GenerationConfig c;
    c.mrs = parse_mrs(opt.mrs);
    c.occlusion_radius = opt.radius;
    c.kernel_size = opt.kernel_size;
    c.image_side = opt.image_side;
    c.preprocess = opt.preprocess;
    c.crop_scale = opt.crop_scale;
    c.followups_with_object = opt.followups_with_object;
    return c;
}

mtpose::AdapterConfig adapter_config(const Options& opt) {
    mtpose::AdapterConfig c;
    c.kind = mtpose::adapter_kind_from_string(opt.adapter);
    c.external.command = opt.command;
    c.external.working_dir = opt.adapter_cwd;
    c.external.timeout_ms = opt.timeout_ms;
    if (!opt.fail_table.empty()) {
        c.degrader.failure_table = load_fail_table(opt.fail_table);
    }
    if (opt.fail_coeff >= 0.0) {
        c.degrader.occlusion_coeff = opt.fail_coeff;
    }
    c.degrader.noise_px = opt.noise;
    c.degrader.seed = opt.seed;
    c.degrader.mode = opt.degrader_mode == "expected" ? mtpose::DegraderMode::Expected
                                                      : mtpose::DegraderMode::Probabilistic;
    return c;
}

mtpose::RunConfig run_config(const Options& opt) {
    mtpose::RunConfig c;
    c.generation = generation_config(opt);
    c.adapter = adapter_config(opt);
    c.iou_threshold = opt.iou_threshold;
    c.ed_threshold = opt.ed_threshold;
    c.verify.min_abs_rho = opt.rho;
    c.verify.set_epsilon(opt.epsilon);
    c.verify.supplementary = !opt.no_supplementary;
    c.workers = opt.workers;
    return c;
}

void print_verdicts(const std::vector<mtpose::MRVerdict>& verdicts) {
    for (const auto& v : verdicts) {
        if (v.metric != mtpose::MetricKind::F1) {
            continue;  // supplementary verdicts stay in verdicts.json
        }
        std::cout << v.model << ' ' << to_string(v.mr) << ' ' << to_string(v.task) << ": "
                  << (v.satisfied ? "satisfied" : "VIOLATED")
                  << (v.vacuous ? " (vacuous)" : "") << "  statistic=" << v.statistic
                  << " threshold=" << v.threshold << '\n';
    }
}

int cmd_generate(const Options& opt) {
    const auto manifest = mtpose::load_manifest(opt.manifest);
    const auto config = generation_config(opt);
    const fs::path out = opt.out.empty() ? default_out_root() / "suite" : fs::path(opt.out);
    if (mtpose::suite_reusable(out, config)) {
        const auto suite = mtpose::load_suite(out);
        std::cout << "suite up to date: " << suite.cases.size() << " cases in " << out.string()
                  << '\n';
        return 0;
    }
    const auto suite = mtpose::write_suite(manifest, config, out);
    std::cout << "generated " << suite.cases.size() << " cases in " << out.string() << '\n';
    return 0;
}

int cmd_run(const Options& opt) {
    const auto manifest = mtpose::load_manifest(opt.manifest);
    const auto config = run_config(opt);
    const fs::path out = opt.out.empty() ? default_out_root() : fs::path(opt.out);
    const mtpose::RunRecord record = mtpose::run(manifest, config, out);
    std::cout << "run " << record.run_id << ": model '" << record.model << "', "
              << record.case_count << " cases, reports in " << out.string() << '\n';
    print_verdicts(record.verdicts);
    return mtpose::all_primary_satisfied(record.verdicts) ? 0 : 3;
}

int cmd_score(const Options& opt) {
    const auto suite = mtpose::load_suite(opt.suite);
    const auto [model, predictions] = mtpose::load_predictions(opt.predictions);
    const auto config = run_config(opt);
    const auto [outcomes, records] = mtpose::score_predictions(suite, model, predictions, config);
    const fs::path out = opt.out.empty() ? default_out_root() : fs::path(opt.out);
    fs::create_directories(out);
    const fs::path csv = out / "metrics.csv";
    std::ofstream file(csv, std::ios::binary);
    if (!file) {
        throw mtpose::IoError("cannot write '" + csv.string() + "'");
    }
    file << mtpose::metrics_to_csv(records);
    std::cout << "scored " << outcomes.size() << " predictions into " << records.size()
              << " metric rows: " << csv.string() << '\n';
    return 0;
}

int cmd_verify(const Options& opt) {
    const auto records = mtpose::load_metrics_csv(opt.metrics);
    mtpose::VerifyConfig config;
    config.min_abs_rho = opt.rho;
    config.set_epsilon(opt.epsilon);
    config.supplementary = !opt.no_supplementary;
    const auto verdicts = mtpose::verify_all(records, config);
    const fs::path out = opt.out.empty() ? fs::path(opt.metrics).parent_path() : fs::path(opt.out);
    fs::create_directories(out.empty() ? "." : out);
    const fs::path path = (out.empty() ? fs::path(".") : out) / "verdicts.json";
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw mtpose::IoError("cannot write '" + path.string() + "'");
    }
    file << mtpose::verdicts_to_json(verdicts).dump(2) << '\n';
    print_verdicts(verdicts);
    std::cout << "verdicts: " << path.string() << '\n';
    return mtpose::all_primary_satisfied(verdicts) ? 0 : 3;
}

int cmd_report(const Options& opt) {
    std::ifstream in(opt.run_file);
    if (!in) {
        throw mtpose::IoError("cannot open run record '" + opt.run_file + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw mtpose::ParseError("run record '" + opt.run_file + "' is not valid JSON: " +
                                 e.what());
    }
    const mtpose::RunRecord record = mtpose::run_record_from_json(j);
    const fs::path out =
        opt.out.empty() ? fs::path(opt.run_file).parent_path() : fs::path(opt.out);
    mtpose::emit_reports(record, out.empty() ? fs::path(".") : out);
    std::cout << "reports for run " << record.run_id << " written to "
              << (out.empty() ? fs::path(".") : out).string() << '\n';
    return record.complete && mtpose::all_primary_satisfied(record.verdicts) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metamorphic-testing harness for hand pose estimation models"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* generate = app.add_subcommand("generate", "Materialize a test suite from a manifest");
    generate->add_option("--manifest", opt.manifest, "Dataset manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);
    generate->add_option("--out", opt.out, "Suite directory (default $MTPOSE_OUT/suite)");
    add_generation_flags(generate, opt);

    CLI::App* run = app.add_subcommand("run", "Generate, predict, score, verify and report");
    run->add_option("--manifest", opt.manifest, "Dataset manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", opt.out, "Output root (default $MTPOSE_OUT)");
    run->add_option("--workers", opt.workers, "Parallel adapter instances")
        ->capture_default_str();
    add_generation_flags(run, opt);
    add_scoring_flags(run, opt);
    add_verify_flags(run, opt);
    add_adapter_flags(run, opt);

    CLI::App* score = app.add_subcommand("score", "Score recorded predictions against a suite");
    score->add_option("--suite", opt.suite, "Suite directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    score->add_option("--predictions", opt.predictions, "Recorded predictions JSON")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--out", opt.out, "Output directory for metrics.csv");
    add_scoring_flags(score, opt);

    CLI::App* verify = app.add_subcommand("verify", "Check metamorphic relations over metrics");
    verify->add_option("--metrics", opt.metrics, "metrics.csv produced by run or score")
        ->required()
        ->check(CLI::ExistingFile);
    verify->add_option("--out", opt.out, "Output directory for verdicts.json");
    add_verify_flags(verify, opt);

    CLI::App* report = app.add_subcommand("report", "Re-emit all report files from a run record");
    report->add_option("--run", opt.run_file, "run.json of a finished run")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--out", opt.out, "Output directory (default: alongside run.json)");

    try {
        app.parse(argc, argv);
        if (generate->parsed()) return cmd_generate(opt);
        if (run->parsed()) return cmd_run(opt);
        if (score->parsed()) return cmd_score(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (report->parsed()) return cmd_report(opt);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
