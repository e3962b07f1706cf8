#include "cli.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "spseg/errors.hpp"
#include "spseg/evaluation.hpp"
#include "spseg/image_io.hpp"
#include "spseg/pipeline.hpp"
#include "spseg/report.hpp"

namespace spseg::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Bad flag or config value; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pipeline flags bound to one subcommand, plus the `key=value` config file.
class PipelineOptions {
public:
    void attach(CLI::App* app, bool with_jobs) {
        auto& c = config;
        add(app, "superpixels", c.slic.superpixels, "Requested SLIC superpixel count")->check(CLI::PositiveNumber);
        add(app, "compactness", c.slic.compactness, "SLIC compactness m")->check(CLI::PositiveNumber);
        add(app, "slic-iters", c.slic.max_iters, "SLIC assignment/update iterations")->check(CLI::PositiveNumber);
        add(app, "min-region-frac", c.slic.min_region_frac, "Minimum fragment size as a fraction of H*W/k")
            ->check(CLI::Range(0.0, 1.0));
        add(app, "gamma", c.svm.gamma, "RBF kernel width")->check(CLI::PositiveNumber);
        add(app, "c", c.svm.c, "SVM box constraint")->check(CLI::PositiveNumber);
        add(app, "mrf-alpha", c.mrf.alpha, "MRF prior damping")->check(CLI::Range(0.0, 1.0));
        add(app, "mrf-tol", c.mrf.tol, "MRF fixed-point tolerance")->check(CLI::PositiveNumber);
        add(app, "mrf-max-sweeps", c.mrf.max_sweeps, "MRF sweep cap")->check(CLI::PositiveNumber);
        add(app, "max-iters", c.max_outer_iters, "Outer iteration cap")->check(CLI::PositiveNumber);
        add(app, "texture-t1", c.texture.t1, "Lower gradient magnitude threshold")->check(CLI::NonNegativeNumber);
        add(app, "texture-t2", c.texture.t2, "Upper gradient magnitude threshold")->check(CLI::NonNegativeNumber);
        if (with_jobs) add(app, "jobs", jobs, "Images processed in parallel")->check(CLI::PositiveNumber);
        app->add_option("--config", config_file, "key=value file; flags take precedence");
    }

    /// Applies config-file values for every option not given on the command
    /// line, then validates the whole configuration.
    void finalize() {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw IoError("cannot read config file " + config_file);
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                const auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                const auto key_value = split(line);
                if (!key_value) {
                    if (trim(line).empty()) continue;
                    throw UsageError(config_file + ":" + std::to_string(lineno) + ": expected key=value");
                }
                const auto& [key, value] = *key_value;
                const auto it = options_.find(key);
                if (it == options_.end()) {
                    if (key == "jobs") continue;  // batch-only setting in a shared file
                    throw UsageError(config_file + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
                }
                CLI::Option* opt = it->second;
                if (opt->count() > 0) continue;
                try {
                    opt->add_result(value);
                    opt->run_callback();
                } catch (const CLI::Error& e) {
                    throw UsageError(config_file + ":" + std::to_string(lineno) + ": " + e.what());
                }
            }
        }
        try {
            config.validate();
        } catch (const InvalidParams& e) {
            throw UsageError(e.what());
        }
    }

    PipelineConfig config;
    int jobs = 1;
    std::string config_file;

private:
    template <typename T>
    CLI::Option* add(CLI::App* app, const std::string& key, T& target, const std::string& help) {
        CLI::Option* opt = app->add_option("--" + key, target, help)->capture_default_str();
        options_[key] = opt;
        return opt;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::optional<std::pair<std::string, std::string>> split(const std::string& line) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) return std::nullopt;
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) return std::nullopt;
        return std::make_pair(std::move(key), std::move(value));
    }

    std::map<std::string, CLI::Option*> options_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("cannot write " + path.string());
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- segment ---------------------------------------------------------------

struct SegmentArgs {
    std::string input;
    std::string out;
    std::string overlay;
    std::string diagnostics;
    std::string mrf_trace;
    bool timing = false;
};

int cmd_segment(const SegmentArgs& a, const PipelineConfig& config, std::ostream& err) {
    const RasterImage image = load_image(a.input);

    Prepared prepared = prepare(image, config);

    std::ostringstream trace_csv;
    TraceFn trace;
    if (!a.mrf_trace.empty()) {
        trace_csv << "outer_iteration,sweep,residual,energy\n";
        auto graph = std::make_shared<const AdjacencyGraph>(prepared.graph);
        trace = [&trace_csv, graph](int outer, int sweep, const BeliefState& st, double residual) {
            std::vector<int> labels(st.posterior.rows());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto row = st.posterior.row(i);
                labels[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
            }
            trace_csv << outer << ',' << sweep << ',' << csv_number(residual) << ','
                      << csv_number(energy(st, *graph, labels)) << '\n';
        };
    }
    SegmentResult result = run_prepared(std::move(prepared), config, trace);

    std::vector<fs::path> written;
    try {
        save_label_map(result.labels, a.out);
        written.emplace_back(a.out);
        if (!a.overlay.empty()) {
            save_image(render_overlay(image, result.labels), a.overlay);
            written.emplace_back(a.overlay);
        }
        if (!a.diagnostics.empty()) {
            write_text(a.diagnostics, to_json(result.diagnostics, config, a.timing).dump(2) + "\n");
            written.emplace_back(a.diagnostics);
        }
        if (!a.mrf_trace.empty()) {
            write_text(a.mrf_trace, trace_csv.str());
            written.emplace_back(a.mrf_trace);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
    err << "spseg: " << result.diagnostics.superpixels << " superpixels -> " << result.diagnostics.final_labels
        << " segments (" << to_string(result.diagnostics.termination) << ", "
        << result.diagnostics.iterations.size() << " iterations, " << result.diagnostics.total_seconds << " s)\n";
    return kOk;
}

// ---- features --------------------------------------------------------------

int cmd_features(const std::string& input, const std::string& out_path, const PipelineConfig& config) {
    const RasterImage image = load_image(input);
    const Prepared prepared = prepare(image, config);
    std::ostringstream csv;
    for (std::size_t i = 0; i < prepared.features.rows(); ++i) {
        const auto row = prepared.features.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) csv << (j ? "," : "") << csv_number(row[j]);
        csv << '\n';
    }
    write_text(out_path, csv.str());
    return kOk;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const std::string& labels_path, const std::vector<std::string>& mask_paths, int exact_limit,
                 const std::string& out_path, std::ostream& out) {
    const LabelMap lm = load_label_map(labels_path);
    std::vector<BinaryMask> masks;
    for (const auto& p : mask_paths) masks.push_back(load_mask(p));
    const std::string text = to_json(evaluate(lm, masks, exact_limit)).dump(2) + "\n";
    if (!out_path.empty()) write_text(out_path, text);
    out << text;
    return kOk;
}

// ---- batch -----------------------------------------------------------------

struct ManifestRow {
    int line = 0;
    fs::path image;
    std::vector<fs::path> masks;
};

std::vector<ManifestRow> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manifest " + path.string());
    const fs::path base = path.parent_path();
    std::vector<ManifestRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            const auto b = f.find_first_not_of(" \t");
            const auto e = f.find_last_not_of(" \t");
            fields.push_back(b == std::string::npos ? std::string{} : f.substr(b, e - b + 1));
        }
        if (fields.empty() || fields[0].empty()) continue;
        if (rows.empty() && fields[0] == "image") continue;  // header
        ManifestRow row;
        row.line = lineno;
        row.image = base / fields[0];
        for (std::size_t i = 1; i < fields.size(); ++i)
            if (!fields[i].empty()) row.masks.push_back(base / fields[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct BatchOutcome {
    bool ok = false;
    json record;
    std::string error;
    double f_single = 0.0, f_multi = 0.0, f_frag = 0.0;
};

BatchOutcome process_row(const ManifestRow& row, const PipelineConfig& config, const std::string& label_dir) {
    BatchOutcome o;
    try {
        if (row.masks.empty()) throw InvalidParams("row has no mask paths");
        const RasterImage image = load_image(row.image);
        std::vector<BinaryMask> masks;
        for (const auto& m : row.masks) masks.push_back(load_mask(m));
        const SegmentResult result = run(image, config);
        const EvalReport report = evaluate(result.labels, masks);
        if (!label_dir.empty()) save_label_map(result.labels, fs::path(label_dir) / (row.image.stem().string() + "_labels.png"));
        o.record = json{
            {"image", row.image.string()},
            {"superpixels", result.diagnostics.superpixels},
            {"final_labels", result.diagnostics.final_labels},
            {"termination", to_string(result.diagnostics.termination)},
            {"iterations", result.diagnostics.iterations.size()},
            {"metrics", to_json(report)},
        };
        o.f_single = report.mean_f_single;
        o.f_multi = report.mean_f_multi;
        o.f_frag = report.mean_f_frag;
        o.ok = true;
    } catch (const std::exception& e) {
        o.error = e.what();
    }
    return o;
}

int cmd_batch(const std::string& manifest, const std::string& out_path, const std::string& label_dir,
              const PipelineConfig& config, int jobs, std::ostream& out, std::ostream& err) {
    const auto rows = read_manifest(manifest);
    if (rows.empty()) {
        err << "spseg: manifest " << manifest << " has no rows\n";
        return kIoError;
    }
    if (!label_dir.empty()) fs::create_directories(label_dir);

    std::vector<BatchOutcome> outcomes(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) outcomes[i] = process_row(rows[i], config, label_dir);
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json images = json::array();
    json failures = json::array();
    std::vector<double> fs_single, fs_multi, fs_frag;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.ok) {
            images.push_back(o.record);
            fs_single.push_back(o.f_single);
            fs_multi.push_back(o.f_multi);
            fs_frag.push_back(o.f_frag);
        } else {
            failures.push_back(json{{"line", rows[i].line}, {"image", rows[i].image.string()}, {"error", o.error}});
            err << "spseg: " << rows[i].image.string() << ": " << o.error << "\n";
        }
    }
    auto summary = [](const std::vector<double>& v) {
        const auto [mean, half] = mean_ci95(v);
        return json{{"mean", mean}, {"ci95", half}};
    };
    const json report{
        {"n", fs_single.size()},
        {"images", std::move(images)},
        {"failures", std::move(failures)},
        {"aggregate", json{{"f_single", summary(fs_single)},
                           {"f_multi", summary(fs_multi)},
                           {"f_frag", summary(fs_frag)}}},
        {"config", to_json(config)},
    };
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        write_text(out_path, text);
    }
    return fs_single.empty() ? kIoError : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unsupervised superpixel segmentation with SVM relabeling and MRF regularization", "spseg"};
    app.require_subcommand(1);

    SegmentArgs seg;
    PipelineOptions seg_opts;
    CLI::App* segment = app.add_subcommand("segment", "Segment one image");
    segment->add_option("image", seg.input, "Input PNG or PPM")->required();
    segment->add_option("--out", seg.out, "Label map output (16-bit PNG or PGM)")->required();
    segment->add_option("--overlay", seg.overlay, "Optional mean-color overlay image");
    segment->add_option("--diagnostics", seg.diagnostics, "Optional diagnostics JSON");
    segment->add_option("--mrf-trace", seg.mrf_trace, "Optional per-sweep MRF residual/energy CSV");
    segment->add_flag("--timing", seg.timing, "Include wall-clock times in diagnostics");
    seg_opts.attach(segment, false);

    std::string labels_path, eval_out;
    std::vector<std::string> mask_paths;
    int exact_limit = 20;
    CLI::App* eval = app.add_subcommand("evaluate", "Score a label map against ground-truth masks");
    eval->add_option("labels", labels_path, "Label map")->required();
    eval->add_option("masks", mask_paths, "One to three foreground masks")->required()->expected(1, 3);
    eval->add_option("--exact-limit", exact_limit, "Largest segment count searched exhaustively")
        ->capture_default_str()
        ->check(CLI::Range(1, 30));
    eval->add_option("--out", eval_out, "Also write the report to this file");

    std::string manifest, batch_out, label_dir;
    PipelineOptions batch_opts;
    CLI::App* batch = app.add_subcommand("batch", "Segment and evaluate every row of a CSV manifest");
    batch->add_option("manifest", manifest, "CSV rows: image,mask[,mask[,mask]]")->required();
    batch->add_option("--out", batch_out, "Report JSON (default: standard output)");
    batch->add_option("--label-dir", label_dir, "Directory for per-image label maps");
    batch_opts.attach(batch, true);

    std::string feat_in, feat_out;
    PipelineOptions feat_opts;
    CLI::App* features = app.add_subcommand("features", "Dump the per-superpixel descriptor matrix as CSV");
    features->add_option("image", feat_in, "Input PNG or PPM")->required();
    features->add_option("--out", feat_out, "CSV output")->required();
    feat_opts.attach(features, false);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();
    try {
        app.parse(std::move(argv_rev));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "spseg: " << e.what() << "\n";
        CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kUsage;
    }

    try {
        if (segment->parsed()) {
            seg_opts.finalize();
            return cmd_segment(seg, seg_opts.config, err);
        }
        if (eval->parsed()) return cmd_evaluate(labels_path, mask_paths, exact_limit, eval_out, out);
        if (batch->parsed()) {
            batch_opts.finalize();
            return cmd_batch(manifest, batch_out, label_dir, batch_opts.config, batch_opts.jobs, out, err);
        }
        if (features->parsed()) {
            feat_opts.finalize();
            return cmd_features(feat_in, feat_out, feat_opts.config);
        }
    } catch (const UsageError& e) {
        err << "spseg: " << e.what() << "\n";
        return kUsage;
    } catch (const DimensionMismatch& e) {
        err << "spseg: " << e.what() << "\n";
        return kDimensionMismatch;
    } catch (const std::exception& e) {
        err << "spseg: " << e.what() << "\n";
        return kIoError;
    }
    return kUsage;
}

}  // namespace spseg::cli
