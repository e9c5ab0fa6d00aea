#include "riskgraph/pipeline.hpp"

#include "riskgraph/classify.hpp"
#include "riskgraph/errors.hpp"
#include "riskgraph/graphs.hpp"
#include "riskgraph/ingest.hpp"
#include "riskgraph/io.hpp"
#include "riskgraph/kernels.hpp"
#include "riskgraph/scenes.hpp"
#include "riskgraph/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <utility>

namespace riskgraph::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t as_u64(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw SchemaError("config key " + key + " must be a non-negative integer");
}

int as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw SchemaError("config key " + key + " must be an integer");
    return v.get<int>();
}

double as_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw SchemaError("config key " + key + " must be a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw SchemaError("config key " + key + " must be a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw SchemaError("config key " + key + " must be a boolean");
    return v.get<bool>();
}

PipelineConfig apply_config(const json& obj) {
    if (!obj.is_object()) throw SchemaError("pipeline config must be a flat object");
    PipelineConfig c;
    for (const auto& [key, v] : obj.items()) {
        if (key == "driver") c.driver = as_string(v, key);
        else if (key == "input_csv") c.input_csv = as_string(v, key);
        else if (key == "schema") c.schema = as_string(v, key);
        else if (key == "scenario") c.scenario = as_string(v, key);
        else if (key == "synth_seed") c.synth_seed = as_u64(v, key);
        else if (key == "out_dir") c.out_dir = as_string(v, key);
        else if (key == "smooth_span") c.smooth_span = as_int(v, key);
        else if (key == "smooth_channels") c.smooth_channels = as_string(v, key);
        else if (key == "window") c.window = as_int(v, key);
        else if (key == "straight_tol") c.straight_tol = as_double(v, key);
        else if (key == "grid_lanes") c.grid.lanes = as_int(v, key);
        else if (key == "grid_rows") c.grid.rows = as_int(v, key);
        else if (key == "grid_cell_length") c.grid.cell_length = as_double(v, key);
        else if (key == "grid_range") c.grid.range = as_double(v, key);
        else if (key == "spgk_normalize") c.spgk_normalize = as_bool(v, key);
        else if (key == "nhgk_h") c.nhgk_h = as_int(v, key);
        else if (key == "nhgk_bits") c.nhgk_bits = as_int(v, key);
        else if (key == "nhgk_seed") c.nhgk_seed = as_u64(v, key);
        else if (key == "feature") c.feature = as_string(v, key);
        else if (key == "k") c.k = as_int(v, key);
        else if (key == "k_min") c.k_min = as_int(v, key);
        else if (key == "k_max") c.k_max = as_int(v, key);
        else if (key == "kpca_components") c.kpca_components = as_int(v, key);
        else if (key == "label_seed") c.label_seed = as_u64(v, key);
        else if (key == "C") c.C = as_double(v, key);
        else if (key == "folds") c.folds = as_int(v, key);
        else if (key == "fold_seed") c.fold_seed = as_u64(v, key);
        else throw SchemaError("unknown config key: " + key);
    }
    return c;
}

/// Rethrows the in-flight exception with the stage name prefixed,
/// preserving its class so the CLI exit-code mapping survives.
[[noreturn]] void rethrow_stage(const std::string& name) {
    const std::string p = "stage " + name + ": ";
    try {
        throw;
    } catch (const ParameterError& e) {
        throw ParameterError(p + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(p + e.what());
    } catch (const EmptyInputError& e) {
        throw EmptyInputError(p + e.what());
    } catch (const SpecError& e) {
        throw SpecError(p + e.what());
    } catch (const ExtractionError& e) {
        throw ExtractionError(p + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(p + e.what());
    } catch (const TrainingError& e) {
        throw TrainingError(p + e.what());
    } catch (const IoError& e) {
        throw IoError(p + e.what());
    } catch (const Error& e) {
        throw Error(p + e.what());
    } catch (const std::exception& e) {
        throw Error(p + e.what());
    }
}

template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return std::forward<F>(f)();
    } catch (...) {
        rethrow_stage(name);
    }
}

/// Digest embedded in an artifact, or nullopt when unreadable.
std::optional<std::string> artifact_digest(const fs::path& p) {
    try {
        const std::string ext = p.extension().string();
        if (ext == ".bin") return kernels::read_gram(p).digest;
        const std::string text = io::read_file(p);
        if (ext == ".jsonl") {
            const auto lines = io::split_lines(text);
            if (lines.empty()) return std::nullopt;
            return json::parse(lines[0]).at("digest").get<std::string>();
        }
        if (ext == ".csv") {
            constexpr std::string_view tag = "# digest=";
            const auto lines = io::split_lines(text);
            if (lines.empty() || lines[0].rfind(tag, 0) != 0) return std::nullopt;
            return lines[0].substr(tag.size());
        }
        return json::parse(text).at("digest").get<std::string>();
    } catch (...) {
        return std::nullopt;
    }
}

json parse_json_file(const fs::path& p) {
    try {
        return json::parse(io::read_file(p));
    } catch (const json::exception& e) {
        throw SchemaError(p.string() + ": " + e.what());
    }
}

} // namespace

void PipelineConfig::check() const {
    auto bad = [](const std::string& what) { throw ParameterError("config: " + what); };
    if (driver.empty()) bad("driver must not be empty");
    if (out_dir.empty()) bad("out_dir must not be empty");
    if (input_csv.empty() && scenario.empty())
        bad("no input source: set input_csv or scenario");
    if (smooth_span < 3 || smooth_span % 2 == 0)
        bad("smooth_span must be odd and >= 3");
    if (smooth_channels != "ax" && smooth_channels != "all")
        bad("smooth_channels must be \"ax\" or \"all\"");
    if (window < 2) bad("window must be >= 2");
    if (!(straight_tol > 0.0)) bad("straight_tol must be positive");
    if (!grid.consistent()) bad("grid: rows * cell_length must equal range");
    if (nhgk_h < 1) bad("nhgk_h must be >= 1");
    if (nhgk_bits < 8 || nhgk_bits > 64) bad("nhgk_bits must be in [8, 64]");
    if (feature != "one" && feature != "two") bad("feature must be \"one\" or \"two\"");
    if (k < 0) bad("k must be 0 (auto) or positive");
    if (k == 0 && (k_min < 2 || k_max < k_min)) bad("k range needs 2 <= k_min <= k_max");
    if (kpca_components < 1) bad("kpca_components must be >= 1");
    if (!(C > 0.0)) bad("C must be positive");
    if (folds < 2) bad("folds must be >= 2");
}

std::string PipelineConfig::to_json() const {
    json j{{"driver", driver},
           {"input_csv", input_csv},
           {"schema", schema},
           {"scenario", scenario},
           {"synth_seed", synth_seed},
           {"out_dir", out_dir},
           {"smooth_span", smooth_span},
           {"smooth_channels", smooth_channels},
           {"window", window},
           {"straight_tol", straight_tol},
           {"grid_lanes", grid.lanes},
           {"grid_rows", grid.rows},
           {"grid_cell_length", grid.cell_length},
           {"grid_range", grid.range},
           {"spgk_normalize", spgk_normalize},
           {"nhgk_h", nhgk_h},
           {"nhgk_bits", nhgk_bits},
           {"nhgk_seed", nhgk_seed},
           {"feature", feature},
           {"k", k},
           {"k_min", k_min},
           {"k_max", k_max},
           {"kpca_components", kpca_components},
           {"label_seed", label_seed},
           {"C", C},
           {"folds", folds},
           {"fold_seed", fold_seed}};
    return j.dump(2) + "\n";
}

std::string PipelineConfig::digest() const { return io::digest_hex(to_json()); }

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad config JSON: ") + e.what());
    }
    return apply_config(j);
}

PipelineConfig PipelineConfig::from_toml(const std::string& text) {
    json obj = json::object();
    for (const std::string& raw : io::split_lines(text)) {
        const std::string_view line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[')
            throw SchemaError("TOML tables are not supported in pipeline configs; use flat keys");
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw SchemaError("bad TOML line: " + raw);
        const std::string key{trim(line.substr(0, eq))};
        if (key.empty() ||
            !std::all_of(key.begin(), key.end(), [](unsigned char ch) {
                return std::isalnum(ch) || ch == '_';
            }))
            throw SchemaError("bad TOML key: " + raw);
        std::string_view val = trim(line.substr(eq + 1));
        if (val.empty()) throw SchemaError("missing TOML value: " + raw);

        if (val[0] == '"') {
            std::string s;
            std::size_t i = 1;
            bool closed = false;
            for (; i < val.size(); ++i) {
                const char ch = val[i];
                if (ch == '\\') {
                    if (i + 1 >= val.size()) throw SchemaError("dangling escape: " + raw);
                    const char n = val[++i];
                    if (n != '"' && n != '\\')
                        throw SchemaError("unsupported string escape in: " + raw);
                    s += n;
                } else if (ch == '"') {
                    closed = true;
                    ++i;
                    break;
                } else {
                    s += ch;
                }
            }
            const std::string_view rest = trim(val.substr(i));
            if (!closed || (!rest.empty() && rest[0] != '#'))
                throw SchemaError("bad TOML string value: " + raw);
            obj[key] = s;
        } else {
            if (const std::size_t h = val.find('#'); h != std::string_view::npos)
                val = trim(val.substr(0, h));
            const bool integral =
                !val.empty() &&
                std::all_of(val.begin() + (val[0] == '+' || val[0] == '-' ? 1 : 0), val.end(),
                            [](unsigned char ch) { return std::isdigit(ch); }) &&
                std::isdigit(static_cast<unsigned char>(val.back()));
            if (val == "true") obj[key] = true;
            else if (val == "false") obj[key] = false;
            // from_chars takes no explicit plus sign, so shed it here
            else if (integral) obj[key] = io::parse_int(val[0] == '+' ? val.substr(1) : val);
            else obj[key] = io::parse_double(val);
        }
    }
    return apply_config(obj);
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    const std::string text = io::read_file(path);
    const std::string ext = path.extension().string();
    if (ext == ".json") return from_json(text);
    if (ext == ".toml") return from_toml(text);
    const std::string_view head = trim(text);
    return (!head.empty() && head[0] == '{') ? from_json(text) : from_toml(text);
}

LabelStageResult label_stage(const std::vector<Scene>& scenes, const std::string& feature,
                             int k, int k_min, int k_max, int kpca_components,
                             std::uint64_t seed, const std::string& digest) {
    if (scenes.empty()) throw EmptyInputError("no scenes to label");
    if (feature != "one" && feature != "two")
        throw ParameterError("feature must be \"one\" or \"two\", got \"" + feature + "\"");

    std::vector<double> response(scenes.size());
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        response[i] = scenes[i].response_ax;
        if (response[i] < 0.0) neg.push_back(i);
    }
    if (neg.size() < 2)
        throw ValidationError("need at least 2 braking scenes to cluster, found " +
                              std::to_string(neg.size()));

    const bool five = feature == "two";
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(neg.size()), five ? 5 : 1);
    for (std::size_t r = 0; r < neg.size(); ++r) {
        const OpFeature& op = scenes[neg[r]].op;
        raw(static_cast<Eigen::Index>(r), 0) = op.ax;
        if (five) {
            raw(static_cast<Eigen::Index>(r), 1) = op.ay;
            raw(static_cast<Eigen::Index>(r), 2) = op.steer;
            raw(static_cast<Eigen::Index>(r), 3) = op.brake;
            raw(static_cast<Eigen::Index>(r), 4) = op.throttle;
        }
    }

    Eigen::MatrixXd points = labels::normalize_features(raw).values;
    if (five) {
        const double gamma = labels::kpca_default_gamma(points);
        const labels::KpcaResult proj =
            labels::kpca_project(points, gamma, kpca_components);
        if (proj.kept < 1)
            throw ValidationError("feature projection collapsed to rank 0; scenes are "
                                  "indistinguishable under feature \"two\"");
        points = proj.projected;
    }

    LabelStageResult out;
    labels::ClusteringResult cluster;
    if (k > 0) {
        cluster = labels::kmeans(points, k, seed);
        out.table.push_back({k, cluster.rss, cluster.silhouette});
    } else {
        const int hi = std::min<int>(k_max, static_cast<int>(points.rows()));
        if (hi < k_min)
            throw ParameterError("fewer braking scenes (" + std::to_string(points.rows()) +
                                 ") than k_min = " + std::to_string(k_min));
        const labels::SelectKResult sel = labels::select_k(points, k_min, hi, seed);
        out.table = sel.table;
        cluster = labels::kmeans(points, sel.k, seed);
    }

    out.file.labels = labels::to_risk_levels(cluster, response);
    out.file.refs.reserve(scenes.size());
    for (const Scene& s : scenes) out.file.refs.push_back(s.scene_ref);
    out.file.k = cluster.k;
    out.file.feature = feature;
    out.file.seed = seed;
    out.file.digest = digest;
    return out;
}

std::string write_run_report_json(const RunReport& r) {
    json j{{"digest", r.digest},
           {"driver", r.driver},
           {"scenes", r.scenes},
           {"k", r.k},
           {"level_count", r.level_count},
           {"accuracy_spgk", r.accuracy_spgk},
           {"accuracy_nhgk", r.accuracy_nhgk},
           {"accuracy_vrm", r.accuracy_vrm}};
    return j.dump(2) + "\n";
}

RunReport read_run_report_json(const std::string& text) {
    RunReport r;
    try {
        const json j = json::parse(text);
        r.digest = j.at("digest").get<std::string>();
        r.driver = j.at("driver").get<std::string>();
        r.scenes = j.at("scenes").get<int>();
        r.k = j.at("k").get<int>();
        r.level_count = j.at("level_count").get<int>();
        r.accuracy_spgk = j.at("accuracy_spgk").get<double>();
        r.accuracy_nhgk = j.at("accuracy_nhgk").get<double>();
        r.accuracy_vrm = j.at("accuracy_vrm").get<double>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad run report JSON: ") + e.what());
    }
    return r;
}

RunReport run_pipeline(const PipelineConfig& cfg, bool force) {
    cfg.check();
    const std::string dig = cfg.digest();
    fs::create_directories(cfg.out_dir);
    auto path = [&](std::string_view name) { return fs::path(cfg.out_dir) / name; };

    // Reuse an intermediate only when it carries this exact config digest;
    // a foreign digest means a stale tree from another configuration.
    auto fresh = [&](const fs::path& p) {
        if (!fs::exists(p)) return false;
        const std::optional<std::string> d = artifact_digest(p);
        if (d && *d == dig) return true;
        if (!force)
            throw ValidationError("stale intermediate " + p.string() +
                                  ": its config digest does not match this run "
                                  "(use --force to overwrite)");
        return false;
    };

    const std::vector<DriverLogRecord> records = stage("ingest", [&] {
        const fs::path frames_p = path("frames.jsonl");
        if (fresh(frames_p)) return ingest::read_jsonl(io::read_file(frames_p));

        std::string csv;
        if (cfg.input_csv.empty()) {
            const fs::path synth_p = path("synth.csv");
            if (fresh(synth_p)) {
                csv = io::read_file(synth_p);
            } else {
                const synth::ScenarioSpec spec =
                    synth::parse_scenario(io::read_file(cfg.scenario));
                const auto raw = synth::generate_synthetic(spec, cfg.synth_seed);
                csv = "# digest=" + dig + "\n" + ingest::write_csv(raw, ingest::LogSchema{});
                io::write_file(synth_p, csv);
            }
        } else {
            csv = io::read_file(cfg.input_csv);
        }

        ingest::LogSchema schema;
        if (!cfg.schema.empty()) schema = ingest::parse_schema(io::read_file(cfg.schema));
        ingest::ParseResult parsed = ingest::parse_log(csv, schema);
        std::vector<DriverLogRecord> recs = std::move(parsed.records);
        ingest::smooth_log(recs, static_cast<std::size_t>(cfg.smooth_span),
                           cfg.smooth_channels == "all" ? ingest::SmoothChannels::all
                                                        : ingest::SmoothChannels::ax_only);
        io::write_file(frames_p, ingest::write_jsonl(recs, dig));
        return recs;
    });

    const std::vector<Scene> scs = stage("extract", [&] {
        const fs::path p = path("scenes.jsonl");
        if (fresh(p)) return scenes::read_scenes_jsonl(io::read_file(p));
        std::vector<SceneFrame> frames;
        frames.reserve(records.size());
        for (const DriverLogRecord& r : records) frames.push_back(scenes::to_birds_eye(r));
        scenes::ExtractParams ep;
        ep.window = static_cast<std::size_t>(cfg.window);
        ep.straight_tol = cfg.straight_tol;
        std::vector<Scene> out = scenes::extract_scenes(frames, ep, cfg.driver);
        if (out.empty()) throw ExtractionError("no qualifying scenes in the input log");
        io::write_file(p, scenes::write_scenes_jsonl(out, dig));
        return out;
    });

    const labels::LabelsFile lf = stage("label", [&] {
        const fs::path p = path("labels.json");
        if (fresh(p) && fresh(path("diag.csv")))
            return labels::read_labels_json(io::read_file(p));
        LabelStageResult r = label_stage(scs, cfg.feature, cfg.k, cfg.k_min, cfg.k_max,
                                         cfg.kpca_components, cfg.label_seed, dig);
        io::write_file(p, labels::write_labels_json(r.file));
        io::write_file(path("diag.csv"),
                       "# digest=" + dig + "\n" + labels::diag_table_csv(r.table));
        return r.file;
    });
    if (lf.refs.size() != scs.size())
        throw ValidationError("labels.json covers " + std::to_string(lf.refs.size()) +
                              " scenes, the scene list has " + std::to_string(scs.size()));
    for (std::size_t i = 0; i < scs.size(); ++i)
        if (lf.refs[i] != scs[i].scene_ref)
            throw ValidationError("labels.json is out of step with scenes.jsonl at " +
                                  scs[i].scene_ref);

    const std::vector<SceneGraph> gs = stage("graphs", [&] {
        const fs::path p = path("graphs.json");
        if (fresh(p)) return graphs::read_graphs_json(io::read_file(p));
        std::vector<SceneGraph> out;
        out.reserve(scs.size());
        for (const Scene& s : scs)
            out.push_back(graphs::build_graph(s.anchor_frame(), cfg.grid, s.scene_ref));
        io::write_file(p, graphs::write_graphs_json(out, cfg.grid, dig));
        return out;
    });

    auto gram_stage = [&](const char* fname, const kernels::KernelConfig& kc) {
        return stage("gram", [&] {
            const fs::path p = path(fname);
            if (fresh(p)) return kernels::read_gram(p);
            kernels::KernelMatrix m = kernels::gram_matrix(gs, kc);
            m.digest = dig;
            kernels::write_gram(p, m);
            return m;
        });
    };
    kernels::KernelConfig spgk_cfg;
    spgk_cfg.name = "spgk";
    spgk_cfg.normalize = cfg.spgk_normalize;
    kernels::KernelConfig nhgk_cfg;
    nhgk_cfg.name = "nhgk";
    nhgk_cfg.h = cfg.nhgk_h;
    nhgk_cfg.bits = cfg.nhgk_bits;
    nhgk_cfg.seed = cfg.nhgk_seed;
    const kernels::KernelMatrix gram_spgk = gram_stage("gram_spgk.bin", spgk_cfg);
    const kernels::KernelMatrix gram_nhgk = gram_stage("gram_nhgk.bin", nhgk_cfg);
    for (const kernels::KernelMatrix* m : {&gram_spgk, &gram_nhgk})
        if (m->refs != lf.refs)
            throw ValidationError("gram refs are out of step with the labeled scenes");

    const std::vector<int>& levels = lf.labels.levels;
    auto train_stage = [&](const kernels::KernelMatrix& gram, const char* model_file,
                           const char* report_file) {
        return stage("train", [&] {
            const fs::path mp = path(model_file);
            const fs::path rp = path(report_file);
            if (fresh(mp) && fresh(rp))
                return parse_json_file(rp).at("accuracy").get<double>();
            const classify::CvResult cv =
                classify::cross_validate_gram(gram, levels, cfg.C, cfg.folds, cfg.fold_seed);
            const classify::TrainedModel model = classify::train_svm(gram, levels, cfg.C);
            io::write_file(mp, classify::write_model_json(model, dig));
            io::write_file(rp, classify::write_report_json(cv, dig));
            return cv.confusion.accuracy();
        });
    };

    RunReport rep;
    rep.digest = dig;
    rep.driver = cfg.driver;
    rep.scenes = static_cast<int>(scs.size());
    rep.k = lf.k;
    rep.level_count = lf.labels.level_count;
    rep.accuracy_spgk = train_stage(gram_spgk, "model_spgk.json", "report_spgk.json");
    rep.accuracy_nhgk = train_stage(gram_nhgk, "model_nhgk.json", "report_nhgk.json");

    rep.accuracy_vrm = stage("train", [&] {
        const fs::path mp = path("model_vrm.json");
        const fs::path rp = path("report_vrm.json");
        if (fresh(mp) && fresh(rp)) return parse_json_file(rp).at("accuracy").get<double>();
        Eigen::MatrixXd feats(static_cast<Eigen::Index>(scs.size()), 4);
        for (std::size_t i = 0; i < scs.size(); ++i) {
            const VrmFeature f = scenes::vrm_feature(scs[i]);
            feats(static_cast<Eigen::Index>(i), 0) = f.dx;
            feats(static_cast<Eigen::Index>(i), 1) = f.dy;
            feats(static_cast<Eigen::Index>(i), 2) = f.dvx;
            feats(static_cast<Eigen::Index>(i), 3) = f.dvy;
        }
        const classify::CvResult cv =
            classify::cross_validate_features(feats, levels, cfg.C, cfg.folds, cfg.fold_seed);
        kernels::KernelMatrix lin = kernels::linear_gram(
            labels::normalize_features(feats).values, lf.refs);
        lin.digest = dig;
        const classify::TrainedModel model = classify::train_svm(lin, levels, cfg.C);
        io::write_file(mp, classify::write_model_json(model, dig));
        io::write_file(rp, classify::write_report_json(cv, dig));
        return cv.confusion.accuracy();
    });

    stage("report", [&] {
        io::write_file(path("report.json"), write_run_report_json(rep));
        emit_figure_data(cfg);
        return 0;
    });
    return rep;
}

void emit_figure_data(const PipelineConfig& cfg) {
    const std::string dig = cfg.digest();
    auto path = [&](std::string_view name) { return fs::path(cfg.out_dir) / name; };
    const std::string comment = "# digest=" + dig + "\n";

    // k-selection curve: the label stage's diagnostics table verbatim
    io::write_file(path("fig_k_selection.csv"), io::read_file(path("diag.csv")));

    // per-level response values (histogram raw data)
    const labels::LabelsFile lf = labels::read_labels_json(io::read_file(path("labels.json")));
    const std::vector<Scene> scs = scenes::read_scenes_jsonl(io::read_file(path("scenes.jsonl")));
    if (lf.refs.size() != scs.size())
        throw ValidationError("labels.json covers a different scene set than scenes.jsonl");
    std::string hist = comment + "level,response_ax\n";
    for (std::size_t i = 0; i < scs.size(); ++i) {
        if (lf.refs[i] != scs[i].scene_ref)
            throw ValidationError("labels.json is out of step with scenes.jsonl at " +
                                  scs[i].scene_ref);
        hist += std::to_string(lf.labels.levels[i]) + ',' +
                io::format_double(scs[i].response_ax) + '\n';
    }
    io::write_file(path("fig_response_levels.csv"), hist);

    // confusion cells per model + the accuracy bars
    std::string bars = comment + "model,accuracy\n";
    const std::pair<const char*, const char*> models[] = {
        {"spgk", "report_spgk.json"}, {"nhgk", "report_nhgk.json"}, {"vrm", "report_vrm.json"}};
    for (const auto& [name, report_file] : models) {
        const json rj = parse_json_file(path(report_file));
        classify::ConfusionMatrix cm;
        try {
            cm.classes = rj.at("classes").get<std::vector<int>>();
            cm.counts = rj.at("confusion").get<std::vector<std::vector<long long>>>();
            bars += std::string(name) + ',' +
                    io::format_double(rj.at("accuracy").get<double>()) + '\n';
        } catch (const json::exception& e) {
            throw SchemaError(std::string(report_file) + ": " + e.what());
        }
        io::write_file(path(std::string("fig_confusion_") + name + ".csv"),
                       comment + classify::confusion_csv(cm));
    }
    io::write_file(path("fig_accuracy.csv"), bars);
}

} // namespace riskgraph::pipeline
