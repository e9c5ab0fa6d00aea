// riskgraph: drive the scene-risk pipeline from the command line.
// All diagnostics go to stderr; data lands only in the files named by
// --out/--report/--diag or the configured out_dir.

#include "riskgraph/classify.hpp"
#include "riskgraph/errors.hpp"
#include "riskgraph/graphs.hpp"
#include "riskgraph/ingest.hpp"
#include "riskgraph/io.hpp"
#include "riskgraph/kernels.hpp"
#include "riskgraph/labels.hpp"
#include "riskgraph/pipeline.hpp"
#include "riskgraph/scenes.hpp"
#include "riskgraph/synth.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace riskgraph;

std::string stage_digest(std::initializer_list<std::string_view> parts) {
    std::string all;
    for (const auto p : parts) {
        all += p;
        all += '\n';
    }
    return io::digest_hex(all);
}

std::vector<SceneFrame> load_frames(const std::string& frames_path, std::string& text_out) {
    text_out = io::read_file(frames_path);
    const std::vector<DriverLogRecord> records = ingest::read_jsonl(text_out);
    std::vector<SceneFrame> frames;
    frames.reserve(records.size());
    for (const DriverLogRecord& r : records) frames.push_back(scenes::to_birds_eye(r));
    return frames;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driver-specific risk recognition on traffic scene graphs"};
    app.require_subcommand(1);
    // Long-only help: the gram subcommand owns --h (neighborhood-hash depth),
    // which would collide with the stock -h,--help pair.
    app.set_help_flag("--help", "print this help message and exit");
    std::function<void()> action;

    // ---- synth ----------------------------------------------------------
    {
        auto* sub = app.add_subcommand("synth", "simulate a scenario into a CSV log");
        auto spec_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(1);
        sub->add_option("--spec", *spec_path, "scenario JSON")->required();
        sub->add_option("--seed", *seed, "simulation seed");
        sub->add_option("--out", *out, "output CSV path")->required();
        sub->callback([=, &action] {
            action = [=] {
                const std::string spec_text = io::read_file(*spec_path);
                const synth::ScenarioSpec spec = synth::parse_scenario(spec_text);
                const auto records = synth::generate_synthetic(spec, *seed);
                const std::string dig =
                    stage_digest({"synth", spec_text, std::to_string(*seed)});
                io::write_file(*out, "# digest=" + dig + "\n" +
                                         ingest::write_csv(records, ingest::LogSchema{}));
                std::cerr << "synth: " << records.size() << " records -> " << *out << "\n";
            };
        });
    }

    // ---- ingest ---------------------------------------------------------
    {
        auto* sub = app.add_subcommand("ingest", "parse and smooth a CSV log");
        auto input = std::make_shared<std::string>();
        auto schema_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto span = std::make_shared<int>(25);
        auto channels = std::make_shared<std::string>("all");
        sub->add_option("--input", *input, "CSV log")->required();
        sub->add_option("--schema", *schema_path, "column-name schema JSON");
        sub->add_option("--smooth-span", *span, "odd smoothing window length");
        sub->add_option("--channels", *channels, "smoothed channels: ax|all")
            ->check(CLI::IsMember({"ax", "all"}));
        sub->add_option("--out", *out, "output frames JSONL")->required();
        sub->callback([=, &action] {
            action = [=] {
                const std::string csv = io::read_file(*input);
                ingest::LogSchema schema;
                std::string schema_text;
                if (!schema_path->empty()) {
                    schema_text = io::read_file(*schema_path);
                    schema = ingest::parse_schema(schema_text);
                }
                ingest::ParseResult parsed = ingest::parse_log(csv, schema);
                std::vector<DriverLogRecord> recs = std::move(parsed.records);
                ingest::smooth_log(recs, static_cast<std::size_t>(*span),
                                   *channels == "all" ? ingest::SmoothChannels::all
                                                      : ingest::SmoothChannels::ax_only);
                const std::string dig =
                    stage_digest({"ingest", io::digest_hex(csv), schema_text,
                                  std::to_string(*span), *channels});
                io::write_file(*out, ingest::write_jsonl(recs, dig));
                if (parsed.skipped_rows > 0)
                    std::cerr << "ingest: skipped " << parsed.skipped_rows
                              << " malformed rows\n";
                std::cerr << "ingest: " << recs.size() << " frames -> " << *out << "\n";
            };
        });
    }

    // ---- extract --------------------------------------------------------
    {
        auto* sub = app.add_subcommand("extract", "cut interactive scenes out of a frame log");
        auto frames_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto window = std::make_shared<int>(50);
        auto tol = std::make_shared<double>(0.02);
        auto source = std::make_shared<std::string>("log");
        sub->add_option("--frames", *frames_path, "frames JSONL")->required();
        sub->add_option("--window", *window, "frames per candidate scene");
        sub->add_option("--straight-tol", *tol, "max |steer| for straight driving, rad");
        sub->add_option("--source", *source, "scene_ref prefix");
        sub->add_option("--out", *out, "output scenes JSONL")->required();
        sub->callback([=, &action] {
            action = [=] {
                std::string frames_text;
                const std::vector<SceneFrame> frames = load_frames(*frames_path, frames_text);
                scenes::ExtractParams ep;
                ep.window = static_cast<std::size_t>(*window);
                ep.straight_tol = *tol;
                const std::vector<Scene> scs = scenes::extract_scenes(frames, ep, *source);
                if (scs.empty()) throw ExtractionError("no qualifying scenes in the input log");
                const std::string dig =
                    stage_digest({"extract", io::digest_hex(frames_text),
                                  std::to_string(*window), io::format_double(*tol), *source});
                io::write_file(*out, scenes::write_scenes_jsonl(scs, dig));
                std::cerr << "extract: " << scs.size() << " scenes -> " << *out << "\n";
            };
        });
    }

    // ---- label ----------------------------------------------------------
    {
        auto* sub = app.add_subcommand("label", "cluster braking responses into risk levels");
        auto scenes_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto diag = std::make_shared<std::string>();
        auto feature = std::make_shared<std::string>("one");
        auto k_str = std::make_shared<std::string>("auto");
        auto seed = std::make_shared<std::uint64_t>(0);
        auto k_min = std::make_shared<int>(2);
        auto k_max = std::make_shared<int>(10);
        auto kpca_m = std::make_shared<int>(2);
        sub->add_option("--scenes", *scenes_path, "scenes JSONL")->required();
        sub->add_option("--feature", *feature, "clustering feature set: one|two")
            ->check(CLI::IsMember({"one", "two"}));
        sub->add_option("--k", *k_str, "cluster count, or \"auto\" for silhouette argmax");
        sub->add_option("--k-min", *k_min, "auto selection lower bound");
        sub->add_option("--k-max", *k_max, "auto selection upper bound");
        sub->add_option("--kpca-components", *kpca_m, "projection width for feature two");
        sub->add_option("--seed", *seed, "clustering seed");
        sub->add_option("--out", *out, "output labels JSON")->required();
        sub->add_option("--diag", *diag, "per-k RSS/SC table CSV");
        sub->callback([=, &action] {
            action = [=] {
                const std::string scenes_text = io::read_file(*scenes_path);
                const std::vector<Scene> scs = scenes::read_scenes_jsonl(scenes_text);
                int k = 0;
                if (*k_str != "auto") {
                    k = static_cast<int>(io::parse_int(*k_str));
                    if (k < 1) throw ParameterError("--k must be \"auto\" or >= 1");
                }
                const std::string dig = stage_digest(
                    {"label", io::digest_hex(scenes_text), *feature, *k_str,
                     std::to_string(*seed), std::to_string(*k_min), std::to_string(*k_max),
                     std::to_string(*kpca_m)});
                const pipeline::LabelStageResult r = pipeline::label_stage(
                    scs, *feature, k, *k_min, *k_max, *kpca_m, *seed, dig);
                io::write_file(*out, labels::write_labels_json(r.file));
                if (!diag->empty())
                    io::write_file(*diag, "# digest=" + dig + "\n" +
                                              labels::diag_table_csv(r.table));
                std::cerr << "label: k=" << r.file.k << ", " << r.file.labels.level_count
                          << " levels -> " << *out << "\n";
            };
        });
    }

    // ---- graphs ---------------------------------------------------------
    {
        auto* sub = app.add_subcommand("graphs", "build scene graphs from anchor frames");
        auto scenes_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto lanes = std::make_shared<int>(3);
        auto rows = std::make_shared<int>(10);
        auto cell = std::make_shared<double>(10.0);
        auto range = std::make_shared<double>(100.0);
        sub->add_option("--scenes", *scenes_path, "scenes JSONL")->required();
        sub->add_option("--lanes", *lanes, "grid lanes");
        sub->add_option("--rows", *rows, "grid rows");
        sub->add_option("--cell-length", *cell, "cell length, m");
        sub->add_option("--range", *range, "forward range, m");
        sub->add_option("--out", *out, "output graphs JSON")->required();
        sub->callback([=, &action] {
            action = [=] {
                const std::string scenes_text = io::read_file(*scenes_path);
                const std::vector<Scene> scs = scenes::read_scenes_jsonl(scenes_text);
                GridSpec grid{*lanes, *rows, *cell, *range};
                if (!grid.consistent())
                    throw ParameterError("grid: rows * cell_length must equal range");
                std::vector<SceneGraph> gs;
                gs.reserve(scs.size());
                for (const Scene& s : scs)
                    gs.push_back(graphs::build_graph(s.anchor_frame(), grid, s.scene_ref));
                const std::string dig = stage_digest(
                    {"graphs", io::digest_hex(scenes_text), std::to_string(*lanes),
                     std::to_string(*rows), io::format_double(*cell),
                     io::format_double(*range)});
                io::write_file(*out, graphs::write_graphs_json(gs, grid, dig));
                std::cerr << "graphs: " << gs.size() << " graphs -> " << *out << "\n";
            };
        });
    }

    // ---- gram -----------------------------------------------------------
    {
        auto* sub = app.add_subcommand("gram", "compute a kernel Gram matrix over graphs");
        auto graphs_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto kernel = std::make_shared<std::string>();
        auto h = std::make_shared<int>(3);
        auto bits = std::make_shared<int>(16);
        auto seed = std::make_shared<std::uint64_t>(7);
        auto raw = std::make_shared<bool>(false);
        sub->add_option("--graphs", *graphs_path, "graphs JSON")->required();
        sub->add_option("--kernel", *kernel, "spgk|nhgk")
            ->required()
            ->check(CLI::IsMember({"spgk", "nhgk"}));
        sub->add_option("--h", *h, "neighborhood-hash iterations");
        sub->add_option("--bits", *bits, "neighborhood-hash width, 8..64");
        sub->add_option("--seed", *seed, "label-hash seed");
        sub->add_flag("--raw", *raw, "skip unit-diagonal normalization (spgk)");
        sub->add_option("--out", *out, "output Gram binary")->required();
        sub->callback([=, &action] {
            action = [=] {
                const std::string graphs_text = io::read_file(*graphs_path);
                const std::vector<SceneGraph> gs = graphs::read_graphs_json(graphs_text);
                kernels::KernelConfig kc;
                kc.name = *kernel;
                kc.h = *h;
                kc.bits = *bits;
                kc.seed = *seed;
                kc.normalize = !*raw;
                kernels::KernelMatrix m = kernels::gram_matrix(gs, kc);
                m.digest = stage_digest({"gram", io::digest_hex(graphs_text), kc.to_json()});
                kernels::write_gram(*out, m);
                std::cerr << "gram: " << m.n() << "x" << m.n() << " (" << kc.name << ") -> "
                          << *out << "\n";
            };
        });
    }

    // ---- train ----------------------------------------------------------
    {
        auto* sub = app.add_subcommand("train", "train and cross-validate on a Gram matrix");
        auto gram_path = std::make_shared<std::string>();
        auto labels_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto report = std::make_shared<std::string>();
        auto C = std::make_shared<double>(1.0);
        auto folds = std::make_shared<int>(5);
        auto seed = std::make_shared<std::uint64_t>(0);
        sub->add_option("--gram", *gram_path, "Gram binary")->required();
        sub->add_option("--labels", *labels_path, "labels JSON")->required();
        sub->add_option("--C", *C, "soft-margin penalty");
        sub->add_option("--folds", *folds, "cross-validation folds");
        sub->add_option("--seed", *seed, "fold-assignment seed");
        sub->add_option("--out", *out, "output model JSON")->required();
        sub->add_option("--report", *report, "output evaluation report JSON")->required();
        sub->callback([=, &action] {
            action = [=] {
                const kernels::KernelMatrix gram = kernels::read_gram(*gram_path);
                const labels::LabelsFile lf =
                    labels::read_labels_json(io::read_file(*labels_path));
                if (lf.refs != gram.refs)
                    throw ValidationError(
                        "labels and Gram reference different scene sets; regenerate them "
                        "from the same scenes file");
                const std::string dig =
                    stage_digest({"train", gram.digest, lf.digest, io::format_double(*C),
                                  std::to_string(*folds), std::to_string(*seed)});
                const classify::CvResult cv = classify::cross_validate_gram(
                    gram, lf.labels.levels, *C, *folds, *seed);
                const classify::TrainedModel model =
                    classify::train_svm(gram, lf.labels.levels, *C);
                io::write_file(*out, classify::write_model_json(model, dig));
                io::write_file(*report, classify::write_report_json(cv, dig));
                std::cerr << "train: accuracy " << cv.confusion.accuracy() << " over "
                          << *folds << " folds -> " << *report << "\n";
            };
        });
    }

    // ---- report ---------------------------------------------------------
    {
        auto* sub = app.add_subcommand("report", "emit plot-feed CSVs from run artifacts");
        auto config = std::make_shared<std::string>();
        sub->add_option("--config", *config, "pipeline config (TOML or JSON)")->required();
        sub->callback([=, &action] {
            action = [=] {
                const pipeline::PipelineConfig cfg = pipeline::PipelineConfig::load(*config);
                cfg.check();
                pipeline::emit_figure_data(cfg);
                std::cerr << "report: figure data -> " << cfg.out_dir << "\n";
            };
        });
    }

    // ---- run ------------------------------------------------------------
    {
        auto* sub = app.add_subcommand("run", "execute the full pipeline");
        auto config = std::make_shared<std::string>();
        auto force = std::make_shared<bool>(false);
        sub->add_option("--config", *config, "pipeline config (TOML or JSON)")->required();
        sub->add_flag("--force", *force, "overwrite intermediates from other configs");
        sub->callback([=, &action] {
            action = [=] {
                const pipeline::PipelineConfig cfg = pipeline::PipelineConfig::load(*config);
                const pipeline::RunReport rep = pipeline::run_pipeline(cfg, *force);
                std::cerr << "run: " << rep.scenes << " scenes, k=" << rep.k
                          << ", accuracy spgk=" << rep.accuracy_spgk
                          << " nhgk=" << rep.accuracy_nhgk << " vrm=" << rep.accuracy_vrm
                          << " -> " << cfg.out_dir << "/report.json\n";
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, std::cerr, std::cerr);
    }

    try {
        action();
        return 0;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EmptyInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ExtractionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 7;
    } catch (const TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 8;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 9;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
