#include "egograph.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <string>

#include "egograph/critical.hpp"
#include "egograph/dataset_io.hpp"
#include "egograph/dot_export.hpp"
#include "egograph/errors.hpp"
#include "egograph/model.hpp"
#include "egograph/synth.hpp"

using json = nlohmann::json;

struct eg_dataset {
    egograph::Dataset data;
};

struct eg_model {
    egograph::Model model;
    std::uint64_t file_hash = 0;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
eg_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return EG_OK;
    } catch (const egograph::ConfigError& e) {
        g_last_error = e.what();
        return EG_INVALID_ARGUMENT;
    } catch (const egograph::ArgumentError& e) {
        g_last_error = e.what();
        return EG_INVALID_ARGUMENT;
    } catch (const egograph::FormatError& e) {
        g_last_error = e.what();
        return EG_INVALID_ARGUMENT;
    } catch (const egograph::ConsistencyError& e) {
        g_last_error = e.what();
        return EG_INVALID_ARGUMENT;
    } catch (const egograph::InsufficientDataError& e) {
        g_last_error = e.what();
        return EG_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return EG_ERROR;
    } catch (...) {
        g_last_error = "unknown error";
        return EG_ERROR;
    }
}

eg_status invalid(const char* message) {
    g_last_error = message;
    return EG_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* eg_version(void) { return "0.1.0"; }

const char* eg_last_error(void) { return g_last_error.c_str(); }

void eg_string_free(char* s) { delete[] s; }

eg_status eg_dataset_load(const char* directory, const char* name, eg_dataset** out) {
    if (!directory || !out) return invalid("eg_dataset_load: null argument");
    return guarded([&]() {
        if (!std::filesystem::is_directory(directory)) {
            throw egograph::FormatError(std::string("not a dataset directory: ") + directory);
        }
        const std::string resolved = name ? name : egograph::detect_dataset_name(directory);
        auto handle = std::make_unique<eg_dataset>();
        handle->data = egograph::parse_benchmark_dataset(directory, resolved);
        *out = handle.release();
    });
}

eg_status eg_dataset_generate(const char* kind, unsigned long long seed, int size_min,
                              int size_max, int per_class, eg_dataset** out) {
    if (!kind || !out) return invalid("eg_dataset_generate: null argument");
    return guarded([&]() {
        const std::string k = kind;
        if (per_class <= 0) per_class = 200;
        auto handle = std::make_unique<eg_dataset>();
        if (k == "alcohol") {
            if (size_min <= 0) size_min = 6;
            if (size_max <= 0) size_max = 20;
            handle->data = egograph::build_compound_datasets({size_min, size_max}, per_class, seed)
                               .alcohol_task;
        } else if (k == "isomer") {
            if (size_min <= 0) size_min = 9;
            if (size_max <= 0) size_max = 15;
            handle->data = egograph::build_compound_datasets({6, 20}, per_class, seed, true,
                                                             {size_min, size_max})
                               .isomer_task;
        } else if (k == "kronecker") {
            if (size_min <= 0) size_min = 5;
            if (size_max <= 0) size_max = 7;
            handle->data = egograph::build_kronecker_dataset(size_min, size_max, per_class, seed);
        } else {
            throw egograph::ArgumentError("unknown dataset kind \"" + k +
                                          "\" (expected alcohol, isomer or kronecker)");
        }
        *out = handle.release();
    });
}

eg_status eg_dataset_save(const eg_dataset* d, const char* directory) {
    if (!d || !directory) return invalid("eg_dataset_save: null argument");
    return guarded([&]() { egograph::write_benchmark_dataset(d->data, directory); });
}

void eg_dataset_free(eg_dataset* d) { delete d; }

eg_status eg_dataset_graph_count(const eg_dataset* d, int* out) {
    if (!d || !out) return invalid("eg_dataset_graph_count: null argument");
    *out = static_cast<int>(d->data.graphs.size());
    return EG_OK;
}

eg_status eg_dataset_class_count(const eg_dataset* d, int* out) {
    if (!d || !out) return invalid("eg_dataset_class_count: null argument");
    *out = d->data.class_count();
    return EG_OK;
}

eg_status eg_dataset_stats_json(const eg_dataset* d, int with_power_law, char** json_out) {
    if (!d || !json_out) return invalid("eg_dataset_stats_json: null argument");
    return guarded([&]() {
        json j;
        j["name"] = d->data.name;
        j["graph_count"] = d->data.graphs.size();
        j["class_count"] = d->data.class_count();
        std::map<int, int> class_hist;
        for (int y : d->data.class_labels) ++class_hist[y];
        json ch = json::object();
        for (const auto& [cls, count] : class_hist) ch[std::to_string(cls)] = count;
        j["class_histogram"] = ch;
        const auto hist = egograph::degree_histogram(d->data);
        json dh = json::object();
        long long total_nodes = 0;
        for (const auto& [deg, count] : hist) {
            dh[std::to_string(deg)] = count;
            total_nodes += count;
        }
        j["degree_histogram"] = dh;
        j["node_count"] = total_nodes;
        if (with_power_law) {
            try {
                const auto fit = egograph::power_law_fit(hist);
                j["power_law"] = {{"exponent", fit.exponent}, {"r_squared", fit.r_squared}};
            } catch (const egograph::InsufficientDataError& e) {
                j["power_law"] = {{"insufficient_data", e.what()}};
            }
        }
        *json_out = dup_string(j.dump(2));
    });
}

eg_status eg_train_cv(const eg_dataset* d, const char* config_text, int folds, int tied_override,
                      const char* out_dir, char** report_json_out) {
    if (!d || !report_json_out) return invalid("eg_train_cv: null argument");
    return guarded([&]() {
        egograph::ModelConfig cfg =
            egograph::parse_model_config(config_text ? config_text : "");
        if (tied_override == 0) cfg.tied = false;
        if (tied_override == 1) cfg.tied = true;

        egograph::CVOptions opt;
        opt.folds = folds > 0 ? folds : 10;
        if (out_dir) opt.out_dir = std::filesystem::path(out_dir);
        const egograph::CVReport report = egograph::cross_validate(cfg, d->data, opt);

        json j;
        j["folds"] = opt.folds;
        j["fold_accuracies"] = report.fold_accuracies;
        j["mean_accuracy"] = report.mean_accuracy;
        j["std_accuracy"] = report.std_accuracy;
        j["parameter_count"] = report.parameter_count;
        j["wall_seconds"] = report.wall_seconds;
        j["warnings"] = report.warnings;
        j["summary"] = report.summary_line;
        j["node_budget"] = report.effective_config.node_budget;
        if (out_dir) {
            j["metrics_csv"] = (std::filesystem::path(out_dir) / "metrics.csv").string();
        }
        *report_json_out = dup_string(j.dump(2));
    });
}

eg_status eg_model_load(const char* path, eg_model** out) {
    if (!path || !out) return invalid("eg_model_load: null argument");
    return guarded([&]() {
        auto handle = std::make_unique<eg_model>();
        handle->model = egograph::Model::load(path);
        handle->file_hash = egograph::fnv1a_file_hash(path);
        *out = handle.release();
    });
}

void eg_model_free(eg_model* m) { delete m; }

eg_status eg_model_info_json(const eg_model* m, char** json_out) {
    if (!m || !json_out) return invalid("eg_model_info_json: null argument");
    return guarded([&]() {
        json j;
        j["class_count"] = m->model.class_count();
        j["parameter_count"] = m->model.parameter_count();
        j["config"] = egograph::config_to_text(m->model.config());
        *json_out = dup_string(j.dump(2));
    });
}

eg_status eg_visualize(const eg_model* m, const eg_dataset* d, int graph_index, double threshold,
                       const char* dot_path, const char* probe_cache_path, char** info_json_out) {
    if (!m || !d || !dot_path || !info_json_out) return invalid("eg_visualize: null argument");
    return guarded([&]() {
        using namespace egograph;
        if (graph_index < 0 || graph_index >= static_cast<int>(d->data.graphs.size())) {
            throw ArgumentError("graph index " + std::to_string(graph_index) + " out of range");
        }
        const ModelConfig& cfg = m->model.config();

        bool probe_cached = false;
        std::optional<AttentionProbe> probe;
        if (probe_cache_path) {
            probe = load_probe(probe_cache_path, m->file_hash);
            probe_cached = probe.has_value();
        }
        std::vector<GraphFeatures> feats;
        feats.reserve(d->data.graphs.size());
        for (const Graph& g : d->data.graphs) feats.push_back(GraphFeatures::compute(g, cfg));
        if (!probe) {
            std::vector<const GraphFeatures*> set;
            for (const auto& f : feats) set.push_back(&f);
            ProbeFitOptions popt;
            popt.seed = cfg.seed;
            probe = fit_attention_probe(m->model, set, d->data.class_labels, popt);
            if (probe_cache_path) save_probe(*probe, probe_cache_path, m->file_hash);
        }

        const GraphFeatures& f = feats[graph_index];
        const ActivationCache cache = compute_activations(m->model, f);
        const std::vector<double> gamma = probe->attention(cache.layer_outputs.back());
        const double th = threshold >= 0.0
                              ? threshold
                              : default_importance_threshold(f.graph->node_count());
        const CriticalStructure cs = backtrack(m->model, f, cache, gamma, th);

        const std::filesystem::path dot(dot_path);
        if (dot.has_parent_path()) std::filesystem::create_directories(dot.parent_path());
        export_dot(cs, dot, kAtomNames);
        std::filesystem::path node_csv = dot;
        node_csv.replace_extension(".nodes.csv");
        std::filesystem::path edge_csv = dot;
        edge_csv.replace_extension(".edges.csv");
        export_importance_csv(cs, node_csv, edge_csv);

        const auto max_it = std::max_element(gamma.begin(), gamma.end());
        json j;
        j["graph_index"] = graph_index;
        j["threshold"] = th;
        j["probe_cached"] = probe_cached;
        j["max_gamma_node"] = static_cast<int>(max_it - gamma.begin());
        j["max_gamma"] = *max_it;
        j["important_nodes"] = select_important(gamma, th);
        j["dot"] = dot.string();
        j["node_csv"] = node_csv.string();
        j["edge_csv"] = edge_csv.string();
        *info_json_out = dup_string(j.dump(2));
    });
}

}  // extern "C"
