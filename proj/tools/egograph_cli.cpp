// egograph command-line tool. Talks to the engine exclusively through the
// C API in egograph.h; everything here is argument parsing, manifests and
// output plumbing.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "egograph.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

// Written before the heavy work starts, finalized on success.
struct Manifest {
    json doc;
    fs::path path;

    Manifest(const fs::path& dir, const std::string& command, const json& args,
             unsigned long long seed, const std::vector<std::string>& outputs) {
        fs::create_directories(dir);
        path = dir / "manifest.json";
        doc["command"] = command;
        doc["args"] = args;
        doc["seed"] = seed;
        doc["version"] = eg_version();
        doc["started_at"] = timestamp();
        doc["outputs"] = outputs;
        atomic_write(path, doc.dump(2) + "\n");
    }

    void finish() {
        doc["finished_at"] = timestamp();
        atomic_write(path, doc.dump(2) + "\n");
    }
};

int fail(eg_status status, const std::string& context) {
    std::cerr << "egograph: " << context << ": " << eg_last_error() << "\n";
    return status == EG_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
}

std::string take_string(char* owned) {
    std::string s = owned ? owned : "";
    eg_string_free(owned);
    return s;
}

bool parse_range(const std::string& text, int& lo, int& hi) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) return false;
    try {
        lo = std::stoi(text.substr(0, dots));
        hi = std::stoi(text.substr(dots + 2));
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

struct DatasetGuard {
    eg_dataset* d = nullptr;
    ~DatasetGuard() { eg_dataset_free(d); }
};

struct ModelGuard {
    eg_model* m = nullptr;
    ~ModelGuard() { eg_model_free(m); }
};

int cmd_generate(const std::string& kind, const std::string& out_dir, unsigned long long seed,
                 const std::string& sizes, int per_class) {
    int lo = 0, hi = 0;
    if (!sizes.empty() && !parse_range(sizes, lo, hi)) {
        std::cerr << "egograph: --sizes expects A..B, got \"" << sizes << "\"\n";
        return kExitUsage;
    }

    Manifest manifest(out_dir, "generate",
                      {{"kind", kind}, {"sizes", sizes}, {"per_class", per_class}, {"out", out_dir}},
                      seed, {"<name>_A.txt", "<name>_graph_indicator.txt", "<name>_graph_labels.txt"});

    DatasetGuard data;
    eg_status st = eg_dataset_generate(kind.c_str(), seed, lo, hi, per_class, &data.d);
    if (st != EG_OK) return fail(st, "generate");
    st = eg_dataset_save(data.d, out_dir.c_str());
    if (st != EG_OK) return fail(st, "saving dataset");

    int graphs = 0, classes = 0;
    eg_dataset_graph_count(data.d, &graphs);
    eg_dataset_class_count(data.d, &classes);
    manifest.finish();
    std::cout << "wrote " << graphs << " graphs (" << classes << " classes) to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_dir, int folds, bool tied) {
    std::string config_text;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "egograph: cannot read config file " << config_path << "\n";
            return kExitUsage;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        config_text = ss.str();
    }

    DatasetGuard data;
    eg_status st = eg_dataset_load(data_dir.c_str(), nullptr, &data.d);
    if (st != EG_OK) return fail(st, "loading dataset");

    unsigned long long seed = 1;
    {
        // echo the seed the engine will use into the manifest
        std::istringstream ss(config_text);
        std::string line;
        while (std::getline(ss, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            key.erase(remove_if(key.begin(), key.end(), ::isspace), key.end());
            if (key == "seed") seed = std::stoull(line.substr(eq + 1));
        }
    }

    Manifest manifest(out_dir, "train",
                      {{"data", data_dir},
                       {"config", config_path},
                       {"config_text", config_text},
                       {"folds", folds},
                       {"tied", tied}},
                      seed, {"metrics.csv", "fold_<k>.model"});

    char* report = nullptr;
    st = eg_train_cv(data.d, config_text.c_str(), folds, tied ? 1 : -1, out_dir.c_str(), &report);
    if (st != EG_OK) return fail(st, "training");
    const json j = json::parse(take_string(report));

    manifest.finish();
    std::cout << j["summary"].get<std::string>() << "\n";
    std::cout << "mean accuracy " << j["mean_accuracy"].get<double>() << " over "
              << j["folds"].get<int>() << " folds, " << j["parameter_count"].get<std::size_t>()
              << " parameters, " << j["wall_seconds"].get<double>() << "s\n";
    for (const auto& w : j["warnings"]) {
        std::cout << "warning: " << w.get<std::string>() << "\n";
    }
    return 0;
}

int cmd_visualize(const std::string& model_path, const std::string& data_dir, int graph_index,
                  const std::string& out_file, double threshold) {
    DatasetGuard data;
    eg_status st = eg_dataset_load(data_dir.c_str(), nullptr, &data.d);
    if (st != EG_OK) return fail(st, "loading dataset");

    ModelGuard model;
    st = eg_model_load(model_path.c_str(), &model.m);
    if (st != EG_OK) return fail(st, "loading model");

    const fs::path out(out_file);
    const fs::path manifest_dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    Manifest manifest(manifest_dir, "visualize",
                      {{"model", model_path},
                       {"data", data_dir},
                       {"graph", graph_index},
                       {"threshold", threshold},
                       {"out", out_file}},
                      0, {out_file});

    const std::string probe_cache = model_path + ".probe";
    char* info = nullptr;
    st = eg_visualize(model.m, data.d, graph_index, threshold, out_file.c_str(),
                      probe_cache.c_str(), &info);
    if (st != EG_OK) return fail(st, "visualize");
    const json j = json::parse(take_string(info));

    manifest.finish();
    std::cout << "wrote " << j["dot"].get<std::string>() << " (max-attention node "
              << j["max_gamma_node"].get<int>() << ", threshold " << j["threshold"].get<double>()
              << ", probe " << (j["probe_cached"].get<bool>() ? "cached" : "fitted") << ")\n";
    return 0;
}

int cmd_stats(const std::string& data_dir, bool power_law) {
    DatasetGuard data;
    eg_status st = eg_dataset_load(data_dir.c_str(), nullptr, &data.d);
    if (st != EG_OK) return fail(st, "loading dataset");

    char* stats = nullptr;
    st = eg_dataset_stats_json(data.d, power_law ? 1 : 0, &stats);
    if (st != EG_OK) return fail(st, "stats");
    const json j = json::parse(take_string(stats));

    std::cout << "dataset " << j["name"].get<std::string>() << ": "
              << j["graph_count"].get<int>() << " graphs, " << j["class_count"].get<int>()
              << " classes, " << j["node_count"].get<long long>() << " nodes\n";
    std::cout << "class histogram:";
    for (const auto& [cls, count] : j["class_histogram"].items()) {
        std::cout << " " << cls << ":" << count.get<int>();
    }
    std::cout << "\ndegree histogram:";
    for (const auto& [deg, count] : j["degree_histogram"].items()) {
        std::cout << " " << deg << ":" << count.get<long long>();
    }
    std::cout << "\n";
    if (power_law) {
        if (j["power_law"].contains("insufficient_data")) {
            std::cout << "power law: insufficient data ("
                      << j["power_law"]["insufficient_data"].get<std::string>() << ")\n";
        } else {
            std::cout << "power law: exponent " << j["power_law"]["exponent"].get<double>()
                      << ", r^2 " << j["power_law"]["r_squared"].get<double>() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph classification with stacked ego convolutions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(eg_version()));

    std::string kind, out_dir, data_dir, config_path, model_path, out_file, sizes;
    unsigned long long seed = 1;
    int per_class = 200, folds = 10, graph_index = 0;
    double threshold = -1.0;
    bool tied = false, power_law = false;

    auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    generate->add_option("--kind", kind, "alcohol, isomer or kronecker")->required();
    generate->add_option("--out", out_dir, "output directory")->required();
    generate->add_option("--seed", seed, "generator seed");
    generate->add_option("--sizes", sizes, "size range A..B (carbons, chain length or power)");
    generate->add_option("--per-class", per_class, "graphs per class");

    auto* train = app.add_subcommand("train", "cross-validated training");
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--config", config_path, "run config file")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_option("--folds", folds, "cross-validation folds");
    train->add_flag("--tied", tied, "tie ego-convolution filters across layers");

    auto* visualize = app.add_subcommand("visualize", "export critical structures as DOT");
    visualize->add_option("--model", model_path, "trained model file")->required();
    visualize->add_option("--data", data_dir, "dataset directory")->required();
    visualize->add_option("--graph", graph_index, "graph index")->required();
    visualize->add_option("--out", out_file, "output DOT file")->required();
    visualize->add_option("--threshold", threshold, "attention threshold (default 1/(2N))");

    auto* stats = app.add_subcommand("stats", "dataset structure statistics");
    stats->add_option("--data", data_dir, "dataset directory")->required();
    stats->add_flag("--power-law", power_law, "fit a power law to the degree histogram");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(kind, out_dir, seed, sizes, per_class);
        if (train->parsed()) return cmd_train(data_dir, config_path, out_dir, folds, tied);
        if (visualize->parsed()) {
            return cmd_visualize(model_path, data_dir, graph_index, out_file, threshold);
        }
        if (stats->parsed()) return cmd_stats(data_dir, power_law);
    } catch (const std::exception& e) {
        std::cerr << "egograph: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
