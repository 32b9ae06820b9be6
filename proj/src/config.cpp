#include "egograph/config.hpp"

#include <fstream>
#include <sstream>

#include "egograph/errors.hpp"

namespace egograph {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got \"" + v + "\"");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got \"" + v + "\"");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got \"" + v + "\"");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_int(key, item));
    }
    return out;
}

}  // namespace

void ModelConfig::validate() const {
    if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (filters < 1) throw ConfigError("filters must be >= 1");
    if (front_end == FrontEnd::patchy_san && (patchy_k < 1 || patchy_filters < 1)) {
        throw ConfigError("patchy_san front end needs patchy_k and patchy_filters >= 1");
    }
    if (node_budget < 0) throw ConfigError("node_budget must be >= 0 (0 = auto)");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout_rate must be in [0, 1)");
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be non-negative");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (wl_iterations < 1) throw ConfigError("wl_iterations must be >= 1");
    for (int s : dense_sizes) {
        if (s < 1) throw ConfigError("dense layer sizes must be >= 1");
    }
    if (tied && stack_input_width() != filters) {
        throw ConfigError("tied stack requires the front end width to equal filters (got " +
                          std::to_string(stack_input_width()) + " vs " + std::to_string(filters) + ")");
    }
}

int ModelConfig::stack_input_width() const {
    return front_end == FrontEnd::adjacency ? k_neighbors : patchy_filters;
}

ModelConfig parse_model_config(const std::string& text) {
    ModelConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "train") {
                throw ConfigError("unknown config section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qualified = section.empty() ? key : section + "." + key;

        if (key == "k_neighbors") cfg.k_neighbors = to_int(qualified, value);
        else if (key == "layers") cfg.layers = to_int(qualified, value);
        else if (key == "filters") cfg.filters = to_int(qualified, value);
        else if (key == "front_end") {
            if (value == "adjacency") cfg.front_end = FrontEnd::adjacency;
            else if (value == "patchy_san") cfg.front_end = FrontEnd::patchy_san;
            else throw ConfigError("front_end must be adjacency or patchy_san, got \"" + value + "\"");
        }
        else if (key == "patchy_k") cfg.patchy_k = to_int(qualified, value);
        else if (key == "patchy_filters") cfg.patchy_filters = to_int(qualified, value);
        else if (key == "tied") cfg.tied = to_bool(qualified, value);
        else if (key == "node_budget") cfg.node_budget = to_int(qualified, value);
        else if (key == "dense_sizes") cfg.dense_sizes = to_int_list(qualified, value);
        else if (key == "activation") {
            if (value == "relu") cfg.activation = Activation::relu;
            else if (value == "tanh") cfg.activation = Activation::tanh;
            else throw ConfigError("activation must be relu or tanh, got \"" + value + "\"");
        }
        else if (key == "wl_iterations") cfg.wl_iterations = to_int(qualified, value);
        else if (key == "batch_norm") cfg.batch_norm = to_bool(qualified, value);
        else if (key == "dropout_rate") cfg.dropout_rate = to_double(qualified, value);
        else if (key == "learning_rate") cfg.learning_rate = to_double(qualified, value);
        else if (key == "epochs") cfg.epochs = to_int(qualified, value);
        else if (key == "batch_size") cfg.batch_size = to_int(qualified, value);
        else if (key == "patience") cfg.patience = to_int(qualified, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
        else throw ConfigError("unknown config key \"" + qualified + "\"");
    }
    cfg.validate();
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_config(buf.str());
}

std::string config_to_text(const ModelConfig& cfg) {
    std::ostringstream out;
    out << "[model]\n";
    out << "k_neighbors = " << cfg.k_neighbors << "\n";
    out << "layers = " << cfg.layers << "\n";
    out << "filters = " << cfg.filters << "\n";
    out << "front_end = " << (cfg.front_end == FrontEnd::adjacency ? "adjacency" : "patchy_san") << "\n";
    out << "patchy_k = " << cfg.patchy_k << "\n";
    out << "patchy_filters = " << cfg.patchy_filters << "\n";
    out << "tied = " << (cfg.tied ? "true" : "false") << "\n";
    out << "node_budget = " << cfg.node_budget << "\n";
    out << "dense_sizes = ";
    for (std::size_t i = 0; i < cfg.dense_sizes.size(); ++i) {
        out << (i ? ", " : "") << cfg.dense_sizes[i];
    }
    out << "\n";
    out << "activation = " << (cfg.activation == Activation::relu ? "relu" : "tanh") << "\n";
    out << "wl_iterations = " << cfg.wl_iterations << "\n";
    out << "batch_norm = " << (cfg.batch_norm ? "true" : "false") << "\n";
    out << "[train]\n";
    out << "dropout_rate = " << cfg.dropout_rate << "\n";
    out << "learning_rate = " << cfg.learning_rate << "\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "patience = " << cfg.patience << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

}  // namespace egograph
