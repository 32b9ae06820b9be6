#include <cstring>
#include <fstream>

#include "egograph/errors.hpp"
#include "egograph/model.hpp"

// Parameter container layout (little-endian):
//   magic "EGCM" | u32 version | u32 class_count | u64 config_len | config text |
//   u32 tensor_count | { u32 name_len | name | u32 rank | u32 dims[rank] | f64 data }* |
//   u32 bn_site_count | { u32 initialized | u32 channels | f64 mean[] | f64 var[] }*
// Tensors appear in the fixed parameters() order under stable names, so a
// file written by save() always rebuilds bit-identical parameters. The
// trailing batch-norm sites are running statistics (buffers, not counted
// as trainable parameters).

namespace egograph {

namespace {

constexpr char kMagic[4] = {'E', 'G', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw FormatError(std::string("model file truncated reading ") + what);
    }
    return v;
}

std::uint64_t read_u64(std::istream& in, const char* what) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw FormatError(std::string("model file truncated reading ") + what);
    }
    return v;
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_tensor_into(std::istream& in, const std::string& expect_name, Tensor& t) {
    const std::uint32_t name_len = read_u32(in, "tensor name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError("model file truncated reading name");
    if (name != expect_name) {
        throw FormatError("model file tensor order mismatch: expected " + expect_name + ", found " +
                          name);
    }
    const std::uint32_t rank = read_u32(in, "tensor rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(read_u32(in, "tensor dim"));
    if (shape != t.shape()) {
        throw FormatError("model file tensor " + name + " has unexpected shape");
    }
    if (!in.read(reinterpret_cast<char*>(t.values().data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
        throw FormatError("model file truncated reading tensor " + name);
    }
}

}  // namespace

class ModelCodec {
public:
    static std::vector<std::pair<std::string, Tensor>> named_tensors(const Model& m) {
        std::vector<std::pair<std::string, Tensor>> out;
        if (m.patchy_) {
            out.emplace_back("patchy.filters", m.patchy_->filters);
            out.emplace_back("patchy.bias", m.patchy_->bias);
        }
        if (m.stack_.tied) {
            out.emplace_back("stack.shared.filters", m.stack_.layers.front().filters);
            out.emplace_back("stack.shared.bias", m.stack_.layers.front().bias);
        } else {
            for (std::size_t l = 0; l < m.stack_.layers.size(); ++l) {
                out.emplace_back("stack." + std::to_string(l) + ".filters", m.stack_.layers[l].filters);
                out.emplace_back("stack." + std::to_string(l) + ".bias", m.stack_.layers[l].bias);
            }
        }
        for (std::size_t i = 0; i < m.dense_weights_.size(); ++i) {
            out.emplace_back("dense." + std::to_string(i) + ".weight", m.dense_weights_[i]);
            out.emplace_back("dense." + std::to_string(i) + ".bias", m.dense_biases_[i]);
        }
        return out;
    }

    static void save(const Model& m, const std::filesystem::path& path) {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw IoError("cannot write model file " + path.string());
            out.write(kMagic, 4);
            write_u32(out, kVersion);
            write_u32(out, static_cast<std::uint32_t>(m.class_count_));
            const std::string cfg = config_to_text(m.cfg_);
            write_u64(out, cfg.size());
            out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
            const auto tensors = named_tensors(m);
            write_u32(out, static_cast<std::uint32_t>(tensors.size()));
            for (const auto& [name, t] : tensors) write_tensor(out, name, t);
            const auto& sites = *m.bn_states_;
            write_u32(out, static_cast<std::uint32_t>(sites.size()));
            for (const BatchNormState& s : sites) {
                write_u32(out, s.initialized ? 1u : 0u);
                write_u32(out, static_cast<std::uint32_t>(s.running_mean.size()));
                out.write(reinterpret_cast<const char*>(s.running_mean.data()),
                          static_cast<std::streamsize>(s.running_mean.size() * sizeof(double)));
                out.write(reinterpret_cast<const char*>(s.running_var.data()),
                          static_cast<std::streamsize>(s.running_var.size() * sizeof(double)));
            }
            if (!out) throw IoError("short write on model file " + path.string());
        }
        std::filesystem::rename(tmp, path);
    }

    static Model load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read model file " + path.string());
        char magic[4];
        if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
            throw FormatError(path.string() + " is not a model file");
        }
        const std::uint32_t version = read_u32(in, "version");
        if (version != kVersion) {
            throw FormatError("unsupported model file version " + std::to_string(version));
        }
        const int class_count = static_cast<int>(read_u32(in, "class count"));
        const std::uint64_t cfg_len = read_u64(in, "config length");
        std::string cfg_text(cfg_len, '\0');
        if (!in.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len))) {
            throw FormatError("model file truncated reading config");
        }
        const ModelConfig cfg = parse_model_config(cfg_text);

        Model m = Model::build(cfg, class_count, cfg.seed);
        const auto tensors = named_tensors(m);
        const std::uint32_t count = read_u32(in, "tensor count");
        if (count != tensors.size()) {
            throw FormatError("model file holds " + std::to_string(count) + " tensors, expected " +
                              std::to_string(tensors.size()));
        }
        for (const auto& [name, t] : tensors) {
            Tensor target = t;
            read_tensor_into(in, name, target);
        }
        const std::uint32_t site_count = read_u32(in, "batch-norm site count");
        if (site_count != m.bn_states_->size()) {
            throw FormatError("model file holds " + std::to_string(site_count) +
                              " batch-norm sites, expected " + std::to_string(m.bn_states_->size()));
        }
        for (BatchNormState& s : *m.bn_states_) {
            s.initialized = read_u32(in, "batch-norm flag") != 0;
            const std::uint32_t channels = read_u32(in, "batch-norm width");
            s.running_mean.resize(channels);
            s.running_var.resize(channels);
            if (!in.read(reinterpret_cast<char*>(s.running_mean.data()),
                         static_cast<std::streamsize>(channels * sizeof(double))) ||
                !in.read(reinterpret_cast<char*>(s.running_var.data()),
                         static_cast<std::streamsize>(channels * sizeof(double)))) {
                throw FormatError("model file truncated reading batch-norm statistics");
            }
        }
        return m;
    }
};

void Model::save(const std::filesystem::path& path) const { ModelCodec::save(*this, path); }

Model Model::load(const std::filesystem::path& path) { return ModelCodec::load(path); }

}  // namespace egograph
