#include "egograph/critical.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "egograph/adam.hpp"
#include "egograph/errors.hpp"

namespace egograph {

std::vector<Tensor> AttentionProbe::parameters() const {
    return {score_weight, score_bias, head_weight, head_bias};
}

std::vector<double> AttentionProbe::attention(const Tensor& h_last) const {
    if (h_last.rank() != 2 || h_last.dim(1) != score_weight.dim(0)) {
        throw ArgumentError("attention input width does not match probe");
    }
    const int n = h_last.dim(0), d = h_last.dim(1);
    std::vector<double> score(n, score_bias.values()[0]);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) {
            score[i] += h_last.values()[static_cast<std::size_t>(i) * d + c] * score_weight.values()[c];
        }
    }
    const double mx = *std::max_element(score.begin(), score.end());
    double z = 0.0;
    for (double& s : score) {
        s = std::exp(s - mx);
        z += s;
    }
    for (double& s : score) s /= z;
    return score;
}

int AttentionProbe::predict(const Tensor& h_last) const {
    const std::vector<double> gamma = attention(h_last);
    const int n = h_last.dim(0), d = h_last.dim(1);
    const int c = head_weight.dim(1);
    std::vector<double> pooled(d, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            pooled[j] += gamma[i] * h_last.values()[static_cast<std::size_t>(i) * d + j];
        }
    }
    std::vector<double> logits(head_bias.values());
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < c; ++k) {
            logits[k] += pooled[j] * head_weight.values()[static_cast<std::size_t>(j) * c + k];
        }
    }
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

ActivationCache compute_activations(const Model& model, const GraphFeatures& f) {
    ActivationCache cache;
    Tape tape;
    model.forward(tape, f, /*train=*/false, nullptr, &cache.layer_outputs);
    return cache;
}

AttentionProbe fit_attention_probe(const Model& model,
                                   const std::vector<const GraphFeatures*>& set,
                                   const std::vector<int>& labels, const ProbeFitOptions& opt) {
    if (set.empty() || set.size() != labels.size()) {
        throw ArgumentError("probe fitting needs a non-empty aligned dataset");
    }
    const int d = model.config().filters;
    const int c = model.class_count();

    // last-layer embeddings are constants for the probe; compute them once
    std::vector<Tensor> embeddings;
    embeddings.reserve(set.size());
    for (const GraphFeatures* f : set) {
        embeddings.push_back(compute_activations(model, *f).layer_outputs.back());
    }

    std::mt19937_64 rng(opt.seed);
    AttentionProbe probe;
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / (d + 1)), std::sqrt(6.0 / (d + 1)));
    probe.score_weight = Tensor::zeros({d, 1}, true);
    for (double& v : probe.score_weight.values()) v = dist(rng);
    probe.score_bias = Tensor::zeros({1}, true);
    std::uniform_real_distribution<double> hdist(-std::sqrt(6.0 / (d + c)), std::sqrt(6.0 / (d + c)));
    probe.head_weight = Tensor::zeros({d, c}, true);
    for (double& v : probe.head_weight.values()) v = hdist(rng);
    probe.head_bias = Tensor::zeros({c}, true);

    Adam adam(probe.parameters(), {.lr = opt.learning_rate});
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        adam.zero_grad();
        for (std::size_t g : order) {
            Tape tape;
            const Tensor& h = embeddings[g];
            const int n = h.dim(0);
            Tensor score = tape.add_bias(tape.matmul(h, probe.score_weight), probe.score_bias);
            Tensor gamma = tape.softmax(tape.reshape(score, {1, n}));
            Tensor pooled = tape.matmul(gamma, h);  // [1, D]
            Tensor logits = tape.add_bias(tape.matmul(pooled, probe.head_weight), probe.head_bias);
            Tensor loss = tape.softmax_cross_entropy(tape.reshape(logits, {c}), labels[g]);
            tape.backward(loss, 1.0 / static_cast<double>(order.size()));
        }
        adam.step();
    }
    return probe;
}

double default_importance_threshold(std::size_t node_count) {
    if (node_count == 0) throw ArgumentError("threshold undefined for an empty graph");
    return 1.0 / (2.0 * static_cast<double>(node_count));
}

std::vector<NodeId> select_important(std::span<const double> gamma, double threshold) {
    if (threshold < 0.0) throw ArgumentError("importance threshold must be >= 0");
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (gamma[i] > threshold) out.push_back(static_cast<NodeId>(i));
    }
    return out;
}

std::vector<double> backtrack_signed(const Model& model, const GraphFeatures& f,
                                     const ActivationCache& cache, std::span<const double> gamma) {
    const Graph& g = *f.graph;
    const int n = g.node_count();
    const ModelConfig& cfg = model.config();
    if (static_cast<int>(gamma.size()) != n) {
        throw ArgumentError("gamma length does not match graph");
    }
    if (cache.layer_outputs.size() != static_cast<std::size_t>(cfg.layers)) {
        throw StateError("activation cache does not hold all ego layer outputs");
    }
    for (const Tensor& h : cache.layer_outputs) {
        if (h.dim(0) != n) throw StateError("activation cache belongs to a different graph");
    }

    const int k = cfg.k_neighbors;
    const Tensor& h_last = cache.layer_outputs.back();
    const int d_last = h_last.dim(1);

    // importance-adjusted top layer: H_hat[n,:] = gamma[n] * H^(L)[n,:]
    std::vector<double> h_hat(static_cast<std::size_t>(n) * d_last);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d_last; ++c) {
            h_hat[static_cast<std::size_t>(i) * d_last + c] =
                gamma[i] * h_last.values()[static_cast<std::size_t>(i) * d_last + c];
        }
    }

    int width = d_last;
    for (int layer = cfg.layers - 1; layer >= 0; --layer) {
        const EgoConvLayer& conv = model.stack().layers[layer];
        const int d_out = conv.d_out();
        const int d_in = conv.d_in();
        if (width != d_out) throw StateError("backtrack width mismatch");

        // E_hat^(i) = sum_d H_hat[i,d] W^(d), scattered back to the rows'
        // owners: row 0 to i itself, row s+1 to slot s's neighbor
        std::vector<double> prev(static_cast<std::size_t>(n) * d_in, 0.0);
        const auto& w = conv.filters.values();  // [d_out, k+1, d_in]
        for (int i = 0; i < n; ++i) {
            const double* hrow = h_hat.data() + static_cast<std::size_t>(i) * d_out;
            for (int row = 0; row <= k; ++row) {
                NodeId target;
                if (row == 0) {
                    target = i;
                } else {
                    target = f.table.slot(i, row - 1);
                    if (target == kPad) continue;
                }
                double* acc = prev.data() + static_cast<std::size_t>(target) * d_in;
                for (int d = 0; d < d_out; ++d) {
                    const double hd = hrow[d];
                    if (hd == 0.0) continue;
                    const double* wrow =
                        w.data() + (static_cast<std::size_t>(d) * (k + 1) + row) * d_in;
                    for (int c = 0; c < d_in; ++c) acc[c] += hd * wrow[c];
                }
            }
        }
        h_hat = std::move(prev);
        width = d_in;
    }

    if (cfg.front_end == FrontEnd::adjacency) {
        // h_hat is already the N x K slot matrix
        if (width != k) throw StateError("adjacency reconstruction width mismatch");
        return h_hat;
    }

    // Patchy-San front end: one more transposed step through the base
    // filters, then collapse each node's K_base x K_base attribution to
    // slot granularity: slot s collects its row and column mass.
    const PatchySanLayer& base = *model.patchy();
    const int kb = base.k_base;
    const int db = base.filter_count();
    if (width != db) throw StateError("patchy reconstruction width mismatch");
    const auto& w = base.filters.values();  // [db, kb, kb]

    std::vector<double> slots(static_cast<std::size_t>(n) * k, 0.0);
    std::vector<double> a_hat(static_cast<std::size_t>(kb) * kb);
    for (int i = 0; i < n; ++i) {
        std::fill(a_hat.begin(), a_hat.end(), 0.0);
        const double* hrow = h_hat.data() + static_cast<std::size_t>(i) * db;
        for (int d = 0; d < db; ++d) {
            const double hd = hrow[d];
            if (hd == 0.0) continue;
            const double* filt = w.data() + static_cast<std::size_t>(d) * kb * kb;
            for (int e = 0; e < kb * kb; ++e) a_hat[e] += hd * filt[e];
        }
        for (int s = 0; s < std::min(k, kb); ++s) {
            if (f.table.slot(i, s) == kPad) continue;
            double mass = 0.0;
            for (int j = 0; j < kb; ++j) {
                mass += a_hat[static_cast<std::size_t>(s) * kb + j];
                mass += a_hat[static_cast<std::size_t>(j) * kb + s];
            }
            slots[static_cast<std::size_t>(i) * k + s] = mass;
        }
    }
    return slots;
}

CriticalStructure backtrack(const Model& model, const GraphFeatures& f,
                            const ActivationCache& cache, std::span<const double> gamma,
                            double threshold) {
    const Graph& g = *f.graph;
    const int n = g.node_count();
    std::vector<double> masked(gamma.begin(), gamma.end());
    for (double& v : masked) {
        if (!(v > threshold)) v = 0.0;
    }
    const std::vector<double> slots = backtrack_signed(model, f, cache, masked);

    CriticalStructure cs;
    cs.base = &g;
    cs.threshold = threshold;
    cs.node_importance.assign(n, 0.0);
    const int k = f.table.k();
    for (NodeId i = 0; i < n; ++i) {
        for (int s = 0; s < k; ++s) {
            const NodeId m = f.table.slot(i, s);
            if (m == kPad) continue;
            const double mass = std::fabs(slots[static_cast<std::size_t>(i) * k + s]);
            cs.node_importance[i] += mass;   // own row
            cs.node_importance[m] += mass;   // slot appearance
            auto key = std::minmax(i, m);
            cs.edge_importance[{key.first, key.second}] += mass;
        }
    }
    return cs;
}

namespace {

constexpr char kProbeMagic[4] = {'E', 'G', 'C', 'P'};
constexpr std::uint32_t kProbeVersion = 1;

void write_probe_tensor(std::ostream& out, const Tensor& t) {
    const std::uint32_t rank = static_cast<std::uint32_t>(t.rank());
    out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
    for (int d : t.shape()) {
        const std::uint32_t u = static_cast<std::uint32_t>(d);
        out.write(reinterpret_cast<const char*>(&u), sizeof(u));
    }
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
}

bool read_probe_tensor(std::istream& in, Tensor& out_tensor) {
    std::uint32_t rank = 0;
    if (!in.read(reinterpret_cast<char*>(&rank), sizeof(rank))) return false;
    std::vector<int> shape(rank);
    for (auto& d : shape) {
        std::uint32_t u = 0;
        if (!in.read(reinterpret_cast<char*>(&u), sizeof(u))) return false;
        d = static_cast<int>(u);
    }
    Tensor t = Tensor::zeros(shape, /*requires_grad=*/true);
    if (!in.read(reinterpret_cast<char*>(t.values().data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
        return false;
    }
    out_tensor = t;
    return true;
}

}  // namespace

std::uint64_t fnv1a_file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return h;
}

void save_probe(const AttentionProbe& probe, const std::filesystem::path& path,
                std::uint64_t model_hash) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write probe file " + path.string());
        out.write(kProbeMagic, 4);
        out.write(reinterpret_cast<const char*>(&kProbeVersion), sizeof(kProbeVersion));
        out.write(reinterpret_cast<const char*>(&model_hash), sizeof(model_hash));
        write_probe_tensor(out, probe.score_weight);
        write_probe_tensor(out, probe.score_bias);
        write_probe_tensor(out, probe.head_weight);
        write_probe_tensor(out, probe.head_bias);
        if (!out) throw IoError("short write on probe file " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<AttentionProbe> load_probe(const std::filesystem::path& path,
                                         std::uint64_t model_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kProbeMagic, 4) != 0) return std::nullopt;
    std::uint32_t version = 0;
    if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)) || version != kProbeVersion) {
        return std::nullopt;
    }
    std::uint64_t hash = 0;
    if (!in.read(reinterpret_cast<char*>(&hash), sizeof(hash)) || hash != model_hash) {
        return std::nullopt;
    }
    AttentionProbe probe;
    if (!read_probe_tensor(in, probe.score_weight) || !read_probe_tensor(in, probe.score_bias) ||
        !read_probe_tensor(in, probe.head_weight) || !read_probe_tensor(in, probe.head_bias)) {
        return std::nullopt;
    }
    return probe;
}

}  // namespace egograph
