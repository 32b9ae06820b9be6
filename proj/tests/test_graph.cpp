#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "egograph/dataset_io.hpp"
#include "egograph/errors.hpp"
#include "egograph/graph.hpp"
#include "oracles.hpp"

using namespace egograph;
namespace fs = std::filesystem;

namespace {

Graph cycle(int n) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return Graph(n, edges);
}

fs::path temp_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("egograph_test_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("graph construction normalizes edges") {
    Graph g(4, {{1, 0}, {0, 1}, {2, 3}, {3, 2}, {1, 2}});
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == 3);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(!g.has_edge(0, 3));
    CHECK(g.neighbors(1) == std::vector<NodeId>{0, 2});
    CHECK(g.degree(1) == 2);
    CHECK(g.max_degree() == 2);
    CHECK_THROWS_AS(Graph(2, {{0, 0}}), ArgumentError);
    CHECK_THROWS_AS(Graph(2, {{0, 5}}), ArgumentError);
    CHECK_THROWS_AS(Graph(2, {{0, 1}}, std::nullopt, std::vector<double>{-1.0}), ArgumentError);
}

TEST_CASE("ego_network degenerate and small cases") {
    Graph path(3, {{0, 1}, {1, 2}});

    SUBCASE("radius zero is the bare center") {
        const auto ego = ego_network(path, 1, 0);
        CHECK(ego.member_nodes == std::vector<NodeId>{1});
        CHECK(ego.induced_edges.empty());
    }
    SUBCASE("radius one on a path covers it") {
        const auto ego = ego_network(path, 1, 1);
        CHECK(ego.member_nodes == std::vector<NodeId>{0, 1, 2});
        CHECK(ego.induced_edges.size() == 2);
    }
    SUBCASE("bad center") {
        CHECK_THROWS_AS(ego_network(path, 7, 1), ArgumentError);
        CHECK_THROWS_AS(ego_network(path, -1, 1), ArgumentError);
    }
}

TEST_CASE("ego_network on the 10-cycle matches the BFS oracle") {
    Graph g = cycle(10);
    const auto ball = oracles::ego_ball(g, 0, 2);
    const auto ego = ego_network(g, 0, 2);

    // frozen from the oracle: two steps around the ring each way
    CHECK(ball.nodes == std::set<NodeId>{8, 9, 0, 1, 2});
    CHECK(ball.edges.size() == 4);

    CHECK(std::set<NodeId>(ego.member_nodes.begin(), ego.member_nodes.end()) == ball.nodes);
    CHECK(std::set<std::pair<NodeId, NodeId>>(ego.induced_edges.begin(), ego.induced_edges.end()) ==
          ball.edges);
}

TEST_CASE("ego_network equals the oracle on random graphs and grows monotonically") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        Graph g = oracles::random_graph(2 + static_cast<int>(rng() % 20), 0.25, rng);
        const NodeId center = static_cast<NodeId>(rng() % g.node_count());
        std::set<NodeId> previous;
        for (int l = 0; l <= 4; ++l) {
            const auto ego = ego_network(g, center, l);
            const auto ball = oracles::ego_ball(g, center, l);
            CHECK(std::set<NodeId>(ego.member_nodes.begin(), ego.member_nodes.end()) == ball.nodes);
            CHECK(std::set<std::pair<NodeId, NodeId>>(ego.induced_edges.begin(),
                                                      ego.induced_edges.end()) == ball.edges);
            std::set<NodeId> now(ego.member_nodes.begin(), ego.member_nodes.end());
            CHECK(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
            previous = std::move(now);
        }
    }
}

TEST_CASE("degree_histogram") {
    Graph triangle(3, {{0, 1}, {1, 2}, {0, 2}});
    Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});

    CHECK(degree_histogram(triangle) == std::map<int, std::int64_t>{{2, 3}});
    CHECK(degree_histogram(star) == std::map<int, std::int64_t>{{1, 4}, {4, 1}});

    Dataset two_triangles{{triangle, triangle}, {0, 1}, "t"};
    CHECK(degree_histogram(two_triangles) == std::map<int, std::int64_t>{{2, 6}});

    // total node count is conserved
    std::mt19937_64 rng(3);
    Dataset d;
    d.name = "rand";
    std::int64_t nodes = 0;
    for (int i = 0; i < 8; ++i) {
        d.graphs.push_back(oracles::random_graph(3 + static_cast<int>(rng() % 9), 0.3, rng));
        d.class_labels.push_back(i % 2);
        nodes += d.graphs.back().node_count();
    }
    std::int64_t total = 0;
    for (const auto& [deg, count] : degree_histogram(d)) total += count;
    CHECK(total == nodes);
}

TEST_CASE("power_law_fit recovers a generating law") {
    std::map<int, double> hist;
    for (int k = 1; k <= 50; ++k) hist[k] = 1000.0 * std::pow(k, -2.0);
    const auto fit = power_law_fit(hist);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(fit.r_squared > 0.999);

    SUBCASE("exact recovery for other exponents") {
        for (double alpha : {0.5, 1.7, 3.2}) {
            std::map<int, double> h;
            for (int k = 2; k <= 40; k += 3) h[k] = 512.0 * std::pow(k, -alpha);
            const auto f = power_law_fit(h);
            CHECK(std::fabs(f.exponent - alpha) < 1e-2);
        }
    }
    SUBCASE("regular graphs are insufficient") {
        // 3-regular dataset: a single degree bin
        CHECK_THROWS_AS(power_law_fit(std::map<int, std::int64_t>{{3, 100}}), InsufficientDataError);
        CHECK_THROWS_AS(power_law_fit(std::map<int, std::int64_t>{{2, 5}, {3, 5}}),
                        InsufficientDataError);
    }
}

TEST_CASE("benchmark parser on hand-written fixtures") {
    SUBCASE("single 1-node graph") {
        auto dir = temp_dir("parse1");
        write_file(dir / "tiny_A.txt", "");
        write_file(dir / "tiny_graph_indicator.txt", "1\n");
        write_file(dir / "tiny_graph_labels.txt", "1\n");
        // a second class is not required at parse time
        const Dataset d = parse_benchmark_dataset(dir, "tiny");
        CHECK(d.graphs.size() == 1);
        CHECK(d.graphs[0].node_count() == 1);
        CHECK(d.graphs[0].edge_count() == 0);
        fs::remove_all(dir);
    }

    SUBCASE("triangle plus path, checked against an independent reading") {
        auto dir = temp_dir("parse2");
        // graph 1: triangle on global nodes 1..3; graph 2: path on 4..6
        write_file(dir / "two_A.txt",
                   "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n5, 6\n6, 5\n");
        write_file(dir / "two_graph_indicator.txt", "1\n1\n1\n2\n2\n2\n");
        write_file(dir / "two_graph_labels.txt", "7\n-2\n");
        write_file(dir / "two_node_labels.txt", "0\n0\n1\n1\n2\n2\n");

        const Dataset d = parse_benchmark_dataset(dir, "two");
        REQUIRE(d.graphs.size() == 2);
        CHECK(d.graphs[0].node_count() == 3);
        CHECK(d.graphs[0].edge_count() == 3);
        CHECK(d.graphs[1].node_count() == 3);
        CHECK(d.graphs[1].edge_count() == 2);
        // labels remapped preserving sorted raw order: -2 -> 0, 7 -> 1
        CHECK(d.class_labels == std::vector<int>{1, 0});
        CHECK(d.graphs[0].node_label(2) == 1);
        CHECK(d.graphs[1].degree(1) == 2);
        fs::remove_all(dir);
    }

    SUBCASE("missing mandatory file") {
        auto dir = temp_dir("parse3");
        write_file(dir / "x_A.txt", "1, 2\n");
        write_file(dir / "x_graph_indicator.txt", "1\n1\n");
        CHECK_THROWS_AS(parse_benchmark_dataset(dir, "x"), FormatError);
        fs::remove_all(dir);
    }

    SUBCASE("edge crossing graphs is inconsistent") {
        auto dir = temp_dir("parse4");
        write_file(dir / "x_A.txt", "1, 3\n");
        write_file(dir / "x_graph_indicator.txt", "1\n1\n2\n");
        write_file(dir / "x_graph_labels.txt", "0\n1\n");
        CHECK_THROWS_AS(parse_benchmark_dataset(dir, "x"), ConsistencyError);
        fs::remove_all(dir);
    }

    SUBCASE("node id outside indicator range") {
        auto dir = temp_dir("parse5");
        write_file(dir / "x_A.txt", "1, 9\n");
        write_file(dir / "x_graph_indicator.txt", "1\n1\n");
        write_file(dir / "x_graph_labels.txt", "0\n");
        CHECK_THROWS_AS(parse_benchmark_dataset(dir, "x"), ConsistencyError);
        fs::remove_all(dir);
    }
}

TEST_CASE("MUTAG parses to its published shape when present") {
    const char* env = std::getenv("EGOGRAPH_MUTAG_DIR");
    fs::path dir = env ? fs::path(env) : fs::path(EGOGRAPH_SOURCE_DIR) / "data" / "MUTAG";
    if (!fs::exists(dir / "MUTAG_A.txt")) {
        MESSAGE("MUTAG data not present at ", dir.string(), "; skipping");
        return;
    }
    const Dataset d = parse_benchmark_dataset(dir, "MUTAG");
    CHECK(d.graphs.size() == 188);
    CHECK(d.class_count() == 2);
    int max_nodes = 0;
    for (const auto& g : d.graphs) max_nodes = std::max(max_nodes, static_cast<int>(g.node_count()));
    CHECK(max_nodes == 28);
}

TEST_CASE("parse -> write -> parse round-trips datasets") {
    std::mt19937_64 rng(11);
    Dataset d;
    d.name = "round";
    for (int i = 0; i < 6; ++i) {
        d.graphs.push_back(oracles::random_graph(2 + static_cast<int>(rng() % 10), 0.4, rng,
                                                 /*labeled=*/true));
        d.class_labels.push_back(i % 3);
    }
    auto dir = temp_dir("roundtrip");
    write_benchmark_dataset(d, dir);
    const Dataset back = parse_benchmark_dataset(dir, "round");

    REQUIRE(back.graphs.size() == d.graphs.size());
    CHECK(back.class_labels == d.class_labels);
    for (std::size_t i = 0; i < d.graphs.size(); ++i) {
        CHECK(back.graphs[i].node_count() == d.graphs[i].node_count());
        CHECK(back.graphs[i].edges() == d.graphs[i].edges());
        CHECK(back.graphs[i].node_labels() == d.graphs[i].node_labels());
    }
    fs::remove_all(dir);
}
