#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <nglat/io.hpp>
#include <nglat/lattice.hpp>

using namespace nglat;

namespace {

LatticeGraph square_cycle() {
    // (0,0) (1,0) (1,1) (0,1); N/E/S/W order.
    std::vector<LatticePoint> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<std::array<int, 4>> adj{{3, 1, -1, -1}, {2, -1, -1, 0}, {-1, -1, 1, 3}, {-1, 2, 0, -1}};
    return LatticeGraph(8, v, adj);
}

// Brute-force connected components of S with explicit diagonal checks.
std::set<std::set<int>> brute_star_components(const LatticeGraph& g, const std::vector<int>& S) {
    const std::size_t k = S.size();
    std::vector<int> label(k);
    std::iota(label.begin(), label.end(), 0);
    auto linked = [&](int a, int b) {
        const auto pa = g.vertex(a), pb = g.vertex(b);
        const int di = pb.i - pa.i, dj = pb.j - pa.j;
        if (std::abs(di) + std::abs(dj) == 1) return g.has_edge(a, b);
        if (std::abs(di) == 1 && std::abs(dj) == 1) return full_square(g, std::min(pa.i, pb.i), std::min(pa.j, pb.j));
        return false;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                if (linked(S[a], S[b]) && label[a] != label[b]) {
                    const int lo = std::min(label[a], label[b]);
                    label[a] = label[b] = lo;
                    changed = true;
                }
    }
    std::map<int, std::set<int>> groups;
    for (std::size_t a = 0; a < k; ++a) groups[label[a]].insert(S[a]);
    std::set<std::set<int>> out;
    for (auto& [l, s] : groups) out.insert(s);
    return out;
}

}  // namespace

TEST(Discretize, DiscVertexCountAtEight) {
    const auto g = discretize(disc_domain(), 8);
    int brute = 0;
    for (int i = -8; i <= 8; ++i)
        for (int j = -8; j <= 8; ++j) brute += (i * i + j * j <= 63);
    EXPECT_EQ(brute, 193);
    EXPECT_EQ(g.size(), 193u);
}

TEST(Discretize, DiscDegrees) {
    const auto g = discretize(disc_domain(), 8);
    for (std::size_t v = 0; v < g.size(); ++v) {
        EXPECT_GE(g.degree(static_cast<int>(v)), 2);
        EXPECT_LE(g.degree(static_cast<int>(v)), 4);
    }
    EXPECT_EQ(g.degree(g.index_of(0, 0)), 4);
}

TEST(Discretize, BeanIsConnected) {
    const auto g = discretize(bean_domain(), 16);
    std::vector<char> seen(g.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int nb : g.neighbors(v))
            if (nb >= 0 && !seen[nb]) {
                seen[nb] = 1;
                ++count;
                stack.push_back(nb);
            }
    }
    EXPECT_EQ(count, g.size());
}

TEST(Discretize, RejectsSmallN) { EXPECT_THROW(discretize(disc_domain(), 4), std::invalid_argument); }

TEST(Discretize, EdgeDeletionSoundness) {
    for (const auto& d : {bean_domain(), build_domain({{1.0, 0.0}, {0.15, 0.1}})}) {
        const auto g = discretize(d, 16);
        for (std::size_t a = 0; a < g.size(); ++a) {
            const auto p = g.vertex(static_cast<int>(a));
            for (int dir : {North, East}) {
                const int b = g.index_of(p.i + kSteps[dir].i, p.j + kSteps[dir].j);
                if (b < 0) continue;
                bool all_in = true;
                for (int s = 0; s < kEdgeSamples; ++s) {
                    const double f = static_cast<double>(s) / (kEdgeSamples - 1);
                    all_in = all_in && d.contains(g.to_plane(p) + f * (g.to_plane(g.vertex(b)) - g.to_plane(p)));
                }
                EXPECT_EQ(g.has_edge(static_cast<int>(a), b), all_in);
            }
        }
    }
}

TEST(Discretize, InteriorVerticesHaveFullDegree) {
    const auto d = bean_domain();
    const auto g = discretize(d, 32);
    for (std::size_t v = 0; v < g.size(); ++v)
        if (d.boundary_distance_lower(g.position(static_cast<int>(v))) > 2.0 / g.n())
            EXPECT_EQ(g.degree(static_cast<int>(v)), 4);
}

TEST(Discretize, DiscAntipodalSymmetry) {
    const auto g = discretize(disc_domain(), 16);
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto p = g.vertex(static_cast<int>(v));
        const int w = g.index_of(-p.i, -p.j);
        ASSERT_GE(w, 0);
        for (int dir = 0; dir < 4; ++dir) {
            const int nb = g.neighbors(static_cast<int>(v))[dir];
            const int mirrored = g.neighbors(w)[(dir + 2) % 4];
            if (nb < 0) {
                EXPECT_LT(mirrored, 0);
            } else {
                const auto q = g.vertex(nb);
                EXPECT_EQ(mirrored, g.index_of(-q.i, -q.j));
            }
        }
    }
}

TEST(Blobs, NineVertexBallAtSixteen) {
    const auto d = disc_domain();
    const auto g = discretize(d, 16, select_blob_centers(d, 0.4));
    const auto& b = g.require_blobs();
    EXPECT_EQ(b.anchor1.i, 0);
    EXPECT_EQ(b.anchor1.j, -10);
    ASSERT_EQ(b.set1.size(), 9u);
    std::set<std::pair<int, int>> got;
    for (int v : b.set1) got.insert({g.vertex(v).i, g.vertex(v).j - (-10)});
    std::set<std::pair<int, int>> want;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) want.insert({di, dj});
    EXPECT_EQ(got, want);
}

TEST(Blobs, SubLatticeRadiusGivesSingleVertex) {
    const auto d = disc_domain();
    const auto g = discretize(d, 16, select_blob_centers(d, 0.2));
    EXPECT_EQ(g.require_blobs().set1.size(), 1u);
    EXPECT_EQ(g.require_blobs().set2.size(), 1u);
}

TEST(Blobs, CardinalityAndMeasureMatchAcrossMatrix) {
    const std::vector<std::pair<ConformalDomain, double>> cases{
        {disc_domain(), 0.4}, {disc_domain(), 0.3}, {bean_domain(), 0.3}, {bean_domain(), 0.25}};
    for (const auto& [d, delta] : cases) {
        for (int n : {16, 32, 64}) {
            const auto g = discretize(d, n, select_blob_centers(d, delta));
            const auto& b = g.require_blobs();
            ASSERT_EQ(b.set1.size(), b.set2.size());
            const auto pi = stationary_measure(g);
            double p1 = 0.0, p2 = 0.0;
            for (int v : b.set1) {
                EXPECT_EQ(g.degree(v), 4);
                p1 += pi[v];
            }
            for (int v : b.set2) {
                EXPECT_EQ(g.degree(v), 4);
                p2 += pi[v];
            }
            EXPECT_EQ(p1, p2);
        }
    }
}

TEST(Blobs, TouchingBoundaryRejected) {
    const auto d = disc_domain();
    BlobSpec b{0.4, {0.0, -0.95}, {0.0, 0.95}, 0.1};
    const auto g = discretize(d, 16);
    EXPECT_THROW(blob_vertices(g, b), BlobTouchesBoundary);
}

TEST(Stationary, FourCycleUniform) {
    const auto g = square_cycle();
    const auto pi = stationary_measure(g);
    for (std::size_t v = 0; v < 4; ++v) EXPECT_DOUBLE_EQ(pi[v], 0.25);
}

TEST(Stationary, SumsToOne) {
    const auto g = discretize(disc_domain(), 8);
    const auto pi = stationary_measure(g);
    EXPECT_NEAR(std::accumulate(pi.values.begin(), pi.values.end(), 0.0), 1.0, 1e-14);
}

TEST(Laplacian, ConstantsAndCoordinates) {
    const auto g = discretize(disc_domain(), 8);
    const auto c = apply_laplacian(g, ScalarField(g, 3.25));
    for (double v : c.values) EXPECT_NEAR(v, 0.0, 1e-15);
    ScalarField x(g);
    for (std::size_t v = 0; v < g.size(); ++v) x[v] = g.position(static_cast<int>(v)).real();
    const auto lx = apply_laplacian(g, x);
    EXPECT_NEAR(lx[g.index_of(1, 2)], 0.0, 1e-15);
}

TEST(Laplacian, MatchesDenseOracle) {
    const auto g = discretize(disc_domain(), 8);
    const int V = static_cast<int>(g.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(V, V);
    for (int a = 0; a < V; ++a)
        for (int b : g.neighbors(a))
            if (b >= 0) L(a, b) -= 1.0 / g.degree(a);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    ScalarField f(g);
    Eigen::VectorXd fv(V);
    for (int v = 0; v < V; ++v) fv(v) = f[v] = nd(rng);
    const Eigen::VectorXd want = L * fv;
    const auto got = apply_laplacian(g, f);
    for (int v = 0; v < V; ++v) EXPECT_NEAR(got[v], want(v), 1e-13);
}

TEST(Laplacian, RejectsForeignField) {
    const auto g = discretize(disc_domain(), 8);
    const auto h = discretize(disc_domain(), 8);
    EXPECT_THROW(apply_laplacian(g, ScalarField(h)), std::invalid_argument);
}

TEST(StarComponents, DiagonalThroughFullSquare) {
    const auto g = discretize(disc_domain(), 8);
    const std::vector<int> S{g.index_of(0, 0), g.index_of(1, 1)};
    EXPECT_EQ(star_components(g, S).size(), 1u);
}

TEST(StarComponents, DistantVerticesSeparate) {
    const auto g = discretize(disc_domain(), 8);
    const std::vector<int> S{g.index_of(0, 0), g.index_of(3, 0)};
    EXPECT_EQ(star_components(g, S).size(), 2u);
}

TEST(StarComponents, MatchesBruteForce) {
    for (const auto& d : {disc_domain(), bean_domain()}) {
        const auto g = discretize(d, 8);
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<int> S;
            for (std::size_t v = 0; v < g.size(); ++v)
                if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.35) S.push_back(static_cast<int>(v));
            std::set<std::set<int>> got;
            for (const auto& c : star_components(g, S)) got.insert(std::set<int>(c.begin(), c.end()));
            EXPECT_EQ(got, brute_star_components(g, S));
        }
    }
}

TEST(Export, GraphJsonShape) {
    const auto d = disc_domain();
    const auto g = discretize(d, 16, select_blob_centers(d, 0.4));
    const auto j = graph_to_json(g);
    EXPECT_EQ(j["n"], 16);
    EXPECT_EQ(j["vertices"].size(), g.size());
    long edges = 0;
    for (std::size_t v = 0; v < g.size(); ++v) edges += g.degree(static_cast<int>(v));
    EXPECT_EQ(static_cast<long>(j["edges"].size()) * 2, edges);
    EXPECT_EQ(j["blob1"].size(), 9u);
    EXPECT_EQ(j["blob2"].size(), 9u);
}
