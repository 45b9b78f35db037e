#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nglat/green.hpp>
#include <nglat/io.hpp>

#include "oracles.hpp"

using namespace nglat;

namespace {

struct Setup {
    ConformalDomain d;
    BlobSpec b;
    LatticeGraph g;
};

Setup make(const ConformalDomain& d, double delta, int n) {
    const auto b = select_blob_centers(d, delta);
    return {d, b, discretize(d, n, b)};
}

}  // namespace

TEST(Source, SumsToZeroExactly) {
    for (int n : {8, 16, 32}) {
        for (const auto& s : {make(disc_domain(), 0.4, n), make(bean_domain(), 0.3, n)}) {
            const auto src = source_field(s.g);
            const auto& b = s.g.require_blobs();
            double plus = 0.0, minus = 0.0;
            for (int v : b.set1) plus += s.g.degree(v) * src[v];
            for (int v : b.set2) minus += s.g.degree(v) * src[v];
            EXPECT_EQ(plus, -minus);
            EXPECT_EQ(degree_weighted_sum(s.g, src), 0.0);
        }
    }
}

TEST(Source, NinthsOnNineVertexBlobs) {
    const auto s = make(disc_domain(), 0.4, 16);
    const auto src = source_field(s.g);
    const auto& b = s.g.require_blobs();
    for (int v : b.set1) EXPECT_DOUBLE_EQ(src[v], 1.0 / 9.0);
    for (int v : b.set2) EXPECT_DOUBLE_EQ(src[v], -1.0 / 9.0);
    int nonzero = 0;
    for (double x : src.values) nonzero += x != 0.0;
    EXPECT_EQ(nonzero, 18);
}

TEST(Source, DiscAntisymmetric) {
    const auto s = make(disc_domain(), 0.4, 16);
    const auto src = source_field(s.g);
    for (std::size_t v = 0; v < s.g.size(); ++v) {
        const auto p = s.g.vertex(static_cast<int>(v));
        EXPECT_EQ(src[s.g.index_of(-p.i, -p.j)], -src[v]);
    }
}

TEST(Solve, ResidualAndGauge) {
    const auto s = make(bean_domain(), 0.3, 32);
    const auto [H, rep] = solve_green_raw(s.g, 1e-10);
    EXPECT_LE(rep.residual_norm, 1e-10);
    const auto lap = apply_laplacian(s.g, H);
    const auto src = source_field(s.g);
    for (std::size_t v = 0; v < s.g.size(); ++v) EXPECT_NEAR(lap[v], src[v], 1e-10);
    EXPECT_NEAR(stationary_mean(s.g, H), 0.0, 1e-10);
}

TEST(Solve, DiscAntisymmetry) {
    const double tol = 1e-10;
    const auto s = make(disc_domain(), 0.4, 32);
    const auto [H, rep] = solve_green_raw(s.g, tol);
    for (std::size_t v = 0; v < s.g.size(); ++v) {
        const auto p = s.g.vertex(static_cast<int>(v));
        EXPECT_NEAR(H[s.g.index_of(-p.i, -p.j)], -H[v], 10 * tol);
    }
}

TEST(Solve, MatchesDensePseudoInverse) {
    for (const auto& s : {make(disc_domain(), 0.4, 8), make(bean_domain(), 0.3, 8)}) {
        ASSERT_LE(s.g.size(), 500u);
        const auto want = oracle::dense_green(s.g);
        const auto [H, rep] = solve_green_raw(s.g, 1e-12);
        for (std::size_t v = 0; v < s.g.size(); ++v) EXPECT_NEAR(H[v], want[v], 1e-9);
    }
}

TEST(Solve, StallsWhenCapTooSmall) {
    // An unattainable tolerance cannot be met within the iteration cap.
    const auto s = make(disc_domain(), 0.4, 16);
    EXPECT_THROW(solve_green_raw(s.g, 1e-30), SolverStalled);
}

TEST(MonteCarlo, PositiveInsideBlobOne) {
    const auto s = make(disc_domain(), 0.4, 8);
    const int x = s.g.require_blobs().set1.front();
    const auto est = occupation_time_mc(s.g, x, 0.05, 2000, 9);
    EXPECT_GT(est.estimate, 0.0);
}

TEST(MonteCarlo, SymmetricStartsGiveOppositeEstimates) {
    const auto s = make(disc_domain(), 0.4, 8);
    const int x = s.g.index_of(2, -3), y = s.g.index_of(-2, 3);
    const auto a = occupation_time_mc(s.g, x, 5.0, 20000, 1);
    const auto b = occupation_time_mc(s.g, y, 5.0, 20000, 2);
    EXPECT_LE(std::abs(a.estimate + b.estimate), 3.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST(MonteCarlo, AgreesWithSolve) {
    const auto s = make(disc_domain(), 0.4, 8);
    const auto [H, rep] = solve_green_raw(s.g, 1e-12);
    int ok = 0;
    const std::vector<LatticePoint> starts{{0, 0}, {3, 1}, {-1, -4}, {0, 5}, {-6, 2}};
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const int x = s.g.index_of(starts[k]);
        const auto est = occupation_time_mc(s.g, x, 5.0, 20000, 100 + k);
        ok += std::abs(est.estimate - H[x]) <= 3.0 * est.stderr_;
    }
    EXPECT_GE(ok, 4);
}

TEST(MonteCarlo, DeterministicGivenSeed) {
    const auto s = make(disc_domain(), 0.4, 8);
    const auto a = occupation_time_mc(s.g, 5, 1.0, 3000, 77);
    const auto b = occupation_time_mc(s.g, 5, 1.0, 3000, 77);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Normalize, ConstantFieldGoesToZero) {
    const auto s = make(bean_domain(), 0.3, 16);
    const auto out = normalize(s.d, s.g, ScalarField(s.g, 2.5), 1024);
    EXPECT_NEAR(out.c_hat, 2.5, 1e-12);
    for (double v : out.field.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Normalize, DiscBoundaryConstantVanishes) {
    const auto s = make(disc_domain(), 0.4, 32);
    const auto [H, rep] = solve_green_raw(s.g, 1e-10);
    EXPECT_NEAR(normalize(s.d, s.g, H, 4096).c_hat, 0.0, 1e-6);
}

TEST(Normalize, BoundaryConstantStabilizes) {
    // Tilted map so the boundary constant is not forced to zero by symmetry.
    const auto s = make(build_domain({{1.0, 0.0}, {0.15, 0.1}}), 0.3, 32);
    const auto [H, rep] = solve_green_raw(s.g, 1e-10);
    const double c12 = normalize(s.d, s.g, H, 1 << 12).c_hat;
    const double c14 = normalize(s.d, s.g, H, 1 << 14).c_hat;
    EXPECT_GT(std::abs(c14), 1e-3);
    EXPECT_LE(std::abs(c12 - c14), 1e-4 * std::abs(c14));
}

TEST(Export, FieldCsvAndSolveReport) {
    const auto s = make(disc_domain(), 0.4, 8);
    const auto [H, rep] = solve_green_raw(s.g, 1e-10);
    const std::string csv = field_to_csv(s.g, H);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "i,j,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, s.g.size());
    const auto j = solve_report_to_json(rep);
    EXPECT_EQ(j["iterations"], rep.iterations);
    EXPECT_TRUE(j.contains("residual_norm"));
    EXPECT_TRUE(j.contains("wall_time"));
}
