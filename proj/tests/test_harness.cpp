#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nglat/harness.hpp>

using namespace nglat;

namespace {

RunConfig small_config(const std::string& extra = "") {
    return parse_config(json::parse(R"({"domain": "disc", "n_list": [16, 32], "experiments": [)" + extra +
                                    R"(], "mixing": {"n_list": [8, 16], "t_list": [0.1, 0.2, 0.4, 0.8],
                                       "probe_count": 4, "gauss_t_list": [0.125, 0.25], "escape_paths": 2000},
                                       "capa": {"n_list": [32], "eps2_list": [0.15, 0.3]},
                                       "beurling": {"n_list": [16, 32]},
                                       "polydecay": {"n_list": [16], "eps_list": [0.2, 0.1]},
                                       "gflower": {"n_list": [32]}})"));
}

bool all_finite(const json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& v : j)
            if (!all_finite(v)) return false;
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
    const auto c = parse_config(json::parse(R"({"domain": [[1, 0], [0.2, 0]], "delta": 0.3, "seed": 7,
        "quadrature": {"radial": 16}, "beurling": {"segment_a": [-0.2, 0.1], "c_min": 0.2}})"));
    EXPECT_EQ(c.domain, "custom");
    ASSERT_EQ(c.coefficients.size(), 2u);
    EXPECT_EQ(c.coefficients[1], cplx(0.2, 0.0));
    EXPECT_EQ(c.delta, 0.3);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.quadrature.radial_points, 16);
    EXPECT_EQ(c.beurling.segment_a, cplx(-0.2, 0.1));
    EXPECT_EQ(c.beurling.segment_b, cplx(0.25, 0.2));
    EXPECT_TRUE(c.run.convergence && c.run.mixing);
    EXPECT_EQ(parse_config(json::object()).n_list, (std::vector<int>{16, 32, 64, 128}));
}

TEST(Config, RejectsUnknownAndInvalid) {
    EXPECT_THROW(parse_config(json::parse(R"({"detla": 0.4})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"mixing": {"probes": 3}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"experiments": ["teapot"]})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"n_list": [32, 16]})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"n_list": [4]})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"delta": "big"})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"tol": -1})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"domain": "teapot"})")).build(), ConfigError);
}

TEST(Config, LoadsFileWithComments) {
    const auto path = std::filesystem::temp_directory_path() / "nglat_cfg_test.json";
    {
        std::ofstream out(path);
        out << "{\n  // preset\n  \"domain\": \"bean\", \"delta\": 0.3\n}\n";
    }
    const auto c = load_config(path.string());
    EXPECT_EQ(c.domain, "bean");
    std::filesystem::remove(path);
    EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError);
}

TEST(Config, ShippedExampleParses) {
    const auto c = load_config(std::string(NGLAT_SOURCE_DIR) + "/configs/example.json");
    EXPECT_EQ(c.domain, "bean");
    EXPECT_TRUE(c.run.any());
    EXPECT_NO_THROW(c.build());
}

TEST(Report, JsonProvenanceAndNulls) {
    ExperimentReport r;
    r.name = "demo";
    r.module = "m";
    r.operation = "op";
    r.columns = {"a", "b"};
    r.add_row({1.0, std::nan("")});
    EXPECT_THROW(r.add_row({1.0}), std::logic_error);
    const auto j = r.to_json();
    EXPECT_EQ(j["provenance"]["module"], "m");
    EXPECT_EQ(j["provenance"]["operation"], "op");
    EXPECT_EQ(j["provenance"]["version"], NGLAT_VERSION);
    EXPECT_TRUE(j["rows"][0][1].is_null());
    EXPECT_EQ(r.to_csv(), "experiment,module,operation,a,b\ndemo,m,op,1,nan\n");
    EXPECT_THROW(r.column("c"), std::out_of_range);
}

TEST(Harness, ConvergenceReportIsFiniteAndDeterministic) {
    const auto cfg = small_config(R"("convergence")");
    const auto a = run_convergence(cfg);
    const auto b = run_convergence(cfg);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    EXPECT_TRUE(all_finite(a.to_json()));
    EXPECT_EQ(a.rows.size(), 2u);
    for (double r : a.column("residual")) EXPECT_LE(r, cfg.tol);
    EXPECT_TRUE(a.summary.contains("wall_time"));
    EXPECT_EQ(a.to_csv().find("wall"), std::string::npos);
}

TEST(Harness, MixingCsvDeterministic) {
    const auto cfg = small_config(R"("mixing")");
    const auto a = run_mixing(cfg);
    const auto b = run_mixing(cfg);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].to_csv(), b[k].to_csv()) << a[k].name;
        EXPECT_TRUE(all_finite(a[k].to_json())) << a[k].name;
    }
}

TEST(Harness, EmptySelectionGivesEmptyBundle) {
    const auto b = run_all(small_config());
    EXPECT_TRUE(b.reports.empty());
    EXPECT_TRUE(b.ok());
    EXPECT_EQ(b.to_json()["reports"].size(), 0u);
}

TEST(Harness, FailingStageRecordsErrorAndContinues) {
    auto cfg = small_config(R"("capa", "beurling")");
    cfg.capa.eps2_list = {0.01};
    const auto b = run_all(cfg);
    ASSERT_EQ(b.reports.size(), 2u);
    EXPECT_FALSE(b.ok());
    EXPECT_EQ(b.reports[0].name, "beurling");
    EXPECT_TRUE(b.reports[0].ok());
    EXPECT_EQ(b.reports[1].name, "capa");
    ASSERT_EQ(b.reports[1].errors.size(), 1u);
    EXPECT_NE(b.reports[1].errors[0].find("ObstacleInvalid"), std::string::npos);
}

TEST(Harness, WriteBundleFiles) {
    const auto cfg = small_config(R"("beurling", "polydecay", "gflower")");
    const auto b = run_all(cfg);
    ASSERT_TRUE(b.ok());
    const auto dir = std::filesystem::temp_directory_path() / "nglat_bundle_test";
    std::filesystem::remove_all(dir);
    write_bundle(b, dir);
    const auto j = json::parse(slurp(dir / "bundle.json"));
    EXPECT_EQ(j["reports"].size(), 3u);
    for (const char* name : {"beurling", "polydecay", "gflower"}) {
        const std::string csv = slurp(dir / (std::string(name) + ".csv"));
        EXPECT_EQ(csv.rfind("experiment,module,operation,", 0), 0u) << name;
        EXPECT_EQ(csv.find(';'), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
