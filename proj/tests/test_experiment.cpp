#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ssf/errors.hpp"
#include "ssf/experiment.hpp"

namespace {

ssf::ExperimentConfig small_config(const std::string& dir) {
    ssf::ExperimentConfig c;
    c.lambda_min = -2.0;
    c.lambda_max = 2.0;
    c.lambda_step = 0.1;
    c.output_dir = (std::filesystem::temp_directory_path() / dir).string();
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, JsonRoundTrip) {
    ssf::ExperimentConfig c;
    c.hermite_N = 77;
    c.refine_windows = {{0.5, 0.1, 4}};
    const auto back = ssf::ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Config, Rejections) {
    EXPECT_THROW(ssf::ExperimentConfig::from_json({{"lambda_step", -0.1}}), ssf::ConfigError);
    EXPECT_THROW(ssf::ExperimentConfig::from_json({{"hermite_N", 1}}), ssf::ConfigError);
    EXPECT_THROW(ssf::ExperimentConfig::from_json({{"pole_radius", 0.0}}), ssf::ConfigError);
    EXPECT_THROW(ssf::ExperimentConfig::from_json({{"unknown", 1}}), ssf::ConfigError);
    EXPECT_THROW(ssf::ExperimentConfig::from_json({{"hermite_N", "many"}}), ssf::ConfigError);
    EXPECT_THROW(ssf::load_config("/nonexistent/config.json"), ssf::ConfigError);
}

TEST(Config, GridSpec) {
    ssf::ExperimentConfig c;
    ssf::apply_grid_spec(c, "-3:4:0.5");
    EXPECT_EQ(c.lambda_min, -3.0);
    EXPECT_EQ(c.lambda_max, 4.0);
    EXPECT_EQ(c.lambda_step, 0.5);
    EXPECT_THROW(ssf::apply_grid_spec(c, "1:2"), ssf::ConfigError);
    EXPECT_THROW(ssf::apply_grid_spec(c, "2:1:0.1"), ssf::ConfigError);
    EXPECT_THROW(ssf::apply_grid_spec(c, "0:1:0.1x"), ssf::ConfigError);
}

TEST(Grid, DefaultRefinement) {
    const ssf::ExperimentConfig c;
    const auto g = ssf::lambda_grid(c);
    // 1200 base cells, 40 per window (inside +-0.2 of +-1) split tenfold.
    EXPECT_EQ(g.size(), 1200u + 80u * 9u + 1u);
    EXPECT_EQ(g.front(), -6.0);
    EXPECT_NEAR(g.back(), 6.0, 1e-12);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_NE(std::find(g.begin(), g.end(), 0.0), g.end());
    EXPECT_EQ(g, ssf::lambda_grid(c));
}

TEST(Residuals, Comparisons) {
    EXPECT_TRUE(ssf::Residual("a", 1e-4, 1e-3).pass());
    EXPECT_FALSE(ssf::Residual("a", 2e-3, 1e-3).pass());
    EXPECT_FALSE(ssf::Residual("a", NAN, 1e-3).pass());
    EXPECT_TRUE(ssf::Residual("b", 1.0, 0.9, ssf::Comparison::at_least).pass());
    EXPECT_FALSE(ssf::Residual("b", 0.5, 0.9, ssf::Comparison::at_least).pass());
    ssf::ExperimentReport rep;
    rep.residuals.emplace_back("ok", 0.0, 1.0);
    EXPECT_TRUE(rep.passed());
    rep.residuals.emplace_back("bad", 2.0, 1.0);
    EXPECT_FALSE(rep.passed());
    ASSERT_EQ(rep.failures().size(), 1u);
    EXPECT_EQ(rep.failures()[0]->name, "bad");
}

TEST(Table, CsvFormatAndRows) {
    const auto cfg = small_config("ssf_test_csv");
    const auto rep = ssf::cmd_ssf_table("diagonal", cfg);
    EXPECT_TRUE(rep.passed());
    const std::string csv = slurp(cfg.output_dir + "/ssf_diagonal.csv");
    EXPECT_EQ(csv.rfind("lambda,xi_total,xi_ac,xi_singular,int_residual\n", 0), 0u);
    EXPECT_NE(csv.find("\n0,1,0,1,0\n"), std::string::npos);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_THROW(ssf::cmd_ssf_table("bogus", cfg), ssf::ConfigError);
}

TEST(Table, RankOneRows) {
    auto cfg = small_config("ssf_test_rank1");
    cfg.lambda_max = 8.0;
    ssf::cmd_ssf_table("rank1", cfg);
    const std::string csv = slurp(cfg.output_dir + "/ssf_rank1.csv");
    std::istringstream is(csv);
    std::string line;
    bool saw0 = false, saw8 = false;
    while (std::getline(is, line)) {
        double v[5];
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4]) != 5) continue;
        if (v[0] == 0.0) {
            saw0 = true;
            EXPECT_NEAR(v[1], 0.5, 1e-3);
            EXPECT_NEAR(v[2], 0.5, 1e-3);
            EXPECT_NEAR(v[3], 0.0, 1e-3);
        }
        if (std::abs(v[0] - 8.0) < 1e-9) {
            saw8 = true;
            for (int k = 1; k < 4; ++k) EXPECT_NEAR(v[k], 0.0, 1e-3);
        }
    }
    EXPECT_TRUE(saw0);
    EXPECT_TRUE(saw8);
}

TEST(Table, Deterministic) {
    const auto cfg = small_config("ssf_test_det");
    ssf::cmd_ssf_table("rank2_reversed", cfg);
    const std::string first = slurp(cfg.output_dir + "/ssf_rank2_reversed.csv");
    ssf::cmd_ssf_table("rank2_reversed", cfg);
    EXPECT_EQ(first, slurp(cfg.output_dir + "/ssf_rank2_reversed.csv"));
}

TEST(SumRule, ReportedHonestlyAcrossSettings) {
    auto cfg = small_config("ssf_test_sum");
    const auto strict = ssf::cmd_check_sum_rule(cfg, false);
    cfg.r_quad_tol = 1e-3;
    const auto coarse = ssf::cmd_check_sum_rule(cfg, false);
    EXPECT_EQ(strict.residuals.size(), coarse.residuals.size());
    // Grid that avoids [-1, 1]: nothing to sum, identity holds trivially.
    cfg.lambda_min = 2.0;
    cfg.lambda_max = 4.0;
    const auto outside = ssf::cmd_check_sum_rule(cfg, false);
    EXPECT_TRUE(outside.passed());
}

TEST(BirmanKrein, AllPairsWithinBudget) {
    EXPECT_TRUE(ssf::cmd_check_birman_krein(small_config("ssf_test_bk"), false).passed());
}

TEST(Checks, FastChecksPass) {
    const auto cfg = small_config("ssf_test_checks");
    EXPECT_TRUE(ssf::check_plemelj(cfg).passed());
    EXPECT_TRUE(ssf::check_operator_identity(cfg).passed());
    EXPECT_TRUE(ssf::check_non_additivity(cfg).passed());
    EXPECT_TRUE(ssf::check_pp_absence(cfg).passed());
}

TEST(Smoothed, ContinuumOfDiagonalIsSmoothedIndicator) {
    const std::vector<double> ls = {-2.0, -1.0, 0.0, 0.5, 1.3};
    const auto s = ssf::smoothed_continuum_ssf(ssf::diagonal_pair(), ls, 0.2);
    const ssf::SmoothingKernel k{0.2};
    for (std::size_t i = 0; i < ls.size(); ++i) EXPECT_NEAR(s[i], k.cdf(ls[i] + 1.0) - k.cdf(ls[i] - 1.0), 1e-5);
}
