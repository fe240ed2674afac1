#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ssf/decomp.hpp"
#include "ssf/oracle.hpp"

namespace ssf {

struct RefineWindow {
    double center = 0.0;
    double radius = 0.0;
    int factor = 1;
};

struct ExperimentConfig {
    double lambda_min = -6.0;
    double lambda_max = 6.0;
    double lambda_step = 0.01;
    std::vector<RefineWindow> refine_windows{{-1.0, 0.2, 10}, {1.0, 0.2, 10}};
    double r_quad_tol = 1e-8;
    double pole_radius = 1e-2;
    int hermite_N = 400;
    double smoothing_sigma = 0.2;
    std::string output_dir = "out";
    int precision = 12;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
    nlohmann::json to_json() const;
    /// Unknown keys are rejected; missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::string& path);

/// Parses "min:max:step".
void apply_grid_spec(ExperimentConfig& cfg, const std::string& spec);

/// lambda_min + k * step, with base cells whose midpoint lies in a refine
/// window subdivided by the largest applicable factor. Built from integer
/// counters so that the same config always yields the same doubles.
std::vector<double> lambda_grid(const ExperimentConfig& cfg);

DecompOptions decomp_options(const ExperimentConfig& cfg);

enum class Comparison { at_most, at_least };

struct Residual {
    Residual(std::string name_, double value_, double budget_, Comparison comparison_ = Comparison::at_most,
             std::string note_ = {})
        : name(std::move(name_)), value(value_), budget(budget_), comparison(comparison_), note(std::move(note_)) {}

    std::string name;
    double value = 0.0;
    double budget = 0.0;
    Comparison comparison = Comparison::at_most;
    std::string note;

    bool pass() const;
};

struct ExperimentReport {
    std::string name;
    nlohmann::json config;
    std::vector<Residual> residuals;
    std::vector<std::string> outputs;
    nlohmann::json details = nlohmann::json::object();
    double wall_time = 0.0;

    bool passed() const;
    std::vector<const Residual*> failures() const;
    nlohmann::json to_json() const;
    /// Appends another report's residuals, prefixed with its name.
    void absorb(const ExperimentReport& sub);
};

OperatorPair pair_by_id(const std::string& id);

/// Exclusion windows of radius r around the levels +-1.
std::vector<PoleWindow> level_windows(double radius);

/// `lambda,xi_total,xi_ac,xi_singular,int_residual` with `precision`
/// significant digits and LF line endings.
std::string ssf_table_csv(const SsfTable& table, int precision);

/// Smoothed continuum xi of a pair at the given points (midpoint convolution).
std::vector<double> smoothed_continuum_ssf(const OperatorPair& pair, std::span<const double> lambdas,
                                           double sigma);

// Named experiments. Each writes its outputs under cfg.output_dir when
// `write_files` is set.
ExperimentReport cmd_ssf_table(const std::string& pair_id, const ExperimentConfig& cfg, bool write_files = true);
ExperimentReport cmd_check_sum_rule(const ExperimentConfig& cfg, bool write_files = true);
ExperimentReport cmd_check_birman_krein(const ExperimentConfig& cfg, bool write_files = true);
ExperimentReport cmd_oracle_compare(const ExperimentConfig& cfg, bool write_files = true);
ExperimentReport cmd_irreducibility(const ExperimentConfig& cfg, bool write_files = true);

ExperimentReport check_plemelj(const ExperimentConfig& cfg);
ExperimentReport check_route_agreement(const ExperimentConfig& cfg);
ExperimentReport check_operator_identity(const ExperimentConfig& cfg);
ExperimentReport check_pp_absence(const ExperimentConfig& cfg);
ExperimentReport check_non_additivity(const ExperimentConfig& cfg);
ExperimentReport check_determination(const ExperimentConfig& cfg);

ExperimentReport cmd_reproduce_paper(const ExperimentConfig& cfg, bool write_files = true);

void write_report(const ExperimentReport& report, const std::string& path);

}  // namespace ssf
