// ssflab: command-line runner for the spectral shift experiments.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ssf/errors.hpp"
#include "ssf/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string grid;
    std::optional<int> hermite_n;
    std::string log_level;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out_dir, "output directory");
    sub->add_option("--grid", f.grid, "lambda grid as min:max:step");
    sub->add_option("--hermite-n", f.hermite_n, "Hermite truncation N");
    sub->add_option("--log-level", f.log_level, "trace|debug|info|warn|error|off");
}

ssf::ExperimentConfig resolve(const CommonFlags& f) {
    ssf::ExperimentConfig cfg = f.config_path.empty() ? ssf::ExperimentConfig{} : ssf::load_config(f.config_path);
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (!f.grid.empty()) ssf::apply_grid_spec(cfg, f.grid);
    if (f.hermite_n) cfg.hermite_N = *f.hermite_n;
    cfg.validate();
    return cfg;
}

void set_log_level(const std::string& flag) {
    std::string level = flag;
    if (level.empty()) {
        if (const char* env = std::getenv("SSFLAB_LOG_LEVEL")) level = env;
    }
    if (level.empty()) level = "info";
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && level != "off") throw ssf::ConfigError("unknown log level '" + level + "'");
    spdlog::set_level(parsed);
}

int report_exit(const ssf::ExperimentReport& rep) {
    for (const auto* r : rep.failures()) {
        std::cerr << "FAIL " << r->name << ": " << r->value << (r->comparison == ssf::Comparison::at_most ? " > " : " < ")
                  << r->budget << "\n";
    }
    for (const auto& p : rep.outputs) std::cout << p << "\n";
    if (rep.details.contains("determination_outcome")) {
        std::cout << "determination (computed): " << rep.details["determination_outcome"].get<std::string>() << "\n";
    }
    return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral shift function laboratory"};
    app.require_subcommand(1);
    CommonFlags flags;
    std::string pair_id = "diagonal";

    auto* table = app.add_subcommand("ssf-table", "tabulate xi, xi_ac, xi_s for one pair");
    table->add_option("pair", pair_id, "diagonal | rank1 | rank2_reversed")
        ->check(CLI::IsMember({"diagonal", "rank1", "rank2_reversed"}));
    auto* sum = app.add_subcommand("check-sum-rule", "singular-part sum rule");
    auto* bk = app.add_subcommand("check-birman-krein", "scattering determinant identities");
    auto* oracle = app.add_subcommand("oracle-compare", "finite-dimensional oracle vs continuum");
    auto* irr = app.add_subcommand("irreducibility", "commutant and Krylov dimensions");
    auto* all = app.add_subcommand("reproduce-paper", "run every experiment");
    for (auto* s : {table, sum, bk, oracle, irr, all}) add_common(s, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        set_log_level(flags.log_level);
        const ssf::ExperimentConfig cfg = resolve(flags);
        ssf::ExperimentReport rep;
        if (*table) rep = ssf::cmd_ssf_table(pair_id, cfg);
        else if (*sum) rep = ssf::cmd_check_sum_rule(cfg);
        else if (*bk) rep = ssf::cmd_check_birman_krein(cfg);
        else if (*oracle) rep = ssf::cmd_oracle_compare(cfg);
        else if (*irr) rep = ssf::cmd_irreducibility(cfg);
        else rep = ssf::cmd_reproduce_paper(cfg);
        return report_exit(rep);
    } catch (const ssf::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
