#pragma once

#include <string>
#include <string_view>

#include "d2drobust/evaluation.hpp"

namespace d2d {

/// Flat key=value configuration shared by every command.
struct RunConfig {
    ExperimentSpec experiment;  ///< `distribution` is rebuilt from the fields below

    std::string distribution = "gaussian";  ///< or "truncated-exponential"
    double gauss_mean_d = 0.0;
    double gauss_mean_cd = 0.0;
    double gauss_var_d = 1.0;
    double gauss_var_cd = 1.0;
    double gauss_corr = 0.5;
    double texp_rate_d = 1.0;
    double texp_rate_cd = 1.0;
    double texp_l1_radius = 3.0;

    std::string out_dir = "out";
    std::string dataset;   ///< input for fit-set; empty means <out_dir>/train.csv
    std::string set_file;  ///< input for allocate; empty means <out_dir>/set_<method>.txt
    std::string method = "svc";
    int verbosity = 0;
};

/// Applies one setting; throws ConfigError naming the key when it is unknown or malformed.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies `KEY=VALUE`.
void apply_assignment(RunConfig& config, std::string_view assignment);

/// Lines of key=value; blank lines and lines starting with '#' are skipped.
void apply_config_text(RunConfig& config, std::string_view text);
void apply_config_file(RunConfig& config, const std::string& path);

/// Every key with its resolved value, one per line, in a form apply_config_text accepts.
std::string dump(const RunConfig& config);

}  // namespace d2d
