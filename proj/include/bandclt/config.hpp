#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandclt/ensemble.hpp"
#include "bandclt/test_function.hpp"

namespace bandclt {

/// Fully resolved run configuration. Every field has a default except the
/// ensemble geometry, which is only required by the subcommands that sample
/// matrices.
struct RunConfig {
    bool has_ensemble = false;
    EnsembleSpec ensemble;
    nlohmann::json dist = "gaussian";
    nlohmann::json diag_dist;  // null: same family as dist at variance 2 sigma^2

    TestFunction phi = TestFunction::square();
    TestFunction f = TestFunction::square();
    TestFunction g = TestFunction::square();
    nlohmann::json phi_json = "x^2";
    nlohmann::json f_json;  // null: copy of phi
    nlohmann::json g_json;  // null: copy of f

    std::size_t reps = 100;
    int workers = 1;
    double kappa4 = 0.0;
    bool kappa4_from_dist = true;
    std::vector<double> t_grid{0.5, 1.0, 2.0};
    std::vector<std::size_t> b_list;  // empty: {b}
    std::complex<double> z{0.0, 1.0};
    unsigned max_order = 10;
    unsigned variance_nodes = 200;
    std::size_t calibration_batches = 200;
    double calibration_quantile = 0.95;
    std::string out = "out";
};

/// Parses a JSON document. Unknown keys are rejected by name; constraint
/// violations raise ValidationError naming the field; malformed text raises
/// a Parse error with the line and column.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Re-checks the constraints after command-line overrides.
void validate_config(const RunConfig& cfg);

/// Builds a TestFunction from its config representation: a coefficient
/// array, "x", "x^k", a named function ("tanh", "exp", ...), or an object
/// {"poly": [...]} / {"name": ..., "scale": ...}.
TestFunction parse_test_function(const nlohmann::json& j, const std::string& field);

/// Resolved configuration with all defaults filled in.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace bandclt
