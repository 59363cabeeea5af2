#pragma once

#include <functional>
#include <string>
#include <vector>

namespace travwave {

using ScalarFn = std::function<double(double)>;
using BivariateFn = std::function<double(double, double)>;

// Reaction term f and effort density L(u, beta) of a scalar invasion model.
// Controls act as f(u) - beta; alpha = L(u, beta) is the physical control.
struct ModelSpec {
    std::string label;
    ScalarFn f;
    ScalarFn df;
    double u_star = 0.0;
    BivariateFn L;
    BivariateFn L_beta;
    BivariateFn L_betabeta;
    BivariateFn L_ubeta;
    ScalarFn beta_max;
    // f(u, alpha) in terms of the physical control; optional.
    BivariateFn f_controlled;
    bool bistable = true;
    // Control cannot act below u_star (beta_max vanishes there).
    bool control_above_u_star_only = false;
};

struct Model2Params {
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    double d = 1.0;

    double v_star() const { return kappa2 / (kappa2 + d); }
    void validate() const;
};

// f(u) = rate * u (u - u_star)(1 - u). rate = 1 is the standard weed model.
ModelSpec make_weed_model(double u_star, double rate = 1.0);
ModelSpec make_logistic_model(double kappa3);

// Builds a spec that shares the cost structure of `base` but uses f_hat as its
// reaction term; df_hat is approximated by central differences when empty.
ModelSpec with_reaction(const ModelSpec& base, ScalarFn f_hat, ScalarFn df_hat = {}, std::string label = "");

struct ClauseResult {
    std::string clause;
    bool passed = false;
    std::string detail;
};

struct AssumptionReport {
    bool passed = true;
    std::vector<ClauseResult> clauses;
    double interior_zero = 0.0;          // A1 only
    std::vector<int> sign_pattern;       // A1 only, run-length signs of f on (0,1)
    double fd_discrepancy_beta = 0.0;    // A2 only, relative
    double fd_discrepancy_betabeta = 0.0;
    double fd_discrepancy_ubeta = 0.0;
    double fitted_c1 = 0.0;              // A2 growth fit L >= c1 * beta^p
    double fitted_p = 0.0;

    void add(std::string clause, bool ok, std::string detail = "");
};

AssumptionReport check_A1(const ModelSpec& spec, int samples = 2001);
AssumptionReport check_A2(const ModelSpec& spec, const std::vector<double>& u_samples,
                          const std::vector<double>& beta_samples);

// f(u) >= -d u on [0,1], sampled.
bool satisfies_death_rate_bound(const ModelSpec& spec, double d, int samples = 2001);

double max_abs_df(const ModelSpec& spec, int samples = 2001);
double max_f(const ModelSpec& spec, int samples = 2001);

}  // namespace travwave
