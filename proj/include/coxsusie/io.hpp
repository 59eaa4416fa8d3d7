#ifndef COXSUSIE_IO_HPP
#define COXSUSIE_IO_HPP

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "coxsusie/gibss.hpp"

namespace coxsusie {

// Numeric table parsed from comma- or tab-delimited text (delimiter
// auto-detected from the required header row).
struct NumericTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

NumericTable read_delimited(const std::string& path);
void write_delimited(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::Ref<const Eigen::MatrixXd>& values, char delim = '\t');

// Phenotype file: columns named `time` and `status`.
SurvivalOutcome read_phenotypes(const std::string& path);
void write_phenotypes(const std::string& path, const SurvivalOutcome& outcome);

// Genotype / covariate matrix with variable names in the header.
struct NamedMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;
};
NamedMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const std::vector<std::string>& names,
                  const Eigen::Ref<const Eigen::MatrixXd>& values);

// Ground-truth table: one row per variable with columns
// variable, causal, coefficient.
struct TruthTable {
    std::vector<std::string> names;
    std::vector<int> causal_indices;       // ascending
    Eigen::VectorXd coefficients;
};
TruthTable read_truth(const std::string& path);
void write_truth(const std::string& path, const std::vector<std::string>& names,
                 const std::vector<int>& causal_indices,
                 const Eigen::Ref<const Eigen::VectorXd>& coefficients);

// Settings echoed into the fit document.
struct FitSettings {
    int L = 5;
    double rho = 0.95;
    double purity_threshold = 0.5;
    double tol = 1e-4;
    int max_iter = 100;
    Eigen::VectorXd sigma0_init;
};

// Full fit result as a JSON document; parse(emit(x)) == x.
nlohmann::json fit_to_json(const SusieFit& fit, const std::vector<std::string>& variables,
                           const FitSettings& settings);
struct FitDocument {
    std::vector<std::string> variables;
    SusieFit fit;
    FitSettings settings;
};
FitDocument fit_from_json(const nlohmann::json& doc);

void write_fit_json(const std::string& path, const SusieFit& fit,
                    const std::vector<std::string>& variables, const FitSettings& settings);
FitDocument read_fit_json(const std::string& path);

} // namespace coxsusie

#endif
