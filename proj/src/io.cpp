#include "coxsusie/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace coxsusie {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

double parse_number(const std::string& field, const std::string& path, std::size_t row,
                    std::size_t col) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
        throw ParseError(path + ": row " + std::to_string(row) + ", column " +
                         std::to_string(col) + ": not a number: '" + field + "'");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
    return v;
}

} // namespace

NumericTable read_delimited(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file, header required");
    line = strip_cr(line);
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';

    NumericTable table;
    for (auto& name : split(line, delim)) table.columns.push_back(name);
    const std::size_t ncol = table.columns.size();
    if (ncol == 0) throw ParseError(path + ": header row has no columns");

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split(line, delim);
        if (fields.size() != ncol)
            throw ParseError(path + ": row " + std::to_string(row_no) + ": expected " +
                             std::to_string(ncol) + " fields, got " +
                             std::to_string(fields.size()));
        std::vector<double> vals(ncol);
        for (std::size_t c = 0; c < ncol; ++c)
            vals[c] = parse_number(fields[c], path, row_no, c + 1);
        rows.push_back(std::move(vals));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(ncol));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < ncol; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return table;
}

void write_delimited(const std::string& path, const std::vector<std::string>& columns,
                     const Eigen::Ref<const Eigen::MatrixXd>& values, char delim) {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols())
        throw DimensionError(path + ": header width does not match value columns");
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? std::string(1, delim) : "") << columns[c];
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            out << (c ? std::string(1, delim) : "") << format_double(values(r, c));
        out << '\n';
    }
}

SurvivalOutcome read_phenotypes(const std::string& path) {
    const NumericTable table = read_delimited(path);
    Eigen::Index time_col = -1, status_col = -1;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c] == "time") time_col = static_cast<Eigen::Index>(c);
        if (table.columns[c] == "status") status_col = static_cast<Eigen::Index>(c);
    }
    if (time_col < 0 || status_col < 0)
        throw ParseError(path + ": phenotype file requires columns 'time' and 'status'");

    SurvivalOutcome outcome;
    outcome.times = table.values.col(time_col);
    outcome.status.resize(table.values.rows());
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        const double s = table.values(i, status_col);
        if (s != 0.0 && s != 1.0)
            throw ParseError(path + ": row " + std::to_string(i + 2) +
                             ": status must be 0 or 1");
        outcome.status[i] = static_cast<int>(s);
    }
    return outcome;
}

void write_phenotypes(const std::string& path, const SurvivalOutcome& outcome) {
    Eigen::MatrixXd values(outcome.n(), 2);
    values.col(0) = outcome.times;
    values.col(1) = outcome.status.cast<double>();
    write_delimited(path, {"time", "status"}, values);
}

NamedMatrix read_matrix(const std::string& path) {
    NumericTable table = read_delimited(path);
    return {std::move(table.columns), std::move(table.values)};
}

void write_matrix(const std::string& path, const std::vector<std::string>& names,
                  const Eigen::Ref<const Eigen::MatrixXd>& values) {
    write_delimited(path, names, values);
}

TruthTable read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file, header required");
    line = strip_cr(line);
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto header = split(line, delim);
    if (header.size() != 3 || header[0] != "variable" || header[1] != "causal" ||
        header[2] != "coefficient")
        throw ParseError(path + ": truth file requires header variable,causal,coefficient");

    TruthTable truth;
    std::vector<double> coefs;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split(line, delim);
        if (fields.size() != 3)
            throw ParseError(path + ": row " + std::to_string(row_no) +
                             ": expected 3 fields");
        truth.names.push_back(fields[0]);
        const double causal = parse_number(fields[1], path, row_no, 2);
        if (causal != 0.0 && causal != 1.0)
            throw ParseError(path + ": row " + std::to_string(row_no) +
                             ": causal flag must be 0 or 1");
        if (causal == 1.0)
            truth.causal_indices.push_back(static_cast<int>(truth.names.size()) - 1);
        coefs.push_back(parse_number(fields[2], path, row_no, 3));
    }
    truth.coefficients =
        Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    return truth;
}

void write_truth(const std::string& path, const std::vector<std::string>& names,
                 const std::vector<int>& causal_indices,
                 const Eigen::Ref<const Eigen::VectorXd>& coefficients) {
    if (static_cast<Eigen::Index>(names.size()) != coefficients.size())
        throw DimensionError(path + ": names and coefficients lengths differ");
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    std::vector<char> causal(names.size(), 0);
    for (int j : causal_indices) causal.at(static_cast<std::size_t>(j)) = 1;
    out << "variable\tcausal\tcoefficient\n";
    for (std::size_t j = 0; j < names.size(); ++j)
        out << names[j] << '\t' << int(causal[j]) << '\t'
            << format_double(coefficients[static_cast<Eigen::Index>(j)]) << '\n';
}

json fit_to_json(const SusieFit& fit, const std::vector<std::string>& variables,
                 const FitSettings& settings) {
    json doc;
    doc["variables"] = variables;
    doc["settings"] = {{"L", settings.L},
                       {"rho", settings.rho},
                       {"purity_threshold", settings.purity_threshold},
                       {"tol", settings.tol},
                       {"max_iter", settings.max_iter},
                       {"sigma0_init", vector_to_json(settings.sigma0_init)}};

    json effects = json::array();
    for (std::size_t l = 0; l < fit.effects.size(); ++l) {
        const auto& e = fit.effects[l];
        effects.push_back({{"alpha", vector_to_json(e.alpha)},
                           {"mu1", vector_to_json(e.mu1)},
                           {"sigma1_sq", vector_to_json(e.sigma1_sq)},
                           {"log_bf", vector_to_json(e.log_bf)},
                           {"prior_variance", e.prior_variance},
                           {"log_bf_ser", e.log_bf_ser},
                           {"posterior_mean", vector_to_json(fit.posterior_means[l])},
                           {"active", static_cast<bool>(fit.effect_active[l])}});
    }
    doc["effects"] = effects;
    doc["pips"] = vector_to_json(fit.pips);

    json sets = json::array();
    for (const auto& cs : fit.credible_sets) {
        sets.push_back({{"effect", cs.effect_index},
                        {"members", cs.members},
                        {"sentinel", cs.sentinel},
                        {"coverage_mass", cs.coverage_mass},
                        {"purity", cs.purity},
                        {"mean_abs_corr", cs.mean_abs_corr}});
    }
    doc["credible_sets"] = sets;
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["max_delta_history"] = fit.max_delta_history;
    doc["offsets"] = vector_to_json(fit.offsets);
    return doc;
}

FitDocument fit_from_json(const json& doc) {
    FitDocument out;
    out.variables = doc.at("variables").get<std::vector<std::string>>();
    const auto& s = doc.at("settings");
    out.settings.L = s.at("L");
    out.settings.rho = s.at("rho");
    out.settings.purity_threshold = s.at("purity_threshold");
    out.settings.tol = s.at("tol");
    out.settings.max_iter = s.at("max_iter");
    out.settings.sigma0_init = vector_from_json(s.at("sigma0_init"));

    for (const auto& e : doc.at("effects")) {
        SingleEffectPosterior ser;
        ser.alpha = vector_from_json(e.at("alpha"));
        ser.mu1 = vector_from_json(e.at("mu1"));
        ser.sigma1_sq = vector_from_json(e.at("sigma1_sq"));
        ser.log_bf = vector_from_json(e.at("log_bf"));
        ser.prior_variance = e.at("prior_variance");
        ser.log_bf_ser = e.at("log_bf_ser");
        out.fit.effects.push_back(std::move(ser));
        out.fit.posterior_means.push_back(vector_from_json(e.at("posterior_mean")));
        out.fit.effect_active.push_back(e.at("active").get<bool>() ? 1 : 0);
    }
    out.fit.pips = vector_from_json(doc.at("pips"));
    for (const auto& c : doc.at("credible_sets")) {
        CredibleSet cs;
        cs.effect_index = c.at("effect");
        cs.members = c.at("members").get<std::vector<int>>();
        cs.sentinel = c.at("sentinel");
        cs.coverage_mass = c.at("coverage_mass");
        cs.purity = c.at("purity");
        cs.mean_abs_corr = c.at("mean_abs_corr");
        out.fit.credible_sets.push_back(std::move(cs));
    }
    out.fit.iterations = doc.at("iterations");
    out.fit.converged = doc.at("converged");
    out.fit.max_delta_history = doc.at("max_delta_history").get<std::vector<double>>();
    out.fit.offsets = vector_from_json(doc.at("offsets"));
    return out;
}

void write_fit_json(const std::string& path, const SusieFit& fit,
                    const std::vector<std::string>& variables,
                    const FitSettings& settings) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << fit_to_json(fit, variables, settings).dump(2) << '\n';
}

FitDocument read_fit_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    try {
        return fit_from_json(doc);
    } catch (const json::exception& e) {
        throw ParseError(path + ": unexpected fit document layout: " + e.what());
    }
}

} // namespace coxsusie
