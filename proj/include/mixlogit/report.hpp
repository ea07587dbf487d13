#pragma once

// JSON and Markdown rendering of estimation results, model comparisons and
// VOT tables; content hashing for run manifests.

#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/mslestim.hpp"
#include "mixlogit/postfit.hpp"
#include "mixlogit/qmc.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mixlogit {

inline constexpr std::string_view kToolkitVersion = "1.0.0";

/// FNV-1a, 64 bit, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << content;
}

inline std::string file_hash(const std::string& path) { return fnv1a_hex(read_file(path)); }

/// printf-style fixed-point formatting.
inline std::string fixed(double v, int decimals)
{
    if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Estimation result JSON
// ---------------------------------------------------------------------------

/// Metadata that travels with a result file but is not produced by estimate().
struct ResultContext {
    std::string spec_text;
    std::string data_hash;
};

inline nlohmann::json to_json(const EstimationResult& r, const ResultContext& ctx = {})
{
    using nlohmann::json;
    const auto se = r.standard_errors();
    json params = json::array();
    for (std::size_t i = 0; i < r.theta.size(); ++i) {
        const double p = wald_p_value(r.theta[i], se[i]);
        params.push_back({{"name", r.names[i]},
                          {"estimate", r.theta[i]},
                          {"std_error", std::isfinite(se[i]) ? json(se[i]) : json(nullptr)},
                          {"p_value", std::isfinite(p) ? json(p) : json(nullptr)}});
    }
    json cov = nullptr;
    if (r.covariance) {
        cov = json::array();
        for (Eigen::Index i = 0; i < r.covariance->rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(r.covariance->cols()));
            for (Eigen::Index j = 0; j < r.covariance->cols(); ++j) row[static_cast<std::size_t>(j)] = (*r.covariance)(i, j);
            cov.push_back(row);
        }
    }
    const auto fit = fit_metrics(r);
    return {
        {"spec", r.spec_name},
        {"spec_text", ctx.spec_text},
        {"data_hash", ctx.data_hash},
        {"parameters", params},
        {"log_likelihood", r.loglik},
        {"null_log_likelihood", r.null_loglik},
        {"rho_squared", fit.rho2},
        {"bic", fit.bic},
        {"respondents", r.respondents},
        {"observations", r.observations},
        {"convergence",
         {{"status", std::string(to_string(r.status))},
          {"criterion", r.criterion},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"gradient_inf_norm", r.grad_norm}}},
        {"draws", {{"count", r.draws}, {"seed", r.seed}, {"scheme", DrawTensor::kScramble}, {"underflow_count", r.underflow_count}}},
        {"covariance", cov},
        {"covariance_error", r.covariance_error},
    };
}

inline ConvergenceStatus parse_status(std::string_view s)
{
    for (auto st : {ConvergenceStatus::Converged, ConvergenceStatus::MaxIterations, ConvergenceStatus::LineSearchFailure,
                    ConvergenceStatus::NonFiniteObjective})
        if (to_string(st) == s) return st;
    throw Error(ErrorCode::InvalidValue, "unknown convergence status '" + std::string(s) + "'");
}

inline EstimationResult result_from_json(const nlohmann::json& j, ResultContext* ctx = nullptr)
{
    try {
        EstimationResult r;
        r.spec_name = j.at("spec").get<std::string>();
        for (const auto& p : j.at("parameters")) {
            r.names.push_back(p.at("name").get<std::string>());
            r.theta.push_back(p.at("estimate").get<double>());
        }
        r.loglik = j.at("log_likelihood").get<double>();
        r.null_loglik = j.at("null_log_likelihood").get<double>();
        r.respondents = j.at("respondents").get<std::size_t>();
        r.observations = j.at("observations").get<std::size_t>();
        const auto& c = j.at("convergence");
        r.status = parse_status(c.at("status").get<std::string>());
        r.criterion = c.at("criterion").get<std::string>();
        r.iterations = c.at("iterations").get<int>();
        r.evaluations = c.at("evaluations").get<int>();
        r.grad_norm = c.at("gradient_inf_norm").get<double>();
        const auto& d = j.at("draws");
        r.draws = d.at("count").get<std::size_t>();
        r.seed = d.at("seed").get<std::uint64_t>();
        r.underflow_count = d.at("underflow_count").get<std::size_t>();
        if (!j.at("covariance").is_null()) {
            const auto rows = j.at("covariance").get<std::vector<std::vector<double>>>();
            const auto P = static_cast<Eigen::Index>(r.theta.size());
            if (static_cast<Eigen::Index>(rows.size()) != P)
                throw Error(ErrorCode::DimensionMismatch, "covariance rows do not match parameter count");
            Eigen::MatrixXd cov(P, P);
            for (Eigen::Index i = 0; i < P; ++i) {
                if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != P)
                    throw Error(ErrorCode::DimensionMismatch, "covariance is not square");
                for (Eigen::Index k = 0; k < P; ++k) cov(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            r.covariance = cov;
        }
        r.covariance_error = j.value("covariance_error", "");
        if (ctx) {
            ctx->spec_text = j.value("spec_text", "");
            ctx->data_hash = j.value("data_hash", "");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidValue, std::string("malformed result JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Markdown
// ---------------------------------------------------------------------------

/// Cholesky columns with a negative diagonal flipped in sign. LL^T is
/// unchanged; entries are recognized by their "<block>.L[i,j]" names.
inline std::vector<double> cholesky_sign_normalized(const std::vector<std::string>& names, std::vector<double> theta)
{
    struct Entry {
        std::string block;
        int row, col;
    };
    std::vector<std::optional<Entry>> entries(names.size());
    for (std::size_t p = 0; p < names.size(); ++p) {
        const auto& n = names[p];
        const auto at = n.rfind(".L[");
        if (at == std::string::npos || n.back() != ']') continue;
        int i = 0, j = 0;
        if (std::sscanf(n.c_str() + at + 3, "%d,%d]", &i, &j) == 2) entries[p] = Entry{n.substr(0, at), i, j};
    }
    for (std::size_t d = 0; d < names.size(); ++d) {
        if (!entries[d] || entries[d]->row != entries[d]->col || !(theta[d] < 0)) continue;
        for (std::size_t p = 0; p < names.size(); ++p)
            if (entries[p] && entries[p]->block == entries[d]->block && entries[p]->col == entries[d]->col)
                theta[p] = -theta[p];
    }
    return theta;
}

/// Estimates with standard errors and stars (* p<=0.1, ** p<=0.05, *** p<=0.01).
/// Cholesky columns are shown with non-negative diagonals.
inline std::string estimates_markdown(const EstimationResult& raw, const std::vector<DerivedSd>& derived = {})
{
    std::ostringstream out;
    EstimationResult r = raw;
    r.theta = cholesky_sign_normalized(raw.names, raw.theta);
    const auto se = r.standard_errors();
    out << "## " << r.spec_name << "\n\n";
    out << "| Parameter | Est. | Std. err. |\n|---|---:|---:|\n";
    for (std::size_t i = 0; i < r.theta.size(); ++i)
        out << "| " << r.names[i] << " | " << fixed(r.theta[i], 4) << significance_stars(wald_p_value(r.theta[i], se[i]))
            << " | " << fixed(se[i], 4) << " |\n";
    for (const auto& d : derived)
        out << "| " << d.name << " | " << fixed(d.value.point, 4) << " | " << fixed(d.value.sd, 4) << "# |\n";
    const auto fit = fit_metrics(r);
    out << "\nLog-likelihood " << fixed(r.loglik, 2) << ", null " << fixed(r.null_loglik, 2) << ", rho^2 "
        << fixed(fit.rho2, 4) << ", BIC " << fixed(fit.bic, 2) << ", parameters " << r.theta.size() << ", tasks "
        << r.observations << ".\n";
    out << "Status: " << to_string(r.status) << " (" << r.criterion << ") after " << r.iterations << " iterations; "
        << r.draws << " draws per respondent, seed " << r.seed << ", underflow count " << r.underflow_count << ".\n";
    if (!r.covariance_error.empty()) out << "Covariance unavailable: " << r.covariance_error << "\n";
    out << "\n* p in (0.05, 0.1], ** p in (0.01, 0.05], *** p <= 0.01 (two-sided normal).";
    if (!derived.empty()) out << " # standard error by Krinsky-Robb simulation.";
    out << "\n";
    return out.str();
}

inline nlohmann::json to_json(const ComparisonReport& rep)
{
    using nlohmann::json;
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row = {{"model", r.name},
                    {"parameters", r.fit.parameters},
                    {"log_likelihood", r.fit.loglik},
                    {"rho_squared", r.fit.rho2},
                    {"bic", r.fit.bic}};
        if (r.lr) row["lr_test"] = {{"chi2", r.lr->statistic}, {"df", r.lr->df}, {"p_value", r.lr->p_value}};
        if (r.printed_bic) {
            row["printed_bic"] = *r.printed_bic;
            row["implied_parameters"] = *r.implied_parameters;
        }
        rows.push_back(row);
    }
    return {{"models", rows},
            {"reference_model", rep.rows[rep.richest].name},
            {"null_log_likelihood", rep.rows.front().fit.null_loglik},
            {"observations", rep.rows.front().fit.observations},
            {"bic_discrepancy", rep.bic_discrepancy}};
}

inline std::string comparison_markdown(const ComparisonReport& rep)
{
    std::ostringstream out;
    out << "| |";
    for (const auto& r : rep.rows) out << ' ' << r.name << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) out << "---:|";
    auto line = [&](std::string_view label, auto cell) {
        out << "\n| " << label << " |";
        for (const auto& r : rep.rows) out << ' ' << cell(r) << " |";
    };
    line("No. of parameters", [](const ComparisonRow& r) { return std::to_string(r.fit.parameters); });
    line("Log-likelihood", [](const ComparisonRow& r) { return fixed(r.fit.loglik, 2); });
    line("rho^2", [](const ComparisonRow& r) { return fixed(r.fit.rho2, 4); });
    line("BIC", [](const ComparisonRow& r) { return fixed(r.fit.bic, 2); });
    const bool printed = std::any_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.printed_bic.has_value(); });
    if (printed) {
        line("BIC (given)", [](const ComparisonRow& r) { return r.printed_bic ? fixed(*r.printed_bic, 2) : std::string(); });
        line("P implied by given BIC", [](const ComparisonRow& r) {
            return r.implied_parameters ? fixed(*r.implied_parameters, 2) : std::string();
        });
    }
    const std::string ref = rep.rows[rep.richest].name;
    line("LR chi^2 vs " + ref, [](const ComparisonRow& r) { return r.lr ? fixed(r.lr->statistic, 2) : std::string(); });
    line("LR df", [](const ComparisonRow& r) { return r.lr ? std::to_string(r.lr->df) : std::string(); });
    line("LR p", [](const ComparisonRow& r) {
        if (!r.lr) return std::string();
        return r.lr->p_value < 0.001 ? std::string("< 0.001") : fixed(r.lr->p_value, 3);
    });
    out << "\n\nNull log-likelihood " << fixed(rep.rows.front().fit.null_loglik, 2) << "; BIC = ln(NT) P - 2 LL with NT = "
        << rep.rows.front().fit.observations << ".\n";
    if (rep.bic_discrepancy)
        out << "\nWARNING: given BIC values differ from ln(NT) P - 2 LL at the stated parameter counts; "
               "the implied parameter counts are listed above.\n";
    return out.str();
}

inline nlohmann::json to_json(const VotSummary& s)
{
    auto interval = [](const KrInterval& k) {
        auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
        return nlohmann::json{{"estimate", k.point}, {"lower", num(k.lower)}, {"upper", num(k.upper)}};
    };
    nlohmann::json j = {{"mode", s.mode},
                        {"mode_label", std::string(mode_label(s.mode))},
                        {"numeraire", s.numeraire == Numeraire::TravelCost ? "travel_cost" : "housing_cost"},
                        {"unit", s.numeraire == Numeraire::TravelCost ? "AUD/h" : "10 AUD/week/h"},
                        {"mean", interval(s.mean)},
                        {"sd", interval(s.sd)},
                        {"negative_share", s.negative_share}};
    if (s.tenure) {
        j["tenure"] = std::string(to_string(*s.tenure));
        j["income"] = s.income;
    }
    return j;
}

inline std::string vot_markdown(const std::vector<VotSummary>& rows, std::string_view title)
{
    std::ostringstream out;
    auto ci = [](const KrInterval& k) {
        if (!std::isfinite(k.lower)) return std::string();
        return "[" + fixed(k.lower, 2) + ", " + fixed(k.upper, 2) + "]";
    };
    out << "## Value of travel time: " << title << "\n\n";
    out << "| | Mean | 95%-CI | Std. dev. | 95%-CI | Share < 0 |\n|---|---:|---|---:|---|---:|\n";
    std::string section;
    for (const auto& r : rows) {
        std::string s = r.numeraire == Numeraire::TravelCost
                            ? "In terms of travel cost [AUD/h]"
                            : "In terms of housing cost [10 AUD/week/h], " + std::string(to_string(*r.tenure)) +
                                  " (household income = " + fixed(r.income, 1) + " AUD/week)";
        if (s != section) {
            out << "| **" << s << "** | | | | | |\n";
            section = s;
        }
        out << "| " << mode_label(r.mode) << " | " << fixed(r.mean.point, 2) << " | " << ci(r.mean) << " | "
            << fixed(r.sd.point, 2) << " | " << ci(r.sd) << " | " << fixed(r.negative_share, 3) << " |\n";
    }
    out << "\n95%-CI: Krinsky-Robb percentile intervals.\n";
    return out.str();
}

} // namespace mixlogit
