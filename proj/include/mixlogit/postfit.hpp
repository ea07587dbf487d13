#pragma once

// Fit metrics, likelihood-ratio tests and value-of-time distributions.

#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/mslestim.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mixlogit {

// ---------------------------------------------------------------------------
// Fit metrics and tests
// ---------------------------------------------------------------------------

struct FitMetrics {
    double loglik = 0.0;
    double null_loglik = 0.0;
    double rho2 = 0.0;
    double bic = 0.0;
    std::size_t parameters = 0;
    std::size_t observations = 0; ///< total choice tasks NT
};

inline double bic(double loglik, std::size_t parameters, std::size_t observations)
{
    return std::log(static_cast<double>(observations)) * static_cast<double>(parameters) - 2.0 * loglik;
}

inline FitMetrics fit_metrics(double loglik, double null_loglik, std::size_t parameters, std::size_t observations)
{
    FitMetrics m;
    m.loglik = loglik;
    m.null_loglik = null_loglik;
    m.rho2 = 1.0 - loglik / null_loglik;
    m.bic = bic(loglik, parameters, observations);
    m.parameters = parameters;
    m.observations = observations;
    return m;
}

inline FitMetrics fit_metrics(const EstimationResult& r)
{
    return fit_metrics(r.loglik, r.null_loglik, r.theta.size(), r.observations);
}

/// Parameter count that would make ln(NT) P - 2 LL equal a given BIC value.
inline double implied_parameter_count(double bic_value, double loglik, std::size_t observations)
{
    return (bic_value + 2.0 * loglik) / std::log(static_cast<double>(observations));
}

struct LrTest {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

inline LrTest lr_test(double restricted_loglik, double unrestricted_loglik, int df)
{
    if (df < 1) throw Error(ErrorCode::InvalidValue, "likelihood-ratio test needs df >= 1");
    const double stat = 2.0 * (unrestricted_loglik - restricted_loglik);
    if (stat < 0.0)
        throw Error(ErrorCode::NegativeStatistic, "unrestricted log-likelihood is below the restricted one");
    LrTest t;
    t.statistic = stat;
    t.df = df;
    t.p_value = stat == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
    return t;
}

/// Two-sided normal p-value of an estimate over its standard error.
inline double wald_p_value(double estimate, double std_error)
{
    if (!(std_error > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::erfc(std::fabs(estimate / std_error) / std::sqrt(2.0));
}

/// "***" for p <= 0.01, "**" for (0.01, 0.05], "*" for (0.05, 0.1].
inline std::string significance_stars(double p)
{
    if (!(p == p)) return "";
    if (p <= 0.01) return "***";
    if (p <= 0.05) return "**";
    if (p <= 0.1) return "*";
    return "";
}

// ---------------------------------------------------------------------------
// Travel-time coefficient distributions
// ---------------------------------------------------------------------------

/// Location of the normal travel-time coefficient of one mode in theta.
struct TimeCoefficient {
    std::size_t mean = 0;
    enum class Spread { None, Diagonal, Cholesky } spread = Spread::None;
    std::size_t scale = 0;            ///< Diagonal: index of the sd parameter
    std::vector<std::size_t> l_row;   ///< Cholesky: indices of the coefficient's row of L

    [[nodiscard]] double mu(std::span<const double> theta) const { return theta[mean]; }

    [[nodiscard]] double sigma(std::span<const double> theta) const
    {
        switch (spread) {
        case Spread::None: return 0.0;
        case Spread::Diagonal: return std::fabs(theta[scale]);
        case Spread::Cholesky: {
            double s = 0.0;
            for (auto i : l_row) s += theta[i] * theta[i];
            return std::sqrt(s);
        }
        }
        return 0.0;
    }
};

inline std::string_view mode_label(int mode)
{
    switch (mode) {
    case 1: return "Conventional car";
    case 2: return "Self-driving car";
    case 3: return "Public transit";
    }
    return "?";
}

inline constexpr std::string_view kTimeAttribute = "m_time";
inline constexpr std::string_view kTravelCostAttribute = "m_cost";
inline constexpr std::string_view kHousingCostAttribute = "h_cost";

inline TimeCoefficient time_coefficient(const ModelSpec& spec, int mode, std::string_view attribute = kTimeAttribute)
{
    const ParameterLayout layout(spec);
    for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
        const auto& d = spec.coefficients[c];
        if (d.binding.attribute != attribute || !d.binding.applies_to(mode) || !d.binding.interactions.empty()) continue;
        if (d.transform != Transform::Identity)
            throw Error(ErrorCode::MissingCoefficient, "travel-time coefficient '" + d.name + "' is not normal");
        TimeCoefficient t;
        t.mean = layout.value_index(c);
        if (!d.is_random()) return t;
        if (!d.block) {
            t.spread = TimeCoefficient::Spread::Diagonal;
            t.scale = layout.scale_index(c);
            return t;
        }
        t.spread = TimeCoefficient::Spread::Cholesky;
        const auto& members = spec.blocks[*d.block].members;
        const auto row = static_cast<std::size_t>(std::find(members.begin(), members.end(), c) - members.begin());
        for (std::size_t j = 0; j <= row; ++j) t.l_row.push_back(layout.cholesky_index(*d.block, row, j));
        return t;
    }
    throw Error(ErrorCode::MissingCoefficient,
                "spec has no travel-time coefficient on '" + std::string(attribute) + "' for mode " + std::to_string(mode));
}

/// Declaration index of a fixed negative-exponential cost coefficient.
inline std::size_t cost_coefficient(const ModelSpec& spec, std::string_view attribute, int mode,
                                    std::optional<std::string_view> interaction = std::nullopt)
{
    for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
        const auto& d = spec.coefficients[c];
        if (d.binding.attribute != attribute || d.is_random() || d.transform != Transform::NegativeExponential) continue;
        if (mode > 0 && !d.binding.applies_to(mode)) continue;
        if (interaction) {
            if (d.binding.interactions.size() != 1 || d.binding.interactions[0] != *interaction) continue;
        } else if (!d.binding.interactions.empty()) {
            continue;
        }
        return c;
    }
    throw Error(ErrorCode::MissingCoefficient, "spec has no fixed negative-exponential coefficient on '" +
                                                   std::string(attribute) + "'" +
                                                   (interaction ? " for " + std::string(*interaction) : std::string()));
}

// ---------------------------------------------------------------------------
// Value of time
// ---------------------------------------------------------------------------

enum class Numeraire { TravelCost, HousingCost };
enum class Tenure { Owner, Renter };

inline std::string_view to_string(Tenure t) { return t == Tenure::Owner ? "owner" : "renter"; }

/// Mean and sd of a normal VOT distribution as functions of theta.
struct VotFunctions {
    DerivedQuantity mean;
    DerivedQuantity sd;
};

/// VOT in currency per hour of travel time, numeraire = travel cost.
/// mean = mu_t / (-exp(gamma)), sd = sigma_t / exp(gamma).
inline VotFunctions vot_travel_cost_functions(const ModelSpec& spec, int mode)
{
    const auto t = time_coefficient(spec, mode);
    const auto g = ParameterLayout(spec).value_index(cost_coefficient(spec, kTravelCostAttribute, mode));
    return {[t, g](std::span<const double> x) { return t.mu(x) / -std::exp(x[g]); },
            [t, g](std::span<const double> x) { return t.sigma(x) / std::exp(x[g]); }};
}

/// Amount of housing cost per unit reported for housing-cost VOT (10 AUD/week).
inline constexpr double kHousingVotUnit = 10.0;

/// VOT in 10 currency/week per hour, numeraire = housing cost of the given
/// tenure at the given weekly income. The cost attribute is cost * scale /
/// income, so one currency unit per week is worth exp(gamma) * scale / income.
inline VotFunctions vot_housing_cost_functions(const ModelSpec& spec, int mode, Tenure tenure, double income)
{
    if (!(income > 0.0)) throw Error(ErrorCode::NonPositiveIncome, "income must be positive");
    const auto t = time_coefficient(spec, mode);
    const std::string_view cov = tenure == Tenure::Owner ? "owner" : "renter";
    const auto c = cost_coefficient(spec, kHousingCostAttribute, 0, cov);
    const auto& binding = spec.coefficients[c].binding;
    if (!binding.divide_by_income)
        throw Error(ErrorCode::MissingCoefficient, "housing-cost coefficient is not divided by income");
    const auto g = ParameterLayout(spec).value_index(c);
    const double per_unit = std::fabs(binding.scale) / income * kHousingVotUnit;
    return {[t, g, per_unit](std::span<const double> x) { return t.mu(x) / -(std::exp(x[g]) * per_unit); },
            [t, g, per_unit](std::span<const double> x) { return t.sigma(x) / (std::exp(x[g]) * per_unit); }};
}

struct VotSummary {
    int mode = 1;
    Numeraire numeraire = Numeraire::TravelCost;
    std::optional<Tenure> tenure;
    double income = 0.0;
    KrInterval mean;
    KrInterval sd;
    double negative_share = 0.0; ///< mass of the VOT distribution below zero
};

namespace detail {

inline double negative_mass(double mean, double sd)
{
    if (!(sd > 0.0)) return mean < 0.0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::normal(mean, sd), 0.0);
}

inline VotSummary summarize_vot(const VotFunctions& f, std::span<const double> theta, const KrSample* sample)
{
    VotSummary s;
    if (sample) {
        s.mean = summarize_derived(*sample, theta, f.mean);
        s.sd = summarize_derived(*sample, theta, f.sd);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.mean = {f.mean(theta), nan, nan, nan};
        s.sd = {f.sd(theta), nan, nan, nan};
    }
    s.negative_share = negative_mass(s.mean.point, s.sd.point);
    return s;
}

} // namespace detail

/// Point values only when `sample` is null.
inline VotSummary vot_travel_cost(const ModelSpec& spec, std::span<const double> theta, int mode,
                                  const KrSample* sample = nullptr)
{
    auto s = detail::summarize_vot(vot_travel_cost_functions(spec, mode), theta, sample);
    s.mode = mode;
    return s;
}

inline VotSummary vot_housing_cost(const ModelSpec& spec, std::span<const double> theta, int mode, Tenure tenure,
                                   double income, const KrSample* sample = nullptr)
{
    auto s = detail::summarize_vot(vot_housing_cost_functions(spec, mode, tenure, income), theta, sample);
    s.mode = mode;
    s.numeraire = Numeraire::HousingCost;
    s.tenure = tenure;
    s.income = income;
    return s;
}

inline constexpr double kDefaultOwnerIncome = 2244.7;
inline constexpr double kDefaultRenterIncome = 1558.7;

struct VotOptions {
    double owner_income = kDefaultOwnerIncome;
    double renter_income = kDefaultRenterIncome;
    std::size_t kr_draws = kDefaultKrDraws;
    std::uint64_t seed = 1;
};

/// Travel-cost rows for the three modes, then owner and renter housing-cost
/// rows. Intervals come from one shared Krinsky-Robb sample when the result
/// carries a covariance.
inline std::vector<VotSummary> vot_table(const ModelSpec& spec, const EstimationResult& result,
                                         const VotOptions& opt = {})
{
    std::optional<KrSample> sample;
    if (result.covariance) sample = krinsky_robb_sample(result.theta, *result.covariance, opt.kr_draws, opt.seed);
    const KrSample* sp = sample ? &*sample : nullptr;
    std::vector<VotSummary> rows;
    for (int l = 1; l <= kModes; ++l) rows.push_back(vot_travel_cost(spec, result.theta, l, sp));
    for (auto [tenure, income] : {std::pair{Tenure::Owner, opt.owner_income}, std::pair{Tenure::Renter, opt.renter_income}})
        for (int l = 1; l <= kModes; ++l) rows.push_back(vot_housing_cost(spec, result.theta, l, tenure, income, sp));
    return rows;
}

// ---------------------------------------------------------------------------
// Derived standard deviations of correlated coefficients
// ---------------------------------------------------------------------------

struct DerivedSd {
    std::string name; ///< "<coefficient>.sd"
    KrInterval value; ///< point = row norm of L; sd = Krinsky-Robb standard error
};

inline std::vector<DerivedSd> block_standard_deviations(const ModelSpec& spec, const EstimationResult& result,
                                                        std::size_t draws = kDefaultKrDraws, std::uint64_t seed = 1)
{
    std::vector<DerivedSd> out;
    std::optional<KrSample> sample;
    if (result.covariance) sample = krinsky_robb_sample(result.theta, *result.covariance, draws, seed);
    const ParameterLayout layout(spec);
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const auto& members = spec.blocks[b].members;
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::vector<std::size_t> row;
            for (std::size_t j = 0; j <= i; ++j) row.push_back(layout.cholesky_index(b, i, j));
            DerivedQuantity g = [row](std::span<const double> x) {
                double s = 0.0;
                for (auto k : row) s += x[k] * x[k];
                return std::sqrt(s);
            };
            DerivedSd d;
            d.name = spec.coefficients[members[i]].name + ".sd";
            if (sample) {
                d.value = summarize_derived(*sample, result.theta, g);
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                d.value = {g(result.theta), nan, nan, nan};
            }
            out.push_back(std::move(d));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string name;
    FitMetrics fit;
    std::optional<LrTest> lr; ///< against the richest model
    std::optional<double> printed_bic;
    std::optional<double> implied_parameters; ///< from printed_bic
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::size_t richest = 0;
    bool bic_discrepancy = false;
};

struct ComparisonInput {
    std::string name;
    double loglik;
    std::size_t parameters;
    std::optional<double> printed_bic; ///< a published BIC to check against the formula
};

/// LR tests are taken against the model with the most parameters.
inline ComparisonReport compare_models(const std::vector<ComparisonInput>& models, double null_loglik,
                                       std::size_t observations)
{
    if (models.size() < 2) throw Error(ErrorCode::InvalidValue, "model comparison needs at least two models");
    ComparisonReport rep;
    for (std::size_t i = 1; i < models.size(); ++i)
        if (models[i].parameters > models[rep.richest].parameters) rep.richest = i;
    const auto& top = models[rep.richest];
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        ComparisonRow row;
        row.name = m.name;
        row.fit = fit_metrics(m.loglik, null_loglik, m.parameters, observations);
        if (i != rep.richest && m.parameters < top.parameters)
            row.lr = lr_test(m.loglik, top.loglik, static_cast<int>(top.parameters - m.parameters));
        if (m.printed_bic) {
            row.printed_bic = m.printed_bic;
            row.implied_parameters = implied_parameter_count(*m.printed_bic, m.loglik, observations);
            if (std::fabs(*m.printed_bic - row.fit.bic) > 0.01) rep.bic_discrepancy = true;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline ComparisonReport compare_models(const std::vector<EstimationResult>& results)
{
    if (results.size() < 2) throw Error(ErrorCode::InvalidValue, "model comparison needs at least two models");
    std::vector<ComparisonInput> in;
    for (const auto& r : results) in.push_back({r.spec_name, r.loglik, r.theta.size(), std::nullopt});
    return compare_models(in, results.front().null_loglik, results.front().observations);
}

} // namespace mixlogit
