#pragma once

// Maximum simulated likelihood estimation: BFGS with backtracking Armijo line
// search, finite-difference Hessian, asymptotic covariance and Krinsky-Robb
// simulation of derived quantities.

#include "mixlogit/dataset.hpp"
#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/qmc.hpp"
#include "mixlogit/simlik.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mixlogit {

enum class ConvergenceStatus { Converged, MaxIterations, LineSearchFailure, NonFiniteObjective };

inline std::string_view to_string(ConvergenceStatus s)
{
    switch (s) {
    case ConvergenceStatus::Converged: return "converged";
    case ConvergenceStatus::MaxIterations: return "max_iterations";
    case ConvergenceStatus::LineSearchFailure: return "line_search_failure";
    case ConvergenceStatus::NonFiniteObjective: return "non_finite_objective";
    }
    return "?";
}

struct EstimationOptions {
    int max_iterations = 500;
    double tol_gradient = 1e-6;      ///< infinity norm of the LL gradient
    double tol_relative_ll = 1e-10;  ///< |Delta LL| / max(1, |LL|)
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    double initial_scale = 0.1;      ///< start for scales, taus and Cholesky diagonals
    std::optional<std::vector<double>> start;
    bool compute_covariance = true;
    int threads = 0;
    std::function<void(int iteration, double loglik, double grad_norm)> on_iteration;
};

struct EstimationResult {
    std::string spec_name;
    std::vector<std::string> names;
    std::vector<double> theta;
    double loglik = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    ConvergenceStatus status = ConvergenceStatus::Converged;
    std::string criterion; ///< "gradient", "relative_ll" or the failure reason
    std::optional<Eigen::MatrixXd> covariance;
    std::string covariance_error;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    std::size_t underflow_count = 0;
    std::size_t respondents = 0;
    std::size_t observations = 0;
    double null_loglik = 0.0;

    [[nodiscard]] std::optional<std::size_t> index(std::string_view name) const
    {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::vector<double> standard_errors() const
    {
        std::vector<double> se(theta.size(), std::numeric_limits<double>::quiet_NaN());
        if (covariance)
            for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(std::max(0.0, (*covariance)(i, i)));
        return se;
    }
};

// ---------------------------------------------------------------------------
// Starting values
// ---------------------------------------------------------------------------

/// Maps a prior estimate onto `spec` by parameter name. Missing means and
/// fixed values start at 0, missing scales and taus at `scale`, Cholesky
/// diagonals at the member's prior ".sd" when present, off-diagonals at 0.
inline std::vector<double> embed_start(const ModelSpec& spec, const std::vector<std::string>& prior_names,
                                       std::span<const double> prior, double scale)
{
    const ParameterLayout layout(spec);
    auto lookup = [&](const std::string& n) -> std::optional<double> {
        for (std::size_t i = 0; i < prior_names.size(); ++i)
            if (prior_names[i] == n) return prior[i];
        return std::nullopt;
    };
    std::vector<double> x(layout.size(), 0.0);
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const auto& info = layout[p];
        if (auto v = lookup(info.name)) {
            x[p] = *v;
            continue;
        }
        switch (info.role) {
        case ParamRole::DiagonalScale:
        case ParamRole::ErrorScale: x[p] = scale; break;
        case ParamRole::Cholesky:
            if (info.row == info.col) {
                const auto member = spec.blocks[info.owner].members[info.row];
                x[p] = lookup(spec.coefficients[member].name + ".sd").value_or(scale);
            }
            break;
        default: break;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct ObjectiveValue {
    double value = 0.0;
    std::vector<double> gradient;
};

struct MaximizeResult {
    std::vector<double> x;
    ObjectiveValue at;
    int iterations = 0;
    int evaluations = 0;
    ConvergenceStatus status = ConvergenceStatus::Converged;
    std::string criterion;
};

/// BFGS maximization of a smooth objective with analytic gradient.
inline MaximizeResult maximize_bfgs(const std::function<ObjectiveValue(std::span<const double>)>& objective,
                                    std::vector<double> x0, const EstimationOptions& opt)
{
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const auto n = static_cast<Eigen::Index>(x0.size());
    MaximizeResult out;
    out.x = std::move(x0);

    auto finite = [](const ObjectiveValue& v) {
        if (!std::isfinite(v.value)) return false;
        return std::all_of(v.gradient.begin(), v.gradient.end(), [](double g) { return std::isfinite(g); });
    };

    out.at = objective(out.x);
    ++out.evaluations;
    if (!finite(out.at)) {
        out.status = ConvergenceStatus::NonFiniteObjective;
        out.criterion = "non_finite_objective";
        return out;
    }

    // Work on f = -objective; H approximates the inverse Hessian of f.
    auto to_vec = [&](const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), n); };
    VectorXd g = -to_vec(out.at.gradient);
    MatrixXd H = MatrixXd::Identity(n, n) / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    bool fresh = true;

    for (int iter = 0;; ++iter) {
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        if (opt.on_iteration) opt.on_iteration(iter, out.at.value, gnorm);
        out.iterations = iter;
        if (gnorm <= opt.tol_gradient) {
            out.status = ConvergenceStatus::Converged;
            out.criterion = "gradient";
            return out;
        }
        if (iter >= opt.max_iterations) {
            out.status = ConvergenceStatus::MaxIterations;
            out.criterion = "max_iterations";
            return out;
        }

        VectorXd d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0)) {
            H = MatrixXd::Identity(n, n) / std::max(1.0, gnorm);
            fresh = true;
            d = -H * g;
            slope = g.dot(d);
        }

        const double f0 = -out.at.value;
        double t = 1.0;
        std::optional<ObjectiveValue> accepted;
        std::vector<double> x_new(out.x.size());
        for (int k = 0; k <= opt.max_backtracks; ++k, t *= opt.backtrack) {
            for (Eigen::Index i = 0; i < n; ++i) x_new[i] = out.x[i] + t * d[i];
            auto trial = objective(x_new);
            ++out.evaluations;
            if (finite(trial) && -trial.value <= f0 + opt.armijo_c * t * slope) {
                accepted = std::move(trial);
                break;
            }
        }
        if (!accepted) {
            if (!fresh) {
                H = MatrixXd::Identity(n, n) / std::max(1.0, gnorm);
                fresh = true;
                continue;
            }
            out.status = ConvergenceStatus::LineSearchFailure;
            out.criterion = "line_search_failure";
            return out;
        }

        const VectorXd s = t * d;
        const VectorXd g_new = -to_vec(accepted->gradient);
        const VectorXd y = g_new - g;
        const double improvement = accepted->value - out.at.value;
        const double ll_scale = std::max(1.0, std::fabs(out.at.value));

        out.x = x_new;
        out.at = std::move(*accepted);
        g = g_new;

        const double ys = y.dot(s);
        if (ys > 1e-12 * s.norm() * y.norm()) {
            if (fresh) H = MatrixXd::Identity(n, n) * (ys / y.squaredNorm());
            const double rho = 1.0 / ys;
            const VectorXd Hy = H * y;
            H += ((ys + y.dot(Hy)) * rho * rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
            fresh = false;
        }

        // A small realized gain only counts when the curvature model agrees
        // that little is left; a poorly scaled step can stall far from the top.
        const double predicted = fresh ? 0.0 : 0.5 * g.dot(H * g);
        if (improvement <= opt.tol_relative_ll * ll_scale && predicted <= opt.tol_relative_ll * ll_scale) {
            out.iterations = iter + 1;
            if (g.lpNorm<Eigen::Infinity>() <= opt.tol_gradient) {
                out.criterion = "gradient";
            } else {
                out.criterion = "relative_ll";
            }
            out.status = ConvergenceStatus::Converged;
            if (opt.on_iteration) opt.on_iteration(iter + 1, out.at.value, g.lpNorm<Eigen::Infinity>());
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// Hessian and covariance
// ---------------------------------------------------------------------------

struct HessianResult {
    Eigen::MatrixXd hessian;      ///< symmetrized
    double symmetry_defect = 0.0; ///< max |H_ij - H_ji| before symmetrization
};

inline double hessian_step(double x) { return 1e-4 * std::max(1.0, std::fabs(x)); }

/// Central differences of an analytic gradient, symmetrized.
inline HessianResult numerical_hessian(const std::function<std::vector<double>(std::span<const double>)>& gradient,
                                       std::span<const double> x)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd H(n, n);
    std::vector<double> xp(x.begin(), x.end());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = hessian_step(x[i]);
        xp[i] = x[i] + h;
        const auto gp = gradient(xp);
        xp[i] = x[i] - h;
        const auto gm = gradient(xp);
        xp[i] = x[i];
        for (Eigen::Index j = 0; j < n; ++j) H(j, i) = (gp[j] - gm[j]) / (2.0 * h);
    }
    HessianResult out;
    out.symmetry_defect = (H - H.transpose()).cwiseAbs().maxCoeff();
    out.hessian = 0.5 * (H + H.transpose());
    if (!out.hessian.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "Hessian has non-finite entries");
    return out;
}

/// Second differences of objective values only (4 evaluations per off-diagonal pair).
inline Eigen::MatrixXd numerical_hessian_from_values(const std::function<double(std::span<const double>)>& f,
                                                     std::span<const double> x)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd H(n, n);
    std::vector<double> xp(x.begin(), x.end());
    const double f0 = f(xp);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = hessian_step(x[i]);
        xp[i] = x[i] + hi;
        const double fp = f(xp);
        xp[i] = x[i] - hi;
        const double fm = f(xp);
        xp[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = hessian_step(x[j]);
            auto at = [&](double si, double sj) {
                xp[i] = x[i] + si * hi;
                xp[j] = x[j] + sj * hj;
                const double v = f(xp);
                xp[i] = x[i];
                xp[j] = x[j];
                return v;
            };
            H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
        }
    }
    if (!H.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "Hessian has non-finite entries");
    return H;
}

/// Inverse of the negative Hessian.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& hessian)
{
    const Eigen::MatrixXd info = -hessian;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotNegativeDefinite,
                    "Hessian is not negative definite (parameter at a boundary or not identified)");
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    return 0.5 * (cov + cov.transpose());
}

// ---------------------------------------------------------------------------
// Estimation driver
// ---------------------------------------------------------------------------

inline EstimationResult estimate(const ModelSpec& spec, const ChoiceDataset& data, const DrawTensor& draws,
                                 const EstimationOptions& options = {})
{
    SimulatedLikelihood lik(spec, data, draws, options.threads);
    const ParameterLayout& layout = lik.layout();

    std::vector<double> start;
    if (options.start) {
        start = *options.start;
        if (start.size() != layout.size())
            throw Error(ErrorCode::DimensionMismatch, "start vector has " + std::to_string(start.size()) +
                                                          " entries, spec needs " + std::to_string(layout.size()));
    } else if (spec.model == ModelClass::CMNL) {
        start.assign(layout.size(), 0.0);
    } else {
        // Warm start: fixed-coefficient restriction fitted from zeros.
        const auto base = restrict_spec(spec, ModelClass::CMNL);
        EstimationOptions o = options;
        o.start.reset();
        o.compute_covariance = false;
        o.on_iteration = nullptr;
        const DrawTensor none;
        const auto fit = estimate(base, data, none, o);
        start = embed_start(spec, fit.names, fit.theta, options.initial_scale);
    }

    auto objective = [&](std::span<const double> x) {
        auto rep = lik.evaluate(x, true);
        return ObjectiveValue{rep.total, std::move(*rep.gradient)};
    };
    auto opt = maximize_bfgs(objective, start, options);

    EstimationResult res;
    res.spec_name = spec.name;
    res.names = layout.names();
    res.theta = opt.x;
    res.loglik = opt.at.value;
    res.grad_norm = 0.0;
    for (double g : opt.at.gradient) res.grad_norm = std::max(res.grad_norm, std::fabs(g));
    res.iterations = opt.iterations;
    res.evaluations = opt.evaluations;
    res.status = opt.status;
    res.criterion = opt.criterion;
    res.draws = lik.num_draws();
    res.seed = draws.seed;
    res.respondents = data.num_respondents();
    res.observations = data.num_tasks();
    res.null_loglik = null_loglik(data);
    res.underflow_count = lik.evaluate(res.theta, false).underflow_count;

    if (options.compute_covariance && std::isfinite(res.loglik)) {
        try {
            auto grad = [&](std::span<const double> x) { return *lik.evaluate(x, true).gradient; };
            Eigen::MatrixXd hess = numerical_hessian(grad, res.theta).hessian;
            const auto n = static_cast<Eigen::Index>(res.theta.size());
            // BFGS can stop on a flat stretch with a visible gradient left.
            // Newton steps on the finite-difference Hessian finish the job.
            for (int k = 0; k < 3 && res.status == ConvergenceStatus::Converged && res.grad_norm > options.tol_gradient; ++k) {
                const Eigen::LLT<Eigen::MatrixXd> llt(-hess);
                if (llt.info() != Eigen::Success) break;
                const Eigen::VectorXd step = llt.solve(Eigen::Map<const Eigen::VectorXd>(opt.at.gradient.data(), n));
                std::vector<double> x(res.theta);
                for (Eigen::Index i = 0; i < n; ++i) x[i] += step[i];
                auto trial = objective(x);
                ++res.evaluations;
                double gn = 0.0;
                for (double g : trial.gradient) gn = std::max(gn, std::fabs(g));
                if (!std::isfinite(trial.value) || trial.value < res.loglik || gn >= res.grad_norm) break;
                res.theta = std::move(x);
                res.loglik = trial.value;
                res.grad_norm = gn;
                opt.at = std::move(trial);
                hess = numerical_hessian(grad, res.theta).hessian;
            }
            res.covariance = covariance(hess);
        } catch (const Error& e) {
            res.covariance_error = e.what();
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Krinsky-Robb
// ---------------------------------------------------------------------------

/// Factor A with A A^T = cov; tolerates positive semi-definite input.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov)
{
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -1e-10 * scale) throw Error(ErrorCode::CovNotPSD, "covariance matrix is not positive semi-definite");
    return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// Uniform in (0,1) from the top 53 bits of a 64-bit generator.
inline double open_uniform(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

inline double standard_normal(std::mt19937_64& rng) { return inverse_normal_cdf(open_uniform(rng)); }

struct KrSample {
    Eigen::MatrixXd draws; ///< one parameter vector per row
};

inline constexpr std::size_t kDefaultKrDraws = 10000;

/// Parameter vectors from N(center, cov).
inline KrSample krinsky_robb_sample(std::span<const double> center, const Eigen::MatrixXd& cov, std::size_t count,
                                    std::uint64_t seed)
{
    const auto P = static_cast<Eigen::Index>(center.size());
    if (cov.rows() != P || cov.cols() != P) throw Error(ErrorCode::DimensionMismatch, "covariance shape mismatch");
    const Eigen::MatrixXd A = psd_factor(cov);
    std::mt19937_64 rng(seed);
    KrSample s;
    s.draws.resize(static_cast<Eigen::Index>(count), P);
    Eigen::VectorXd z(P);
    const Eigen::Map<const Eigen::VectorXd> mu(center.data(), P);
    for (Eigen::Index r = 0; r < s.draws.rows(); ++r) {
        for (Eigen::Index i = 0; i < P; ++i) z[i] = standard_normal(rng);
        s.draws.row(r) = (mu + A * z).transpose();
    }
    return s;
}

/// Type-7 sample quantile.
inline double quantile_type7(std::vector<double> values, double p)
{
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct KrInterval {
    double point = 0.0; ///< g at the estimate
    double lower = 0.0;
    double upper = 0.0;
    double sd = 0.0; ///< standard deviation of the simulated g
};

using DerivedQuantity = std::function<double(std::span<const double>)>;

inline KrInterval summarize_derived(const KrSample& sample, std::span<const double> center, const DerivedQuantity& g,
                                    double level = 0.95)
{
    std::vector<double> vals(static_cast<std::size_t>(sample.draws.rows()));
    std::vector<double> row(static_cast<std::size_t>(sample.draws.cols()));
    double mean = 0.0;
    for (Eigen::Index r = 0; r < sample.draws.rows(); ++r) {
        for (Eigen::Index i = 0; i < sample.draws.cols(); ++i) row[static_cast<std::size_t>(i)] = sample.draws(r, i);
        vals[static_cast<std::size_t>(r)] = g(row);
        mean += vals[static_cast<std::size_t>(r)];
    }
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    KrInterval out;
    out.point = g(center);
    out.sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
    const double a = 0.5 * (1.0 - level);
    out.lower = quantile_type7(vals, a);
    out.upper = quantile_type7(std::move(vals), 1.0 - a);
    return out;
}

/// Percentile interval of g over `count` draws from N(theta_hat, cov).
inline KrInterval krinsky_robb(std::span<const double> theta_hat, const Eigen::MatrixXd& cov, const DerivedQuantity& g,
                               std::size_t count = kDefaultKrDraws, std::uint64_t seed = 1, double level = 0.95)
{
    if (count < 1000) throw Error(ErrorCode::InvalidValue, "Krinsky-Robb needs at least 1000 draws");
    return summarize_derived(krinsky_robb_sample(theta_hat, cov, count, seed), theta_hat, g, level);
}

inline KrInterval krinsky_robb(const EstimationResult& result, const DerivedQuantity& g,
                               std::size_t count = kDefaultKrDraws, std::uint64_t seed = 1)
{
    if (!result.covariance) throw Error(ErrorCode::CovNotPSD, "estimation result carries no covariance");
    return krinsky_robb(result.theta, *result.covariance, g, count, seed);
}

} // namespace mixlogit
