#pragma once

// Simulated panel log-likelihood of the mixed logit family and its analytic
// gradient.
//
//   V_{n,t,(k,l)} = x_k beta_H + x_l beta_M + asc_l(n) + eta_l
//   P_n ~= (1/R) sum_r prod_t P(y_nt | beta(z_r), eta(z_r))
//   LL  = sum_n log P_n
//
// All products and averages are carried in log space.

#include "mixlogit/dataset.hpp"
#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/qmc.hpp"
#include "mixlogit/threads.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mixlogit {

inline constexpr double kLogProbabilityFloor = -700.0;

// ---------------------------------------------------------------------------
// Scalar building blocks
// ---------------------------------------------------------------------------

inline double log_sum_exp(std::span<const double> v)
{
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// log P(chosen) under a multinomial logit over V.
inline double mnl_log_prob(std::span<const double> V, std::size_t chosen) { return V[chosen] - log_sum_exp(V); }

inline double mnl_prob(std::span<const double> V, std::size_t chosen) { return std::exp(mnl_log_prob(V, chosen)); }

inline double panel_log_prob(std::span<const double> task_probs)
{
    double s = 0.0;
    for (double p : task_probs) s += std::log(p);
    return s;
}

inline double panel_prob(std::span<const double> task_probs) { return std::exp(panel_log_prob(task_probs)); }

/// Value multiplying coefficient `decl` for one alternative; 0 when the
/// coefficient does not apply to the alternative's mode.
inline double effective_attribute(const AttributeBinding& b, const Respondent& r, const Alternative& alt,
                                  std::size_t attribute_index)
{
    if (!b.applies_to(alt.mode)) return 0.0;
    double x = alt.values[attribute_index] * b.scale;
    if (b.divide_by_income) x /= r.weekly_household_income;
    for (const auto& cov : b.interactions) x *= covariate_value(r, cov);
    return x;
}

inline double intercept_value(const ModelSpec& spec, const ParameterLayout& layout, std::span<const double> theta,
                              const Respondent& r, int mode)
{
    for (std::size_t a = 0; a < spec.intercepts.size(); ++a) {
        const auto& d = spec.intercepts[a];
        if (d.mode != mode) continue;
        const std::size_t base = layout.intercept_index(a);
        double v = theta[base];
        for (std::size_t k = 0; k < d.covariates.size(); ++k) v += theta[base + 1 + k] * covariate_value(r, d.covariates[k]);
        return v;
    }
    return 0.0;
}

/// Representative utility of every available alternative of one task, given
/// realized coefficients and error components.
inline std::vector<double> assemble_utility(const ModelSpec& spec, std::span<const double> theta,
                                            const ChoiceDataset& data, std::size_t task,
                                            const RealizedCoefficients& realized)
{
    const ParameterLayout layout(spec);
    const auto& t = data.tasks[task];
    const auto& r = data.respondents[t.respondent];
    std::vector<double> V;
    V.reserve(t.alternatives.size());
    for (const auto& alt : t.alternatives) {
        double v = 0.0;
        for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
            const auto& b = spec.coefficients[c].binding;
            if (!b.applies_to(alt.mode)) continue;
            auto idx = data.attribute_index(b.attribute);
            if (!idx) throw Error(ErrorCode::BindingMismatch, "attribute '" + b.attribute + "' not in dataset");
            v += effective_attribute(b, r, alt, *idx) * realized.beta[c];
        }
        v += intercept_value(spec, layout, theta, r, alt.mode);
        for (std::size_t e = 0; e < spec.error_components.size(); ++e)
            if (spec.error_components[e].mode == alt.mode) v += realized.eta[e];
        V.push_back(v);
    }
    return V;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct LikelihoodReport {
    double total = 0.0;
    std::vector<double> per_respondent;
    std::optional<std::vector<double>> gradient;
    std::size_t draws = 0;
    std::size_t underflow_count = 0;
    bool saturated = false;
};

inline nlohmann::json to_json(const LikelihoodReport& r)
{
    nlohmann::json j;
    j["log_likelihood"] = r.total;
    j["per_respondent"] = r.per_respondent;
    j["gradient"] = r.gradient ? nlohmann::json(*r.gradient) : nlohmann::json(nullptr);
    j["draws"] = r.draws;
    j["underflow_count"] = r.underflow_count;
    j["saturated"] = r.saturated;
    return j;
}

// ---------------------------------------------------------------------------
// Compiled evaluator
// ---------------------------------------------------------------------------

/// Binds a spec to a dataset and draw tensor once so the likelihood can be
/// evaluated repeatedly. Reads shared data only; each evaluate() call uses
/// its own workspaces, so distinct instances may run concurrently.
class SimulatedLikelihood {
public:
    SimulatedLikelihood(const ModelSpec& spec, const ChoiceDataset& data, const DrawTensor& draws, int threads = 0)
        : spec_(spec), layout_(spec), threads_(resolve_threads(threads))
    {
        compile(data);
        bind_draws(data, draws);
    }

    [[nodiscard]] const ParameterLayout& layout() const { return layout_; }
    [[nodiscard]] const ModelSpec& spec() const { return spec_; }
    [[nodiscard]] std::size_t num_parameters() const { return layout_.size(); }
    [[nodiscard]] std::size_t num_respondents() const { return resp_task_begin_.size() - 1; }
    [[nodiscard]] std::size_t num_draws() const { return draws_per_resp_; }
    void set_threads(int threads) { threads_ = resolve_threads(threads); }

    [[nodiscard]] LikelihoodReport evaluate(std::span<const double> theta, bool with_gradient) const
    {
        if (theta.size() != layout_.size())
            throw Error(ErrorCode::DimensionMismatch, "theta has " + std::to_string(theta.size()) + " entries, expected " +
                                                          std::to_string(layout_.size()));
        const std::size_t N = num_respondents();
        const std::size_t P = layout_.size();
        LikelihoodReport rep;
        rep.draws = draws_per_resp_;
        rep.per_respondent.assign(N, 0.0);
        std::vector<double> grads(with_gradient ? N * P : 0, 0.0);
        std::vector<unsigned char> underflow(N, 0), saturated(N, 0);

        Shared sh = prepare(theta);
        parallel_chunks(N, threads_, [&](std::size_t, std::size_t b, std::size_t e) {
            Workspace ws;
            for (std::size_t n = b; n < e; ++n) {
                std::span<double> g = with_gradient ? std::span<double>(grads.data() + n * P, P) : std::span<double>();
                const auto res = respondent_loglik(n, theta, sh, ws, g);
                rep.per_respondent[n] = res.log_prob;
                underflow[n] = res.underflow;
                saturated[n] = res.saturated;
            }
        });

        for (std::size_t n = 0; n < N; ++n) {
            rep.total += rep.per_respondent[n];
            rep.underflow_count += underflow[n];
            rep.saturated = rep.saturated || saturated[n] || sh.saturated;
        }
        if (with_gradient) {
            std::vector<double> g(P, 0.0);
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t p = 0; p < P; ++p) g[p] += grads[n * P + p];
            rep.gradient = std::move(g);
        }
        return rep;
    }

private:
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    struct Shared {
        std::vector<double> fixed_beta;  ///< per fixed coefficient
        std::vector<double> fixed_slope; ///< d beta / d alpha
        Eigen::VectorXd mean;            ///< S: random-coefficient means, then zeros for error components
        Eigen::MatrixXd loading;         ///< S x D: sigma / Cholesky / tau placed on their draw dimensions
        bool saturated = false;
    };

    /// Per-worker scratch; matrices are rows x R unless noted.
    struct Workspace {
        Eigen::VectorXd vfix, pbar;
        RowMatrix coef;  ///< S x R
        RowArray slope;  ///< KR x R
        RowMatrix v, prob, resid;
        Eigen::ArrayXd lp, w, m, sum;
        RowMatrix score; ///< S x R
        Eigen::MatrixXd dload; ///< S x D
    };

    struct RespondentResult {
        double log_prob = 0.0;
        bool underflow = false;
        bool saturated = false;
    };

    void compile(const ChoiceDataset& data)
    {
        const auto n_coef = spec_.coefficients.size();
        std::vector<std::size_t> attr_idx(n_coef);
        for (std::size_t c = 0; c < n_coef; ++c) {
            auto idx = data.attribute_index(spec_.coefficients[c].binding.attribute);
            if (!idx)
                throw Error(ErrorCode::BindingMismatch, "attribute '" + spec_.coefficients[c].binding.attribute +
                                                            "' of coefficient '" + spec_.coefficients[c].name +
                                                            "' is not in the dataset");
            attr_idx[c] = *idx;
            (spec_.coefficients[c].is_random() ? random_ : fixed_).push_back(c);
        }
        n_fixed_ = fixed_.size();
        n_random_ = random_.size();
        n_ec_ = spec_.error_components.size();
        for (const auto& e : spec_.error_components) ec_mode_.push_back(e.mode);
        const std::size_t S = n_random_ + n_ec_;

        std::vector<double> xf, xa;
        resp_task_begin_.assign(1, 0);
        task_row_begin_.assign(1, 0);
        for (std::size_t n = 0; n < data.respondents.size(); ++n) {
            const auto& resp = data.respondents[n];
            for (std::size_t t = data.task_begin[n]; t < data.task_begin[n + 1]; ++t) {
                const auto& task = data.tasks[t];
                if (task.chosen < 0)
                    throw Error(ErrorCode::BindingMismatch, "task " + std::to_string(t) + " has no recorded choice");
                for (const auto& alt : task.alternatives) {
                    for (std::size_t c : fixed_) xf.push_back(checked_attribute(c, resp, alt, attr_idx[c]));
                    for (std::size_t c : random_) xa.push_back(checked_attribute(c, resp, alt, attr_idx[c]));
                    for (int mode : ec_mode_) xa.push_back(alt.mode == mode ? 1.0 : 0.0);
                    mode_.push_back(alt.mode);
                }
                chosen_.push_back(task_row_begin_.back() + static_cast<std::size_t>(task.chosen));
                task_row_begin_.push_back(mode_.size());
            }
            resp_task_begin_.push_back(chosen_.size());

            for (const auto& d : spec_.intercepts)
                for (const auto& cov : d.covariates) asc_cov_.push_back(covariate_value(resp, cov));
        }
        const auto rows = static_cast<Eigen::Index>(mode_.size());
        xf_ = Eigen::Map<RowMatrix>(xf.data(), rows, static_cast<Eigen::Index>(n_fixed_));
        xa_ = Eigen::Map<RowMatrix>(xa.data(), rows, static_cast<Eigen::Index>(S));
        asc_stride_ = 0;
        for (const auto& d : spec_.intercepts) asc_stride_ += d.covariates.size();
        for (std::size_t a = 0; a < spec_.intercepts.size(); ++a) asc_mode_.push_back(spec_.intercepts[a].mode);
    }

    double checked_attribute(std::size_t c, const Respondent& r, const Alternative& alt, std::size_t idx) const
    {
        const auto& b = spec_.coefficients[c].binding;
        if (!b.applies_to(alt.mode)) return 0.0;
        const double x = effective_attribute(b, r, alt, idx);
        if (!std::isfinite(x))
            throw Error(ErrorCode::BindingMismatch, "attribute '" + b.attribute + "' is missing for mode " +
                                                        std::to_string(alt.mode) + " of respondent '" + r.id + "'");
        return x;
    }

    void bind_draws(const ChoiceDataset& data, const DrawTensor& draws)
    {
        const std::size_t need = n_random_ + n_ec_;
        draws_ = &draws;
        // Without random dimensions every draw gives the same value; one suffices.
        draws_per_resp_ = need == 0 ? 1 : draws.draws;
        if (need == 0) return;
        if (draws.draws == 0) throw Error(ErrorCode::DimensionMismatch, "draw tensor holds no draws");
        if (draws.respondents != data.respondents.size())
            throw Error(ErrorCode::DimensionMismatch, "draw tensor covers " + std::to_string(draws.respondents) +
                                                          " respondents, dataset has " +
                                                          std::to_string(data.respondents.size()));
        for (std::size_t c : random_) {
            auto d = draws.label_index(spec_.coefficients[c].name);
            if (!d)
                throw Error(ErrorCode::DimensionMismatch, "draw tensor has no dimension for '" +
                                                              spec_.coefficients[c].name + "'");
            random_dim_.push_back(*d);
        }
        for (const auto& e : spec_.error_components) {
            auto d = draws.label_index(e.name);
            if (!d) throw Error(ErrorCode::DimensionMismatch, "draw tensor has no dimension for '" + e.name + "'");
            ec_dim_.push_back(*d);
        }
        // Position of each random coefficient inside random_.
        std::vector<std::size_t> pos(spec_.coefficients.size(), ParameterLayout::npos);
        for (std::size_t k = 0; k < n_random_; ++k) pos[random_[k]] = k;
        for (std::size_t k = 0; k < n_random_; ++k) {
            const auto& decl = spec_.coefficients[random_[k]];
            if (!decl.block) diag_.push_back({k, layout_.scale_index(random_[k])});
        }
        for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
            const auto& m = spec_.blocks[b].members;
            for (std::size_t i = 0; i < m.size(); ++i)
                for (std::size_t j = 0; j <= i; ++j)
                    chol_.push_back({pos[m[i]], pos[m[j]], layout_.cholesky_index(b, i, j)});
        }
    }

    Shared prepare(std::span<const double> theta) const
    {
        Shared sh;
        sh.fixed_beta.resize(n_fixed_);
        sh.fixed_slope.resize(n_fixed_);
        for (std::size_t k = 0; k < n_fixed_; ++k) {
            const auto& decl = spec_.coefficients[fixed_[k]];
            const double beta = transform_param(decl.transform, theta[layout_.value_index(fixed_[k])], &sh.saturated);
            sh.fixed_beta[k] = beta;
            sh.fixed_slope[k] = transform_slope(decl.transform, beta);
        }
        const auto S = static_cast<Eigen::Index>(n_random_ + n_ec_);
        const auto D = static_cast<Eigen::Index>(draws_ && need_draws() ? draws_->dim : 0);
        sh.mean = Eigen::VectorXd::Zero(S);
        sh.loading = Eigen::MatrixXd::Zero(S, D);
        for (std::size_t k = 0; k < n_random_; ++k) sh.mean[static_cast<Eigen::Index>(k)] = theta[layout_.value_index(random_[k])];
        for (const auto& dg : diag_)
            sh.loading(static_cast<Eigen::Index>(dg.k), static_cast<Eigen::Index>(random_dim_[dg.k])) += theta[dg.param];
        for (const auto& ch : chol_)
            sh.loading(static_cast<Eigen::Index>(ch.i), static_cast<Eigen::Index>(random_dim_[ch.j])) += theta[ch.param];
        for (std::size_t e = 0; e < n_ec_; ++e)
            sh.loading(static_cast<Eigen::Index>(n_random_ + e), static_cast<Eigen::Index>(ec_dim_[e])) +=
                theta[layout_.tau_index(e)];
        return sh;
    }

    [[nodiscard]] bool need_draws() const { return n_random_ + n_ec_ > 0; }

    RespondentResult respondent_loglik(std::size_t n, std::span<const double> theta, const Shared& sh, Workspace& ws,
                                       std::span<double> grad) const
    {
        RespondentResult res;
        const bool want_grad = !grad.empty();
        const std::size_t t0 = resp_task_begin_[n], t1 = resp_task_begin_[n + 1];
        const auto row0 = static_cast<Eigen::Index>(task_row_begin_[t0]);
        const auto rows = static_cast<Eigen::Index>(task_row_begin_[t1]) - row0;
        const auto R = static_cast<Eigen::Index>(draws_per_resp_);
        const auto KR = static_cast<Eigen::Index>(n_random_);
        const auto S = static_cast<Eigen::Index>(n_random_ + n_ec_);

        // Mode intercepts for this respondent.
        double asc[kModes + 1] = {0.0, 0.0, 0.0, 0.0};
        {
            const double* cov = asc_cov_.data() + n * asc_stride_;
            for (std::size_t a = 0; a < spec_.intercepts.size(); ++a) {
                const std::size_t base = layout_.intercept_index(a);
                double v = theta[base];
                const auto nc = spec_.intercepts[a].covariates.size();
                for (std::size_t k = 0; k < nc; ++k) v += theta[base + 1 + k] * cov[k];
                asc[asc_mode_[a]] = v;
                cov += nc;
            }
        }

        const auto Xf = xf_.middleRows(row0, rows);
        const auto Xa = xa_.middleRows(row0, rows);
        const Eigen::Map<const Eigen::VectorXd> fixed_beta(sh.fixed_beta.data(), static_cast<Eigen::Index>(n_fixed_));
        ws.vfix = Xf * fixed_beta;
        for (Eigen::Index i = 0; i < rows; ++i) ws.vfix[i] += asc[mode_[static_cast<std::size_t>(row0 + i)]];

        // Realized coefficients per draw: coef = mean + loading * z.
        const std::size_t D = need_draws() ? draws_->dim : 0;
        const std::span<const double> z_all = D ? draws_->respondent(n) : std::span<const double>();
        const Eigen::Map<const RowMatrix> Z(z_all.data(), D ? R : 0, static_cast<Eigen::Index>(D));
        if (S > 0) {
            ws.coef.noalias() = sh.loading * Z.transpose();
            ws.coef.colwise() += sh.mean;
            ws.slope.resize(KR, R);
            for (Eigen::Index k = 0; k < KR; ++k) {
                const auto psi = spec_.coefficients[random_[static_cast<std::size_t>(k)]].transform;
                if (psi == Transform::Identity) {
                    ws.slope.row(k).setOnes();
                    continue;
                }
                for (Eigen::Index r = 0; r < R; ++r) {
                    bool sat = false;
                    const double b = transform_param(psi, ws.coef(k, r), &sat);
                    res.saturated = res.saturated || sat;
                    ws.coef(k, r) = b;
                    ws.slope(k, r) = transform_slope(psi, b);
                }
            }
            ws.v.noalias() = Xa * ws.coef;
            ws.v.colwise() += ws.vfix;
        } else {
            ws.v = ws.vfix.replicate(1, R);
        }

        // Panel log-probability per draw; prob holds within-task probabilities.
        ws.lp.setZero(R);
        ws.prob.resize(rows, R);
        for (std::size_t t = t0; t < t1; ++t) {
            const auto a = static_cast<Eigen::Index>(task_row_begin_[t]) - row0;
            const auto b = static_cast<Eigen::Index>(task_row_begin_[t + 1]) - row0;
            const auto ch = static_cast<Eigen::Index>(chosen_[t]) - row0;
            // Row-major storage: reduce row by row so every step is contiguous over draws.
            ws.m = ws.v.row(a).transpose().array();
            for (Eigen::Index i = a + 1; i < b; ++i) ws.m = ws.m.max(ws.v.row(i).transpose().array());
            ws.sum.setZero(R);
            for (Eigen::Index i = a; i < b; ++i) {
                ws.prob.row(i).array() = (ws.v.row(i).array() - ws.m.transpose()).exp();
                ws.sum += ws.prob.row(i).transpose().array();
            }
            ws.lp += ws.v.row(ch).transpose().array() - ws.m - ws.sum.log();
            if (want_grad) {
                ws.m = ws.sum.inverse(); // reuse as 1 / sum
                for (Eigen::Index i = a; i < b; ++i) ws.prob.row(i).array() *= ws.m.transpose();
            }
        }

        // log-mean-exp over draws
        const double mx = ws.lp.maxCoeff();
        const double s = (ws.lp - mx).exp().sum();
        const double logp = mx + std::log(s / static_cast<double>(R));
        if (!(logp >= kLogProbabilityFloor)) {
            res.log_prob = kLogProbabilityFloor;
            res.underflow = true;
            return res; // clamped region is flat: gradient stays zero
        }
        res.log_prob = logp;
        if (!want_grad) return res;

        ws.w = (ws.lp - (mx + std::log(s))).exp();

        // resid = Y - P; chosen rows get +1.
        ws.resid = -ws.prob;
        for (std::size_t t = t0; t < t1; ++t) ws.resid.row(static_cast<Eigen::Index>(chosen_[t]) - row0).array() += 1.0;

        // Fixed coefficients and intercepts through draw-weighted residuals.
        ws.pbar.noalias() = ws.resid * ws.w.matrix();
        const Eigen::VectorXd fixed_resid = Xf.transpose() * ws.pbar;
        for (std::size_t k = 0; k < n_fixed_; ++k)
            grad[layout_.value_index(fixed_[k])] = fixed_resid[static_cast<Eigen::Index>(k)] * sh.fixed_slope[k];
        double mode_resid[kModes + 1] = {0.0, 0.0, 0.0, 0.0};
        for (Eigen::Index i = 0; i < rows; ++i) mode_resid[mode_[static_cast<std::size_t>(row0 + i)]] += ws.pbar[i];
        {
            const double* cov = asc_cov_.data() + n * asc_stride_;
            for (std::size_t a = 0; a < spec_.intercepts.size(); ++a) {
                const std::size_t base = layout_.intercept_index(a);
                const double res_l = mode_resid[asc_mode_[a]];
                grad[base] = res_l;
                const auto nc = spec_.intercepts[a].covariates.size();
                for (std::size_t k = 0; k < nc; ++k) grad[base + 1 + k] = res_l * cov[k];
                cov += nc;
            }
        }
        if (S == 0) return res;

        // Random terms: per-draw scores, chain rule through psi, weighted by w.
        ws.score.noalias() = Xa.transpose() * ws.resid;
        ws.score.array().rowwise() *= ws.w.transpose();
        ws.score.topRows(KR).array() *= ws.slope;
        const Eigen::VectorXd dmean = ws.score.topRows(KR).rowwise().sum();
        for (std::size_t k = 0; k < n_random_; ++k) grad[layout_.value_index(random_[k])] += dmean[static_cast<Eigen::Index>(k)];
        ws.dload.noalias() = ws.score * Z;
        for (const auto& dg : diag_)
            grad[dg.param] += ws.dload(static_cast<Eigen::Index>(dg.k), static_cast<Eigen::Index>(random_dim_[dg.k]));
        for (const auto& ch : chol_)
            grad[ch.param] += ws.dload(static_cast<Eigen::Index>(ch.i), static_cast<Eigen::Index>(random_dim_[ch.j]));
        for (std::size_t e = 0; e < n_ec_; ++e)
            grad[layout_.tau_index(e)] +=
                ws.dload(static_cast<Eigen::Index>(n_random_ + e), static_cast<Eigen::Index>(ec_dim_[e]));
        return res;
    }

    struct DiagTerm {
        std::size_t k;
        std::size_t param;
    };
    struct CholTerm {
        std::size_t i, j;
        std::size_t param;
    };

    ModelSpec spec_;
    ParameterLayout layout_;
    std::size_t threads_ = 1;

    std::vector<std::size_t> fixed_, random_;
    std::size_t n_fixed_ = 0, n_random_ = 0, n_ec_ = 0;
    RowMatrix xf_; ///< rows x fixed-coefficient attributes
    RowMatrix xa_; ///< rows x (random-coefficient attributes, error-component mode indicators)
    std::vector<int> mode_;
    std::vector<std::size_t> chosen_; ///< global row of each task's choice
    std::vector<std::size_t> task_row_begin_, resp_task_begin_;
    std::vector<double> asc_cov_;
    std::size_t asc_stride_ = 0;
    std::vector<int> asc_mode_;

    const DrawTensor* draws_ = nullptr;
    std::size_t draws_per_resp_ = 1;
    std::vector<std::size_t> random_dim_, ec_dim_;
    std::vector<int> ec_mode_;
    std::vector<DiagTerm> diag_;
    std::vector<CholTerm> chol_;
};

inline LikelihoodReport simulated_loglik(const ModelSpec& spec, std::span<const double> theta,
                                         const ChoiceDataset& data, const DrawTensor& draws, int threads = 0)
{
    return SimulatedLikelihood(spec, data, draws, threads).evaluate(theta, false);
}

inline std::vector<double> loglik_gradient(const ModelSpec& spec, std::span<const double> theta,
                                           const ChoiceDataset& data, const DrawTensor& draws, int threads = 0)
{
    return *SimulatedLikelihood(spec, data, draws, threads).evaluate(theta, true).gradient;
}

/// Equal-share log-likelihood over available alternatives.
inline double null_loglik(const ChoiceDataset& data)
{
    double ll = 0.0;
    for (const auto& t : data.tasks) ll -= std::log(static_cast<double>(t.alternatives.size()));
    return ll;
}

} // namespace mixlogit
