#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <map>

using namespace mixlogit;
using namespace mixlogit::testing;

namespace {

std::vector<double> zero_scales(const ModelSpec& spec, std::vector<double> theta)
{
    const ParameterLayout layout(spec);
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const auto role = layout[p].role;
        if (role == ParamRole::DiagonalScale || role == ParamRole::Cholesky || role == ParamRole::ErrorScale) theta[p] = 0;
    }
    return theta;
}

/// theta of `from` mapped onto `to` by name; missing names must be listed in `defaults`.
std::vector<double> by_name(const ModelSpec& from, const std::vector<double>& theta, const ModelSpec& to,
                            const std::map<std::string, double>& defaults = {})
{
    const ParameterLayout a(from), b(to);
    std::vector<double> out(b.size());
    for (std::size_t p = 0; p < b.size(); ++p) {
        if (auto i = a.find(b[p].name)) out[p] = theta[*i];
        else out[p] = defaults.at(b[p].name);
    }
    return out;
}

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0,1), by Golub-Welsch.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        x[i] = std::sqrt(2.0) * es.eigenvalues()[i];
        const double v = es.eigenvectors()(0, i);
        w[i] = v * v; // sqrt(pi) * v^2 / sqrt(pi)
    }
    return {x, w};
}

DrawTensor custom_draws(std::vector<std::string> labels, std::size_t N, std::size_t R, std::vector<double> values)
{
    DrawTensor t;
    t.respondents = N;
    t.draws = R;
    t.dim = labels.size();
    t.labels = std::move(labels);
    t.values = std::move(values);
    return t;
}

} // namespace

TEST(Mnl, Probabilities)
{
    EXPECT_DOUBLE_EQ(mnl_prob(std::vector<double>{0, 0}, 0), 0.5);
    EXPECT_NEAR(mnl_prob(std::vector<double>{0, std::log(3.0)}, 0), 0.25, 1e-15);
    EXPECT_NEAR(mnl_prob(std::vector<double>{0, std::log(3.0)}, 1), 0.75, 1e-15);
    const double p = mnl_prob(std::vector<double>{1000, 0}, 0);
    EXPECT_LE(p, 1.0);
    EXPECT_DOUBLE_EQ(p, 1.0);
    EXPECT_TRUE(std::isfinite(mnl_log_prob(std::vector<double>{1000, 0}, 1)));
}

TEST(Mnl, ShiftInvarianceAndSum)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> norm(0, 3);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> V(6), W(6);
        for (auto& v : V) v = norm(rng);
        const double c = norm(rng) * 100;
        for (std::size_t j = 0; j < 6; ++j) W[j] = V[j] + c;
        double sum = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_NEAR(mnl_prob(V, j), mnl_prob(W, j), 1e-12);
            sum += mnl_prob(V, j);
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Panel, Products)
{
    EXPECT_DOUBLE_EQ(panel_prob(std::vector<double>{0.5, 0.25}), 0.125);
    EXPECT_DOUBLE_EQ(panel_prob(std::vector<double>{0.3}), 0.3);
    const std::vector<double> sixths(8, 1.0 / 6.0);
    EXPECT_NEAR(panel_log_prob(sixths), 8.0 * std::log(1.0 / 6.0), 1e-12);
}

TEST(Utility, ZeroCase)
{
    const auto spec = load_spec("paper_mmnl2");
    auto data = skeleton(3, 2, 5);
    for (auto& t : data.tasks)
        for (auto& a : t.alternatives)
            for (auto& v : a.values) v = 0.0;
    const std::vector<double> theta(count_parameters(spec), 0.0);
    const auto realized = realize_coefficients(spec, theta, std::vector<double>(spec.draw_dimension(), 0.0));
    for (std::size_t t = 0; t < data.num_tasks(); ++t)
        for (double v : assemble_utility(spec, theta, data, t, realized)) EXPECT_EQ(v, 0.0);
}

TEST(Utility, NoHousingOptionConstant)
{
    const auto spec = load_spec("paper_mmnl2");
    auto data = skeleton(4, 3, 6);
    std::mt19937_64 rng(2);
    const auto theta = random_theta(spec, rng);
    std::vector<double> z(spec.draw_dimension());
    std::normal_distribution<double> norm;
    for (auto& v : z) v = norm(rng);
    const auto realized = realize_coefficients(spec, theta, z);
    // Commute attributes depend on the housing option's location too. Copying
    // option 1's values into option 2 leaves nothing to tell them apart.
    for (auto& t : data.tasks) {
        const auto first = t.alternatives;
        for (auto& a : t.alternatives) {
            if (a.housing != 2) continue;
            for (const auto& b : first)
                if (b.housing == 1 && b.mode == a.mode)
                    a.values = b.values;
        }
    }
    for (std::size_t t = 0; t < data.num_tasks(); ++t) {
        const auto V = assemble_utility(spec, theta, data, t, realized);
        const auto& alts = data.tasks[t].alternatives;
        const std::size_t half = alts.size() / 2;
        for (std::size_t j = 0; j < half; ++j) EXPECT_DOUBLE_EQ(V[j], V[j + half]);
    }
}

TEST(Likelihood, MatchesTermByTermEvaluator)
{
    for (const auto* text : {kDenseSpec}) {
        const auto spec = parse_spec_text(text);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto data = synthetic(spec, 25, 4, seed);
            std::mt19937_64 rng(seed + 100);
            const auto theta = random_theta(spec, rng);
            const auto draws = allocate_draws(spec, data.num_respondents(), 64, seed);
            const double fast = simulated_loglik(spec, theta, data, draws).total;
            const double slow = brute_force_loglik(spec, theta, data, draws);
            EXPECT_NEAR(fast, slow, 1e-12 * std::fabs(slow)) << seed;
        }
    }
    for (const auto& name : {"paper_cmnl", "paper_ecmnl", "paper_mmnl1", "paper_mmnl2"}) {
        const auto spec = load_spec(name);
        const auto data = synthetic(spec, 30, 8, 17);
        std::mt19937_64 rng(8);
        auto theta = random_theta(spec, rng);
        const auto draws = allocate_draws(spec, data.num_respondents(), 32, 4);
        const double fast = simulated_loglik(spec, theta, data, draws).total;
        EXPECT_NEAR(fast, brute_force_loglik(spec, theta, data, draws), 1e-12 * std::fabs(fast)) << name;
    }
}

TEST(Likelihood, PerRespondentSumsToTotal)
{
    const auto spec = parse_spec_text(kDenseSpec);
    const auto data = synthetic(spec, 40, 8, 4);
    std::mt19937_64 rng(4);
    const auto theta = random_theta(spec, rng);
    const auto rep = simulated_loglik(spec, theta, data, allocate_draws(spec, 40, 50, 1));
    double sum = 0.0;
    for (double v : rep.per_respondent) sum += v;
    EXPECT_EQ(sum, rep.total);
    EXPECT_EQ(rep.draws, 50u);
    EXPECT_EQ(rep.per_respondent.size(), 40u);
}

TEST(Likelihood, DegenerateMixingEqualsFixedModel)
{
    const auto spec = parse_spec_text(kDenseSpec);
    const auto fixed = restrict_spec(spec, ModelClass::CMNL);
    const auto data = synthetic(spec, 50, 8, 7);
    std::mt19937_64 rng(7);
    for (std::size_t R : {1u, 7u, 128u}) {
        const auto draws = allocate_draws(spec, data.num_respondents(), R, 9);
        const auto theta = zero_scales(spec, random_theta(spec, rng));
        const double mixed = simulated_loglik(spec, theta, data, draws).total;
        const double closed = brute_force_loglik(fixed, by_name(spec, theta, fixed), data, DrawTensor{});
        EXPECT_NEAR(mixed, closed, 1e-10) << "R=" << R;
    }
}

TEST(Likelihood, SingleDrawIsFixedModelAtThatDraw)
{
    const auto spec = parse_spec_text(kDenseSpec);
    const auto fixed = restrict_spec(spec, ModelClass::CMNL);
    const ParameterLayout layout(spec), flay(fixed);
    const auto data = synthetic(spec, 20, 6, 8);
    const auto draws = allocate_draws(spec, data.num_respondents(), 1, 3);
    std::mt19937_64 rng(3);
    const auto theta = random_theta(spec, rng);
    double expected = 0.0;
    for (std::size_t n = 0; n < data.num_respondents(); ++n) {
        // beta_n = psi(mu + S z_1): pass the realized alpha as fixed values.
        std::vector<double> z(draws.dim);
        for (std::size_t d = 0; d < draws.dim; ++d) z[d] = draws.at(n, 0, d);
        const auto realized = realize_coefficients(spec, theta, z);
        for (std::size_t t = data.task_begin[n]; t < data.task_begin[n + 1]; ++t) {
            const auto V = assemble_utility(spec, theta, data, t, realized);
            expected += mnl_log_prob(V, static_cast<std::size_t>(data.tasks[t].chosen));
        }
    }
    EXPECT_NEAR(simulated_loglik(spec, theta, data, draws).total, expected, 1e-10);
}

TEST(Likelihood, GaussHermiteOracle)
{
    const auto spec = parse_spec_text(R"(model = MMNL1
[coefficients]
rooms: attribute=h_rooms applies=housing kind=random
cost: attribute=h_cost applies=housing kind=fixed scale=0.01
time: attribute=m_time applies=modes kind=random
[intercepts]
asc_pt: mode=3
)");
    const auto data = synthetic(spec, 3, 2, 21);
    const ParameterLayout layout(spec);
    std::vector<double> theta(layout.size());
    theta[*layout.find("rooms")] = 0.4;
    theta[*layout.find("rooms.sd")] = 0.8;
    theta[*layout.find("cost")] = -0.6;
    theta[*layout.find("time")] = -1.2;
    theta[*layout.find("time.sd")] = 0.9;
    theta[*layout.find("asc_pt.baseline")] = 0.3;

    const auto [x, w] = gauss_hermite(15);
    double oracle = 0.0;
    for (std::size_t n = 0; n < data.num_respondents(); ++n) {
        double pn = 0.0;
        for (int a = 0; a < 15; ++a)
            for (int b = 0; b < 15; ++b) {
                const std::vector<double> z = {x[a], x[b]};
                const auto realized = realize_coefficients(spec, theta, z);
                double panel = 1.0;
                for (std::size_t t = data.task_begin[n]; t < data.task_begin[n + 1]; ++t)
                    panel *= mnl_prob(assemble_utility(spec, theta, data, t, realized),
                                      static_cast<std::size_t>(data.tasks[t].chosen));
                pn += w[a] * w[b] * panel;
            }
        oracle += std::log(pn);
    }
    const auto draws = allocate_draws(spec, data.num_respondents(), 4096, 1);
    EXPECT_NEAR(simulated_loglik(spec, theta, data, draws).total, oracle, 1e-4);
}

TEST(Likelihood, ModelNestingWithSharedDraws)
{
    const auto m2 = load_spec("paper_mmnl2");
    const auto m1 = load_spec("paper_mmnl1");
    const auto ec = load_spec("paper_ecmnl");
    const auto cm = load_spec("paper_cmnl");
    const auto data = synthetic(m2, 60, 8, 31);
    const auto draws = allocate_draws(m2, data.num_respondents(), 40, 12);
    std::mt19937_64 rng(12);
    auto theta1 = random_theta(m1, rng);
    const ParameterLayout l1(m1);

    // MMNL2 with diagonal L reproduces MMNL1.
    std::map<std::string, double> chol;
    for (auto [i, name] : {std::pair{1, "time_car"}, {2, "time_sdc"}, {3, "time_pt"}})
        for (int j = 1; j <= i; ++j)
            chol["time.L[" + std::to_string(i) + "," + std::to_string(j) + "]"] =
                i == j ? theta1[*l1.find(std::string(name) + ".sd")] : 0.0;
    const auto theta2 = by_name(m1, theta1, m2, chol);
    const double ll1 = simulated_loglik(m1, theta1, data, draws).total;
    EXPECT_NEAR(simulated_loglik(m2, theta2, data, draws).total, ll1, 1e-10);

    // MMNL1 with zero scales reproduces ECMNL at the same tau.
    for (std::size_t p = 0; p < l1.size(); ++p)
        if (l1[p].role == ParamRole::DiagonalScale) theta1[p] = 0.0;
    const auto theta_ec = by_name(m1, theta1, ec);
    const double ll_ec = simulated_loglik(ec, theta_ec, data, draws).total;
    EXPECT_NEAR(simulated_loglik(m1, theta1, data, draws).total, ll_ec, 1e-10);

    // ECMNL with tau = 0 reproduces CMNL.
    auto theta_ec0 = theta_ec;
    const ParameterLayout lec(ec);
    for (std::size_t p = 0; p < lec.size(); ++p)
        if (lec[p].role == ParamRole::ErrorScale) theta_ec0[p] = 0.0;
    EXPECT_NEAR(simulated_loglik(ec, theta_ec0, data, draws).total,
                simulated_loglik(cm, by_name(ec, theta_ec0, cm), data, DrawTensor{}).total, 1e-10);
}

TEST(Likelihood, CholeskyColumnSignFlip)
{
    const auto spec = load_spec("paper_mmnl2");
    const ParameterLayout layout(spec);
    const auto data = synthetic(spec, 30, 8, 41);
    const auto base = allocate_draws(spec, data.num_respondents(), 8, 5);

    // Every sign pattern of the three block dimensions, so that negating any
    // one block dimension permutes the draws.
    std::vector<std::size_t> block_dims;
    for (auto m : spec.blocks[0].members) block_dims.push_back(*base.label_index(spec.coefficients[m].name));
    const std::size_t R = base.draws * 8;
    std::vector<double> values;
    for (std::size_t n = 0; n < base.respondents; ++n)
        for (std::size_t r = 0; r < base.draws; ++r)
            for (int mask = 0; mask < 8; ++mask)
                for (std::size_t d = 0; d < base.dim; ++d) {
                    double v = base.at(n, r, d);
                    for (std::size_t k = 0; k < 3; ++k)
                        if (d == block_dims[k] && ((mask >> k) & 1)) v = -v;
                    values.push_back(v);
                }
    const auto draws = custom_draws(base.labels, base.respondents, R, values);

    std::mt19937_64 rng(41);
    const auto theta = random_theta(spec, rng);
    const double ll = simulated_loglik(spec, theta, data, draws).total;
    for (std::size_t col = 0; col < 3; ++col) {
        auto flipped = theta;
        for (std::size_t i = col; i < 3; ++i) flipped[layout.cholesky_index(0, i, col)] *= -1.0;
        EXPECT_NEAR(simulated_loglik(spec, flipped, data, draws).total, ll, 1e-10) << "column " << col;
    }
}

TEST(Likelihood, ThreadCountDoesNotChangeResult)
{
    const auto spec = load_spec("paper_mmnl2");
    const auto data = synthetic(spec, 37, 8, 51);
    const auto draws = allocate_draws(spec, data.num_respondents(), 64, 2);
    std::mt19937_64 rng(51);
    const auto theta = random_theta(spec, rng);
    const SimulatedLikelihood a(spec, data, draws, 1), b(spec, data, draws, 4), c(spec, data, draws, 7);
    const auto ra = a.evaluate(theta, true), rb = b.evaluate(theta, true), rc = c.evaluate(theta, true);
    EXPECT_EQ(ra.total, rb.total);
    EXPECT_EQ(ra.total, rc.total);
    EXPECT_EQ(*ra.gradient, *rb.gradient);
    EXPECT_EQ(*ra.gradient, *rc.gradient);
    EXPECT_EQ(ra.per_respondent, rc.per_respondent);
}

TEST(Gradient, MatchesCentralDifferences)
{
    for (const auto& [text, seed] : {std::pair{std::string(kDenseSpec), 1}, {std::string(kDenseSpec), 2},
                                     {bundled_spec_texts().at("paper_mmnl2"), 3}, {bundled_spec_texts().at("paper_ecmnl"), 4}}) {
        const auto spec = parse_spec_text(text);
        const auto data = synthetic(spec, 15, 4, static_cast<std::uint64_t>(seed));
        const auto draws = allocate_draws(spec, data.num_respondents(), 16, 7);
        const SimulatedLikelihood lik(spec, data, draws, 1);
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 13);
        auto theta = random_theta(spec, rng);
        const auto g = *lik.evaluate(theta, true).gradient;
        const auto names = lik.layout().names();
        for (std::size_t p = 0; p < theta.size(); ++p) {
            const double h = 1e-5 * std::max(1.0, std::fabs(theta[p]));
            auto tp = theta, tm = theta;
            tp[p] += h;
            tm[p] -= h;
            const double fd = (lik.evaluate(tp, false).total - lik.evaluate(tm, false).total) / (2 * h);
            EXPECT_LE(std::fabs(g[p] - fd), 1e-5 * std::max(1.0, std::fabs(g[p]))) << names[p] << " seed " << seed;
        }
    }
}

TEST(Gradient, ZeroAttributeColumnGivesZero)
{
    const auto spec = load_spec("paper_mmnl2");
    auto data = synthetic(spec, 20, 4, 61);
    const auto col = *data.attribute_index("h_old15");
    for (auto& t : data.tasks)
        for (auto& a : t.alternatives) a.values[col] = 0.0;
    const auto draws = allocate_draws(spec, data.num_respondents(), 16, 1);
    std::mt19937_64 rng(61);
    const auto theta = random_theta(spec, rng);
    const auto g = loglik_gradient(spec, theta, data, draws);
    EXPECT_EQ(g[*ParameterLayout(spec).find("old15")], 0.0);
}

TEST(Likelihood, UnderflowIsClampedAndCounted)
{
    const auto spec = load_spec("paper_cmnl");
    auto data = synthetic(spec, 5, 8, 71);
    const ParameterLayout layout(spec);
    std::vector<double> theta(layout.size(), 0.0);
    // A huge room coefficient makes any choice of the smaller option nearly impossible.
    theta[*layout.find("rooms")] = 400.0;
    const auto rooms = *data.attribute_index("h_rooms");
    for (auto& t : data.tasks) {
        t.alternatives[0].values[rooms] = 0.0;
        for (std::size_t j = 1; j < t.alternatives.size(); ++j) t.alternatives[j].values[rooms] = 2.0;
        if (t.respondent == 0) t.chosen = 0;
    }
    const SimulatedLikelihood lik(spec, data, DrawTensor{}, 1);
    const auto rep = lik.evaluate(theta, true);
    EXPECT_EQ(rep.per_respondent[0], kLogProbabilityFloor);
    EXPECT_GE(rep.underflow_count, 1u);
    EXPECT_TRUE(std::isfinite(rep.total));
    for (double g : *rep.gradient) EXPECT_TRUE(std::isfinite(g));
}

TEST(Likelihood, DrawTensorMustCoverSpec)
{
    const auto spec = load_spec("paper_mmnl2");
    const auto data = synthetic(spec, 5, 2, 81);
    EXPECT_MIXLOGIT_ERROR(SimulatedLikelihood(spec, data, allocate_draws(load_spec("paper_mmnl1"), 4, 8, 1)),
                          ErrorCode::DimensionMismatch);
    EXPECT_MIXLOGIT_ERROR(SimulatedLikelihood(spec, data, allocate_draws(load_spec("paper_ecmnl"), 5, 8, 1)),
                          ErrorCode::DimensionMismatch);
}

TEST(Likelihood, NullLogLikelihoodCountsAvailableAlternatives)
{
    auto data = skeleton(10, 8, 3);
    double expected = 0.0;
    for (const auto& r : data.respondents) expected += 8 * std::log(r.has_license ? 1.0 / 6.0 : 1.0 / 4.0);
    EXPECT_NEAR(null_loglik(data), expected, 1e-9);
}
