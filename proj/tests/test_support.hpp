#pragma once

// Shared fixtures for the unit tests: scratch directories, small synthetic
// datasets and a term-by-term likelihood evaluator used as an oracle.

#include "mixlogit/mixlogit.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mixlogit::testing {

class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mixlogit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Code of the mixlogit::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<ErrorCode> error_code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

#define EXPECT_MIXLOGIT_ERROR(stmt, ec) \
    EXPECT_EQ(::mixlogit::testing::error_code_of([&] { stmt; }), std::optional<::mixlogit::ErrorCode>(ec))

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Design skeleton for `n` synthetic respondents.
inline ChoiceDataset skeleton(std::size_t n, int tasks, std::uint64_t seed,
                              DesignStrategy strategy = DesignStrategy::OrthogonalMainEffects)
{
    DesignPlan plan;
    plan.strategy = strategy;
    plan.tasks_per_respondent = tasks;
    return generate_design(plan, generate_population(n, seed), seed + 1);
}

/// Random parameter vector: values in [-1, 1], scales in [0.2, 1.2].
inline std::vector<double> random_theta(const ModelSpec& spec, std::mt19937_64& rng)
{
    const ParameterLayout layout(spec);
    std::uniform_real_distribution<double> value(-1.0, 1.0), scale(0.2, 1.2);
    std::vector<double> theta(layout.size());
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const auto role = layout[p].role;
        const bool is_scale = role == ParamRole::DiagonalScale || role == ParamRole::ErrorScale ||
                              (role == ParamRole::Cholesky && layout[p].row == layout[p].col);
        theta[p] = is_scale ? scale(rng) : value(rng);
        if (role == ParamRole::Cholesky && layout[p].row != layout[p].col) theta[p] *= 0.5;
    }
    return theta;
}

/// Synthetic dataset simulated from `spec` at a random parameter vector.
inline ChoiceDataset synthetic(const ModelSpec& spec, std::size_t n, int tasks, std::uint64_t seed,
                               std::vector<double>* truth = nullptr)
{
    std::mt19937_64 rng(seed);
    auto theta = random_theta(spec, rng);
    // Cost terms enter as -exp(alpha); keep them moderate.
    const ParameterLayout layout(spec);
    for (std::size_t c = 0; c < spec.coefficients.size(); ++c)
        if (spec.coefficients[c].transform != Transform::Identity) theta[layout.value_index(c)] -= 1.0;
    auto data = simulate_choices(skeleton(n, tasks, seed), spec, theta, seed + 2);
    if (truth) *truth = theta;
    return data;
}

/// Independent expansion of the simulated panel log-likelihood. Parameters
/// are looked up by name, every utility term is written out per alternative
/// and probabilities are averaged in linear space with long double.
inline double brute_force_loglik(const ModelSpec& spec, const std::vector<double>& theta, const ChoiceDataset& data,
                                 const DrawTensor& draws)
{
    const ParameterLayout layout(spec);
    auto param = [&](const std::string& name) {
        auto i = layout.find(name);
        if (!i) throw std::runtime_error("no parameter " + name);
        return theta[*i];
    };
    auto psi = [](Transform t, double a) {
        switch (t) {
        case Transform::Identity: return a;
        case Transform::Exponential: return std::exp(a);
        case Transform::NegativeExponential: return -std::exp(a);
        }
        return a;
    };
    const std::size_t R = spec.draw_dimension() == 0 ? 1 : draws.draws;
    long double total = 0.0L;
    for (std::size_t n = 0; n < data.num_respondents(); ++n) {
        const auto& resp = data.respondents[n];
        long double avg = 0.0L;
        for (std::size_t r = 0; r < R; ++r) {
            auto z = [&](const std::string& label) { return draws.at(n, r, *draws.label_index(label)); };
            std::vector<double> beta(spec.coefficients.size());
            for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
                const auto& d = spec.coefficients[c];
                double a = param(d.name);
                if (d.is_random() && !d.block) a += param(d.name + ".sd") * z(d.name);
                if (d.block) {
                    const auto& blk = spec.blocks[*d.block];
                    std::size_t i = 0;
                    while (blk.members[i] != c) ++i;
                    for (std::size_t j = 0; j <= i; ++j)
                        a += param(blk.name + ".L[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]") *
                             z(spec.coefficients[blk.members[j]].name);
                }
                beta[c] = psi(d.transform, a);
            }
            long double panel = 1.0L;
            for (std::size_t t = data.task_begin[n]; t < data.task_begin[n + 1]; ++t) {
                const auto& task = data.tasks[t];
                std::vector<long double> V;
                for (const auto& alt : task.alternatives) {
                    long double v = 0.0L;
                    for (std::size_t c = 0; c < spec.coefficients.size(); ++c) {
                        const auto& b = spec.coefficients[c].binding;
                        if (!b.housing && !b.modes.empty() &&
                            std::find(b.modes.begin(), b.modes.end(), alt.mode) == b.modes.end())
                            continue;
                        double x = alt.values[*data.attribute_index(b.attribute)] * b.scale;
                        if (b.divide_by_income) x /= resp.weekly_household_income;
                        for (const auto& cov : b.interactions) x *= covariate_value(resp, cov);
                        v += static_cast<long double>(x) * beta[c];
                    }
                    for (const auto& a : spec.intercepts) {
                        if (a.mode != alt.mode) continue;
                        v += param(a.name + ".baseline");
                        for (const auto& cov : a.covariates) v += param(a.name + "." + cov) * covariate_value(resp, cov);
                    }
                    for (const auto& e : spec.error_components)
                        if (e.mode == alt.mode) v += param(e.name + ".tau") * z(e.name);
                    V.push_back(v);
                }
                long double denom = 0.0L;
                for (auto v : V) denom += std::exp(v);
                panel *= std::exp(V[static_cast<std::size_t>(task.chosen)]) / denom;
            }
            avg += panel;
        }
        total += std::log(avg / static_cast<long double>(R));
    }
    return static_cast<double>(total);
}

/// A small spec touching every transform, a diagonal scale, a Cholesky block,
/// error components and intercept shifters.
inline const char* kDenseSpec = R"(model = MMNL2
name = dense

[coefficients]
hcost: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=owner
hcost_r: attribute=h_cost applies=housing kind=fixed transform=neg_exp divide_by=income scale=10 interact=renter
rooms: attribute=h_rooms applies=housing kind=random
separate: attribute=h_separate applies=housing kind=fixed
cost: attribute=m_cost applies=modes kind=random transform=neg_exp
time_car: attribute=m_time applies=mode:1 kind=random
time_sdc: attribute=m_time applies=mode:2 kind=random
time_pt: attribute=m_time applies=mode:3 kind=random
congestion: attribute=m_congestion applies=mode:1,2 kind=random transform=exp scale=-1

[error_components]
ec_car: mode=1
ec_pt: mode=3

[blocks]
time: members=time_car,time_sdc,time_pt

[intercepts]
asc_sdc: mode=2 covariates=female,ridehail
asc_pt: mode=3 covariates=children
)";

} // namespace mixlogit::testing
