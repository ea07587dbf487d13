#pragma once

// Pivoted stated-choice design and choice simulation from known parameters.
//
// Each task pairs two housing options; every housing option carries its own
// commute attributes for the three modes. Housing cost and travel time are
// pivoted around the respondent's status quo, travel cost is a per-minute rate
// times the hypothetical travel time.

#include "mixlogit/dataset.hpp"
#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/mslestim.hpp"
#include "mixlogit/simlik.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mixlogit {

// ---------------------------------------------------------------------------
// Pivoting
// ---------------------------------------------------------------------------

struct PivotRule {
    double lower = 0.0; ///< clamp bounds on the reference value
    double upper = std::numeric_limits<double>::infinity();
    std::array<double, 3> factors{};
};

inline const PivotRule kHousingCostPivot{150.0, 6500.0, {0.95, 1.00, 1.05}};
inline const PivotRule kTravelTimePivot{30.0, 80.0, {1.05, 1.25, 1.5}};
/// AUD per minute of hypothetical travel time; no clamping.
inline const PivotRule kTravelCostPivot{0.0, std::numeric_limits<double>::infinity(), {0.100, 0.125, 0.150}};

inline std::array<double, 3> pivot_levels(const PivotRule& rule, double status_quo)
{
    if (!(status_quo > 0.0) || !std::isfinite(status_quo))
        throw Error(ErrorCode::NonPositiveStatusQuo, "status-quo value must be positive, got " + std::to_string(status_quo));
    const double ref = std::min(rule.upper, std::max(rule.lower, status_quo));
    return {ref * rule.factors[0], ref * rule.factors[1], ref * rule.factors[2]};
}

// ---------------------------------------------------------------------------
// Orthogonal array
// ---------------------------------------------------------------------------

inline constexpr std::size_t kArrayRuns = 27;
inline constexpr std::size_t kArrayColumns = 13;

/// Three-level orthogonal main-effects array with 27 runs and 13 columns.
/// Run (a,b,c) in Z3^3; column j is the linear form v_j . (a,b,c) mod 3 over
/// the 13 projective points v_j (first non-zero coordinate equal to 1), so
/// every pair of columns shows each level pair exactly three times.
inline const std::array<std::array<int, kArrayColumns>, kArrayRuns>& orthogonal_array_27()
{
    static const auto table = [] {
        std::vector<std::array<int, 3>> forms;
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                for (int z = 0; z < 3; ++z) {
                    const int first = x != 0 ? x : (y != 0 ? y : z);
                    if (first == 1) forms.push_back({x, y, z});
                }
        std::array<std::array<int, kArrayColumns>, kArrayRuns> t{};
        for (int run = 0; run < 27; ++run) {
            const int a = run / 9, b = (run / 3) % 3, c = run % 3;
            for (std::size_t j = 0; j < kArrayColumns; ++j)
                t[static_cast<std::size_t>(run)][j] = (forms[j][0] * a + forms[j][1] * b + forms[j][2] * c) % 3;
        }
        return t;
    }();
    return table;
}

// ---------------------------------------------------------------------------
// Plan and population
// ---------------------------------------------------------------------------

enum class DesignStrategy { OrthogonalMainEffects, RandomBalanced };

inline std::string_view to_string(DesignStrategy s)
{
    return s == DesignStrategy::OrthogonalMainEffects ? "oa" : "random";
}

/// Attribute groups, each assigned to its own copy of the 27-run array in
/// listed order (attribute i -> column i).
inline const std::vector<std::string>& housing_design_attributes()
{
    static const std::vector<std::string> v = {"cost", "rooms", "dwelling", "neighbourhood", "services", "walk", "age"};
    return v;
}

inline const std::vector<std::string>& mobility_design_attributes()
{
    static const std::vector<std::string> v = {"time_car", "time_sdc", "time_pt", "rate_car",
                                               "rate_sdc", "rate_pt",  "congestion_car", "congestion_sdc"};
    return v;
}

struct LevelTables {
    std::array<double, 3> rooms{0, 1, 2};
    std::array<std::string, 3> dwelling{"unit", "townhouse", "separate house"};
    std::array<std::string, 3> neighbourhood{"single-family", "mixed low-rise", "high-rise"};
    std::array<std::string, 3> services{"none", "basic", "basic+specialty"};
    std::array<double, 3> walk_minutes{10, 20, 30};
    std::array<double, 3> congestion{0.10, 0.35, 0.65}; ///< share of travel time, car modes only
    std::array<std::string, 3> development_age{"0-5", "5-15", ">15"};
};

struct DesignPlan {
    DesignStrategy strategy = DesignStrategy::OrthogonalMainEffects;
    int tasks_per_respondent = 8;
    std::vector<std::string> housing_columns = housing_design_attributes();
    std::vector<std::string> mobility_columns = mobility_design_attributes();
    LevelTables levels;
};

/// A respondent together with the status quo the design pivots around.
struct PopulationMember {
    Respondent respondent;
    double housing_cost = 0.0;    ///< AUD/week
    double commute_minutes = 0.0; ///< one way
};

/// Sampling marginals of the synthetic population; characteristics are
/// drawn independently.
struct PopulationMarginals {
    std::array<double, 3> age{0.172, 0.533, 0.283}; ///< 18-29, 30-49, 50+
    double female = 0.471;
    /// Income groups 0-799, 800-1599, 1600-2499, 2500+ over survey bands 1-5, 6, 7-8, 9-12.
    std::array<double, 4> income_group{0.149, 0.288, 0.312, 0.252};
    double degree = 0.566;
    double children = 0.338;
    double license = 0.914;
    double ridehail = 0.584;
    double owner = 0.551;
    /// Quartile edges of weekly housing cost and one-way commute minutes.
    std::array<double, 5> housing_cost_edges{100, 300, 430, 600, 1200};
    std::array<double, 5> commute_edges{5, 20, 30, 50, 150};
};

namespace detail {

inline std::mt19937_64 stream_rng(std::uint64_t master, std::uint64_t stream, std::uint32_t purpose)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), purpose};
    return std::mt19937_64(seq);
}

inline std::size_t categorical(std::mt19937_64& rng, std::span<const double> probs)
{
    double u = open_uniform(rng);
    double total = 0.0;
    for (double p : probs) total += p;
    u *= total;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (u < probs[i]) return i;
        u -= probs[i];
    }
    return probs.size() - 1;
}

inline double quartile_value(std::mt19937_64& rng, const std::array<double, 5>& edges)
{
    const auto q = static_cast<std::size_t>(std::min(3.0, std::floor(4.0 * open_uniform(rng))));
    return edges[q] + (edges[q + 1] - edges[q]) * open_uniform(rng);
}

} // namespace detail

inline std::vector<PopulationMember> generate_population(std::size_t count, std::uint64_t seed,
                                                        const PopulationMarginals& m = {})
{
    static constexpr std::array<std::array<int, 2>, 4> group_bands{{{1, 5}, {6, 6}, {7, 8}, {9, 12}}};
    std::vector<PopulationMember> out(count);
    const int width = std::max<int>(5, static_cast<int>(std::to_string(count).size()));
    for (std::size_t n = 0; n < count; ++n) {
        auto rng = detail::stream_rng(seed, n, 1);
        auto& p = out[n];
        auto& r = p.respondent;
        std::string id = std::to_string(n + 1);
        r.id = "R" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
        auto flag = [&](double prob) { return open_uniform(rng) < prob; };
        r.age_band = static_cast<AgeBand>(detail::categorical(rng, m.age));
        r.female = flag(m.female);
        const auto g = group_bands[detail::categorical(rng, m.income_group)];
        r.income_band = g[0] + static_cast<int>(std::floor(open_uniform(rng) * (g[1] - g[0] + 1)));
        r.weekly_household_income = encode_income(r.income_band);
        r.degree_holder = flag(m.degree);
        r.children_present = flag(m.children);
        r.has_license = flag(m.license);
        r.ridehail_user = flag(m.ridehail);
        r.is_owner = flag(m.owner);
        p.housing_cost = detail::quartile_value(rng, m.housing_cost_edges);
        p.commute_minutes = detail::quartile_value(rng, m.commute_edges);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Design generation
// ---------------------------------------------------------------------------

/// Attribute columns of generated datasets. Raw level columns are kept next
/// to the dummies the bundled specs bind.
inline const std::vector<std::string>& design_attribute_names()
{
    static const std::vector<std::string> v = {
        "h_cost",     "h_rooms",         "h_dwelling", "h_neighbourhood", "h_services",     "h_walk",
        "h_age",      "h_separate",      "h_single_family", "h_old15",    "h_services_any", "h_walk10",
        "m_time",     "m_cost",          "m_congestion"};
    return v;
}

namespace detail {

/// Level index (0..2) per attribute, per task, per housing option.
using LevelGrid = std::vector<std::array<std::vector<int>, kHousingOptions>>;

inline void check_columns(const std::vector<std::string>& cols, const std::vector<std::string>& known,
                          std::string_view group)
{
    if (cols.size() > kArrayColumns)
        throw Error(ErrorCode::TooManyAttributesForArray, std::string(group) + " group has " +
                                                              std::to_string(cols.size()) +
                                                              " attributes, the 27-run array has 13 columns");
    for (const auto& c : known)
        if (std::find(cols.begin(), cols.end(), c) == cols.end())
            throw Error(ErrorCode::InvalidValue, std::string(group) + " column map lacks attribute '" + c + "'");
}

inline std::size_t column_of(const std::vector<std::string>& cols, std::string_view name)
{
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
}

/// Orthogonal strategy: consecutive runs from a random start; the second
/// housing option shifts every level by one (mod 3).
inline LevelGrid oa_levels(std::size_t n_attr, int tasks, std::mt19937_64& rng)
{
    const auto& oa = orthogonal_array_27();
    const auto start = static_cast<std::size_t>(rng() % kArrayRuns);
    LevelGrid g(static_cast<std::size_t>(tasks));
    for (int t = 0; t < tasks; ++t) {
        const auto& run = oa[(start + static_cast<std::size_t>(t)) % kArrayRuns];
        for (int k = 0; k < kHousingOptions; ++k) {
            auto& v = g[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
            v.resize(n_attr);
            for (std::size_t a = 0; a < n_attr; ++a) v[a] = (run[a] + k) % 3;
        }
    }
    return g;
}

/// Random strategy: each attribute's levels are balanced over the
/// respondent's tasks x options profiles, remainder filled at random.
inline LevelGrid balanced_levels(std::size_t n_attr, int tasks, std::mt19937_64& rng)
{
    const std::size_t slots = static_cast<std::size_t>(tasks) * kHousingOptions;
    LevelGrid g(static_cast<std::size_t>(tasks));
    for (auto& task : g)
        for (auto& v : task) v.resize(n_attr);
    std::vector<int> col(slots);
    for (std::size_t a = 0; a < n_attr; ++a) {
        for (std::size_t s = 0; s < slots; ++s) col[s] = static_cast<int>(s % 3);
        // Slots past the last full cycle get uniformly random levels.
        for (std::size_t s = slots - slots % 3; s < slots; ++s) col[s] = static_cast<int>(rng() % 3);
        std::shuffle(col.begin(), col.end(), rng);
        for (std::size_t s = 0; s < slots; ++s) g[s / kHousingOptions][s % kHousingOptions][a] = col[s];
    }
    return g;
}

} // namespace detail

/// Design skeleton (no choices) for the given population.
inline ChoiceDataset generate_design(const DesignPlan& plan, const std::vector<PopulationMember>& population,
                                     std::uint64_t seed)
{
    detail::check_columns(plan.housing_columns, housing_design_attributes(), "housing");
    detail::check_columns(plan.mobility_columns, mobility_design_attributes(), "mobility");
    if (plan.tasks_per_respondent < 1) throw Error(ErrorCode::InvalidValue, "tasks per respondent must be positive");

    const auto& hc = plan.housing_columns;
    const auto& mc = plan.mobility_columns;
    const auto& L = plan.levels;
    using detail::column_of;
    const std::size_t c_cost = column_of(hc, "cost"), c_rooms = column_of(hc, "rooms"),
                      c_dwell = column_of(hc, "dwelling"), c_nbh = column_of(hc, "neighbourhood"),
                      c_serv = column_of(hc, "services"), c_walk = column_of(hc, "walk"), c_age = column_of(hc, "age");
    const std::array<std::size_t, kModes> c_time{column_of(mc, "time_car"), column_of(mc, "time_sdc"),
                                                 column_of(mc, "time_pt")};
    const std::array<std::size_t, kModes> c_rate{column_of(mc, "rate_car"), column_of(mc, "rate_sdc"),
                                                 column_of(mc, "rate_pt")};
    const std::array<std::size_t, 2> c_cong{column_of(mc, "congestion_car"), column_of(mc, "congestion_sdc")};

    ChoiceDataset ds;
    ds.attribute_names = design_attribute_names();
    ds.provenance = "design:" + std::string(to_string(plan.strategy)) + ":seed=" + std::to_string(seed);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t n = 0; n < population.size(); ++n) {
        const auto& member = population[n];
        ds.respondents.push_back(member.respondent);
        auto rng = detail::stream_rng(seed, n, 2);
        const bool oa = plan.strategy == DesignStrategy::OrthogonalMainEffects;
        const auto hg = oa ? detail::oa_levels(hc.size(), plan.tasks_per_respondent, rng)
                           : detail::balanced_levels(hc.size(), plan.tasks_per_respondent, rng);
        const auto mg = oa ? detail::oa_levels(mc.size(), plan.tasks_per_respondent, rng)
                           : detail::balanced_levels(mc.size(), plan.tasks_per_respondent, rng);
        const auto cost_levels = pivot_levels(kHousingCostPivot, member.housing_cost);
        const auto time_levels = pivot_levels(kTravelTimePivot, member.commute_minutes);
        const auto universe = build_alternative_universe(member.respondent);

        for (int t = 0; t < plan.tasks_per_respondent; ++t) {
            ChoiceTask task;
            task.respondent = n;
            task.task_index = t + 1;
            for (const auto& [k, l] : universe) {
                const auto& h = hg[static_cast<std::size_t>(t)][static_cast<std::size_t>(k - 1)];
                const auto& m = mg[static_cast<std::size_t>(t)][static_cast<std::size_t>(k - 1)];
                const int dwelling = h[c_dwell], nbh = h[c_nbh], serv = h[c_serv], walk = h[c_walk], age = h[c_age];
                const double minutes = time_levels[static_cast<std::size_t>(m[c_time[l - 1]])];
                const double cost = pivot_levels(kTravelCostPivot, minutes)[static_cast<std::size_t>(m[c_rate[l - 1]])];
                Alternative alt;
                alt.housing = k;
                alt.mode = l;
                alt.values = {
                    cost_levels[static_cast<std::size_t>(h[c_cost])],
                    L.rooms[static_cast<std::size_t>(h[c_rooms])],
                    static_cast<double>(dwelling),
                    static_cast<double>(nbh),
                    static_cast<double>(serv),
                    serv != 0 ? L.walk_minutes[static_cast<std::size_t>(walk)] : nan,
                    static_cast<double>(age),
                    dwelling == 2 ? 1.0 : 0.0,
                    nbh == 0 ? 1.0 : 0.0,
                    age == 2 ? 1.0 : 0.0,
                    serv != 0 ? 1.0 : 0.0,
                    serv != 0 && walk == 0 ? 1.0 : 0.0,
                    minutes / 60.0,
                    cost,
                    l <= 2 ? L.congestion[static_cast<std::size_t>(m[c_cong[static_cast<std::size_t>(l - 1)]])] : nan,
                };
                task.alternatives.push_back(std::move(alt));
            }
            ds.tasks.push_back(std::move(task));
        }
    }
    ds.index_tasks();
    return ds;
}

// ---------------------------------------------------------------------------
// Choice simulation
// ---------------------------------------------------------------------------

struct TruthParameters {
    std::string spec_name;
    std::vector<std::string> names;
    std::vector<double> theta;
};

inline nlohmann::json to_json(const TruthParameters& t)
{
    return {{"spec", t.spec_name}, {"names", t.names}, {"theta", t.theta}};
}

inline TruthParameters truth_from_json(const nlohmann::json& j)
{
    TruthParameters t;
    t.spec_name = j.value("spec", "");
    t.names = j.at("names").get<std::vector<std::string>>();
    t.theta = j.at("theta").get<std::vector<double>>();
    if (t.names.size() != t.theta.size()) throw Error(ErrorCode::DimensionMismatch, "truth names/theta length differ");
    return t;
}

/// Lays named truth values out for `spec`.
inline std::vector<double> truth_theta(const ModelSpec& spec, const TruthParameters& truth)
{
    const ParameterLayout layout(spec);
    std::vector<double> theta(layout.size());
    for (std::size_t p = 0; p < layout.size(); ++p) {
        auto it = std::find(truth.names.begin(), truth.names.end(), layout[p].name);
        if (it == truth.names.end())
            throw Error(ErrorCode::MissingCoefficient, "truth has no value for '" + layout[p].name + "'");
        theta[p] = truth.theta[static_cast<std::size_t>(it - truth.names.begin())];
    }
    return theta;
}

/// Standard Gumbel variate.
inline double gumbel(std::mt19937_64& rng) { return -std::log(-std::log(open_uniform(rng))); }

/// Draws each respondent's tastes and error components once, adds Gumbel
/// noise per task and records the utility-maximizing alternative.
inline ChoiceDataset simulate_choices(const ChoiceDataset& skeleton, const ModelSpec& spec,
                                      std::span<const double> theta, std::uint64_t seed)
{
    ChoiceDataset out = skeleton;
    for (const auto& c : spec.coefficients)
        if (!out.attribute_index(c.binding.attribute))
            throw Error(ErrorCode::BindingMismatch, "skeleton has no attribute '" + c.binding.attribute + "'");
    const std::size_t D = spec.draw_dimension();
    std::vector<double> z(D);
    for (std::size_t n = 0; n < out.respondents.size(); ++n) {
        auto rng = detail::stream_rng(seed, n, 3);
        for (auto& v : z) v = standard_normal(rng);
        const auto realized = realize_coefficients(spec, theta, z);
        for (std::size_t t = out.task_begin[n]; t < out.task_begin[n + 1]; ++t) {
            auto V = assemble_utility(spec, theta, out, t, realized);
            int best = -1;
            double best_u = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < V.size(); ++j) {
                if (!std::isfinite(V[j]))
                    throw Error(ErrorCode::BindingMismatch, "non-finite utility for respondent '" +
                                                                out.respondents[n].id + "' task " +
                                                                std::to_string(out.tasks[t].task_index));
                const double u = V[j] + gumbel(rng);
                if (u > best_u) {
                    best_u = u;
                    best = static_cast<int>(j);
                }
            }
            out.tasks[t].chosen = best;
        }
    }
    out.provenance = skeleton.provenance + ";simulated:" + spec.name + ":seed=" + std::to_string(seed);
    return out;
}

inline ChoiceDataset simulate_choices(const ChoiceDataset& skeleton, const ModelSpec& spec,
                                      const TruthParameters& truth, std::uint64_t seed)
{
    return simulate_choices(skeleton, spec, truth_theta(spec, truth), seed);
}

/// Record written next to a simulated dataset.
inline nlohmann::json truth_record(const TruthParameters& truth, const DesignPlan& plan, std::uint64_t seed,
                                   std::size_t respondents)
{
    nlohmann::json j = to_json(truth);
    j["seed"] = seed;
    j["design"] = std::string(to_string(plan.strategy));
    j["tasks_per_respondent"] = plan.tasks_per_respondent;
    j["respondents"] = respondents;
    j["housing_columns"] = plan.housing_columns;
    j["mobility_columns"] = plan.mobility_columns;
    return j;
}

} // namespace mixlogit
