#pragma once

// Command-line front end: simulate, estimate, compare, vot, draws-dump.
// Exit codes: 0 success, 2 usage or validation error, 3 non-convergence.

#include "mixlogit/bundled_specs.hpp"
#include "mixlogit/dataset.hpp"
#include "mixlogit/designsim.hpp"
#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/mslestim.hpp"
#include "mixlogit/postfit.hpp"
#include "mixlogit/qmc.hpp"
#include "mixlogit/reference_estimates.hpp"
#include "mixlogit/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace mixlogit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotConverged = 3;

struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, std::string> input_hashes;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"command", command},         {"arguments", arguments},
                {"seeds", seeds},             {"input_hashes", input_hashes},
                {"outputs", outputs},         {"toolkit_version", std::string(kToolkitVersion)},
                {"wall_seconds", wall_seconds}};
    }
};

namespace detail {

struct CliState {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = ".";

    // simulate
    std::string sim_spec = "paper_mmnl2";
    std::string sim_truth;
    std::size_t sim_n = 512;
    int sim_tasks = 8;
    std::string sim_design = "oa";
    std::string sim_output = "synth.csv";

    // estimate
    std::string est_data;
    std::string est_spec;
    std::size_t est_draws = 1024;
    int est_max_iter = 500;
    double est_tol_grad = 1e-6;
    std::size_t est_kr_draws = kDefaultKrDraws;
    int est_restarts = 0;
    std::string est_start;
    bool est_no_cov = false;

    // compare
    std::vector<std::string> cmp_results;

    // vot
    std::string vot_result;
    double vot_owner = kDefaultOwnerIncome;
    double vot_renter = kDefaultRenterIncome;
    std::size_t vot_kr_draws = kDefaultKrDraws;

    // draws-dump
    std::string dd_spec = "paper_mmnl2";
    std::size_t dd_n = 1;
    std::size_t dd_draws = 1024;
    std::string dd_output = "draws.bin";
};

inline std::string out_path(const CliState& s, const std::string& file)
{
    std::filesystem::create_directories(s.out_dir);
    return (std::filesystem::path(s.out_dir) / file).string();
}

inline void write_manifest(const CliState& s, RunManifest& m, std::chrono::steady_clock::time_point start)
{
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(out_path(s, m.command + "_manifest.json"), m.to_json().dump(2) + "\n");
}

inline int cmd_simulate(const CliState& s, RunManifest& m, std::ostream& out)
{
    const ModelSpec spec = load_spec(s.sim_spec);
    TruthParameters truth;
    truth.spec_name = spec.name;
    truth.names = ParameterLayout(spec).names();
    if (!s.sim_truth.empty()) {
        const auto text = read_file(s.sim_truth);
        m.input_hashes[s.sim_truth] = fnv1a_hex(text);
        truth.theta = truth_theta(spec, truth_from_json(nlohmann::json::parse(text)));
    } else {
        truth.theta = reference_theta(spec);
    }
    DesignPlan plan;
    if (s.sim_design == "oa") plan.strategy = DesignStrategy::OrthogonalMainEffects;
    else if (s.sim_design == "random") plan.strategy = DesignStrategy::RandomBalanced;
    else throw Error(ErrorCode::InvalidValue, "--design must be 'oa' or 'random'");
    plan.tasks_per_respondent = s.sim_tasks;

    m.seeds["population"] = s.seed;
    m.seeds["design"] = s.seed + 1;
    m.seeds["choices"] = s.seed + 2;
    const auto pop = generate_population(s.sim_n, s.seed);
    const auto skeleton = generate_design(plan, pop, s.seed + 1);
    const auto data = simulate_choices(skeleton, spec, truth.theta, s.seed + 2);

    const auto csv = out_path(s, s.sim_output);
    write_choice_data(data, csv);
    const auto truth_file = out_path(s, "truth.json");
    write_file(truth_file, truth_record(truth, plan, s.seed, s.sim_n).dump(2) + "\n");
    m.outputs = {csv, truth_file};
    out << "wrote " << csv << " (" << data.num_respondents() << " respondents, " << data.num_tasks() << " tasks) and "
        << truth_file << "\n";
    return kExitOk;
}

inline int cmd_estimate(const CliState& s, RunManifest& m, std::ostream& out, std::ostream& err)
{
    const ModelSpec spec = load_spec(s.est_spec);
    const std::string data_text = read_file(s.est_data);
    const std::string data_hash = fnv1a_hex(data_text);
    m.input_hashes[s.est_data] = data_hash;
    const ChoiceDataset data = load_choice_data(s.est_data);

    std::size_t R = s.est_draws;
    if (spec.draw_dimension() == 0 && R != 1) {
        err << "warning: " << spec.name << " has no random terms; using 1 draw instead of " << R << "\n";
        R = 1;
    }
    m.seeds["draws"] = s.seed;
    const DrawTensor draws =
        spec.draw_dimension() == 0 ? DrawTensor{} : allocate_draws(spec, data.num_respondents(), R, s.seed);

    EstimationOptions opt;
    opt.max_iterations = s.est_max_iter;
    opt.tol_gradient = s.est_tol_grad;
    opt.threads = s.threads;
    opt.compute_covariance = !s.est_no_cov;
    if (!s.est_start.empty()) {
        const auto text = read_file(s.est_start);
        m.input_hashes[s.est_start] = fnv1a_hex(text);
        const auto prior = result_from_json(nlohmann::json::parse(text));
        opt.start = embed_start(spec, prior.names, prior.theta, opt.initial_scale);
    }

    EstimationResult best = estimate(spec, data, draws, opt);
    best.seed = s.seed;
    if (s.est_restarts > 0) {
        // Perturbed restarts around the first solution; keep the best optimum.
        m.seeds["restarts"] = s.seed + 1;
        std::mt19937_64 rng(s.seed + 1);
        for (int k = 0; k < s.est_restarts; ++k) {
            EstimationOptions o = opt;
            std::vector<double> x = best.theta;
            for (auto& v : x) v += 0.1 * standard_normal(rng);
            o.start = x;
            auto r = estimate(spec, data, draws, o);
            r.seed = s.seed;
            if (r.status == ConvergenceStatus::Converged && r.loglik > best.loglik) best = std::move(r);
        }
    }

    std::vector<DerivedSd> derived;
    if (!spec.blocks.empty()) derived = block_standard_deviations(spec, best, s.est_kr_draws, s.seed);
    const ResultContext ctx{to_spec_text(spec), data_hash};
    const auto json_path = out_path(s, spec.name + "_result.json");
    const auto md_path = out_path(s, spec.name + "_result.md");
    auto j = to_json(best, ctx);
    if (!derived.empty()) {
        nlohmann::json d = nlohmann::json::array();
        for (const auto& x : derived)
            d.push_back({{"name", x.name}, {"estimate", x.value.point}, {"std_error", x.value.sd},
                         {"lower", x.value.lower}, {"upper", x.value.upper}});
        j["derived_standard_deviations"] = d;
    }
    write_file(json_path, j.dump(2) + "\n");
    write_file(md_path, estimates_markdown(best, derived));
    m.outputs = {json_path, md_path};
    out << estimates_markdown(best, derived);
    if (best.status != ConvergenceStatus::Converged) {
        err << "estimation did not converge: " << to_string(best.status) << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

inline int cmd_compare(const CliState& s, RunManifest& m, std::ostream& out, std::ostream& err)
{
    if (s.cmp_results.size() < 2) {
        err << "compare needs at least two result files\n";
        return kExitUsage;
    }
    std::vector<EstimationResult> results;
    std::string hash;
    for (const auto& path : s.cmp_results) {
        const auto text = read_file(path);
        m.input_hashes[path] = fnv1a_hex(text);
        ResultContext ctx;
        results.push_back(result_from_json(nlohmann::json::parse(text), &ctx));
        if (results.size() == 1) hash = ctx.data_hash;
        else if (ctx.data_hash != hash)
            throw Error(ErrorCode::DataHashMismatch, "'" + path + "' was estimated on different data (" + ctx.data_hash +
                                                         " vs " + hash + ")");
    }
    const auto rep = compare_models(results);
    const auto md = comparison_markdown(rep);
    const auto json_path = out_path(s, "comparison.json");
    const auto md_path = out_path(s, "comparison.md");
    write_file(json_path, to_json(rep).dump(2) + "\n");
    write_file(md_path, md);
    m.outputs = {json_path, md_path};
    out << md;
    return kExitOk;
}

inline int cmd_vot(const CliState& s, RunManifest& m, std::ostream& out)
{
    const auto text = read_file(s.vot_result);
    m.input_hashes[s.vot_result] = fnv1a_hex(text);
    ResultContext ctx;
    const auto result = result_from_json(nlohmann::json::parse(text), &ctx);
    const ModelSpec spec = ctx.spec_text.empty() ? load_spec(result.spec_name) : parse_spec_text(ctx.spec_text);
    VotOptions o;
    o.owner_income = s.vot_owner;
    o.renter_income = s.vot_renter;
    o.kr_draws = s.vot_kr_draws;
    o.seed = s.seed;
    m.seeds["krinsky_robb"] = s.seed;
    const auto rows = vot_table(spec, result, o);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back(to_json(r));
    const auto md = vot_markdown(rows, result.spec_name);
    const auto json_path = out_path(s, result.spec_name + "_vot.json");
    const auto md_path = out_path(s, result.spec_name + "_vot.md");
    write_file(json_path, nlohmann::json{{"spec", result.spec_name}, {"kr_draws", o.kr_draws}, {"seed", o.seed}, {"rows", j}}.dump(2) + "\n");
    write_file(md_path, md);
    m.outputs = {json_path, md_path};
    out << md;
    return kExitOk;
}

inline int cmd_draws_dump(const CliState& s, RunManifest& m, std::ostream& out)
{
    const ModelSpec spec = load_spec(s.dd_spec);
    m.seeds["draws"] = s.seed;
    const auto t = allocate_draws(spec, s.dd_n, s.dd_draws, s.seed);
    const auto path = out_path(s, s.dd_output);
    write_draws(t, path);
    m.outputs = {path};
    out << "wrote " << path << " (" << t.respondents << " x " << t.draws << " x " << t.dim << ", " << t.nudged
        << " nudged)\n";
    return kExitOk;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    detail::CliState s;
    CLI::App app{"Panel mixed logit estimation toolkit", "mixlogit"};
    app.require_subcommand(1);
    app.add_option("--seed", s.seed, "Master seed")->capture_default_str();
    app.add_option("--threads", s.threads, "Worker threads (default: MIXLOGIT_THREADS or 1)");
    app.add_option("--out-dir", s.out_dir, "Output directory")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Generate a design and simulate choices");
    sim->add_option("--spec", s.sim_spec, "Bundled spec name or spec file")->capture_default_str();
    sim->add_option("--truth", s.sim_truth, "JSON with names/theta (default: bundled reference values)");
    sim->add_option("--n", s.sim_n, "Respondents")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--tasks", s.sim_tasks, "Tasks per respondent")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--design", s.sim_design, "oa or random")->capture_default_str()->check(CLI::IsMember({"oa", "random"}));
    sim->add_option("--output", s.sim_output, "CSV file name inside --out-dir")->capture_default_str();

    auto* est = app.add_subcommand("estimate", "Maximum simulated likelihood estimation");
    est->add_option("--data", s.est_data, "Choice data CSV")->required();
    est->add_option("--spec", s.est_spec, "Bundled spec name or spec file")->required();
    est->add_option("--draws", s.est_draws, "Draws per respondent")->capture_default_str()->check(CLI::PositiveNumber);
    est->add_option("--max-iter", s.est_max_iter, "Maximum BFGS iterations")->capture_default_str();
    est->add_option("--tol-grad", s.est_tol_grad, "Gradient infinity-norm tolerance")->capture_default_str();
    est->add_option("--kr-draws", s.est_kr_draws, "Krinsky-Robb draws for derived standard deviations")->capture_default_str();
    est->add_option("--restarts", s.est_restarts, "Perturbed restarts")->capture_default_str();
    est->add_option("--start", s.est_start, "Result JSON whose estimates seed the start (matched by name)");
    est->add_flag("--no-covariance", s.est_no_cov, "Skip the Hessian");

    auto* cmp = app.add_subcommand("compare", "Model comparison table");
    cmp->add_option("results", s.cmp_results, "Result JSON files")->required();

    auto* vot = app.add_subcommand("vot", "Value-of-time distributions");
    vot->add_option("--result", s.vot_result, "Result JSON")->required();
    vot->add_option("--income-owner", s.vot_owner, "Owner weekly household income")->capture_default_str();
    vot->add_option("--income-renter", s.vot_renter, "Renter weekly household income")->capture_default_str();
    vot->add_option("--kr-draws", s.vot_kr_draws, "Krinsky-Robb draws")->capture_default_str();

    auto* dd = app.add_subcommand("draws-dump", "Write the standard-normal draw tensor");
    dd->add_option("--spec", s.dd_spec, "Spec whose draw labels to allocate")->capture_default_str();
    dd->add_option("--n", s.dd_n, "Respondents")->capture_default_str();
    dd->add_option("--draws", s.dd_draws, "Draws per respondent")->capture_default_str()->check(CLI::PositiveNumber);
    dd->add_option("--output", s.dd_output, "File name inside --out-dir")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    for (int i = 1; i < argc; ++i) m.arguments.emplace_back(argv[i]);
    try {
        int code = kExitOk;
        if (sim->parsed()) {
            m.command = "simulate";
            code = detail::cmd_simulate(s, m, out);
        } else if (est->parsed()) {
            m.command = "estimate";
            code = detail::cmd_estimate(s, m, out, err);
        } else if (cmp->parsed()) {
            m.command = "compare";
            code = detail::cmd_compare(s, m, out, err);
            if (code != kExitOk) return code;
        } else if (vot->parsed()) {
            m.command = "vot";
            code = detail::cmd_vot(s, m, out);
        } else {
            m.command = "draws-dump";
            code = detail::cmd_draws_dump(s, m, out);
        }
        detail::write_manifest(s, m, start);
        return code;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace mixlogit
