// Simulate a small panel from the error-components spec, fit it and print
// the estimates next to the values used to generate the data.

#include "mixlogit/mixlogit.hpp"

#include <cstdio>

using namespace mixlogit;

int main()
{
    const ModelSpec spec = load_spec("paper_ecmnl");
    const auto truth = reference_theta(spec);

    DesignPlan plan;
    const auto population = generate_population(400, 1);
    const auto skeleton = generate_design(plan, population, 2);
    const auto data = simulate_choices(skeleton, spec, truth, 3);

    const auto draws = allocate_draws(spec, data.num_respondents(), 128, 4);
    EstimationOptions opt;
    opt.on_iteration = [](int it, double ll, double) {
        if (it % 10 == 0) std::printf("  iteration %3d  LL %.4f\n", it, ll);
    };
    const auto fit = estimate(spec, data, draws, opt);
    const auto se = fit.standard_errors();

    std::printf("\n%-22s %10s %10s %10s\n", "parameter", "truth", "estimate", "std.err");
    for (std::size_t p = 0; p < fit.theta.size(); ++p)
        std::printf("%-22s %10.4f %10.4f %10.4f\n", fit.names[p].c_str(), truth[p], fit.theta[p], se[p]);
    std::printf("\nLL %.3f (null %.3f), %s after %d iterations\n", fit.loglik, fit.null_loglik,
                std::string(to_string(fit.status)).c_str(), fit.iterations);

    for (const auto& row : vot_table(spec, fit))
        if (row.numeraire == Numeraire::TravelCost)
            std::printf("VOT %-18s %7.2f AUD/h  [%.2f, %.2f]\n", std::string(mode_label(row.mode)).c_str(),
                        row.mean.point, row.mean.lower, row.mean.upper);
    return fit.status == ConvergenceStatus::Converged ? 0 : 1;
}
