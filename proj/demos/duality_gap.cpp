// Coordinate descent on a sample with a nontrivial hard core, printing the primal objective,
// the certified dual bound and their gap as the iteration budget grows.

#include <cstdio>

#include "hardcoreboost.hpp"

int main()
{
    // Two duplicated opposite-label points form the core; the rest are separated by a
    // weighting that abstains on them.
    hcb::DenseMatrix x(0, 2);
    const double rows[][2] = {{0.5, 0.2}, {0.5, 0.2}, {1.0, -0.5}, {0.5, -0.8}, {0.2, 0.6}, {-0.9, -0.1}};
    const std::vector<int> labels{1, -1, 1, 1, -1, -1};
    for (const auto& r : rows) x.append_row(std::vector<double>{r[0], r[1]});
    const hcb::FeatureMatrix fm(x, labels);
    const auto cert = hcb::compute_hardcore(fm);
    std::printf("core size %zu, core mass %.4f, separator margin %.4g\n", cert.core.size(), cert.core_mass(fm),
                cert.margin);

    for (const auto& loss : {hcb::Loss::exponential(), hcb::Loss::logistic()}) {
        std::printf("\nloss %s\n%8s %14s %14s %12s\n", hcb::to_string(loss).c_str(), "iters", "primal", "dual", "gap");
        for (std::size_t budget : {1u, 2u, 5u, 10u, 20u, 50u, 100u, 1000u}) {
            hcb::OptimizerConfig cfg;
            cfg.method = hcb::Method::coordinate;
            cfg.max_iters = budget;
            cfg.rho = 1e-15;
            cfg.record_trace = false;
            const auto run = hcb::minimize(fm, loss, cfg);
            const auto gap = hcb::suboptimality_certificate(fm, loss, run.lambda, cert);
            std::printf("%8zu %14.8f %14.8f %12.3e\n", run.iterations, gap.primal, gap.dual, gap.gap);
        }
    }
    return 0;
}
