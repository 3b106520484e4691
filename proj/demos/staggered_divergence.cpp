// Scales the max-margin weighting of a small staggered sample and prints the world risk
// next to the risk of the reference separator.

#include <cstdio>
#include <cstdlib>

#include "hardcoreboost.hpp"

int main(int argc, char** argv)
{
    const std::size_t depth = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 10;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    const std::vector<double> scales{1, 2, 4, 8, 16, 32, 64, 128, 256, 1024, 4096};
    const auto r = hcb::impossibility_report(depth, 20, scales, hcb::Loss::exponential(), seed, 20);

    std::printf("depth %zu, m %zu, seed %llu, attempts %zu\n", r.depth, r.m,
                static_cast<unsigned long long>(r.seed), r.attempts);
    std::printf("lambda_hat = (%.6f, %.6f), sample margin %.6g\n", r.lambda_hat[0], r.lambda_hat[1], r.sample_margin);
    std::printf("misclassified world mass %.6g, classification risk %.6g\n", r.misclassified_mass,
                r.classification_risk);
    std::printf("%10s %16s %16s\n", "scale", "R(c lambda_hat)", "R(c lambda_bar)");
    for (const auto& row : r.rows)
        std::printf("%10g %16.6g %16.6g%s\n", row.scale, row.risk_hat, row.risk_bar, row.saturated ? "  (clamped)" : "");
    return 0;
}
