#pragma once

#include <cmath>
#include <utility>

namespace hcb::detail {

struct Minimum {
    double x;
    double value;
};

// Golden-section search for a unimodal function on [lo, hi]. The returned point is
// the best of the final bracket and both endpoints, so minima sitting on the
// boundary are recovered exactly.
template <typename F>
Minimum golden_section_min(F&& f, double lo, double hi, double width = 1e-8)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > width) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Minimum best{c, fc};
    if (fd < best.value) best = {d, fd};
    const double flo = f(lo);
    if (flo < best.value) best = {lo, flo};
    const double fhi = f(hi);
    if (fhi < best.value) best = {hi, fhi};
    return best;
}

template <typename F>
Minimum golden_section_max(F&& f, double lo, double hi, double width = 1e-8)
{
    auto neg = [&](double x) { return -f(x); };
    Minimum m = golden_section_min(neg, lo, hi, width);
    return {m.x, -m.value};
}

} // namespace hcb::detail
