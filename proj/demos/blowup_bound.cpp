// Y2 blow-up of the reduced system against its explicit upper bound, for a few
// starting values of X2.

#include <cmath>
#include <cstdio>

#include "grs/special.hpp"

int main() {
    std::printf("%8s %14s %14s %14s %8s\n", "X2(0)", "estimate", "bound", "separable", "inside");
    for (double x0 : {1.5, 2.0, 3.0, 5.0}) {
        const grs::BlowupReport rep = grs::detect_blowup(1, 0.0, grs::SpecialState{0.0, x0, 1.0, 1.0});
        // k = 0: X2 solves x' = x^3 - x on its own
        const double exact = 0.5 * std::log(x0 * x0 / (x0 * x0 - 1.0));
        std::printf("%8.2f %14.10f %14.10f %14.10f %8s\n", x0, rep.estimate.estimate, rep.bound, exact,
                    rep.within_bound ? "yes" : "no");
    }
}
