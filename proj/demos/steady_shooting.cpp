// Step off the collapsed orbit for a few f''(0) and summarise the steady runs.

#include <cstdio>

#include "grs/ode_t.hpp"

int main() {
    const grs::AnsatzParams p = grs::AnsatzParams::make(0.0, 1, 1, 2.0);
    std::printf("%6s %10s %10s %12s %12s %12s\n", "f2", "F_growth", "dF_sgn", "S(1e-2)", "S(end)", "C drift");
    for (double f2 : {0.0, -0.1, -0.25, -0.5}) {
        grs::ShootingConfig sc;
        sc.f2 = f2;
        const grs::Trajectory traj = grs::shoot(p, sc, grs::IntegratorConfig{});
        grs::QualitativeOptions opt;
        opt.t_min = 1e-2;
        const grs::QualitativeReport q = grs::qualitative_report(traj, opt);
        const double S_check = grs::sample_at_or_after(traj, 1e-2).diag->S;
        std::printf("%6.2f %10.3f %10d %12.4e %12.4e %12.3e\n", f2, q.F_growth, q.dF_sign_changes, S_check,
                    q.S_end, grs::drift(traj, &grs::Diagnostics::C).relative());
    }
}
