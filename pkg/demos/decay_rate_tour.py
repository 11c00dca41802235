"""Tour: from a sampled potential to the almost-sure decay rate trend.

Samples one realization of a gamma = 0 potential whose zero-set has density
1/2, walks through the deterministic scales, solves u(t, 0) exactly at a few
times, and compares the normalized rate rho(t) = alpha(b_t)^2 / t * log u
against the variational prediction -kappa pi^2 A^2.

Run:  python3 demos/decay_rate_tour.py
"""

import math

import numpy as np

from pam1d import (ExperimentConfig, LowerTailSpec, PotentialSpec,
                   ScaleParams, VariationalConfig, alpha, b_scale, chi_tilde,
                   cumulant_G, rate_curve, sample_field)


def main():
    spec = PotentialSpec(gamma=0.0, mix_q=0.2,
                         lower=LowerTailSpec.pareto(1.0), atom_p=0.625)
    print("Potential: P(xi = 0) = (1 - q) p =",
          (1 - spec.mix_q) * spec.atom_p)
    print("Heavy branch: xi = -e^W with P(W > x) = 1/x (zeta = 1)\n")

    fld = sample_field(spec, -30, 30, seed=0)
    xi, _ = fld.xi_clamped(-30, 30)
    print("A window of the field (clamped view):")
    print("  ", np.array2string(xi[25:36], precision=2, suppress_small=True))
    print("  heavy sites in [-30, 30]:", int(fld.heavy.sum()), "\n")

    params = ScaleParams.from_spec(spec)
    print("Scales (nu = %.4f, beta = %.4f):" % (params.nu, params.beta))
    print(f"  {'t':>10}  {'G(t)':>12}  {'b_t':>12}  {'alpha(b_t)^2':>14}")
    for t in (1e2, 1e3, 1e4):
        g = cumulant_G(spec, t)
        b = b_scale(spec, params, t)
        print(f"  {t:>10.0f}  {g:>12.4e}  {b:>12.2f}"
              f"  {alpha(params, b) ** 2:>14.2f}")

    chi = chi_tilde(VariationalConfig(A=-math.log(0.5), gamma=0.0)).chi
    print(f"\nVariational prediction: chi = kappa pi^2 A^2 = {chi:.4f}")
    print("(the theory says rho(t) -> -chi as t -> infinity)\n")

    cfg = ExperimentConfig(spec=spec, seeds=(0, 1, 2, 3, 4), rtol=1e-4)
    curve = rate_curve(cfg, np.array([1e2, 1e3]))
    ts, med = curve.median_rho()
    print("Observed rate trend (5 seeds, exact solver):")
    for t, r in zip(ts, med):
        print(f"  t = {t:>7.0f}   median rho = {r:+.3f}   target {-chi:+.3f}")
    print("\nAt desk-scale t the medians overshoot -chi (screening from the")
    print("heavy sites is still dominant); the limit is approached only at")
    print("astronomical t, which is why the experiments check direction and")
    print("order of magnitude, not the limit itself.")


if __name__ == "__main__":
    main()
