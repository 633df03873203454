"""Print the structural constants used by the scenarios, with provenance tags."""

from upperfn.empirical.constants import structural_constants
from upperfn.empirical.localized import localized_model, triangular_kernel
from upperfn.gaussian import (WienerIntegralModel, intrinsic_constant, doubling_modulus_pipeline,
                              example_catalog, lambda1_shift_sup, thm1_pipeline)
from upperfn.weights import certification_total, certified_s_star, dyadic_partial_sum, s_star


def row(name, value, tag):
    print(f"{name:<28} {value:>24.12g}  {tag}")


def main():
    print("# weights")
    row("s* partial sum k<=200", dyadic_partial_sum(s_star(), 200), "raw")
    row("s* sum with tail", certification_total(s_star()), "raw")
    row("certified factor", certified_s_star().normalization_factor, "DERIVED")
    print("# empirical, (N, R, m, k) = (0, 1, 1, 1)")
    for n, v, t in structural_constants(0, 1, 1, 1).manifest():
        row(n, v, t)
    print("# localized kernel process, (0, 1, 2, 1), triangular kernel")
    m = localized_model(triangular_kernel())
    for n, v, t in structural_constants(0, 1, 2, 1, C_D=m.C_D()).manifest():
        row(n, v, t)
    print("# Wiener integrals, d = 1, p = 2")
    res = thm1_pipeline(WienerIntegralModel())
    row("C1", res.C1, "DERIVED")
    row("C2", res.C2, "DERIVED")
    for k, v in res.constants.items():
        row(k, float(v), res.provenance.get(k, "DERIVED"))
    row("shift ratio sup", lambda1_shift_sup(), "DERIVED")
    print("# local modulus under doubling")
    row("intrinsic C, N = 2", intrinsic_constant(2), "PAPER")
    for r in (0.5, 0.25, 0.1):
        t = doubling_modulus_pipeline(example_catalog("ou", r=r))
        row(f"OU a(r={r:g})", t.a, "DERIVED")
        row(f"OU 8p(r={r:g})", 8 * t.p, "PAPER")
    row("OU C", t.C, "PAPER")


if __name__ == "__main__":
    main()
