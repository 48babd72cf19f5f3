"""Reduce the symmetric 0-pi circuit and print the kinetic coefficients of each parameter set."""
from __future__ import annotations

import numpy as np

from zeropi.circuit import quadratic_form_coefficients, zero_pi_reduction
from zeropi.parameters import PARAMETER_SETS, TABLE1, kinetic_coefficients


def main() -> None:
    np.set_printoptions(precision=4, suppress=True)
    for index, params in PARAMETER_SETS.items():
        red = zero_pi_reduction(params.C_J, params.C_C)
        print(f"set {index}: constraint residual {red.residual:.1e}")
        print("  effective capacitance, mode block:")
        print("  " + str(red.C_eff[:3, :3]).replace("\n", "\n  "))
        terms = quadratic_form_coefficients(red.C_eff, ["v1", "v2", "v3", "e1", "e2", "e3"])
        nonzero = {f"{a}*{b}": round(float(v), 4) for (a, b), v in terms.items() if abs(v) > 1e-9}
        print(f"  Lagrangian monomials: {nonzero}")
        got = kinetic_coefficients(params).as_tuple()
        for name, a, b in zip("ABCDEF", got, TABLE1[index]):
            print(f"  {name}: computed {a:+.6f}  tabulated {b:+.6f}")


if __name__ == "__main__":
    main()
