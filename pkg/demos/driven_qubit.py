"""Drive an 8-level truncation of Set 1 and report ground-state survival and the (0,1) transition."""
from __future__ import annotations

import numpy as np

from zeropi.basis import HilbertSpace
from zeropi.dynamics import DrivenSystem, evolve, survival_lifetime
from zeropi.parameters import SET1, FluxConfiguration

OPERATING_FLUX = -2.1  # near the first (0,1) gap minimum of Set 1


def main() -> None:
    space = HilbertSpace()
    for amplitude in (0.1, 0.5):
        flux = FluxConfiguration.uniform(OPERATING_FLUX, amplitude, 0.092)
        system = DrivenSystem.build(SET1, flux, space, levels=8)
        record = evolve(system, T=20.0, dt=0.01, record_every=100)
        S, P01 = record.survival_probability, record.transitions[(0, 1)]
        print(f"a = {amplitude}: survival lifetime {survival_lifetime(record):.3g} ns")
        for t, s, p in zip(record.t_grid[::4], S[::4], P01[::4]):
            print(f"  t = {t:5.1f} ns  S = {s:.4f}  P01 = {p:.4f}  S+P01 = {s + p:.4f}")
        print(f"  min(S + P01) = {np.min(S + P01):.4f}")


if __name__ == "__main__":
    main()
