"""Coarse flux sweep of Set 1 on a reduced basis: avoided crossings and operating point.

The reduced basis keeps the run under a minute; the default basis used by the
CLI (`zeropi --preset fig3 --set 1`) takes a few minutes.
"""
from __future__ import annotations

import sys
from pathlib import Path

from zeropi.basis import HilbertSpace
from zeropi.parameters import SET1
from zeropi.spectrum import find_avoided_crossings, locate_operating_point, sweep_flux


def main(out_dir: str = ".") -> None:
    space = HilbertSpace(n_max=2, d2=9, d3=9)
    sweep = sweep_flux(SET1, space, points=121, K=4)
    path = sweep.to_csv(Path(out_dir) / "demo_spectrum.csv")
    print(f"wrote {path}")
    for c in find_avoided_crossings(sweep, (0, 1)):
        print(f"(0,1) gap minimum at flux {c.flux_location:+.3f} rad, gap {c.min_gap:.4f} GHz")
    op = locate_operating_point(sweep)
    print(f"operating point {op.flux:+.3f} rad: E1-E0 = {op.gap_01:.4f}, E2-E1 = {op.gap_12:.4f} GHz")


if __name__ == "__main__":
    main(*sys.argv[1:2])
