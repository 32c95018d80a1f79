"""Regenerate src/metascope/data/default_response.csv.

Smooth two-state model: the 0-state stays flat with low loss, the pi-state
loses a little more around 3.0 GHz, and the state phase difference follows a
cubic around 180 deg that reaches +-24 deg at 2.72 and 3.25 GHz.
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "metascope" / "data" / "default_response.csv"

F_CENTRE = 2.985e9
HALF_BAND = 0.265e9


def table():
    f = np.round(np.arange(2.60e9, 3.40e9 + 1.0, 0.01e9), -3)
    t = (f - F_CENTRE) / HALF_BAND
    mag0 = -0.20 - 0.35 * t**2
    mag1 = -0.30 - 0.25 * np.exp(-(((f - 3.0e9) / 0.06e9) ** 2)) - 0.20 * t**2
    phase0 = 90.0 - 300.0 * (f - 3.0e9) / 1e9
    dphi = 180.0 + 24.0 * t**3
    phase1 = phase0 - dphi
    wrap = lambda d: (d + 180.0) % 360.0 - 180.0
    return f, mag0, wrap(phase0), mag1, wrap(phase1)


def main():
    rows = ["freq_hz,mag0_db,phase0_deg,mag1_db,phase1_deg"]
    for f, m0, p0, m1, p1 in zip(*table()):
        rows.append(f"{f:.0f},{m0:.6f},{p0:.6f},{m1:.6f},{p1:.6f}")
    OUT.write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
