"""Regenerate crates/core/tests/data/ber_reference.csv.

Evaluates the three bit-error closed forms at 1000 SINR points over
-15..15 dB with 50-digit arithmetic and stores the results rounded to
the nearest double. Each gamma is stored as the exact double the Rust
side evaluates at.
"""

import pathlib

import mpmath

mpmath.mp.dps = 50

POINTS = 1000
OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/data/ber_reference.csv"


def main() -> None:
    rows = ["sinr_db,gamma,fsk,dpsk,bpsk"]
    for i in range(POINTS):
        db = -15.0 + 30.0 * i / (POINTS - 1)
        gamma = float(mpmath.power(10, mpmath.mpf(db) / 10))
        g = mpmath.mpf(gamma)
        fsk = mpmath.mpf("0.5") * mpmath.exp(-g / 2)
        dpsk = mpmath.mpf("0.5") * mpmath.exp(-g)
        bpsk = mpmath.mpf("0.5") * mpmath.exp(-mpmath.sqrt(g))
        rows.append(",".join(repr(float(v)) for v in (db, gamma, fsk, dpsk, bpsk)))
    OUT.write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
