#!/usr/bin/env python3
"""Regenerate core/data/silica_nk.csv.

The shipped fused-silica optical constants are a reconstruction, not a copy of
any single measured dataset. Each row records which model produced it:

  uv-table     hand-digitised control points for the 30-200 nm interband region
  sellmeier    Malitson three-term dispersion (UV terms) + lattice oscillators
  lattice      Brendel-Bormann (gaussian-broadened) Si-O oscillators
  far-ir       lattice tails plus a linear-in-frequency two-level-system loss

The min/max columns are envelopes around the central model whose width follows
the scatter between literature sources for Type III / Type IV glass: tight in
the transparent window, wide where OH content or multiphonon absorption vary.

Usage: gen_silica_dataset.py [output.csv]
"""

import sys

import numpy as np
from scipy.special import wofz

# interband region (wavelength nm, n, k)
UV_POINTS = np.array([
    (30.0, 0.82, 0.18),
    (40.0, 0.74, 0.34),
    (50.0, 0.71, 0.55),
    (60.0, 0.74, 0.78),
    (70.0, 0.84, 0.96),
    (80.0, 0.99, 1.10),
    (90.0, 1.19, 1.16),
    (100.0, 1.44, 1.12),
    (110.0, 1.74, 0.98),
    (115.0, 1.93, 0.86),
    (120.0, 2.08, 0.66),
    (125.0, 2.12, 0.42),
    (130.0, 2.03, 0.19),
    (140.0, 1.86, 2.0e-2),
    (150.0, 1.76, 1.0e-3),
    (160.0, 1.69, 2.0e-5),
    (170.0, 1.625, 1.0e-6),
    (180.0, 1.590, 1.0e-7),
    (190.0, 1.565, 2.0e-8),
    (200.0, 1.5505, 1.0e-8),
])

# lattice oscillators: (centre cm^-1, strength, gaussian sigma cm^-1, lorentz gamma cm^-1)
OSCILLATORS = [
    (1072.0, 0.60, 38.0, 5.0),
    (1180.0, 0.05, 50.0, 5.0),
    (800.0, 0.055, 28.0, 5.0),
    (455.0, 0.95, 30.0, 5.0),
]


def brendel_bormann(wn):
    """Susceptibility of gaussian-broadened oscillators at wavenumber wn (cm^-1)."""
    chi = np.zeros_like(wn, dtype=complex)
    for w0, s, sigma, gamma in OSCILLATORS:
        wp2 = s * w0 * w0
        a = np.sqrt(wn * (wn + 1j * gamma))
        a = np.where(a.imag < 0, -a, a)
        pre = 1j * np.sqrt(np.pi) * wp2 / (2.0 * np.sqrt(2.0) * a * sigma)
        chi += pre * (wofz((a - w0) / (np.sqrt(2.0) * sigma))
                      + wofz((a + w0) / (np.sqrt(2.0) * sigma)))
    return chi


def sellmeier_uv(lam_um):
    l2 = lam_um * lam_um
    return (0.6961663 * l2 / (l2 - 0.0684043 ** 2)
            + 0.4079426 * l2 / (l2 - 0.1162414 ** 2))


def gauss(wn, centre, sigma):
    return np.exp(-0.5 * ((wn - centre) / sigma) ** 2)


def smoothstep(x, lo, hi):
    t = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def central_model(lam_m):
    lam_um = lam_m * 1e6
    wn = 1e4 / lam_um
    eps = 1.0 + sellmeier_uv(lam_um) + brendel_bormann(wn)
    nk = np.sqrt(eps)
    n, k = nk.real, nk.imag
    # lorentzian wings of the lattice bands would dominate the transparent
    # window; above the multiphonon edge absorption is modelled separately
    k = k * (1.0 - smoothstep(wn, 1500.0, 1800.0))

    # multiphonon edge above the stretch band
    k_mp = 0.028 * np.exp(-(wn - 1300.0) / 213.0) * smoothstep(wn, 1350.0, 1500.0)
    # two-level-system loss in the far infrared
    k_fir = 2.4e-3 * (300.0 / lam_um) * smoothstep(lam_um, 40.0, 80.0)
    k = k + k_mp + k_fir
    return n, k


def uv_table(lam_m):
    lam_nm = lam_m * 1e9
    x = np.log(lam_nm)
    xs = np.log(UV_POINTS[:, 0])
    n = np.interp(x, xs, UV_POINTS[:, 1])
    k = np.exp(np.interp(x, xs, np.log(UV_POINTS[:, 2])))
    return n, k


def envelope(lam_m, n, k):
    """Return (n_min, n_max, k_min, k_max) around the central model."""
    lam_um = lam_m * 1e6
    wn = 1e4 / lam_um

    # relative half-width on n
    dn = np.full_like(n, 0.03)
    transparent = (lam_um > 0.2) & (lam_um < 4.0)
    dn = np.where(transparent, 1.5e-3, dn)
    dn = np.where((lam_um >= 4.0) & (lam_um < 7.0), 0.01, dn)

    # multiplicative factor on k
    fk = np.full_like(k, 1.12)
    fk = np.where(lam_um < 0.2, 1.15, fk)
    fk = np.where((lam_um >= 3.2) & (lam_um < 7.5), 1.5, fk)
    fk = np.where(lam_um > 60.0, 2.0, fk)

    n_min, n_max = n * (1.0 - dn), n * (1.0 + dn)
    k_min, k_max = k / fk, k * fk

    # visible / near infrared floor: literature values are detection-limited
    # upper bounds; the lower edge is the smallest reported value
    window = (lam_um >= 0.19) & (lam_um < 3.2)
    k_max = np.where(window, np.maximum(k_max, 1.0e-8), k_max)
    k_min = np.where(window, np.maximum(k_min, 2.0e-9), k_min)

    # OH overtones: wet (Type III) upper edge, dry (Type IV) lower edge
    oh_max = (1.0e-3 * gauss(wn, 3673.0, 40.0) + 1.0e-5 * gauss(wn, 4525.0, 40.0)
              + 1.0e-6 * gauss(wn, 7250.0, 50.0))
    oh_min = (2.0e-7 * gauss(wn, 3673.0, 40.0) + 1.0e-9 * gauss(wn, 4525.0, 40.0)
              + 1.0e-10 * gauss(wn, 7250.0, 50.0))
    k_max = k_max + oh_max
    k_min = k_min + oh_min
    return n_min, n_max, k_min, k_max


def wavelength_grid():
    pieces = [
        np.geomspace(30e-9, 200e-9, 70, endpoint=False),
        np.geomspace(200e-9, 3.2e-6, 140, endpoint=False),
        np.geomspace(3.2e-6, 40e-6, 520, endpoint=False),
        np.geomspace(40e-6, 2e-3, 90),
    ]
    return np.concatenate(pieces)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "silica_nk.csv"
    lam = wavelength_grid()
    n, k = central_model(lam)
    n_uv, k_uv = uv_table(lam)
    lam_um = lam * 1e6
    # blend the interband table into the dispersion model across 195-215 nm
    w = smoothstep(lam_um, 0.195, 0.215)
    n = (1.0 - w) * n_uv + w * n
    k = np.exp((1.0 - w) * np.log(k_uv) + w * np.log(np.maximum(k, 1e-30)))
    n_min, n_max, k_min, k_max = envelope(lam, n, k)

    source = np.where(lam_um < 0.215, "uv-table",
             np.where(lam_um < 6.0, "sellmeier",
             np.where(lam_um < 40.0, "lattice", "far-ir")))

    with open(out, "w") as f:
        f.write("# fused silica (Type III/IV mixture) optical constants, reconstruction\n")
        f.write("# regenerate with tools/data/gen_silica_dataset.py\n")
        f.write("wavelength_m,n_min,n_max,k_min,k_max,source\n")
        for row in zip(lam, n_min, n_max, k_min, k_max, source):
            f.write("%.9e,%.9e,%.9e,%.9e,%.9e,%s\n" % row)


if __name__ == "__main__":
    main()
