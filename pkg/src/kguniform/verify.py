"""Property and oracle verification suite.

Backs `kg-uniform verify` and the heavier assertions of the test suite:
operator norm bounds, scheme stability bounds, closed-form kernels against
Gauss-Legendre quadrature of their defining integrals, and single-step
defects of both schemes against the brute-force Duhamel oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft
from scipy.special import roots_legendre

from .harness import fit_order, paper_initial_data
from .integrators import StepContext, duhamel_oracle_step, step_uei1_real, step_uei2_real
from .model import kernel_omega, oscillatory_block, phase_factor, to_first_order
from .spectral import (
    SpectralField,
    apply_symbol,
    make_grid,
    make_multipliers,
    phi,
    phi_moment,
    sobolev_norm,
)

__all__ = ["CheckResult", "random_field", "run_all"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_field(grid, rng, decay: float = 1.0) -> SpectralField:
    """Random complex field with |coeff_k| ~ (1 + k^2)^(-decay/2)."""
    n = grid.n_points
    co = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (
        1.0 + grid.wavenumbers**2
    ) ** (-decay / 2.0)
    return SpectralField(grid, co)


# ---------------------------------------------------------------------------
# operator bounds


def check_operator_bounds(K=64, cs=(1.0, 10.0, 100.0, 1e4), n_fields=100, r=1.0, seed=7):
    """Per-mode operator bounds on random fields:

    ||A_c f||_r <= (1/2)||f||_{r+2},   ||c<grad>_c^-1 f||_r <= ||f||_r,
    ||e^(itA_c) f||_r = ||f||_r,       ||(e^(itA_c)-1) f||_r <= (|t|/2)||f||_{r+2}.
    """
    grid = make_grid(1, K)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in cs:
        m = make_multipliers(grid, c)
        for _ in range(n_fields):
            f = random_field(grid, rng, decay=rng.uniform(0.0, 2.0))
            t = rng.uniform(-1.0, 1.0)
            fr2 = sobolev_norm(f, r + 2)
            viol = max(
                sobolev_norm(apply_symbol(m.a_c, f), r) - 0.5 * fr2 - 1e-10,
                sobolev_norm(apply_symbol(m.c_inv, f), r) - sobolev_norm(f, r) - 1e-12,
                abs(
                    sobolev_norm(apply_symbol(np.exp(1j * t * m.a_c), f), r)
                    - sobolev_norm(f, r)
                )
                - 1e-12 * sobolev_norm(f, r),
                sobolev_norm(apply_symbol(np.exp(1j * t * m.a_c) - 1.0, f), r)
                - 0.5 * abs(t) * fr2
                - 1e-10,
            )
            worst = max(worst, viol)
    return CheckResult(
        "operator_bounds",
        worst <= 0.0,
        f"worst bound violation {worst:.3e} over {n_fields} fields x {len(cs)} c values",
    )


def check_stability_bounds(K=64, cs=(1.0, 10.0, 100.0, 1e4), n_fields=20, r=1.0, seed=11):
    """Stability of the second-order correction terms, uniformly in c:

    ||tau^2 phi_moment(i tau (delta c^2 - A_c)) (v A_c w)||_r <= C tau ||v||_r ||w||_r

    for the non-resonant symbols -(c^2 + c<grad>_c), -(3c^2 + c<grad>_c) and
    the resonant i tau (2c^2 - Delta/2).  C must neither blow up nor grow
    with c (the whole point of the twisted formulation).
    """
    grid = make_grid(1, K)
    n = grid.n_points
    rng = np.random.default_rng(seed)
    ratio_by_c = {}
    for c in cs:
        m = make_multipliers(grid, c)
        k2 = grid.wavenumbers**2
        worst = 0.0
        for tau in (1e-3, 1e-2, 1e-1):
            syms = [
                -1j * tau * (c * c + c * m.bracket_c),
                -1j * tau * (3 * c * c + c * m.bracket_c),
                1j * tau * (2 * c * c + 0.5 * k2),
            ]
            kernels = [phi_moment(s) for s in syms]
            for _ in range(n_fields):
                v = random_field(grid, rng, decay=1.0)
                w = random_field(grid, rng, decay=1.0)
                prod = v.values() * (_fft.ifft(m.a_c * w.coeffs) * n)
                ph = SpectralField(grid, _fft.fft(prod) / n)
                denom = tau * sobolev_norm(v, r) * sobolev_norm(w, r)
                for ker in kernels:
                    val = tau * tau * sobolev_norm(apply_symbol(ker, ph), r)
                    worst = max(worst, val / denom)
        ratio_by_c[c] = worst
    small_c = max(ratio_by_c[cs[0]], ratio_by_c[cs[1]])
    large_c = max(ratio_by_c[c] for c in cs[2:])
    passed = max(ratio_by_c.values()) <= 25.0 and large_c <= 1.5 * small_c + 1e-9
    detail = ", ".join(f"C(c={c:g})={v:.3f}" for c, v in ratio_by_c.items())
    return CheckResult("stability_bounds", passed, detail)


# ---------------------------------------------------------------------------
# kernel quadrature


def _gl_nodes(a, b, nodes):
    x, w = roots_legendre(nodes)
    return a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w


def _psi_raw(t_n, s, vv, c):
    """Independent transcription of Psi from its three-branch definition."""
    x = 2j * c * c * s
    p2 = phase_factor(2, c, t_n)
    m4 = phase_factor(-4, c, t_n)
    v3 = vv**3
    vau = np.abs(vv) ** 2 * vv
    return (
        s * p2 * phi(1, x) * v3
        + 3.0 * s * p2.conjugate() * phi(1, -x) * np.conj(vau)
        + s * m4 * phi(1, -2 * x) * np.conj(v3)
    )


def check_omega_quadrature(K=64, tol=1e-10, seed=3):
    """Omega_l against 64-node Gauss-Legendre quadrature of its defining
    integral, plus the moment identity int_0^tau e^(ilc^2 s) s ds
    = tau^2 phi_moment(ilc^2 tau)."""
    grid = make_grid(1, K)
    rng = np.random.default_rng(seed)
    v = random_field(grid, rng, decay=2.0)
    vv = v.values()
    tau, t_n = 0.01, 0.37
    worst = 0.0
    for c in (1.0, 10.0):
        s_nodes, w_nodes = _gl_nodes(0.0, tau, 64)
        for l in (-4, -2, 2):
            acc = np.zeros(grid.n_points, dtype=complex)
            for s, w in zip(s_nodes, w_nodes):
                acc += w * np.exp(1j * l * c * c * s) * _psi_raw(t_n, s, vv, c)
            quad = SpectralField(grid, _fft.fft(acc / tau**2) / grid.n_points)
            diff = sobolev_norm(quad - kernel_omega(t_n, tau, v, c, l), 1.0)
            worst = max(worst, diff)
            mom_quad = np.sum(w_nodes * np.exp(1j * l * c * c * s_nodes) * s_nodes)
            worst = max(
                worst, abs(mom_quad - tau**2 * phi_moment(1j * l * c * c * tau))
            )
    return CheckResult(
        "omega_quadrature", worst <= tol, f"worst |closed form - quadrature| = {worst:.3e}"
    )


def _block_quadrature(tau, t_n, u, m, q=16):
    """Composite GL quadrature of the oscillatory Duhamel branches with
    u*(t_n+s) replaced by its first-order inner expansion."""
    grid = u.grid
    n = grid.n_points
    c = m.c
    uv = u.values()
    uau = np.abs(uv) ** 2 * uv
    rate = 4 * c * c + 2 * float(np.max(m.a_c))
    panels = max(2, math.ceil(tau * rate / 3.0))
    acc = np.zeros(n, dtype=complex)
    for p in range(panels):
        a, b = tau * p / panels, tau * (p + 1) / panels
        s_nodes, w_nodes = _gl_nodes(a, b, q)
        for s, w in zip(s_nodes, w_nodes):
            inner = 3.0 * s * uau + _psi_raw(t_n, s, uv, c)
            ut_hat = np.exp(1j * s * m.a_c) * u.coeffs - 0.125j * m.c_inv * (
                _fft.fft(inner) / n
            )
            wv = _fft.ifft(ut_hat) * n
            ph = phase_factor(1, c, t_n + s)
            w3 = wv**3
            wau = np.abs(wv) ** 2 * wv
            g = ph**2 * w3 + 3.0 * ph.conjugate() ** 2 * np.conj(wau) + ph.conjugate() ** 4 * np.conj(w3)
            acc += w * np.exp(1j * (tau - s) * m.a_c) * (_fft.fft(g) / n)
    return SpectralField(grid, acc)


def check_block_quadrature(K=64, seed=5):
    """oscillatory_block against the quadrature oracle: O(tau^3) agreement,
    measured slope >= 2.7 over tau in {2^-6 ... 2^-12} at c = 10."""
    grid = make_grid(1, K)
    c = 10.0
    m = make_multipliers(grid, c)
    s0 = paper_initial_data(grid, c)
    u, _ = to_first_order(s0, m)
    t_n = 0.0
    pts = []
    for me in range(6, 13):
        tau = 2.0**-me
        quad = _block_quadrature(tau, t_n, u, m)
        diff = sobolev_norm(quad - oscillatory_block(tau, t_n, u, m), 1.0)
        pts.append((tau, diff))
    slope = fit_order(pts)
    return CheckResult(
        "block_quadrature",
        slope >= 2.7,
        f"block vs quadrature defect slope {slope:.2f} (need >= 2.7)",
    )


def check_local_defects(K=64, cs=(1.0, 100.0)):
    """Single-step defects against the Duhamel oracle: slope >= 1.8 for the
    first-order scheme and >= 2.7 for the second-order scheme."""
    grid = make_grid(1, K)
    details = []
    passed = True
    for c in cs:
        m = make_multipliers(grid, c)
        s0 = paper_initial_data(grid, c)
        u, _ = to_first_order(s0, m)
        pts1, pts2 = [], []
        for me in range(6, 13):
            tau = 2.0**-me
            ctx = StepContext(grid, m, tau)
            oracle = duhamel_oracle_step(u, 0.0, ctx, nodes=64)
            pts1.append((tau, sobolev_norm(step_uei1_real(u, 0.0, ctx) - oracle, 1.0)))
            pts2.append((tau, sobolev_norm(step_uei2_real(u, 0.0, ctx) - oracle, 1.0)))
        s1, s2 = fit_order(pts1), fit_order(pts2)
        passed = passed and s1 >= 1.8 and s2 >= 2.7
        details.append(f"c={c:g}: uei1 {s1:.2f} (>=1.8), uei2 {s2:.2f} (>=2.7)")
    return CheckResult("local_defects", passed, "; ".join(details))


def run_all(fast: bool = False):
    """Run the verification suite; `fast` trims the sampling counts."""
    nf = 20 if fast else 100
    checks = [
        check_operator_bounds(n_fields=nf),
        check_stability_bounds(n_fields=5 if fast else 20),
        check_omega_quadrature(),
        check_block_quadrature(),
        check_local_defects(cs=(1.0,) if fast else (1.0, 100.0)),
    ]
    return checks
