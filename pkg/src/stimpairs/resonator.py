"""Closed-form pair statistics for a multipass parametric interaction.

A pump that makes N passes through the same crystal drives one pair mode
coherently on every pass, picking up a round-trip phase phi between passes.
The passes therefore add up to an effective amplitude

    A(N, phi) = sum_{m=0}^{N-1} exp(i m phi),

and every pair observable of the multipass system reduces to the single-pass
formula evaluated at the rescaled interaction strength |A| tau, where tau is
the dimensionless per-pass strength (coupling times interaction time).

The exact 2M-photon emission probability is

    P_M = (M + 1) tanh^{2M}(|A| tau) / cosh^4(|A| tau),

whose small-tau limit (M + 1) (|A| tau)^{2M} carries the familiar
|sin(N phi / 2) / sin(phi / 2)|^{2M} interference factor.  Everything here is
a closed form; the truncated Fock-space oracle that these formulas are tested
against lives in fock.py.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

# Probabilities may poke above 1 by float noise only; anything worse is a bug.
PROBABILITY_CLIP_TOL = 1e-12

SWEEP_COLUMNS = ("N", "phi", "tau", "M", "P_exact", "P_approx", "contamination")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ResonatorConfig:
    """Pass count, inter-pass phase, and per-pass interaction strength.

    phi is stored canonically in [0, 2 pi); every quantity derived from it is
    2 pi periodic so nothing is lost.
    """

    n_passes: int
    phi: float
    tau: float

    def __post_init__(self):
        if not isinstance(self.n_passes, (int, np.integer)) or self.n_passes < 1:
            raise ValueError(f"n_passes must be a positive integer, got {self.n_passes!r}")
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi!r}")
        if not (math.isfinite(self.tau) and self.tau >= 0.0):
            raise ValueError(f"tau must be a non-negative finite float, got {self.tau!r}")
        object.__setattr__(self, "n_passes", int(self.n_passes))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)
        object.__setattr__(self, "tau", float(self.tau))


def amplitude_sum(n_passes: int, phi: float) -> complex:
    """Coherent sum of N unit phasors, A = sum_m exp(i m phi).

    Summed directly instead of through the sin(N phi/2)/sin(phi/2) ratio so
    phi -> 0 needs no special casing and |A| <= N holds with equality exactly
    at phi = 0 mod 2 pi.
    """
    if not isinstance(n_passes, (int, np.integer)) or n_passes < 1:
        raise ValueError(f"n_passes must be a positive integer, got {n_passes!r}")
    if not math.isfinite(phi):
        raise ValueError(f"phi must be finite, got {phi!r}")
    m = np.arange(n_passes)
    return complex(np.exp(1j * phi * m).sum())


def _clip_probability(p: float) -> float:
    if p > 1.0 + PROBABILITY_CLIP_TOL:
        warnings.warn(
            f"probability {p!r} exceeds 1 beyond float tolerance; clipping",
            RuntimeWarning,
            stacklevel=3,
        )
    return min(max(p, 0.0), 1.0)


def _check_order(m: int) -> int:
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"pair order M must be a positive integer, got {m!r}")
    return int(m)


def pair_probability_exact(m: int, cfg: ResonatorConfig) -> float:
    """Exact probability of the maximally entangled 2M-photon component.

    P_M = (M + 1) tanh^{2M}(x) / cosh^4(x) at x = |A| tau.  Equal to the
    beta-like form (M + 1) (1 - u)^2 u^M at u = tanh^2(x), see
    pair_probability_vs_u.
    """
    m = _check_order(m)
    x = abs(amplitude_sum(cfg.n_passes, cfg.phi)) * cfg.tau
    p = (m + 1) * math.tanh(x) ** (2 * m) / math.cosh(x) ** 4
    return _clip_probability(p)


def pair_probability_approx(m: int, cfg: ResonatorConfig) -> float:
    """Small-tau limit (M + 1) (|A| tau)^{2M}.

    |A| equals |sin(N phi/2) / sin(phi/2)|, so this is the textbook
    interference form; computing |A| by direct summation gives the phi -> 0
    value N^{2M} without a limit case.
    """
    m = _check_order(m)
    x = abs(amplitude_sum(cfg.n_passes, cfg.phi)) * cfg.tau
    return _clip_probability((m + 1) * x ** (2 * m))


def pair_probability_vs_u(m: int, u: float) -> float:
    """P_M as a function of u = tanh^2(|A| tau): f(u) = (M + 1) (1 - u)^2 u^M."""
    m = _check_order(m)
    if not (0.0 <= u <= 1.0):
        raise ValueError(f"u must lie in [0, 1], got {u!r}")
    return (m + 1) * (1.0 - u) ** 2 * u**m


def optimal_u(m: int) -> float:
    """Argmax of pair_probability_vs_u over u in [0, 1], namely M / (M + 2)."""
    m = _check_order(m)
    return m / (m + 2.0)


def double_pass_ratio(theta: float) -> float:
    """Two-pass to one-pass pair-rate ratio, 2 (1 + cos theta).

    4 at theta = 0 (constructive), 0 at theta = pi (the second pass undoes
    the first).
    """
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    return 2.0 * (1.0 + math.cos(theta))


def multiphoton_contamination(cfg: ResonatorConfig) -> float:
    """Ratio P_2 / P_1 of double-pair to single-pair emission, (3/2) tanh^2(|A| tau)."""
    x = abs(amplitude_sum(cfg.n_passes, cfg.phi)) * cfg.tau
    return 1.5 * math.tanh(x) ** 2


def _sweep_row(n: int, phi: float, tau: float, m: int) -> tuple:
    cfg = ResonatorConfig(n, phi, tau)
    return (
        n,
        phi,
        tau,
        m,
        pair_probability_exact(m, cfg),
        pair_probability_approx(m, cfg),
        multiphoton_contamination(cfg),
    )


def sweep_rows(n_values, phis, tau: float, m: int = 1, workers: int = 1) -> list[tuple]:
    """Evaluate the sweep grid, one row per (N, phi) pair, columns SWEEP_COLUMNS.

    The grid order is N-major then phi, and is preserved in the output even
    when evaluated by the thread pool (workers > 1): executor.map keeps input
    order by construction.
    """
    n_values = [int(n) for n in n_values]
    phis = [float(p) for p in phis]
    m = _check_order(m)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")
    points = [(n, phi, tau, m) for n in n_values for phi in phis]
    if workers == 1:
        return [_sweep_row(*pt) for pt in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda pt: _sweep_row(*pt), points))
