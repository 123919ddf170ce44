"""Steady-state toolkit for the isolated driven Kerr resonator.

The stationary photon number n = |alpha|^2 of a Kerr resonator driven with
power P = kappa_d |alpha_d|^2 satisfies the cubic

    K^2 n^3 + 2 Delta_a K n^2 + (Delta_a^2 + (kappa_a+kappa_d)^2/4) n = P.

For red detuning (Delta_a K < 0) beyond the inflection point
Delta_ac = sqrt(3/4) (kappa_a+kappa_d) the curve folds: dP/dn = 0 at the
critical photon numbers

    n_c+- = -2 Delta_a K / (3 K^2) (1 -+ sqrt(1 - 3(Delta_a^2 +
            (kappa_a+kappa_d)^2/4) / (4 Delta_a^2)))

and drives between P(n_c+) and P(n_c-) admit two stable solutions
separated by an unstable branch - the latching regime.  Note the crossing:
the low branch ends at n_c- whose drive P(n_c-) is the *upper* critical
power (upward jump), and the high branch ends at n_c+ with P(n_c+) the
*lower* one (downward jump).

Roots are obtained from the companion matrix (``numpy.roots``) and then
Newton-polished; stability on the folded branch follows the standard
ordering (outer roots stable, middle root unstable), which the test suite
backs with direct time integration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import critical_detuning  # noqa: F401  (re-exported op)


class NoBistability(ValueError):
    """Parameters or drive admit no bistable response."""


class InflectionPoint(NoBistability):
    """Degenerate case |Delta_a| = Delta_ac: the two critical points merge."""

    def __init__(self, n_inflection: float):
        super().__init__(
            f"critical points merge at the inflection point n = {n_inflection:.6g}"
        )
        self.n_inflection = n_inflection


@dataclass(frozen=True)
class CriticalPoint:
    """Critical photon numbers and the drive powers where branches end."""

    n_c_minus: float        # end of the low branch
    n_c_plus: float         # end of the high branch
    drive_power_minus: float  # P(n_c_plus): downward-jump (lower) drive power
    drive_power_plus: float   # P(n_c_minus): upward-jump (upper) drive power


@dataclass(frozen=True)
class SteadyStateSolution:
    roots: tuple          # photon numbers, ascending
    stability: tuple      # "stable" | "unstable", aligned with roots
    regime: str           # monostable-low | bistable | monostable-high


def drive_power(n, delta_a, K, kappa_a, kappa_d):
    """Left-hand side of the steady-state relation: P for a given n."""
    n = np.asarray(n, dtype=float)
    kappa = kappa_a + kappa_d
    return K * K * n**3 + 2.0 * delta_a * K * n**2 \
        + (delta_a**2 + kappa**2 / 4.0) * n


def critical_photon_numbers(delta_a, K, kappa_a, kappa_d) -> CriticalPoint:
    """Fold points of the steady-state curve; raises when there is no fold."""
    if K == 0:
        raise NoBistability("K = 0: linear resonator has a single-valued response")
    if delta_a * K >= 0:
        raise NoBistability(
            "bistability requires red detuning relative to the nonlinearity "
            "(delta_a * K < 0)"
        )
    kappa = kappa_a + kappa_d
    disc = 1.0 - 3.0 * (delta_a**2 + kappa**2 / 4.0) / (4.0 * delta_a**2)
    prefactor = -2.0 * delta_a * K / (3.0 * K * K)
    if disc <= 0.0:
        if abs(disc) < 1e-12:
            raise InflectionPoint(prefactor)
        raise NoBistability(
            "|delta_a| must exceed the inflection detuning "
            "sqrt(3/4)(kappa_a+kappa_d)"
        )
    root = np.sqrt(disc)
    n_minus = prefactor * (1.0 - root)
    n_plus = prefactor * (1.0 + root)
    return CriticalPoint(
        n_c_minus=n_minus,
        n_c_plus=n_plus,
        drive_power_minus=float(drive_power(n_plus, delta_a, K, kappa_a, kappa_d)),
        drive_power_plus=float(drive_power(n_minus, delta_a, K, kappa_a, kappa_d)),
    )


def _polish(n, delta_a, K, kappa_a, kappa_d, power, iters=60):
    """Damped Newton refinement of a cubic root to ~1e-12 relative residual."""
    kappa = kappa_a + kappa_d
    c = delta_a**2 + kappa**2 / 4.0
    for _ in range(iters):
        f = K * K * n**3 + 2 * delta_a * K * n * n + c * n - power
        scale = max(abs(power), K * K * abs(n) ** 3,
                    2 * abs(delta_a * K) * n * n, c * abs(n), 1e-300)
        if abs(f) <= 1e-13 * scale:
            break
        df = 3 * K * K * n * n + 4 * delta_a * K * n + c
        if df == 0:
            break
        step = f / df
        # damp near the fold where df -> 0 blows the step up
        limit = 0.25 * max(abs(n), 1.0)
        if abs(step) > limit:
            step = limit if step > 0 else -limit
        n -= step
    return n


def steady_states(power, delta_a, K, kappa_a, kappa_d) -> SteadyStateSolution:
    """All non-negative stationary photon numbers for a given drive power."""
    if power < 0:
        raise ValueError("drive power must be non-negative")
    kappa = kappa_a + kappa_d
    c = delta_a**2 + kappa**2 / 4.0
    if K == 0:
        n = power / c
        return SteadyStateSolution((float(n),), ("stable",), "monostable-low")

    coeffs = [K * K, 2.0 * delta_a * K, c, -power]
    raw = np.roots(coeffs)
    scale = max(abs(r) for r in raw) + 1e-30
    roots = []
    for r in raw:
        if abs(r.imag) > 1e-7 * scale:
            continue
        n = _polish(float(r.real), delta_a, K, kappa_a, kappa_d, power)
        if n < 0:
            if n > -1e-9 * scale:
                n = 0.0
            else:
                continue
        roots.append(n)
    roots.sort()
    # collapse numerically coincident roots (tangency at a critical drive)
    dedup = []
    for n in roots:
        if dedup and abs(n - dedup[-1]) < 1e-6 * (scale + 1.0):
            continue
        dedup.append(n)
    roots = dedup

    n_inflection = -2.0 * delta_a / (3.0 * K) if delta_a * K < 0 else None
    if len(roots) == 3:
        stability = ("stable", "unstable", "stable")
        regime = "bistable"
    elif len(roots) == 2:
        # tangent case: the root at the fold is the marginal/unstable one
        mid = n_inflection if n_inflection is not None else roots[0]
        if abs(roots[0] - mid) < abs(roots[1] - mid):
            stability = ("unstable", "stable")
        else:
            stability = ("stable", "unstable")
        regime = "bistable"
    else:
        stability = ("stable",)
        if n_inflection is not None and roots[0] > n_inflection:
            regime = "monostable-high"
        else:
            regime = "monostable-low"
    return SteadyStateSolution(tuple(roots), stability, regime)


@dataclass(frozen=True)
class HysteresisSweep:
    drive_grid: np.ndarray
    n_up: np.ndarray      # branch followed with the drive swept upward
    n_down: np.ndarray    # branch followed with the drive swept downward
    n_roots: np.ndarray
    regime: tuple


def hysteresis_sweep(delta_a, K, kappa_a, kappa_d, drive_grid) -> HysteresisSweep:
    """Adiabatic up/down sweep over a monotone grid of drive powers.

    The upward sweep follows the low branch until it disappears at the
    upper critical power, then jumps high; the downward sweep mirrors it at
    the lower critical power.  Without bistability both curves coincide.
    """
    grid = np.asarray(drive_grid, dtype=float)
    diffs = np.diff(grid)
    if len(grid) >= 2 and not (np.all(diffs >= 0) or np.all(diffs <= 0)):
        raise ValueError("drive_grid must be monotone")
    ascending = grid if len(grid) < 2 or diffs.sum() >= 0 else grid[::-1]

    try:
        crit = critical_photon_numbers(delta_a, K, kappa_a, kappa_d)
    except NoBistability:
        crit = None

    n_up, n_down, counts, regimes = [], [], [], []
    for power in ascending:
        sol = steady_states(power, delta_a, K, kappa_a, kappa_d)
        counts.append(len(sol.roots))
        regimes.append(sol.regime)
        if crit is None:
            n_up.append(sol.roots[0])
            n_down.append(sol.roots[0])
            continue
        n_up.append(sol.roots[0] if power < crit.drive_power_plus
                    else sol.roots[-1])
        n_down.append(sol.roots[-1] if power > crit.drive_power_minus
                      else sol.roots[0])

    n_up = np.array(n_up)
    n_down = np.array(n_down)
    counts = np.array(counts)
    regimes = tuple(regimes)
    if ascending is not grid:  # restore caller's orientation
        n_up, n_down = n_up[::-1], n_down[::-1]
        counts, regimes = counts[::-1], regimes[::-1]
    return HysteresisSweep(grid, n_up, n_down, counts, regimes)
