"""Time-local amplitude- and phase-damping qubit channels.

Basis convention: ``|0>`` is the ground state and ``|1>`` the excited state,
so full amplitude damping sends every input to ``|0><0|``.

Amplitude damping follows ``drho/dt = gamma_a(t) (s- rho s+ - {s+ s-, rho}/2)``
with the Lorentzian-bath rate

    gamma_a(t) = 2 lam g0 sinh(g t/2) / (g cosh(g t/2) + lam sinh(g t/2)),
    g = sqrt(lam^2 - 2 g0 lam),

whose solution multiplies the excited population by ``|G(t)|^2`` and the
coherence by ``G(t)``, where

    G(t) = exp(-lam t/2) [cosh(g t/2) + (lam/g) sinh(g t/2)].

``G`` is smooth and real for real parameters; when ``g`` is imaginary it
crosses zero and the rate has poles there.

Phase damping follows ``drho/dt = gamma(t)/2 (Z rho Z - rho)`` with the
zero-temperature Ohmic-like dephasing rate
``omega_c (1 + x^2)^(-s/2) Gamma(s) sin(s arctan x)``, ``x = omega_c t``.
Coherences are multiplied by ``exp(-int_0^t gamma)``; the integral has the
closed form ``Gamma(s-1) [1 - (1 + x^2)^((1-s)/2) cos((s-1) arctan x)]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import InvalidChannelError, PoleError
from .quantum import KRAUS_TOL, DensityMatrix, _as_state, check_kraus

__all__ = [
    "ChannelSnapshot",
    "AmplitudeDampingFamily",
    "PhaseDampingFamily",
    "Divisibility",
    "ad_decay_rate",
    "ad_pole_times",
    "ad_decoherence_function",
    "ad_snapshot",
    "ad_dilation",
    "pd_dephasing_rate",
    "pd_integrated_rate",
    "pd_coherence",
    "pd_snapshot",
    "pd_dilation",
    "is_divisible",
    "default_horizon",
    "rk4_master_equation",
    "ad_pseudomode_evolution",
]

POLE_TOL = 1e-9
RATE_TOL = 1e-9
DEFAULT_GRID_POINTS = 2000

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


# --------------------------------------------------------------------------
# Snapshots
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChannelSnapshot:
    """A CPTP map at a fixed time, stored as Kraus operators."""

    kraus: tuple
    time: float = 0.0
    family: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise InvalidChannelError("empty Kraus list")
        check_kraus(ops, KRAUS_TOL)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[1]

    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus)

    def apply(self, rho) -> DensityMatrix:
        state = _as_state(rho)
        out = self.apply_array(state.data)
        return DensityMatrix(out, state.dims, validate=False)

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a single matrix or a stack ``(..., d, d)``."""
        k = self.stacked()
        out = np.einsum("kab,...bc,kdc->...ad", k, rho, k.conj())
        return 0.5 * (out + np.swapaxes(out, -1, -2).conj())

    def superoperator(self) -> np.ndarray:
        """Row-stacking superoperator: ``vec(out) = S @ rho.reshape(-1)``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def choi(self) -> DensityMatrix:
        """Normalized Choi state ``(I (x) Lambda)(|Psi+><Psi+|)``, reference first."""
        return DensityMatrix(_superop_to_choi(self.superoperator()) / self.dim, (self.dim, self.dim), validate=False)

    @classmethod
    def from_superoperator(cls, superop: np.ndarray, **kwargs) -> "ChannelSnapshot":
        return cls(_choi_to_kraus(_superop_to_choi(superop)), **kwargs)


def _superop_to_choi(superop: np.ndarray) -> np.ndarray:
    """Unnormalized Choi matrix ``sum_ij |i><j| (x) Lambda(|i><j|)``."""
    d = int(round(math.sqrt(superop.shape[0])))
    return superop.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def _choi_to_kraus(choi: np.ndarray, tol: float = 1e-13) -> list[np.ndarray]:
    d = int(round(math.sqrt(choi.shape[0])))
    lam, vec = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    ops = [math.sqrt(l) * vec[:, i].reshape(d, d).T for i, l in enumerate(lam) if l > tol]
    return ops


def identity_snapshot(dim: int = 2, time: float = 0.0) -> ChannelSnapshot:
    return ChannelSnapshot((np.eye(dim, dtype=complex),), time, "identity")


# --------------------------------------------------------------------------
# Amplitude damping
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeDampingFamily:
    """Lorentzian-bath amplitude damping with parameters ``gamma0`` and ``lam``.

    Both rates are in units of ``1/kappa``; times are in units of ``kappa``.
    """

    gamma0: float
    lam: float

    tag = "amplitude_damping"

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.lam > 0):
            raise ValueError(f"gamma0 and lam must be positive, got {self.gamma0}, {self.lam}")

    @property
    def param(self) -> float:
        return self.gamma0

    @property
    def discriminant(self) -> float:
        return self.lam * self.lam - 2.0 * self.gamma0 * self.lam

    @property
    def g(self) -> complex:
        return complex(np.sqrt(complex(self.discriminant)))

    @property
    def analytically_divisible(self) -> bool:
        return self.lam >= 2.0 * self.gamma0

    def rate(self, t):
        return ad_decay_rate(self, t)

    def decoherence(self, t):
        return ad_decoherence_function(self, t)

    def snapshot(self, t: float) -> ChannelSnapshot:
        return ad_snapshot(self, t)

    def dilate(self, t: float, rho_s) -> DensityMatrix:
        return ad_dilation(self, t, rho_s)

    def axis_scale(self) -> float:
        """``|g|``: the factor turning times into the ``g t / i`` axis."""
        return abs(self.g)


def ad_pole_times(fam: AmplitudeDampingFamily, t_max: float) -> np.ndarray:
    """Poles of the decay rate in ``[0, t_max]`` (empty for real ``g``)."""
    d = fam.discriminant
    if d >= 0:
        return np.empty(0)
    w = math.sqrt(-d)
    first = 2.0 * (math.pi - math.atan(w / fam.lam)) / w
    period = 2.0 * math.pi / w
    if t_max < first:
        return np.empty(0)
    n = int(math.floor((t_max - first) / period)) + 1
    return first + period * np.arange(n)


def _ad_rate_raw(fam: AmplitudeDampingFamily, t: np.ndarray) -> np.ndarray:
    lam, g0 = fam.lam, fam.gamma0
    d = fam.discriminant
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if d > 0:
            g = math.sqrt(d)
            th = np.tanh(0.5 * g * t)
            return 2.0 * lam * g0 * th / (g + lam * th)
        if d == 0:
            return 2.0 * lam * g0 * (0.5 * t) / (1.0 + 0.5 * lam * t)
        g = 1j * math.sqrt(-d)
        sh = np.sinh(0.5 * g * t)
        val = 2.0 * lam * g0 * sh / (g * np.cosh(0.5 * g * t) + lam * sh)
    finite = np.isfinite(val)
    resid = np.abs(val.imag[finite])
    if resid.size and np.max(resid / np.maximum(1.0, np.abs(val.real[finite]))) > 1e-12:
        raise ArithmeticError("imaginary residue in decay rate exceeds 1e-12")
    return val.real


def ad_decay_rate(fam: AmplitudeDampingFamily, t):
    """Time-dependent decay rate; raises :class:`PoleError` within 1e-9 of a pole."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise ValueError("t must be non-negative")
    poles = ad_pole_times(fam, float(np.max(tt)) + 1.0) if tt.size else np.empty(0)
    if poles.size:
        gap = np.abs(tt.reshape(-1)[:, None] - poles[None, :])
        hit = np.argwhere(gap < POLE_TOL)
        if hit.size:
            raise PoleError(poles[hit[0, 1]])
    out = _ad_rate_raw(fam, tt)
    return float(out) if np.ndim(t) == 0 else out


def ad_decoherence_function(fam: AmplitudeDampingFamily, t):
    """``G(t)``: excited population scales by ``|G|^2``, coherence by ``G``."""
    tt = np.asarray(t, dtype=float)
    lam = fam.lam
    d = fam.discriminant
    if d == 0:
        out = (np.exp(-0.5 * lam * tt) * (1.0 + 0.5 * lam * tt)).astype(complex)
    else:
        g = np.sqrt(complex(d))
        with np.errstate(over="ignore"):
            out = 0.5 * (1 + lam / g) * np.exp(0.5 * (g - lam) * tt) + 0.5 * (1 - lam / g) * np.exp(
                -0.5 * (g + lam) * tt
            )
    return complex(out) if np.ndim(t) == 0 else out


def _ad_kraus(G: complex) -> tuple:
    p = max(0.0, 1.0 - abs(G) ** 2)
    k0 = np.array([[1, 0], [0, G]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return k0, k1


def ad_snapshot(fam: AmplitudeDampingFamily, t: float) -> ChannelSnapshot:
    G = ad_decoherence_function(fam, float(t))
    if abs(G.imag) < 1e-12:
        G = complex(G.real, 0.0)
    return ChannelSnapshot(_ad_kraus(G), float(t), fam.tag, {"gamma0": fam.gamma0, "lam": fam.lam})


def _ad_isometry(G: complex) -> np.ndarray:
    """``V: S -> S (x) E`` with ``V|g> = |g0>``, ``V|e> = G|e0> + sqrt(1-|G|^2)|g1>``."""
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0
    v[2, 1] = G
    v[1, 1] = math.sqrt(max(0.0, 1.0 - abs(G) ** 2))
    return v


def ad_dilation_unitary(fam: AmplitudeDampingFamily, t: float) -> np.ndarray:
    """Two-qubit unitary (S first, E second) acting as the single-excitation dilation."""
    G = ad_decoherence_function(fam, float(t))
    s = math.sqrt(max(0.0, 1.0 - abs(G) ** 2))
    u = np.eye(4, dtype=complex)
    # rotation inside span{|e0> (index 2), |g1> (index 1)}
    u[2, 2], u[1, 2] = G, s
    u[2, 1], u[1, 1] = -s, np.conj(G)
    return u


def ad_dilation(fam: AmplitudeDampingFamily, t: float, rho_s) -> DensityMatrix:
    """System-environment state ``U(t) (rho_s (x) |0><0|) U(t)^+``."""
    state = _as_state(rho_s)
    v = _ad_isometry(ad_decoherence_function(fam, float(t)))
    return DensityMatrix(v @ state.data @ v.conj().T, (2, 2), validate=False)


# --------------------------------------------------------------------------
# Phase damping
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseDampingFamily:
    """Zero-temperature dephasing with Ohmicity ``s`` and cutoff ``omega_c``."""

    s: float
    omega_c: float = 1.0

    tag = "phase_damping"

    def __post_init__(self):
        if not (self.s > 0 and self.omega_c > 0):
            raise ValueError(f"s and omega_c must be positive, got {self.s}, {self.omega_c}")

    @property
    def param(self) -> float:
        return self.s

    @property
    def analytically_divisible(self) -> bool:
        return self.s <= 2.0

    def rate(self, t):
        return pd_dephasing_rate(self, t)

    def coherence(self, t):
        return pd_coherence(self, t)

    def snapshot(self, t: float) -> ChannelSnapshot:
        return pd_snapshot(self, t)

    def dilate(self, t: float, rho_s) -> DensityMatrix:
        return pd_dilation(self, t, rho_s)

    def axis_scale(self) -> float:
        return self.omega_c

    @cached_property
    def gamma_s(self) -> float:
        return float(gamma_fn(self.s))


def pd_dephasing_rate(fam: PhaseDampingFamily, t):
    tt = np.asarray(t, dtype=float)
    x = fam.omega_c * tt
    out = fam.omega_c * (1.0 + x * x) ** (-0.5 * fam.s) * fam.gamma_s * np.sin(fam.s * np.arctan(x))
    return float(out) if np.ndim(t) == 0 else out


def pd_integrated_rate(fam: PhaseDampingFamily, t):
    """``int_0^t gamma(u) du`` in closed form, stable through ``s = 1``."""
    tt = np.asarray(t, dtype=float)
    x = fam.omega_c * tt
    a = fam.s - 1.0
    half_log = 0.5 * np.log1p(x * x)
    theta = np.arctan(x)
    if a == 0.0:
        out = half_log
    else:
        # 1 - Re exp(-a (half_log + i theta)), written to avoid cancellation
        em1 = np.expm1(-a * half_log)
        one_minus = -(em1 * np.cos(a * theta) - 2.0 * np.sin(0.5 * a * theta) ** 2)
        out = fam.gamma_s * one_minus / a
    return float(out) if np.ndim(t) == 0 else out


def pd_coherence(fam: PhaseDampingFamily, t):
    """Coherence multiplier ``exp(-int_0^t gamma)``."""
    out = np.exp(-np.asarray(pd_integrated_rate(fam, t)))
    return float(out) if np.ndim(t) == 0 else out


def _pd_kraus(c: float) -> tuple:
    if c > 1.0 + 1e-12 or c < -1e-12:
        raise InvalidChannelError(f"coherence factor {c} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    return (math.sqrt(0.5 * (1 + c)) * np.eye(2, dtype=complex), math.sqrt(0.5 * (1 - c)) * SIGMA_Z)


def pd_snapshot(fam: PhaseDampingFamily, t: float) -> ChannelSnapshot:
    c = pd_coherence(fam, float(t))
    return ChannelSnapshot(_pd_kraus(c), float(t), fam.tag, {"s": fam.s, "omega_c": fam.omega_c})


def pd_dilation(fam: PhaseDampingFamily, t: float, rho_s) -> DensityMatrix:
    """``V|0> = |0>|0>``, ``V|1> = |1>(c|0> + sqrt(1-c^2)|1>)``."""
    state = _as_state(rho_s)
    c = pd_coherence(fam, float(t))
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0
    v[2, 1] = c
    v[3, 1] = math.sqrt(max(0.0, 1.0 - c * c))
    return DensityMatrix(v @ state.data @ v.conj().T, (2, 2), validate=False)


# --------------------------------------------------------------------------
# Divisibility
# --------------------------------------------------------------------------


class Divisibility(NamedTuple):
    divisible: bool
    first_violation: float | None
    min_choi_eigenvalue: float


def default_horizon(fam) -> float:
    """A horizon long enough to expose the first loss of divisibility, if any."""
    if isinstance(fam, AmplitudeDampingFamily):
        if fam.discriminant < 0:
            w = math.sqrt(-fam.discriminant)
            return 1.5 * 2.0 * (math.pi - math.atan(w / fam.lam)) / w
        return 10.0 / fam.lam
    if isinstance(fam, PhaseDampingFamily):
        if fam.s > 2:
            return 1.5 * math.tan(math.pi / fam.s) / fam.omega_c
        return 20.0 / fam.omega_c
    raise TypeError(f"no default horizon for {type(fam).__name__}")


def _raw_rate(fam, t: np.ndarray) -> np.ndarray:
    if isinstance(fam, AmplitudeDampingFamily):
        return _ad_rate_raw(fam, t)
    return np.asarray(pd_dephasing_rate(fam, t))


def _superoperators(fam, grid: np.ndarray) -> np.ndarray:
    """Row-stacking superoperators on a grid, batched for the two families."""
    n = grid.size
    k = np.zeros((2, n, 2, 2), dtype=complex)
    if isinstance(fam, AmplitudeDampingFamily):
        G = np.asarray(ad_decoherence_function(fam, grid), dtype=complex)
        k[0, :, 0, 0] = 1.0
        k[0, :, 1, 1] = G
        k[1, :, 0, 1] = np.sqrt(np.clip(1.0 - np.abs(G) ** 2, 0.0, None))
    elif isinstance(fam, PhaseDampingFamily):
        c = np.clip(np.asarray(pd_coherence(fam, grid)), 0.0, 1.0)
        k[0] = np.sqrt(0.5 * (1 + c))[:, None, None] * np.eye(2)
        k[1] = np.sqrt(0.5 * (1 - c))[:, None, None] * SIGMA_Z
    else:
        return np.stack([fam.snapshot(t).superoperator() for t in grid])
    return np.einsum("knab,kncd->nacbd", k, k.conj()).reshape(n, 4, 4)


def _intermediate_choi_min(fam, grid: np.ndarray) -> float:
    sup = _superoperators(fam, grid)
    cond = np.linalg.cond(sup[:-1])
    ok = cond < 1e10
    if not np.any(ok):
        return float("nan")
    inter = sup[1:][ok] @ np.linalg.inv(sup[:-1][ok])
    d = int(round(math.sqrt(sup.shape[1])))
    choi = inter.reshape(-1, d, d, d, d).transpose(0, 3, 1, 4, 2).reshape(-1, d * d, d * d)
    choi = 0.5 * (choi + np.swapaxes(choi, -1, -2).conj())
    return float(np.min(np.linalg.eigvalsh(choi)[:, 0]))


def is_divisible(fam, t_grid: Sequence[float] | None = None, *, cross_check: bool = True) -> Divisibility:
    """CP-divisibility of a single-jump-operator family on a time grid.

    The verdict is rate positivity (``>= -1e-9``) at every grid point, which
    is equivalent to CP-divisibility for these channels. With
    ``cross_check`` the smallest Choi eigenvalue of the intermediate maps
    between consecutive grid times is reported as well.
    """
    if t_grid is None:
        t_grid = np.linspace(0.0, default_horizon(fam), DEFAULT_GRID_POINTS)
    grid = np.asarray(t_grid, dtype=float)
    rates = _raw_rate(fam, grid)
    bad = ~np.isfinite(rates) | (rates < -RATE_TOL)
    first = float(grid[np.argmax(bad)]) if np.any(bad) else None
    choi_min = _intermediate_choi_min(fam, grid) if cross_check and grid.size > 1 else float("nan")
    return Divisibility(first is None, first, choi_min)


# --------------------------------------------------------------------------
# Reference integrators (used as independent oracles)
# --------------------------------------------------------------------------


def rk4_master_equation(
    rate: Callable[[float], float],
    jump: np.ndarray,
    rho0: np.ndarray,
    times: Sequence[float],
    *,
    hamiltonian: np.ndarray | None = None,
    max_step: float = 1e-3,
) -> np.ndarray:
    """Classical RK4 for ``drho/dt = -i[H, rho] + rate(t) D_L[rho]``.

    ``rho0`` may be a stack ``(n, d, d)``; the result has shape
    ``(len(times), *rho0.shape)`` and starts at ``times[0]``.
    """
    L = np.asarray(jump, dtype=complex)
    Ld = L.conj().T
    LdL = Ld @ L
    H = None if hamiltonian is None else np.asarray(hamiltonian, dtype=complex)

    def rhs(t, r):
        out = rate(t) * (L @ r @ Ld - 0.5 * (LdL @ r + r @ LdL))
        if H is not None:
            out = out - 1j * (H @ r - r @ H)
        return out

    times = np.asarray(times, dtype=float)
    r = np.array(rho0, dtype=complex)
    out = np.empty((times.size,) + r.shape, dtype=complex)
    out[0] = r
    for i in range(1, times.size):
        t0, t1 = times[i - 1], times[i]
        n = max(1, int(math.ceil((t1 - t0) / max_step)))
        h = (t1 - t0) / n
        t = t0
        for _ in range(n):
            k1 = rhs(t, r)
            k2 = rhs(t + 0.5 * h, r + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, r + 0.5 * h * k2)
            k4 = rhs(t + h, r + h * k3)
            r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[i] = r
    return out


def ad_pseudomode_evolution(
    fam: AmplitudeDampingFamily, rho0: np.ndarray, times: Sequence[float], *, max_step: float = 5e-4
) -> np.ndarray:
    """Reduced qubit states from a qubit coupled to a leaky resonant mode.

    Coupling ``sqrt(g0 lam / 2)`` and mode leakage ``2 lam`` reproduce the
    Lorentzian-bath dynamics exactly, including the non-divisible regime,
    without going through the time-local rate.
    """
    omega = math.sqrt(0.5 * fam.gamma0 * fam.lam)
    a = np.kron(np.eye(2), SIGMA_MINUS)  # qubit (x) mode, mode truncated at one photon
    sp = np.kron(SIGMA_MINUS.conj().T, np.eye(2))
    H = omega * (sp @ a + sp.conj().T @ a.conj().T)
    rho0 = np.asarray(rho0, dtype=complex)
    vac = np.diag([1.0, 0.0]).astype(complex)
    joint = np.einsum("...ab,cd->...acbd", rho0, vac).reshape(rho0.shape[:-2] + (4, 4))
    traj = rk4_master_equation(lambda _t: 2.0 * fam.lam, a, joint, times, hamiltonian=H, max_step=max_step)
    t4 = traj.reshape(traj.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...aibi->...ab", t4)
