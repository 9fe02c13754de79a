"""Reproducible random states and channel-parameter draws.

Every random object is drawn from its own counter-based stream keyed by
``(seed, stream, index)`` (Philox via ``SeedSequence``), so any cell of a
candidate-by-state grid can be regenerated independently of the others.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import AmplitudeDampingFamily, PhaseDampingFamily
from .quantum import DensityMatrix, PureState

STATES_STREAM = 0
MAPS_STREAM = 1
AUX_STREAM = 2


@dataclass(frozen=True)
class SampleConfig:
    """Sizes, seed and parameter ranges for a sampling run.

    ``gamma_margin`` and ``gamma_min`` are fractions of ``lam``: decay
    rates are drawn from ``U(gamma_min*lam, lam/2 - gamma_margin*lam)``.
    Ohmicity parameters come from ``U(s_min, s_max)``. With ``stratified``
    candidate ``j`` of ``n_maps`` is uniform on the ``j``-th of ``n_maps``
    equal sub-intervals, which keeps the draws uniform while bounding the
    largest gap between neighbouring parameters.
    """

    seed: int = 0
    n_states: int = 2000
    n_maps: int = 2000
    gamma_min: float = 1e-3
    gamma_margin: float = 1e-3
    s_min: float = 0.05
    s_max: float = 2.0
    stratified: bool = True

    def __post_init__(self):
        if self.n_states < 1 or self.n_maps < 1:
            raise ValueError("n_states and n_maps must be at least 1")
        if not 0 <= self.gamma_min < 0.5 - self.gamma_margin:
            raise ValueError("degenerate decay-rate range")
        if not 0 < self.s_min < self.s_max <= 2.0:
            raise ValueError("degenerate Ohmicity range")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def cell_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for one addressable cell."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def haar_pure_state(dim: int, rng=None, dims=None) -> PureState:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    rng = _rng(rng)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z), dims or (dim,))


def induced_density_matrix(dim: int = 2, ancilla_dim: int = 2, rng=None) -> DensityMatrix:
    """Density matrix from the induced measure: trace out a Haar ancilla."""
    psi = haar_pure_state(dim * ancilla_dim, rng, (dim, ancilla_dim))
    m = psi.amplitudes.reshape(dim, ancilla_dim)
    rho = m @ m.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T), (dim,))


def haar_unitary(dim: int, rng=None) -> np.ndarray:
    rng = _rng(rng)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_two_qubit_state(rng=None, ancilla_dim: int = 4) -> DensityMatrix:
    """Induced-measure two-qubit state (default ancilla of dimension 4)."""
    rho = induced_density_matrix(4, ancilla_dim, rng)
    return DensityMatrix(rho.data, (2, 2), validate=False)


def _uniform(rng, lo: float, hi: float, stratum: tuple[int, int] | None) -> float:
    u = float(_rng(rng).uniform())
    if stratum is not None:
        j, n = stratum
        u = (j + u) / n
    return lo + (hi - lo) * u


def draw_divisible_ad(
    lam: float, rng=None, config: SampleConfig | None = None, stratum: tuple[int, int] | None = None
) -> AmplitudeDampingFamily:
    """Amplitude-damping family with ``lam`` fixed and ``lam > 2 gamma0``."""
    cfg = config or SampleConfig()
    g0 = _uniform(rng, cfg.gamma_min * lam, 0.5 * lam - cfg.gamma_margin * lam, stratum)
    return AmplitudeDampingFamily(max(g0, np.nextafter(0.0, 1.0)), lam)


def draw_divisible_pd(
    rng=None, config: SampleConfig | None = None, omega_c: float = 1.0, stratum: tuple[int, int] | None = None
) -> PhaseDampingFamily:
    """Phase-damping family with ``s`` uniform on ``(s_min, 2)``."""
    cfg = config or SampleConfig()
    return PhaseDampingFamily(_uniform(rng, cfg.s_min, cfg.s_max, stratum), omega_c)


def sample_states(config: SampleConfig) -> list[DensityMatrix]:
    """``config.n_states`` induced-measure qubit states, one stream per index."""
    return [induced_density_matrix(2, 2, cell_rng(config.seed, STATES_STREAM, i)) for i in range(config.n_states)]


def sample_divisible_families(probe, config: SampleConfig) -> list:
    """Divisible members of the probe's family, one stream per index."""
    n = config.n_maps

    cells = [(cell_rng(config.seed, MAPS_STREAM, j), (j, n) if config.stratified else None) for j in range(n)]
    if isinstance(probe, AmplitudeDampingFamily):
        return [draw_divisible_ad(probe.lam, rng, config, stratum) for rng, stratum in cells]
    if isinstance(probe, PhaseDampingFamily):
        return [draw_divisible_pd(rng, config, probe.omega_c, stratum) for rng, stratum in cells]
    raise TypeError(f"no divisible sampler for {type(probe).__name__}")
