"""epsilon-Markovian maps and entanglement-based bounds on non-Markovianity.

Three pieces live here:

* a collision model whose system-environment mutual information never
  exceeds ``epsilon``, giving explicit epsilon-Markovian candidate maps;
* epsilon-separability membership and entanglement estimates for
  two-qubit states;
* :func:`verify_bound`, which checks ``N <= E + d`` for a measure result,
  where ``E`` is the trace-distance entanglement of the dilated
  system-environment state and ``d`` the diameter of the separable set.

Mutual information and entropies are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import sqrtm
from scipy.optimize import minimize

from .channels import ChannelSnapshot, identity_snapshot
from .errors import ConfigurationError, ContractError, FreshQubitsExhausted
from .quantum import (
    DensityMatrix,
    PureState,
    _as_state,
    binary_entropy,
    partial_trace,
    partial_transpose,
    quantum_mutual_information,
    relative_entropy,
    tensor,
    trace_distance,
    von_neumann_entropy,
)

KET0 = DensityMatrix(np.diag([1.0, 0.0]).astype(complex), (2,), validate=False)
IQ_TOL = 1e-9
SLACK_TOL = 1e-7
DEFAULT_FRESH = 1000


# --------------------------------------------------------------------------
# two-qubit helpers
# --------------------------------------------------------------------------


def _h(lam: np.ndarray) -> float:
    lam = lam[lam > 1e-15]
    return float(-np.sum(lam * np.log2(lam)))


def _iq(rho: np.ndarray) -> float:
    """Mutual information of a 4x4 array without validation."""
    r = rho.reshape(2, 2, 2, 2)
    a = np.einsum("ijkj->ik", r)
    b = np.einsum("ijil->jl", r)
    s_ab = _h(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
    return max(0.0, _h(np.linalg.eigvalsh(a)) + _h(np.linalg.eigvalsh(b)) - s_ab)


def _ptrace_env(rho: np.ndarray) -> np.ndarray:
    return np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))


# --------------------------------------------------------------------------
# collision model
# --------------------------------------------------------------------------


def solve_alpha(epsilon: float, tol: float = 1e-12) -> float:
    """Real ``alpha`` in ``[1/sqrt2, 1]`` with ``2 h2(alpha^2) = epsilon``.

    ``alpha|00> + sqrt(1-alpha^2)|11>`` then has mutual information
    ``epsilon``. Bisection on ``p = alpha^2``, over which ``2 h2(p)`` falls
    monotonically from 2 to 0.
    """
    eps = float(epsilon)
    if not 0.0 <= eps <= 2.0 or math.isnan(eps):
        raise ValueError(f"epsilon={epsilon!r} outside [0, 2]")
    if eps == 0.0:
        return 1.0
    if eps == 2.0:
        return 1.0 / math.sqrt(2.0)
    lo, hi = 0.5, 1.0  # 2 h2(lo) >= eps >= 2 h2(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 2.0 * binary_entropy(mid) > eps:
            lo = mid
        else:
            hi = mid
    return math.sqrt(0.5 * (lo + hi))


def collision_hamiltonian(theta: float) -> np.ndarray:
    """``H = i theta |00><11| - i theta |11><00|``, zero on ``|01>, |10>``.

    ``exp(iH)`` rotates ``|00>`` into ``cos(theta)|00> + sin(theta)|11>``.
    """
    h = np.zeros((4, 4), dtype=complex)
    h[0, 3] = 1j * theta
    h[3, 0] = -1j * theta
    return h


def collision_unitary(theta: float, eps1: float) -> np.ndarray:
    """Closed form of ``exp(i eps1 H)``."""
    c, s = math.cos(eps1 * theta), math.sin(eps1 * theta)
    u = np.eye(4, dtype=complex)
    u[0, 0], u[0, 3] = c, -s
    u[3, 0], u[3, 3] = s, c
    return u


def collision_step_kraus(theta: float, eps1: float) -> tuple:
    """Kraus pair of one collision followed by discarding the ancilla."""
    c, s = math.cos(eps1 * theta), math.sin(eps1 * theta)
    return (np.diag([c, 1.0]).astype(complex), np.array([[0, 0], [s, 0]], dtype=complex))


@dataclass(frozen=True)
class CollisionModel:
    """System qubit colliding with fresh ``|0>`` ancillas.

    The first collision uses ``U(1)``; each later one uses ``U(eps1)`` with
    ``eps1`` in ``[0, 1]`` the largest value (found by bisection) that keeps
    the mutual information of every tracked trajectory at most ``epsilon``.
    """

    epsilon: float
    n_fresh: int = DEFAULT_FRESH
    bisection_tol: float = 1e-12

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 2.0:
            raise ValueError(f"epsilon={self.epsilon!r} outside [0, 2]")
        if self.n_fresh < 1:
            raise ValueError("n_fresh must be at least 1")

    @property
    def alpha(self) -> float:
        return solve_alpha(self.epsilon)

    @property
    def theta(self) -> float:
        return math.acos(min(1.0, self.alpha))

    @property
    def hamiltonian(self) -> np.ndarray:
        return collision_hamiltonian(self.theta)

    def unitary(self, eps1: float = 1.0) -> np.ndarray:
        return collision_unitary(self.theta, eps1)

    def _worst_iq(self, states: Sequence[np.ndarray], eps1: float) -> float:
        u = self.unitary(eps1)
        return max(_iq(u @ np.kron(r, KET0.data) @ u.conj().T) for r in states)

    def tune(self, states: Sequence[np.ndarray]) -> float:
        """Largest ``eps1`` in ``[0, 1]`` keeping every ``I_Q <= epsilon``."""
        target = self.epsilon + 1e-10
        if self._worst_iq(states, 1.0) <= target:
            return 1.0
        lo, hi = 0.0, 1.0
        while hi - lo > self.bisection_tol:
            mid = 0.5 * (lo + hi)
            if self._worst_iq(states, mid) <= target:
                lo = mid
            else:
                hi = mid
        return lo


@dataclass(frozen=True)
class CollisionStep:
    step: int
    eps1: float
    state_se: DensityMatrix = field(repr=False)
    mutual_information: float
    state_s: DensityMatrix = field(repr=False)

    @property
    def post_swap(self) -> DensityMatrix:
        return tensor(self.state_s, KET0)


@dataclass(frozen=True)
class CollisionTrace:
    epsilon: float
    steps: tuple

    @property
    def mutual_information(self) -> np.ndarray:
        return np.array([s.mutual_information for s in self.steps])

    @property
    def eps1(self) -> np.ndarray:
        return np.array([s.eps1 for s in self.steps])

    def __len__(self):
        return len(self.steps)


def run_collision_model(model: CollisionModel, n_steps: int, rho_s0=None) -> CollisionTrace:
    """Simulate ``n_steps`` collisions starting from ``rho_s0`` (default ``|0>``).

    Each step records the joint state before the swap, its mutual
    information and the reduced system state handed to the next ancilla.
    """
    if n_steps > model.n_fresh:
        raise FreshQubitsExhausted(f"{n_steps} steps requested, only {model.n_fresh} fresh qubits")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    rho = KET0.data if rho_s0 is None else _as_state(rho_s0).data
    steps = []
    for k in range(1, n_steps + 1):
        eps1 = model.tune([rho])
        u = model.unitary(eps1)
        se = u @ np.kron(rho, KET0.data) @ u.conj().T
        se = 0.5 * (se + se.conj().T)
        rho = _ptrace_env(se)
        steps.append(
            CollisionStep(
                k,
                eps1,
                DensityMatrix(se, (2, 2), validate=False),
                _iq(se),
                DensityMatrix(rho, (2,), validate=False),
            )
        )
    return CollisionTrace(model.epsilon, tuple(steps))


def _certification_states() -> list[np.ndarray]:
    """Pauli eigenstates and the maximally mixed state."""
    kets = [
        [1, 0],
        [0, 1],
        [1, 1],
        [1, -1],
        [1, 1j],
        [1, -1j],
    ]
    out = []
    for k in kets:
        v = np.array(k, dtype=complex) / np.linalg.norm(k)
        out.append(np.outer(v, v.conj()))
    out.append(0.5 * np.eye(2, dtype=complex))
    return out


class _Schedule:
    """Per-step ``eps1`` and cumulative superoperators, extended on demand."""

    def __init__(self, epsilon: float):
        self.model = CollisionModel(epsilon, 1)
        self.states = _certification_states()
        self.eps1: list[float] = []
        self.cumulative = [np.eye(4, dtype=complex)]

    def extend(self, n: int) -> None:
        theta = self.model.theta
        while len(self.eps1) < n:
            e = self.model.tune(self.states)
            kraus = collision_step_kraus(theta, e)
            step = sum(np.kron(a, a.conj()) for a in kraus)
            self.eps1.append(e)
            self.cumulative.append(step @ self.cumulative[-1])
            self.states = [sum(a @ r @ a.conj().T for a in kraus) for r in self.states]


@lru_cache(maxsize=64)
def _schedule(epsilon: float) -> _Schedule:
    return _Schedule(epsilon)


def _cumulative_superoperator(epsilon: float, n: int) -> np.ndarray:
    sched = _schedule(float(epsilon))
    sched.extend(n)
    return sched.cumulative[n]


@dataclass(frozen=True)
class CollisionFamily:
    """Reduced dynamics of the collision model, one collision per ``tau``.

    ``certified_epsilon`` is the epsilon the schedule was tuned for; the
    tuning tracks the Pauli eigenstates and the maximally mixed state, so
    the certificate is numerical on that input set.
    """

    epsilon: float
    tau: float = 1.0
    n_fresh: int = DEFAULT_FRESH

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 2.0:
            raise ValueError(f"epsilon={self.epsilon!r} outside [0, 2]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    tag = "collision"

    @property
    def certified_epsilon(self) -> float:
        return float(self.epsilon)

    @property
    def param(self) -> float:
        return float(self.tau)

    def n_collisions(self, t: float) -> int:
        n = int(math.floor(float(t) / self.tau + 1e-9))
        if n > self.n_fresh:
            raise FreshQubitsExhausted(f"time {t} needs {n} collisions, only {self.n_fresh} fresh qubits")
        return max(n, 0)

    def snapshot(self, t: float) -> ChannelSnapshot:
        n = self.n_collisions(t)
        if n == 0:
            return identity_snapshot(2, float(t))
        return ChannelSnapshot.from_superoperator(
            _cumulative_superoperator(self.epsilon, n), time=float(t), family=self.tag, params={"epsilon": self.epsilon, "tau": self.tau}
        )


def collision_candidates(epsilon: float, taus: Sequence[float], n_fresh: int = DEFAULT_FRESH):
    """Candidate set of collision families with the given collision periods."""
    from .measures import CandidateSet

    return CandidateSet("collision", tuple(CollisionFamily(epsilon, float(t), n_fresh) for t in taus), None, epsilon)


# --------------------------------------------------------------------------
# separability
# --------------------------------------------------------------------------

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def _tilde(v: np.ndarray) -> np.ndarray:
    return _YY @ v.conj()


def is_ppt(rho, tol: float = 1e-12) -> bool:
    return float(np.linalg.eigvalsh(partial_transpose(_as_state(rho, (2, 2)).data, 1, (2, 2)))[0]) >= -tol


def concurrence(rho) -> float:
    """Two-qubit concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    r = _as_state(rho, (2, 2)).data
    m = r @ _YY @ r.conj() @ _YY
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(m).real)[::-1], 0.0, None))
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def _takagi(tau: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """``tau = T diag(s) T^T`` for complex symmetric ``tau``, ``T`` unitary."""
    u, s, vh = np.linalg.svd(tau)
    q = u.conj().T @ vh.T
    w = np.eye(len(s), dtype=complex)
    scale = max(1.0, float(s[0]))
    start = 0
    while start < len(s):
        stop = start + 1
        while stop < len(s) and abs(s[stop] - s[start]) < tol * scale:
            stop += 1
        if s[start] > tol * scale:
            block = q[start:stop, start:stop]
            root = sqrtm(0.5 * (block + block.T))
            w[start:stop, start:stop] = 0.5 * (root + root.T)
        start = stop
    return u @ w, s


def wootters_states(rho) -> tuple[np.ndarray, np.ndarray]:
    """Subnormalized ``|x_i>`` with ``<x_i|x~_j> = l_i delta_ij``, ``l`` descending."""
    r = _as_state(rho, (2, 2)).data
    lam, vec = np.linalg.eigh(0.5 * (r + r.conj().T))
    v = vec * np.sqrt(np.clip(lam, 0.0, None))
    tau = v.conj().T @ _YY @ v.conj()
    t, s = _takagi(0.5 * (tau + tau.T))
    return v @ t, s


def _pure_iq(v: np.ndarray) -> float:
    n = float(np.vdot(v, v).real)
    if n <= 0:
        return 0.0
    m = v.reshape(2, 2) / math.sqrt(n)
    sv = np.linalg.svd(m, compute_uv=False) ** 2
    return 2.0 * _h(sv)


def separable_decomposition(rho, tol: float = 1e-9) -> tuple[np.ndarray, list[np.ndarray]] | None:
    """Explicit product-state ensemble for a separable two-qubit state.

    Uses the concurrence-zero construction: phases on the Wootters states
    are chosen so the four combinations ``sum_j (+-1) e^{i phi_j} x_j``
    all have vanishing concurrence. Returns ``None`` for entangled input.
    """
    x, lam = wootters_states(rho)
    if lam[0] - lam[1] - lam[2] - lam[3] > tol:
        return None
    # phases making sum_j e^{2i phi_j} l_j = 0: the l_j close a polygon
    phi = _closing_phases(lam)
    y = x * np.exp(1j * phi)[None, :]
    signs = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float)
    z = 0.5 * y @ signs.T
    weights = np.einsum("ji,ji->i", z.conj(), z).real
    keep = weights > 1e-15
    states = [z[:, i] / math.sqrt(weights[i]) for i in np.flatnonzero(keep)]
    return weights[keep], states


def _closing_phases(lam: np.ndarray) -> np.ndarray:
    """Angles ``phi`` with ``sum_j l_j e^{2 i phi_j} = 0`` given ``l_1 <= l_2+l_3+l_4``."""
    l1, l2, l3, l4 = (float(v) for v in lam)
    if l1 <= 0:
        return np.zeros(4)
    # put l1 and l2 head to tail, close the triangle with l3 + l4 as a rigid
    # segment of length L when possible, else bend l3 against l4.
    total = l2 + l3 + l4
    # choose a target length r for the pair (l3, l4): any r in [|l3-l4|, l3+l4]
    # such that l1, l2, r form a triangle
    lo = max(abs(l3 - l4), abs(l1 - l2))
    hi = min(l3 + l4, l1 + l2)
    if lo > hi + 1e-12 or total < l1 - 1e-12:
        raise ValueError("weights do not admit a closing polygon")
    r = 0.5 * (lo + hi)
    ang = np.zeros(4)
    # triangle l1 (angle 0), l2, r
    a2 = _triangle_angle(l1, l2, r)
    ang[1] = math.pi - a2
    w = -(l1 + l2 * np.exp(1j * ang[1]))
    base = float(np.angle(w)) if abs(w) > 1e-15 else 0.0
    if r <= 1e-15:
        b3 = 0.0
    else:
        b3 = _triangle_angle(r, l3, l4)
    ang[2] = base + b3
    if l4 > 1e-15:
        ang[3] = float(np.angle(w - l3 * np.exp(1j * ang[2])))
    return 0.5 * ang


def _triangle_angle(a: float, b: float, c: float) -> float:
    """Angle between sides ``a`` and ``b`` of a triangle with third side ``c``."""
    if a <= 1e-15 or b <= 1e-15:
        return 0.0
    cos = (a * a + b * b - c * c) / (2 * a * b)
    return math.acos(min(1.0, max(-1.0, cos)))


@dataclass(frozen=True)
class SeparabilityVerdict:
    """``status`` is ``"yes"``, ``"no"`` or ``"unknown"``.

    A ``"yes"`` carries ``weights`` and ``components`` (4x4 arrays);
    a ``"no"`` carries the negative partial-transpose eigenvalue as
    ``witness``.
    """

    status: str
    epsilon: float
    weights: np.ndarray | None = field(default=None, repr=False)
    components: tuple = field(default=(), repr=False)
    witness: float | None = None

    @property
    def is_eps_separable(self) -> str:
        return self.status

    def reconstruct(self) -> np.ndarray:
        return sum(w * c for w, c in zip(self.weights, self.components))

    def component_iq(self) -> np.ndarray:
        return np.array([_iq(c) for c in self.components])


def _projectors(vecs) -> tuple:
    return tuple(np.outer(v, v.conj()) for v in vecs)


def _random_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def _ensemble_search(rho: np.ndarray, epsilon: float, budget: int, rng) -> SeparabilityVerdict | None:
    """Random real rotations of the Wootters ensemble, best of ``budget``."""
    x, _ = wootters_states(rho)
    phases = np.array([1, 1j, 1j, 1j])
    y = x * phases[None, :]
    for attempt in range(budget):
        m = 4 + attempt % 13  # up to 16 components
        o = _random_orthogonal(m, rng)[:, :4]
        z = y @ o.T
        w = np.einsum("ji,ji->i", z.conj(), z).real
        keep = w > 1e-15
        comps = [z[:, i] / math.sqrt(w[i]) for i in np.flatnonzero(keep)]
        if all(_pure_iq(v) <= epsilon + IQ_TOL for v in comps):
            return SeparabilityVerdict("yes", epsilon, w[keep], _projectors(comps))
    return None


def eps_separable_membership(rho_se, epsilon: float, budget: int = 200, rng=None) -> SeparabilityVerdict:
    """Is ``rho_se`` a mixture of two-qubit states each with ``I_Q <= epsilon``?

    The state itself (when ``I_Q <= epsilon``) and the concurrence-zero
    decomposition of PPT states are tried first, then ``budget`` random
    real rotations of the Wootters ensemble. A ``"no"`` is only issued for
    ``epsilon = 0`` with a negative partial transpose.
    """
    state = _as_state(rho_se, (2, 2))
    rho = state.data
    eps = float(epsilon)
    ptm = float(np.linalg.eigvalsh(partial_transpose(rho, 1, (2, 2)))[0])
    if _iq(rho) <= eps + IQ_TOL:
        return SeparabilityVerdict("yes", eps, np.ones(1), (rho.copy(),))
    if ptm >= -1e-12:
        dec = separable_decomposition(rho)
        if dec is not None:
            w, comps = dec
            return SeparabilityVerdict("yes", eps, w, _projectors(comps))
    elif eps == 0.0:
        return SeparabilityVerdict("no", eps, witness=ptm)
    if eps > 0 and budget > 0:
        found = _ensemble_search(rho, eps, budget, np.random.default_rng(rng))
        if found is not None:
            return found
    return SeparabilityVerdict("unknown", eps, witness=ptm)


# --------------------------------------------------------------------------
# entanglement
# --------------------------------------------------------------------------


def entanglement_pure(state, cut: int = 1) -> float:
    """Entropy of entanglement of a pure state (ebits)."""
    if isinstance(state, PureState):
        rho = state.projector()
    else:
        rho = _as_state(state)
    return von_neumann_entropy(partial_trace(rho, range(cut)))


@dataclass(frozen=True)
class EntanglementEstimate:
    """Upper estimates of the relative entropy of entanglement.

    ``value`` is the smallest of ``iq_bound`` (product of marginals),
    ``dephased`` (state dephased in the product eigenbasis of its
    marginals) and ``variational`` (explicit separable ansatz, or ``inf``
    when not run).
    """

    value: float
    iq_bound: float
    dephased: float
    variational: float = math.inf

    def __float__(self):
        return self.value


def _product_eigenbasis(rho: np.ndarray) -> np.ndarray:
    r = rho.reshape(2, 2, 2, 2)
    _, va = np.linalg.eigh(np.einsum("ijkj->ik", r))
    _, vb = np.linalg.eigh(np.einsum("ijil->jl", r))
    return np.kron(va, vb)


def _dephased(rho: np.ndarray) -> np.ndarray:
    basis = _product_eigenbasis(rho)
    p = np.real(np.einsum("ji,jk,ki->i", basis.conj(), rho, basis))
    return (basis * p) @ basis.conj().T


def _separable_ansatz(params: np.ndarray, k: int) -> np.ndarray:
    p = params.reshape(k, 5)
    w = np.exp(p[:, 0] - p[:, 0].max())
    w = w / w.sum()

    def ket(th, ph):
        return np.array([math.cos(th / 2), np.exp(1j * ph) * math.sin(th / 2)])

    out = np.zeros((4, 4), dtype=complex)
    for wi, (_, t1, p1, t2, p2) in zip(w, p):
        v = np.kron(ket(t1, p1), ket(t2, p2))
        out += wi * np.outer(v, v.conj())
    return 0.995 * out + 0.005 * np.eye(4) / 4


def entanglement_mixed_approx(rho, cut: int = 1, budget: int = 0, rng=None, terms: int = 8) -> EntanglementEstimate:
    """Upper estimate of the relative entropy of entanglement of a two-qubit state.

    With ``budget > 0``, that many random restarts of a separable ansatz of
    ``terms`` product states (at most 16) are also minimized.
    """
    state = _as_state(rho, (2, 2))
    if cut != 1 or state.dims != (2, 2):
        raise ConfigurationError("only the 2x2 qubit cut is supported")
    r = state.data
    iq = quantum_mutual_information(state)
    if is_ppt(r):
        return EntanglementEstimate(0.0, iq, 0.0, 0.0)
    deph = relative_entropy(state, DensityMatrix(_dephased(r), (2, 2), validate=False))
    best = math.inf
    k = min(max(int(terms), 1), 16)
    gen = np.random.default_rng(rng)
    for _ in range(int(budget)):
        x0 = gen.uniform(0, 2 * math.pi, 5 * k)

        def f(x):
            v = relative_entropy(state, DensityMatrix(_separable_ansatz(x, k), (2, 2), validate=False))
            return v if math.isfinite(v) else 1e3

        res = minimize(f, x0, method="L-BFGS-B", options={"maxiter": 200})
        best = min(best, float(res.fun))
    return EntanglementEstimate(min(iq, deph, best), iq, deph, best)


def trace_entanglement_bounds(rho) -> tuple[float, float]:
    """Lower and upper bounds on ``min_sigma sep tr|rho - sigma|``.

    The lower bound comes from the partial-transpose witness built on the
    most negative eigenvector; the upper bound from the product of
    marginals and the product-eigenbasis dephasing.
    """
    state = _as_state(rho, (2, 2))
    r = state.data
    lam, vec = np.linalg.eigh(partial_transpose(r, 1, (2, 2)))
    if lam[0] >= -1e-14:
        return 0.0, 0.0
    phi = vec[:, 0]
    witness = partial_transpose(np.outer(phi, phi.conj()), 1, (2, 2))
    lower = -float(lam[0]) / float(np.max(np.abs(np.linalg.eigvalsh(witness))))
    a = partial_trace(state, [0])
    b = partial_trace(state, [1])
    upper = min(trace_distance(r, np.kron(a.data, b.data)), trace_distance(r, _dephased(r)))
    return max(lower, 0.0), upper


def eps_trace_entanglement_upper(rho, epsilon: float) -> float:
    """Upper bound on the trace distance to the epsilon-separable set."""
    state = _as_state(rho, (2, 2))
    r = state.data
    if _iq(r) <= epsilon + IQ_TOL or is_ppt(r):
        return 0.0
    a = partial_trace(state, [0])
    b = partial_trace(state, [1])
    return min(trace_distance(r, np.kron(a.data, b.data)), trace_distance(r, _dephased(r)))


# --------------------------------------------------------------------------
# diameters
# --------------------------------------------------------------------------


def separable_diameter(distance: str = "trace", dims: tuple = (2, 2)) -> float:
    """Largest distance between two separable states.

    For the unnormalized trace distance this is 2, reached by ``|00>`` and
    ``|11>``. Other backends are unsupported.
    """
    if distance != "trace":
        raise ConfigurationError(f"no separable diameter for distance {distance!r}")
    if tuple(dims) != (2, 2):
        raise ConfigurationError("only 2x2 is supported")
    return 2.0


def _random_kets(n: int, rng, dim: int = 2) -> np.ndarray:
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _pure_pair_max(vecs: np.ndarray) -> float:
    """Largest pairwise trace distance ``2 sqrt(1 - |<a|b>|^2)`` in a pool."""
    overlap = np.abs(vecs.conj() @ vecs.T) ** 2
    return float(2.0 * np.sqrt(max(0.0, 1.0 - float(np.min(overlap)))))


def sampled_separable_diameter(n_pairs: int = 100_000, rng=None) -> float:
    """Largest trace distance over ``n_pairs`` random pairs of product pure states."""
    gen = np.random.default_rng(rng)
    a = np.einsum("ni,nj->nij", _random_kets(n_pairs, gen), _random_kets(n_pairs, gen)).reshape(n_pairs, 4)
    b = np.einsum("ni,nj->nij", _random_kets(n_pairs, gen), _random_kets(n_pairs, gen)).reshape(n_pairs, 4)
    overlap = np.abs(np.einsum("ni,ni->n", a.conj(), b)) ** 2
    return float(np.max(2.0 * np.sqrt(np.clip(1.0 - overlap, 0.0, None))))


def _eps_pure_pool(epsilon: float, n: int, rng) -> np.ndarray:
    """Locally rotated Schmidt states ``a|00> + b|11>`` with ``I_Q <= epsilon``."""
    p_min = solve_alpha(epsilon) ** 2
    p = rng.uniform(p_min, 1.0, n)
    psi = np.zeros((n, 4), dtype=complex)
    psi[:, 0], psi[:, 3] = np.sqrt(p), np.sqrt(1.0 - p)
    local = np.stack([np.kron(_haar2(rng), _haar2(rng)) for _ in range(n)])
    return np.einsum("nij,nj->ni", local, psi)


def _haar2(rng) -> np.ndarray:
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def sampled_eps_separable_diameter(epsilon: float, n_states: int = 2000, rng=None) -> float:
    """Sampled estimate of the diameter of the epsilon-separable set.

    The pool holds random pure states with ``I_Q <= epsilon``; the
    diameter of a convex hull is attained at extreme points, so pure
    members suffice. The estimate is a lower bound on the true diameter.
    """
    gen = np.random.default_rng(rng)
    return _pure_pair_max(_eps_pure_pool(float(epsilon), int(n_states), gen))


# --------------------------------------------------------------------------
# bound verification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Terms of ``N <= E + d`` at one time.

    ``E`` is a certified lower bound on the entanglement of the dilated
    state (0 for epsilon > 0), ``E_upper`` an upper bound, ``d`` the
    diameter used in the check (sampled for epsilon > 0) and ``D_se`` the
    distance between the dilated state and the candidate's product
    extension, which must sit between ``N`` and ``E_upper + d_exact``.
    """

    time: float
    mode: str
    epsilon: float
    N: float
    E: float
    E_upper: float
    d: float
    d_exact: float
    D_se: float
    d_samples: int = 0

    @property
    def slack(self) -> float:
        return self.E + self.d - self.N

    @property
    def holds(self) -> bool:
        return self.slack >= -SLACK_TOL

    @property
    def chain_holds(self) -> bool:
        return self.N <= self.D_se + SLACK_TOL and self.D_se <= self.E_upper + self.d_exact + SLACK_TOL


def verify_bound(
    probe,
    t: float,
    result,
    *,
    epsilon: float | None = None,
    dilation: Callable | None = None,
    d_samples: int = 2000,
    d_eps: float | None = None,
    rng=None,
) -> BoundReport:
    """Check the entanglement bound for one measure result.

    The probe's system-environment state is built from the arg-extremal
    input recorded in ``result``. ``dilation(probe, t, rho)`` overrides the
    probe's own ``dilate``. For epsilon > 0 the diameter is sampled from
    ``d_samples`` states unless a precomputed ``d_eps`` is passed.
    """
    if getattr(result, "distance", "trace") != "trace":
        raise ConfigurationError("the bound is only checked for the trace distance")
    rho_bar = getattr(result, "probe_state", None)
    if rho_bar is None:
        raise ContractError("measure result carries no arg-extremal probe state")
    eps = float(result.epsilon if epsilon is None else epsilon)
    se = dilation(probe, t, rho_bar) if dilation is not None else probe.dilate(t, rho_bar)
    se = _as_state(se, (2, 2))
    cand = result.candidate.snapshot(t).apply(rho_bar)
    d_se = trace_distance(se, tensor(cand, KET0))
    d_exact = separable_diameter("trace")
    if eps == 0.0:
        e_lo, e_hi = trace_entanglement_bounds(se)
        d, n_samp = d_exact, 0
    else:
        e_lo, e_hi = 0.0, eps_trace_entanglement_upper(se, eps)
        d = sampled_eps_separable_diameter(eps, d_samples, rng) if d_eps is None else float(d_eps)
        n_samp = int(d_samples)
    return BoundReport(float(t), result.mode, eps, float(result.value), e_lo, e_hi, d, d_exact, d_se, n_samp)


__all__ = [
    "solve_alpha",
    "CollisionModel",
    "CollisionStep",
    "CollisionTrace",
    "CollisionFamily",
    "collision_hamiltonian",
    "collision_unitary",
    "collision_step_kraus",
    "collision_candidates",
    "run_collision_model",
    "SeparabilityVerdict",
    "eps_separable_membership",
    "separable_decomposition",
    "wootters_states",
    "concurrence",
    "is_ppt",
    "entanglement_pure",
    "EntanglementEstimate",
    "entanglement_mixed_approx",
    "trace_entanglement_bounds",
    "eps_trace_entanglement_upper",
    "separable_diameter",
    "sampled_separable_diameter",
    "sampled_eps_separable_diameter",
    "BoundReport",
    "verify_bound",
]
