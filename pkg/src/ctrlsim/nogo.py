"""Numerical falsification harness for fixed-circuit control.

The question under test: can a fixed circuit, with parametrized gates
surrounding single insertions of an unknown unitary (wired into the
circuit as a tensor-factor operation), reproduce the controlled
operation for every unknown?  The harness maximizes the worst-case
process fidelity over the circuit parameters and reports how close the
best circuit gets; the direct-sum constructions realized by the
photonic and ion schemes reach fidelity 1 on the same metric.

Circuit structures, on (ancilla a, control c = 2, system d) with the
ancilla prepared in |0> and traced out at the end:

* ``ctrl_u``:  B (1_ac x U) A          target  1_d (+) U
* ``switch``:  C (1_ac x Ug) B (1_ac x Uf) A   target  Ug Uf (+) Uf Ug

Matrix products above are written right to left (A acts first).  Any
fixed operation applied to the ancilla before trace-out drops out of
the induced channel, so it is not optimized over.

Choi convention: unnormalized, output factor first, columns flattened
in C order; the Choi matrix of a CPTP map on dimension D has trace D.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .hilbert import Operator, fidelity_pure, haar_unitary, random_unit_vector
from . import photonic

CTRL_U = "ctrl_u"
SWITCH = "switch"
KINDS = (CTRL_U, SWITCH)


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


def _n_slots(kind: str) -> int:
    return 2 if kind == CTRL_U else 3


def hermitian_from_params(vec: np.ndarray, dim: int) -> np.ndarray:
    """Real vector of length dim**2 to a Hermitian matrix.

    First ``dim`` entries fill the diagonal; the remaining pairs fill
    the real and imaginary parts of the strict upper triangle.
    """
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (dim * dim,):
        raise ValueError(f"expected {dim * dim} parameters, got {vec.shape}")
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.diag_indices(dim)] = vec[:dim]
    iu = np.triu_indices(dim, k=1)
    n_off = iu[0].size
    h[iu] = vec[dim : dim + n_off] + 1j * vec[dim + n_off :]
    h = h + np.triu(h, k=1).conj().T
    return h


@dataclass(frozen=True)
class ParamCircuit:
    """Fixed circuit skeleton with parametrized surrounding gates.

    Each slot gate is ``expm(i H)`` for a Hermitian generator ``H`` on
    the full (ancilla, control, system) space, so the parameter count
    is ``n_slots * (a * 2 * d)**2``.
    """

    kind: str
    ancilla_dim: int
    system_dim: int
    params: np.ndarray

    def __init__(self, kind: str, ancilla_dim: int, system_dim: int, params):
        _check_kind(kind)
        if ancilla_dim < 1 or system_dim < 1:
            raise ValueError("dimensions must be positive")
        params = np.array(params, dtype=float).reshape(-1)
        expected = _n_slots(kind) * (ancilla_dim * 2 * system_dim) ** 2
        if params.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got {params.shape[0]}")
        params.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "ancilla_dim", int(ancilla_dim))
        object.__setattr__(self, "system_dim", int(system_dim))
        object.__setattr__(self, "params", params)

    @property
    def full_dim(self) -> int:
        return self.ancilla_dim * 2 * self.system_dim

    @property
    def cs_dim(self) -> int:
        return 2 * self.system_dim

    @cached_property
    def slot_matrices(self) -> tuple[np.ndarray, ...]:
        """Realized unitaries of the parametrized slots, in application
        order (first matrix acts first)."""
        return _slot_matrices(self.kind, self.full_dim, self.params)


def _slot_matrices(kind: str, full_dim: int, params: np.ndarray) -> tuple[np.ndarray, ...]:
    dd = full_dim * full_dim
    return tuple(
        expm(1j * hermitian_from_params(params[k * dd : (k + 1) * dd], full_dim))
        for k in range(_n_slots(kind))
    )


def param_count(kind: str, ancilla_dim: int, system_dim: int) -> int:
    return _n_slots(kind) * (ancilla_dim * 2 * system_dim) ** 2


def _oracle_entries(kind: str, oracle) -> tuple[np.ndarray, ...]:
    if kind == CTRL_U:
        if not isinstance(oracle, Operator):
            raise TypeError("ctrl_u expects a single Operator oracle")
        return (oracle.entries,)
    try:
        f, g = oracle
    except (TypeError, ValueError):
        raise TypeError("switch expects a pair of Operators") from None
    return (f.entries, g.entries)


def _circuit_unitary(pc: ParamCircuit, oracle) -> np.ndarray:
    """Total unitary on (a, c, s) with the oracle inserted as 1_ac x U."""
    entries = _oracle_entries(pc.kind, oracle)
    for u in entries:
        if u.shape != (pc.system_dim, pc.system_dim):
            raise ValueError(
                f"oracle dimension {u.shape[0]} does not match system dim {pc.system_dim}"
            )
    eye_ac = np.eye(pc.ancilla_dim * 2)
    slots = pc.slot_matrices
    if pc.kind == CTRL_U:
        a_mat, b_mat = slots
        (u,) = entries
        return b_mat @ np.kron(eye_ac, u) @ a_mat
    a_mat, b_mat, c_mat = slots
    uf, ug = entries
    return c_mat @ np.kron(eye_ac, ug) @ b_mat @ np.kron(eye_ac, uf) @ a_mat


def _choi_from_kraus(kraus: Sequence[np.ndarray], cs: int) -> np.ndarray:
    j = np.zeros((cs * cs, cs * cs), dtype=np.complex128)
    for k in kraus:
        v = k.reshape(-1)
        j += np.outer(v, v.conj())
    return j


def realized_channel(pc: ParamCircuit, oracle) -> np.ndarray:
    """Choi matrix of the induced map on (control, system).

    The ancilla starts in |0> and is traced out after the circuit, so
    the channel's Kraus operators are the ancilla-output blocks of the
    total unitary.
    """
    total = _circuit_unitary(pc, oracle)
    a, cs = pc.ancilla_dim, pc.cs_dim
    t4 = total.reshape(a, cs, a, cs)
    kraus = [t4[m, :, 0, :] for m in range(a)]
    return _choi_from_kraus(kraus, cs)


def choi_of_unitary(u: Operator) -> np.ndarray:
    """Choi matrix of a unitary channel (rank one)."""
    v = u.entries.reshape(-1)
    return np.outer(v, v.conj())


def target_unitary(kind: str, oracle) -> Operator:
    """Controlled operation on (control, system) the circuit should
    reproduce: identity / U for ``ctrl_u``, the two orderings for
    ``switch``, block-diagonal in the control basis."""
    _check_kind(kind)
    entries = _oracle_entries(kind, oracle)
    d = entries[0].shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    if kind == CTRL_U:
        (u,) = entries
        out[:d, :d] = np.eye(d)
        out[d:, d:] = u
    else:
        uf, ug = entries
        out[:d, :d] = ug @ uf
        out[d:, d:] = uf @ ug
    return Operator(out, tol=1e-8)


def process_fidelity(choi: np.ndarray, target: Operator) -> float:
    """Normalized Choi overlap with a target unitary channel.

    Equals ``|Tr(V^dag K)|^2 / D^2`` summed over Kraus terms; it is 1
    iff the channel is exactly the target unitary.
    """
    v = target.entries.reshape(-1)
    d2 = target.dim ** 2
    return float(np.real(v.conj() @ choi @ v)) / d2


def draw_samples(kind: str, system_dim: int, count: int, rng: np.random.Generator):
    """Haar sample set standing in for the unknown operations."""
    _check_kind(kind)
    if count < 1:
        raise ValueError("sample count must be positive")
    if kind == CTRL_U:
        return tuple(haar_unitary(system_dim, rng) for _ in range(count))
    return tuple(
        (haar_unitary(system_dim, rng), haar_unitary(system_dim, rng))
        for _ in range(count)
    )


def worst_case_fidelity(pc: ParamCircuit, samples) -> float:
    """Minimum process fidelity of the realized channel against the
    controlled target, over the sample set."""
    if not samples:
        raise ValueError("sample set must be non-empty")
    targets = [target_unitary(pc.kind, s) for s in samples]
    return min(
        process_fidelity(realized_channel(pc, s), t) for s, t in zip(samples, targets)
    )


def _prepare_samples(kind: str, ancilla_dim: int, samples):
    """Hoist the sample-dependent matrices out of the search loop:
    the 1_ac x U insertions and the conjugated target matrices."""
    eye_ac = np.eye(ancilla_dim * 2)
    prepared = []
    for s in samples:
        entries = _oracle_entries(kind, s)
        ins = tuple(np.kron(eye_ac, u) for u in entries)
        prepared.append((ins, target_unitary(kind, s).entries.conj()))
    return prepared


def _worst_case_from_slots(kind, ancilla_dim, system_dim, slots, prepared) -> float:
    """Same value as :func:`worst_case_fidelity`, on precomputed parts."""
    a, cs = ancilla_dim, 2 * system_dim
    d2 = cs * cs
    worst = np.inf
    for ins, target_conj in prepared:
        if kind == CTRL_U:
            total = slots[1] @ ins[0] @ slots[0]
        else:
            total = slots[2] @ ins[1] @ slots[1] @ ins[0] @ slots[0]
        kraus = total.reshape(a, cs, a, cs)[:, :, 0, :]
        overlaps = np.einsum("ij,mij->m", target_conj, kraus)
        worst = min(worst, float(np.sum(np.abs(overlaps) ** 2)) / d2)
    return worst


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the multi-restart search.  All randomness derives from
    ``seed``; restart r uses the stream seeded by (seed, r)."""

    restarts: int = 20
    max_iters: int = 1500
    sample_count: int = 16
    seed: int = 0
    system_dim: int = 2
    ancilla_dim: int = 2
    f_tol: float = 1e-12
    x_tol: float = 1e-10
    fd_step: float = 1e-6
    polish_steps: int = 25

    def __post_init__(self):
        for name in ("restarts", "max_iters", "sample_count", "system_dim", "ancilla_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RestartResult:
    seed: tuple[int, int]
    value: float
    iterations: int
    fevals: int
    converged: bool


@dataclass(frozen=True)
class SearchReport:
    kind: str
    dims: dict
    config: SearchConfig
    best_worst_case_fidelity: float
    per_restart: tuple[RestartResult, ...]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dims": self.dims,
            "config": asdict(self.config),
            "best_worst_case_fidelity": self.best_worst_case_fidelity,
            "restarts": [
                {
                    "seed": list(r.seed),
                    "value": r.value,
                    "iterations": r.iterations,
                    "fevals": r.fevals,
                    "converged": r.converged,
                }
                for r in self.per_restart
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _fd_gradient(f, x: np.ndarray, step: float) -> np.ndarray:
    """Forward-difference gradient."""
    f0 = f(x)
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xp[i] += step
        grad[i] = (f(xp) - f0) / step
    return grad


def _fd_polish(f, x: np.ndarray, steps: int, fd_step: float, f_tol: float):
    """Finite-difference ascent from a simplex result.

    Backtracking line search along the gradient; stops when no trial
    step improves the objective by more than ``f_tol``.
    """
    best = f(x)
    fevals = 1
    iters = 0
    for _ in range(steps):
        grad = _fd_gradient(f, x, fd_step)
        fevals += x.size + 1
        norm = float(np.linalg.norm(grad))
        if norm == 0.0:
            break
        direction = grad / norm
        improved = False
        for scale in (1.0, 0.3, 0.1, 0.03, 0.01, 0.003):
            trial = x + scale * direction
            val = f(trial)
            fevals += 1
            if val > best + f_tol:
                x, best = trial, val
                improved = True
                break
        iters += 1
        if not improved:
            break
    return x, best, iters, fevals


def optimize(kind: str, config: SearchConfig, samples=None) -> SearchReport:
    """Multi-restart maximization of the worst-case process fidelity.

    A fixed sample set is drawn once from the seed (or supplied
    explicitly for known-oracle control runs).  Restart 0 starts from
    zero parameters (identity slots); later restarts start from random
    Gaussian parameters.  Each restart runs a Nelder-Mead ascent
    followed by a short finite-difference polish.  Non-convergence is
    reported per restart, never raised.
    """
    _check_kind(kind)
    d, a = config.system_dim, config.ancilla_dim
    if samples is None:
        sample_rng = np.random.default_rng(config.seed)
        samples = draw_samples(kind, d, config.sample_count, sample_rng)
    n = param_count(kind, a, d)
    full_dim = a * 2 * d
    prepared = _prepare_samples(kind, a, samples)

    def objective(x: np.ndarray) -> float:
        return _worst_case_from_slots(kind, a, d, _slot_matrices(kind, full_dim, x), prepared)

    results: list[RestartResult] = []
    best_val = -np.inf
    for r in range(config.restarts):
        rng = np.random.default_rng((config.seed, r))
        x0 = np.zeros(n) if r == 0 else rng.normal(0.0, 0.7, size=n)
        res = minimize(
            lambda x: -objective(x),
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": config.max_iters,
                "maxfev": 2 * config.max_iters,
                "fatol": config.f_tol,
                "xatol": config.x_tol,
            },
        )
        x_best, value, extra_iters, extra_fevals = _fd_polish(
            objective, np.array(res.x), config.polish_steps, config.fd_step, config.f_tol
        )
        results.append(
            RestartResult(
                seed=(config.seed, r),
                value=float(value),
                iterations=int(res.nit) + extra_iters,
                fevals=int(res.nfev) + extra_fevals,
                converged=bool(res.success),
            )
        )
        best_val = max(best_val, value)

    return SearchReport(
        kind=kind,
        dims={"ancilla": a, "control": 2, "system": d},
        config=config,
        best_worst_case_fidelity=float(best_val),
        per_restart=tuple(results),
    )


def oracle_sanity(sample_count: int = 32, internal_dim: int = 2, seed: int = 1234) -> float:
    """Minimum output fidelity of the photonic constructions.

    Runs the control and the order-control interferometers on Haar
    samples with random inputs and compares against the exact target
    states.  The direct-sum realizations are exact, so the result must
    be 1 up to rounding.
    """
    rng = np.random.default_rng(seed)
    d = internal_dim
    net_u = photonic.preset_ctrl_u(d)
    net_sw = photonic.preset_ctrl_switch(d)
    worst = 1.0
    for _ in range(sample_count):
        alpha, beta = random_unit_vector(2, rng)
        psi = random_unit_vector(d, rng)

        u = haar_unitary(d, rng)
        inp = photonic.photon_input(net_u.space, net_u.input_path, (alpha, beta), psi)
        out = photonic.propagate(net_u, inp, {"U": u})
        block = np.concatenate([alpha * psi, beta * (u.entries @ psi)])
        want = photonic.place_on_path(net_u.space, net_u.output_path, block)
        worst = min(worst, fidelity_pure(out.state, want))

        uf, ug = haar_unitary(d, rng), haar_unitary(d, rng)
        inp = photonic.photon_input(net_sw.space, net_sw.input_path, (alpha, beta), psi)
        out = photonic.propagate(net_sw, inp, {"Uf": uf, "Ug": ug})
        block = np.concatenate(
            [alpha * (ug.entries @ uf.entries @ psi), beta * (uf.entries @ ug.entries @ psi)]
        )
        want = photonic.place_on_path(net_sw.space, net_sw.output_path, block)
        worst = min(worst, fidelity_pure(out.state, want))
    return worst
