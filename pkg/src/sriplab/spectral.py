"""Gram matrices of supports, a dense Hermitian Jacobi eigensolver, RIP checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dictionary import AtomId, Dictionary

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100
DEFAULT_BUDGET = 2_000_000


class NotHermitianError(ValueError):
    pass


class EigenConvergenceError(RuntimeError):
    def __init__(self, off_mass, sweeps):
        super().__init__(
            f"Jacobi iteration did not converge in {sweeps} sweeps "
            f"(off-diagonal mass {off_mass:.3e})")
        self.off_mass = off_mass
        self.sweeps = sweeps


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    residual: float
    sweeps: int
    eigenvectors: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class RipReport:
    n_max: int
    delta: float
    argmax_support: tuple
    upper: float  # max over supports of lambda_max - 1
    lower: float  # max over supports of 1 - lambda_min
    n_supports: int


def check_support(d: Dictionary, s: Sequence) -> tuple[AtomId, ...]:
    ids = tuple(d.check_id(a) for a in s)
    if not ids:
        raise ValueError("support must contain at least one atom")
    if len(set(ids)) != len(ids):
        seen, dup = set(), None
        for a in ids:
            if a in seen:
                dup = a
                break
            seen.add(a)
        raise ValueError(f"support contains duplicate atom {tuple(dup)}")
    return ids


def gram(d: Dictionary, s: Sequence) -> np.ndarray:
    """``G[i, j] = <phi_i, phi_j> = sum_t phi_i(t) conj(phi_j(t))`` for the atoms of ``s``."""
    ids = check_support(d, s)
    A = d.atoms(ids)
    # <phi_i, phi_j> conjugates the second argument
    G = A.T @ A.conj()
    G = 0.5 * (G + G.conj().T)
    return G


def _round_robin(n):
    """Pairings of a round-robin schedule; each round is a set of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            P, Q = np.array(pairs).T
            rounds.append((P, Q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_mass(A):
    # sum the off-diagonal entries directly; subtracting the diagonal cancels badly
    off = A[~np.eye(A.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(off.real ** 2 + off.imag ** 2)))


def hermitian_eigenvalues(M, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS) -> EigenResult:
    """All eigenvalues of a dense Hermitian matrix by cyclic complex Jacobi.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that disjoint rotations are applied together. Iteration stops when the
    off-diagonal Frobenius mass drops to ``tol * ||M||_F``.

    Returns eigenvalues ascending plus the max eigenpair residual
    ``||M v - lambda v||`` from the accumulated rotations.
    """
    M = np.array(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return EigenResult(np.empty(0), 0.0, 0, np.empty((0, 0), dtype=complex))
    skew = float(np.max(np.abs(M - M.conj().T)))
    if skew > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(M)))):
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^H| = {skew:.3e})")

    A = 0.5 * (M + M.conj().T)
    V = np.eye(n, dtype=complex)
    norm_f = float(np.linalg.norm(A))
    target = tol * norm_f
    rounds = _round_robin(n)
    sweeps = 0
    off = _off_mass(A)
    while off > target:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(off, sweeps)
        for P, Q in rounds:
            apq = A[P, Q]
            r = np.abs(apq)
            active = r > 0
            if not active.any():
                continue
            P, Q, apq, r = P[active], Q[active], apq[active], r[active]
            app = A[P, P].real
            aqq = A[Q, Q].real
            # phase e^{-i phi} turns the 2x2 block real symmetric
            ph = np.conj(apq) / r
            theta = (aqq - app) / (2.0 * r)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # U = [[c, s], [-s ph, c ph]] acting on columns (p, q)
            u11, u12, u21, u22 = c, s, -s * ph, c * ph
            cp, cq = A[:, P], A[:, Q]
            A[:, P] = cp * u11 + cq * u21
            A[:, Q] = cp * u12 + cq * u22
            rp, rq = A[P, :], A[Q, :]
            A[P, :] = np.conj(u11)[:, None] * rp + np.conj(u21)[:, None] * rq
            A[Q, :] = np.conj(u12)[:, None] * rp + np.conj(u22)[:, None] * rq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vp, vq = V[:, P], V[:, Q]
            V[:, P] = vp * u11 + vq * u21
            V[:, Q] = vp * u12 + vq * u22
        sweeps += 1
        off = _off_mass(A)

    lam = np.diag(A).real.copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    V = V[:, order]
    M_h = 0.5 * (M + M.conj().T)
    residual = float(np.max(np.linalg.norm(M_h @ V - V * lam[None, :], axis=0)))
    return EigenResult(lam, residual, sweeps, V)


def spectral_norm(M) -> float:
    lam = hermitian_eigenvalues(M).eigenvalues
    return float(np.max(np.abs(lam))) if lam.size else 0.0


def frobenius_norm(M) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(M)) ** 2)))


def deviation_extremes(G) -> tuple[float, float, float]:
    """``(||G - I||, lambda_max - 1, 1 - lambda_min)`` of a Gram matrix."""
    lam = hermitian_eigenvalues(G).eigenvalues
    upper = float(lam[-1] - 1.0)
    lower = float(1.0 - lam[0])
    return max(abs(upper), abs(lower)), upper, lower


def rip_deviation(d: Dictionary, s: Sequence) -> float:
    """Spectral norm of ``G(S) - Id``, i.e. ``max_i |lambda_i - 1|``."""
    return deviation_extremes(gram(d, s))[0]


def _count_supports(n_atoms, n_max):
    return sum(math.comb(n_atoms, k) for k in range(1, n_max + 1))


def rip_exact_check(d: Dictionary, n_max: int, budget: int = DEFAULT_BUDGET) -> RipReport:
    """Worst ``||G(S) - Id||`` over every support with ``|S| <= n_max``.

    Exhaustive, so only usable on tiny dictionaries; ``budget`` caps the
    number of supports enumerated.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    n_atoms = d.n_atoms
    n_max = min(int(n_max), n_atoms)
    count = _count_supports(n_atoms, n_max)
    if count > budget:
        raise BudgetExceededError(
            f"enumerating {count} supports exceeds the budget of {budget}")
    A = d.matrix()
    G_full = A.T @ A.conj()
    ids = [d.atom_id(k) for k in range(n_atoms)]
    best, best_s, upper, lower = 0.0, (ids[0],), 0.0, 0.0
    # singletons: unit-norm atoms deviate by |<phi,phi> - 1|
    for k in range(n_atoms):
        dev = abs(G_full[k, k].real - 1.0)
        if dev > best:
            best, best_s = dev, (ids[k],)
    for size in range(2, n_max + 1):
        for combo in itertools.combinations(range(n_atoms), size):
            idx = np.array(combo)
            G = G_full[np.ix_(idx, idx)]
            dev, up, lo = deviation_extremes(G)
            upper = max(upper, up)
            lower = max(lower, lo)
            if dev > best:
                best, best_s = dev, tuple(ids[k] for k in combo)
    return RipReport(n_max, best, best_s, upper, lower, count)
