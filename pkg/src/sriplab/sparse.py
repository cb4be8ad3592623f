"""Orthogonal matching pursuit over a union-of-ONB dictionary."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dictionary import AtomId, Dictionary, resolution_apply
from .spectral import gram, hermitian_eigenvalues

TIE_TOL = 1e-12
SINGULAR_TOL = 1e-10


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass
class RecoveryResult:
    support_found: list
    coefficients: np.ndarray
    residual_norm: float
    iterations: int
    residual_history: list = field(default_factory=list)

    def as_mapping(self) -> dict:
        return dict(zip(self.support_found, self.coefficients))

    def to_json(self) -> dict:
        return {
            "support_found": [list(a) for a in self.support_found],
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "residual_history": self.residual_history,
        }


def omp(d: Dictionary, y, k: int, tol: float = 1e-10) -> RecoveryResult:
    """Greedy k-sparse approximation of ``y``.

    Each step picks the unused atom with the largest ``|<r, phi>|`` (near-ties
    go to the smallest AtomId), then refits all selected coefficients by the
    normal equations ``G(S) c = Theta_S^* y``. Stops after ``k`` atoms or once
    the residual norm is at most ``tol``.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if y.shape != (d.p,):
        raise ValueError(f"signal must have length p={d.p}, got {y.shape[0]}")
    if not 1 <= k <= d.p:
        raise ValueError(f"sparsity k must lie in [1, {d.p}], got {k}")
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    support: list[AtomId] = []
    coef = np.zeros(0, dtype=complex)
    r = y.copy()
    rnorm = float(np.linalg.norm(r))
    history = [rnorm]
    used = np.zeros(d.n_atoms, dtype=bool)
    while len(support) < k and rnorm > tol:
        corr = np.abs(d.analysis(r)).ravel()
        corr[used] = -np.inf
        best = corr.max()
        j = int(np.flatnonzero(corr >= best - TIE_TOL * max(best, 1.0))[0])
        used[j] = True
        support.append(d.atom_id(j))

        G = gram(d, support)
        if hermitian_eigenvalues(G).eigenvalues[0] < SINGULAR_TOL:
            raise SingularSystemError(
                f"normal equations are singular after selecting {tuple(support[-1])}")
        A = d.atoms(support)
        coef = np.linalg.solve(G.T, A.conj().T @ y)
        r = y - A @ coef
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)

    return RecoveryResult(support, coef, rnorm, len(support), history)


def residual_of(d: Dictionary, y, result: RecoveryResult) -> float:
    return float(np.linalg.norm(np.asarray(y) - resolution_apply(d, result.as_mapping())))
