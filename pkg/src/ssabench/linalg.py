"""Hermitian eigenvalues by cyclic Jacobi, and partial traces over qudit sites."""

from __future__ import annotations

import string
from functools import lru_cache
from typing import Iterable

import numpy as np

OFF_TOL = 1e-13
MAX_SWEEPS = 100


class NotHermitian(ValueError):
    pass


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pairings of 0..n-1 (n even) such that each pair meets once per sweep."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p = np.array([players[i] for i in range(n // 2)])
        q = np.array([players[n - 1 - i] for i in range(n // 2)])
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def off_norm(a: np.ndarray) -> float:
    d = np.diag(np.diag(a))
    return float(np.linalg.norm(a - d))


def jacobi_eigh(a: np.ndarray, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS,
                vectors: bool = False):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps visit every off-diagonal pair once, in round-robin order so that
    the rotations of one round act on disjoint index pairs and can be applied
    together. Iteration stops when the off-diagonal Frobenius norm drops to
    ``tol * max(1, ||a||_F)``.

    Returns ascending eigenvalues, plus the unitary of eigenvectors (as
    columns) when ``vectors`` is true.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-12 * scale:
        raise NotHermitian("matrix is not Hermitian to 1e-12")
    a = (a + a.conj().T) / 2
    v = np.eye(n, dtype=complex) if vectors else None
    if n == 1:
        w = np.real(np.diag(a)).copy()
        return (w, v) if vectors else w
    m = n + (n % 2)
    if m != n:
        # pad with a decoupled zero row/column so pairs tile the index set
        pad = np.zeros((m, m), dtype=complex)
        pad[:n, :n] = a
        a = pad
        if vectors:
            vp = np.eye(m, dtype=complex)
            vp[:n, :n] = v
            v = vp
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        if off_norm(a) <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            live = mag > 1e-300
            if not live.any():
                continue
            app = a[p, p].real
            aqq = a[q, q].real
            safe = np.where(live, mag, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(live, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            e = np.where(live, apq / safe, 1.0)
            ec = np.conj(e)
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - (s * ec) * aq
            a[:, q] = s * ap + (c * ec) * aq
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - (s * e)[:, None] * rq
            a[q, :] = s[:, None] * rp + (c * e)[:, None] * rq
            a[p, q] = 0.0
            a[q, p] = 0.0
            idx = np.concatenate([p, q])
            a[idx, idx] = a[idx, idx].real
            if vectors:
                vp_, vq_ = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp_ - (s * ec) * vq_
                v[:, q] = s * vp_ + (c * ec) * vq_
    w = np.real(np.diag(a))[:n]
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:n, :n][:, order]
    return w[order]


def jacobi_eigvalsh(a: np.ndarray, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    return jacobi_eigh(a, tol, max_sweeps)


def partial_trace(rho: np.ndarray, keep: Iterable[int], n: int, d: int = 2) -> np.ndarray:
    """Reduced matrix on sites ``keep`` of an ``n``-site, ``d``-level operator.

    Kept sites appear in ascending order. Keeping every site returns a copy.
    """
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one site")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"site index out of range for {n} sites: {keep}")
    if rho.shape != (d ** n, d ** n):
        raise ValueError(f"operator shape {rho.shape} does not match {n} sites of dimension {d}")
    if len(keep) == n:
        return np.array(rho, copy=True)
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            cols[i] = rows[i]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    spec = "".join(rows) + "".join(cols) + "->" + out
    t = np.einsum(spec, rho.reshape((d,) * (2 * n)))
    k = d ** len(keep)
    return t.reshape(k, k)
