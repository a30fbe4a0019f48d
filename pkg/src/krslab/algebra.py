"""Randomized matrix-model checks of the pointwise linear algebra.

The complex structure is the standard block J with J e_i = e_{m+i} on
R^{2m}.  Three families of pointwise facts are verified on random
instances: the skew-Hermitian Ricci cancellation (the diagonalized-Ricci
double sum collapses), the unitary-frame pairing identity for
anti-invariant symmetric tensors, and the trace/orthogonality facts that
make the pairing constant C(h, g) vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AlgebraError(ValueError):
    """Input matrix violates the structural preconditions."""


def standard_J(m: int) -> np.ndarray:
    J = np.zeros((2 * m, 2 * m))
    J[m:, :m] = np.eye(m)
    J[:m, m:] = -np.eye(m)
    return J


@dataclass(frozen=True)
class HermitianModel:
    """One random instance: dimension, doubled Ricci eigenvalues, tensor."""

    m: int
    c: np.ndarray  # length 2m, c[m + i] = c[i]
    h: np.ndarray  # real symmetric 2m x 2m

    def __post_init__(self):
        m = self.m
        if self.c.shape != (2 * m,) or self.h.shape != (2 * m, 2 * m):
            raise AlgebraError("shape mismatch with the stated dimension")
        if not np.allclose(self.c[:m], self.c[m:], atol=0.0):
            raise AlgebraError("Ricci eigenvalues must satisfy c[m+i] = c[i]")
        if not np.array_equal(self.h, self.h.T):
            raise AlgebraError("h must be symmetric")


def _check_blocks(m: int, h: np.ndarray):
    """Skew-Hermitian block conditions h_{ij} = -h_{(i+m)(j+m)},
    h_{i(j+m)} = h_{(i+m)j}; raise with the first violating index pair."""
    for i in range(m):
        for j in range(m):
            if abs(h[i, j] + h[i + m, j + m]) > 1e-13 * (1 + abs(h[i, j])):
                raise AlgebraError(
                    f"block condition h[{i},{j}] = -h[{i + m},{j + m}] violated"
                )
            if abs(h[i, j + m] - h[i + m, j]) > 1e-13 * (1 + abs(h[i, j + m])):
                raise AlgebraError(
                    f"block condition h[{i},{j + m}] = h[{i + m},{j}] violated"
                )


def skew_pairing(model: HermitianModel, check: bool = True) -> float:
    """Difference of the two expressions for (Ric o h - h o i rho, h) with
    diagonalized Ricci: sum_i c_i h_{ij}^2 against twice the mixed double
    sum.  Vanishes identically on the skew-Hermitian block variety; with
    check disabled it evaluates on arbitrary symmetric h (negative
    controls), where the cancellation fails."""
    m, c, h = model.m, model.c, model.h
    if check:
        _check_blocks(m, h)
    expr1 = float(np.einsum("i,ij,ij->", c, h, h))
    expr2 = 0.0
    for j in range(m):
        for i in range(m):
            expr2 += c[j] * (h[i + m, j] * h[i, j + m]
                             - h[i, j] * h[i + m, j + m])
    expr2 *= 2.0
    return expr1 - expr2


def is_anti_invariant(m: int, h: np.ndarray, tol: float = 1e-13) -> bool:
    J = standard_J(m)
    scale = max(float(np.abs(h).max()), 1.0)
    return bool(np.abs(J.T @ h @ J + h).max() <= tol * scale)


_FRAME_KAPPA: list = []


def _unitary_frame_matrix(m: int, h: np.ndarray) -> np.ndarray:
    """H_{ij} = h(conj(X_i), conj(X_j)) with X_i = (e_i - i J e_i)/sqrt(2)."""
    X_bar = np.zeros((2 * m, m), dtype=complex)
    X_bar[:m] = np.eye(m)
    X_bar[m:] = 1j * np.eye(m)
    X_bar /= np.sqrt(2.0)
    return X_bar.T @ h @ X_bar


def frame_kappa() -> float:
    """Normalization of the complex-frame pairing, calibrated once on the
    rank-one anti-invariant probe diag(1, -1) for m = 1 and then frozen."""
    if not _FRAME_KAPPA:
        probe = np.diag([1.0, -1.0])
        H = _unitary_frame_matrix(1, probe)
        complex_pairing = float(np.real(np.sum(H * np.conj(H))))
        real_pairing = float(np.sum(probe * probe))
        _FRAME_KAPPA.append(real_pairing / complex_pairing)
    return _FRAME_KAPPA[0]


def frame_pairing_check(m: int, h: np.ndarray, h_tilde: np.ndarray,
                        unitary: np.ndarray | None = None) -> float:
    """|kappa * Re sum H conj(H~) - sum h h~| for anti-invariant symmetric
    inputs; optionally after a unitary change of frame X -> U X (the
    residual must be frame-independent)."""
    for mat in (h, h_tilde):
        if not np.array_equal(mat, mat.T):
            raise AlgebraError("inputs must be symmetric")
        if not is_anti_invariant(m, mat):
            raise AlgebraError("inputs must be J-anti-invariant")
    H = _unitary_frame_matrix(m, h)
    Ht = _unitary_frame_matrix(m, h_tilde)
    if unitary is not None:
        V = np.conj(unitary)
        H = V.T @ H @ V
        Ht = V.T @ Ht @ V
    complex_pairing = float(np.real(np.sum(H * np.conj(Ht))))
    real_pairing = float(np.sum(h * h_tilde))
    return abs(frame_kappa() * complex_pairing - real_pairing)


def anti_invariant_facts(m: int, h: np.ndarray,
                         k: np.ndarray | None = None,
                         rng: np.random.Generator | None = None):
    """(trace, pairing with a J-invariant symmetric k); both vanish for
    anti-invariant h.  If k is not supplied a random invariant one is drawn."""
    if not is_anti_invariant(m, h):
        raise AlgebraError("h must be J-anti-invariant")
    if k is None:
        if rng is None:
            rng = np.random.default_rng()
        k = random_invariant(rng, m)
    return float(np.trace(h)), float(np.sum(h * k))


# ---------------------------------------------------------------------------
# random instances


def random_anti_invariant(rng: np.random.Generator, m: int) -> np.ndarray:
    """Symmetric h with h(J., J.) = -h: blocks [[A, B], [B, -A]] with A, B
    symmetric; identical to the skew-Hermitian block variety."""
    A = rng.standard_normal((m, m))
    A = A + A.T
    B = rng.standard_normal((m, m))
    B = B + B.T
    return np.block([[A, B], [B, -A]])


def random_invariant(rng: np.random.Generator, m: int) -> np.ndarray:
    """Symmetric k with k(J., J.) = k: blocks [[P, Q], [-Q, P]] with P
    symmetric and Q antisymmetric."""
    P = rng.standard_normal((m, m))
    P = P + P.T
    Q = rng.standard_normal((m, m))
    Q = Q - Q.T
    return np.block([[P, Q], [-Q, P]])


def random_doubled_c(rng: np.random.Generator, m: int) -> np.ndarray:
    c = rng.uniform(-2.0, 2.0, size=m)
    return np.concatenate([c, c])


def random_unitary(rng: np.random.Generator, m: int) -> np.ndarray:
    Z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def anti_invariant_pairing_vanishes(trials: int = 32, seed: int = 7) -> bool:
    """Pointwise mechanism behind C(h, g) = 0: anti-invariant symmetric
    tensors pair to zero against every J-invariant symmetric tensor (the
    Ricci tensor of a Kahler metric being of the latter kind)."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        m = int(rng.integers(1, 5))
        h = random_anti_invariant(rng, m)
        k = random_invariant(rng, m)
        tr, pair = anti_invariant_facts(m, h, k)
        scale = float(np.abs(h).max() * max(np.abs(k).max(), 1.0))
        if abs(tr) > 1e-13 * scale or abs(pair) > 1e-13 * scale:
            return False
    return True


def fuzz_suite(seed: int = 0, trials: int = 1000) -> dict:
    """Randomized suite over all three operations, m in {1..4}; returns the
    worst scale-normalized residual seen."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, 5))
        c = random_doubled_c(rng, m)
        h = random_anti_invariant(rng, m)
        ht = random_anti_invariant(rng, m)

        scale = float(np.sum(h * h)) * max(float(np.abs(c).max()), 1.0)
        worst = max(worst, abs(skew_pairing(HermitianModel(m, c, h))) / scale)

        pscale = float(np.abs(h).max() * np.abs(ht).max()) * m * m
        worst = max(worst, frame_pairing_check(m, h, ht) / pscale)
        worst = max(
            worst,
            frame_pairing_check(m, h, ht, unitary=random_unitary(rng, m))
            / pscale,
        )

        k = random_invariant(rng, m)
        tr, pair = anti_invariant_facts(m, h, k)
        hscale = float(np.abs(h).max())
        worst = max(worst, abs(tr) / hscale,
                    abs(pair) / (hscale * float(np.abs(k).max())))
    return {"trials": trials, "max_residual": worst, "seed": seed}
