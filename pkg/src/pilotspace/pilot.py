"""Optimal minimal-length observation matrices under a power constraint.

Given the canonical decomposition (pairs (v_k, w_k) with couplings c_k,
plus a lone vector when the parameter count is odd), the CRB-optimal
observation matrix has one column per pair,

    sqrt(P/C) (v_k + j w_k) / (1 + c_k)^(3/4),

plus sqrt(P/C) v_lone for odd dimension, where C = 2 sum_l 1/sqrt(1+c_l)
(+1 if odd).  This is the minimal column count for identifiability.

``verify_optimality_certificates`` checks the first-order optimality
conditions (diagonal compression in the canonical basis, vanishing
cross terms d_k, closed-form per-column powers), and
``brute_force_optimal_crb`` is an independent numerical oracle that
minimizes the CRB by projected gradient descent on the power sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crb import NoiseModel, crb_via_variation_space
from .rlinalg import RBasis
from .variation import VariationSpaceBasis


@dataclass(frozen=True)
class PilotDesign:
    """Optimal observation matrix with its certificates.

    ``C_norm`` is the normalization constant C; ``achieved_crb`` is the
    CRB of the design against the decomposition it was built from, at
    the given noise level.  ``certificates`` holds the residuals of the
    optimality conditions (see ``verify_optimality_certificates``).
    """

    M: np.ndarray
    power: float
    C_norm: float
    sigma2: float
    achieved_crb: float
    certificates: dict

    @property
    def n_columns(self):
        return self.M.shape[1]


@dataclass(frozen=True)
class OracleResult:
    value: float
    converged: bool
    n_restarts: int


def design_observation_matrix(decomp, power, sigma2=1.0):
    """Build the CRB-optimal observation matrix of minimal size.

    Constructs the closed-form columns and cross-checks them against
    the equivalent V S D product form (selection matrix S pairing
    (v_k, w_k) into v_k + j w_k, diagonal power loading D); the two
    routes must agree to 1e-10.

    Parameters
    ----------
    decomp : CanonicalDecomposition
    power : float
        Frobenius-norm-squared budget ||M||_F^2.
    sigma2 : float
        Noise variance used for the reported achieved CRB.
    """
    if not (power > 0):
        raise ValueError(f"power must be positive, got {power}")
    c = np.asarray(decomp.c, dtype=float)
    n_pairs = c.shape[0]
    n_params = decomp.n_params
    n_cols = n_pairs + decomp.epsilon

    C = 2.0 * np.sum(1.0 / np.sqrt(1.0 + c)) + decomp.epsilon
    scale = math.sqrt(power / C)

    cols = []
    for k in range(n_pairs):
        v, w = decomp.pair(k)
        cols.append(scale * (v + 1j * w) / (1.0 + c[k]) ** 0.75)
    if decomp.epsilon:
        cols.append(scale * decomp.lone_vector)
    M = np.stack(cols, axis=1)

    # Equivalent product form M = V S D.
    S = np.zeros((n_params, n_cols), dtype=complex)
    for k in range(n_pairs):
        S[2 * k, k] = 1.0
        S[2 * k + 1, k] = 1j
    diag = list((1.0 + c) ** -0.75)
    if decomp.epsilon:
        S[-1, -1] = 1.0
        diag.append(1.0)
    D = scale * np.diag(diag)
    M_product = decomp.V @ S @ D
    route_gap = np.linalg.norm(M - M_product)
    if route_gap > 1e-10 * (1.0 + np.linalg.norm(M)):
        raise AssertionError(
            f"design route mismatch: ||direct - VSD|| = {route_gap:.3e}"
        )

    noise = NoiseModel(sigma2)
    achieved = crb_via_variation_space(RBasis(decomp.V), M, noise).value
    design = PilotDesign(
        M=M,
        power=float(power),
        C_norm=float(C),
        sigma2=float(sigma2),
        achieved_crb=float(achieved),
        certificates={},
    )
    certs = verify_optimality_certificates(decomp, design)
    return PilotDesign(
        M=M,
        power=float(power),
        C_norm=float(C),
        sigma2=float(sigma2),
        achieved_crb=float(achieved),
        certificates=certs,
    )


def verify_optimality_certificates(decomp, design):
    """Residuals of the optimality conditions for an observation matrix.

    Builds the complex-orthogonal unit vectors
    u_k+- = (v_k +/- j w_k) / sqrt(2 (1 +/- c_k)) and reports

    * ``diagonal_residual`` -- max off-diagonal of Re{V^H M M^H V},
    * ``dk_residual`` -- max |d_k|, d_k = sqrt(1-c_k^2) Re{u_k+^H M M^H u_k-}
      (u_k- is skipped where 1 - c_k <= 1e-12: the pair is a complex line
      and u_k- is undefined),
    * ``column_powers`` -- measured ||M^H u_k+||^2 against the closed form
      2P / (C sqrt(1+c_k)), plus the lone-direction power P/C when present,
    * ``total_power`` -- sum of the measured powers.
    """
    M = design.M
    c = np.asarray(decomp.c, dtype=float)
    P, C = design.power, design.C_norm

    G = np.conj(M.T) @ decomp.V            # n_cols x n_params
    comp = G.real.T @ G.real + G.imag.T @ G.imag
    off = comp - np.diag(np.diag(comp))
    diagonal_residual = float(np.abs(off).max()) if off.size else 0.0

    d_residual = 0.0
    measured = []
    expected = []
    for k in range(c.shape[0]):
        v, w = decomp.pair(k)
        u_plus = (v + 1j * w) / math.sqrt(2.0 * (1.0 + c[k]))
        p_meas = float(np.linalg.norm(np.conj(M.T) @ u_plus) ** 2)
        measured.append(p_meas)
        expected.append(2.0 * P / (C * math.sqrt(1.0 + c[k])))
        if 1.0 - c[k] > 1e-12:
            u_minus = (v - 1j * w) / math.sqrt(2.0 * (1.0 - c[k]))
            d_k = math.sqrt(1.0 - c[k] ** 2) * float(
                np.real(np.conj(u_plus) @ (M @ (np.conj(M.T) @ u_minus)))
            )
            d_residual = max(d_residual, abs(d_k))
    if decomp.epsilon:
        p_meas = float(np.linalg.norm(np.conj(M.T) @ decomp.lone_vector) ** 2)
        measured.append(p_meas)
        expected.append(P / C)

    return {
        "diagonal_residual": diagonal_residual,
        "dk_residual": float(d_residual),
        "column_powers": np.array(measured),
        "column_powers_expected": np.array(expected),
        "total_power": float(np.sum(measured)),
    }


def brute_force_optimal_crb(
    basis,
    power,
    n_cols,
    sigma2=1.0,
    n_restarts=500,
    n_iters=300,
    seed=0,
):
    """Numerically minimize the CRB over ||M||_F^2 = power (test oracle).

    Projected gradient descent on the Frobenius sphere, with step
    halving on rejection and mild growth on acceptance, run from
    ``n_restarts`` random starts simultaneously (batched).  Intended
    for small problems only (ambient dim <= 8, <= 5 parameters).

    Returns the best CRB value found; ``converged`` is False when the
    iteration budget ran out while the best restart was still improving.
    Non-identifiable iterates evaluate to +inf, so an infeasible column
    count (below ceil(N_p/2)) returns inf.
    """
    if isinstance(basis, VariationSpaceBasis):
        basis = basis.basis
    U = basis.U
    n_dim, n_params = U.shape
    rng = np.random.default_rng(seed)
    sqrtP = math.sqrt(power)

    M = rng.normal(size=(n_restarts, n_dim, n_cols)) + 1j * rng.normal(
        size=(n_restarts, n_dim, n_cols)
    )
    M *= (sqrtP / np.linalg.norm(M, axis=(1, 2)))[:, None, None]
    Uh = np.conj(U.T)

    def evaluate(Mb):
        X = Uh @ Mb                                    # (B, n_params, n_cols)
        A = X.real @ X.real.transpose(0, 2, 1) + X.imag @ X.imag.transpose(0, 2, 1)
        eigs, vecs = np.linalg.eigh(A)
        bad = eigs[:, 0] <= 1e-10 * np.maximum(eigs[:, -1], 0.0)
        # Floor the spectrum so gradients stay finite near singularity.
        floor = np.maximum(eigs[:, -1] * 1e-13, 1e-300)
        safe = np.maximum(eigs, floor[:, None])
        f = 0.5 * sigma2 * np.sum(1.0 / safe, axis=1)
        f = np.where(bad, np.inf, f)
        W = (vecs / (safe**2)[:, None, :]) @ vecs.transpose(0, 2, 1)
        grad = -sigma2 * (U @ (W @ X))   # gradient of (sigma2/2) Tr[A^{-1}] wrt M
        return f, grad

    def retract(Mb):
        norms = np.linalg.norm(Mb, axis=(1, 2))
        norms = np.where(norms > 0, norms, 1.0)
        return Mb * (sqrtP / norms)[:, None, None]

    f, grad = evaluate(M)
    gnorm = np.linalg.norm(grad, axis=(1, 2))
    alpha = 0.1 * sqrtP / np.where(gnorm > 0, gnorm, 1.0)
    last_improvement = np.full(n_restarts, np.inf)

    for _ in range(n_iters):
        cand = retract(M - alpha[:, None, None] * grad)
        f_new, grad_new = evaluate(cand)
        accept = f_new < f
        with np.errstate(invalid="ignore"):   # inf - inf on never-feasible restarts
            last_improvement = np.where(
                accept, np.abs(f - f_new) / np.maximum(f_new, 1e-300), last_improvement
            )
        M = np.where(accept[:, None, None], cand, M)
        grad = np.where(accept[:, None, None], grad_new, grad)
        f = np.where(accept, f_new, f)
        alpha = np.where(accept, alpha * 1.3, alpha * 0.5)

    best = int(np.argmin(f))
    value = float(f[best])
    converged = bool(np.isfinite(value) and last_improvement[best] < 1e-9)
    if not np.isfinite(value):
        converged = False
    return OracleResult(value=value, converged=converged, n_restarts=n_restarts)
