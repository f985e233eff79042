"""Variation spaces of parametric channel models and their canonical decomposition.

The variation space of a model h(theta) at a parameter point is the set
of channel perturbations (dh/dtheta) x reachable with *real* coefficient
vectors x.  It is a real-linear subspace of C^{N_d} and generally not a
complex one.  Decomposing it into complex-orthogonal planes, each carrying
a coupling c_k in [0, 1] that measures how close the plane is to a complex
line, is what makes the Cramer-Rao bound optimizable in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rlinalg import (
    RBasis,
    RankDeficientError,
    project_r,
    r_orthonormalize,
    skew_block_matrix,
    skew_canonical_form,
)


@dataclass(frozen=True)
class ParametricChannelModel:
    """Differentiable map from N_p real parameters to a channel in C^{N_d}.

    ``evaluate(theta)`` returns the channel vector, ``gradient(theta)``
    its (N_d x N_p) complex gradient, columns ordered like theta.
    Gradients are analytic (supplied by the model constructors); the
    test suite validates them against central finite differences.
    """

    n_dims: int
    n_params: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    name: str = "model"


@dataclass(frozen=True)
class VariationSpaceBasis:
    """Real-orthonormal basis of a variation space, tagged with its origin.

    ``source`` records where the basis came from: the model name for an
    exact variation space, or ``"estimated"`` for a basis built from
    estimated parameters.
    """

    basis: RBasis
    source: str = "model"

    @property
    def U(self):
        return self.basis.U

    @property
    def dim(self):
        return self.basis.dim

    @property
    def ambient_dim(self):
        return self.basis.ambient_dim


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Canonical basis V = (v_1, w_1, ..., [v_lone]) with couplings c.

    The columns are real-orthonormal, pairs (v_k, w_k) satisfy
    v_k^H w_k = -j c_k, and distinct pairs (and the lone vector, present
    iff the dimension is odd) are mutually complex-orthogonal.
    """

    V: np.ndarray
    c: np.ndarray
    epsilon: int  # 1 if the dimension is odd (a lone unpaired vector), else 0
    source: str = "model"
    n_params: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_params", self.V.shape[1])
        if self.n_params % 2 != self.epsilon:
            raise ValueError("parity flag inconsistent with basis size")
        if len(self.c) != self.n_params // 2:
            raise ValueError(
                f"expected {self.n_params // 2} couplings, got {len(self.c)}"
            )

    def pair(self, k):
        """The k-th pair (v_k, w_k)."""
        return self.V[:, 2 * k], self.V[:, 2 * k + 1]

    @property
    def lone_vector(self):
        if not self.epsilon:
            return None
        return self.V[:, -1]

    def gamma_matrix(self):
        """Imaginary part of V^H V in exact arithmetic."""
        return skew_block_matrix(self.c, self.n_params)

    def rbasis(self):
        return RBasis(self.V)


def variation_space(model, theta):
    """Real-orthonormal basis of the variation space of ``model`` at ``theta``.

    Raises
    ------
    RankDeficientError
        If the gradient columns are dependent over R, i.e. the model is
        not identifiable at theta regardless of the observation matrix.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape[0] != model.n_params:
        raise ValueError(
            f"theta has length {theta.shape[0]}, model expects {model.n_params}"
        )
    grad = np.asarray(model.gradient(theta), dtype=complex)
    if grad.shape != (model.n_dims, model.n_params):
        raise ValueError(f"gradient shape {grad.shape} inconsistent with model dims")
    try:
        basis, _ = r_orthonormalize(grad)
    except RankDeficientError as err:
        raise RankDeficientError(
            f"dim_R(variation space) < N_p for model '{model.name}': {err}",
            rank=err.rank,
        ) from err
    return VariationSpaceBasis(basis=basis, source=model.name)


def canonical_decompose(vbasis):
    """Decompose a variation space into complex-orthogonal coupled planes.

    Computes the canonical form of Im{U^H U} and rotates the basis:
    V = U B.  The couplings c are the descending block values; the real
    span of V equals that of U.
    """
    if isinstance(vbasis, RBasis):
        vbasis = VariationSpaceBasis(basis=vbasis)
    A = np.imag(np.conj(vbasis.U.T) @ vbasis.U)
    form = skew_canonical_form(A)
    V = vbasis.U @ form.B
    return CanonicalDecomposition(
        V=V,
        c=np.clip(form.gamma, 0.0, 1.0),
        epsilon=vbasis.dim % 2,
        source=vbasis.source,
    )


def verify_eigenspace_property(decomp):
    """Check that each pair lies in an eigenspace of P_E o P_jE.

    For every pair (v_k, w_k) the composition of the projections onto
    the span E and onto jE acts as multiplication by c_k^2.  (On E the
    composed operator has matrix -A^2 with A = Im{U^H U}, which is
    positive semi-definite with eigenvalues c_k^2; at c_k = 1 the pair
    spans a complex line where the composition is the identity.)
    Returns the per-pair residuals and their maximum.
    """
    E = RBasis(decomp.V)
    jE = RBasis(1j * decomp.V)
    residuals = []
    for k, c in enumerate(decomp.c):
        v, w = decomp.pair(k)
        rv = np.linalg.norm(project_r(E, project_r(jE, v)) - c**2 * v)
        rw = np.linalg.norm(project_r(E, project_r(jE, w)) - c**2 * w)
        residuals.append(max(rv, rw))
    residuals = np.array(residuals)
    return {
        "residuals": residuals,
        "max_residual": float(residuals.max()) if residuals.size else 0.0,
    }
