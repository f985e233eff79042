"""Concrete channel models: least squares, physical ULA multipath, angle-constrained.

All models target a base station with a centered half-wavelength uniform
linear array along the y-axis: antenna n sits at y_n = (n - (N_t-1)/2)
lambda/2, so the steering phase is pi (n - (N_t-1)/2) sin(phi).  The
centering makes e(phi) and its azimuth derivative exactly complex
orthogonal, which the pilot designs exploit.

The Kronecker builder assembles the full observation matrix
Id_{N_r} (x) X (x) F of a generic pilot matrix X sent on selected
subcarriers, with the power identity ||M||_F^2 = N_r N_ps ||X||_F^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rlinalg import RankDeficientError, r_orthonormalize
from .variation import ParametricChannelModel, VariationSpaceBasis


@dataclass(frozen=True)
class UlaGeometry:
    """Centered half-wavelength ULA with n_antennas elements."""

    n_antennas: int

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError("need at least one antenna")

    @property
    def offsets(self):
        """Antenna positions in half-wavelength units, centered (sum = 0)."""
        n = self.n_antennas
        return np.arange(n) - (n - 1) / 2.0


@dataclass(frozen=True)
class PathSet:
    """Complex gains and azimuths of a multipath channel."""

    gains: np.ndarray
    azimuths: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex).ravel()
        azimuths = np.asarray(self.azimuths, dtype=float).ravel()
        if gains.shape[0] != azimuths.shape[0] or gains.shape[0] < 1:
            raise ValueError("need one gain per azimuth, at least one path")
        if np.any(azimuths < -np.pi) or np.any(azimuths >= np.pi):
            raise ValueError("azimuths must lie in [-pi, pi)")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "azimuths", azimuths)

    @property
    def n_paths(self):
        return self.gains.shape[0]

    def theta(self):
        """Parameter vector [Re b_1, Im b_1, phi_1, ...] of the physical model."""
        out = np.empty(3 * self.n_paths)
        out[0::3] = self.gains.real
        out[1::3] = self.gains.imag
        out[2::3] = self.azimuths
        return out


@dataclass(frozen=True)
class SystemDims:
    """Dimensions of a generic MIMO-OFDM pilot setup."""

    n_tx: int
    n_rx: int
    n_subcarriers: int
    n_pilot_subcarriers: int
    pilot_duration: int

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_subcarriers", "n_pilot_subcarriers", "pilot_duration"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_pilot_subcarriers > self.n_subcarriers:
            raise ValueError("cannot select more pilot subcarriers than subcarriers")


def steering_vector(geom, azimuth):
    """Unit-norm array response e(phi) of the centered ULA."""
    phase = np.pi * geom.offsets * math.sin(azimuth)
    return np.exp(1j * phase) / math.sqrt(geom.n_antennas)


def steering_derivative(geom, azimuth):
    """d e(phi) / d phi.

    Entrywise j pi (n - (N_t-1)/2) cos(phi) e_n(phi).  Because the
    offsets sum to zero, e(phi)^H de/dphi = 0 exactly; at endfire
    (phi = +/- pi/2) the derivative vanishes.
    """
    e = steering_vector(geom, azimuth)
    return 1j * np.pi * geom.offsets * math.cos(azimuth) * e


def steering_matrix(geom, azimuths):
    """Columns e(phi_l) for a list of azimuths."""
    return np.stack([steering_vector(geom, a) for a in np.atleast_1d(azimuths)], axis=1)


def ls_model(n_tx):
    """Least squares model: parameters are Re/Im of the channel entries.

    h = (Id, j Id) theta with theta = [Re h; Im h]; the gradient is
    constant and the variation space is all of C^{N_t}.
    """
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    grad = np.hstack([np.eye(n_tx), 1j * np.eye(n_tx)])

    def evaluate(theta):
        theta = np.asarray(theta, dtype=float)
        return theta[:n_tx] + 1j * theta[n_tx:]

    return ParametricChannelModel(
        n_dims=n_tx,
        n_params=2 * n_tx,
        evaluate=evaluate,
        gradient=lambda theta: grad,
        name="ls",
    )


def physical_model(geom, n_paths):
    """Sum of n_paths steering vectors with complex gains.

    theta = [Re b_1, Im b_1, phi_1, ..., Re b_L, Im b_L, phi_L]; the
    gradient columns per path are e(phi_l), j e(phi_l), b_l de/dphi_l.
    A zero gain makes the azimuth column vanish (rank deficiency is
    surfaced by variation_space, not silently repaired).
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n_tx = geom.n_antennas

    def split(theta):
        theta = np.asarray(theta, dtype=float)
        gains = theta[0::3] + 1j * theta[1::3]
        azimuths = theta[2::3]
        return gains, azimuths

    def evaluate(theta):
        gains, azimuths = split(theta)
        h = np.zeros(n_tx, dtype=complex)
        for b, phi in zip(gains, azimuths):
            h += b * steering_vector(geom, phi)
        return h

    def gradient(theta):
        gains, azimuths = split(theta)
        cols = np.empty((n_tx, 3 * n_paths), dtype=complex)
        for l, (b, phi) in enumerate(zip(gains, azimuths)):
            e = steering_vector(geom, phi)
            cols[:, 3 * l] = e
            cols[:, 3 * l + 1] = 1j * e
            cols[:, 3 * l + 2] = b * steering_derivative(geom, phi)
        return cols

    return ParametricChannelModel(
        n_dims=n_tx,
        n_params=3 * n_paths,
        evaluate=evaluate,
        gradient=gradient,
        name="physical",
    )


def angle_constrained_model(geom, fixed_azimuths):
    """Linear gains-only model with azimuths frozen at estimates.

    h = (E, jE) theta with E the steering matrix of the fixed azimuths
    and theta = [Re b; Im b].
    """
    fixed_azimuths = np.atleast_1d(np.asarray(fixed_azimuths, dtype=float))
    n_paths = fixed_azimuths.shape[0]
    if n_paths < 1:
        raise ValueError("need at least one azimuth")
    E = steering_matrix(geom, fixed_azimuths)
    grad = np.hstack([E, 1j * E])

    def evaluate(theta):
        theta = np.asarray(theta, dtype=float)
        return E @ (theta[:n_paths] + 1j * theta[n_paths:])

    return ParametricChannelModel(
        n_dims=geom.n_antennas,
        n_params=2 * n_paths,
        evaluate=evaluate,
        gradient=lambda theta: grad,
        name="angle_constrained",
    )


def _degenerate_azimuths(azimuths, tol=1e-8):
    """Indices behind a steering-span rank collapse: aliased pairs, endfire."""
    sines = np.sin(azimuths)
    pairs = [
        (i, j)
        for i in range(len(azimuths))
        for j in range(i + 1, len(azimuths))
        if abs(sines[i] - sines[j]) <= tol
    ]
    endfire = [i for i, phi in enumerate(azimuths) if abs(math.cos(phi)) <= tol]
    parts = []
    if pairs:
        parts.append(f"aliased azimuth pairs (equal sines) at indices {pairs}")
    if endfire:
        parts.append(f"endfire azimuths (vanishing derivative) at indices {endfire}")
    return "; ".join(parts) if parts else "near-degenerate generator set"


def _steering_span(geom, azimuths, source):
    azimuths = np.atleast_1d(np.asarray(azimuths, dtype=float))
    if not np.all(np.isfinite(azimuths)):
        raise ValueError("azimuths must be finite")
    gens = []
    for phi in azimuths:
        e = steering_vector(geom, phi)
        gens += [e, -1j * e, steering_derivative(geom, phi)]
    G = np.stack(gens, axis=1)
    try:
        basis, _ = r_orthonormalize(G)
    except (RankDeficientError, ValueError) as err:
        raise RankDeficientError(
            f"{source} variation space is rank deficient for azimuths "
            f"{np.round(np.degrees(azimuths), 3).tolist()} deg: "
            f"{_degenerate_azimuths(azimuths)} ({err})",
            rank=getattr(err, "rank", None),
        ) from err
    return VariationSpaceBasis(basis=basis, source=source)


def physical_variation_space(geom, azimuths):
    """Variation space of the physical multipath model, from azimuths alone.

    Real-orthonormal span of {e(phi_l), -j e(phi_l), de/dphi_l} per
    path: the azimuths determine the space, the path gains do not
    (gains only phase-rotate the derivative directions, which leaves
    every design and bound built from the space unchanged).
    """
    return _steering_span(geom, azimuths, source="physical")


def estimated_variation_space(geom, estimated_azimuths):
    """Variation-space estimate from azimuth estimates alone.

    Same span construction as ``physical_variation_space`` but tagged
    as estimated.  Fails for (near-)coincident or endfire estimates,
    where the generators degenerate.
    """
    return _steering_span(geom, estimated_azimuths, source="estimated")


def kron_observation(X, F, n_rx):
    """Full observation matrix Id_{N_r} (x) X (x) F.

    F must be a column-sampled identity (0/1 entries, exactly one 1 per
    column, distinct rows selected), selecting the pilot subcarriers.
    """
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    F = np.atleast_2d(np.asarray(F))
    if n_rx < 1:
        raise ValueError("n_rx must be >= 1")
    if not np.all(np.isin(F, (0, 1))):
        raise ValueError("F must contain only 0/1 entries")
    if np.any(F.sum(axis=0) != 1):
        raise ValueError("each column of F must select exactly one subcarrier")
    rows = np.argmax(F, axis=0)
    if len(set(rows.tolist())) != F.shape[1]:
        raise ValueError("columns of F must select distinct subcarriers")
    return np.kron(np.kron(np.eye(n_rx), X), F.astype(float))
