"""Exact trigonometric kernels behind the potential construction.

For frequencies mu_1 > ... > mu_n > 0 the building blocks are the vectors

    s(r) = (sin(mu_j r))_j,    c(r) = (cos(mu_j r))_j,

and the Gram matrix G(r) of the sine family on [0, r],

    g_ij(r) = integral_0^r sin(mu_i rho) sin(mu_j rho) drho.

Every entry has a closed form: g_ij = h_ij off the diagonal and
g_ii = r/2 + h_ii, where

    h_ij(r) = sin((mu_i - mu_j) r) / (2 (mu_i - mu_j))
              - sin((mu_i + mu_j) r) / (2 (mu_i + mu_j))     (i != j)
    h_ii(r) = -sin(2 mu_i r) / (4 mu_i),

so H(r) is uniformly bounded in r while G(r) grows linearly on the diagonal.
The closed forms are used everywhere; quadrature exists only as an oracle in
the `oracle` module.

Entries are accurate to about machine epsilon in absolute terms at moderate
radii; near-equal frequencies need no special treatment because the
off-diagonal denominators are r-independent single terms, not cancellations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundedPart",
    "ConfigError",
    "Couplings",
    "Frequencies",
    "GramMatrix",
    "ModelConfig",
    "PositivityError",
    "gram_entry",
    "gram_matrix",
    "gram_matrix_stack",
    "gram_positivity_check",
    "h_bound",
    "h_entry",
    "h_matrix",
    "h_matrix_stack",
    "trig_c",
    "trig_s",
]


class ConfigError(ValueError):
    """A model parameter violates its admissibility condition."""


class PositivityError(ArithmeticError):
    """The Gram quadratic form came out non-positive: a kernel defect."""


@dataclass(frozen=True, eq=False)
class Frequencies:
    """Strictly decreasing positive wavenumbers; the eigenvalues are mu_j^2."""

    mu: np.ndarray

    def __post_init__(self) -> None:
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "mu", mu)
        if mu.ndim != 1 or mu.size == 0:
            raise ConfigError("mu must be a non-empty 1-d sequence")
        for j, value in enumerate(mu, start=1):
            if not np.isfinite(value) or value <= 0.0:
                raise ConfigError(f"mu_{j} <= 0")
        for j in range(1, mu.size):
            if mu[j - 1] <= mu[j]:
                raise ConfigError(f"mu_{j} <= mu_{j + 1}")

    @property
    def n(self) -> int:
        return self.mu.size


@dataclass(frozen=True, eq=False)
class Couplings:
    """Diagonal of the coupling matrix A: a_j != 0 with Re(a_j) >= 0."""

    a: np.ndarray

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "a", a)
        if a.ndim != 1 or a.size == 0:
            raise ConfigError("a must be a non-empty 1-d sequence")
        for j, value in enumerate(a, start=1):
            if not np.isfinite(value):
                raise ConfigError(f"a_{j} is not finite")
            if value == 0:
                raise ConfigError(f"a_{j} == 0")
            if value.real < 0.0:
                raise ConfigError(f"Re(a_{j}) < 0")

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.a.imag == 0.0))


@dataclass(frozen=True, eq=False)
class ModelConfig:
    """The full input of the construction: frequencies mu and couplings a."""

    freqs: Frequencies
    couplings: Couplings

    def __post_init__(self) -> None:
        if self.freqs.n != self.couplings.n:
            raise ConfigError(
                f"len(mu) = {self.freqs.n} but len(a) = {self.couplings.n}"
            )

    @classmethod
    def from_values(cls, mu, a) -> "ModelConfig":
        return cls(Frequencies(np.asarray(mu)), Couplings(np.asarray(a)))

    @property
    def n(self) -> int:
        return self.freqs.n

    @property
    def mu(self) -> np.ndarray:
        return self.freqs.mu

    @property
    def a(self) -> np.ndarray:
        return self.couplings.a

    @property
    def is_real(self) -> bool:
        return self.couplings.is_real

    def coupling_matrix(self) -> np.ndarray:
        """A = Diag(a_1, ..., a_n)."""
        return np.diag(self.a)

    def frequency_matrix(self) -> np.ndarray:
        """M = Diag(mu_1, ..., mu_n)."""
        return np.diag(self.mu)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Value of G at a fixed radius; real symmetric, G(0) = 0."""

    g: np.ndarray
    r: float


@dataclass(frozen=True, eq=False)
class BoundedPart:
    """Value of H at a fixed radius; g_ij = h_ij + (r/2) delta_ij."""

    h: np.ndarray
    r: float


def trig_s(freqs: Frequencies, r: float) -> np.ndarray:
    """Sine vector s(r), component j equal to sin(mu_j r)."""
    return np.sin(freqs.mu * r)


def trig_c(freqs: Frequencies, r: float) -> np.ndarray:
    """Cosine vector c(r), component j equal to cos(mu_j r)."""
    return np.cos(freqs.mu * r)


def h_entry(mu_i: float, mu_j: float, r: float) -> float:
    """Bounded part h_ij(r); the i == j branch is selected by mu_i == mu_j."""
    if mu_i == mu_j:
        return -np.sin(2.0 * mu_i * r) / (4.0 * mu_i)
    diff = mu_i - mu_j
    total = mu_i + mu_j
    return np.sin(diff * r) / (2.0 * diff) - np.sin(total * r) / (2.0 * total)


def gram_entry(mu_i: float, mu_j: float, r: float) -> float:
    """Closed form of integral_0^r sin(mu_i rho) sin(mu_j rho) drho."""
    if mu_i <= 0.0 or mu_j <= 0.0:
        raise ValueError("frequencies must be positive")
    value = h_entry(mu_i, mu_j, r)
    if mu_i == mu_j:
        value += 0.5 * r
    return value


def h_bound(mu_i: float, mu_j: float) -> float:
    """Uniform-in-r bound on |h_ij|: triangle inequality on the closed form."""
    if mu_i == mu_j:
        return 1.0 / (4.0 * mu_i)
    return 1.0 / (2.0 * abs(mu_i - mu_j)) + 1.0 / (2.0 * (mu_i + mu_j))


def h_matrix(freqs: Frequencies, r: float) -> BoundedPart:
    """H(r) assembled entrywise; symmetric because h_entry is."""
    mu = freqs.mu
    n = freqs.n
    h = np.empty((n, n), dtype=float)
    for i in range(n):
        for j in range(i, n):
            h[i, j] = h[j, i] = h_entry(mu[i], mu[j], r)
    return BoundedPart(h=h, r=r)


def gram_matrix(freqs: Frequencies, r: float) -> GramMatrix:
    """G(r) assembled entrywise from gram_entry; symmetric by construction."""
    mu = freqs.mu
    n = freqs.n
    g = np.empty((n, n), dtype=float)
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = gram_entry(mu[i], mu[j], r)
    return GramMatrix(g=g, r=r)


def h_matrix_stack(freqs: Frequencies, radii: np.ndarray) -> np.ndarray:
    """H(r) for every radius at once, shape (len(radii), n, n)."""
    mu = freqs.mu
    n = freqs.n
    radii = np.asarray(radii, dtype=float)
    diff = np.subtract.outer(mu, mu)
    total = np.add.outer(mu, mu)
    rr = radii[:, None, None]
    # off-diagonal closed form; the diagonal (diff == 0) is patched after.
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.sin(diff * rr) / (2.0 * diff) - np.sin(total * rr) / (2.0 * total)
    idx = np.arange(n)
    h[:, idx, idx] = -np.sin(2.0 * mu * radii[:, None]) / (4.0 * mu)
    return h


def gram_matrix_stack(freqs: Frequencies, radii: np.ndarray) -> np.ndarray:
    """G(r) for every radius at once, shape (len(radii), n, n)."""
    radii = np.asarray(radii, dtype=float)
    g = h_matrix_stack(freqs, radii)
    idx = np.arange(freqs.n)
    g[:, idx, idx] += 0.5 * radii[:, None]
    return g


def gram_positivity_check(freqs: Frequencies, r: float, xi: np.ndarray) -> float:
    """Quadratic form <xi, G(r) xi> for r > 0 and xi != 0; must be positive.

    The value is real up to round-off because G is real symmetric. A
    non-positive result cannot happen for exact arithmetic and is raised as
    a PositivityError (kernel defect).
    """
    if not r > 0.0:
        raise ValueError("positivity check requires r > 0")
    xi = np.asarray(xi, dtype=complex)
    if not np.any(xi != 0):
        raise ValueError("positivity check requires xi != 0")
    g = gram_matrix(freqs, r).g
    value = float(np.real(np.vdot(xi, g @ xi)))
    if value <= 0.0:
        raise PositivityError(
            f"<xi, G({r}) xi> = {value} is not positive: kernel defect"
        )
    return value
