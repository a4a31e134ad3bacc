"""Scenario configuration, geometric channel synthesis, and angle dictionaries.

The propagation model is a narrowband uniform-linear-array channel with a
small number of planar paths.  Angles are handled internally as spatial
frequencies ``f = spacing_ratio * sin(angle)``; the estimation grid covers
one full period ``[-1/2, 1/2)`` so every on-grid path maps to exactly one
dictionary column.  Training uses selection precoders and combiners (the
first ``n_x`` transmit and ``n_y`` receive antenna ports) together with
orthogonal pilots, so the effective dictionaries seen by the estimators
are row-truncated copies of the full array dictionaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .linalg import DimensionMismatch, SingularSystemError, hermitian_solve

# Element-count cap for the materialized 1-D sensing matrix.
SENSING_ELEMENT_CAP = 2**30


class ConfigError(ValueError):
    """A scenario parameter is out of its valid domain."""


class PilotError(ValueError):
    """Pilot matrix does not satisfy the orthogonality the cancellation needs."""


class ResourceLimitError(RuntimeError):
    """A requested allocation exceeds the configured element cap."""


@dataclass(frozen=True)
class SystemConfig:
    """Immutable description of one benchmark scenario.

    ``n_y`` (the number of combined measurement rows) is derived as
    ``q_slots * n_rf``: each training slot yields one output per RF chain.
    """

    n_t: int = 64
    n_r: int = 64
    n_rf: int = 4
    q_slots: int = 3
    n_x: int = 12
    grid_n: int = 32
    n_paths: int = 3
    spacing_ratio: float = 0.5
    sigma_p2: float = 1.0
    sigma_n2: float = 0.1
    angle_mode: Literal["on_grid", "off_grid"] = "on_grid"
    seed: int = 0

    @property
    def n_y(self) -> int:
        return self.q_slots * self.n_rf

    def __post_init__(self) -> None:
        for name in ("n_t", "n_r", "n_rf", "q_slots", "n_x", "grid_n", "n_paths"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.n_x > self.n_t:
            raise ConfigError(f"n_x={self.n_x} exceeds transmit array size n_t={self.n_t}")
        if self.n_y > self.n_r:
            raise ConfigError(
                f"n_y=q_slots*n_rf={self.n_y} exceeds receive array size n_r={self.n_r}"
            )
        if self.n_paths > self.grid_n:
            raise ConfigError(f"n_paths={self.n_paths} exceeds grid size grid_n={self.grid_n}")
        if self.sigma_p2 <= 0.0:
            raise ConfigError("sigma_p2 must be positive")
        if self.sigma_n2 < 0.0:
            raise ConfigError("sigma_n2 must be non-negative")
        if self.angle_mode not in ("on_grid", "off_grid"):
            raise ConfigError(f"angle_mode must be 'on_grid' or 'off_grid', got {self.angle_mode!r}")
        if self.grid_n > min(self.n_t, self.n_r):
            warnings.warn(
                f"grid_n={self.grid_n} exceeds min(n_t, n_r)={min(self.n_t, self.n_r)}; "
                "the dictionary is oversampled relative to the arrays",
                stacklevel=2,
            )


@dataclass
class PathSet:
    """Gains and spatial frequencies of the planar paths of one channel draw.

    Gains carry the ``sqrt(n_t*n_r/n_paths)`` normalization so the channel
    is the plain sum of rank-one outer products weighted by ``gains``.
    """

    gains: np.ndarray
    aoa_freqs: np.ndarray
    aod_freqs: np.ndarray

    def __post_init__(self) -> None:
        self.gains = np.asarray(self.gains, dtype=np.complex128).reshape(-1)
        self.aoa_freqs = np.asarray(self.aoa_freqs, dtype=np.float64).reshape(-1)
        self.aod_freqs = np.asarray(self.aod_freqs, dtype=np.float64).reshape(-1)
        if not (self.gains.size == self.aoa_freqs.size == self.aod_freqs.size):
            raise DimensionMismatch("gains and frequency arrays must have equal length")
        for freqs in (self.aoa_freqs, self.aod_freqs):
            if freqs.size and (freqs.min() < -0.5 or freqs.max() >= 0.5):
                raise ConfigError("spatial frequencies must lie in [-1/2, 1/2)")

    def __len__(self) -> int:
        return self.gains.size


@dataclass
class DictionaryPair:
    """Receive/transmit steering dictionaries on a shared frequency grid.

    ``a_r_eff``/``a_t_eff`` are the effective dictionaries after combining
    and precoding (what the estimators correlate against); ``a_r_full`` and
    ``a_t_full`` keep all antenna rows for channel reconstruction.
    """

    a_r_eff: np.ndarray
    a_t_eff: np.ndarray
    a_r_full: np.ndarray
    a_t_full: np.ndarray
    grid: np.ndarray

    @property
    def grid_n(self) -> int:
        return self.grid.size

    @cached_property
    def a_r_pinv(self) -> np.ndarray:
        """Left least-squares projector ``(A_r^H A_r)^-1 A_r^H``.

        Depends only on the dictionary, so it is factored once and reused
        across trials (the flattened pipeline precomputes its sensing
        matrix the same way).  Requires full column rank.
        """
        return _ls_projector(self.a_r_eff, "receive-side", "measurement rows")

    @cached_property
    def a_t_pinv(self) -> np.ndarray:
        """Transmit-side counterpart of :attr:`a_r_pinv`."""
        return _ls_projector(self.a_t_eff, "transmit-side", "pilot streams")


def _ls_projector(a: np.ndarray, side: str, row_label: str) -> np.ndarray:
    if a.shape[1] > a.shape[0]:
        raise SingularSystemError(
            f"{side} dictionary is rank deficient: {a.shape[1]} atoms on {a.shape[0]} {row_label}"
        )
    gram = a.conj().T @ a
    return hermitian_solve(gram, a.conj().T, context=f"{side} dictionary gram")


def steering_vector(n_antennas: int, spacing_ratio: float, sin_angle: float) -> np.ndarray:
    """Unit-norm ULA steering vector for a given sine of the arrival angle."""
    return steering_from_frequency(n_antennas, spacing_ratio * sin_angle)


def steering_from_frequency(n_antennas: int, freq: float) -> np.ndarray:
    """Unit-norm steering vector at spatial frequency ``freq`` (cycles/element)."""
    if n_antennas < 1:
        raise ConfigError("steering vector needs at least one antenna")
    k = np.arange(n_antennas)
    return np.exp(2j * np.pi * freq * k) / np.sqrt(n_antennas)


def build_grid(grid_n: int) -> np.ndarray:
    """Uniform spatial-frequency grid ``{-1/2 + i/grid_n : i = 0..grid_n-1}``."""
    if grid_n < 1:
        raise ConfigError("grid_n must be a positive integer")
    return np.arange(grid_n) / grid_n - 0.5


def generate_paths(cfg: SystemConfig, rng: np.random.Generator) -> PathSet:
    """Draw path gains and angles for one channel realization.

    On-grid mode samples frequencies uniformly *without replacement* from
    the estimation grid (distinct indices per side); off-grid mode samples
    uniformly from ``[-1/2, 1/2)``.  Gains are standard circular complex
    Gaussians scaled by ``sqrt(n_t*n_r/n_paths)``.
    """
    n_paths = cfg.n_paths
    if cfg.angle_mode == "on_grid":
        if n_paths > cfg.grid_n:
            raise ConfigError(
                f"cannot draw {n_paths} distinct on-grid frequencies from a {cfg.grid_n}-point grid"
            )
        grid = build_grid(cfg.grid_n)
        aoa = rng.choice(grid, size=n_paths, replace=False)
        aod = rng.choice(grid, size=n_paths, replace=False)
    else:
        aoa = rng.uniform(-0.5, 0.5, size=n_paths)
        aod = rng.uniform(-0.5, 0.5, size=n_paths)
    raw = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)
    gains = np.sqrt(cfg.n_t * cfg.n_r / n_paths) * raw
    return PathSet(gains=gains, aoa_freqs=aoa, aod_freqs=aod)


def build_channel(paths: PathSet, cfg: SystemConfig) -> np.ndarray:
    """Assemble the ``n_r x n_t`` channel as a gain-weighted sum of outer products."""
    a_r = np.column_stack([steering_from_frequency(cfg.n_r, f) for f in paths.aoa_freqs])
    a_t = np.column_stack([steering_from_frequency(cfg.n_t, f) for f in paths.aod_freqs])
    return (a_r * paths.gains) @ a_t.conj().T


def build_selection_precoders(cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Selection precoder ``F`` (n_t x n_x) and combiner ``W`` (n_r x n_y).

    Both pick the leading antenna ports: ``F = [I; 0]`` and ``W = [I; 0]``.
    """
    f = np.zeros((cfg.n_t, cfg.n_x), dtype=np.complex128)
    f[: cfg.n_x, :] = np.eye(cfg.n_x)
    w = np.zeros((cfg.n_r, cfg.n_y), dtype=np.complex128)
    w[: cfg.n_y, :] = np.eye(cfg.n_y)
    return f, w


def build_pilots(cfg: SystemConfig, kind: str = "identity") -> np.ndarray:
    """Pilot matrix ``X`` (n_x x n_x) with ``X @ X^H = sigma_p2 * I``.

    ``kind='identity'`` scales the identity; ``kind='dft'`` uses a unitary
    DFT matrix, spreading pilot energy across all training streams.
    """
    if kind == "identity":
        return np.sqrt(cfg.sigma_p2) * np.eye(cfg.n_x, dtype=np.complex128)
    if kind == "dft":
        k = np.arange(cfg.n_x)
        dft = np.exp(-2j * np.pi * np.outer(k, k) / cfg.n_x) / np.sqrt(cfg.n_x)
        return np.sqrt(cfg.sigma_p2) * dft
    raise ConfigError(f"unknown pilot kind {kind!r}")


def synthesize_measurements(
    h: np.ndarray,
    f: np.ndarray,
    w: np.ndarray,
    x: np.ndarray,
    cfg: SystemConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Combined training observation ``Y = W^H H F X + W^H N``.

    Noise entries are independent circular complex Gaussians with variance
    ``sigma_n2`` per complex entry (``sigma_n2/2`` per real component).
    """
    h = np.asarray(h)
    if h.shape != (cfg.n_r, cfg.n_t):
        raise DimensionMismatch(f"channel shape {h.shape} does not match ({cfg.n_r}, {cfg.n_t})")
    if f.shape != (cfg.n_t, cfg.n_x) or w.shape != (cfg.n_r, cfg.n_y):
        raise DimensionMismatch("precoder/combiner shapes do not match the configuration")
    if x.shape[0] != cfg.n_x:
        raise DimensionMismatch("pilot row count does not match n_x")
    noise = np.sqrt(cfg.sigma_n2 / 2.0) * (
        rng.standard_normal((cfg.n_r, x.shape[1])) + 1j * rng.standard_normal((cfg.n_r, x.shape[1]))
    )
    return w.conj().T @ (h @ f @ x + noise)


def cancel_pilots(y: np.ndarray, x: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Strip the pilots from ``Y`` via ``Y @ X^H / sigma_p2``.

    Requires ``X @ X^H = sigma_p2 * I`` (max deviation 1e-10); orthogonal
    pilots keep the post-cancellation noise white.
    """
    x = np.asarray(x)
    gram = x @ x.conj().T
    deviation = float(np.max(np.abs(gram - cfg.sigma_p2 * np.eye(x.shape[0]))))
    if deviation > 1e-10:
        raise PilotError(
            f"pilots are not orthogonal with power sigma_p2 (max deviation {deviation:.3e})"
        )
    return np.asarray(y) @ x.conj().T / cfg.sigma_p2


def build_dictionaries(cfg: SystemConfig, f: np.ndarray, w: np.ndarray) -> DictionaryPair:
    """Full and effective steering dictionaries on the shared frequency grid."""
    grid = build_grid(cfg.grid_n)
    a_r_full = np.column_stack([steering_from_frequency(cfg.n_r, fr) for fr in grid])
    a_t_full = np.column_stack([steering_from_frequency(cfg.n_t, fr) for fr in grid])
    return DictionaryPair(
        a_r_eff=w.conj().T @ a_r_full,
        a_t_eff=f.conj().T @ a_t_full,
        a_r_full=a_r_full,
        a_t_full=a_t_full,
        grid=grid,
    )


def atom_2d(dic: DictionaryPair, i: int, j: int) -> np.ndarray:
    """Rank-one measurement atom ``a_r_eff[:, i] @ a_t_eff[:, j]^H``."""
    n = dic.grid_n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"atom index ({i}, {j}) outside grid of size {n}")
    return np.outer(dic.a_r_eff[:, i], dic.a_t_eff[:, j].conj())


def build_1d_sensing_matrix(dic: DictionaryPair, max_elements: int = SENSING_ELEMENT_CAP) -> np.ndarray:
    """Dense sensing matrix whose column ``j*grid_n + i`` is ``vec(atom_2d(i, j))``.

    Equals ``kron(conj(a_t_eff), a_r_eff)``; this is the memory-heavy
    flattened operator the vectorized estimators consume.  Raises
    :class:`ResourceLimitError` when the element count would exceed
    ``max_elements``.
    """
    n_y, n = dic.a_r_eff.shape
    n_x = dic.a_t_eff.shape[0]
    total = n * n * n_x * n_y
    if total > max_elements:
        raise ResourceLimitError(
            f"1-D sensing matrix would hold {total} elements, above the cap of {max_elements}"
        )
    return np.kron(dic.a_t_eff.conj(), dic.a_r_eff)
