"""Sparse channel estimators: greedy pursuit in flattened and factored form.

Three pipelines share the same measurement model:

* ``omp_1d`` runs orthogonal matching pursuit on the vectorized
  observation against a dense sensing matrix.
* ``omp_2d`` runs the same pursuit directly on the observation matrix,
  correlating through the two dictionary factors so the Kronecker-sized
  operator is never materialized.  Atom selection and the refit weights
  coincide with ``omp_1d`` step for step.
* ``somp_aoa_stage``/``aod_stage`` first recover the arrival-angle rows
  jointly across pilot columns, then pursue departure angles inside the
  reduced coefficient matrix.

Two direct least-squares baselines (``ls_1d_direct``,
``simplified_ls_2d``) cover the non-sparse recovery regime where the
grid is small enough for the measurements to determine every
coefficient.

Support indices are 0-based.  A 2-D atom ``(i, j)`` (receive row ``i``,
transmit column ``j``) corresponds to flat index ``j*grid_n + i``,
matching column-major vectorization of the coefficient matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import DictionaryPair
from .linalg import DimensionMismatch, SingularSystemError, hermitian_solve

FIXED_ITERATIONS = "fixed_iterations"
RESIDUAL_THRESHOLD = "residual_threshold"


class DictionaryExhausted(RuntimeError):
    """Every atom is excluded; matching cannot select anything."""


@dataclass(frozen=True)
class StoppingRule:
    """Loop-termination policy shared by all greedy estimators.

    ``fixed_iterations`` runs exactly ``max_iters`` selections, the usual
    choice when the path count is known.  ``residual_threshold`` stops as
    soon as the residual norm drops to ``epsilon``, bounded by
    ``hard_cap`` (default: number of atoms or measurements, whichever is
    smaller) so it always terminates.
    """

    mode: str = FIXED_ITERATIONS
    max_iters: int = 1
    epsilon: float = 0.0
    hard_cap: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in (FIXED_ITERATIONS, RESIDUAL_THRESHOLD):
            raise ValueError(f"unknown stopping mode {self.mode!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")
        if self.hard_cap is not None:
            if self.hard_cap < 1:
                raise ValueError("hard_cap must be at least 1")
            if self.mode == FIXED_ITERATIONS and self.hard_cap < self.max_iters:
                raise ValueError("hard_cap must not undercut max_iters in fixed mode")

    @classmethod
    def fixed(cls, iterations: int) -> "StoppingRule":
        return cls(mode=FIXED_ITERATIONS, max_iters=iterations)

    @classmethod
    def residual(cls, epsilon: float, hard_cap: int | None = None) -> "StoppingRule":
        return cls(mode=RESIDUAL_THRESHOLD, epsilon=epsilon, hard_cap=hard_cap)

    def iteration_cap(self, n_atoms: int, n_measurements: int) -> int:
        if self.mode == FIXED_ITERATIONS:
            return self.max_iters
        if self.hard_cap is not None:
            return self.hard_cap
        return min(n_atoms, n_measurements)

    def should_stop(self, iterations: int, residual_norm: float, cap: int) -> bool:
        if self.mode == FIXED_ITERATIONS:
            return iterations >= self.max_iters
        return residual_norm <= self.epsilon or iterations >= cap


@dataclass
class SparseEstimate:
    """Result of one greedy pursuit: support in selection order plus weights."""

    support: list
    weights: np.ndarray
    residual_norm: float
    iterations: int

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.complex128).reshape(-1)
        if len(self.support) != self.weights.size:
            raise DimensionMismatch("support and weights must have equal length")
        if len(set(map(tuple_or_int, self.support))) != len(self.support):
            raise ValueError("support entries must be unique")


@dataclass
class TwoStageResult:
    """Output of the two-stage pipeline.

    ``aoa_rows``: arrival-angle grid rows picked in stage one.
    ``coeff_matrix``: joint refit of those rows against all pilot columns.
    ``pairs``: final ``(aoa_index, aod_index, gain)`` triples.
    """

    aoa_rows: list
    coeff_matrix: np.ndarray
    pairs: list


def tuple_or_int(entry) -> tuple | int:
    return tuple(entry) if isinstance(entry, (tuple, list, np.ndarray)) else int(entry)


def pair_to_flat(i: int, j: int, n_rows: int) -> int:
    """Flat column-major index of atom ``(i, j)`` on a grid with ``n_rows`` rows."""
    return j * n_rows + i


def flat_to_pair(k: int, n_rows: int) -> tuple[int, int]:
    """Inverse of :func:`pair_to_flat`."""
    return int(k) % n_rows, int(k) // n_rows


def _safe_norms(a: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(a, axis=0)
    return np.where(norms > 0.0, norms, 1.0)


def omp_1d(y: np.ndarray, sensing: np.ndarray, stop: StoppingRule) -> SparseEstimate:
    """Orthogonal matching pursuit on a vectorized observation.

    Each iteration selects the non-excluded column maximizing
    ``|a^H y_r| / ||a||``, refits all selected weights by least squares on
    the Gram system, and recomputes the residual from the original
    observation.  Ties resolve to the smallest column index.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    a = np.asarray(sensing, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch("sensing matrix must be 2-D")
    if a.shape[0] != y.size:
        raise DimensionMismatch(
            f"observation length {y.size} does not match sensing rows {a.shape[0]}"
        )
    n_meas, n_atoms = a.shape
    if n_atoms == 0:
        raise DimensionMismatch("sensing matrix has no columns")
    if stop.mode == FIXED_ITERATIONS and n_atoms < stop.max_iters:
        raise DimensionMismatch(
            f"cannot run {stop.max_iters} iterations with only {n_atoms} atoms"
        )
    col_norms = _safe_norms(a)
    cap = stop.iteration_cap(n_atoms, n_meas)
    support: list[int] = []
    weights = np.zeros(0, dtype=np.complex128)
    residual = y.copy()
    residual_norm = float(np.linalg.norm(residual))
    if stop.mode == RESIDUAL_THRESHOLD and residual_norm <= stop.epsilon:
        return SparseEstimate(support, weights, residual_norm, 0)
    while True:
        metric = np.abs(a.conj().T @ residual) / col_norms
        if support:
            metric[support] = -1.0
        k = int(np.argmax(metric))
        support.append(k)
        selected = a[:, support]
        gram = selected.conj().T @ selected
        rhs = selected.conj().T @ y
        weights = hermitian_solve(gram, rhs, context=f"1-D pursuit iteration {len(support)}")
        residual = y - selected @ weights
        residual_norm = float(np.linalg.norm(residual))
        if stop.should_stop(len(support), residual_norm, cap):
            break
    return SparseEstimate(support, weights, residual_norm, len(support))


def ls_1d_direct(y: np.ndarray, sensing: np.ndarray) -> np.ndarray:
    """Unconstrained least-squares solve of the vectorized model.

    Needs at least as many measurements as grid atoms (full column rank);
    a wide or rank-deficient sensing matrix raises
    :class:`~mmwcs.linalg.SingularSystemError`.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    a = np.asarray(sensing, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != y.size:
        raise DimensionMismatch("observation length does not match sensing rows")
    if a.shape[1] > a.shape[0]:
        raise SingularSystemError(
            f"sensing matrix with {a.shape[1]} columns and {a.shape[0]} rows cannot have full column rank"
        )
    gram = a.conj().T @ a
    rhs = a.conj().T @ y
    return hermitian_solve(gram, rhs, context="1-D direct least squares")


def somp_aoa_stage(
    y: np.ndarray,
    a_r_eff: np.ndarray,
    stop: StoppingRule,
    aggregate: str = "l1",
) -> tuple[list[int], np.ndarray]:
    """Joint arrival-angle recovery across all pilot columns.

    Scores each grid row by the aggregate modulus of its correlation with
    every column of the residual (``l1`` sum by default, ``l2`` as the
    alternative), normalized by the dictionary column norm.  Selected rows
    are refit jointly and the residual is recomputed from the original
    observation.  Returns the selected rows and the refit coefficient
    matrix (one row per selected grid row, no zero rows).
    """
    y = np.asarray(y, dtype=np.complex128)
    a = np.asarray(a_r_eff, dtype=np.complex128)
    if y.ndim != 2 or a.ndim != 2 or a.shape[0] != y.shape[0]:
        raise DimensionMismatch("observation rows do not match dictionary rows")
    if aggregate not in ("l1", "l2"):
        raise ValueError(f"unknown aggregation {aggregate!r}")
    n_grid = a.shape[1]
    if stop.mode == FIXED_ITERATIONS and n_grid < stop.max_iters:
        raise DimensionMismatch(f"cannot select {stop.max_iters} rows from {n_grid} candidates")
    col_norms = _safe_norms(a)
    cap = stop.iteration_cap(n_grid, y.size)
    rows: list[int] = []
    coeff = np.zeros((0, y.shape[1]), dtype=np.complex128)
    residual = y.copy()
    residual_norm = float(np.linalg.norm(residual))
    if stop.mode == RESIDUAL_THRESHOLD and residual_norm <= stop.epsilon:
        return rows, coeff
    while True:
        corr = a.conj().T @ residual
        if aggregate == "l1":
            score = np.abs(corr).sum(axis=1)
        else:
            score = np.sqrt((np.abs(corr) ** 2).sum(axis=1))
        score = score / col_norms
        if rows:
            score[rows] = -1.0
        rows.append(int(np.argmax(score)))
        selected = a[:, rows]
        gram = selected.conj().T @ selected
        coeff = hermitian_solve(
            gram, selected.conj().T @ y, context=f"arrival stage iteration {len(rows)}"
        )
        residual = y - selected @ coeff
        residual_norm = float(np.linalg.norm(residual))
        if stop.should_stop(len(rows), residual_norm, cap):
            break
    return rows, coeff


def aod_stage(
    coeff_matrix: np.ndarray,
    a_t_eff: np.ndarray,
    stop: StoppingRule,
) -> list[tuple[int, int, complex]]:
    """Departure-angle pursuit inside the reduced coefficient matrix.

    Conceptually this is matching pursuit on ``vec(coeff_matrix)`` against
    ``kron(conj(a_t_eff), I)``; because those atoms are the rank-one
    matrices ``e_row @ a_t_eff[:, j]^H``, it runs as a factored 2-D
    pursuit with an identity receive side and never materializes the
    Kronecker operator.  Flat index ``k`` decomposes as
    ``(row, aod) = (k % n_rows, k // n_rows)``.
    """
    coeff = np.asarray(coeff_matrix, dtype=np.complex128)
    if coeff.ndim != 2 or coeff.shape[0] < 1:
        raise DimensionMismatch("coefficient matrix must be 2-D with at least one row")
    identity = np.eye(coeff.shape[0], dtype=np.complex128)
    est = _factor_omp(coeff, identity, np.asarray(a_t_eff, dtype=np.complex128), stop, "departure stage")
    return [(int(i), int(j), complex(w)) for (i, j), w in zip(est.support, est.weights)]


def two_stage(
    y: np.ndarray,
    dic: DictionaryPair,
    stop_aoa: StoppingRule,
    stop_aod: StoppingRule | None = None,
    aggregate: str = "l1",
) -> TwoStageResult:
    """Run both stages and map stage-two rows back to arrival grid indices."""
    rows, coeff = somp_aoa_stage(y, dic.a_r_eff, stop_aoa, aggregate=aggregate)
    if not rows:
        return TwoStageResult(aoa_rows=[], coeff_matrix=coeff, pairs=[])
    triples = aod_stage(coeff, dic.a_t_eff, stop_aod if stop_aod is not None else stop_aoa)
    pairs = [(int(rows[row]), j, w) for row, j, w in triples]
    return TwoStageResult(aoa_rows=rows, coeff_matrix=coeff, pairs=pairs)


def match_2d(
    y_resid: np.ndarray,
    dic: DictionaryPair,
    excluded=(),
    norms: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[int, int]:
    """Best-matching 2-D atom index for a residual matrix.

    Maximizes ``|a_r_eff[:, i]^H @ Y_r @ a_t_eff[:, j]|`` over non-excluded
    pairs, normalized by the atom Frobenius norm (the product of the two
    column norms).  Ties resolve to the smallest flat index
    ``j*grid_n + i``.  Raises :class:`DictionaryExhausted` when every pair
    is excluded.
    """
    a_r, a_t = dic.a_r_eff, dic.a_t_eff
    mask = np.zeros((a_r.shape[1], a_t.shape[1]), dtype=bool)
    for i, j in excluded:
        mask[i, j] = True
    if norms is None:
        norms = (_safe_norms(a_r), _safe_norms(a_t))
    return _factor_match(np.asarray(y_resid, dtype=np.complex128), a_r, a_t, mask, *norms)


def ls_2d(y: np.ndarray, dic: DictionaryPair, support: list[tuple[int, int]]) -> np.ndarray:
    """Least-squares weights for a set of 2-D atoms against observation ``y``.

    Minimizes ``||y - sum_m z_m * atom(i_m, j_m)||_F``.  The normal matrix
    is assembled from the two factor Gram matrices (entrywise product), so
    no atom is ever materialized.
    """
    if len(support) == 0:
        raise DimensionMismatch("support must be non-empty")
    if len(set(map(tuple, support))) != len(support):
        raise ValueError("support entries must be unique")
    n = dic.grid_n
    for i, j in support:
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"support entry ({i}, {j}) outside grid of size {n}")
    return _factor_ls(
        np.asarray(y, dtype=np.complex128),
        dic.a_r_eff,
        dic.a_t_eff,
        list(support),
        context="2-D least squares",
    )


def omp_2d(y: np.ndarray, dic: DictionaryPair, stop: StoppingRule) -> SparseEstimate:
    """Orthogonal matching pursuit on the observation matrix in factored form.

    Equivalent to :func:`omp_1d` on the vectorized observation: identical
    atom choices and identical refit weights, at the cost of two thin
    matrix products per iteration instead of one Kronecker-sized one.
    Support entries are ``(i, j)`` pairs in selection order.
    """
    return _factor_omp(
        np.asarray(y, dtype=np.complex128), dic.a_r_eff, dic.a_t_eff, stop, "2-D pursuit"
    )


def _factor_match(
    residual: np.ndarray,
    a_r: np.ndarray,
    a_t: np.ndarray,
    mask: np.ndarray,
    r_norms: np.ndarray,
    t_norms: np.ndarray,
) -> tuple[int, int]:
    corr = a_r.conj().T @ residual @ a_t
    metric = np.abs(corr) / np.outer(r_norms, t_norms)
    metric[mask] = -1.0
    # Column-major ravel makes argmax ties resolve to the smallest flat index.
    flat = int(np.argmax(metric.ravel(order="F")))
    i, j = flat_to_pair(flat, metric.shape[0])
    if metric[i, j] < 0.0:
        raise DictionaryExhausted("all atoms are excluded")
    return i, j


def _factor_ls(
    y: np.ndarray,
    a_r: np.ndarray,
    a_t: np.ndarray,
    support: list[tuple[int, int]],
    context: str,
) -> np.ndarray:
    rows = [i for i, _ in support]
    cols = [j for _, j in support]
    ar = a_r[:, rows]
    at = a_t[:, cols]
    # Normal matrix of the flattened model: conj(transmit Gram) * receive Gram.
    gram = np.conj(at.conj().T @ at) * (ar.conj().T @ ar)
    proj = ar.conj().T @ y
    rhs = np.sum(proj * at.T, axis=1)
    return hermitian_solve(gram, rhs, context=context)


def _factor_omp(
    y: np.ndarray,
    a_r: np.ndarray,
    a_t: np.ndarray,
    stop: StoppingRule,
    label: str,
) -> SparseEstimate:
    if y.ndim != 2:
        raise DimensionMismatch("observation must be a matrix")
    if a_r.shape[0] != y.shape[0] or a_t.shape[0] != y.shape[1]:
        raise DimensionMismatch("observation shape does not match the dictionary factors")
    n_rows, n_cols = a_r.shape[1], a_t.shape[1]
    n_atoms = n_rows * n_cols
    if n_atoms == 0:
        raise DimensionMismatch("dictionary has no atoms")
    if stop.mode == FIXED_ITERATIONS and n_atoms < stop.max_iters:
        raise DimensionMismatch(f"cannot run {stop.max_iters} iterations with only {n_atoms} atoms")
    r_norms = _safe_norms(a_r)
    t_norms = _safe_norms(a_t)
    cap = stop.iteration_cap(n_atoms, y.size)
    mask = np.zeros((n_rows, n_cols), dtype=bool)
    support: list[tuple[int, int]] = []
    weights = np.zeros(0, dtype=np.complex128)
    residual = y.copy()
    residual_norm = float(np.linalg.norm(residual))
    if stop.mode == RESIDUAL_THRESHOLD and residual_norm <= stop.epsilon:
        return SparseEstimate(support, weights, residual_norm, 0)
    while True:
        i, j = _factor_match(residual, a_r, a_t, mask, r_norms, t_norms)
        support.append((i, j))
        mask[i, j] = True
        weights = _factor_ls(y, a_r, a_t, support, context=f"{label} iteration {len(support)}")
        picked_r = a_r[:, [i for i, _ in support]]
        picked_t = a_t[:, [j for _, j in support]]
        residual = y - (picked_r * weights) @ picked_t.conj().T
        residual_norm = float(np.linalg.norm(residual))
        if stop.should_stop(len(support), residual_norm, cap):
            break
    return SparseEstimate(support, weights, residual_norm, len(support))


def simplified_ls_2d(y: np.ndarray, dic: DictionaryPair) -> np.ndarray:
    """Separable least-squares solve for the full grid coefficient matrix.

    Computes ``Z = (A_r^H A_r)^-1 A_r^H Y A_t (A_t^H A_t)^-1`` by applying
    the dictionary's cached per-side projectors, so one call costs two
    dense products.  When the grid is square against the measurements
    this equals the devectorized 1-D direct solve at a fraction of the
    cost.  Each factor must have full column rank (``grid_n <= n_y`` and
    ``grid_n <= n_x``); violations raise :class:`SingularSystemError`
    naming the offending side.
    """
    y = np.asarray(y, dtype=np.complex128)
    return dic.a_r_pinv @ y @ dic.a_t_pinv.conj().T


def reconstruct_channel(estimate, dic: DictionaryPair) -> np.ndarray:
    """Full-array channel estimate from a sparse support and weights.

    Accepts a :class:`SparseEstimate` (flat or pair support) or a
    :class:`TwoStageResult` and sums full-dictionary rank-one terms.  An
    empty support yields the zero channel.
    """
    if isinstance(estimate, TwoStageResult):
        triples = estimate.pairs
    else:
        triples = []
        for entry, weight in zip(estimate.support, estimate.weights):
            if isinstance(entry, (tuple, list, np.ndarray)):
                i, j = int(entry[0]), int(entry[1])
            else:
                i, j = flat_to_pair(int(entry), dic.grid_n)
            triples.append((i, j, weight))
    n_r = dic.a_r_full.shape[0]
    n_t = dic.a_t_full.shape[0]
    if not triples:
        return np.zeros((n_r, n_t), dtype=np.complex128)
    rows = [i for i, _, _ in triples]
    cols = [j for _, j, _ in triples]
    gains = np.array([w for _, _, w in triples], dtype=np.complex128)
    return (dic.a_r_full[:, rows] * gains) @ dic.a_t_full[:, cols].conj().T


def reconstruct_from_grid(z_grid: np.ndarray, dic: DictionaryPair) -> np.ndarray:
    """Full-array channel estimate from a dense grid coefficient matrix."""
    z = np.asarray(z_grid)
    if z.shape != (dic.grid_n, dic.grid_n):
        raise DimensionMismatch(f"coefficient matrix shape {z.shape} does not match the grid")
    return dic.a_r_full @ z @ dic.a_t_full.conj().T
