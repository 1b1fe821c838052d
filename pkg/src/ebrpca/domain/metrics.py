"""Scores for a recovered decomposition against ground truth."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode, raise_rpca_error
from ebrpca.domain.models import Decomposition

DEFAULT_RANK_TOL = 1e-6
SUCCESS_ANGLE_DEGREES = 5.0

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class SubspaceComparison:
    """Principal angles (degrees, ascending) between two column spaces."""

    angles: Tuple[float, ...]
    rank_estimate: int
    rank_true: int

    @property
    def largest(self) -> float:
        return self.angles[-1]

    @property
    def mean(self) -> float:
        return float(np.mean(self.angles))

    @property
    def deficiency(self) -> int:
        return abs(self.rank_estimate - self.rank_true)


@dataclass(frozen=True)
class TrialScore:
    mse_normalized: float
    angle_degrees: float
    support_precision: float
    support_recall: float
    mean_angle_degrees: float = 0.0
    rank_deficiency: int = 0
    relative_mse: Optional[float] = None
    relative_angle: Optional[float] = None

    @property
    def succeeded(self) -> bool:
        return self.angle_degrees < SUCCESS_ANGLE_DEGREES

    def to_dict(self) -> dict:
        return asdict(self)


def _pair(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, value=(a.shape, b.shape))
    return a, b


def normalized_mse(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    """||X - X_hat||_F^2 / ||X||_F^2."""
    x_hat, x_true = _pair(x_hat, x_true)
    ref = float(np.sum(np.square(x_true)))
    if ref == 0.0:
        raise_rpca_error(ErrorCode.ZERO_REFERENCE, message="||X_true||_F = 0")
    return float(np.sum(np.square(x_true - x_hat))) / ref


def _column_basis(x: np.ndarray, rank_tol: float, name: str) -> np.ndarray:
    u, sv, _ = np.linalg.svd(x, full_matrices=False)
    if sv.size == 0 or not sv[0] > _TINY:
        raise_rpca_error(ErrorCode.ZERO_MATRIX, message=f"{name} is numerically zero", location=name)
    return u[:, : int(np.count_nonzero(sv > rank_tol * sv[0]))]


def principal_angles(x_hat: np.ndarray, x_true: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> SubspaceComparison:
    """Principal angles between col(X_hat) and col(X_true).

    Each rank is the count of singular values above rank_tol * sigma_1. When
    the ranks differ both bases are cut to the leading min(r_hat, r) singular
    vectors, so a nearly full-rank failure still reads as ~90 degrees.
    """
    x_hat, x_true = _pair(x_hat, x_true)
    qa = _column_basis(x_hat, rank_tol, "X_hat")
    qb = _column_basis(x_true, rank_tol, "X_true")
    k = min(qa.shape[1], qb.shape[1])
    cosines = np.clip(np.linalg.svd(qa[:, :k].T @ qb[:, :k], compute_uv=False), 0.0, 1.0)
    angles = np.sort(np.degrees(np.arccos(cosines)))
    return SubspaceComparison(tuple(float(a) for a in angles), qa.shape[1], qb.shape[1])


def subspace_angle(x_hat: np.ndarray, x_true: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Largest principal angle in degrees."""
    return principal_angles(x_hat, x_true, rank_tol).largest


def photometric_scores(x_hat: np.ndarray, x_true: np.ndarray, y: np.ndarray,
                       rank_tol: float = DEFAULT_RANK_TOL) -> Tuple[float, float]:
    """Errors of X_hat relative to simply using Y: (relative_mse, relative_angle)."""
    x_hat, x_true = _pair(x_hat, x_true)
    ref_mse, ref_angle = _observation_baseline(x_true, y, rank_tol)
    rel_mse = float(np.sum(np.square(x_true - x_hat))) / ref_mse
    return rel_mse, subspace_angle(x_hat, x_true, rank_tol) / ref_angle


def _observation_baseline(x_true: np.ndarray, y: np.ndarray, rank_tol: float) -> Tuple[float, float]:
    x_true, y = _pair(x_true, y)
    ref = float(np.sum(np.square(x_true - y)))
    if ref == 0.0:
        raise_rpca_error(ErrorCode.ZERO_REFERENCE, message="X_true equals Y")
    angle = subspace_angle(y, x_true, rank_tol)
    if angle == 0.0:
        raise_rpca_error(ErrorCode.ZERO_REFERENCE, message="Y spans the true subspace exactly")
    return ref, angle


def support_scores(s_hat: np.ndarray, s_true: np.ndarray, zero_tol: Optional[float] = None) -> Tuple[float, float]:
    """Precision and recall of supp(S_hat) against supp(S_true).

    An empty estimated support has precision 1 and an empty true support
    has recall 1.
    """
    s_hat, s_true = _pair(s_hat, s_true)
    if zero_tol is None:
        zero_tol = 1e-6 * float(np.max(np.abs(s_true))) if s_true.size else 0.0
    est = np.abs(s_hat) > zero_tol
    true = np.abs(s_true) > zero_tol
    hits = int(np.count_nonzero(est & true))
    n_est = int(np.count_nonzero(est))
    n_true = int(np.count_nonzero(true))
    precision = hits / n_est if n_est else 1.0
    recall = hits / n_true if n_true else 1.0
    return precision, recall


def score_trial(decomposition: Decomposition, x_true: np.ndarray, s_true: np.ndarray,
                y: Optional[np.ndarray] = None, rank_tol: float = DEFAULT_RANK_TOL) -> TrialScore:
    """Headline scores for one solver run.

    An all-zero estimate shares no direction with the truth and scores 90
    degrees instead of raising.
    """
    x_hat = decomposition.x_hat
    mse = normalized_mse(x_hat, x_true)
    try:
        cmp = principal_angles(x_hat, x_true, rank_tol)
        largest, mean, deficiency = cmp.largest, cmp.mean, cmp.deficiency
    except ExceptionNode as exc:
        if exc.location != "X_hat":
            raise
        largest = mean = 90.0
        deficiency = principal_angles(x_true, x_true, rank_tol).rank_true
    precision, recall = support_scores(decomposition.s_hat, s_true)
    rel_mse = rel_angle = None
    if y is not None:
        ref_mse, ref_angle = _observation_baseline(x_true, y, rank_tol)
        rel_mse = float(np.sum(np.square(np.asarray(x_true) - x_hat))) / ref_mse
        rel_angle = largest / ref_angle
    return TrialScore(
        mse_normalized=mse,
        angle_degrees=largest,
        support_precision=precision,
        support_recall=recall,
        mean_angle_degrees=mean,
        rank_deficiency=deficiency,
        relative_mse=rel_mse,
        relative_angle=rel_angle,
    )


__all__ = [
    "DEFAULT_RANK_TOL",
    "SUCCESS_ANGLE_DEGREES",
    "SubspaceComparison",
    "TrialScore",
    "normalized_mse",
    "principal_angles",
    "subspace_angle",
    "photometric_scores",
    "support_scores",
    "score_trial",
]
