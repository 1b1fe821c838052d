"""Seeded synthetic RPCA instances.

Every generator is a pure function of its spec. Random numbers come from
independent Philox streams keyed by (seed, stream id), so the low-rank part
of an instance does not change when the corruption settings do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ebrpca.domain.exceptions import ErrorCode, raise_rpca_error
from ebrpca.domain.models import DEFAULT_LAMBDA, DenseMatrix, RpcaProblem, dense_matrix

# stream ids
_LOW_RANK = 0
_SPARSE = 1
_LIGHTS = 2
_SURFACE = 3
_ALBEDO = 4
_SPECULAR = 5

# smooth height field used for the photometric normals
_BUMPS = 12
_BUMP_WIDTH = 0.15
_BUMP_HEIGHT = 0.12
_MAX_SURFACE_ROUNDS = 100


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream) pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def _check_seed(seed: int) -> None:
    if int(seed) < 0:
        raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="seed must be >= 0", value=seed)


@dataclass(frozen=True)
class SynthSpec:
    m: int
    n: int
    rank: int
    corruption_prob: float = 0.2
    corruption_range: float = 10.0
    seed: int = 0
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self) -> None:
        if not (1 <= self.rank <= self.m <= self.n):
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="need 1 <= rank <= m <= n",
                             value=(self.rank, self.m, self.n))
        if not 0.0 <= self.corruption_prob <= 1.0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="corruption_prob must lie in [0, 1]",
                             value=self.corruption_prob)
        if not self.corruption_range > 0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="corruption_range must be positive",
                             value=self.corruption_range)
        _check_seed(self.seed)


@dataclass(frozen=True)
class PhotoSpec:
    """Lambertian photometric-stereo proxy: m lights, n pixels.

    `lights`, when given, is a 3 x m matrix of lighting directions (columns
    are normalized); otherwise m directions are drawn uniformly from the
    spherical cap within `max_light_polar_deg` of the viewing axis.
    """

    num_lights: int = 20
    num_pixels: int = 5000
    corruption_prob: float = 0.05
    seed: int = 0
    lam: float = DEFAULT_LAMBDA
    lights: Optional[Tuple[Tuple[float, ...], ...]] = None
    specular_scale: float = 1.0
    shadow_limit: float = 0.1
    max_light_polar_deg: float = 60.0

    def __post_init__(self) -> None:
        if self.num_lights < 3:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="at least three lights are needed",
                             value=self.num_lights)
        if self.num_pixels < 1:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="num_pixels must be >= 1", value=self.num_pixels)
        if not 0.0 <= self.corruption_prob <= 1.0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="corruption_prob must lie in [0, 1]",
                             value=self.corruption_prob)
        if not 0.0 <= self.shadow_limit <= 1.0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="shadow_limit must lie in [0, 1]",
                             value=self.shadow_limit)
        if not 0.0 < self.max_light_polar_deg <= 90.0:
            raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="max_light_polar_deg must lie in (0, 90]",
                             value=self.max_light_polar_deg)
        if self.lights is not None:
            lights = np.asarray(self.lights, dtype=np.float64)
            if lights.shape != (3, self.num_lights):
                raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="lights must be 3 x num_lights",
                                 value=lights.shape)
            if np.any(np.linalg.norm(lights, axis=0) == 0):
                raise_rpca_error(ErrorCode.INVALID_OPTIONS, message="zero lighting direction")
        _check_seed(self.seed)


class SyntheticInstance(NamedTuple):
    problem: RpcaProblem
    x_true: DenseMatrix
    s_true: DenseMatrix


@dataclass(frozen=True)
class PhotometricInstance:
    """Y = X + S with X = L' N diag(albedo) (rank 3).

    S holds -X on attached shadows (so Y is 0 there) plus positive
    specular spikes.
    """

    problem: RpcaProblem
    x_true: DenseMatrix
    s_true: DenseMatrix
    lights: np.ndarray
    normals: np.ndarray
    albedo: np.ndarray
    shadow_mask: np.ndarray
    specular_mask: np.ndarray

    @property
    def corruption_mask(self) -> np.ndarray:
        return self.shadow_mask | self.specular_mask


def gen_low_rank(spec: SynthSpec) -> DenseMatrix:
    """Gaussian m x n draw truncated to its `rank` largest singular values."""
    draw = rng_for(spec.seed, _LOW_RANK).standard_normal((spec.m, spec.n))
    u, sv, vt = np.linalg.svd(draw, full_matrices=False)
    r = spec.rank
    return dense_matrix((u[:, :r] * sv[:r]) @ vt[:r], name="X")


def gen_sparse(spec: SynthSpec) -> DenseMatrix:
    """Entries nonzero with probability rho, values Uniform[-range, range]."""
    rng = rng_for(spec.seed, _SPARSE)
    support = rng.random((spec.m, spec.n)) < spec.corruption_prob
    values = rng.uniform(-spec.corruption_range, spec.corruption_range, (spec.m, spec.n))
    return dense_matrix(np.where(support, values, 0.0), name="S")


def gen_problem(spec: SynthSpec) -> SyntheticInstance:
    x = gen_low_rank(spec)
    s = gen_sparse(spec)
    return SyntheticInstance(RpcaProblem(x + s, spec.lam), x, s)


def _lights(spec: PhotoSpec) -> np.ndarray:
    if spec.lights is not None:
        lights = np.asarray(spec.lights, dtype=np.float64)
        return lights / np.linalg.norm(lights, axis=0)
    rng = rng_for(spec.seed, _LIGHTS)
    cos_max = math.cos(math.radians(spec.max_light_polar_deg))
    cos_theta = rng.uniform(cos_max, 1.0, spec.num_lights)
    sin_theta = np.sqrt(1.0 - cos_theta ** 2)
    phi = rng.uniform(0.0, 2.0 * math.pi, spec.num_lights)
    return np.vstack([sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta])


def _surface_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Normals of a random sum-of-Gaussians height field at random points."""
    centers = rng.uniform(0.0, 1.0, (_BUMPS, 2))
    heights = rng.uniform(-_BUMP_HEIGHT, _BUMP_HEIGHT, _BUMPS)
    points = rng.uniform(0.0, 1.0, (count, 2))
    delta = points[:, None, :] - centers[None, :, :]
    weight = heights * np.exp(-np.sum(delta ** 2, axis=2) / (2.0 * _BUMP_WIDTH ** 2))
    grad = -np.einsum("pk,pkd->pd", weight, delta) / _BUMP_WIDTH ** 2
    normals = np.column_stack([-grad[:, 0], -grad[:, 1], np.ones(count)])
    return (normals / np.linalg.norm(normals, axis=1, keepdims=True)).T


def gen_photometric(spec: PhotoSpec) -> PhotometricInstance:
    """Lambertian proxy instance; pixels shadowed under more than
    `shadow_limit` of the lights are discarded and redrawn."""
    lights = _lights(spec)
    m, n = spec.num_lights, spec.num_pixels
    surface = rng_for(spec.seed, _SURFACE)
    kept = []
    have = 0
    for _ in range(_MAX_SURFACE_ROUNDS):
        candidates = _surface_normals(surface, max(2 * (n - have), 64))
        shadow_frac = np.mean(lights.T @ candidates < 0.0, axis=0)
        good = candidates[:, shadow_frac <= spec.shadow_limit]
        kept.append(good)
        have += good.shape[1]
        if have >= n:
            break
    else:
        raise_rpca_error(ErrorCode.NUMERICAL_DEGENERACY,
                         message="too few pixels pass the shadow limit for these lights", value=spec.shadow_limit)
    normals = np.hstack(kept)[:, :n]

    albedo = rng_for(spec.seed, _ALBEDO).uniform(0.5, 1.0, n)
    x = lights.T @ (normals * albedo)
    shadow = x < 0.0

    rng = rng_for(spec.seed, _SPECULAR)
    specular = (rng.random((m, n)) < spec.corruption_prob) & ~shadow
    spikes = rng.uniform(0.5, 1.5, (m, n)) * spec.specular_scale
    s = np.where(shadow, -x, 0.0) + np.where(specular, spikes, 0.0)

    x = dense_matrix(x, name="X")
    s = dense_matrix(s, name="S")
    return PhotometricInstance(
        problem=RpcaProblem(x + s, spec.lam),
        x_true=x,
        s_true=s,
        lights=lights,
        normals=normals,
        albedo=albedo,
        shadow_mask=shadow,
        specular_mask=specular,
    )


def estimate_normals(x: np.ndarray, lights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares photometric stereo: unit normals (3 x n) and albedo (n,)."""
    x = np.asarray(x, dtype=np.float64)
    lights = np.asarray(lights, dtype=np.float64)
    if lights.ndim != 2 or lights.shape[0] != 3 or x.ndim != 2 or x.shape[0] != lights.shape[1]:
        raise_rpca_error(ErrorCode.SHAPE_MISMATCH, message="need X (m x n) and lights (3 x m)",
                         value=(x.shape, lights.shape))
    scaled = np.linalg.lstsq(lights.T, x, rcond=None)[0]
    albedo = np.linalg.norm(scaled, axis=0)
    safe = np.where(albedo > 0.0, albedo, 1.0)
    return scaled / safe, albedo


__all__ = [
    "SynthSpec",
    "PhotoSpec",
    "SyntheticInstance",
    "PhotometricInstance",
    "rng_for",
    "gen_low_rank",
    "gen_sparse",
    "gen_problem",
    "gen_photometric",
    "estimate_normals",
]
