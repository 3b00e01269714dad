"""Numerical checks of the Lipschitz bounds for persistence surfaces and images.

Every check compares an observed distance between two surfaces or images
against ``constant * W1(B, B')`` and records the ratio. The bounds are
theorems, so a ratio above one means a bug somewhere in the pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.special import erf

from .core import ImageSpec, ParameterError, PersistenceDiagram, as_diagram, transform_to_birth_persistence
from .image import (
    ConstantWeight,
    PiecewiseLinearWeight,
    TabulatedWeight,
    WeightingFunction,
    compute_image,
    resolve_weight,
)
from .metrics import wasserstein
from .validation import check_positive

SQRT10 = math.sqrt(10.0)
SQRT5 = math.sqrt(5.0)

# tolerance for floating-point noise in ratio comparisons
_RATIO_SLACK = 1e-9
_NOISE_FLOOR = 1e-12


@dataclass
class StabilityReport:
    """Outcome of one or more inequality checks.

    ``bounds`` maps an inequality name to its worst ratio, violation count
    and the constant multiplying W1.
    """

    pairs_tested: int = 0
    max_ratio: float = 0.0
    constant_used: float = float("nan")
    violations: int = 0
    seed: Optional[int] = None
    bounds: Dict[str, dict] = field(default_factory=dict)

    def record(self, name: str, lhs: float, constant: float, w1: float) -> float:
        ratio = _ratio(lhs, constant * w1)
        entry = self.bounds.setdefault(
            name, {"max_ratio": 0.0, "violations": 0, "constant": constant, "checks": 0}
        )
        entry["checks"] += 1
        violated = ratio > 1.0 + _RATIO_SLACK
        if violated:
            entry["violations"] += 1
            self.violations += 1
        if ratio >= entry["max_ratio"]:
            entry["max_ratio"] = ratio
            entry["constant"] = constant
        if ratio >= self.max_ratio:
            self.max_ratio = ratio
            self.constant_used = constant
        return ratio

    def merge(self, other: "StabilityReport") -> "StabilityReport":
        out = StabilityReport(
            pairs_tested=self.pairs_tested + other.pairs_tested,
            violations=self.violations + other.violations,
            seed=self.seed if self.seed is not None else other.seed,
        )
        for rep in (self, other):
            if rep.max_ratio >= out.max_ratio:
                out.max_ratio = rep.max_ratio
                out.constant_used = rep.constant_used
            for name, e in rep.bounds.items():
                cur = out.bounds.setdefault(name, {"max_ratio": 0.0, "violations": 0, "constant": e["constant"], "checks": 0})
                cur["checks"] += e["checks"]
                cur["violations"] += e["violations"]
                if e["max_ratio"] >= cur["max_ratio"]:
                    cur["max_ratio"] = e["max_ratio"]
                    cur["constant"] = e["constant"]
        return out

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "pairs_tested": self.pairs_tested,
            "max_ratio": self.max_ratio,
            "constant_used": self.constant_used,
            "violations": self.violations,
            "seed": self.seed,
            "bounds": self.bounds,
        }


def _ratio(lhs: float, rhs: float) -> float:
    # identical inputs can leave rounding residue of order 1e-16
    if lhs <= _NOISE_FLOOR:
        return 0.0
    if rhs <= 0.0:
        return math.inf
    return lhs / rhs


def weighting_constants(weight: WeightingFunction):
    """``(sup |f|, sup |grad f|)`` for an admissible weighting function."""
    if isinstance(weight, PiecewiseLinearWeight):
        return 1.0, 1.0 / weight.b
    if isinstance(weight, TabulatedWeight):
        v = weight.values
        hb = np.diff(weight.births)[:, None]
        hp = np.diff(weight.persistences)[None, :]
        # bilinear cells: each partial derivative is extremal on a cell edge
        db = np.abs(np.diff(v, axis=0)) / hb
        dp = np.abs(np.diff(v, axis=1)) / hp
        db_cell = np.maximum(db[:, :-1], db[:, 1:])
        dp_cell = np.maximum(dp[:-1, :], dp[1:, :])
        grad = float(np.sqrt(db_cell ** 2 + dp_cell ** 2).max())
        return float(v.max()), grad
    if isinstance(weight, ConstantWeight) or not getattr(weight, "zero_on_axis", False):
        raise ParameterError("weighting function is not zero on the persistence-zero axis; the bounds do not apply")
    raise ParameterError(f"no analytic constants known for {weight!r}")


def kernel_constants(sigma: float):
    """``(sup g, sup |grad g|)`` for the normalized isotropic 2-D Gaussian."""
    sigma = check_positive(sigma, "sigma")
    sup = 1.0 / (2.0 * math.pi * sigma ** 2)
    # |grad g| = r / sigma^2 * g(r), maximal at r = sigma
    grad = 1.0 / (2.0 * math.pi * sigma ** 3 * math.sqrt(math.e))
    return sup, grad


def general_constant(weight: WeightingFunction, sigma: float) -> float:
    f_sup, f_grad = weighting_constants(weight)
    g_sup, g_grad = kernel_constants(sigma)
    return SQRT10 * (f_sup * g_grad + g_sup * f_grad)


def gaussian_constant(weight: WeightingFunction, sigma: float) -> float:
    f_sup, f_grad = weighting_constants(weight)
    return SQRT5 * f_grad + math.sqrt(10.0 / math.pi) * f_sup / sigma


def _weighted_points(diagram: PersistenceDiagram, weight) -> tuple:
    bp = transform_to_birth_persistence(diagram)
    w = np.asarray(weight(bp[:, 0], bp[:, 1]), dtype=np.float64).reshape(-1) if len(bp) else np.empty(0)
    return bp, w


class _SurfaceDifference:
    """rho_B - rho_B' as a vectorized function of (m, 2) points."""

    def __init__(self, B, Bp, weight, sigma):
        bp1, w1 = _weighted_points(B, weight)
        bp2, w2 = _weighted_points(Bp, weight)
        centers = np.concatenate([bp1, bp2]).reshape(-1, 2)
        coef = np.concatenate([w1, -w2])
        # merge coinciding centres so shared points cancel exactly
        self.centers, inverse = np.unique(centers, axis=0, return_inverse=True)
        self.coef = np.zeros(len(self.centers))
        np.add.at(self.coef, inverse.reshape(-1), coef)
        self.mass = float(np.sum(np.abs(self.coef)))
        self.sigma = sigma

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64).reshape(-1, 2)
        s2 = 2.0 * self.sigma ** 2
        out = np.zeros(len(z))
        # chunk to bound memory on fine grids
        for start in range(0, len(z), 65536):
            zz = z[start:start + 65536]
            d2 = (zz[:, None, 0] - self.centers[None, :, 0]) ** 2 + (zz[:, None, 1] - self.centers[None, :, 1]) ** 2
            out[start:start + 65536] = np.exp(-d2 / s2) @ self.coef
        return out / (math.pi * s2)

    def box(self, pad: float):
        lo = self.centers.min(axis=0) - pad * self.sigma
        hi = self.centers.max(axis=0) + pad * self.sigma
        return lo, hi


def surface_sup_difference(B, Bp, weight, sigma: float, probes: int = 3) -> float:
    """Estimate ``sup |rho_B - rho_B'|`` by a sigma/8 grid plus local refinement."""
    h = _SurfaceDifference(B, Bp, weight, sigma)
    if len(h.centers) == 0 or not np.any(h.coef):
        return 0.0
    lo, hi = h.box(6.0)
    step = sigma / 8.0
    xs = np.arange(lo[0], hi[0] + step, step)
    ys = np.arange(lo[1], hi[1] + step, step)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = np.abs(h(pts))
    best = float(vals.max())
    for idx in np.argsort(vals)[::-1][:max(probes, 0)]:
        res = optimize.minimize(
            lambda z: -abs(float(h(z)[0])), pts[idx], method="Nelder-Mead",
            options={"xatol": sigma * 1e-6, "fatol": 1e-14, "maxiter": 400},
        )
        best = max(best, -float(res.fun))
    return best


def surface_l1_difference(B, Bp, weight, sigma: float, pad: float = 6.0, per_sigma: int = 16) -> float:
    """Estimate ``||rho_B - rho_B'||_1``: midpoint rule on the padded box plus a tail bound."""
    h = _SurfaceDifference(B, Bp, weight, sigma)
    if len(h.centers) == 0 or not np.any(h.coef):
        return 0.0
    lo, hi = h.box(pad)
    step = sigma / per_sigma
    nx = int(math.ceil((hi[0] - lo[0]) / step))
    ny = int(math.ceil((hi[1] - lo[1]) / step))
    xs = lo[0] + (np.arange(nx) + 0.5) * step
    ys = lo[1] + (np.arange(ny) + 0.5) * step
    total = 0.0
    for y in np.array_split(ys, max(1, ny // 64)):
        gx, gy = np.meshgrid(xs, y, indexing="xy")
        total += float(np.abs(h(np.column_stack([gx.ravel(), gy.ravel()]))).sum())
    # every Gaussian keeps at least (1 - 2 * tail)^2 of its mass inside the box
    tail = math.erfc(pad / math.sqrt(2.0))
    return total * step * step + h.mass * (1.0 - (1.0 - tail) ** 2)


def _w1(B, Bp) -> float:
    return wasserstein(B, Bp, 1.0)[0]


def check_surface_stability_general(B, Bp, weight, sigma: float, probes: int = 3) -> StabilityReport:
    """Sup-norm surface bound with the sqrt(10) constant."""
    B, Bp = as_diagram(B), as_diagram(Bp)
    constant = general_constant(weight, sigma)
    rep = StabilityReport(pairs_tested=1)
    lhs = surface_sup_difference(B, Bp, weight, sigma, probes)
    rep.record("surface_sup", lhs, constant, _w1(B, Bp))
    return rep


def _images(B, Bp, spec: ImageSpec, weight):
    if spec.one_dimensional:
        raise ParameterError("stability checks need a 2-D image spec")
    return compute_image(B, spec, weight).pixels, compute_image(Bp, spec, weight).pixels


def check_image_stability_general(B, Bp, spec: ImageSpec, weight=None) -> StabilityReport:
    """L-inf, L1 and L2 image bounds using max pixel area, total area and pixel count."""
    B, Bp = as_diagram(B), as_diagram(Bp)
    weight = resolve_weight(weight, spec.weight_ceiling_b)
    base = general_constant(weight, spec.sigma)
    I1, I2 = _images(B, Bp, spec, weight)
    diff = (I1 - I2).ravel()
    w1 = _w1(B, Bp)
    rep = StabilityReport(pairs_tested=1)
    A, A_total, n = spec.pixel_area, spec.total_area, spec.n_pixels
    rep.record("image_linf", float(np.abs(diff).max()), A * base, w1)
    rep.record("image_l1", float(np.abs(diff).sum()), A_total * base, w1)
    rep.record("image_l2", float(np.sqrt(diff @ diff)), math.sqrt(n) * A * base, w1)
    return rep


def check_gaussian_stability(B, Bp, spec: ImageSpec, weight=None) -> StabilityReport:
    """L1 surface bound and the three image bounds for Gaussian bumps."""
    B, Bp = as_diagram(B), as_diagram(Bp)
    weight = resolve_weight(weight, spec.weight_ceiling_b)
    constant = gaussian_constant(weight, spec.sigma)
    I1, I2 = _images(B, Bp, spec, weight)
    diff = (I1 - I2).ravel()
    w1 = _w1(B, Bp)
    rep = StabilityReport(pairs_tested=1)
    rep.record("gaussian_surface_l1", surface_l1_difference(B, Bp, weight, spec.sigma), constant, w1)
    rep.record("gaussian_image_l1", float(np.abs(diff).sum()), constant, w1)
    rep.record("gaussian_image_l2", float(np.sqrt(diff @ diff)), constant, w1)
    rep.record("gaussian_image_linf", float(np.abs(diff).max()), constant, w1)
    return rep


def erf_lemma_F(a: float, b: float, sigma: float, z: float) -> float:
    """Closed form of ``||a g_u - b g_v||_1`` for 1-D normalized Gaussians, with ``z = v - u``."""
    a = check_positive(a, "a")
    b = check_positive(b, "b")
    sigma = check_positive(sigma, "sigma")
    if z == 0:
        return abs(a - b)
    log_ratio = 2.0 * sigma ** 2 * math.log(a / b)
    denom = z * sigma * 2.0 * math.sqrt(2.0)
    return abs(a * erf((z * z + log_ratio) / denom) - b * erf((-z * z + log_ratio) / denom))


def erf_lemma_bound(a: float, b: float, sigma: float, z: float) -> float:
    """Linear upper bound ``|a - b| + sqrt(2/pi) min(a, b) |z| / sigma``."""
    return abs(a - b) + math.sqrt(2.0 / math.pi) * min(a, b) * abs(z) / sigma


def gaussian_l1_1d(a: float, b: float, sigma: float, u: float, v: float) -> float:
    """``||a g_u - b g_v||_1`` by adaptive quadrature, split at the crossing point."""
    def integrand(x):
        ga = math.exp(-((x - u) ** 2) / (2 * sigma ** 2))
        gb = math.exp(-((x - v) ** 2) / (2 * sigma ** 2))
        return abs(a * ga - b * gb) / (sigma * math.sqrt(2 * math.pi))

    lo, hi = min(u, v) - 12 * sigma, max(u, v) + 12 * sigma
    breaks = []
    if u != v:
        cross = (v * v - u * u + 2 * sigma ** 2 * math.log(a / b)) / (2 * (v - u))
        if lo < cross < hi:
            breaks.append(cross)
    val, _ = integrate.quad(integrand, lo, hi, points=breaks or None, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def check_erf_lemma(a: float, b: float, sigma: float, u: float, v: float) -> dict:
    """Closed form vs quadrature, and the linear bound, for one instance."""
    F = erf_lemma_F(a, b, sigma, v - u)
    quad = gaussian_l1_1d(a, b, sigma, u, v)
    bound = erf_lemma_bound(a, b, sigma, v - u)
    return {"F": F, "quadrature": quad, "abs_error": abs(F - quad), "bound": bound,
            "bound_holds": F <= bound * (1 + 1e-12) + 1e-15}


def weighted_gaussian_l1_2d(fu: float, fv: float, u, v, sigma: float, per_sigma: int = 24) -> float:
    """``||fu g_u - fv g_v||_1`` for 2-D Gaussians by midpoint quadrature on a padded box."""
    u, v = np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)
    lo = np.minimum(u, v) - 8 * sigma
    hi = np.maximum(u, v) + 8 * sigma
    step = sigma / per_sigma
    xs = np.arange(lo[0] + step / 2, hi[0], step)
    ys = np.arange(lo[1] + step / 2, hi[1], step)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    s2 = 2 * sigma ** 2
    gu = np.exp(-((gx - u[0]) ** 2 + (gy - u[1]) ** 2) / s2)
    gv = np.exp(-((gx - v[0]) ** 2 + (gy - v[1]) ** 2) / s2)
    return float(np.abs(fu * gu - fv * gv).sum() * step * step / (math.pi * s2))


def weighted_gaussian_l1_bound(fu: float, fv: float, u, v, sigma: float, grad_f: float) -> float:
    dist = float(np.linalg.norm(np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64)))
    return (grad_f + math.sqrt(2.0 / math.pi) * min(fu, fv) / sigma) * dist


def random_diagram(rng: np.random.Generator, max_points: int = 10, hom_dim: int = 1) -> PersistenceDiagram:
    """Births uniform in [0, 1], persistence uniform in (0, 1], 1..max_points points."""
    k = int(rng.integers(1, max_points + 1))
    births = rng.random(k)
    pers = 1.0 - rng.random(k)
    return PersistenceDiagram(np.column_stack([births, births + pers]), hom_dim)


def perturb_diagram(rng: np.random.Generator, diagram: PersistenceDiagram, scale: float) -> PersistenceDiagram:
    """Jitter every point by N(0, scale^2) per coordinate, keeping death >= birth."""
    pts = diagram.points + rng.normal(0.0, scale, size=diagram.points.shape)
    pts[:, 1] = np.maximum(pts[:, 1], pts[:, 0])
    return PersistenceDiagram(pts, diagram.hom_dim)


def verify_stability(n_pairs: int = 100, sigma: float = 0.1, b: float = 1.0, seed: int = 0,
                     resolution=(20, 20), max_points: int = 10) -> StabilityReport:
    """Run every surface and image bound on ``n_pairs`` seeded random diagram pairs."""
    rng = np.random.default_rng(seed)
    weight = PiecewiseLinearWeight(b)
    pad = 3.0 * sigma
    spec = ImageSpec(tuple(resolution), sigma, b, (0.0, 1.0 + pad, 0.0, 1.0 + pad))
    report = StabilityReport(seed=seed)
    for k in range(n_pairs):
        B = random_diagram(rng, max_points)
        # odd pairs are small perturbations, where the bounds are least slack
        Bp = perturb_diagram(rng, B, scale=0.02) if k % 2 else random_diagram(rng, max_points)
        pair = check_surface_stability_general(B, Bp, weight, sigma)
        pair = pair.merge(check_image_stability_general(B, Bp, spec, weight))
        pair = pair.merge(check_gaussian_stability(B, Bp, spec, weight))
        pair.pairs_tested = 1
        report = report.merge(pair)
    report.seed = seed
    return report
