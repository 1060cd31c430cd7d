"""Synthetic minority oversampling: SMOTE, Geometric-SMOTE and ADASYN.

Every sampler works one class at a time against the matrix it is given;
neighbors are always searched among the original rows, never among
freshly generated ones.

Randomness: sample ``s`` of class ``c`` draws from its own Philox stream,
keyed by ``(seed, c)`` with the counter starting at block ``(0, s)``. The
synthetic rows therefore do not depend on generation order.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from imbr.apportion import largest_remainder
from imbr.errors import (
    ClassIsMajority,
    ClassTooSmall,
    ConfigError,
    NoMajorityAvailable,
    UnknownClass,
)
from imbr.knn import FeatureMatrix, knn

ALGORITHMS = ("smote", "gsmote", "adasyn")
DISPLAY_NAMES = {"smote": "SMOTE", "gsmote": "Geometric-SMOTE", "adasyn": "ADASYN"}
SELECTIONS = ("minority", "majority", "combined")
CENTER_SELECTIONS = ("round_robin", "random")

_ALIASES = {
    "smote": "smote",
    "gsmote": "gsmote",
    "g-smote": "gsmote",
    "geometric-smote": "gsmote",
    "geometric_smote": "gsmote",
    "adasyn": "adasyn",
}


def canonical_algorithm(name):
    try:
        return _ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown oversampling algorithm {name!r}; choose from {ALGORITHMS}") from None


@dataclass(frozen=True)
class Auto:
    """Raise every class to the majority count."""


@dataclass(frozen=True)
class Explicit:
    """Absolute number of synthetic rows per class id."""

    counts: dict

    def __post_init__(self):
        counts = {int(c): int(n) for c, n in dict(self.counts).items()}
        if any(n < 0 for n in counts.values()):
            raise ConfigError("explicit synthetic counts must be >= 0")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class ResampleConfig:
    algorithm: str = "smote"
    k: int = 5
    strategy: object = field(default_factory=Auto)
    seed: int = 0
    gsmote_truncation: float = 1.0
    gsmote_deformation: float = 0.0
    gsmote_selection: str = "combined"
    adasyn_beta: float = 1.0
    center_selection: str = "round_robin"

    def __post_init__(self):
        object.__setattr__(self, "algorithm", canonical_algorithm(self.algorithm))
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be an integer >= 1, got {self.k}")
        if not -1.0 <= self.gsmote_truncation <= 1.0:
            raise ConfigError(f"gsmote_truncation must lie in [-1, 1], got {self.gsmote_truncation}")
        if not 0.0 <= self.gsmote_deformation <= 1.0:
            raise ConfigError(f"gsmote_deformation must lie in [0, 1], got {self.gsmote_deformation}")
        if self.gsmote_selection not in SELECTIONS:
            raise ConfigError(f"gsmote_selection must be one of {SELECTIONS}")
        if not 0.0 < self.adasyn_beta <= 1.0:
            raise ConfigError(f"adasyn_beta must lie in (0, 1], got {self.adasyn_beta}")
        if self.center_selection not in CENTER_SELECTIONS:
            raise ConfigError(f"center_selection must be one of {CENTER_SELECTIONS}")
        if not isinstance(self.strategy, (Auto, Explicit)):
            raise ConfigError("strategy must be Auto() or Explicit({...})")

    def to_dict(self):
        d = {
            "algorithm": self.algorithm,
            "k": self.k,
            "seed": self.seed,
            "gsmote_truncation": self.gsmote_truncation,
            "gsmote_deformation": self.gsmote_deformation,
            "gsmote_selection": self.gsmote_selection,
            "adasyn_beta": self.adasyn_beta,
            "center_selection": self.center_selection,
        }
        if isinstance(self.strategy, Explicit):
            d["strategy"] = {str(c): n for c, n in sorted(self.strategy.counts.items())}
        else:
            d["strategy"] = "auto"
        return d


@dataclass(frozen=True)
class SyntheticBatch:
    """Generated rows for one class plus a provenance record per row.

    ``centers`` and ``neighbors`` index rows of the matrix the batch was
    generated from. ``draws`` holds the interpolation fraction (SMOTE,
    ADASYN) or the radial fraction (Geometric-SMOTE).
    """

    rows: np.ndarray
    class_id: int
    centers: np.ndarray
    neighbors: np.ndarray
    draws: np.ndarray
    algorithm: str = "smote"

    def __len__(self):
        return self.rows.shape[0]

    @property
    def provenance(self):
        return list(zip(self.centers.tolist(), self.neighbors.tolist(), self.draws.tolist()))


def _empty_batch(dim, class_id, algorithm):
    return SyntheticBatch(
        np.empty((0, dim)),
        int(class_id),
        np.empty(0, np.int64),
        np.empty(0, np.int64),
        np.empty(0),
        algorithm,
    )


def _class_key(seed, class_id):
    ss = np.random.SeedSequence([int(seed) % (1 << 64), int(class_id)])
    return ss.generate_state(2, np.uint64)


def sample_rng(seed, class_id, sample_index):
    """Generator for one synthetic sample; independent of all other samples."""
    return np.random.Generator(np.random.Philox(key=_class_key(seed, class_id), counter=[0, int(sample_index), 0, 0]))


def _draws(seed, class_id, n, dim=0):
    """Three uniforms per sample, plus ``dim`` standard normals when asked."""
    key = _class_key(seed, class_id)
    uniforms = np.empty((n, 3))
    normals = np.empty((n, dim))
    for s in range(n):
        rng = np.random.Generator(np.random.Philox(key=key, counter=[0, s, 0, 0]))
        uniforms[s] = rng.random(3)
        if dim:
            normals[s] = rng.standard_normal(dim)
    return uniforms, normals


def _members(matrix, class_id):
    return np.flatnonzero(matrix.labels == class_id)


def _effective_k(k, class_size, class_id):
    if k > class_size - 1:
        warnings.warn(
            f"class {class_id} has {class_size} members; clamping k={k} to {class_size - 1}",
            stacklevel=3,
        )
        return class_size - 1
    return k


def _pick_centers(uniform_col, n_members, center_selection):
    n = uniform_col.shape[0]
    if center_selection == "random":
        return np.minimum((uniform_col * n_members).astype(np.int64), n_members - 1)
    return np.arange(n, dtype=np.int64) % n_members


def _pick(uniform_col, width):
    return np.minimum((uniform_col * width).astype(np.int64), width - 1)


def plan_targets(class_counts, strategy):
    """Number of synthetic rows to generate for each class.

    ``class_counts`` maps class id to its current count (a sequence is
    read as ids ``0..C-1``).
    """
    if not isinstance(class_counts, dict):
        class_counts = dict(enumerate(class_counts))
    counts = {int(c): int(n) for c, n in class_counts.items()}
    if not counts or max(counts.values()) < 1:
        raise ConfigError("at least one class must be non-empty")
    if isinstance(strategy, Explicit):
        unknown = sorted(set(strategy.counts) - set(counts))
        if unknown:
            raise UnknownClass(f"explicit targets name unknown classes {unknown}")
        return {c: strategy.counts.get(c, 0) for c in counts}
    top = max(counts.values())
    return {c: top - n for c, n in counts.items()}


def smote(matrix, class_id, n_new, k=5, seed=0, center_selection="round_robin"):
    """Interpolate ``n_new`` points between class members and same-class neighbors."""
    members = _members(matrix, class_id)
    if n_new == 0:
        return _empty_batch(matrix.dim, class_id, "smote")
    if members.size < 2:
        raise ClassTooSmall(f"SMOTE needs at least 2 members in class {class_id}, found {members.size}")
    k_eff = _effective_k(k, members.size, class_id)
    table = knn(matrix, members, k_eff, candidate_filter=[class_id])
    u, _ = _draws(seed, class_id, n_new)
    local = _pick_centers(u[:, 2], members.size, center_selection)
    centers = members[local]
    neighbors = table.indices[local, _pick(u[:, 0], k_eff)]
    gaps = u[:, 1]
    x = matrix.rows
    rows = x[centers] + gaps[:, None] * (x[neighbors] - x[centers])
    return SyntheticBatch(rows, int(class_id), centers, neighbors, gaps, "smote")


def geometric_smote(matrix, class_id, n_new, config=None, seed=None):
    """Sample ``n_new`` points inside truncated, deformed hyper-spheres.

    Each sphere is centered on a class member, with radius set by the
    selected surface point. Truncation reflects draws into a half-ball
    (``truncation=1`` keeps only the half facing the surface point);
    deformation flattens the ball towards the hyperplane orthogonal to the
    center-to-surface direction.
    """
    config = config or ResampleConfig(algorithm="gsmote")
    seed = config.seed if seed is None else seed
    members = _members(matrix, class_id)
    if members.size == 0:
        raise ClassTooSmall(f"class {class_id} is empty")
    if n_new == 0:
        return _empty_batch(matrix.dim, class_id, "gsmote")
    selection = config.gsmote_selection
    has_others = bool(np.any(matrix.labels != class_id))
    if selection == "minority" and members.size < 2:
        raise ClassTooSmall(f"minority selection needs at least 2 members in class {class_id}")
    if selection in ("majority", "combined") and not has_others:
        raise NoMajorityAvailable(f"{selection} selection needs instances outside class {class_id}")
    if selection == "combined" and members.size < 2:
        warnings.warn(f"class {class_id} has a single member; using majority selection", stacklevel=2)
        selection = "majority"

    u, v = _draws(seed, class_id, n_new, matrix.dim)
    local = _pick_centers(u[:, 2], members.size, config.center_selection)
    centers = members[local]
    x = matrix.rows

    if selection in ("minority", "combined"):
        k_eff = _effective_k(config.k, members.size, class_id)
        pos = knn(matrix, members, k_eff, candidate_filter=[class_id])
        slot = _pick(u[:, 0], k_eff)
        min_idx = pos.indices[local, slot]
        min_dist = pos.distances[local, slot]
    if selection in ("majority", "combined"):
        neg = knn(matrix, members, 1, candidate_filter=lambda c: c != class_id)
        maj_idx = neg.indices[local, 0]
        maj_dist = neg.distances[local, 0]

    if selection == "minority":
        surface = min_idx
    elif selection == "majority":
        surface = maj_idx
    else:
        surface = np.where(maj_dist < min_dist, maj_idx, min_idx)

    diff = x[surface] - x[centers]
    radius = np.linalg.norm(diff, axis=1)
    safe_radius = np.where(radius > 0, radius, 1.0)
    p = diff / safe_radius[:, None]

    vnorm = np.linalg.norm(v, axis=1)
    radial = u[:, 1]
    g = radial[:, None] * v / np.where(vnorm > 0, vnorm, 1.0)[:, None]

    t = config.gsmote_truncation
    dot = np.einsum("ij,ij->i", g, p)
    if t > 0:
        flip = dot < t - 1
    elif t < 0:
        flip = dot > t + 1
    else:
        flip = np.zeros_like(dot, dtype=bool)
    g = np.where(flip[:, None], g - 2 * dot[:, None] * p, g)

    if config.gsmote_deformation:
        dot = np.einsum("ij,ij->i", g, p)
        g = g - config.gsmote_deformation * dot[:, None] * p

    rows = x[centers] + radius[:, None] * g
    degenerate = radius == 0
    rows[degenerate] = x[centers[degenerate]]
    return SyntheticBatch(rows, int(class_id), centers, surface, radial, "gsmote")


def adasyn_allocation(matrix, class_id, k=5, beta=1.0, n_new=None):
    """Density-driven split of the synthetic budget across class members.

    Returns ``(G, hostile, allocation)`` where ``hostile[i]`` counts
    other-class rows among member ``i``'s ``k`` nearest neighbors in the
    whole matrix and ``allocation`` sums to ``G`` exactly.
    """
    members = _members(matrix, class_id)
    if members.size == 0:
        raise ClassTooSmall(f"class {class_id} is empty")
    counts = np.bincount(matrix.labels)
    own = counts[class_id]
    top = counts.max()
    if n_new is None:
        if own == top and np.sum(counts == top) == 1 and np.any(counts[counts > 0] < top):
            raise ClassIsMajority(f"class {class_id} is the majority class")
        n_new = math.floor(beta * (top - own) + 0.5)
    if n_new == 0:
        return 0, np.zeros(members.size, np.int64), np.zeros(members.size, np.int64)
    table = knn(matrix, members, k)
    hostile = np.sum(matrix.labels[table.indices] != class_id, axis=1)
    if hostile.sum() == 0:
        warnings.warn(
            f"class {class_id}: no other-class neighbors anywhere; spreading {n_new} samples uniformly",
            stacklevel=2,
        )
    # r_i = hostile_i / k; apportioning on the integer counts is the same split, computed exactly
    allocation = largest_remainder(hostile, n_new)
    return int(n_new), hostile, allocation


def adasyn(matrix, class_id, k=5, beta=1.0, seed=0, n_new=None):
    """ADASYN: SMOTE interpolation with a per-member count set by local difficulty.

    ``n_new`` overrides the budget ``round(beta * (n_majority - n_class))``.
    """
    total, _, allocation = adasyn_allocation(matrix, class_id, k, beta, n_new)
    if total == 0:
        return _empty_batch(matrix.dim, class_id, "adasyn")
    members = _members(matrix, class_id)
    if members.size < 2:
        raise ClassTooSmall(f"ADASYN interpolation needs at least 2 members in class {class_id}")
    k_eff = _effective_k(k, members.size, class_id)
    own = knn(matrix, members, k_eff, candidate_filter=[class_id])
    local = np.repeat(np.arange(members.size), allocation)
    u, _ = _draws(seed, class_id, total)
    centers = members[local]
    neighbors = own.indices[local, _pick(u[:, 0], k_eff)]
    gaps = u[:, 1]
    x = matrix.rows
    rows = x[centers] + gaps[:, None] * (x[neighbors] - x[centers])
    return SyntheticBatch(rows, int(class_id), centers, neighbors, gaps, "adasyn")


def generate(matrix, config):
    """Run the configured sampler on every class with a positive target.

    Returns the list of per-class batches in ascending class id.
    """
    counts = np.bincount(matrix.labels) if matrix.n else np.zeros(0, np.int64)
    present = {c: int(n) for c, n in enumerate(counts) if n > 0}
    if len(present) < 2:
        raise ConfigError("resampling needs at least two classes present")
    plan = plan_targets(present, config.strategy)
    batches = []
    for class_id in sorted(plan):
        target = plan[class_id]
        if target <= 0:
            continue
        if config.algorithm == "smote":
            batch = smote(matrix, class_id, target, config.k, config.seed, config.center_selection)
        elif config.algorithm == "gsmote":
            batch = geometric_smote(matrix, class_id, target, config)
        else:
            n_new = target if isinstance(config.strategy, Explicit) else math.floor(config.adasyn_beta * target + 0.5)
            batch = adasyn(matrix, class_id, config.k, config.adasyn_beta, config.seed, n_new=n_new)
        if len(batch):
            batches.append(batch)
    if not batches:
        warnings.warn("no synthetic rows generated; class distribution left unchanged", stacklevel=2)
    return batches


def resample_with_provenance(matrix, config):
    batches = generate(matrix, config)
    if not batches:
        return matrix, batches
    rows = np.vstack([matrix.rows] + [b.rows for b in batches])
    labels = np.concatenate([matrix.labels] + [np.full(len(b), b.class_id) for b in batches])
    return FeatureMatrix(rows, labels), batches


def resample_dataset(matrix, config):
    """Original rows, unmodified and in order, followed by synthetic rows by class id."""
    return resample_with_provenance(matrix, config)[0]
