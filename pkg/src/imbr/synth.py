"""Seeded imbalanced Gaussian-blob datasets."""

from dataclasses import dataclass

import numpy as np

from imbr.apportion import largest_remainder
from imbr.errors import ConfigError, TotalTooSmall
from imbr.knn import FeatureMatrix

# Category sizes of the job-offer corpus after duplicate removal.
TABLE1_COUNTS = {
    "Sales": 13002,
    "Administration": 8730,
    "Call center": 8453,
    "Technology": 5559,
    "Trades": 3973,
    "Human Resources": 2359,
    "Logistics": 2206,
    "Marketing": 1663,
    "Health": 1610,
    "Gastronomy": 1343,
    "Financing": 1267,
    "Secretary": 1236,
    "Production": 1129,
    "Engineering": 881,
    "Education": 702,
    "Design": 661,
    "Legal": 645,
    "Construction": 622,
    "Insurance": 573,
    "Communication": 417,
    "Management": 272,
    "Foreign Trade": 228,
    "Mining": 41,
}
TABLE1_TOTAL = 57572
MIN_PROFILE_TOTAL = 2300


@dataclass(frozen=True)
class BlobSpec:
    centers: np.ndarray
    stds: np.ndarray
    counts: np.ndarray
    seed: int = 0

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        stds = np.broadcast_to(np.asarray(self.stds, dtype=float), (centers.shape[0],)).copy()
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if counts.shape[0] != centers.shape[0]:
            raise ConfigError(f"{counts.shape[0]} counts for {centers.shape[0]} centers")
        if centers.shape[1] < 1:
            raise ConfigError("dimension must be >= 1")
        if np.any(counts < 1):
            raise ConfigError("every class count must be >= 1")
        if np.any(~(stds > 0)):
            raise ConfigError("every std must be > 0")
        if not np.all(np.isfinite(centers)):
            raise ConfigError("centers must be finite")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "counts", counts)

    @property
    def dim(self):
        return self.centers.shape[1]

    @classmethod
    def from_dict(cls, d):
        """Build from ``{"seed": s, "classes": [{"center": [...], "std": x, "count": n}, ...]}``."""
        try:
            classes = d["classes"]
            if not classes:
                raise ConfigError("spec lists no classes")
            centers = [c["center"] for c in classes]
            if len({len(c) for c in centers}) != 1:
                raise ConfigError("all centers must share one dimension")
            if "dimension" in d and d["dimension"] != len(centers[0]):
                raise ConfigError("'dimension' disagrees with the center length")
            return cls(
                centers=centers,
                stds=[c.get("std", 1.0) for c in classes],
                counts=[c["count"] for c in classes],
                seed=int(d.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad blob spec: {exc}") from None

    def to_dict(self):
        return {
            "dimension": self.dim,
            "seed": self.seed,
            "classes": [
                {"center": c.tolist(), "std": float(s), "count": int(n)}
                for c, s, n in zip(self.centers, self.stds, self.counts)
            ],
        }


def make_blobs(spec):
    """Rows grouped by class in spec order, one isotropic Gaussian per class."""
    rng = np.random.default_rng(spec.seed)
    rows = [c + s * rng.standard_normal((n, spec.dim)) for c, s, n in zip(spec.centers, spec.stds, spec.counts)]
    labels = np.repeat(np.arange(len(spec.counts)), spec.counts)
    return FeatureMatrix(np.vstack(rows), labels)


def table1_profile(total):
    """Split ``total`` over the 23 job categories in the corpus' proportions."""
    if total < MIN_PROFILE_TOTAL:
        raise TotalTooSmall(f"total must be >= {MIN_PROFILE_TOTAL}, got {total}")
    return largest_remainder(list(TABLE1_COUNTS.values()), total)


def table1_blobs(total, dim=20, separation=0.5, std=1.0, seed=0):
    """Blob spec with the job-category class sizes and seeded random centers.

    Centers are drawn from an isotropic Gaussian scaled by ``separation``.
    """
    counts = table1_profile(total)
    rng = np.random.default_rng([int(seed) % (1 << 64), 0x7AB1E1])
    centers = separation * rng.standard_normal((counts.size, dim))
    return BlobSpec(centers, np.full(counts.size, std), counts, seed)
