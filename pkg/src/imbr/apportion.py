"""Largest-remainder apportionment, shared by ADASYN and the job-category profile."""

import numpy as np


def largest_remainder(weights, total):
    """Split the integer ``total`` proportionally to ``weights``.

    Each share gets the floor of its exact quota; the leftover units go to
    the largest fractional remainders, ties to the smaller index. All-zero
    weights are treated as uniform. The result always sums to ``total``.
    """
    raw = np.asarray(weights)
    total = int(total)
    if total < 0:
        raise ValueError("total must be non-negative")
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    weights = raw.astype(float)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and non-negative")
    if np.all(weights == np.round(weights)) and weights.sum() * max(total, 1) < 2**62:
        return _integer_apportion([int(w) for w in weights], total)
    wsum = weights.sum()
    if wsum == 0:
        weights = np.ones_like(weights)
        wsum = weights.size
    quotas = weights * total / wsum
    shares = np.floor(quotas).astype(np.int64)
    leftover = total - int(shares.sum())
    if leftover > 0:
        remainders = quotas - shares
        # stable sort on negated remainder keeps smaller index first among ties
        order = np.argsort(-remainders, kind="stable")
        shares[order[:leftover]] += 1
    elif leftover < 0:
        # float rounding pushed a floor up; take units back from the smallest remainders
        remainders = quotas - shares
        order = np.argsort(remainders, kind="stable")
        shares[order[:-leftover]] -= 1
    return shares


def _integer_apportion(weights, total):
    # exact: remainders compared as integers, so ties are genuine ties
    wsum = sum(weights)
    if wsum == 0:
        weights = [1] * len(weights)
        wsum = len(weights)
    shares = np.array([w * total // wsum for w in weights], dtype=np.int64)
    remainders = np.array([w * total % wsum for w in weights], dtype=np.int64)
    leftover = total - int(shares.sum())
    order = np.argsort(-remainders, kind="stable")
    shares[order[:leftover]] += 1
    return shares
