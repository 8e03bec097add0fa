"""The quasisymmetry Phi(u, v) = r(u) + iv between G_r and the plane, and
empirical harnesses for its distortion bounds.

Plane distances use the sup norm, |Phi(w) - Phi(w')| = max{|r(u) - r(u')|, |v - v'|}.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .metric import GrushinPoint, cc_estimate, quasidistance, quasidistance_array

BACKENDS = ("quasidistance_scaled", "cc_estimate")
CHUNK = 1024
AXIS_MASS = 0.1
CC_RECHECK = 20


class PlanePoint(NamedTuple):
    x: float
    y: float


def phi(p, w):
    u, v = w
    return PlanePoint(float(p.r(u)), float(v))


def phi_inverse(p, z):
    x, y = z
    return GrushinPoint(float(p.r_inverse(x)), float(y))


def sup_norm_dist(z1, z2):
    return max(abs(z1[0] - z2[0]), abs(z1[1] - z2[1]))


def phi_array(p, u, v):
    return np.asarray(p.r(u), dtype=float), np.asarray(v, dtype=float)


def image_dist(p, w, w2):
    """Sup-norm distance between Phi(w) and Phi(w2)."""
    return sup_norm_dist(phi(p, w), phi(p, w2))


@dataclass
class QSReport:
    c_emp: float
    n_triples: int
    n_admitted: int
    n_degenerate: int
    worst_triple: tuple | None
    distance_backend: str

    def to_dict(self):
        worst = None
        if self.worst_triple is not None:
            w, a, b = self.worst_triple
            worst = {"w": list(w), "a": list(a), "b": list(b)}
        return {
            "c_emp": self.c_emp,
            "n_triples": self.n_triples,
            "n_admitted": self.n_admitted,
            "n_degenerate": self.n_degenerate,
            "worst_triple": worst,
            "backend": self.distance_backend,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def triple_ratio(p, w, a, b):
    """|Phi(w) - Phi(a)| / |Phi(w) - Phi(b)| in the sup norm."""
    return image_dist(p, w, a) / image_dist(p, w, b)


def sample_triples(box, n_triples, seed):
    """Seeded triples (n, 3, 2) in ``box = (u_lo, u_hi, v_lo, v_hi)``.

    Each u-coordinate is put on the singular line with probability 0.1.
    Draws happen in fixed-size chunks, so the first n triples do not depend
    on how many are requested in total.
    """
    u_lo, u_hi, v_lo, v_hi = box
    rng = np.random.default_rng(seed)
    n_chunks = -(-n_triples // CHUNK)
    out = []
    for _ in range(n_chunks):
        u = rng.uniform(u_lo, u_hi, size=(CHUNK, 3))
        v = rng.uniform(v_lo, v_hi, size=(CHUNK, 3))
        on_axis = rng.random(size=(CHUNK, 3)) < AXIS_MASS
        u = np.where(on_axis, 0.0, u)
        out.append(np.stack([u, v], axis=-1))
    return np.concatenate(out)[:n_triples]


def _scan(p, triples, offset):
    """Best admitted triple in a block; returns (ratio, index, admitted, degenerate, ratios)."""
    w, a, b = triples[:, 0], triples[:, 1], triples[:, 2]
    d_wa = quasidistance_array(p, w[:, 0], w[:, 1], a[:, 0], a[:, 1])[0]
    d_wb = quasidistance_array(p, w[:, 0], w[:, 1], b[:, 0], b[:, 1])[0]
    rw = p.r(w[:, 0])
    num = np.maximum(np.abs(rw - p.r(a[:, 0])), np.abs(w[:, 1] - a[:, 1]))
    den = np.maximum(np.abs(rw - p.r(b[:, 0])), np.abs(w[:, 1] - b[:, 1]))
    degenerate = den == 0.0
    admitted = (d_wa <= d_wb) & ~degenerate
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(admitted, num / den, -np.inf)
    i = int(np.argmax(ratio)) if len(ratio) else 0
    best = float(ratio[i]) if len(ratio) else -np.inf
    return best, offset + i, int(admitted.sum()), int(degenerate.sum()), ratio


def weak_qs_sample(p, box=(-5.0, 5.0, -5.0, 5.0), n_triples=10_000, seed=0,
                   backend="quasidistance_scaled", threads=1):
    """Largest image ratio over sampled triples with d(w, a) <= d(w, b).

    With the ``quasidistance_scaled`` backend triples are admitted by the
    quasidistance with the comparison constant set to 1 (a stricter filter
    than the one the comparability constant allows). The ``cc_estimate``
    backend re-admits the worst candidates with estimated d_CC instead.
    Work is split over ``threads`` by a fixed partition of the triple index,
    so the result does not depend on the thread count.
    """
    if n_triples < 1:
        raise ValueError("n_triples must be >= 1")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    triples = sample_triples(box, n_triples, seed)
    bounds = list(range(0, n_triples, CHUNK)) + [n_triples]
    blocks = [(triples[s:e], s) for s, e in zip(bounds[:-1], bounds[1:])]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda blk: _scan(p, *blk), blocks))
    else:
        parts = [_scan(p, *blk) for blk in blocks]

    admitted = sum(pt[2] for pt in parts)
    degenerate = sum(pt[3] for pt in parts)
    ratios = np.concatenate([pt[4] for pt in parts])

    if backend == "cc_estimate":
        order = np.argsort(-ratios, kind="stable")[:CC_RECHECK]
        best, best_i = -np.inf, None
        for i in order:
            if not np.isfinite(ratios[i]):
                break
            w, a, b = (tuple(map(float, pt)) for pt in triples[i])
            if cc_estimate(p, w, a)[0] <= cc_estimate(p, w, b)[0] and ratios[i] > best:
                best, best_i = float(ratios[i]), int(i)
    else:
        # first index wins ties, whatever the partition
        best = max(pt[0] for pt in parts)
        best_i = min(pt[1] for pt in parts if pt[0] == best) if np.isfinite(best) else None

    worst = None
    if best_i is not None:
        worst = tuple(tuple(map(float, pt)) for pt in triples[best_i])
    return QSReport(
        c_emp=float(best) if best_i is not None else float("nan"),
        n_triples=n_triples,
        n_admitted=admitted,
        n_degenerate=degenerate,
        worst_triple=worst,
        distance_backend=backend,
    )


@dataclass
class LemmaReport:
    lemma: str
    applicable: bool
    reason: str
    d: float
    middle: float
    image: float
    ratio_up: float
    ratio_down: float
    bound: float
    passed: bool | None

    def to_dict(self):
        return dict(self.__dict__)


def _lemma_report(lemma, p, w, w2, far):
    """Shared body of the two comparison checks.

    ``far`` selects the regime max{|u|, |u'|} >= d (middle term d max r') or
    max{|u|, |u'|} <= d (middle term r'(d) d).
    """
    p.certify()
    d = quasidistance(p, w, w2).value
    reach = max(abs(w[0]), abs(w2[0]))
    beta, m = p.beta_hat, p.m_hat
    if far:
        bound = 2.0 * beta
        ok_pre = reach >= d
    else:
        bound = max(2.0, 2.0 * m * beta)
        ok_pre = reach <= d
    nan = float("nan")
    if d == 0.0:
        return LemmaReport(lemma, False, "coincident points", 0.0, 0.0, 0.0, nan, nan, bound, None)
    if not ok_pre:
        return LemmaReport(lemma, False, "precondition on max{|u|,|u'|} fails", d, nan, nan,
                           nan, nan, bound, None)
    if far:
        middle = d * max(float(p.r_prime(w[0])), float(p.r_prime(w2[0])))
    else:
        middle = float(p.r_prime(d)) * d
    image = image_dist(p, w, w2)
    if not (0.0 < middle < np.inf and 0.0 < image < np.inf):
        # the precondition holds but r or r' leaves the double range at this scale
        return LemmaReport(lemma, True, "distances not representable in double precision",
                           d, middle, image, nan, nan, bound, None)
    up, down = middle / image, image / middle
    passed = up <= bound and down <= bound
    return LemmaReport(lemma, True, "", d, middle, image, up, down, bound, bool(passed))


def lemma32_check(p, w, w2):
    """Compare d(w, w') max{r'(u), r'(u')} with |Phi(w) - Phi(w')| when max{|u|,|u'|} >= d.

    Both ratios must stay within C1 = 2 beta_hat.
    """
    return _lemma_report("far_from_axis", p, w, w2, far=True)


def lemma33_check(p, w, w2):
    """Compare r'(d) d with |Phi(w) - Phi(w')| when max{|u|,|u'|} <= d.

    Both ratios must stay within C2 = max{2, 2 m_hat beta_hat}.
    """
    return _lemma_report("near_axis", p, w, w2, far=False)
