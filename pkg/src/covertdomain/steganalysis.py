"""Second-order SPAM features, an FLD random-subspace ensemble and the P_E detection error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from covertdomain.image import GrayImage

T = 3
_BINS = 2 * T + 1
SPAM_DIM = 2 * _BINS**3  # 686

DEFAULT_LEARNERS = 51
RIDGE = 1e-6

# direction name -> view of the image that turns it into a left-to-right
# (or main-diagonal) scan
_STRAIGHT = {
    "right": lambda x: x,
    "left": lambda x: x[:, ::-1],
    "down": lambda x: x.T,
    "up": lambda x: x[::-1, :].T,
}
_DIAGONAL = {
    "down_right": lambda x: x,
    "up_left": lambda x: x[::-1, ::-1],
    "down_left": lambda x: x[:, ::-1],
    "up_right": lambda x: x[::-1, :],
}


def _conditional(d0: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """P(d2 = u | d1 = v, d0 = w) as a (w, v, u) tensor; rows with no samples stay 0."""
    idx = ((d0 + T) * _BINS + (d1 + T)) * _BINS + (d2 + T)
    counts = np.bincount(idx.ravel(), minlength=_BINS**3).reshape(_BINS, _BINS, _BINS)
    totals = counts.sum(axis=2, keepdims=True)
    return np.divide(counts, totals, out=np.zeros(counts.shape), where=totals > 0)


def spam_transitions(img: GrayImage) -> dict[str, np.ndarray]:
    """Per-direction 7x7x7 transition tensors before averaging."""
    x = img.pixels.astype(np.int16)
    if min(x.shape) < 4:
        raise ValueError(f"image {img.width}x{img.height} too small for SPAM (need 4x4)")
    out = {}
    for name, view in _STRAIGHT.items():
        v = view(x)
        d = np.clip(v[:, :-1] - v[:, 1:], -T, T)
        out[name] = _conditional(d[:, :-2], d[:, 1:-1], d[:, 2:])
    for name, view in _DIAGONAL.items():
        v = view(x)
        d = np.clip(v[:-1, :-1] - v[1:, 1:], -T, T)
        out[name] = _conditional(d[:-2, :-2], d[1:-1, 1:-1], d[2:, 2:])
    return out


def spam_features(img: GrayImage) -> np.ndarray:
    """686-dimensional SPAM vector: straight-direction average then diagonal average."""
    tr = spam_transitions(img)
    straight = np.mean([tr[name] for name in _STRAIGHT], axis=0)
    diagonal = np.mean([tr[name] for name in _DIAGONAL], axis=0)
    return np.concatenate([straight.ravel(), diagonal.ravel()])


@dataclass(frozen=True)
class BaseLearner:
    subspace: np.ndarray
    weights: np.ndarray
    threshold: float


@dataclass(frozen=True)
class EnsembleModel:
    learners: tuple[BaseLearner, ...]
    dim: int

    @property
    def L(self) -> int:
        return len(self.learners)

    @property
    def d_sub(self) -> int:
        return self.learners[0].subspace.size


def default_d_sub(dim: int) -> int:
    return min(math.ceil(dim / 4), 200)


def _as_matrix(feats) -> np.ndarray:
    X = np.asarray(feats, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature sets must be 2-D (samples x features)")
    return X


def train_ensemble(
    cover_feats,
    stego_feats,
    seed: int = 0,
    L: int = DEFAULT_LEARNERS,
    d_sub: int | None = None,
) -> EnsembleModel:
    """Fit L Fisher linear discriminants on random subspaces and paired bootstrap samples.

    Cover and stego rows are assumed paired (same source image), so one
    bootstrap index vector is drawn per learner and applied to both sets.
    """
    X0 = _as_matrix(cover_feats)
    X1 = _as_matrix(stego_feats)
    if X0.shape != X1.shape:
        raise ValueError(f"cover and stego sets differ in shape: {X0.shape} vs {X1.shape}")
    n, dim = X0.shape
    if n < 2:
        raise ValueError("need at least two samples per class")
    if L < 1 or L % 2 == 0:
        raise ValueError("L must be a positive odd number")
    d_sub = default_d_sub(dim) if d_sub is None else d_sub
    if not 1 <= d_sub <= dim:
        raise ValueError(f"d_sub must lie in [1, {dim}], got {d_sub}")

    rng = np.random.default_rng(seed)
    ridge = RIDGE * np.eye(d_sub)
    learners = []
    for _ in range(L):
        sub = np.sort(rng.choice(dim, size=d_sub, replace=False))
        boot = rng.integers(0, n, size=n)
        A = X0[np.ix_(boot, sub)]
        B = X1[np.ix_(boot, sub)]
        mu0 = A.mean(axis=0)
        mu1 = B.mean(axis=0)
        A0 = A - mu0
        B0 = B - mu1
        scatter = A0.T @ A0 + B0.T @ B0 + ridge
        w = np.linalg.solve(scatter, mu1 - mu0)
        learners.append(BaseLearner(sub, w, float(w @ (mu0 + mu1) / 2.0)))
    return EnsembleModel(tuple(learners), dim)


def vote_scores(model: EnsembleModel, feats) -> np.ndarray:
    """Fraction of learners voting "stego" for each row of ``feats``."""
    X = _as_matrix(np.atleast_2d(feats))
    if X.shape[1] != model.dim:
        raise ValueError(f"feature dimension {X.shape[1]} does not match model ({model.dim})")
    votes = np.zeros(X.shape[0])
    for learner in model.learners:
        votes += X[:, learner.subspace] @ learner.weights > learner.threshold
    return votes / model.L


def classify(model: EnsembleModel, feat) -> float:
    feat = np.asarray(feat, dtype=np.float64)
    if feat.ndim != 1:
        raise ValueError("classify expects a single feature vector")
    return float(vote_scores(model, feat)[0])


@dataclass(frozen=True)
class PEReport:
    p_e: float
    p_fa: float
    p_md: float
    n_cover: int
    n_stego: int


def compute_pe(cover_scores: Sequence[float], stego_scores: Sequence[float]) -> PEReport:
    """min over thresholds of (P_FA + P_MD) / 2, deciding "stego" when score >= threshold."""
    cover = np.sort(np.asarray(cover_scores, dtype=np.float64))
    stego = np.sort(np.asarray(stego_scores, dtype=np.float64))
    if cover.size == 0 or stego.size == 0:
        raise ValueError("score lists must be non-empty")
    thresholds = np.concatenate([[-np.inf], np.unique(np.concatenate([cover, stego])), [np.inf]])
    p_fa = (cover.size - np.searchsorted(cover, thresholds, side="left")) / cover.size
    p_md = np.searchsorted(stego, thresholds, side="left") / stego.size
    total = (p_fa + p_md) / 2.0
    best = int(np.argmin(total))
    return PEReport(float(total[best]), float(p_fa[best]), float(p_md[best]), cover.size, stego.size)


def evaluate_pe(
    cover_feats,
    stego_feats,
    seed: int = 0,
    repetitions: int = 10,
    L: int = DEFAULT_LEARNERS,
    d_sub: int | None = None,
) -> PEReport:
    """Average P_E over seeded 50/50 train/test splits of the paired feature sets."""
    X0 = _as_matrix(cover_feats)
    X1 = _as_matrix(stego_feats)
    if X0.shape != X1.shape:
        raise ValueError("cover and stego feature sets must be paired")
    n = X0.shape[0]
    if n < 4:
        raise ValueError("need at least four image pairs to split")
    reports = []
    for rep in range(repetitions):
        rng = np.random.default_rng([seed, rep])
        order = rng.permutation(n)
        train, test = order[: n // 2], order[n // 2 :]
        model = train_ensemble(X0[train], X1[train], seed=int(rng.integers(2**63)), L=L, d_sub=d_sub)
        reports.append(compute_pe(vote_scores(model, X0[test]), vote_scores(model, X1[test])))
    return PEReport(
        float(np.mean([r.p_e for r in reports])),
        float(np.mean([r.p_fa for r in reports])),
        float(np.mean([r.p_md for r in reports])),
        reports[0].n_cover,
        reports[0].n_stego,
    )


def format_features(records: Iterable[tuple[str, np.ndarray]]) -> str:
    """One line per image: identifier then the feature values, space separated."""
    lines = []
    for ident, feat in records:
        if any(ch.isspace() for ch in ident):
            raise ValueError(f"identifier {ident!r} contains whitespace")
        lines.append(" ".join([ident, *(repr(float(v)) for v in feat)]))
    return "".join(line + "\n" for line in lines)


def parse_features(text: str) -> list[tuple[str, np.ndarray]]:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        ident, *values = line.split()
        if len(values) != SPAM_DIM:
            raise ValueError(f"line {lineno}: expected {SPAM_DIM} values, got {len(values)}")
        records.append((ident, np.array([float(v) for v in values])))
    return records
