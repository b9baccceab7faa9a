"""Feasibility, security, timing and steganalysis experiments.

Every run is deterministic given its seed, apart from wall-clock values.
Reports are line-oriented: ``experiment capacity metric value unit``.
"""

from __future__ import annotations

import os
import platform
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from covertdomain import covert
from covertdomain.gf2 import GENERAL, PERMUTATION, HidingKey, generate_matrix, random_matrix
from covertdomain.image import GrayImage, load_image, synth_cover
from covertdomain.rsa import rsa_encrypt
from covertdomain.steganalysis import evaluate_pe, spam_features
from covertdomain.stego import Payload, embed, embed_many, extract, extract_with_matrix

DEFAULT_CAPACITIES = (1000, 2000, 3000, 4000, 5000)
IMAGE_SUFFIXES = {".pgm", ".png", ".bmp", ".tif", ".tiff", ".jpg", ".jpeg"}
MIN_CORPUS = 20


@dataclass(frozen=True, order=True)
class ReportRow:
    capacity: int
    metric: str
    value: float
    unit: str


@dataclass
class ExperimentReport:
    experiment: str
    rows: list[ReportRow] = field(default_factory=list)
    environment: str = ""
    notes: list[str] = field(default_factory=list)

    def add(self, capacity: int, metric: str, value: float, unit: str) -> None:
        self.rows.append(ReportRow(int(capacity), metric, float(value), unit))

    def value(self, capacity: int, metric: str) -> float:
        for row in self.rows:
            if row.capacity == capacity and row.metric == metric:
                return row.value
        raise KeyError((capacity, metric))

    def metric(self, metric: str) -> dict[int, float]:
        return {row.capacity: row.value for row in sorted(self.rows) if row.metric == metric}

    def to_text(self) -> str:
        lines = [f"# experiment: {self.experiment}", f"# environment: {self.environment}"]
        lines += [f"# note: {note}" for note in self.notes]
        for row in sorted(self.rows):
            lines.append(f"{self.experiment} {row.capacity} {row.metric} {row.value!r} {row.unit}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ExperimentReport:
        report = None
        environment = ""
        notes = []
        rows = []
        for line in text.splitlines():
            if line.startswith("# experiment: "):
                report = line.split(": ", 1)[1]
            elif line.startswith("# environment: "):
                environment = line.split(": ", 1)[1]
            elif line.startswith("# note: "):
                notes.append(line.split(": ", 1)[1])
            elif line.strip():
                experiment, capacity, metric, value, unit = line.split()
                report = report or experiment
                rows.append(ReportRow(int(capacity), metric, float(value), unit))
        if report is None:
            raise ValueError("empty report")
        return cls(report, rows, environment, notes)


def machine_note() -> str:
    return (
        f"{platform.platform()}; python {platform.python_version()}; "
        f"{os.cpu_count()} cpu; {platform.processor() or platform.machine()}"
    )


def _key(rng: np.random.Generator) -> HidingKey:
    return HidingKey(rng.bytes(16))


def _cover_pair(rng: np.random.Generator, dims: tuple[int, int]) -> tuple[GrayImage, GrayImage]:
    w, r = dims
    s1, s2 = rng.integers(0, 2**63, size=2)
    return synth_cover(int(s1), w, r), synth_cover(int(s2), w, r)


def _through_wire(res: covert.CovertResult) -> covert.CovertResult:
    return covert.CovertResult.from_bytes(res.to_bytes())


def run_feasibility(
    seed: int = 0,
    k: int = 1000,
    cover_dims: tuple[int, int] = (512, 512),
    trials: int = 100,
    outer_k: int = 16,
    outer_dims: tuple[int, int] = (64, 64),
    inner_dims: tuple[int, int] = (64, 64),
) -> ExperimentReport:
    """Full sender -> server -> receiver pipeline for all three cases.

    The difference ratio is the Hamming distance between the recovered and
    plaintext results divided by the result length, pooled over trials.
    """
    if k > cover_dims[0] * cover_dims[1] or outer_k > outer_dims[0] * outer_dims[1]:
        raise ValueError("payload longer than cover")
    rng = np.random.default_rng(seed)
    key = _key(rng)
    report = ExperimentReport("feasibility", environment=machine_note())

    wrong = 0
    for _ in range(trials):
        X1, X2 = _cover_pair(rng, cover_dims)
        m1, m2 = Payload.random(rng, k), Payload.random(rng, k)
        res = _through_wire(covert.covert_add(embed(X1, m1, key), embed(X2, m2, key)))
        wrong += int(np.count_nonzero(covert.recover_add(res, key, k).bits != (m1 ^ m2).bits))
    report.add(k, "difference_ratio_add", wrong / (trials * k), "ratio")

    wrong = 0
    for _ in range(trials):
        X1, X2 = _cover_pair(rng, outer_dims)
        m1, m2 = Payload.random(rng, outer_k), Payload.random(rng, outer_k)
        res = _through_wire(covert.covert_outer(embed(X1, m1, key), embed(X2, m2, key)))
        got = covert.recover_outer(res, key, outer_k).to_bits()
        wrong += int(np.count_nonzero(got != np.outer(m1.bits, m2.bits)))
    report.add(outer_k, "difference_ratio_outer", wrong / (trials * outer_k**2), "ratio")

    n = inner_dims[0] * inner_dims[1]
    wrong_gf2 = wrong_int = 0
    for _ in range(trials):
        X1, X2 = _cover_pair(rng, inner_dims)
        m1, m2 = Payload.random(rng, n), Payload.random(rng, n)
        Y1 = embed(X1, m1, key, mode=PERMUTATION)
        Y2 = embed(X2, m2, key, mode=PERMUTATION)
        dot = int(np.dot(m1.bits.astype(np.int64), m2.bits))
        parity = covert.recover_inner(_through_wire(covert.covert_inner(Y1, Y2, covert.Semantics.GF2)))
        count = covert.recover_inner(_through_wire(covert.covert_inner(Y1, Y2, covert.Semantics.INTEGER)))
        wrong_gf2 += parity != dot % 2
        wrong_int += count != dot
    report.add(n, "difference_ratio_inner_gf2", wrong_gf2 / trials, "ratio")
    report.add(n, "difference_ratio_inner_int", wrong_int / trials, "ratio")
    return report


def run_security(
    seed: int = 0,
    trials: int = 100,
    capacities: Sequence[int] = DEFAULT_CAPACITIES,
    cover_dims: tuple[int, int] = (512, 384),
) -> ExperimentReport:
    """Extraction bit-error with the hiding key and with a fresh random matrix per stego."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    w, r = cover_dims
    report = ExperimentReport("security", environment=machine_note())
    for k in capacities:
        key = _key(rng)
        with_key = without_key = 0
        for _ in range(trials):
            cover = synth_cover(int(rng.integers(0, 2**63)), w, r)
            m = Payload.random(rng, k)
            stego = embed(cover, m, key)
            with_key += int(np.count_nonzero(extract(stego, key, k).bits != m.bits))
            guess = random_matrix(int(rng.integers(0, 2**63)), k, stego.size)
            without_key += int(np.count_nonzero(extract_with_matrix(stego, guess).bits != m.bits))
        report.add(k, "error_with_key", 100.0 * with_key / (trials * k), "percent")
        report.add(k, "error_without_key", 100.0 * without_key / (trials * k), "percent")
    return report


def _median_ms(fn, runs: int) -> float:
    samples = []
    for _ in range(runs):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(samples)


def run_timing(
    seed: int = 0,
    capacities: Sequence[int] = DEFAULT_CAPACITIES,
    runs: int = 5,
    cover_dims: tuple[int, int] = (512, 512),
) -> ExperimentReport:
    """Wall-clock of the DCCD pipeline against textbook RSA-256 on the same payloads.

    The DCCD figure covers embedding both payloads, the server-side XOR and
    the receiver's extraction.  The RSA figure covers encrypting both
    payloads.  Key setup (deriving H; RSA parameters are fixed) is reported
    separately and excluded from both.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    rng = np.random.default_rng(seed)
    key = _key(rng)
    X1, X2 = _cover_pair(rng, cover_dims)
    report = ExperimentReport("timing", environment=machine_note())
    report.notes.append(
        "dccd_ms = embed_many([m1, m2]) + covert_add + recover_add; "
        "rsa_ms = rsa_encrypt(m1) + rsa_encrypt(m2); key setup excluded from both"
    )
    for k in capacities:
        m1, m2 = Payload.random(rng, k), Payload.random(rng, k)
        start = time.perf_counter()
        generate_matrix(key, k, X1.size, GENERAL)
        report.add(k, "dccd_key_setup_ms", (time.perf_counter() - start) * 1000.0, "milliseconds")

        def dccd():
            res = covert.covert_add(*embed_many([X1, X2], [m1, m2], key))
            return covert.recover_add(res, key, k)

        def rsa():
            return rsa_encrypt(m1.bits), rsa_encrypt(m2.bits)

        dccd()
        report.add(k, "dccd_ms", _median_ms(dccd, runs), "milliseconds")
        report.add(k, "rsa_ms", _median_ms(rsa, runs), "milliseconds")
    return report


def load_corpus(corpus_dir) -> list[tuple[str, GrayImage]]:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory {root} does not exist")
    paths = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    images = []
    for path in paths:
        try:
            images.append((path.name, load_image(path)))
        except (OSError, ValueError) as exc:
            raise ValueError(f"unreadable corpus image {path}: {exc}") from exc
    if len(images) < MIN_CORPUS:
        raise ValueError(f"corpus has {len(images)} images; at least {MIN_CORPUS} are required")
    return images


def run_steganalysis(
    corpus: str | os.PathLike | Iterable[GrayImage],
    capacities: Sequence[int] = DEFAULT_CAPACITIES,
    seed: int = 0,
    repetitions: int = 10,
    learners: int = 51,
    d_sub: int | None = None,
) -> ExperimentReport:
    """P_E of SPAM + ensemble per capacity; capacity 0 is the stego == cover control."""
    if isinstance(corpus, (str, os.PathLike)):
        images = [img for _, img in load_corpus(corpus)]
    else:
        images = list(corpus)
        if len(images) < MIN_CORPUS:
            raise ValueError(f"corpus has {len(images)} images; at least {MIN_CORPUS} are required")
    rng = np.random.default_rng(seed)
    key = _key(rng)
    cover_feats = np.array([spam_features(img) for img in images])
    report = ExperimentReport("steganalysis", environment=machine_note())
    for k in capacities:
        if k == 0:
            stego_feats = cover_feats
        else:
            stego_feats = np.array(
                [spam_features(embed(img, Payload.random(rng, k), key)) for img in images]
            )
        pe = evaluate_pe(cover_feats, stego_feats, seed=seed, repetitions=repetitions, L=learners, d_sub=d_sub)
        report.add(k, "p_e", pe.p_e, "ratio")
        report.add(k, "p_fa", pe.p_fa, "ratio")
        report.add(k, "p_md", pe.p_md, "ratio")
    return report
