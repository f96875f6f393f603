"""Exact sampling of cycle types under P_Theta.

A permutation of size n' is grown one cycle at a time: the cycle through the
smallest remaining element has length m with probability

    theta_m h_{n'-m} / (n' h_{n'}),

after which n' drops by m. The product of these conditionals telescopes to
the cycle-type probability, so the draws are exact. Lengths come out in
lexicographic order: the first one is L_1, the second L_2, and so on.

Each draw inverts the conditional law by a left-to-right CDF walk, so a
whole sample costs O(n) work. Batches are split into chunks of
``CHUNK_SIZE`` samples; chunk i draws its uniforms from
``Philox(key=seed).jumped(i)``, so output does not depend on the worker count.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from ._errors import MeasureUndefinedError, NumericalError, UsageError
from .exact import CycleType, cycle_count_means, log_h_sequence
from .series import LogSpaceSeries
from .weights import WeightModel, theta_array

__all__ = [
    "SamplerState",
    "LengthSamples",
    "make_sampler",
    "sample_cycle_type",
    "sample_lengths",
    "sample_batch",
    "format_cycle_type",
    "parse_cycle_type",
    "write_samples",
    "read_samples",
    "CHUNK_SIZE",
]

CHUNK_SIZE = 4096
_UNIFORM_BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class SamplerState:
    model: WeightModel
    n: int
    seed: int
    h: LogSpaceSeries
    log_theta: np.ndarray
    mean_cycles: float

    @property
    def log_h(self) -> np.ndarray:
        return self.h.logabs


def make_sampler(model: WeightModel, n: int, seed: int = 0, h: LogSpaceSeries | None = None) -> SamplerState:
    """Precompute the log h table (O(n^2)) and check that P_Theta exists on S_n."""
    if n < 1:
        raise UsageError("n must be >= 1")
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if h is None:
        h = log_h_sequence(model, n)
    elif len(h) < n + 1:
        raise UsageError(f"h table too short for n={n}")
    if h.signs[n] <= 0:
        raise MeasureUndefinedError(f"h_{n} = 0: the measure is undefined on S_{n}")
    with np.errstate(divide="ignore"):
        log_theta = np.log(theta_array(model, n))
    mean_cycles = float(cycle_count_means(model, n, h=h).sum())
    return SamplerState(model, int(n), int(seed), h, log_theta, mean_cycles)


@numba.njit(nogil=True, cache=True)
def _draw_samples(log_theta, log_h, n, count, uniforms, lengths, ncycles, start, upos, lpos):
    """Fill samples start..count-1; stops early when uniforms or length slots run out.

    Returns (next sample, uniforms consumed, length slots used). A sample cut
    short is rolled back so it can be redrawn from the same uniforms.
    """
    nu = uniforms.shape[0]
    cap = lengths.shape[0]
    for s in range(start, count):
        u0 = upos
        l0 = lpos
        rem = n
        while rem > 0:
            if upos >= nu or lpos >= cap:
                return s, u0, l0
            u = uniforms[upos]
            upos += 1
            base = math.log(rem) + log_h[rem]
            acc = 0.0
            chosen = 0
            last = 0
            for m in range(1, rem + 1):
                lt = log_theta[m]
                lh = log_h[rem - m]
                if lt == -np.inf or lh == -np.inf:
                    continue
                acc += math.exp(lt + lh - base)
                last = m
                if acc > u:
                    chosen = m
                    break
            if chosen == 0:
                # rounding left acc just below u: take the largest reachable length
                chosen = last
            if chosen == 0:
                return -1, upos, lpos
            lengths[lpos] = chosen
            lpos += 1
            rem -= chosen
        ncycles[s] = lpos - l0
    return count, upos, lpos


def _chunk_rng(seed, index):
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def _run_chunk(state: SamplerState, count: int, rng: np.random.Generator):
    block = max(_UNIFORM_BLOCK, state.n + 1)
    uniforms = rng.random(block)
    cap = max(16, int(count * (2 * state.mean_cycles + 8)))
    lengths = np.empty(cap, dtype=np.int64)
    ncycles = np.zeros(count, dtype=np.int64)
    s, upos, lpos = 0, 0, 0
    while s < count:
        s, upos, lpos = _draw_samples(
            state.log_theta, state.log_h, state.n, count, uniforms, lengths, ncycles, s, upos, lpos
        )
        if s < 0:
            raise NumericalError("sampler reached a state with no admissible cycle length")
        if s == count:
            break
        # a sample uses at most n uniforms and n length slots
        if uniforms.size - upos <= state.n:
            uniforms = np.concatenate([uniforms[upos:], rng.random(block)])
            upos = 0
        if lengths.size - lpos < state.n:
            lengths = np.concatenate([lengths, np.empty(lengths.size, dtype=np.int64)])
    return lengths[:lpos].copy(), ncycles


@dataclass
class LengthSamples:
    """Cycle lengths of ``count`` samples, concatenated in draw order.

    Sample i owns ``lengths[offsets[i]:offsets[i+1]]``; its first entry is
    L_1, the length of the cycle containing element 1.
    """

    n: int
    lengths: np.ndarray
    offsets: np.ndarray

    def __len__(self):
        return self.offsets.size - 1

    @property
    def num_cycles(self) -> np.ndarray:
        return np.diff(self.offsets)

    def lexicographic(self, j: int) -> np.ndarray:
        """L_j for every sample (0 where the sample has fewer than j cycles)."""
        idx = self.offsets[:-1] + (j - 1)
        out = np.zeros(len(self), dtype=np.int64)
        ok = idx < self.offsets[1:]
        out[ok] = self.lengths[idx[ok]]
        return out

    def sample(self, i: int) -> np.ndarray:
        return self.lengths[self.offsets[i] : self.offsets[i + 1]]

    def cycle_types(self) -> list[CycleType]:
        return [CycleType.from_lengths(self.sample(i)) for i in range(len(self))]

    def count_at_least(self, thresholds) -> np.ndarray:
        """Array (samples, thresholds) with the number of cycles of length >= each threshold."""
        thresholds = np.asarray(thresholds, dtype=float)
        owner = np.repeat(np.arange(len(self)), self.num_cycles)
        out = np.zeros((len(self), thresholds.size))
        for j, x in enumerate(thresholds):
            out[:, j] = np.bincount(owner, weights=(self.lengths >= x), minlength=len(self))
        return out


def sample_lengths(state: SamplerState, count: int, workers: int = 1) -> LengthSamples:
    """``count`` independent samples, reproducible from ``state.seed`` for any worker count."""
    if count < 0:
        raise UsageError("count must be >= 0")
    sizes = [min(CHUNK_SIZE, count - i) for i in range(0, count, CHUNK_SIZE)]

    def job(i):
        return _run_chunk(state, sizes[i], _chunk_rng(state.seed, i))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    if parts:
        lengths = np.concatenate([p[0] for p in parts])
        ncyc = np.concatenate([p[1] for p in parts])
    else:
        lengths = np.empty(0, dtype=np.int64)
        ncyc = np.empty(0, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(ncyc)]).astype(np.int64)
    out = LengthSamples(state.n, lengths, offsets)
    if count and not np.all(np.add.reduceat(lengths, offsets[:-1]) == state.n):
        raise NumericalError("sampled cycle lengths do not add up to n")
    return out


def sample_batch(state: SamplerState, count: int, workers: int = 1) -> list[CycleType]:
    return sample_lengths(state, count, workers).cycle_types()


def sample_cycle_type(state: SamplerState, rng: np.random.Generator | None = None) -> CycleType:
    """One cycle type; without ``rng`` this is the first sample of the seeded stream."""
    if rng is None:
        rng = _chunk_rng(state.seed, 0)
    lengths, _ = _run_chunk(state, 1, rng)
    return CycleType.from_lengths(lengths)


# --- line format ------------------------------------------------------------------


def format_cycle_type(ct: CycleType) -> str:
    """``"n: m1^c1 m2^c2 ..."`` with m ascending."""
    return str(ct)


def parse_cycle_type(line: str) -> CycleType:
    head, _, body = line.partition(":")
    if not _:
        raise UsageError(f"not a cycle-type line: {line!r}")
    counts = {}
    for tok in body.split():
        m, _, c = tok.partition("^")
        counts[int(m)] = int(c)
    ct = CycleType.from_dict(counts)
    if ct.n != int(head):
        raise UsageError(f"line declares n={head} but its cycles sum to {ct.n}")
    return ct


def write_samples(types, fh=None) -> str:
    """Serialize cycle types one per line, canonically sorted. Returns the text."""
    text = "".join(format_cycle_type(ct) + "\n" for ct in sorted(types))
    if fh is not None:
        fh.write(text)
    return text


def read_samples(fh) -> list[CycleType]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    return [parse_cycle_type(line) for line in fh if line.strip() and not line.startswith("#")]
