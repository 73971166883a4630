"""Rank-1 lattices, the component-by-component search, and diagnostics.

The search criterion S_s(z) is evaluated through the computable identity

    S_s(z) = (1/n) sum_k K(t_k, 0)^2  -  sum_u gamma_u^2 (2 zeta(2 alpha))^{|u|}

whose subtracted term is computed in factored form per weight family; the
equality with the aliasing double sum over the dual lattice is exercised
against a brute-force oracle in the tests.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extended import ExtendedReal
from .kernel import BatchKernelState, KernelSpec, eta
from .special import zeta
from .weights import squared_weight_sum

__all__ = [
    "Lattice",
    "CbcReport",
    "lattice_point",
    "criterion_S",
    "cbc_construct",
    "fooling_vector",
    "read_genvec",
    "write_genvec",
]


@dataclass(frozen=True)
class Lattice:
    """Point count n and generating vector z; points are t_k = {k z / n}."""

    n: int
    z: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        z = np.asarray(self.z, dtype=np.int64)
        object.__setattr__(self, "z", z)
        if z.ndim != 1 or len(z) == 0:
            raise ValueError("z must be a nonempty integer vector")
        if np.any(z < 1) or np.any(z >= max(self.n, 2)):
            raise ValueError("z entries must lie in {1..n-1}")
        for zj in z:
            if math.gcd(int(zj), self.n) != 1:
                raise ValueError(f"z entry {zj} is not coprime with n={self.n}")

    @property
    def s(self) -> int:
        return len(self.z)

    def points(self) -> np.ndarray:
        """All n points as an (n, s) array; row k is t_k, row 0 is 0."""
        k = np.arange(self.n, dtype=np.int64)
        return ((k[:, None] * self.z[None, :]) % self.n) / self.n


def lattice_point(lat: Lattice, k: int) -> np.ndarray:
    if not 1 <= k <= lat.n:
        raise ValueError(f"k={k} outside 1..{lat.n}")
    return ((k * lat.z) % lat.n) / lat.n


@dataclass
class CbcReport:
    n: int
    z: np.ndarray
    n_is_prime: bool
    criterion_trace: list[float] = field(default_factory=list)
    wce_bound_trace: list[float] = field(default_factory=list)

    def lattice(self) -> Lattice:
        return Lattice(self.n, self.z)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("dimension,z_d,S_d,bound_d\n")
        for d, (zd, sd, bd) in enumerate(
            zip(self.z, self.criterion_trace, self.wce_bound_trace), start=1
        ):
            buf.write(f"{d},{zd},{sd!r},{bd!r}\n")
        return buf.getvalue()


def _scaled_sumsq(S: np.ndarray, F: np.ndarray) -> ExtendedReal:
    """sum_k (S_k 2^{F_k})^2 as an ExtendedReal, shift-stable."""
    live = S != 0.0
    if not np.any(live):
        return ExtendedReal.zero()
    f2 = 2 * F[live]
    top = int(np.max(f2))
    t = float(np.sum(S[live] ** 2 * np.ldexp(1.0, np.clip(f2 - top, -1100, 0))))
    return ExtendedReal.from_float(t) * ExtendedReal(1.0, top, 1)


def _mean_square_kernel(spec: KernelSpec, lat: Lattice) -> ExtendedReal:
    state = BatchKernelState(spec, lat.n, lat.s)
    pts = lat.points()
    for j in range(lat.s):
        state.commit(eta(spec.alpha, pts[:, j]))
    total = _scaled_sumsq(*state.values())
    return total / ExtendedReal.from_float(float(lat.n))


def _criterion_from_parts(
    minuend: ExtendedReal, subtrahend: ExtendedReal
) -> float:
    value = minuend - subtrahend
    ref = minuend.to_float()
    val = value.to_float()
    if val < -1e-10 * ref:
        raise AssertionError(
            f"criterion cancellation beyond tolerance: {val} vs minuend {ref}"
        )
    if 0.0 < abs(val) < 1e-13 * ref:
        warnings.warn(
            "criterion value dominated by cancellation; significance lost",
            RuntimeWarning,
        )
    return max(val, 0.0)


def criterion_S(spec: KernelSpec, lat: Lattice) -> float:
    """Search criterion S_s(z) >= 0 via the kernel-square identity."""
    sub = squared_weight_sum(spec.scheme, lat.s, 2.0 * zeta(2 * spec.alpha))
    return _criterion_from_parts(_mean_square_kernel(spec, lat), sub)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def cbc_construct(spec: KernelSpec, n: int, s: int) -> CbcReport:
    """Greedy per-dimension minimizer of S_d over unit candidates.

    Per-point kernel state is cached across dimensions, so each candidate
    costs one row update plus an order contraction.  Ties break to the
    smallest candidate; the candidate loop runs in ascending index order,
    making the result independent of any parallel scheduling.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if s < 1 or s > spec.scheme.dimension:
        raise ValueError("target dimension outside the weight sequence")
    cands = np.array(
        [c for c in range(1, n) if math.gcd(c, n) == 1], dtype=np.int64
    )
    etable = eta(spec.alpha, np.arange(n, dtype=float) / n)
    karr = np.arange(n, dtype=np.int64)
    state = BatchKernelState(spec, n, s)
    two_zeta = 2.0 * zeta(2 * spec.alpha)
    nfac = ExtendedReal.from_float(float(n))
    z: list[int] = []
    crit_trace: list[float] = []
    bound_trace: list[float] = []
    for d in range(1, s + 1):
        best_c = -1
        best_score: ExtendedReal | None = None
        best_eta = None
        margin = ExtendedReal.from_float(1.0 - 1e-12)
        for c in cands:
            ev = etable[(karr * c) % n]
            score = _scaled_sumsq(*state.candidate_values(ev))
            # strict improvement beyond rounding noise, so exact ties
            # (e.g. the mirrored candidates c and n-c) break to smallest c
            if best_score is None or score < best_score * margin:
                best_score = score
                best_c = int(c)
                best_eta = ev
        state.commit(best_eta)
        z.append(best_c)
        sub = squared_weight_sum(spec.scheme, d, two_zeta)
        sd = _criterion_from_parts(best_score / nfac, sub)
        crit_trace.append(sd)
        bound_trace.append(math.sqrt(2.0) * sd**0.25)
    return CbcReport(
        n=n,
        z=np.array(z, dtype=np.int64),
        n_is_prime=_is_prime(n),
        criterion_trace=crit_trace,
        wce_bound_trace=bound_trace,
    )


def fooling_vector(n: int, z) -> np.ndarray:
    """Nonzero h* supported on the first two coordinates with h*.z = 0 mod n.

    Pigeonhole over the positive-quadrant grid {0..floor(sqrt(n))}^2: two
    grid vectors share a residue of h.z mod n, and their difference is the
    sought dual-lattice vector with entries bounded by floor(sqrt(n)).
    """
    z = np.asarray(z, dtype=np.int64)
    if len(z) < 2:
        raise ValueError("fooling vector needs dimension >= 2")
    r = math.isqrt(n)
    seen: dict[int, tuple[int, int]] = {}
    for h1 in range(r + 1):
        for h2 in range(r + 1):
            res = (h1 * int(z[0]) + h2 * int(z[1])) % n
            if res in seen:
                p1, p2 = seen[res]
                h = np.zeros(len(z), dtype=np.int64)
                h[0], h[1] = h1 - p1, h2 - p2
                if int(h @ z) % n != 0 or (h[0] == 0 and h[1] == 0):
                    raise AssertionError("pigeonhole postcondition violated")
                return h
            seen[res] = (h1, h2)
    raise AssertionError("pigeonhole search failed; cannot happen for n >= 1")


def write_genvec(path: str | Path, z, n: int) -> None:
    z = np.asarray(z, dtype=np.int64)
    lines = [f"# n={n}"]
    lines += [f"{i} {zi}" for i, zi in enumerate(z, start=1)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_genvec(path: str | Path, n: int | None = None) -> Lattice:
    """Parse 'i z_i' lines (1-based, contiguous); n from header or caller."""
    entries: dict[int, int] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i z_i', got {raw!r}")
        try:
            i, zi = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-integer token") from exc
        if i != len(entries) + 1:
            raise ValueError(
                f"{path}:{lineno}: dimension index {i} breaks the sequence"
            )
        entries[i] = zi
    if n is None:
        raise ValueError(f"{path}: no '# n=' header and no n supplied")
    if not entries:
        raise ValueError(f"{path}: no generating-vector entries found")
    z = np.array([entries[i] for i in range(1, len(entries) + 1)], np.int64)
    return Lattice(n, z)
