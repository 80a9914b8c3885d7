"""Shape classes, the tiling catalog, and kernel instantiation."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from pathlib import Path
from types import MappingProxyType

from .abft import AbftConfig, abft_gemm_online
from .blocked import KernelParams, blocked_gemm, require_valid, validate_params
from .errors import InvalidArguments, InvalidParams
from ._engine import CATALOG_TILES


class ShapeClass(enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    TALL_SKINNY = "tall"
    HUGE = "huge"

    @classmethod
    def parse(cls, text: str) -> "ShapeClass":
        t = text.strip().lower()
        aliases = {"tallskinny": "tall", "tall_skinny": "tall", "tall-skinny": "tall"}
        t = aliases.get(t, t)
        for c in cls:
            if c.value == t:
                return c
        raise InvalidArguments(f"unknown shape class {text!r}")


DEFAULT_CATALOG = MappingProxyType({
    ShapeClass.SMALL: KernelParams(16, 16, 16, 8, 16, 2, 2),
    ShapeClass.MEDIUM: KernelParams(32, 32, 8, 16, 32, 4, 4),
    ShapeClass.LARGE: KernelParams(64, 64, 8, 32, 64, 8, 8),
    ShapeClass.TALL_SKINNY: KernelParams(32, 128, 8, 16, 64, 4, 8),
    ShapeClass.HUGE: KernelParams(128, 128, 8, 32, 64, 8, 8),
})

FIELDS = ("m_tb", "n_tb", "k_tb", "m_w", "n_w", "m_t", "n_t")


def classify_shape(M: int, N: int, K: int = 1) -> ShapeClass:
    """Bucket by ``min(M, N)``; strongly rectangular small shapes are tall-skinny."""
    if min(M, N, K) < 1:
        raise InvalidArguments(f"M, N, K must be >= 1, got {M}, {N}, {K}")
    lo, hi = min(M, N), max(M, N)
    if hi >= 4 * lo and lo <= 256:
        return ShapeClass.TALL_SKINNY
    if lo <= 128:
        return ShapeClass.SMALL
    if lo <= 256:
        return ShapeClass.MEDIUM
    if lo <= 512:
        return ShapeClass.LARGE
    return ShapeClass.HUGE


def params_for(cls: ShapeClass, catalog=None) -> KernelParams:
    return (catalog or DEFAULT_CATALOG)[cls]


def load_catalog(path) -> dict:
    """Catalog with overrides from a ``<class>.<field> = value`` text file."""
    cat = dict(DEFAULT_CATALOG)
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArguments(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if "." not in key:
            raise InvalidArguments(f"{path}:{n}: unknown key {key!r}")
        cname, fname = key.rsplit(".", 1)
        try:
            c = ShapeClass.parse(cname)
        except InvalidArguments:
            raise InvalidArguments(f"{path}:{n}: unknown key {key!r}") from None
        if fname not in FIELDS:
            raise InvalidArguments(f"{path}:{n}: unknown key {key!r}")
        try:
            v = int(value)
        except ValueError:
            raise InvalidArguments(f"{path}:{n}: {key} needs an integer, got {value!r}") from None
        cat[c] = replace(cat[c], **{fname: v})
    for c, p in cat.items():
        problems = validate_params(p)
        if problems:
            raise InvalidParams(f"{path}: {c.value} row invalid: " + "; ".join(problems))
    return cat


def catalog_text(catalog=None) -> str:
    lines = []
    for c, p in (catalog or DEFAULT_CATALOG).items():
        for f, v in zip(FIELDS, p.astuple()):
            lines.append(f"{c.value}.{f} = {v}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Kernel:
    """A GEMM bound to one tiling (and optionally one ABFT configuration).

    Plain kernels return ``C``; fault-tolerant ones return ``(C, report)``.
    """

    params: KernelParams
    ft: AbftConfig | None
    specialized: bool

    def __call__(self, A, B, C, plan=None):
        if self.ft is None:
            return blocked_gemm(A, B, C, self.params, plan, specialized=self.specialized)
        return abft_gemm_online(A, B, C, self.params, self.ft, plan, specialized=self.specialized)


def instantiate(p: KernelParams, ft: AbftConfig | None = None) -> Kernel:
    """Specialized kernel for catalog tilings, generic kernel otherwise."""
    require_valid(p)
    if ft is not None:
        ft.check(p)
    return Kernel(p, ft, p.astuple() in CATALOG_TILES)
