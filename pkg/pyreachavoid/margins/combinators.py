from typing import Optional, Sequence

import numpy as np

from ..core.errors import MarginError
from ..core.types import MarginKind
from .margin import INACTIVE_MARGIN, MarginFn


def _flip(kind: MarginKind) -> MarginKind:
    return MarginKind.FAILURE if kind is MarginKind.TARGET else MarginKind.TARGET


def _combine(margins: Sequence[MarginFn], pick, kind: Optional[MarginKind], name: str) -> MarginFn:
    margins = list(margins)
    if not margins:
        raise MarginError("Cannot combine an empty list of margins")
    if len(margins) == 1 and kind in (None, margins[0].kind):
        return margins[0]

    # Derivatives come from the selected branch; pick returns the first
    # index on ties.
    def branch(x, t) -> MarginFn:
        return margins[int(pick([m.value(x, t) for m in margins]))]

    return MarginFn(
        kind or margins[0].kind,
        name,
        lambda x, t: branch(x, t).value(x, t),
        lambda x, t: branch(x, t).gradient(x, t),
        lambda x, t: branch(x, t).hessian(x, t),
    )


def combine_max(margins: Sequence[MarginFn], kind: Optional[MarginKind] = None,
                name: Optional[str] = None) -> MarginFn:
    """Pointwise maximum; derivatives of the lowest-index maximizing branch."""
    return _combine(margins, np.argmax, kind, name or "max(" + ", ".join(m.name for m in margins) + ")")


def combine_min(margins: Sequence[MarginFn], kind: Optional[MarginKind] = None,
                name: Optional[str] = None) -> MarginFn:
    """Pointwise minimum; derivatives of the lowest-index minimizing branch."""
    return _combine(margins, np.argmin, kind, name or "min(" + ", ".join(m.name for m in margins) + ")")


def negate(margin: MarginFn, kind: Optional[MarginKind] = None, name: Optional[str] = None) -> MarginFn:
    """-m; the kind flips unless given."""
    return MarginFn(
        kind or _flip(margin.kind),
        name or f"-{margin.name}",
        lambda x, t: -margin.value(x, t),
        lambda x, t: -margin.gradient(x, t),
        lambda x, t: -margin.hessian(x, t),
    )


def time_window(margin: MarginFn, start: int = 0, stop: Optional[int] = None,
                name: Optional[str] = None) -> MarginFn:
    """The margin on times start <= t < stop, INACTIVE_MARGIN elsewhere."""

    def active(t: int) -> bool:
        return t >= start and (stop is None or t < stop)

    return MarginFn(
        margin.kind,
        name or f"{margin.name}@[{start},{'T' if stop is None else stop})",
        lambda x, t: margin.value(x, t) if active(t) else INACTIVE_MARGIN,
        lambda x, t: margin.gradient(x, t) if active(t) else np.zeros(x.shape[0]),
        lambda x, t: margin.hessian(x, t) if active(t) else np.zeros((x.shape[0], x.shape[0])),
    )
