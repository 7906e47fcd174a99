"""Deterministic trace records: one line per event, byte-exact.

Line format:

    t=<sec> seq=<n> <component> <EVENT> k1=v1 k2=v2 ...

Keys come in a fixed order per event.  Values reuse the wire protocol's
percent-encoding (space, percent, newline), so a record always stays on
one line and round-trips exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

from .generation import encode_text


def fmt_score(value: float) -> str:
    """Scores and factor values: fixed six decimals."""
    return f"{value:.6f}"


def fmt_num(value: float) -> str:
    """Configuration numbers: shortest plain rendering."""
    return f"{value:g}"


@dataclass(frozen=True)
class TraceRecord:
    at: int
    seq: int
    component: str
    event: str
    details: tuple[tuple[str, str], ...]

    def render(self) -> str:
        parts = [f"t={self.at}", f"seq={self.seq}", self.component, self.event]
        parts.extend(f"{key}={encode_text(value)}" for key, value in self.details)
        return " ".join(parts)

    def get(self, key: str) -> str | None:
        """Raw (unencoded) value for `key`, or None."""
        for k, v in self.details:
            if k == key:
                return v
        return None


def render_trace(records: list[TraceRecord]) -> str:
    return "".join(record.render() + "\n" for record in records)
