"""Symbolic block-Markov schedule for k-hop decode-forward.

The source emits message ``w^m`` at the start of block ``m`` (m = 1..B) and
the pipeline runs for ``B + T - 2`` blocks. In block ``b`` every node puts
message ``b - j + 1`` on each layer ``j`` of its window, so all senders of a
layer are coherent. Node ``t`` decodes ``w^m`` from the k blocks ending at
``m + t - 2`` and forwards it from block ``m + t - 1`` on.

For k = 2 this is the two-block decoding of the original construction. The
k-block window for other k extends the same one-block-per-hop delay; it is
an extrapolation, not a separately derived result.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .allocation import ViewSpec
from .errors import UsageError

NULL = 0


@dataclass(frozen=True)
class BlockSchedule:
    T: int
    k: int
    B: int
    total_blocks: int
    # (block, node) -> ((layer, message), ...); message 0 is the null message
    tx: dict[tuple[int, int], tuple[tuple[int, int], ...]]
    # (receiver, message) -> (first block, last block)
    decode_window: dict[tuple[int, int], tuple[int, int]]

    def sends(self, b: int, i: int) -> tuple[tuple[int, int], ...]:
        return self.tx[b, i]

    def truncated(self, n_blocks: int) -> "BlockSchedule":
        """Same schedule cut off after ``n_blocks`` blocks."""
        tx = {key: v for key, v in self.tx.items() if key[0] <= n_blocks}
        windows = {key: (lo, min(hi, n_blocks)) for key, (lo, hi) in self.decode_window.items()}
        return replace(self, total_blocks=n_blocks, tx=tx, decode_window=windows)


def _message(b: int, j: int, B: int) -> int:
    m = b - j + 1
    return m if 1 <= m <= B else NULL


def build_schedule(T: int, k: int, B: int) -> BlockSchedule:
    if B < 1:
        raise UsageError(f"need at least one message block, got B={B}")
    view = ViewSpec(T, k)  # validates T and k
    total = B + T - 2
    tx = {
        (b, i): tuple((j, _message(b, j, B)) for j in view.window(i))
        for b in range(1, total + 1)
        for i in range(1, T)
    }
    windows = {
        (t, m): (max(1, m + t - 1 - k), min(total, m + t - 2))
        for t in range(2, T + 1)
        for m in range(1, B + 1)
    }
    return BlockSchedule(T, k, B, total, tx, windows)


@dataclass(frozen=True)
class ScheduleViolation:
    kind: str  # "window", "coherence", "causality", "drain"
    block: int | None
    node: int | None
    layer: int | None
    message: int | None
    detail: str

    def __str__(self) -> str:
        parts = [f"{name} {v}" for name, v in
                 (("block", self.block), ("node", self.node), ("layer", self.layer),
                  ("message", self.message)) if v is not None]
        return f"{self.kind} ({', '.join(parts)}): {self.detail}"


def verify_schedule(s: BlockSchedule) -> list[ScheduleViolation]:
    """All coherence, causality and drain violations (empty list = consistent)."""
    view = ViewSpec(s.T, s.k)
    out: list[ScheduleViolation] = []

    for b in range(1, s.total_blocks + 1):
        by_layer: dict[int, list[tuple[int, int]]] = {}
        for i in range(1, s.T):
            sent = s.tx.get((b, i))
            if sent is None:
                out.append(ScheduleViolation("window", b, i, None, None, "no transmission"))
                continue
            layers = [j for j, _ in sent]
            if layers != list(view.window(i)):
                out.append(ScheduleViolation(
                    "window", b, i, None, None,
                    f"sends layers {layers}, window is {list(view.window(i))}"))
            for j, m in sent:
                by_layer.setdefault(j, []).append((i, m))

        for j, senders in sorted(by_layer.items()):
            expected = _message(b, j, s.B)
            if any(m != expected for _, m in senders):
                detail = ", ".join(f"node {i} sends {m}" for i, m in senders)
                out.append(ScheduleViolation(
                    "coherence", b, None, j, expected,
                    f"expected message {expected} on every sender: {detail}"))

        for i in range(2, s.T):
            for j, m in s.tx.get((b, i), ()):
                if m == NULL:
                    continue
                window = s.decode_window.get((i, m))
                if b < m + i - 1 or window is None or window[1] >= b:
                    out.append(ScheduleViolation(
                        "causality", b, i, j, m,
                        f"forwarded before decoding completes (window {window})"))

    for m in range(1, s.B + 1):
        need = m + s.T - 2
        window = s.decode_window.get((s.T, m))
        if need > s.total_blocks or window is None or window[1] != need:
            out.append(ScheduleViolation(
                "drain", None, s.T, None, m,
                f"destination needs block {need}, schedule has {s.total_blocks}"))
    return out


def effective_rate_factor(T: int, B: int) -> Fraction:
    """Share of channel uses carrying new data: B / (B + T - 2)."""
    if T < 2 or B < 1:
        raise UsageError(f"need T >= 2 and B >= 1, got T={T}, B={B}")
    return Fraction(B, B + T - 2)


def _cell(sent) -> str:
    return "+".join(f"u{j}(w^{m})" if m != NULL else f"u{j}(∅)" for j, m in sent)


def render_schedule(s: BlockSchedule, first: int = 1, last: int | None = None) -> str:
    """Fixed-width table: one row per transmitting node, one column per block."""
    last = s.total_blocks if last is None else last
    if not 1 <= first <= last <= s.total_blocks:
        raise UsageError(f"block range {first}..{last} outside 1..{s.total_blocks}")
    blocks = range(first, last + 1)
    header = ["node"] + [f"b={b}" for b in blocks]
    rows = [[str(i)] + [_cell(s.tx[b, i]) for b in blocks] for i in range(1, s.T)]
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
             for r in [header, *rows]]
    return "\n".join(lines) + "\n"
