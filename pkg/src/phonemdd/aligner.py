"""Global edit-distance alignment between phoneme sequences.

Unit costs (match 0, substitute/insert/delete 1). The backtrace is
deterministic: where several operations reach the minimum, the diagonal
(match or substitute) wins over deletion, which wins over insertion.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence


class EditOpKind(Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


class EditOp(NamedTuple):
    kind: EditOpKind
    ref_idx: int | None
    hyp_idx: int | None


class EditCounts(NamedTuple):
    substitutions: int
    deletions: int
    insertions: int
    ref_length: int


@dataclass(frozen=True)
class AlignmentTrace:
    """Edit-operation path; every ref and hyp index is consumed exactly once."""

    ops: tuple[EditOp, ...]

    @property
    def cost(self) -> int:
        return sum(1 for op in self.ops if op.kind is not EditOpKind.MATCH)

    @property
    def ref_length(self) -> int:
        return sum(1 for op in self.ops if op.ref_idx is not None)

    @property
    def hyp_length(self) -> int:
        return sum(1 for op in self.ops if op.hyp_idx is not None)


def align(ref: Sequence[int], hyp: Sequence[int]) -> AlignmentTrace:
    """Minimum-edit-distance trace from ref to hyp. Empty sequences are legal."""
    n, m = len(ref), len(hyp)
    dist = [list(range(m + 1))]
    for i in range(1, n + 1):
        prev = dist[i - 1]
        row = [i] + [0] * m
        r = ref[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (r != hyp[j - 1])
            up = prev[j] + 1
            left = row[j - 1] + 1
            row[j] = diag if diag <= up and diag <= left else (up if up <= left else left)
        dist.append(row)

    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and here == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            kind = EditOpKind.MATCH if ref[i - 1] == hyp[j - 1] else EditOpKind.SUBSTITUTE
            ops.append(EditOp(kind, i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and here == dist[i - 1][j] + 1:
            ops.append(EditOp(EditOpKind.DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(EditOp(EditOpKind.INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return AlignmentTrace(tuple(ops))


def edit_counts(trace: AlignmentTrace) -> EditCounts:
    """Substitution/deletion/insertion totals plus the reference length."""
    s = d = i = 0
    for op in trace.ops:
        if op.kind is EditOpKind.SUBSTITUTE:
            s += 1
        elif op.kind is EditOpKind.DELETE:
            d += 1
        elif op.kind is EditOpKind.INSERT:
            i += 1
    return EditCounts(s, d, i, trace.ref_length)
