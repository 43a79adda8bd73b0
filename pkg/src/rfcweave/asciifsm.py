"""Parser for box-and-arrow ASCII state diagrams.

Supported dialect: rectangular "+--+" boxes with "|" sides; paths drawn with
"-", "|", diagonals "\\" and "/", orthogonal bends and crossings at "+";
arrowheads "<", ">", "^", "v"/"V" at the target end; single-line labels
placed near their path ("event / action" convention).  Anything outside the
dialect raises UnparseableDiagram instead of guessing: the parsed figure is
used as ground truth, so a wrong parse is worse than no parse.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyName, UnparseableDiagram
from .graph import (
    GroundedSpan,
    State,
    SummaryGraph,
    Transition,
    canonicalize_state_name,
)

N, S, E, W = (-1, 0), (1, 0), (0, 1), (0, -1)
NE, NW, SE, SW = (-1, 1), (-1, -1), (1, 1), (1, -1)
_ORTHOGONAL = (N, S, E, W)

# movement directions each path character carries
_CONNECT = {
    "-": (E, W),
    "|": (N, S),
    "\\": (SE, NW),
    "/": (SW, NE),
}
# movement directions that may terminate in each arrowhead
_HEAD_IN = {
    ">": (E,),
    "<": (W,),
    "^": (N, NE, NW),
    "v": (S, SE, SW),
    "V": (S, SE, SW),
}
_PATH_CHARS = set("-|\\/+")
_ARROW_CHARS = set("<>^vV")
_LABEL_DISTANCE = 2
_MAX_STEPS = 100_000


@dataclass(frozen=True)
class FsmNode:
    name: str
    rect: tuple[int, int, int, int]  # top, left, bottom, right (inclusive)


@dataclass(frozen=True)
class FsmEdge:
    source: str
    target: str
    label: str
    path: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AsciiFsm:
    nodes: tuple[FsmNode, ...]
    edges: tuple[FsmEdge, ...]
    source_span: tuple[int, int]


class _Grid:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        self.height = len(self.lines)
        self.width = max((len(line) for line in self.lines), default=0)

    def at(self, r: int, c: int) -> str:
        if 0 <= r < self.height and 0 <= c < len(self.lines[r]):
            return self.lines[r][c]
        return " "


def _opposite(d: tuple[int, int]) -> tuple[int, int]:
    return (-d[0], -d[1])


def _find_boxes(grid: _Grid) -> list[tuple[int, int, int, int]]:
    boxes: list[tuple[int, int, int, int]] = []
    claimed: set[tuple[int, int]] = set()
    for r in range(grid.height):
        for c in range(grid.width):
            if grid.at(r, c) != "+" or (r, c) in claimed:
                continue
            # smallest '+' to the right along a '-' run
            c2 = None
            cc = c + 1
            while grid.at(r, cc) == "-":
                cc += 1
            if grid.at(r, cc) == "+" and cc > c + 1:
                c2 = cc
            if c2 is None:
                continue
            r2 = None
            rr = r + 1
            while grid.at(rr, c) == "|":
                rr += 1
            if grid.at(rr, c) == "+" and rr > r + 1:
                r2 = rr
            if r2 is None:
                continue
            # validate the remaining two sides
            if grid.at(r2, c2) != "+":
                continue
            if not all(grid.at(r2, x) == "-" for x in range(c + 1, c2)):
                continue
            if not all(grid.at(y, c2) == "|" for y in range(r + 1, r2)):
                continue
            boxes.append((r, c, r2, c2))
            for y in range(r, r2 + 1):
                for x in range(c, c2 + 1):
                    claimed.add((y, x))
    for i, a in enumerate(boxes):
        for b in boxes[i + 1 :]:
            if a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]:
                raise UnparseableDiagram(
                    f"overlapping boxes at rows {a[0]} and {b[0]}", a[0], a[1]
                )
    return boxes


def _box_name(grid: _Grid, rect: tuple[int, int, int, int]) -> str:
    r1, c1, r2, c2 = rect
    parts = []
    for r in range(r1 + 1, r2):
        row_text = "".join(grid.at(r, c) for c in range(c1 + 1, c2)).strip()
        if row_text:
            parts.append(row_text)
    raw = " ".join(parts)
    try:
        return canonicalize_state_name(raw)
    except EmptyName:
        raise UnparseableDiagram(f"box at row {r1} has no name", r1, c1) from None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.grid = _Grid(text)
        self.rects = _find_boxes(self.grid)
        if not self.rects:
            raise UnparseableDiagram("no state boxes found", 0, 0)
        self.names = [_box_name(self.grid, rect) for rect in self.rects]
        self.border: dict[tuple[int, int], int] = {}
        self.inside: set[tuple[int, int]] = set()
        for idx, (r1, c1, r2, c2) in enumerate(self.rects):
            for r in range(r1, r2 + 1):
                for c in range(c1, c2 + 1):
                    self.inside.add((r, c))
                    if r in (r1, r2) or c in (c1, c2):
                        self.border[(r, c)] = idx

    # -- path tracing --------------------------------------------------------

    def _can_enter(self, pos: tuple[int, int], moving: tuple[int, int]) -> bool:
        if pos in self.border:
            return True
        ch = self.grid.at(*pos)
        if ch == "+":
            return moving in _ORTHOGONAL
        if ch in _CONNECT:
            return moving in _CONNECT[ch]
        if ch in _HEAD_IN:
            # pass through the counter-arrow of a bidirectional edge
            return moving == {">": E, "<": W, "^": N, "v": S, "V": S}[ch]
        return False

    def _head_incoming(self, r: int, c: int, ch: str) -> tuple[int, int]:
        candidates = []
        for d in _HEAD_IN[ch]:
            behind = (r - d[0], c - d[1])
            if self._can_enter(behind, d) and behind not in self.border:
                candidates.append(d)
            elif behind in self.border:
                candidates.append(d)
        if not candidates:
            raise UnparseableDiagram("dangling arrowhead", r, c)
        if len(candidates) > 1:
            raise UnparseableDiagram("ambiguous arrowhead attachment", r, c)
        return candidates[0]

    def _trace(self, head: tuple[int, int], incoming: tuple[int, int]) -> tuple[int, list[tuple[int, int]]]:
        """Walk backward from an arrowhead to the source box border."""
        path = [head]
        pos = head
        back = _opposite(incoming)
        for _ in range(_MAX_STEPS):
            nxt = (pos[0] + back[0], pos[1] + back[1])
            if nxt in self.border:
                return self.border[nxt], path
            ch = self.grid.at(*nxt)
            if ch == "+":
                path.append(nxt)
                options = []
                for d in _ORTHOGONAL:
                    if d == _opposite(back):
                        continue
                    probe = (nxt[0] + d[0], nxt[1] + d[1])
                    if self._can_enter(probe, d):
                        options.append(d)
                if back in options:
                    pass  # straight through a crossing
                elif len(options) == 1:
                    back = options[0]
                else:
                    raise UnparseableDiagram(
                        "ambiguous junction", nxt[0], nxt[1]
                    )
                pos = nxt
                continue
            if ch in _CONNECT and back in _CONNECT[ch]:
                path.append(nxt)
                pos = nxt
                continue
            if ch in _HEAD_IN and back == {">": E, "<": W, "^": N, "v": S, "V": S}[ch]:
                path.append(nxt)  # the other head of a bidirectional arrow
                pos = nxt
                continue
            raise UnparseableDiagram(
                f"path breaks at {ch!r}", nxt[0], nxt[1]
            )
        raise UnparseableDiagram("path does not terminate", head[0], head[1])

    def _find_edges(self) -> list[tuple[int, int, list[tuple[int, int]]]]:
        edges = []
        for r in range(self.grid.height):
            for c in range(self.grid.width):
                ch = self.grid.at(r, c)
                if ch not in _ARROW_CHARS or (r, c) in self.inside:
                    continue
                if ch in ("v", "V") and not self._looks_like_arrow(r, c, ch):
                    continue
                d = self._head_direction(r, c, ch)
                if d is None:
                    continue
                incoming = self._head_incoming(r, c, ch)
                source_idx, path = self._trace((r, c), incoming)
                target_idx = self._target_of(r, c, ch)
                edges.append((source_idx, target_idx, path))
        return edges

    def _head_direction(self, r: int, c: int, ch: str) -> tuple[int, int] | None:
        return {">": E, "<": W, "^": N, "v": S, "V": S}[ch]

    def _looks_like_arrow(self, r: int, c: int, ch: str) -> bool:
        """A v/V is an arrowhead only when a box border sits right below and
        a path cell sits behind it; letters inside labels stay text."""
        below = (r + 1, c)
        if below not in self.border:
            return False
        for d in _HEAD_IN[ch]:
            behind = (r - d[0], c - d[1])
            if behind in self.border:
                return True  # box-to-adjacent-box edge with no path cells
            bch = self.grid.at(*behind)
            if bch in _CONNECT and d in _CONNECT[bch]:
                return True
            if bch == "+":
                return True
        return False

    def _target_of(self, r: int, c: int, ch: str) -> int:
        d = self._head_direction(r, c, ch)
        probe = (r + d[0], c + d[1])
        if probe not in self.border:
            raise UnparseableDiagram("arrowhead does not touch a box", r, c)
        return self.border[probe]

    # -- labels ---------------------------------------------------------------

    def _text_runs(self, path_cells: set[tuple[int, int]]) -> list[tuple[int, int, int, str]]:
        """Maximal per-row runs of non-path text, bridging single spaces.
        Returns (row, col_start, col_end, text)."""
        runs = []
        for r in range(self.grid.height):
            cols = [
                c
                for c in range(self.grid.width)
                if self.grid.at(r, c) != " "
                and (r, c) not in self.inside
                and (r, c) not in path_cells
            ]
            if not cols:
                continue
            group = [cols[0]]
            for c in cols[1:]:
                if c - group[-1] <= 2:
                    group.append(c)
                else:
                    runs.append(self._mk_run(r, group))
                    group = [c]
            runs.append(self._mk_run(r, group))
        return [run for run in runs if any(ch.isalnum() for ch in run[3])]

    def _mk_run(self, r: int, cols: list[int]) -> tuple[int, int, int, str]:
        text = "".join(self.grid.at(r, c) for c in range(cols[0], cols[-1] + 1))
        return (r, cols[0], cols[-1], text)

    @staticmethod
    def _run_cells(run: tuple[int, int, int, str]) -> list[tuple[int, int]]:
        r, c1, c2, _ = run
        return [(r, c) for c in range(c1, c2 + 1)]

    @staticmethod
    def _cheb(a: tuple[int, int], b: tuple[int, int]) -> int:
        return max(abs(a[0] - b[0]), abs(a[1] - b[1]))

    def _attach_labels(
        self, edges: list[tuple[int, int, list[tuple[int, int]]]]
    ) -> list[str]:
        all_path_cells = {cell for _s, _t, path in edges for cell in path}
        runs = self._text_runs(all_path_cells)
        pairs = []
        for run_idx, run in enumerate(runs):
            run_cells = self._run_cells(run)
            for edge_idx, (_s, _t, path) in enumerate(edges):
                dist = min(
                    self._cheb(rc, pc) for rc in run_cells for pc in path
                )
                if dist > _LABEL_DISTANCE:
                    continue
                mid = path[len(path) // 2]
                mid_dist = min(self._cheb(rc, mid) for rc in run_cells)
                pairs.append((dist, mid_dist, run[0], run[1], run_idx, edge_idx))
        pairs.sort()
        labels = [""] * len(edges)
        used_runs: set[int] = set()
        for _dist, _mid, _r, _c, run_idx, edge_idx in pairs:
            if run_idx in used_runs or labels[edge_idx]:
                continue
            used_runs.add(run_idx)
            labels[edge_idx] = " ".join(runs[run_idx][3].split())
        self._reject_untraced_lines(all_path_cells, runs)
        return labels

    def _reject_untraced_lines(
        self,
        path_cells: set[tuple[int, int]],
        runs: list[tuple[int, int, int, str]],
    ) -> None:
        """A straight run of 3+ line characters that no edge claimed means a
        connector without an arrowhead; refuse rather than drop it."""
        run_cells = {cell for run in runs for cell in self._run_cells(run)}
        for r in range(self.grid.height):
            streak: list[tuple[int, int]] = []
            for c in range(self.grid.width + 1):
                ch = self.grid.at(r, c)
                cell = (r, c)
                if (
                    ch in ("-",)
                    and cell not in self.inside
                    and cell not in path_cells
                    and cell not in run_cells
                ):
                    streak.append(cell)
                else:
                    if len(streak) >= 3:
                        raise UnparseableDiagram(
                            "horizontal line without arrowhead", streak[0][0], streak[0][1]
                        )
                    streak = []
        for c in range(self.grid.width):
            vstreak: list[tuple[int, int]] = []
            for r in range(self.grid.height + 1):
                ch = self.grid.at(r, c)
                cell = (r, c)
                if (
                    ch == "|"
                    and cell not in self.inside
                    and cell not in path_cells
                    and cell not in run_cells
                ):
                    vstreak.append(cell)
                else:
                    if len(vstreak) >= 3:
                        raise UnparseableDiagram(
                            "vertical line without arrowhead", vstreak[0][0], vstreak[0][1]
                        )
                    vstreak = []

    def parse(self) -> AsciiFsm:
        raw_edges = self._find_edges()
        labels = self._attach_labels(raw_edges)
        nodes = tuple(
            FsmNode(name=self.names[i], rect=self.rects[i])
            for i in range(len(self.rects))
        )
        edges = tuple(
            FsmEdge(
                source=self.names[s],
                target=self.names[t],
                label=labels[i],
                path=tuple(path),
            )
            for i, (s, t, path) in enumerate(raw_edges)
        )
        return AsciiFsm(nodes=nodes, edges=edges, source_span=(0, len(self.text)))


def parse_diagram(text: str) -> AsciiFsm:
    """Parse one figure's text into nodes and directed labeled edges."""
    return _Parser(text).parse()


def to_summary_graph(
    fsm: AsciiFsm,
    rfc_id: str,
    document_text: str | None = None,
    span_offset: int = 0,
) -> SummaryGraph:
    """Reference graph from a parsed figure: every edge is fsm_section with
    provenance covering the figure itself.  Labels follow the
    "event / action" convention."""
    states: dict[str, State] = {}
    for node in fsm.nodes:
        states.setdefault(node.name, State(name=node.name, kind="normal"))
    span = (span_offset + fsm.source_span[0], span_offset + fsm.source_span[1])
    if document_text is not None:
        quote = document_text[span[0] : span[1]]
    else:
        quote = ""
        span = fsm.source_span
    provenance = (("fsm_figure", (GroundedSpan(span=span, quote=quote, match_kind="exact", similarity=1.0),)),)

    transitions: dict[tuple[str, str, str], Transition] = {}
    for edge in fsm.edges:
        parts = [p.strip() for p in edge.label.split("/")]
        event = parts[0]
        actions = tuple(p for p in parts[1:] if p)
        key = (edge.source, edge.target, event)
        if key in transitions:
            continue
        transitions[key] = Transition(
            source=edge.source,
            target=edge.target,
            event=event,
            actions=actions,
            origin="fsm_section",
            provenance=provenance,
        )
    return SummaryGraph(
        rfc_id=rfc_id,
        states=tuple(sorted(states.values(), key=lambda s: s.name)),
        transitions=tuple(
            sorted(transitions.values(), key=lambda t: (t.source, t.target, t.event))
        ),
    )


def merge_reference_graphs(graphs: list[SummaryGraph], rfc_id: str) -> tuple[SummaryGraph, int]:
    """Union of several figures' graphs; duplicate transitions are merged.
    Returns the merged graph and how many duplicates were dropped."""
    states: dict[str, State] = {}
    transitions: dict[tuple[str, str, str], Transition] = {}
    duplicates = 0
    for g in graphs:
        for s in g.states:
            states.setdefault(s.name, s)
        for t in g.transitions:
            key = (t.source, t.target, t.event)
            if key in transitions:
                duplicates += 1
                continue
            transitions[key] = t
    merged = SummaryGraph(
        rfc_id=rfc_id,
        states=tuple(sorted(states.values(), key=lambda s: s.name)),
        transitions=tuple(
            sorted(transitions.values(), key=lambda t: (t.source, t.target, t.event))
        ),
    )
    return merged, duplicates
