"""Graphviz export of summary graphs, plus a small DOT syntax checker."""

from __future__ import annotations

import re

from .graph import SummaryGraph, Transition

# Edge styling by origin class; the highlight view swaps diagram edges to
# gray and emphasizes everything that came from prose or inference.
_EDGE_STYLE = {
    "fsm_section": {"color": "blue"},
    "other_text": {"color": "green"},
    "inferred": {"color": "green", "style": "dashed"},
    "recommended": {"color": "gray", "style": "dashed"},
}
_HIGHLIGHT_STYLE = {
    "fsm_section": {"color": "gray"},
    "other_text": {"color": "green", "penwidth": "2"},
    "inferred": {"color": "green", "style": "dashed", "penwidth": "2"},
    "recommended": {"color": "orange", "style": "dashed", "penwidth": "2"},
}


def _quote(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def _attrs(mapping: dict[str, str]) -> str:
    inner = ", ".join(f"{k}={_quote(v)}" for k, v in mapping.items())
    return f" [{inner}]" if inner else ""


def _edge_label(t: Transition) -> str:
    label = t.event
    if t.conditions:
        label += "\n[" + "; ".join(t.conditions) + "]"
    if t.actions:
        label += "\n/ " + "; ".join(t.actions)
    return label


def export_dot(graph: SummaryGraph, highlight_origin: bool = False) -> str:
    styles = _HIGHLIGHT_STYLE if highlight_origin else _EDGE_STYLE
    lines = [f"digraph {_quote(graph.rfc_id)} {{", "  rankdir=LR;"]
    for s in sorted(graph.states, key=lambda s: s.name):
        attrs: dict[str, str] = {}
        if s.kind == "any":
            attrs = {"shape": "oval", "style": "filled", "fillcolor": "gray80"}
        elif s.kind == "grouped":
            attrs = {
                "shape": "box",
                "label": s.name + "\n{" + ", ".join(s.members) + "}",
            }
        lines.append(f"  {_quote(s.name)}{_attrs(attrs)};")
    for t in sorted(graph.transitions, key=lambda t: (t.source, t.target, t.event)):
        attrs = dict(styles.get(t.origin, {}))
        label = _edge_label(t)
        if label:
            attrs["label"] = label
        lines.append(f"  {_quote(t.source)} -> {_quote(t.target)}{_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- minimal DOT checker -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    \s+
  | "(?:[^"\\]|\\.)*"   # quoted id
  | ->
  | [{}\[\];,=]
  | [A-Za-z_][A-Za-z0-9_]*
  | -?\d+(?:\.\d+)?
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"bad character at offset {pos}: {text[pos]!r}")
        tok = m.group(0)
        if not tok.isspace():
            tokens.append(tok)
        pos = m.end()
    return tokens


def check_dot(text: str) -> list[str]:
    """Validate the digraph subset this package emits; returns problems."""
    try:
        tokens = _tokenize(text)
    except ValueError as exc:
        return [str(exc)]
    problems: list[str] = []
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str | None:
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def is_id(tok: str | None) -> bool:
        if tok is None:
            return False
        return tok.startswith('"') or re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*|-?\d+(\.\d+)?", tok) is not None

    if take() != "digraph":
        return ["expected 'digraph'"]
    if is_id(peek()):
        take()
    if take() != "{":
        return ["expected '{' after digraph header"]

    def parse_attr_list() -> None:
        take()  # '['
        while True:
            tok = peek()
            if tok == "]":
                take()
                return
            if not is_id(tok):
                problems.append(f"bad attribute name {tok!r}")
                take()
                continue
            take()
            if peek() == "=":
                take()
                if not is_id(peek()):
                    problems.append(f"bad attribute value {peek()!r}")
                take()
            if peek() == ",":
                take()

    while True:
        tok = peek()
        if tok is None:
            problems.append("missing closing '}'")
            break
        if tok == "}":
            take()
            break
        if is_id(tok):
            take()
            if peek() == "=":  # graph-level attribute like rankdir=LR
                take()
                if not is_id(peek()):
                    problems.append(f"bad attribute value {peek()!r}")
                take()
            else:
                while peek() == "->":
                    take()
                    if not is_id(peek()):
                        problems.append(f"edge target missing, got {peek()!r}")
                        break
                    take()
                if peek() == "[":
                    parse_attr_list()
            if peek() == ";":
                take()
            continue
        problems.append(f"unexpected token {tok!r}")
        take()
    if pos < len(tokens):
        problems.append(f"trailing tokens after '}}': {tokens[pos:][:3]}")
    return problems
