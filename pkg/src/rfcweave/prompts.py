"""Prompt templates for the three pipeline stages.

Templates use ``string.Template`` placeholders so literal JSON braces in the
schema block need no escaping.  The first line of every rendered prompt names
the template and version; since request hashes cover the full prompt text,
editing a template automatically invalidates stale fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass
from string import Template

from .errors import MissingBinding

STAGES = ("summarize", "extract", "ground")


@dataclass(frozen=True)
class PromptTemplate:
    stage: str
    version: str
    template_text: str


TRANSITION_SCHEMA = """\
{
  "states": [
    {"name": "<state name>",
     "kind": "normal | grouped | any",
     "members": ["<member state>", "..."],
     "description": "<one sentence>"}
  ],
  "transitions": [
    {"source": "<state name>",
     "target": "<state name>",
     "event": "<triggering event>",
     "conditions": ["<condition>", "..."],
     "actions": ["<action taken>", "..."],
     "origin": "fsm_section | other_text | inferred | recommended",
     "reasoning": "<required when origin is inferred>",
     "citations": ["<segment id>", "..."]}
  ]
}"""

_SUMMARIZE_V1 = """\
template: summarize.v1
You are summarizing one fragment of an RFC so that a later stage can build a
protocol state machine from the summaries alone.

RFC: ${rfc_id}
Section path: ${section_path}
Fragment id: ${fragment_id}

Write a targeted summary of the fragment below. Preserve, with their exact
names and spellings: protocol states, the events that move the protocol
between states, conditions attached to those moves, the actions a host must
or should take, error and reset codes, and timer behavior. If the fragment
contains a state diagram, describe every box and every arrow in it,
including arrow labels. Do not add knowledge that is not in the fragment or
the related context. Plain text, no preamble.

Fragment:
${fragment_text}

Related context (retrieved from elsewhere in the same RFC, for reference
only; the summary must be about the fragment):
${context_excerpts}
"""

_EXTRACT_V1 = """\
template: extract.v1
Below are targeted summaries of fragments of ${rfc_id}, each marked with its
segment id in square brackets. Build the protocol state machine they
describe.

Output strictly valid JSON matching this schema, and nothing else:

${schema}

Rules:
- Include every transition supported by the summaries, including inferred
  and recommended ones.
- Every transition must cite, in "citations", the segment ids it came from;
  a transition with no citation will be discarded.
- origin is "fsm_section" for transitions depicted in the RFC's own state
  diagram, "other_text" for transitions stated in prose outside that
  diagram, "inferred" for transitions you deduced (explain in "reasoning"),
  and "recommended" for optional behavior the RFC merely recommends.
- When several states handle one event identically, you may introduce one
  grouped state with kind "grouped" listing those states in "members".
- Use "any" kind for a wildcard source that applies from every state.

Summaries:
${segments}
"""

# Variant wording: asks for the transitive closure of everything mentioned.
# Kept selectable because it shifts rather than grows the extracted set.
_EXTRACT_V2 = """\
template: extract.v2
Below are targeted summaries of fragments of ${rfc_id}, each marked with its
segment id in square brackets. Extract all transitions mentioned in the
summaries and build the protocol state machine they describe.

Output strictly valid JSON matching this schema, and nothing else:

${schema}

Rules:
- Extract all transitions mentioned in the summaries.
- Every transition must cite, in "citations", the segment ids it came from;
  a transition with no citation will be discarded.
- origin is "fsm_section" for transitions depicted in the RFC's own state
  diagram, "other_text" for transitions stated in prose outside that
  diagram, "inferred" for transitions you deduced (explain in "reasoning"),
  and "recommended" for optional behavior the RFC merely recommends.
- When several states handle one event identically, you may introduce one
  grouped state with kind "grouped" listing those states in "members".
- Use "any" kind for a wildcard source that applies from every state.

Summaries:
${segments}
"""

_REPAIR_V1 = """\
template: repair.v1
Your previous output could not be parsed against the required schema.

Problem: ${problem}

Previous output:
${previous_output}

Resend the complete answer as strictly valid JSON matching this schema, and
nothing else:

${schema}
"""

_GROUND_V1 = """\
template: ground.v1
For each transition listed below, return the verbatim passages of ${rfc_id}
that justify it. Copy passages exactly as they appear in the source text;
do not paraphrase, shorten, or fix whitespace.

Output strictly valid JSON of the shape:
{
  "<transition id>": {
    "<segment id>": ["<verbatim passage>", "..."]
  }
}
Use only the transition ids and segment ids given. If no passage supports a
transition, map its id to an empty object.

Transitions and their source material:
${transitions}
"""

_TEMPLATES: dict[tuple[str, str], PromptTemplate] = {
    ("summarize", "v1"): PromptTemplate("summarize", "v1", _SUMMARIZE_V1),
    ("extract", "v1"): PromptTemplate("extract", "v1", _EXTRACT_V1),
    ("extract", "v2"): PromptTemplate("extract", "v2", _EXTRACT_V2),
    ("repair", "v1"): PromptTemplate("repair", "v1", _REPAIR_V1),
    ("ground", "v1"): PromptTemplate("ground", "v1", _GROUND_V1),
}


def get_template(stage: str, version: str = "v1") -> PromptTemplate:
    try:
        return _TEMPLATES[(stage, version)]
    except KeyError:
        raise MissingBinding(f"no template for stage {stage!r} version {version!r}") from None


def render_prompt(stage: str, bindings: dict[str, str], version: str = "v1") -> str:
    """Deterministic substitution; unbound placeholders raise MissingBinding."""
    template = get_template(stage, version)
    try:
        return Template(template.template_text).substitute(bindings)
    except KeyError as exc:
        raise MissingBinding(
            f"template {stage}.{version} is missing binding {exc.args[0]!r}"
        ) from exc


def render_context_excerpts(excerpts: list[tuple[str, str]]) -> str:
    """Format (fragment_id, text) pairs for the summarize prompt."""
    if not excerpts:
        return "(none)"
    blocks = [f"--- context from {fid} ---\n{text}" for fid, text in excerpts]
    return "\n\n".join(blocks)


def render_segments(segments: list[tuple[str, str]]) -> str:
    """Format (segment_id, summary text) pairs for the extract prompt."""
    return "\n\n".join(f"[{sid}]\n{text}" for sid, text in segments)
