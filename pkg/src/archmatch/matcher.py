"""The two-level matching pipeline.

A requirement (a business interface plus an optional call protocol) is run
against every indexed component: a cheap keyword prefilter, then signature
matching, then trace inclusion of the renamed requirement protocol in the
component's provided protocol.  Components are classified USE / adaptation
candidate / no match and ranked deterministically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import protocol, sigmatch
from .model import Interface
from .protocol import ProtocolExpr
from .sigmatch import ModuleMatch, PartialMatch, TypeLattice

HOLDS = "HOLDS"
FAILS = "FAILS"
NOT_CHECKED = "NOT_CHECKED"

USE = "USE"
ADAPT_CANDIDATE = "ADAPT_CANDIDATE"
NO_MATCH = "NO_MATCH"

NEW = "NEW"
ADAPT = "ADAPT"

_VERDICT_RANK = {USE: 0, ADAPT_CANDIDATE: 1, NO_MATCH: 2}

KIND_WEIGHT = {sigmatch.EXACT: 1.0, sigmatch.PERMUTED: 0.8,
               sigmatch.GENERALIZED: 0.6, sigmatch.SPECIALIZED: 0.4}
PROTOCOL_WEIGHT = {HOLDS: 1.0, NOT_CHECKED: 0.5, FAILS: 0.0}

#: coverage needed for a partial signature match to stay an adaptation candidate
ADAPT_COVERAGE_THRESHOLD = 0.5

_TOKEN_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z0-9])|[A-Z]?[a-z0-9]+|[A-Z]+")


def keyword_tokens(*names: str) -> frozenset[str]:
    """Lowercased camel-case/underscore fragments of the given identifiers."""
    out: set[str] = set()
    for name in names:
        for m in _TOKEN_RE.finditer(name):
            out.add(m.group(0).lower())
    return frozenset(out)


@dataclass(frozen=True)
class Requirement:
    """A new business interface to satisfy, with an optional call protocol."""

    iface: Interface
    required_protocol: ProtocolExpr | None = None
    keywords: frozenset[str] = frozenset()

    @classmethod
    def from_interface(cls, iface: Interface, required_protocol: ProtocolExpr | None = None,
                       keywords: frozenset[str] | None = None) -> "Requirement":
        if keywords is None:
            keywords = keyword_tokens(iface.name, *(m.name for m in iface.all_methods()))
        return cls(iface, required_protocol, keywords)


@dataclass(frozen=True)
class MatchReport:
    component: str
    module_match: ModuleMatch | None
    partial: PartialMatch | None
    protocol_verdict: str  # HOLDS / FAILS / NOT_CHECKED
    counterexample: tuple[str, ...] | None
    verdict: str  # USE / ADAPT_CANDIDATE / NO_MATCH
    score: float

    def sort_key(self):
        return (_VERDICT_RANK[self.verdict], -self.score, self.component)


@dataclass(frozen=True)
class Recommendation:
    action: str  # USE / ADAPT / NEW
    component: str | None = None

    def render(self) -> str:
        return f"{self.action} {self.component}" if self.component else self.action


@dataclass(frozen=True)
class QueryResult:
    reports: tuple[MatchReport, ...]
    recommendation: Recommendation


def score(kind: str | None, name_overlap: float, protocol_verdict: str,
          coverage: float = 1.0) -> float:
    """Deterministic rank in [0, 1]: half signature kind, then name overlap,
    then protocol verdict; partial coverage scales the kind contribution."""
    kind_weight = KIND_WEIGHT[kind] * coverage if kind is not None else 0.0
    return round(0.5 * kind_weight + 0.3 * name_overlap
                 + 0.2 * PROTOCOL_WEIGHT[protocol_verdict], 6)


def prefilter(requirement: Requirement, entries, enabled: bool = True) -> list:
    """Keep entries sharing a keyword token with the requirement.

    Purely an optimization: with no requirement keywords (or when disabled)
    everything is kept.
    """
    entries = sorted(entries, key=lambda e: e.component)
    if not enabled or not requirement.keywords:
        return entries
    return [e for e in entries if e.keywords & requirement.keywords]


def _match_one(requirement: Requirement, entry, lattice: TypeLattice,
               state_limit: int) -> MatchReport:
    provided_iface = Interface(entry.interface_name, (), entry.methods)
    module_match = sigmatch.match_module(requirement.iface, provided_iface, lattice)
    total = len(requirement.iface.all_methods())

    if module_match is not None:
        if requirement.required_protocol is None:
            verdict, protocol_verdict, counterexample = USE, NOT_CHECKED, None
        else:
            mapping = {q: m.provided_method for q, m in module_match.method_map.items()}
            renamed = protocol.rename(requirement.required_protocol, mapping)
            required_auto = protocol.compile(renamed)
            result = protocol.includes(required_auto, entry.provided_automaton, state_limit)
            if result.holds:
                verdict, protocol_verdict, counterexample = USE, HOLDS, None
            else:
                verdict, protocol_verdict = ADAPT_CANDIDATE, FAILS
                counterexample = result.counterexample
        return MatchReport(entry.component, module_match, None, protocol_verdict,
                           counterexample, verdict,
                           score(module_match.overall_kind, module_match.name_overlap(),
                                 protocol_verdict))

    partial = sigmatch.partial_match(requirement.iface, provided_iface, lattice)
    name_overlap = (sum(1 for m in partial.method_map.values() if m.names_equal()) / total
                    if total else 0.0)
    if partial.coverage() >= ADAPT_COVERAGE_THRESHOLD and partial.method_map:
        kind = sigmatch.weakest(m.kind for m in partial.method_map.values())
        return MatchReport(entry.component, None, partial, NOT_CHECKED, None,
                           ADAPT_CANDIDATE,
                           score(kind, name_overlap, NOT_CHECKED, partial.coverage()))
    return MatchReport(entry.component, None, partial, NOT_CHECKED, None, NO_MATCH, 0.0)


def match_requirement(requirement: Requirement, index, lattice: TypeLattice, *,
                      use_prefilter: bool = True,
                      state_limit: int = protocol.DEFAULT_STATE_LIMIT) -> QueryResult:
    """Run the full pipeline against a compiled index.

    `index` is a repo.CompiledIndex (anything with an `entries` mapping of
    component name to index entries works).  Reports are sorted by verdict,
    then score, then component name, so identical inputs give identical output.
    """
    candidates = prefilter(requirement, index.entries.values(), use_prefilter)
    reports = [_match_one(requirement, entry, lattice, state_limit) for entry in candidates]
    reports.sort(key=MatchReport.sort_key)
    if reports and reports[0].verdict == USE:
        recommendation = Recommendation(USE, reports[0].component)
    elif reports and reports[0].verdict == ADAPT_CANDIDATE:
        recommendation = Recommendation(ADAPT, reports[0].component)
    else:
        recommendation = Recommendation(NEW)
    return QueryResult(tuple(reports), recommendation)


def explain(report: MatchReport) -> str:
    """A human-readable narrative for one match report."""
    lines = [f"component {report.component}: {report.verdict} (score {report.score:.2f})"]
    if report.module_match is not None:
        lines.append("  method map:")
        for q, m in sorted(report.module_match.method_map.items()):
            perm = ""
            if m.kind == sigmatch.PERMUTED:
                perm = f" via parameter order {list(m.param_permutation)}"
            lines.append(f"    {q} -> {m.provided_method} [{m.kind}{perm}]")
    elif report.partial is not None and report.partial.method_map:
        lines.append("  partial method map:")
        for q, m in sorted(report.partial.method_map.items()):
            lines.append(f"    {q} -> {m.provided_method} [{m.kind}]")
    lines.append(f"  protocol: {report.protocol_verdict}")
    if report.counterexample is not None:
        calls = " ".join(report.counterexample) if report.counterexample else "(empty trace)"
        lines.append(f"  call sequence the provider does not allow: {calls}")
    if report.verdict == USE:
        lines.append("  signature and protocol requirements are met; "
                     "component can be plugged in")
    elif report.verdict == ADAPT_CANDIDATE:
        if report.partial is not None and report.partial.unmatched:
            missing = ", ".join(report.partial.unmatched)
            lines.append(f"  unmatched requirement methods: {missing}")
        lines.append("  near match; consider adapting this component")
    else:
        if report.partial is not None and report.partial.unmatched:
            first = report.partial.unmatched[0]
            lines.append(f"  no compatible provided method for {first!r}")
        lines.append("  not a viable provider for this requirement")
    return "\n".join(lines)
