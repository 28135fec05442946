"""Declarative diagnosis rules over scored water-quality records.

Rules live in a line-oriented text format ("#" starts a comment line):

    rule <priority> "<disease>" reason "<text>" suggest "<text>" \
        when <field> <op> <value> [and <field> <op> <value>]...

Fields come from a closed set (the aggregate wqi, the six sub-indices, and
the six raw inputs), ops are < <= > >= and ``between <lo> <hi>`` (inclusive).
A rule fires when every condition holds; rules are tried in descending
priority and the first match wins. Records matching nothing fall through to
the built-in default, "No Disease" / "Comfortable". A condition on a raw
field the record does not carry evaluates false, so diagnosis is total.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass
from importlib import resources

from .errors import AquagaugeError
from .wqi import WqiRecord

FIELDS = ("wqi", "nph", "ndo", "nbdo", "nec", "nna", "nco", "ph", "do", "bod", "ec", "na", "tc")
OPS = ("<", "<=", ">", ">=", "between")

_SAMPLE_ATTR = {
    "ph": "ph",
    "do": "dissolved_oxygen",
    "bod": "bod",
    "ec": "conductivity",
    "na": "nitrate",
    "tc": "total_coliform",
}
_SUB_ATTR = {"nph", "ndo", "nbdo", "nec", "nna", "nco"}

DEFAULT_RULES_RESOURCE = "default.rules"


class RulesError(AquagaugeError):
    pass


class RuleSyntaxError(RulesError):
    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class DuplicatePriority(RulesError):
    def __init__(self, priority: int):
        super().__init__(f"duplicate rule priority: {priority}")
        self.priority = priority


class UnknownField(RulesError):
    def __init__(self, name: str):
        super().__init__(f"unknown rule field: {name!r}")
        self.name = name


@dataclass(frozen=True)
class Condition:
    field: str
    op: str
    value: float
    hi: float | None = None  # upper bound for 'between'

    def holds(self, value: float | None) -> bool:
        if value is None:
            return False
        if self.op == "<":
            return value < self.value
        if self.op == "<=":
            return value <= self.value
        if self.op == ">":
            return value > self.value
        if self.op == ">=":
            return value >= self.value
        return self.value <= value <= self.hi


@dataclass(frozen=True)
class Rule:
    name: str
    reason: str
    suggestion: str
    priority: int
    conditions: tuple[Condition, ...]


DEFAULT_RULE = Rule(
    name="No Disease",
    reason="Water quality in the comfortable range",
    suggestion="Comfortable",
    priority=-1,
    conditions=(),
)


@dataclass
class RuleSet:
    rules: list[Rule]  # sorted by descending priority
    default_rule: Rule = DEFAULT_RULE


@dataclass
class Diagnosis:
    disease: str
    reason: str
    suggestion: str
    matched_rule_priority: int
    inputs_echo: dict[str, float | None]


def _parse_rule(tokens: list[str], line_no: int) -> Rule:
    def take(expect: str | None = None) -> str:
        if not tokens:
            raise RuleSyntaxError(line_no, f"unexpected end of rule (wanted {expect or 'token'})")
        tok = tokens.pop(0)
        if expect is not None and tok != expect:
            raise RuleSyntaxError(line_no, f"expected {expect!r}, got {tok!r}")
        return tok

    def take_number(what: str) -> float:
        tok = take(None)
        try:
            return float(tok)
        except ValueError:
            raise RuleSyntaxError(line_no, f"{what} must be numeric, got {tok!r}") from None

    take("rule")
    priority_tok = take(None)
    try:
        priority = int(priority_tok)
    except ValueError:
        raise RuleSyntaxError(line_no, f"priority must be an integer, got {priority_tok!r}") from None
    if priority < 0:
        raise RuleSyntaxError(line_no, "priority must be >= 0")
    name = take(None)
    take("reason")
    reason = take(None)
    take("suggest")
    suggestion = take(None)
    take("when")

    conditions: list[Condition] = []
    while True:
        fld = take(None)
        if fld not in FIELDS:
            raise UnknownField(fld)
        op = take(None)
        if op not in OPS:
            raise RuleSyntaxError(line_no, f"unknown operator {op!r}")
        if op == "between":
            lo = take_number("range low")
            hi = take_number("range high")
            if hi < lo:
                raise RuleSyntaxError(line_no, f"empty range: between {lo} {hi}")
            conditions.append(Condition(fld, op, lo, hi))
        else:
            conditions.append(Condition(fld, op, take_number("threshold")))
        if not tokens:
            break
        take("and")
    return Rule(name=name, reason=reason, suggestion=suggestion, priority=priority, conditions=tuple(conditions))


def load_rules(text: str) -> RuleSet:
    """Parse rules text into a validated RuleSet (priorities must be unique)."""
    rules: list[Rule] = []
    seen: set[int] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line, posix=True)
        except ValueError as exc:
            raise RuleSyntaxError(line_no, str(exc)) from exc
        rule = _parse_rule(tokens, line_no)
        if rule.priority in seen:
            raise DuplicatePriority(rule.priority)
        seen.add(rule.priority)
        rules.append(rule)
    rules.sort(key=lambda r: -r.priority)
    return RuleSet(rules=rules)


_default_ruleset_cache: RuleSet | None = None


def default_ruleset() -> RuleSet:
    """The ruleset shipped with the package."""
    global _default_ruleset_cache
    if _default_ruleset_cache is None:
        text = resources.files("aquagauge.data").joinpath(DEFAULT_RULES_RESOURCE).read_text("utf-8")
        _default_ruleset_cache = load_rules(text)
    return _default_ruleset_cache


def _field_value(rec: WqiRecord, name: str) -> float | None:
    if name == "wqi":
        return rec.wqi
    if name in _SUB_ATTR:
        return float(getattr(rec.sub, name))
    if rec.sample is None:
        return None
    return getattr(rec.sample, _SAMPLE_ATTR[name])


def diagnose(rec: WqiRecord, rs: RuleSet) -> Diagnosis:
    """First matching rule wins (descending priority); default otherwise."""
    for rule in rs.rules:
        echo = {c.field: _field_value(rec, c.field) for c in rule.conditions}
        if all(c.holds(echo[c.field]) for c in rule.conditions):
            return Diagnosis(
                disease=rule.name,
                reason=rule.reason,
                suggestion=rule.suggestion,
                matched_rule_priority=rule.priority,
                inputs_echo=echo,
            )
    d = rs.default_rule
    return Diagnosis(
        disease=d.name,
        reason=d.reason,
        suggestion=d.suggestion,
        matched_rule_priority=d.priority,
        inputs_echo={},
    )
