"""Structured verdicts returned by every verification operation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

__all__ = ["Status", "Severity", "Report", "ELEMENT_KEYS"]


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class Severity(str, Enum):
    NORMAL = "normal"
    # a conclusion failed although its preconditions held
    CRITICAL = "critical"


# Witness keys whose integers are carrier elements or morphisms (rendered with labels in text form).
ELEMENT_KEYS = frozenset(
    {"env", "args", "pair", "pairs", "image", "relation", "values", "seed", "missing",
     "lhs_value", "rhs_value", "subuniverse", "converse_of", "witness_relation",
     "alpha", "beta", "gamma", "delta", "triple", "morphism"}
)

_STATUS_ORDER = {Status.HOLDS: 0, Status.INCONCLUSIVE: 1, Status.FAILS: 2}


@dataclass(frozen=True)
class Report:
    """Pass/fail verdict with an optional, re-runnable witness."""

    check: str
    status: Status
    witness: Optional[Dict[str, Any]] = None
    message: str = ""
    severity: Severity = Severity.NORMAL
    children: Tuple["Report", ...] = field(default_factory=tuple)
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.witness is not None:
            object.__setattr__(self, "witness", _plain(self.witness))
        object.__setattr__(self, "children", tuple(self.children))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @classmethod
    def passed(cls, check: str, message: str = "", **kwargs: Any) -> "Report":
        return cls(check, Status.HOLDS, message=message, **kwargs)

    @classmethod
    def failed(cls, check: str, witness: Mapping[str, Any], message: str = "", **kwargs: Any) -> "Report":
        return cls(check, Status.FAILS, witness=dict(witness), message=message, **kwargs)

    @classmethod
    def inconclusive(cls, check: str, message: str, **kwargs: Any) -> "Report":
        return cls(check, Status.INCONCLUSIVE, message=message, **kwargs)

    @classmethod
    def combine(
        cls,
        check: str,
        children: Iterable["Report"],
        message: str = "",
        labels: Optional[Tuple[str, ...]] = None,
    ) -> "Report":
        kids = tuple(children)
        status = Status.HOLDS
        severity = Severity.NORMAL
        for kid in kids:
            if _STATUS_ORDER[kid.status] > _STATUS_ORDER[status]:
                status = kid.status
            if kid.severity is Severity.CRITICAL:
                severity = Severity.CRITICAL
        return cls(check, status, message=message, severity=severity, children=kids, labels=labels)

    def escalate(self) -> "Report":
        """Same report marked critical when it failed."""
        return replace(self, severity=Severity.CRITICAL) if self.fails else self

    def find(self, check: str) -> Optional["Report"]:
        """Depth-first lookup of a child report by check name."""
        if self.check == check:
            return self
        for kid in self.children:
            hit = kid.find(check)
            if hit is not None:
                return hit
        return None

    # ---- serialisation ---------------------------------------------------- #

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"check": self.check, "status": self.status.value}
        if self.witness is not None:
            payload["witness"] = self.witness
        if self.message:
            payload["message"] = self.message
        if self.severity is not Severity.NORMAL:
            payload["severity"] = self.severity.value
        if self.labels is not None:
            payload["labels"] = list(self.labels)
        if self.children:
            payload["children"] = [kid.to_dict() for kid in self.children]
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Report":
        labels = payload.get("labels")
        return cls(
            check=str(payload["check"]),
            status=Status(payload["status"]),
            witness=payload.get("witness"),
            message=payload.get("message", ""),
            severity=Severity(payload.get("severity", Severity.NORMAL.value)),
            children=tuple(cls.from_dict(kid) for kid in payload.get("children", ())),
            labels=tuple(labels) if labels is not None else None,
        )

    def to_text(self, indent: int = 0) -> str:
        lines: List[str] = []
        self._render(lines, indent, self.labels)
        return "\n".join(lines)

    def _render(self, lines: List[str], indent: int, inherited: Optional[Sequence[str]]) -> None:
        labels = self.labels if self.labels is not None else inherited
        pad = "  " * indent
        flag = " !!" if self.severity is Severity.CRITICAL else ""
        head = f"{pad}[{self.status.value.upper()}]{flag} {self.check}"
        if self.message:
            head += f": {self.message}"
        lines.append(head)
        if self.witness:
            for key, value in self.witness.items():
                shown = _label_value(value, labels) if key in ELEMENT_KEYS else value
                lines.append(f"{pad}    {key} = {shown}")
        for kid in self.children:
            kid._render(lines, indent + 1, labels)


def _plain(value: Any) -> Any:
    """JSON-native copy: tuples become lists, numpy scalars become Python scalars."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


def _label_value(value: Any, labels: Optional[Sequence[str]]) -> Any:
    if labels is None:
        return value
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return labels[value] if 0 <= value < len(labels) else value
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(str(_label_value(v, labels)) for v in value) + "]"
    return value
