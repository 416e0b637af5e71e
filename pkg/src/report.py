# report.py
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional


def sort_key(value: Any) -> str:
    """Deterministic total order on ids and labels of mixed type."""
    return repr(value)


def ordered(values: Iterable[Any]) -> tuple:
    """Deduplicate and sort by `sort_key`."""
    return tuple(sorted(set(values), key=sort_key))


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of a predicate. A false verdict carries a witness naming the
    lexicographically least offending data.
    """
    holds: bool
    witness: Optional[Dict[str, Any]] = None

    def __bool__(self) -> bool:
        return self.holds

    def as_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"holds": self.holds}
        if self.witness is not None:
            result["witness"] = _plain(self.witness)
        return result


PASS = Verdict(True)


def fail(**witness: Any) -> Verdict:
    return Verdict(False, dict(witness))


@dataclass(frozen=True)
class Violation:
    """A violated axiom together with the objects/morphisms witnessing it."""
    axiom: str
    detail: str
    witness: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return {"axiom": self.axiom, "detail": self.detail, "witness": _plain(self.witness)}


def _plain(value: Any) -> Any:
    # JSON-safe rendering of witnesses; tuples and frozensets become lists
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in sorted(value.items(), key=lambda kv: sort_key(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [_plain(v) for v in sorted(value, key=sort_key)]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def plain(value: Any) -> Any:
    """Public JSON-safe rendering used by reports."""
    return _plain(value)
