"""Search and enumeration limits.

기본값은 데스크 규모(carrier ≤ 4, clone ≤ 100000) 기준이다. 환경 변수
``PERMUTAB_CAP`` 하나로 clone/search 상한을 동시에 덮어쓸 수 있다.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import ConfigError

__all__ = [
    "CAP_ENV_VAR",
    "DEFAULT_CLONE_CAP",
    "DEFAULT_MAX_RELATION_CARRIER",
    "DEFAULT_SEARCH_CANDIDATE_CAP",
    "Limits",
]

CAP_ENV_VAR = "PERMUTAB_CAP"
DEFAULT_CLONE_CAP = 100_000
DEFAULT_MAX_RELATION_CARRIER = 4
DEFAULT_SEARCH_CANDIDATE_CAP = 2_000_000


@dataclass(frozen=True)
class Limits:
    """Bounds applied by every exhaustive procedure.

    Args:
        clone_cap: maximum number of ternary term operations kept by clone saturation.
        max_relation_carrier: largest carrier on which relations are enumerated.
        search_candidate_cap: maximum number of search nodes the model finder visits.
        search_time_budget: optional wall-clock budget for model search, in seconds.
        workers: process count for fan-out points (1 = run inline).
    """

    clone_cap: int = DEFAULT_CLONE_CAP
    max_relation_carrier: int = DEFAULT_MAX_RELATION_CARRIER
    search_candidate_cap: int = DEFAULT_SEARCH_CANDIDATE_CAP
    search_time_budget: Optional[float] = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.clone_cap < 1 or self.search_candidate_cap < 1:
            raise ConfigError("caps must be positive integers")
        if self.max_relation_carrier < 1:
            raise ConfigError("max_relation_carrier must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.search_time_budget is not None and self.search_time_budget <= 0:
            raise ConfigError("search_time_budget must be positive")

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Limits":
        env = os.environ if environ is None else environ
        raw = env.get(CAP_ENV_VAR, "").strip()
        if not raw:
            return cls()
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from exc
        logging.debug("%s=%d overrides clone and search caps", CAP_ENV_VAR, cap)
        return cls(clone_cap=cap, search_candidate_cap=cap)

    def with_overrides(self, **changes: object) -> "Limits":
        """Copy with the non-``None`` entries of ``changes`` applied."""
        applied = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **applied) if applied else self
