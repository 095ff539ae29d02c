"""Run configuration and the default list size / threshold formulas."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping, Optional

import mpmath

from .fix import FixParams
from .flaws import FlawParams, Variant
from .graph import Graph

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run.  Output locations are deliberately
    not part of it, so the same configuration written to two places hashes
    the same."""

    graph: Optional[str] = None
    graph_format: Optional[str] = None
    gen: Optional[str] = None
    lists: Optional[str] = None
    uniform_q: Optional[int] = None
    palette: Optional[int] = None
    variant: str = "tf"
    epsilon: float = 0.5
    r: int = 4
    q: Optional[int] = None
    L: Optional[float] = None
    seed: int = 0
    cap: Optional[int] = None
    total_cap: Optional[int] = None
    retries: int = 3
    restarts: int = 10
    enum_budget: int = 100_000
    transcript_mode: str = "raw"

    def __post_init__(self) -> None:
        if (self.graph is None) == (self.gen is None):
            raise ConfigError("give exactly one graph source (a file or a generator spec)")
        if self.lists is not None and self.uniform_q is not None:
            raise ConfigError("give at most one lists source (a file or --uniform-q)")
        if self.variant not in ("tf", "kr"):
            raise ConfigError(f"variant must be 'tf' or 'kr', got {self.variant!r}")
        for name in ("q", "uniform_q", "palette", "cap", "total_cap"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**dict(d))


def default_q(variant: str, delta: int, epsilon: float, r: int) -> int:
    """``ceil((1+eps) D / ln D)`` or ``ceil(200 r D lnln D / ln D)``."""
    with mpmath.workdps(50):
        D = mpmath.mpf(delta)
        if variant == "tf":
            val = (1 + mpmath.mpf(epsilon)) * D / mpmath.log(D)
        else:
            val = 200 * r * D * mpmath.log(mpmath.log(D)) / mpmath.log(D)
        return int(mpmath.ceil(val))


def default_L(variant: str, delta: int, epsilon: float) -> float:
    """``D^(eps/2)`` or ``D^(9/10)``."""
    with mpmath.workdps(50):
        exp = mpmath.mpf(epsilon) / 2 if variant == "tf" else mpmath.mpf(9) / 10
        return float(mpmath.power(delta, exp))


def resolve_params(config: RunConfig, g: Graph) -> tuple[FixParams, dict, list[str]]:
    """Turn a configuration into repair parameters for ``g``.

    Explicit ``q`` and ``L`` win over the formulas.  Returns the parameters,
    a record of every derived value and any warnings.
    """
    delta = g.max_degree
    warnings: list[str] = []
    needs_formula = config.q is None or config.L is None
    if needs_formula and delta <= 1:
        raise ConfigError(f"max degree {delta} is too small for the default formulas; pass --q and --L")
    if needs_formula and config.variant == "kr" and delta <= 2:
        raise ConfigError("the clique-free formulas need max degree at least 3; pass --q and --L")
    q = config.q if config.q is not None else default_q(config.variant, delta, config.epsilon, config.r)
    L = config.L if config.L is not None else default_L(config.variant, delta, config.epsilon)
    if config.variant == "kr" and delta >= 3:
        with mpmath.workdps(30):
            limit = mpmath.log(delta) / (200 * mpmath.log(mpmath.log(delta)))
        if config.r >= limit:
            warnings.append(
                f"r={config.r} >= ln D / (200 lnln D) = {float(limit):.4g}: the list-size bound is weaker than the trivial D+1"
            )
    for w in warnings:
        log.warning(w)
    fp = FlawParams(
        Variant.TRIANGLE_FREE if config.variant == "tf" else Variant.CLIQUE_FREE,
        L,
        epsilon=config.epsilon if config.variant == "tf" else None,
        r=config.r if config.variant == "kr" else None,
    )
    params = FixParams(
        q=q,
        flaw_params=fp,
        max_executions=config.cap,
        transcript_mode=config.transcript_mode,
        seed=config.seed,
        enum_budget=config.enum_budget,
        retries=config.retries,
        total_cap=config.total_cap,
        restarts=config.restarts,
    )
    resolved = {
        "delta": delta,
        "n": g.n,
        "q": q,
        "L": L,
        "q_source": "override" if config.q is not None else "formula",
        "L_source": "override" if config.L is not None else "formula",
        "cap": params.cap_for(g),
        "variant": config.variant,
    }
    log.info("resolved parameters %s", resolved)
    return params, resolved, warnings
