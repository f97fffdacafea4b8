"""Named strategy specifications, e.g. ``onflow:tau=1`` or ``crp:w=0.3/0.7``."""

from dataclasses import dataclass, field

from .costs import DEFAULT_SMOOTHING
from .estimators import (
    BestConstantRebalanced,
    BuyAndHold,
    ConstantRebalancedPortfolio,
    EGPortfolio,
    OnflowPortfolio,
    UniversalPortfolio,
)
from .exceptions import InvalidArgumentError

ALIASES = {
    "onflow": "onflow",
    "eg": "eg",
    "up": "universal",
    "universal": "universal",
    "crp": "crp",
    "best_crp": "best_crp",
    "bcrp": "best_crp",
    "bah": "buy_and_hold",
    "buy_and_hold": "buy_and_hold",
}

# parameter name -> (converter, estimator keyword)
PARAMS = {
    "onflow": {"tau": (float, "tau"), "xi": (float, "xi"), "a": (float, "a"),
               "substeps": (int, "substeps"), "method": (str, "method"), "batch": (int, "batch")},
    "eg": {"eta": (float, "eta")},
    "universal": {"grid": (int, "resolution"), "m": (int, "resolution"), "prior": (str, "prior")},
    "crp": {"w": (lambda s: [float(v) for v in s.split("/")], "weights")},
    "best_crp": {"grid": (int, "resolution")},
    "buy_and_hold": {"asset": (lambda s: int(s) - 1, "initial"),
                     "w": (lambda s: [float(v) for v in s.split("/")], "initial")},
}


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    params: dict = field(default_factory=dict)
    label: str = None

    @property
    def name(self):
        return self.label or self.kind

    def build(self):
        if self.kind == "onflow":
            return OnflowPortfolio(**self.params)
        if self.kind == "eg":
            return EGPortfolio(**self.params)
        if self.kind == "universal":
            return UniversalPortfolio(**self.params)
        if self.kind == "crp":
            return ConstantRebalancedPortfolio(**self.params)
        if self.kind == "best_crp":
            return BestConstantRebalanced(**self.params)
        return BuyAndHold(**self.params)


def parse_strategy(text, defaults=None):
    """Parse ``NAME[:k=v,...]``; ``defaults`` maps kind -> default keywords."""
    head, _, tail = text.strip().partition(":")
    kind = ALIASES.get(head.strip().lower())
    if kind is None:
        raise InvalidArgumentError(f"unknown strategy {head!r}; choose from {', '.join(sorted(ALIASES))}")
    params = dict((defaults or {}).get(kind, {}))
    label = None
    for item in filter(None, (s.strip() for s in tail.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip().lower()
        if not sep:
            raise InvalidArgumentError(f"strategy option {item!r} is not of the form key=value")
        if key == "label":
            label = value.strip()
            continue
        if key not in PARAMS[kind]:
            raise InvalidArgumentError(f"strategy {kind!r} has no option {key!r}")
        convert, keyword = PARAMS[kind][key]
        try:
            params[keyword] = convert(value.strip())
        except ValueError:
            raise InvalidArgumentError(f"bad value for {kind} option {key!r}: {value!r}") from None
    return StrategySpec(kind, params, label or text.strip())


def default_params(xi=0.0, tau=None, eta=0.05, grid=1000, substeps=10, method="rk4",
                   batch=1, a=DEFAULT_SMOOTHING):
    """Per-strategy defaults; Onflow's tau defaults to 0.05 without fees and 1 with."""
    if tau is None:
        tau = 0.05 if xi == 0 else 1.0
    return {
        "onflow": {"tau": tau, "xi": xi, "a": a, "substeps": substeps, "method": method, "batch": batch},
        "eg": {"eta": eta},
        "universal": {"resolution": grid},
        "best_crp": {"resolution": grid},
    }
