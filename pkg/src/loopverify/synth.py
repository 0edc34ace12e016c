"""Bounded synthesis: scan canonically enumerated controllers for ones
that satisfy a correctness criterion.

The candidate stream is fixed by enumerate_controllers, so for a given
domain, criterion, and max_states the solutions and their order are
reproducible. Worker threads only parallelize candidate checking; hits
are still collected in stream order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Optional

from .controller import Controller, enumerate_controllers
from .exec_epistemic import verify_epistemic
from .exec_exact import (
    Verdict,
    verify_exact,
    verify_goal_mass,
    verify_termination,
    verify_weak,
    verify_weight_threshold,
)
from .theory import Domain

CRITERIA = (
    "def4",
    "def6",
    "termination",
    "def6+termination",
    "weight:K",
    "mass:K",
    "def9",
    "def9:existential",
    "def9:adversarial",
)


class CriterionError(ValueError):
    pass


def _combined(first: Verdict, second: Verdict) -> Verdict:
    for verdict in (first, second):
        if verdict.status != "Holds":
            return verdict
    return Verdict(
        status="Holds",
        witnesses=first.witnesses or second.witnesses,
        note="both criteria hold",
    )


def parse_criterion(
    token: str,
    depth_bound: int = 64,
    poss_mode: str = "belief",
    real_mode: str = "outcome",
) -> tuple[str, Callable]:
    """Map a criterion token to (canonical name, checker).

    The checker has signature (controller, domain, workers=1) -> Verdict.
    Recognized tokens: def4, def6, termination, def6+termination,
    weight:K, mass:K, def9, def9:existential, def9:adversarial.
    """
    token = token.strip()
    if token == "def4":
        return "def4", lambda c, d, workers=1: verify_exact(c, d)
    if token == "def6":
        return "def6", lambda c, d, workers=1: verify_weak(c, d, workers=workers)
    if token == "termination":
        return "termination", lambda c, d, workers=1: verify_termination(c, d)
    if token == "def6+termination":
        def both(c, d, workers=1):
            return _combined(
                verify_weak(c, d, workers=workers), verify_termination(c, d)
            )

        return "def6+termination", both
    if token.startswith("weight:") or token.startswith("mass:"):
        kind, _, raw = token.partition(":")
        try:
            kappa = float(raw)
        except ValueError:
            raise CriterionError(
                f"criterion {token!r} needs a numeric threshold"
            ) from None
        if kind == "weight":
            return token, lambda c, d, workers=1: verify_weight_threshold(
                c, d, kappa, workers=workers
            )
        return token, lambda c, d, workers=1: verify_goal_mass(
            c, d, kappa, workers=workers
        )
    if token == "def9" or token.startswith("def9:"):
        mode = token.partition(":")[2] or "existential"
        if mode not in ("existential", "adversarial"):
            raise CriterionError(f"unknown def9 mode {mode!r}")

        def epistemic(c, d, workers=1):
            return verify_epistemic(
                c,
                d,
                mode=mode,
                depth_bound=depth_bound,
                poss_mode=poss_mode,
                real_mode=real_mode,
                workers=workers,
            )

        return f"def9:{mode}", epistemic
    raise CriterionError(
        f"unknown criterion {token!r}; expected one of {', '.join(CRITERIA)}"
    )


@dataclass
class SynthRequest:
    domain: Domain
    criterion: str
    max_states: int
    limit: int = 1
    depth_bound: int = 64
    workers: int = 1
    poss_mode: str = "belief"
    real_mode: str = "outcome"


@dataclass
class SynthResult:
    criterion: str
    max_states: int
    searched: int
    solutions: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return bool(self.solutions)


def synthesize(request: SynthRequest) -> SynthResult:
    """Scan the canonical candidate stream and collect controllers whose
    verdict is Holds, up to request.limit. Unknown never counts as a hit.
    """
    if request.max_states < 1:
        raise CriterionError("max_states must be at least 1")
    if request.limit < 1:
        raise CriterionError("limit must be at least 1")
    name, checker = parse_criterion(
        request.criterion,
        depth_bound=request.depth_bound,
        poss_mode=request.poss_mode,
        real_mode=request.real_mode,
    )
    result = SynthResult(criterion=name, max_states=request.max_states, searched=0)
    stream = enumerate_controllers(request.domain, request.max_states)
    if request.workers <= 1:
        for candidate in stream:
            result.searched += 1
            verdict = checker(candidate, request.domain)
            if verdict.status == "Holds":
                result.solutions.append(candidate)
                result.verdicts.append(verdict)
                if len(result.solutions) >= request.limit:
                    break
        return result

    batch_size = 64 * request.workers
    with ThreadPoolExecutor(max_workers=request.workers) as pool:
        while True:
            batch = list(islice(stream, batch_size))
            if not batch:
                break
            verdicts = list(
                pool.map(lambda c: checker(c, request.domain, 1), batch)
            )
            stop = False
            for candidate, verdict in zip(batch, verdicts):
                result.searched += 1
                if verdict.status == "Holds":
                    result.solutions.append(candidate)
                    result.verdicts.append(verdict)
                    if len(result.solutions) >= request.limit:
                        stop = True
                        break
            if stop:
                break
    return result
