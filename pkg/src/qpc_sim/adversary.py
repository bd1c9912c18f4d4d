"""Attack strategies, their analytic detection rates, and privacy audits.

Two families of adversary are modeled. Active ones measure qudits in flight
and resend the collapsed state (an outsider doing this on every link, or one
of the third parties doing it on the links it does not already control).
Passive ones just read the public classical bus. On top of that, coalition
views and a brute-force support analysis quantify what any allowed group of
roles can infer about a single party's secret.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import OUTSIDER, PUBLIC, Transcript
from .protocol import (
    ProtocolParams,
    SOLO_TP_ROLE,
    TP1_ROLE,
    TP2_ROLE,
    Variant,
    pad_sum_range,
    party_role,
    run_one_tp_protocol,
    run_two_tp_protocol,
)
from .qudit import Basis, ParameterError, QuditState, measure

_TP_ROLES = frozenset({TP1_ROLE, TP2_ROLE, SOLO_TP_ROLE})
_PARTY_RE = re.compile(r"^P\d+$")
_FIRST_HOP_RE = re.compile(r"^TP1->P\d+$")
_SECOND_HOP_RE = re.compile(r"^P\d+->TP2$")


class AttackKind(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND_FIXED = "intercept-resend-fixed"
    INTERCEPT_RESEND_RANDOM = "intercept-resend-random"
    TP1_MEASURE_RESEND = "tp1-measure-resend"
    TP2_MEASURE_RESEND = "tp2-measure-resend"
    OUTSIDER_PASSIVE_CLASSICAL = "outsider-passive-classical"


#: Kinds that measure qudits in flight (the rest are passive).
_ACTIVE_KINDS = frozenset(
    {
        AttackKind.INTERCEPT_RESEND_FIXED,
        AttackKind.INTERCEPT_RESEND_RANDOM,
        AttackKind.TP1_MEASURE_RESEND,
        AttackKind.TP2_MEASURE_RESEND,
    }
)


@dataclass(frozen=True)
class AttackStrategy:
    """One adversary configuration: what it does and, for fixed-basis taps, where it measures."""

    kind: AttackKind
    basis: Basis | None = None

    def __post_init__(self) -> None:
        if self.kind is AttackKind.INTERCEPT_RESEND_FIXED:
            if self.basis is None:
                raise ParameterError("a fixed-basis intercept-resend strategy needs a basis")
        elif self.basis is not None:
            raise ParameterError(f"{self.kind.value} takes no basis argument")

    @property
    def owner(self) -> str:
        """Role whose transcript view records this strategy's tap results."""
        if self.kind is AttackKind.TP1_MEASURE_RESEND:
            return TP1_ROLE
        if self.kind is AttackKind.TP2_MEASURE_RESEND:
            return TP2_ROLE
        return OUTSIDER

    @property
    def active(self) -> bool:
        return self.kind in _ACTIVE_KINDS

    def taps_link(self, link_label: str) -> bool:
        """Whether this strategy measures qudits crossing the given link.

        Outsider intercept-resend taps every quantum link. The insider cases
        tap exactly the links their role does not terminate: the preparing TP
        taps the encoded second hop, the measuring TP taps the first hop.
        Neither pattern matches the single-TP variant's links — there the TP
        already terminates both hops.
        """
        if self.kind in (AttackKind.INTERCEPT_RESEND_FIXED, AttackKind.INTERCEPT_RESEND_RANDOM):
            return "->" in link_label
        if self.kind is AttackKind.TP1_MEASURE_RESEND:
            return _SECOND_HOP_RE.match(link_label) is not None
        if self.kind is AttackKind.TP2_MEASURE_RESEND:
            return _FIRST_HOP_RE.match(link_label) is not None
        return False

    def _measurement_basis(self, rng: np.random.Generator) -> Basis:
        if self.kind is AttackKind.INTERCEPT_RESEND_FIXED:
            assert self.basis is not None
            return self.basis
        if self.kind is AttackKind.INTERCEPT_RESEND_RANDOM:
            return Basis.FOURIER if int(rng.integers(0, 2)) else Basis.COMPUTATIONAL
        # both insider cases measure in the computational basis
        return Basis.COMPUTATIONAL

    def tap(
        self,
        state: QuditState,
        link_label: str,
        position: int,
        rng: np.random.Generator,
        transcript: Transcript | None = None,
    ) -> QuditState:
        """Measure-and-resend one in-flight qudit; passive strategies forward untouched."""
        if not self.active:
            return state
        basis = self._measurement_basis(rng)
        outcome = measure(state, basis, rng)
        if transcript is not None:
            transcript.record(
                {self.owner},
                "tap",
                link=link_label,
                position=position,
                basis=basis.value,
                outcome=outcome.value,
            )
        return outcome.post_state


_STRATEGIES: dict[str, AttackStrategy] = {
    "none": AttackStrategy(AttackKind.NONE),
    "ir-fixed-t1": AttackStrategy(AttackKind.INTERCEPT_RESEND_FIXED, Basis.COMPUTATIONAL),
    "ir-fixed-t2": AttackStrategy(AttackKind.INTERCEPT_RESEND_FIXED, Basis.FOURIER),
    "ir-random": AttackStrategy(AttackKind.INTERCEPT_RESEND_RANDOM),
    "tp1-mr": AttackStrategy(AttackKind.TP1_MEASURE_RESEND),
    "tp2-mr": AttackStrategy(AttackKind.TP2_MEASURE_RESEND),
    "outsider-classical": AttackStrategy(AttackKind.OUTSIDER_PASSIVE_CLASSICAL),
}

ATTACK_IDS: tuple[str, ...] = tuple(_STRATEGIES)


def strategy_from_id(attack_id: str) -> AttackStrategy:
    """Look up a strategy by its stable id (the ids the CLI accepts)."""
    try:
        return _STRATEGIES[attack_id]
    except KeyError:
        raise ParameterError(f"unknown attack id {attack_id!r}; valid ids: {', '.join(ATTACK_IDS)}") from None


def attack_id_of(strategy: AttackStrategy) -> str:
    for attack_id, known in _STRATEGIES.items():
        if known == strategy:
            return attack_id
    raise ParameterError(f"strategy {strategy} has no registered id")


def apply_tap(
    strategy: AttackStrategy,
    qudit: QuditState,
    link_id: str,
    rng: np.random.Generator,
    position: int = 0,
    transcript: Transcript | None = None,
) -> QuditState:
    """Pass one qudit through the strategy's tap on ``link_id``.

    Passive strategies return the state unchanged; active ones must actually
    tap the named link.
    """
    if strategy.active and not strategy.taps_link(link_id):
        raise ParameterError(f"strategy {attack_id_of(strategy)} does not tap link {link_id!r}")
    return strategy.tap(qudit, link_id, position, rng, transcript)


# --------------------------------------------------------------------------
# detection analytics
# --------------------------------------------------------------------------

def _flag_probability(strategy: AttackStrategy, d: int, prepared: Basis) -> float:
    """Chance that one decoy prepared in ``prepared`` is flagged by its check.

    A measure-resend in the preparation basis is invisible; in the conjugate
    basis the resent state is unbiased over the checked basis, so the verifier
    sees the prepared index again with probability exactly 1/d.
    """
    mismatch = 1.0 - 1.0 / d
    if strategy.kind is AttackKind.INTERCEPT_RESEND_FIXED:
        return mismatch if prepared is not strategy.basis else 0.0
    if strategy.kind is AttackKind.INTERCEPT_RESEND_RANDOM:
        return 0.5 * mismatch
    if strategy.kind in (AttackKind.TP1_MEASURE_RESEND, AttackKind.TP2_MEASURE_RESEND):
        return mismatch if prepared is Basis.FOURIER else 0.0
    raise ParameterError(f"no per-decoy detection probability for {strategy.kind.value}")


def per_decoy_detection_probability(
    strategy: AttackStrategy, d: int, decoy_basis: Basis | None = None
) -> float:
    """Analytic probability that one decoy flags the strategy.

    With ``decoy_basis=None`` the decoy is uniformly drawn over both bases
    (the distribution used when building transmissions); passing a basis
    restricts to decoys known to be prepared in it, e.g. the Fourier-only
    phase of the second-hop check.
    """
    if d < 2:
        raise ParameterError(f"dimension must be >= 2, got {d}")
    if not strategy.active:
        raise ParameterError(f"{strategy.kind.value} never touches a qudit; no detection probability")
    if decoy_basis is not None:
        return _flag_probability(strategy, d, decoy_basis)
    return 0.5 * (
        _flag_probability(strategy, d, Basis.COMPUTATIONAL) + _flag_probability(strategy, d, Basis.FOURIER)
    )


def tapped_checked_decoys(strategy: AttackStrategy, params: ProtocolParams) -> int:
    """How many checked decoys per run cross a link the strategy taps."""
    if not strategy.active:
        return 0
    per_hop = params.n * params.l
    if strategy.kind in (AttackKind.INTERCEPT_RESEND_FIXED, AttackKind.INTERCEPT_RESEND_RANDOM):
        return 2 * per_hop
    if params.variant is Variant.ONE_TP:
        return 0  # insider taps never match the single-TP links
    return per_hop


def analytic_abort_probability(strategy: AttackStrategy, params: ProtocolParams) -> float:
    """Closed-form run-abort probability at zero error threshold.

    Decoys flag independently, each with the uniform per-decoy probability, so
    a run survives only if every tapped-and-checked decoy stays silent:
    abort = 1 - (1 - p)^D over the D such decoys.
    """
    if params.error_threshold != 0.0:
        raise ParameterError("the analytic abort composition assumes error_threshold = 0")
    count = tapped_checked_decoys(strategy, params)
    if count == 0:
        return 0.0
    p = per_decoy_detection_probability(strategy, params.d)
    return 1.0 - (1.0 - p) ** count


def estimate_detection_rate(
    strategy: AttackStrategy,
    params: ProtocolParams,
    trials: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo abort rate over independent runs, with its binomial standard error.

    Secrets (and the shared key, in the single-TP variant) are redrawn
    uniformly every trial.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    aborts = 0
    for _ in range(trials):
        secrets = [int(s) for s in rng.integers(0, params.r, size=params.n)]
        if params.variant is Variant.TWO_TP:
            _, outcome = run_two_tp_protocol(params, secrets, strategy, rng)
        else:
            key = int(rng.integers(0, params.r))
            _, outcome = run_one_tp_protocol(params, secrets, key, strategy, rng)
        aborts += not outcome.completed
    rate = aborts / trials
    stderr = math.sqrt(rate * (1.0 - rate) / trials)
    return rate, stderr


# --------------------------------------------------------------------------
# coalitions and the brute-force privacy audit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Coalition:
    """A set of colluding roles trying to learn one party's secret.

    Third parties are assumed not to collude with anyone (neither with each
    other nor with a party), so any coalition containing a TP role is that TP
    alone. The target is a 0-based party index outside the coalition.
    """

    members: frozenset[str]
    target: int

    def __post_init__(self) -> None:
        members = frozenset(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ParameterError("a coalition needs at least one member")
        for role in members:
            if role not in _TP_ROLES and not _PARTY_RE.match(role):
                raise ParameterError(f"unknown coalition role {role!r}")
        if members & _TP_ROLES and len(members) > 1:
            raise ParameterError("third parties do not collude: a TP coalition is that TP alone")
        if self.target < 0:
            raise ParameterError(f"target must be a 0-based party index, got {self.target}")
        if party_role(self.target) in members:
            raise ParameterError(f"party {party_role(self.target)} cannot audit its own secret")


@dataclass(frozen=True)
class View:
    """Everything a coalition observed in one run: members' events plus the public bus."""

    events: tuple[dict, ...]
    members: frozenset[str]
    target: int


def coalition_view(transcript: Transcript, coalition: Coalition) -> View:
    """Merge the members' transcript views (public events included once, in order)."""
    header = next((e for e in transcript.events() if e["kind"] == "run_header"), None)
    if header is not None:
        n = header["n"]
        if coalition.target >= n:
            raise ParameterError(f"target index {coalition.target} out of range for n={n}")
        for role in coalition.members:
            if _PARTY_RE.match(role) and int(role[1:]) > n:
                raise ParameterError(f"coalition member {role} does not exist in an n={n} run")
    merged = [
        e
        for e in transcript.events()
        if PUBLIC in e["observers"] or not coalition.members.isdisjoint(e["observers"])
    ]
    return View(events=tuple(merged), members=coalition.members, target=coalition.target)


@dataclass(frozen=True)
class SecretSupport:
    """Candidate values of the target's secret consistent with a view."""

    target: int
    candidates: frozenset[int]


def _observations(view: View) -> dict[str, int]:
    """Numeric facts about the target that the view pins down.

    The ordering announcement is deliberately not extracted: the ranking is
    the protocol's declared output, so the audit measures leakage *beyond* it.
    """
    target = view.target
    obs: dict[str, int] = {}
    for event in view.events:
        kind = event["kind"]
        if kind == "carrier_prep":
            obs["pad"] = event["pads"][target]
            obs["pad_sum"] = event["pad_sum"]
            obs["complement"] = event["complements"][target]
        elif kind == "classical" and event["message"]["kind"] == "pad_announcement":
            obs["complement"] = event["message"]["values"][target]
        elif kind == "carrier_measurement" and event["party"] == target:
            obs["measured"] = event["value"]
        elif kind == "score_computation":
            obs["score"] = event["scores"][target]
        elif kind == "shared_key":
            obs["shared_key"] = event["value"]
    return obs


def secret_support(view: View, params: ProtocolParams) -> SecretSupport:
    """Brute-force the target secrets consistent with the view's numeric facts.

    Enumerates every admissible assignment of the unobserved private values
    (target pad, run constant, shared key) and keeps the secrets some
    assignment explains. Intended for desk-scale parameters only.
    """
    if params.r > 16 or params.d > 64:
        raise ParameterError(
            f"support brute force is limited to r <= 16 and d <= 64, got r={params.r}, d={params.d}"
        )
    obs = _observations(view)
    one_tp = params.variant is Variant.ONE_TP
    pads = [obs["pad"]] if "pad" in obs else list(range(params.r))
    sums = [obs["pad_sum"]] if "pad_sum" in obs else list(pad_sum_range(params))
    if not one_tp:
        keys = [0]
    elif "shared_key" in obs:
        keys = [obs["shared_key"]]
    else:
        keys = list(range(params.r))

    def consistent(secret: int) -> bool:
        for pad in pads:
            for pad_sum in sums:
                complement = pad_sum - pad
                if not 0 <= complement < params.d:
                    continue
                if "complement" in obs and complement != obs["complement"]:
                    continue
                for key in keys:
                    measured = pad + secret + key
                    if measured >= params.d:
                        continue  # impossible on the honest path
                    if "measured" in obs and measured != obs["measured"]:
                        continue
                    if "score" in obs and measured + complement != obs["score"]:
                        continue
                    return True
        return False

    candidates = frozenset(s for s in range(params.r) if consistent(s))
    return SecretSupport(target=view.target, candidates=candidates)
