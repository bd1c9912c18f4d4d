"""Core of the two comparison protocols over d-level single particles.

Both variants follow the same seven-stage shape: a preparer encodes a random
pad value per party into a computational-basis carrier, pads each carrier with
decoys drawn from the two mutually unbiased bases, and ships it; the party
checks the first hop, shift-encodes its secret onto the carrier, re-decoys, and
ships again; the measuring side checks the second hop in two phases (Fourier
decoys first, then computational), measures the carrier, and announces only the
*ordering* of the per-party scores. Scores differ from the secrets by one
common additive constant, so their ordering is the secrets' ordering while the
values themselves stay masked.

Variant differences: with two third parties the pad complements are broadcast
so the measuring side can form scores; with a single third party the
complements stay internal and every party shifts by an extra pre-shared key.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .channel import (
    PUBLIC,
    ClassicalBus,
    QuantumLink,
    Transcript,
    TransmissionSequence,
    transmit,
)
from .qudit import Basis, ParameterError, QuditState, apply_shift, basis_state, measure

if TYPE_CHECKING:  # pragma: no cover - import only for annotations
    from .adversary import AttackStrategy

TP1_ROLE = "TP1"
TP2_ROLE = "TP2"
SOLO_TP_ROLE = "TP"


def party_role(index: int) -> str:
    """Role id of the index-th comparing party (0-based index, 1-based label)."""
    return f"P{index + 1}"


class Variant(enum.Enum):
    TWO_TP = "two-tp"
    ONE_TP = "one-tp"


@dataclass(frozen=True)
class ProtocolParams:
    """Validated run parameters.

    The dimension bounds are what keep the shift encoding wraparound-free on
    the honest path: pads and secrets both live in [0, r), so the measured
    carrier value is at most 2(r-1) with two third parties, and at most
    3(r-1) when the pre-shared key is added in the single-TP variant.
    """

    variant: Variant
    n: int
    d: int
    r: int
    l: int
    error_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ParameterError(f"at least two comparing parties are required (n >= 2), got n={self.n}")
        if self.r < 1:
            raise ParameterError(f"the secret range needs r >= 1, got r={self.r}")
        if self.l < 1:
            raise ParameterError(f"each transmission needs l >= 1 decoys, got l={self.l}")
        if self.d < 2:
            raise ParameterError(f"qudit dimension must be >= 2, got d={self.d}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ParameterError(f"error_threshold must lie in [0, 1], got {self.error_threshold}")
        if self.variant is Variant.TWO_TP and self.d < 2 * self.r - 1:
            raise ParameterError(f"two-tp requires d >= 2*r - 1 (got d={self.d}, r={self.r})")
        if self.variant is Variant.ONE_TP and self.d < 3 * self.r - 1:
            raise ParameterError(f"one-tp requires d >= 3*r - 1 (got d={self.d}, r={self.r})")


@dataclass(frozen=True)
class SecretVector:
    """The parties' private inputs; entry i belongs to party i."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True)
class SharedKey:
    """Key pre-shared among all parties (single-TP variant); hidden from the TP."""

    value: int


@dataclass(frozen=True)
class CarrierRecord:
    """Preparer-private bookkeeping for one carrier: pad + pad_complement = pad_sum."""

    pad: int
    pad_complement: int
    pad_sum: int

    def __post_init__(self) -> None:
        if self.pad < 0 or self.pad_complement < 0:
            raise ParameterError("pad and pad_complement must be non-negative")
        if self.pad + self.pad_complement != self.pad_sum:
            raise ParameterError(
                f"carrier record inconsistent: {self.pad} + {self.pad_complement} != {self.pad_sum}"
            )


def make_carrier(pad: int, pad_sum: int) -> CarrierRecord:
    """Carrier bookkeeping for a given pad and run constant (complement is forced)."""
    return CarrierRecord(pad=pad, pad_complement=pad_sum - pad, pad_sum=pad_sum)


@dataclass(frozen=True)
class DecoyEntry:
    """One decoy slot: where it sits, which basis prepared it, and the basis index."""

    position: int
    basis: Basis
    index: int


@dataclass(frozen=True)
class DecoySpec:
    """Sender-private recipe of a transmission: decoy entries plus the carrier slot."""

    entries: tuple[DecoyEntry, ...]
    carrier_position: int

    def __post_init__(self) -> None:
        length = len(self.entries) + 1
        positions = {e.position for e in self.entries}
        if not 0 <= self.carrier_position < length:
            raise ParameterError(f"carrier position {self.carrier_position} outside [0, {length})")
        if self.carrier_position in positions or len(positions) != len(self.entries):
            raise ParameterError("decoy and carrier positions must partition the sequence")


@dataclass(frozen=True)
class ComparisonOutcome:
    """Result of one run: either a total preorder over parties or the abort stage.

    ``ranking`` lists 0-based party indices grouped into ties, highest score
    first; ``scores`` are the per-party sums whose ordering it reflects.
    """

    ranking: tuple[tuple[int, ...], ...] | None
    scores: tuple[int, ...] | None
    aborted_at: str | None = None

    def __post_init__(self) -> None:
        if self.aborted_at is None:
            if self.ranking is None or self.scores is None:
                raise ParameterError("a completed outcome carries both ranking and scores")
            if self.ranking != rank_descending(self.scores):
                raise ParameterError("ranking does not match the ordering of the scores")
        elif self.ranking is not None or self.scores is not None:
            raise ParameterError("an aborted outcome carries no ranking or scores")

    @property
    def completed(self) -> bool:
        return self.aborted_at is None


def rank_descending(values: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Total preorder of indices by value, largest first, ties grouped together."""
    groups: dict[int, list[int]] = {}
    for idx, v in enumerate(values):
        groups.setdefault(int(v), []).append(idx)
    return tuple(tuple(groups[v]) for v in sorted(groups, reverse=True))


def pad_sum_range(params: ProtocolParams) -> range:
    """Admissible run constants: any value in [r-1, d-1] keeps every complement in [0, d)."""
    return range(params.r - 1, params.d)


# --------------------------------------------------------------------------
# stage operations
# --------------------------------------------------------------------------

def tp_prepare_carriers(
    params: ProtocolParams, rng: np.random.Generator
) -> tuple[int, tuple[CarrierRecord, ...], list[QuditState]]:
    """Draw the run constant and one pad per party; carrier i starts as |pad_i>."""
    sum_range = pad_sum_range(params)
    pad_sum = int(rng.integers(sum_range.start, sum_range.stop))
    carriers = []
    states = []
    for _ in range(params.n):
        pad = int(rng.integers(0, params.r))
        carriers.append(make_carrier(pad, pad_sum))
        states.append(basis_state(params.d, Basis.COMPUTATIONAL, pad))
    return pad_sum, tuple(carriers), states


def build_transmission(
    carrier_state: QuditState, l: int, rng: np.random.Generator
) -> tuple[TransmissionSequence, DecoySpec]:
    """Hide the carrier among l decoys drawn uniformly from the 2d basis states.

    Each decoy picks its basis and index independently and uniformly; the
    carrier slot is uniform over the l+1 positions. Only the returned
    DecoySpec (sender-private) says which slot is which.
    """
    if l < 1:
        raise ParameterError(f"each transmission needs l >= 1 decoys, got l={l}")
    d = carrier_state.dim
    decoys = []
    for _ in range(l):
        basis = Basis.FOURIER if int(rng.integers(0, 2)) else Basis.COMPUTATIONAL
        decoys.append((basis, int(rng.integers(0, d))))
    carrier_position = int(rng.integers(0, l + 1))
    entries = []
    states = []
    decoy_iter = iter(decoys)
    for pos in range(l + 1):
        if pos == carrier_position:
            states.append(carrier_state)
        else:
            basis, index = next(decoy_iter)
            entries.append(DecoyEntry(position=pos, basis=basis, index=index))
            states.append(basis_state(d, basis, index))
    return TransmissionSequence(states), DecoySpec(entries=tuple(entries), carrier_position=carrier_position)


def _measure_entries(
    entries: Sequence[DecoyEntry], received: TransmissionSequence, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Measure each listed slot in its stated basis, consuming it; returns (position, outcome) pairs."""
    return [(e.position, measure(received.take(e.position), e.basis, rng).value) for e in entries]


def _count_mismatches(entries: Sequence[DecoyEntry], outcomes: Sequence[tuple[int, int]]) -> int:
    return sum(1 for e, (_, value) in zip(entries, outcomes) if value != e.index)


def run_decoy_check(
    entries: Sequence[DecoyEntry], received: TransmissionSequence, rng: np.random.Generator
) -> float:
    """Measure the listed decoys in their preparation bases and return the mismatch fraction.

    Measured slots are consumed from ``received``. An empty entry list checks
    nothing and reports 0.0.
    """
    if not entries:
        return 0.0
    outcomes = _measure_entries(entries, received, rng)
    return _count_mismatches(entries, outcomes) / len(entries)


def encode_secret(carrier_state: QuditState, secret: int, offset: int) -> QuditState:
    """Shift-encode ``secret`` (plus a fixed ``offset``) onto the carrier.

    The protocol's dimension bounds guarantee secret + offset never reaches d
    on the honest path, so the encoded value adds without wraparound.
    """
    if secret < 0 or offset < 0:
        raise ParameterError(f"secret and offset must be non-negative, got {secret} and {offset}")
    shift = secret + offset
    if shift >= carrier_state.dim:
        raise ParameterError(
            f"secret + offset = {shift} would wrap around the dimension d={carrier_state.dim}"
        )
    return apply_shift(carrier_state, shift)


def two_phase_disclosure(spec: DecoySpec) -> tuple[tuple[DecoyEntry, ...], tuple[DecoyEntry, ...]]:
    """Split a decoy recipe into its two disclosure phases: Fourier first, then computational.

    The order is part of the protocol contract — the Fourier phase must be
    checked before any computational positions are revealed.
    """
    fourier = tuple(e for e in spec.entries if e.basis is Basis.FOURIER)
    computational = tuple(e for e in spec.entries if e.basis is Basis.COMPUTATIONAL)
    return fourier, computational


def tp_compute_result(
    measured_values: Sequence[int], pad_complements: Sequence[int]
) -> ComparisonOutcome:
    """Combine measured carrier values with pad complements into scores and rank them.

    Sums are plain integers (no modular reduction); ties stay grouped.
    """
    if len(measured_values) != len(pad_complements):
        raise ParameterError(
            f"got {len(measured_values)} measured values but {len(pad_complements)} complements"
        )
    scores = tuple(int(m) + int(c) for m, c in zip(measured_values, pad_complements))
    return ComparisonOutcome(ranking=rank_descending(scores), scores=scores)


# --------------------------------------------------------------------------
# classical message constructors (transcript JSON shapes)
# --------------------------------------------------------------------------

def decoy_disclosure(transmission: str, phase: str, entries: Sequence[DecoyEntry]) -> dict:
    """Positions and bases of decoys to check; prepared indices stay private."""
    return {
        "kind": "decoy_disclosure",
        "transmission": transmission,
        "phase": phase,
        "entries": [[e.position, e.basis.value] for e in entries],
    }


def measurement_report(transmission: str, outcomes: Sequence[tuple[int, int]]) -> dict:
    return {
        "kind": "measurement_report",
        "transmission": transmission,
        "outcomes": [[p, v] for p, v in outcomes],
    }


def pad_announcement(values: Sequence[int]) -> dict:
    return {"kind": "pad_announcement", "values": [int(v) for v in values]}


def ordering_announcement(ranking: Sequence[Sequence[int]]) -> dict:
    return {"kind": "ordering_announcement", "ranking": [list(group) for group in ranking]}


def abort_message(step: str) -> dict:
    return {"kind": "abort", "step": step}


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------

def _normalize_secrets(secrets: Sequence[int] | SecretVector, params: ProtocolParams) -> tuple[int, ...]:
    values = secrets.values if isinstance(secrets, SecretVector) else tuple(int(s) for s in secrets)
    if len(values) != params.n:
        raise ParameterError(f"expected {params.n} secrets, got {len(values)}")
    for i, s in enumerate(values):
        if not 0 <= s < params.r:
            raise ParameterError(f"every secret must lie in [0, r={params.r}), got secret {s} for party {i}")
    return values


def _make_link(
    sender: str,
    receiver: str,
    transcript: Transcript,
    adversary: "AttackStrategy | None",
) -> QuantumLink:
    label = f"{sender}->{receiver}"
    if adversary is not None and adversary.taps_link(label):
        def tap(state: QuditState, position: int, rng: np.random.Generator) -> QuditState:
            return adversary.tap(state, label, position, rng, transcript)
        return QuantumLink(sender, receiver, transcript, tap)
    return QuantumLink(sender, receiver, transcript, None)


def _undisclosed_position(length: int, disclosed: Sequence[int]) -> int:
    """The single slot no disclosure named — that slot carries the encoded state."""
    left = set(range(length)).difference(disclosed)
    if len(left) != 1:
        raise ParameterError(f"expected exactly one undisclosed slot, found {sorted(left)}")
    return left.pop()


def _disclose_and_check(
    bus: ClassicalBus,
    step: str,
    phase: str,
    transmission: str,
    entries: Sequence[DecoyEntry],
    received: TransmissionSequence,
    checker: str,
    measurer: str,
    rng: np.random.Generator,
    threshold: float,
) -> bool:
    """One eavesdropping check: disclose, measure, report, compare. True means abort.

    The checker announces positions and bases, the other side measures and
    reports publicly, and the checker (who alone knows the prepared indices)
    computes the mismatch rate.
    """
    bus.broadcast(checker, decoy_disclosure(transmission, phase, entries))
    outcomes = _measure_entries(entries, received, rng)
    bus.broadcast(measurer, measurement_report(transmission, outcomes))
    mismatched = _count_mismatches(entries, outcomes)
    error_rate = mismatched / len(entries) if entries else 0.0
    bus.transcript.record(
        {checker},
        "decoy_check",
        step=step,
        link=transmission,
        checked=len(entries),
        mismatched=mismatched,
        error_rate=error_rate,
    )
    if error_rate > threshold:
        bus.broadcast(checker, abort_message(step))
        return True
    return False


def _run_protocol(
    params: ProtocolParams,
    secrets: tuple[int, ...],
    offset: int,
    shared_key_value: int | None,
    adversary: "AttackStrategy | None",
    rng: np.random.Generator,
    preparer: str,
    measurer: str,
) -> tuple[Transcript, ComparisonOutcome]:
    n, l, threshold = params.n, params.l, params.error_threshold
    parties = [party_role(i) for i in range(n)]

    transcript = Transcript()
    bus = ClassicalBus(transcript)
    # Fixed stream split keeps every role's draws aligned across runs that
    # differ only in the secret values.
    streams = rng.spawn(n + 3)
    prep_rng = streams[0]
    party_rngs = streams[1 : n + 1]
    measure_rng = streams[n + 1]
    adversary_rng = streams[n + 2]

    transcript.record(
        PUBLIC,
        "run_header",
        variant=params.variant.value,
        n=n,
        d=params.d,
        r=params.r,
        l=l,
        threshold=threshold,
    )
    if shared_key_value is not None:
        transcript.record(set(parties), "shared_key", value=shared_key_value)

    def aborted(step: str) -> tuple[Transcript, ComparisonOutcome]:
        return transcript, ComparisonOutcome(ranking=None, scores=None, aborted_at=step)

    # stage 1: carriers
    pad_sum, carriers, carrier_states = tp_prepare_carriers(params, prep_rng)
    transcript.record(
        {preparer},
        "carrier_prep",
        step="step1",
        pad_sum=pad_sum,
        pads=[c.pad for c in carriers],
        complements=[c.pad_complement for c in carriers],
    )

    # stage 2: first hop (preparer -> party), decoys drawn by the preparer
    first_hop = []
    for i in range(n):
        seq, spec = build_transmission(carrier_states[i], l, prep_rng)
        link = _make_link(preparer, parties[i], transcript, adversary)
        transcript.record(
            {preparer},
            "transmission_prep",
            step="step2",
            link=link.label,
            carrier_position=spec.carrier_position,
            decoys=[[e.position, e.basis.value, e.index] for e in spec.entries],
        )
        first_hop.append((transmit(link, seq, adversary_rng), spec, link.label))

    # stage 3: full decoy check of every first hop
    for i in range(n):
        received, spec, label = first_hop[i]
        if _disclose_and_check(
            bus, "step3", "all", label, spec.entries, received, preparer, parties[i], party_rngs[i], threshold
        ):
            return aborted("step3")

    # stage 4: the party recovers the carrier (the one undisclosed slot),
    # shift-encodes, and ships it under fresh decoys
    second_hop = []
    for i in range(n):
        received, spec, label = first_hop[i]
        carrier_pos = _undisclosed_position(len(received), [e.position for e in spec.entries])
        carrier = received.take(carrier_pos)
        encoded = encode_secret(carrier, secrets[i], offset)
        transcript.record({parties[i]}, "encode", step="step4", party=i, shift=secrets[i] + offset)
        seq, spec2 = build_transmission(encoded, l, party_rngs[i])
        link = _make_link(parties[i], measurer, transcript, adversary)
        transcript.record(
            {parties[i]},
            "transmission_prep",
            step="step4",
            link=link.label,
            carrier_position=spec2.carrier_position,
            decoys=[[e.position, e.basis.value, e.index] for e in spec2.entries],
        )
        second_hop.append((transmit(link, seq, adversary_rng), spec2, link.label))

    # stages 5 and 6: two-phase second-hop check, Fourier decoys strictly first
    for step, phase, selector in (("step5", "fourier", 0), ("step6", "computational", 1)):
        for i in range(n):
            received, spec2, label = second_hop[i]
            entries = two_phase_disclosure(spec2)[selector]
            if _disclose_and_check(
                bus, step, phase, label, entries, received, parties[i], measurer, measure_rng, threshold
            ):
                return aborted(step)

    # stage 7: measure carriers, form scores, announce the ordering only
    measured = []
    for i in range(n):
        received, spec2, label = second_hop[i]
        carrier_pos = _undisclosed_position(len(received), [e.position for e in spec2.entries])
        outcome = measure(received.take(carrier_pos), Basis.COMPUTATIONAL, measure_rng)
        transcript.record({measurer}, "carrier_measurement", step="step7", party=i, value=outcome.value)
        measured.append(outcome.value)

    complements = [c.pad_complement for c in carriers]
    if preparer != measurer:
        bus.broadcast(preparer, pad_announcement(complements))
    result = tp_compute_result(measured, complements)
    transcript.record({measurer}, "score_computation", step="step7", scores=list(result.scores))
    bus.broadcast(measurer, ordering_announcement(result.ranking))
    return transcript, result


def run_two_tp_protocol(
    params: ProtocolParams,
    secrets: Sequence[int] | SecretVector,
    adversary: "AttackStrategy | None",
    rng: np.random.Generator,
) -> tuple[Transcript, ComparisonOutcome]:
    """One run of the two-third-party variant.

    The preparing TP knows pads and the run constant but never sees a carrier
    after encoding; the measuring TP sees encoded values but no pads. The pad
    complements travel over the public bus so the measuring TP can rank.
    """
    if params.variant is not Variant.TWO_TP:
        raise ParameterError(f"params are for {params.variant.value}, expected two-tp")
    values = _normalize_secrets(secrets, params)
    return _run_protocol(params, values, 0, None, adversary, rng, TP1_ROLE, TP2_ROLE)


def run_one_tp_protocol(
    params: ProtocolParams,
    secrets: Sequence[int] | SecretVector,
    shared_key: int | SharedKey,
    adversary: "AttackStrategy | None",
    rng: np.random.Generator,
) -> tuple[Transcript, ComparisonOutcome]:
    """One run of the single-third-party variant.

    The lone TP plays both ends, so every party also shifts by a key shared
    among the parties but hidden from the TP; complements stay TP-internal and
    nothing about them is broadcast.
    """
    if params.variant is not Variant.ONE_TP:
        raise ParameterError(f"params are for {params.variant.value}, expected one-tp")
    values = _normalize_secrets(secrets, params)
    key = shared_key.value if isinstance(shared_key, SharedKey) else int(shared_key)
    if not 0 <= key < params.r:
        raise ParameterError(f"the shared key must lie in [0, r={params.r}), got {key}")
    return _run_protocol(params, values, key, key, adversary, rng, SOLO_TP_ROLE, SOLO_TP_ROLE)
