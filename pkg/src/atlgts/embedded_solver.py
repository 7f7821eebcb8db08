"""Winning-time-label solver and canonical strategy synthesis for the
reachability-style games embedded in evaluation games.

An embedded game is parameterised by a verifier V (leads the coalition in
each one-step game), a controller C (responsible for finishing in finite
time), and two exit sets expressed from the controller's point of view:
``goal`` collects the states where the controller wins the game by taking
its own exit, ``safe`` the states where it survives the opponent's exit.

Labels are computed from the controller's perspective by an attractor-style
least fixpoint and mirrored to the other player: ordinal labels coincide,
and lose for the controller is win for the opponent.  On finite models all
ordinal labels are naturals below the state count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Union

from atlgts.cgm import CoalitionTables, Model, stable_bound
from atlgts.ordinal import Ordinal

Player = Literal["E", "A"]


def opponent(player: Player) -> Player:
    return "A" if player == "E" else "E"


class _Win:
    __slots__ = ()

    def __repr__(self) -> str:
        return "win"


class _Lose:
    __slots__ = ()

    def __repr__(self) -> str:
        return "lose"


WIN = _Win()
LOSE = _Lose()

Label = Union[Ordinal, _Win, _Lose]


def render_label(label: Label) -> str:
    return str(label) if isinstance(label, Ordinal) else repr(label)


@dataclass(frozen=True)
class EmbeddedGameSpec:
    """One embedded game over a finite model.

    ``goal`` and ``safe`` are precomputed truth sets: the states where the
    controller wins the exit it may take itself, and the states where it
    wins the exit its opponent may take.
    """

    verifier: Player
    controller: Player
    coalition: tuple[int, ...]
    goal: frozenset[str]
    safe: frozenset[str]
    model: Model

    @property
    def controller_moves_first(self) -> bool:
        """The controller's role in the one-step game: verifier commits first."""
        return self.verifier == self.controller

    def goal_mask(self) -> int:
        return self.model.mask_of(self.goal)

    def safe_mask(self) -> int:
        return self.model.mask_of(self.safe)

    def tables(self) -> CoalitionTables:
        return self.model.tables(self.coalition)


@dataclass(frozen=True)
class ProfileDecision:
    """A committed action tuple for the mover's own agents."""

    agents: tuple[int, ...]
    actions: tuple[int, ...]

    def names(self, m: Model, state_id: str) -> dict[int, str]:
        qi = m.index(state_id)
        return {
            a: m.actions[qi][a - 1][idx] for a, idx in zip(self.agents, self.actions)
        }


@dataclass(frozen=True)
class ResponseDecision:
    """A response table: for each coalition profile, the complement's reply."""

    coalition: tuple[int, ...]
    agents: tuple[int, ...]
    table: tuple[tuple[int, ...], ...]  # indexed by coalition profile index

    def reply(self, alpha_index: int) -> tuple[int, ...]:
        return self.table[alpha_index]


Decision = Union[ProfileDecision, ResponseDecision]


def _force_index(
    tables: CoalitionTables, qi: int, target_mask: int, mover_is_verifier: bool
) -> Decision | None:
    """Lexicographically least decision forcing the next state into the target.

    The verifier commits a coalition profile first; a forcing profile must
    keep every response inside the target.  The falsifier answers, so a
    forcing response table needs a good reply to each coalition profile.
    """
    if mover_is_verifier:
        for ai, mask in enumerate(tables.succ_mask[qi]):
            if mask & ~target_mask == 0:
                return ProfileDecision(tables.coalition, tables.profiles[qi][ai])
        return None
    rows = []
    for ai, successors in enumerate(tables.succ[qi]):
        for bi, nxt in enumerate(successors):
            if target_mask >> nxt & 1:
                rows.append(tables.responses[qi][bi])
                break
        else:
            return None
    return ResponseDecision(tables.coalition, tables.complement, tuple(rows))


def _any_decision(tables: CoalitionTables, qi: int, mover_is_verifier: bool) -> Decision:
    """Fixed fallback for states the mover has already lost: the least legal move."""
    if mover_is_verifier:
        return ProfileDecision(tables.coalition, tables.profiles[qi][0])
    first = tables.responses[qi][0]
    return ResponseDecision(
        tables.coalition, tables.complement, tuple(first for _ in tables.profiles[qi])
    )


def force(
    m: Model,
    coalition: tuple[int, ...],
    state_id: str,
    target: Iterable[str],
    mover_is_verifier: bool,
) -> Decision | None:
    """One-step forcing: a decision guaranteeing the next state lies in target,
    or None when the mover cannot guarantee it."""
    tables = m.tables(tuple(coalition))
    return _force_index(tables, m.index(state_id), m.mask_of(target), mover_is_verifier)


@dataclass(frozen=True)
class LabelMap:
    """Winning time labels for one player of an embedded game at bound gamma.

    The controller's map contains ordinals and lose; the mirrored map for the
    other player contains the same ordinals with lose replaced by win.
    """

    player: Player
    gamma: Ordinal
    model: Model = field(compare=False, repr=False)
    labels: tuple[Label, ...] = ()

    def label(self, state_id: str) -> Label:
        return self.labels[self.model.index(state_id)]

    def as_dict(self) -> dict[str, Label]:
        return {q: self.labels[i] for i, q in enumerate(self.model.states)}

    def rendered(self) -> dict[str, str]:
        return {q: render_label(l) for q, l in self.as_dict().items()}

    def finite(self, state_id: str) -> int | None:
        """The label as an int when it is a natural, else None."""
        lab = self.label(state_id)
        if isinstance(lab, Ordinal) and lab.is_finite():
            return lab.to_int()
        return None


def _labels_int(spec: EmbeddedGameSpec, gamma_bound: Ordinal) -> list[int | None]:
    """Attractor fixpoint: label k states from which the controller forces the
    play into already-labelled states, until nothing changes or the bound caps."""
    m = spec.model
    n = len(m.states)
    tables = spec.tables()
    goal_mask = spec.goal_mask()
    safe_mask = spec.safe_mask()
    mover_first = spec.controller_moves_first

    labels: list[int | None] = [None] * n
    reached = 0
    for qi in range(n):
        if goal_mask >> qi & 1:
            labels[qi] = 0
            reached |= 1 << qi
    k = 1
    while Ordinal.nat(k) < gamma_bound:
        added = 0
        for qi in range(n):
            if labels[qi] is not None or not (safe_mask >> qi & 1):
                continue
            if mover_first:
                ok = any(mask & ~reached == 0 for mask in tables.succ_mask[qi])
            else:
                ok = all(
                    any(reached >> nxt & 1 for nxt in successors)
                    for successors in tables.succ[qi]
                )
            if ok:
                labels[qi] = k
                added |= 1 << qi
        if not added:
            break
        reached |= added
        k += 1
    return labels


def compute_labels(spec: EmbeddedGameSpec, gamma_bound: Ordinal) -> LabelMap:
    """Controller-perspective winning time labels at the given bound.

    A state gets 0 exactly on the controller's goal set; it gets the least
    k >= 1 below the bound for which it is safe and the controller can force
    the next state into labels <= k-1; everything else is lose.
    """
    if gamma_bound < Ordinal.nat(1):
        raise ValueError("gamma_bound must be at least 1")
    ints = _labels_int(spec, gamma_bound)
    labels = tuple(LOSE if k is None else Ordinal.nat(k) for k in ints)
    return LabelMap(spec.controller, gamma_bound, spec.model, labels)


def opponent_labels(label_map: LabelMap) -> LabelMap:
    """Mirror map for the other player: same ordinals, lose and win swap.

    Applying it twice gives back the original map.
    """
    swapped = {id(LOSE): WIN, id(WIN): LOSE}
    labels = tuple(
        swapped.get(id(lab), lab) if not isinstance(lab, Ordinal) else lab
        for lab in label_map.labels
    )
    return LabelMap(
        opponent(label_map.player),
        label_map.gamma,
        label_map.model,
        labels,
    )


EXIT = "exit"


@dataclass(frozen=True)
class ControllerStrategy:
    """Label-derived strategy for the controller, state-only.

    At label-0 states it takes its own exit; at label-k states it plays the
    recorded forcing decision into smaller labels; everywhere else a fixed
    fallback.  The timer lowers a limit ordinal to the current state's label.
    """

    spec: EmbeddedGameSpec
    labels: LabelMap
    entries: tuple[object, ...]  # EXIT or a Decision, per state index

    def wants_exit(self, state_id: str) -> bool:
        return self.entries[self.spec.model.index(state_id)] is EXIT

    def move(self, state_id: str) -> Decision:
        entry = self.entries[self.spec.model.index(state_id)]
        if entry is EXIT:
            # Only reachable when an exit offer was declined upstream; any
            # legal decision will do.
            tables = self.spec.tables()
            return _any_decision(
                tables,
                self.spec.model.index(state_id),
                self.spec.controller_moves_first,
            )
        return entry

    def timer(self, gamma: Ordinal, state_id: str) -> Ordinal:
        lab = self.labels.label(state_id)
        if isinstance(lab, Ordinal) and lab < gamma:
            return lab
        return Ordinal.nat(0)

    def announce(self, state_id: str) -> Ordinal:
        lab = self.labels.label(state_id)
        return lab if isinstance(lab, Ordinal) else Ordinal.nat(0)


def canonical_controller(spec: EmbeddedGameSpec, labels: LabelMap) -> ControllerStrategy:
    """Canonical controller: exit at goal, force downward elsewhere."""
    if labels.player != spec.controller:
        raise ValueError("labels must be controller-perspective")
    m = spec.model
    tables = spec.tables()
    mover_first = spec.controller_moves_first
    ints = [
        lab.to_int() if isinstance(lab, Ordinal) else None for lab in labels.labels
    ]
    below: list[int] = [0] * (max((k for k in ints if k is not None), default=0) + 2)
    for qi, k in enumerate(ints):
        if k is not None:
            for level in range(k, len(below)):
                below[level] |= 1 << qi
    entries: list[object] = []
    for qi, k in enumerate(ints):
        if k == 0:
            entries.append(EXIT)
        elif k is None:
            entries.append(_any_decision(tables, qi, mover_first))
        else:
            decision = _force_index(tables, qi, below[k - 1], mover_first)
            assert decision is not None, "label fixpoint recorded an unforceable state"
            entries.append(decision)
    return ControllerStrategy(spec, labels, tuple(entries))


@dataclass(frozen=True)
class Full:
    """Configuration-indexed non-controller strategy."""


@dataclass(frozen=True)
class NCanonical:
    n: int


@dataclass(frozen=True)
class InfinityCanonical:
    """State-only strategy assuming the largest limit below a successor bound."""


Variant = Union[Full, NCanonical, InfinityCanonical]


@dataclass(frozen=True)
class NonControllerStrategy:
    """Label-derived strategy for the non-controller.

    The full variant consults the current limit; the n-indexed and infinity
    variants are state-only.  Exits are taken exactly where the opponent's
    exit wins outright (unsafe-for-controller states).
    """

    spec: EmbeddedGameSpec
    labels: LabelMap  # non-controller perspective
    variant: Variant

    def _mask_at_least(self, gamma: Ordinal) -> int:
        """States whose label is win or an ordinal >= gamma."""
        mask = 0
        for qi, lab in enumerate(self.labels.labels):
            if lab is WIN or (isinstance(lab, Ordinal) and lab >= gamma):
                mask |= 1 << qi
        return mask

    def _win_mask(self) -> int:
        mask = 0
        for qi, lab in enumerate(self.labels.labels):
            if lab is WIN:
                mask |= 1 << qi
        return mask

    def _mover_first(self) -> bool:
        return not self.spec.controller_moves_first

    def _step_into(self, qi: int, target_mask: int) -> Decision:
        tables = self.spec.tables()
        decision = _force_index(tables, qi, target_mask, self._mover_first())
        if decision is None:
            decision = _any_decision(tables, qi, self._mover_first())
        return decision

    def wants_exit(self, state_id: str) -> bool:
        """Exit exactly where the opponent's exit claim wins immediately."""
        return state_id not in self.spec.safe

    def decision(self, state_id: str, gamma: Ordinal | None = None) -> object:
        """EXIT or a Decision for the configuration (gamma, state)."""
        m = self.spec.model
        qi = m.index(state_id)
        if self.wants_exit(state_id):
            return EXIT
        lab = self.labels.label(state_id)
        if isinstance(self.variant, Full):
            if gamma is None:
                raise ValueError("full variant needs the current limit")
            if lab is WIN:
                return self._step_into(qi, self._win_mask())
            assert isinstance(lab, Ordinal)
            if lab > gamma:
                return self._step_into(qi, self._mask_at_least(gamma))
            return self._step_into(qi, 0)  # lost; any
        if isinstance(self.variant, NCanonical):
            if lab is WIN or (isinstance(lab, Ordinal) and not lab.is_finite()):
                if lab is WIN:
                    return self._step_into(qi, self._win_mask())
                return self._step_into(qi, self._mask_at_least(Ordinal.nat(self.variant.n)))
            assert isinstance(lab, Ordinal)
            mval = lab.to_int()
            if mval > 0:
                if mval == 1:
                    return self._step_into(qi, 0)  # limit 0 wins with anything
                return self._step_into(qi, self._mask_at_least(Ordinal.nat(mval - 1)))
            return self._step_into(qi, 0)
        # Infinity variant: win states keep the play inside win states.
        if lab is WIN:
            return self._step_into(qi, self._win_mask())
        return self._step_into(qi, 0)


def canonical_noncontroller(
    spec: EmbeddedGameSpec,
    labels: LabelMap,
    variant: Variant,
    gamma_bound: Ordinal | None = None,
) -> NonControllerStrategy:
    """Canonical strategy for the player who does not control the clock."""
    if labels.player == spec.controller:
        raise ValueError("labels must be non-controller-perspective")
    if isinstance(variant, InfinityCanonical):
        if gamma_bound is not None and not gamma_bound.is_successor():
            raise ValueError("the infinity variant needs a successor bound")
    return NonControllerStrategy(spec, labels, variant)


def unbounded_winner(spec: EmbeddedGameSpec, state_id: str) -> Player:
    """Winner of the unbounded embedded game from a state.

    Labels are computed at the stable bound; the controller wins exactly
    when its label there is an ordinal.
    """
    labels = compute_labels(spec, stable_bound(spec.model))
    lab = labels.label(state_id)
    return spec.controller if isinstance(lab, Ordinal) else opponent(spec.controller)


def dump_labels(labels: LabelMap) -> str:
    """One line per state in model order: ``state<TAB>label``."""
    return "\n".join(
        f"{q}\t{render_label(labels.label(q))}" for q in labels.model.states
    )
