"""Bottom-up truth evaluation under four semantics, plus a brute-force
positional-strategy oracle for tiny models.

All evaluators share the subformula post-order and represent truth sets as
state bitmasks.  Negation is handled by complement, which the determinacy of
the evaluation games licenses; the game engine keeps the literal role-swap
rule for fidelity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

from atlgts.cgm import Model, stable_bound
from atlgts.embedded_solver import (
    LOSE,
    EmbeddedGameSpec,
    LabelMap,
    compute_labels,
    opponent_labels,
)
from atlgts.formula import (
    CoopR,
    CoopU,
    CoopX,
    FalseF,
    Formula,
    Not,
    Or,
    Prop,
    TrueF,
    and_,
    coop_g,
    not_,
    or_,
    print_formula,
    subformulas,
    unfold_G,
    unfold_U,
)
from atlgts.ordinal import Ordinal


@dataclass(frozen=True)
class Standard:
    pass


@dataclass(frozen=True)
class GtsUnbounded:
    pass


@dataclass(frozen=True)
class GtsBounded:
    gamma: Ordinal | None = None  # None means auto: the model's stable bound


@dataclass(frozen=True)
class FinitelyBounded:
    pass


SemanticsKind = Union[Standard, GtsUnbounded, GtsBounded, FinitelyBounded]

KIND_NAMES = {
    "standard": Standard,
    "gts-unbounded": GtsUnbounded,
    "gts-bounded": GtsBounded,
    "gts-finitely-bounded": FinitelyBounded,
}


def kind_name(kind: SemanticsKind) -> str:
    for name, cls in KIND_NAMES.items():
        if isinstance(kind, cls):
            return name
    raise TypeError(f"unknown semantics kind {kind!r}")


@dataclass(frozen=True)
class TruthMap:
    """Truth of every subformula at every state, with the label maps used
    for strategic subformulas under the game-theoretic kinds."""

    model: Model = field(compare=False, repr=False)
    formula: Formula
    kind: SemanticsKind
    subs: tuple[Formula, ...]
    masks: tuple[int, ...]
    label_maps: dict[int, tuple[LabelMap, LabelMap]] = field(default_factory=dict)

    def index_of(self, sub: Formula) -> int:
        for i, g in enumerate(self.subs):
            if g == sub:
                return i
        raise ValueError(f"not a subformula: {print_formula(sub)}")

    def mask(self, sub: Formula | None = None) -> int:
        i = len(self.subs) - 1 if sub is None else self.index_of(sub)
        return self.masks[i]

    def is_true(self, state_id: str, sub: Formula | None = None) -> bool:
        return bool(self.mask(sub) >> self.model.index(state_id) & 1)

    def states_where(self, sub: Formula | None = None) -> tuple[str, ...]:
        return self.model.ids_of(self.mask(sub))

    def to_bool_dict(self, sub: Formula | None = None) -> dict[str, bool]:
        mask = self.mask(sub)
        return {q: bool(mask >> i & 1) for i, q in enumerate(self.model.states)}

    def labels_for(self, sub: Formula) -> tuple[LabelMap, LabelMap] | None:
        """(controller map, opponent map) when the kind solved an embedded game."""
        return self.label_maps.get(self.index_of(sub))


def _check_coalition(m: Model, coalition: tuple[int, ...]) -> None:
    for a in coalition:
        if a < 1 or a > m.agent_count:
            raise ValueError(f"coalition references unknown agent {a}")


def _cpre(m: Model, coalition: tuple[int, ...], target_mask: int) -> int:
    """States where the coalition can commit to a profile whose every outcome
    stays inside the target."""
    tables = m.tables(coalition)
    out = 0
    for qi in range(len(m.states)):
        for mask in tables.succ_mask[qi]:
            if mask & ~target_mask == 0:
                out |= 1 << qi
                break
    return out


def _lfp_until(m: Model, coalition, psi_mask: int, theta_mask: int) -> int:
    cur = 0
    while True:
        nxt = theta_mask | (psi_mask & _cpre(m, coalition, cur))
        if nxt == cur:
            return cur
        cur = nxt


def _gfp_release(m: Model, coalition, psi_mask: int, theta_mask: int) -> int:
    cur = m.full_mask()
    while True:
        nxt = theta_mask & (psi_mask | _cpre(m, coalition, cur))
        if nxt == cur:
            return cur
        cur = nxt


def _fb_until(m: Model, coalition, psi_mask: int, theta_mask: int) -> int:
    """Increasing bounded-horizon reach sets; truth is membership in the union,
    which stabilises within the state count."""
    cur = theta_mask
    for _ in range(len(m.states) + 1):
        nxt = theta_mask | (psi_mask & _cpre(m, coalition, cur))
        if nxt == cur:
            break
        cur = nxt
    return cur


def _fb_release(m: Model, coalition, psi_mask: int, theta_mask: int) -> int:
    """Decreasing bounded-horizon protection sets starting from the goal set."""
    cur = theta_mask
    for _ in range(len(m.states) + 1):
        nxt = theta_mask & (psi_mask | _cpre(m, coalition, cur))
        if nxt == cur:
            break
        cur = nxt
    return cur


def embedded_spec_for(
    m: Model, sub: Formula, psi_mask: int, theta_mask: int
) -> EmbeddedGameSpec:
    """Embedded game for a U/R subformula, with exit sets from the controller's
    point of view (they do not depend on which player is the verifier).

    For until the controller leads the coalition and its exits claim the goal
    formula true; for release the opposing player controls the clock and its
    exits claim the goal formula false, so both exit sets complement.
    """
    full = m.full_mask()
    if isinstance(sub, CoopU):
        goal_mask, safe_mask = theta_mask, psi_mask
        verifier, controller = "E", "E"
    else:
        goal_mask, safe_mask = full & ~theta_mask, full & ~psi_mask
        verifier, controller = "E", "A"
    return EmbeddedGameSpec(
        verifier=verifier,
        controller=controller,
        coalition=sub.coalition,
        goal=frozenset(m.ids_of(goal_mask)),
        safe=frozenset(m.ids_of(safe_mask)),
        model=m,
    )


def evaluate(m: Model, f: Formula, kind: SemanticsKind) -> TruthMap:
    """Evaluate every subformula of f at every state of a finite model."""
    subs = tuple(subformulas(f))
    index = {g: i for i, g in enumerate(subs)}
    full = m.full_mask()
    masks: list[int] = []
    label_maps: dict[int, tuple[LabelMap, LabelMap]] = {}

    if isinstance(kind, GtsBounded):
        gamma = kind.gamma if kind.gamma is not None else stable_bound(m)
    elif isinstance(kind, GtsUnbounded):
        gamma = stable_bound(m)
    else:
        gamma = None

    for i, sub in enumerate(subs):
        if isinstance(sub, Prop):
            masks.append(m.mask_of(q for q in m.states if sub.name in m.props_of(q)))
        elif isinstance(sub, TrueF):
            masks.append(full)
        elif isinstance(sub, FalseF):
            masks.append(0)
        elif isinstance(sub, Not):
            masks.append(full & ~masks[index[sub.sub]])
        elif isinstance(sub, Or):
            masks.append(masks[index[sub.left]] | masks[index[sub.right]])
        elif isinstance(sub, CoopX):
            _check_coalition(m, sub.coalition)
            masks.append(_cpre(m, sub.coalition, masks[index[sub.sub]]))
        elif isinstance(sub, (CoopU, CoopR)):
            _check_coalition(m, sub.coalition)
            psi_mask = masks[index[sub.lhs]]
            theta_mask = masks[index[sub.rhs]]
            until = isinstance(sub, CoopU)
            if isinstance(kind, Standard):
                if until:
                    masks.append(_lfp_until(m, sub.coalition, psi_mask, theta_mask))
                else:
                    masks.append(_gfp_release(m, sub.coalition, psi_mask, theta_mask))
            elif isinstance(kind, FinitelyBounded):
                if until:
                    masks.append(_fb_until(m, sub.coalition, psi_mask, theta_mask))
                else:
                    masks.append(_fb_release(m, sub.coalition, psi_mask, theta_mask))
            else:
                spec = embedded_spec_for(m, sub, psi_mask, theta_mask)
                cmap = compute_labels(spec, gamma)
                omap = opponent_labels(cmap)
                label_maps[i] = (cmap, omap)
                win_mask = 0
                for qi, lab in enumerate(cmap.labels):
                    if isinstance(lab, Ordinal):
                        win_mask |= 1 << qi
                # Until: the verifying player controls the clock and wins by
                # reaching an ordinal label.  Release: the verifier wins when
                # the controlling opponent cannot, i.e. at lose labels.
                masks.append(win_mask if until else full & ~win_mask)
        else:
            raise TypeError(f"not a formula node: {sub!r}")
    return TruthMap(m, f, kind, subs, tuple(masks), label_maps)


# --- brute-force oracle ------------------------------------------------------

ORACLE_MAX_STATES = 6
ORACLE_MAX_PROFILES = 16


def _oracle_guard(m: Model) -> None:
    if len(m.states) > ORACLE_MAX_STATES:
        raise ValueError(
            f"oracle guard exceeded: {len(m.states)} states > {ORACLE_MAX_STATES}"
        )
    for qi, q in enumerate(m.states):
        count = 1
        for acts in m.actions[qi]:
            count *= len(acts)
        if count > ORACLE_MAX_PROFILES:
            raise ValueError(
                f"oracle guard exceeded: state {q!r} has {count} profiles"
                f" > {ORACLE_MAX_PROFILES}"
            )


def _until_holds_from(
    start: int, succs: list[tuple[int, ...]], psi_mask: int, theta_mask: int
) -> bool:
    """Every play from start reaches the goal with psi holding strictly before:
    no bad state and no cycle is reachable through non-goal states."""
    if theta_mask >> start & 1:
        return True
    visited = {start}
    stack = [start]
    region = []
    while stack:
        q = stack.pop()
        if not (psi_mask >> q & 1):
            return False
        region.append(q)
        for nxt in succs[q]:
            if theta_mask >> nxt & 1:
                continue
            if nxt not in visited:
                visited.add(nxt)
                stack.append(nxt)
    # Cycle check within the non-goal region: Kahn peeling on induced edges.
    region_set = set(region)
    out_edges = {
        q: [n for n in set(succs[q]) if n in region_set] for q in region_set
    }
    indeg = {q: 0 for q in region_set}
    for q, outs in out_edges.items():
        for n in outs:
            indeg[n] += 1
    queue = [q for q, d in indeg.items() if d == 0]
    removed = 0
    while queue:
        q = queue.pop()
        removed += 1
        for n in out_edges[q]:
            indeg[n] -= 1
            if indeg[n] == 0:
                queue.append(n)
    return removed == len(region_set)


def _release_holds_from(
    start: int, succs: list[tuple[int, ...]], psi_mask: int, theta_mask: int
) -> bool:
    """No play reaches a non-goal state before the releasing formula has held."""
    visited = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        if not (theta_mask >> q & 1):
            return False
        if psi_mask >> q & 1:
            continue  # released from the next state on
        for nxt in succs[q]:
            if nxt not in visited:
                visited.add(nxt)
                stack.append(nxt)
    return True


def oracle_evaluate(m: Model, f: Formula) -> TruthMap:
    """Positional-strategy brute force on tiny models.

    For each strategic subformula every collective strategy of the coalition
    is enumerated; the remaining agents' choices induce a nondeterministic
    graph whose plays are checked directly.
    """
    _oracle_guard(m)
    subs = tuple(subformulas(f))
    index = {g: i for i, g in enumerate(subs)}
    full = m.full_mask()
    n = len(m.states)
    masks: list[int] = []
    for sub in subs:
        if isinstance(sub, Prop):
            masks.append(m.mask_of(q for q in m.states if sub.name in m.props_of(q)))
        elif isinstance(sub, TrueF):
            masks.append(full)
        elif isinstance(sub, FalseF):
            masks.append(0)
        elif isinstance(sub, Not):
            masks.append(full & ~masks[index[sub.sub]])
        elif isinstance(sub, Or):
            masks.append(masks[index[sub.left]] | masks[index[sub.right]])
        elif isinstance(sub, CoopX):
            _check_coalition(m, sub.coalition)
            tables = m.tables(sub.coalition)
            target = masks[index[sub.sub]]
            out = 0
            for qi in range(n):
                if any(mask & ~target == 0 for mask in tables.succ_mask[qi]):
                    out |= 1 << qi
            masks.append(out)
        elif isinstance(sub, (CoopU, CoopR)):
            _check_coalition(m, sub.coalition)
            tables = m.tables(sub.coalition)
            psi_mask = masks[index[sub.lhs]]
            theta_mask = masks[index[sub.rhs]]
            check = _until_holds_from if isinstance(sub, CoopU) else _release_holds_from
            out = 0
            for choice in itertools.product(
                *(range(len(tables.profiles[qi])) for qi in range(n))
            ):
                succs = [tuple(set(tables.succ[qi][choice[qi]])) for qi in range(n)]
                for qi in range(n):
                    if out >> qi & 1:
                        continue
                    if check(qi, succs, psi_mask, theta_mask):
                        out |= 1 << qi
                if out == full:
                    break
            masks.append(out)
        else:
            raise TypeError(f"not a formula node: {sub!r}")
    return TruthMap(m, f, Standard(), subs, tuple(masks), {})


# --- reports -----------------------------------------------------------------

ALL_KINDS: tuple[SemanticsKind, ...] = (
    Standard(),
    GtsUnbounded(),
    GtsBounded(),
    FinitelyBounded(),
)


def compare_semantics(m: Model, f: Formula) -> dict:
    """Evaluate under all four kinds and report per-state agreement.

    On finite models any disagreement is an internal consistency failure.
    """
    per_kind = {}
    for kind in ALL_KINDS:
        per_kind[kind_name(kind)] = evaluate(m, f, kind).to_bool_dict()
    disagreements = []
    for q in m.states:
        values = {name: res[q] for name, res in per_kind.items()}
        if len(set(values.values())) > 1:
            disagreements.append({"state": q, "kinds": values})
    return {
        "formula": print_formula(f),
        "perKind": per_kind,
        "disagreements": disagreements,
    }


def check_fb_unfolding(m: Model, f: Formula) -> dict:
    """Verify that the bounded-horizon unfoldings characterise the finitely
    bounded strategic operators, and that the one-direction fixpoint axioms
    hold at every state.

    For an always-formula the formula holds iff every unfolding up to
    |states|+2 holds; for an until-formula iff some unfolding does.
    """
    if not isinstance(f, (CoopU, CoopR)):
        raise ValueError("expected an until- or release-formula")
    if isinstance(f, CoopR) and f.lhs != FalseF():
        raise ValueError("release check supports always-formulas (false R theta)")
    depth = len(m.states) + 2
    fb = FinitelyBounded()
    base = evaluate(m, f, fb)
    coalition = f.coalition
    report: dict = {"formula": print_formula(f), "depth": depth}
    if isinstance(f, CoopU):
        unfold_masks = [
            evaluate(m, unfold_U(coalition, f.lhs, f.rhs, k), fb).mask()
            for k in range(depth + 1)
        ]
        any_mask = 0
        for um in unfold_masks:
            any_mask |= um
        witnesses = {}
        for qi, q in enumerate(m.states):
            witness = next(
                (k for k, um in enumerate(unfold_masks) if um >> qi & 1), None
            )
            witnesses[q] = witness
        report["kind"] = "U"
        report["witnesses"] = witnesses
        report["lemmaHolds"] = any_mask == base.mask()
        step = or_(f.rhs, and_(f.lhs, CoopX(coalition, f)))
        postfp = or_(not_(f), step)
        report["postFpHolds"] = evaluate(m, postfp, fb).mask() == m.full_mask()
    else:
        theta = f.rhs
        unfold_masks = [
            evaluate(m, unfold_G(coalition, theta, k), fb).mask()
            for k in range(depth + 1)
        ]
        all_mask = m.full_mask()
        for um in unfold_masks:
            all_mask &= um
        report["kind"] = "G"
        report["lemmaHolds"] = all_mask == base.mask()
        g = coop_g(coalition, theta)
        prefp = or_(not_(and_(theta, CoopX(coalition, g))), g)
        report["preFpHolds"] = evaluate(m, prefp, fb).mask() == m.full_mask()
    return report
