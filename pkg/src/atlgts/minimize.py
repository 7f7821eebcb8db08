"""Greedy shrinking of failing (model, formula) pairs for differential tests.

Given a predicate that holds on the original failing instance, repeatedly try
smaller candidates (subformulas, constant-pruned formulas, models with a
state or an action removed) and keep any candidate on which the predicate
still holds, until nothing shrinks further.
"""

from __future__ import annotations

from typing import Callable, Iterator

from atlgts.cgm import Model
from atlgts.formula import (
    FALSE,
    TRUE,
    CoopR,
    CoopU,
    CoopX,
    Formula,
    Not,
    Or,
    subformulas,
)

FailPredicate = Callable[[Model, Formula], bool]


def substitute(f: Formula, target: Formula, replacement: Formula) -> Formula:
    """Replace every occurrence of target inside f."""
    if f == target:
        return replacement
    if isinstance(f, Not):
        return Not(substitute(f.sub, target, replacement))
    if isinstance(f, Or):
        return Or(
            substitute(f.left, target, replacement),
            substitute(f.right, target, replacement),
        )
    if isinstance(f, CoopX):
        return CoopX(f.coalition, substitute(f.sub, target, replacement))
    if isinstance(f, CoopU):
        return CoopU(
            f.coalition,
            substitute(f.lhs, target, replacement),
            substitute(f.rhs, target, replacement),
        )
    if isinstance(f, CoopR):
        return CoopR(
            f.coalition,
            substitute(f.lhs, target, replacement),
            substitute(f.rhs, target, replacement),
        )
    return f


def _formula_candidates(f: Formula) -> Iterator[Formula]:
    subs = subformulas(f)
    # Proper subformulas first (largest reduction), then constant prunes.
    # Constants are never pruned themselves, so every accepted candidate
    # strictly shrinks (node count, non-constant leaves) and the greedy
    # loop terminates.
    for sub in reversed(subs[:-1]):
        yield sub
    for sub in subs[:-1]:
        if isinstance(sub, (type(TRUE), type(FALSE))):
            continue
        for constant in (FALSE, TRUE):
            candidate = substitute(f, sub, constant)
            if candidate != f:
                yield candidate


def _drop_state(m: Model, victim: int) -> Model | None:
    if len(m.states) <= 1:
        return None
    survivors = [i for i in range(len(m.states)) if i != victim]
    remap = {old: new for new, old in enumerate(survivors)}
    fallback = remap[survivors[0]]

    def target(old: int) -> int:
        return remap.get(old, fallback)

    transitions = tuple(
        {profile: target(nxt) for profile, nxt in m.transitions[i].items()}
        for i in survivors
    )
    return Model(
        agent_count=m.agent_count,
        states=tuple(m.states[i] for i in survivors),
        props=tuple(m.props[i] for i in survivors),
        actions=tuple(m.actions[i] for i in survivors),
        transitions=transitions,
    )


def _drop_action(m: Model, state: int, agent: int, act: int) -> Model | None:
    acts = m.actions[state][agent - 1]
    if len(acts) <= 1:
        return None
    new_per_agent = tuple(
        tuple(a for k, a in enumerate(agent_acts) if not (j == agent - 1 and k == act))
        for j, agent_acts in enumerate(m.actions[state])
    )
    actions = tuple(
        new_per_agent if i == state else m.actions[i] for i in range(len(m.states))
    )
    # Reindex the dropped agent's actions in this state's transition table.
    def fix(idx: int) -> int | None:
        if idx == act:
            return None
        return idx - 1 if idx > act else idx

    table = {}
    for profile, nxt in m.transitions[state].items():
        fixed = fix(profile[agent - 1])
        if fixed is None:
            continue
        table[profile[: agent - 1] + (fixed,) + profile[agent:]] = nxt
    transitions = tuple(
        table if i == state else m.transitions[i] for i in range(len(m.states))
    )
    return Model(
        agent_count=m.agent_count,
        states=m.states,
        props=m.props,
        actions=actions,
        transitions=transitions,
    )


def _model_candidates(m: Model) -> Iterator[Model]:
    for victim in range(len(m.states)):
        candidate = _drop_state(m, victim)
        if candidate is not None:
            yield candidate
    for state in range(len(m.states)):
        for agent in range(1, m.agent_count + 1):
            for act in range(len(m.actions[state][agent - 1])):
                candidate = _drop_action(m, state, agent, act)
                if candidate is not None:
                    yield candidate


def shrink_instance(
    model: Model, formula: Formula, still_fails: FailPredicate
) -> tuple[Model, Formula]:
    """Greedy fixpoint shrink; the returned pair still satisfies the predicate."""

    def check(m: Model, f: Formula) -> bool:
        try:
            return still_fails(m, f)
        except Exception:
            return False  # a shrink that breaks evaluation is not a shrink

    changed = True
    while changed:
        changed = False
        for candidate in _formula_candidates(formula):
            if check(model, candidate):
                formula = candidate
                changed = True
                break
        if changed:
            continue
        for candidate_model in _model_candidates(model):
            if check(candidate_model, formula):
                model = candidate_model
                changed = True
                break
    return model, formula
