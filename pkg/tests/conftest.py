"""Shared fixtures and game-tree search helpers used across the suite."""

from __future__ import annotations

import copy
import functools
import itertools
import random

import pytest

from atlgts.cgm import Model, fig3_model
from atlgts.embedded_solver import (
    EmbeddedGameSpec,
    LabelMap,
    canonical_controller,
    canonical_noncontroller,
    compute_labels,
    opponent_labels,
    Full,
)
from atlgts.formula import CoopR, CoopU, Formula, subformulas
from atlgts.generators import GenConfig, gen_formula, gen_model
from atlgts.ordinal import Ordinal
from atlgts.semantics import GtsBounded, embedded_spec_for, evaluate


@pytest.fixture
def fig3() -> Model:
    return fig3_model()


def corpus(seed: int, count: int, config: GenConfig = GenConfig()):
    """Seeded stream of (rng, model) pairs; the rng continues per model."""
    rng = random.Random(seed)
    for _ in range(count):
        yield rng, gen_model(rng, config)


def strategic_subs(f: Formula) -> list[Formula]:
    return [g for g in subformulas(f) if isinstance(g, (CoopU, CoopR))]


def embedded_specs(model: Model, f: Formula, gamma: Ordinal) -> list[tuple[Formula, EmbeddedGameSpec]]:
    """Embedded game specs for every U/R subformula, with exit sets evaluated
    at the given bound."""
    truth = evaluate(model, f, GtsBounded(gamma))
    out = []
    for sub in strategic_subs(f):
        psi_mask = truth.mask(sub.lhs)
        theta_mask = truth.mask(sub.rhs)
        out.append((sub, embedded_spec_for(model, sub, psi_mask, theta_mask)))
    return out


def embedded_value(
    spec: EmbeddedGameSpec,
    gamma: int,
    state_id: str,
    controller_strategy=None,
    opponent_strategy=None,
) -> bool:
    """True iff the controller wins the bounded embedded game from state_id
    with limit gamma.  Sides with a strategy follow it; the others play
    exhaustively (true minimax over offers and step choices)."""
    m = spec.model
    tables = spec.tables()
    goal = spec.goal
    safe = spec.safe
    mover_first = spec.controller_moves_first

    @functools.lru_cache(maxsize=None)
    def value(g: int, qi: int) -> bool:
        q = m.states[qi]
        if g == 0:
            return q in goal
        # Controller's end offer: taking it wins exactly on the goal set, so
        # both the canonical strategy and best play end there and only there.
        if controller_strategy is not None:
            if controller_strategy.wants_exit(q):
                return q in goal
        elif q in goal:
            return True
        # Opponent's end offer: symmetric on the unsafe set.
        if opponent_strategy is not None:
            if opponent_strategy.wants_exit(q):
                return q in safe
        elif q not in safe:
            return False
        profiles = tables.profiles[qi]
        responses = tables.responses[qi]
        succ = tables.succ[qi]
        glim = Ordinal.nat(g)
        if mover_first:
            # Controller commits a coalition profile, opponent responds.
            if controller_strategy is not None:
                decision = controller_strategy.move(q)
                alpha_options = [profiles.index(decision.actions)]
            else:
                alpha_options = range(len(profiles))
            for ai in alpha_options:
                if opponent_strategy is not None:
                    reply = opponent_strategy.decision(q, glim).reply(ai)
                    outcomes = [succ[ai][responses.index(reply)]]
                else:
                    outcomes = succ[ai]
                if all(value(g - 1, nxt) for nxt in outcomes):
                    return True
            return False
        # Opponent commits, controller responds.
        if opponent_strategy is not None:
            decision = opponent_strategy.decision(q, glim)
            alpha_options = [profiles.index(decision.actions)]
        else:
            alpha_options = range(len(profiles))
        for ai in alpha_options:
            if controller_strategy is not None:
                reply = controller_strategy.move(q).reply(ai)
                ok = value(g - 1, succ[ai][responses.index(reply)])
            else:
                ok = any(value(g - 1, nxt) for nxt in succ[ai])
            if not ok:
                return False
        return True

    return value(gamma, m.index(state_id))


def solve_embedded(spec: EmbeddedGameSpec, gamma: Ordinal):
    cmap = compute_labels(spec, gamma)
    omap = opponent_labels(cmap)
    controller = canonical_controller(spec, cmap)
    opponent_full = canonical_noncontroller(spec, omap, Full())
    return cmap, omap, controller, opponent_full


def enumerate_moves(session) -> list:
    menu = session.legal_moves()["menu"]
    if menu["kind"] == "choice":
        return list(menu["options"])
    if menu["kind"] == "ordinal":
        return list(menu.get("choices", []))
    agents = menu["agents"]
    keys = sorted(agents, key=int)
    option_lists = [agents[k] for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*option_lists)]


def adversary_can_win(session, adversary: str) -> bool:
    """Best play for the single human side against the machine policies."""
    if session.ended():
        return session.winner == adversary
    if session.machine_pending():
        clone = copy.deepcopy(session)
        clone.machine_reply()
        return adversary_can_win(clone, adversary)
    actor = session.pending_actor()
    assert actor == adversary, "exhaustive search expects one human side"
    for move in enumerate_moves(session):
        clone = copy.deepcopy(session)
        clone.apply_move(actor, move)
        if adversary_can_win(clone, adversary):
            return True
    return False
