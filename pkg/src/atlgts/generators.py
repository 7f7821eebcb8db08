"""Seeded random models and formulas for differential testing.

Everything is a pure function of the supplied PRNG, so a seed reproduces
the exact corpus.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

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
    Prop,
    agent_set,
)

PROP_NAMES = ("p", "q", "r")
ACTION_NAMES = ("a", "b", "c")


@dataclass(frozen=True)
class GenConfig:
    max_states: int = 6
    max_agents: int = 2
    max_actions: int = 3
    max_props: int = 3
    max_depth: int = 3


def gen_model(rng: random.Random, config: GenConfig = GenConfig()) -> Model:
    n = rng.randint(1, config.max_states)
    agents = rng.randint(1, config.max_agents)
    prop_pool = PROP_NAMES[: config.max_props]
    states = tuple(f"s{i}" for i in range(n))
    props = tuple(
        frozenset(p for p in prop_pool if rng.random() < 0.4) for _ in range(n)
    )
    actions = []
    transitions = []
    for _ in range(n):
        per_agent = tuple(
            tuple(ACTION_NAMES[: rng.randint(1, config.max_actions)])
            for _ in range(agents)
        )
        actions.append(per_agent)
        table = {}
        counts = [len(acts) for acts in per_agent]
        combo = [0] * agents
        while True:
            table[tuple(combo)] = rng.randrange(n)
            for i in range(agents - 1, -1, -1):
                combo[i] += 1
                if combo[i] < counts[i]:
                    break
                combo[i] = 0
            else:
                break
        transitions.append(table)
    return Model(agents, states, props, tuple(actions), tuple(transitions))


def gen_formula(
    rng: random.Random,
    agent_count: int,
    config: GenConfig = GenConfig(),
    depth: int | None = None,
) -> Formula:
    if depth is None:
        depth = config.max_depth
    prop_pool = PROP_NAMES[: config.max_props]

    def coalition():
        return agent_set(
            a for a in range(1, agent_count + 1) if rng.random() < 0.5
        )

    if depth == 0:
        roll = rng.random()
        if roll < 0.7:
            return Prop(rng.choice(prop_pool))
        return TRUE if roll < 0.85 else FALSE
    pick = rng.random()
    sub = lambda: gen_formula(rng, agent_count, config, depth - 1)
    if pick < 0.15:
        return Prop(rng.choice(prop_pool))
    if pick < 0.3:
        return Not(sub())
    if pick < 0.45:
        return Or(sub(), sub())
    if pick < 0.6:
        return CoopX(coalition(), sub())
    if pick < 0.8:
        return CoopU(coalition(), sub(), sub())
    return CoopR(coalition(), sub(), sub())


def gen_strategic_formula(
    rng: random.Random, agent_count: int, config: GenConfig = GenConfig()
) -> Formula:
    """A top-level U or R formula with shallow operands."""
    coalition = agent_set(
        a for a in range(1, agent_count + 1) if rng.random() < 0.5
    )
    lhs = gen_formula(rng, agent_count, config, depth=1)
    rhs = gen_formula(rng, agent_count, config, depth=1)
    cls = CoopU if rng.random() < 0.5 else CoopR
    return cls(coalition, lhs, rhs)
