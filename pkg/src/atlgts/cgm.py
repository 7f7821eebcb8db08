"""Concurrent game models: data types, JSON file format, validation,
branching statistics, and a lazy-model interface for on-demand infinite
models used in interactive play.

States and actions are strings in files and public APIs; internally states
are interned to dense indices so that label arrays and profile tables have
O(1) indexing.  Per-coalition move tables (profiles, responses, successor
bitmasks) are computed once per model and cached.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from atlgts.ordinal import Ordinal

PROFILE_SEP = "|"


class ModelError(ValueError):
    """Parse or validation failure; the message lists every violation found."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("invalid model:\n" + "\n".join(f"- {e}" for e in self.errors))


@dataclass(frozen=True)
class CoalitionTables:
    """Per-state move tables for one coalition of a finite model.

    ``profiles[q]`` lists the coalition's action tuples (lexicographic in
    per-agent action order), ``responses[q]`` the complement's, ``succ[q][a][b]``
    the successor state index, and ``succ_mask[q][a]`` the bitmask of states
    that remain possible once the coalition has committed to profile ``a``.
    """

    coalition: tuple[int, ...]
    complement: tuple[int, ...]
    profiles: tuple[tuple[tuple[int, ...], ...], ...]
    responses: tuple[tuple[tuple[int, ...], ...], ...]
    succ: tuple[tuple[tuple[int, ...], ...], ...]
    succ_mask: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Model:
    """Finite concurrent game model.

    agents are 1..agent_count; ``actions[q][i-1]`` is agent i's non-empty
    action list at state index q; ``transitions[q]`` maps each full action
    index profile (one index per agent, in agent order) to a state index.
    """

    agent_count: int
    states: tuple[str, ...]
    props: tuple[frozenset[str], ...]
    actions: tuple[tuple[tuple[str, ...], ...], ...]
    transitions: tuple[dict[tuple[int, ...], int], ...]
    _index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    _tables: dict[tuple[int, ...], CoalitionTables] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        self._index.update({q: i for i, q in enumerate(self.states)})

    def __deepcopy__(self, memo) -> "Model":
        return self  # immutable after validation; shared freely

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(range(1, self.agent_count + 1))

    def index(self, state_id: str) -> int:
        try:
            return self._index[state_id]
        except KeyError:
            raise ValueError(f"unknown state {state_id!r}") from None

    def has_state(self, state_id: str) -> bool:
        return state_id in self._index

    def props_of(self, state_id: str) -> frozenset[str]:
        return self.props[self.index(state_id)]

    def full_mask(self) -> int:
        return (1 << len(self.states)) - 1

    def mask_of(self, state_ids: Iterable[str]) -> int:
        mask = 0
        for q in state_ids:
            mask |= 1 << self.index(q)
        return mask

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(q for i, q in enumerate(self.states) if mask >> i & 1)

    def tables(self, coalition: tuple[int, ...]) -> CoalitionTables:
        """Move tables for a coalition, built on first use."""
        cached = self._tables.get(coalition)
        if cached is not None:
            return cached
        for a in coalition:
            if a < 1 or a > self.agent_count:
                raise ValueError(f"coalition references unknown agent {a}")
        complement = tuple(a for a in self.agents if a not in coalition)
        profiles, responses, succ, succ_mask = [], [], [], []
        for qi in range(len(self.states)):
            acts = self.actions[qi]
            own = list(
                itertools.product(*(range(len(acts[a - 1])) for a in coalition))
            )
            other = list(
                itertools.product(*(range(len(acts[a - 1])) for a in complement))
            )
            q_succ: list[tuple[int, ...]] = []
            q_mask: list[int] = []
            trans = self.transitions[qi]
            for alpha in own:
                row = []
                mask = 0
                for beta in other:
                    full = [0] * self.agent_count
                    for agent, act in zip(coalition, alpha):
                        full[agent - 1] = act
                    for agent, act in zip(complement, beta):
                        full[agent - 1] = act
                    nxt = trans[tuple(full)]
                    row.append(nxt)
                    mask |= 1 << nxt
                q_succ.append(tuple(row))
                q_mask.append(mask)
            profiles.append(tuple(own))
            responses.append(tuple(other))
            succ.append(tuple(q_succ))
            succ_mask.append(tuple(q_mask))
        tables = CoalitionTables(
            coalition=coalition,
            complement=complement,
            profiles=tuple(profiles),
            responses=tuple(responses),
            succ=tuple(succ),
            succ_mask=tuple(succ_mask),
        )
        self._tables[coalition] = tables
        return tables

    def action_names(self, state_id: str, agent: int) -> tuple[str, ...]:
        return self.actions[self.index(state_id)][agent - 1]


@dataclass(frozen=True)
class BranchingReport:
    """Per-state branching degrees and the stable time-limit bound."""

    degrees: dict[str, int]
    image_finite: bool
    stable_bound: Ordinal | None


class AllNaturals:
    """Marker for an action set indexed by the natural numbers."""

    def __repr__(self) -> str:
        return "AllNaturals"


ALL_NATURALS = AllNaturals()


@dataclass(frozen=True)
class LazyModel:
    """On-demand model for interactive play; transition data is computed,
    never enumerated.  props/step must be pure functions of their inputs."""

    name: str
    agent_count: int
    initial: str
    props: Callable[[str], frozenset[str]]
    actions: Callable[[int, str], tuple[str, ...] | AllNaturals]
    step: Callable[[str, tuple[str, ...]], str]
    image_finite: bool = True

    @property
    def agents(self) -> tuple[int, ...]:
        return tuple(range(1, self.agent_count + 1))


# --- file format -----------------------------------------------------------


def _profile_key(names: Iterable[str]) -> str:
    return PROFILE_SEP.join(names)


def model_from_dict(data: object) -> Model:
    """Validate a decoded JSON object; failures list every violated invariant."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ModelError(["top level must be a JSON object"])
    expected_keys = {"agents", "states", "props", "actions", "transitions"}
    for key in data:
        if key not in expected_keys:
            errors.append(f"unexpected key {key!r}")
    for key in expected_keys:
        if key not in data:
            errors.append(f"missing key {key!r}")
    if errors:
        raise ModelError(errors)

    agents = data["agents"]
    if not isinstance(agents, int) or agents < 1:
        raise ModelError(["'agents' must be a positive integer"])

    raw_states = data["states"]
    if not isinstance(raw_states, list) or not raw_states:
        raise ModelError(["'states' must be a non-empty list"])
    states: list[str] = []
    seen = set()
    for q in raw_states:
        if not isinstance(q, str) or not q:
            errors.append(f"state ids must be non-empty strings, got {q!r}")
        elif q in seen:
            errors.append(f"duplicate state id {q!r}")
        else:
            seen.add(q)
            states.append(q)
    if errors:
        raise ModelError(errors)

    def check_map(name: str, value: object) -> dict:
        if not isinstance(value, dict):
            errors.append(f"'{name}' must be an object keyed by state id")
            return {}
        for q in value:
            if q not in seen:
                errors.append(f"'{name}' mentions unknown state {q!r}")
        for q in states:
            if q not in value:
                errors.append(f"'{name}' is missing state {q!r}")
        return value

    raw_props = check_map("props", data["props"])
    raw_actions = check_map("actions", data["actions"])
    raw_transitions = check_map("transitions", data["transitions"])
    if errors:
        raise ModelError(errors)

    props: list[frozenset[str]] = []
    for q in states:
        entry = raw_props[q]
        if not isinstance(entry, list) or not all(isinstance(p, str) for p in entry):
            errors.append(f"props[{q!r}] must be a list of names")
            props.append(frozenset())
        else:
            props.append(frozenset(entry))

    agent_keys = [str(a) for a in range(1, agents + 1)]
    actions: list[tuple[tuple[str, ...], ...]] = []
    broken_action_states: set[str] = set()
    for q in states:
        entry = raw_actions[q]
        per_agent: list[tuple[str, ...]] = []
        if not isinstance(entry, dict):
            errors.append(f"actions[{q!r}] must map agent to action list")
            entry = {}
        for key in entry:
            if key not in agent_keys:
                errors.append(f"actions[{q!r}] mentions unknown agent {key!r}")
        for key in agent_keys:
            acts = entry.get(key)
            if acts is None:
                errors.append(f"actions[{q!r}] is missing agent {key}")
                broken_action_states.add(q)
                per_agent.append(("?",))
                continue
            if not isinstance(acts, list) or not all(
                isinstance(a, str) and a for a in acts
            ):
                errors.append(f"actions[{q!r}][{key}] must be a list of names")
                broken_action_states.add(q)
                per_agent.append(("?",))
                continue
            if not acts:
                errors.append(f"empty action set for agent {key} at state {q!r}")
                broken_action_states.add(q)
                per_agent.append(("?",))
                continue
            if len(set(acts)) != len(acts):
                errors.append(f"duplicate actions for agent {key} at state {q!r}")
                broken_action_states.add(q)
            if any(PROFILE_SEP in a for a in acts):
                errors.append(
                    f"action names may not contain {PROFILE_SEP!r} (state {q!r})"
                )
                broken_action_states.add(q)
            per_agent.append(tuple(acts))
        actions.append(tuple(per_agent))

    transitions: list[dict[tuple[int, ...], int]] = []
    state_index = {q: i for i, q in enumerate(states)}
    for qi, q in enumerate(states):
        entry = raw_transitions[q]
        table: dict[tuple[int, ...], int] = {}
        if q in broken_action_states:
            # The legal profile set is unknown; transition checks would only
            # produce misleading noise for this state.
            transitions.append(table)
            continue
        if not isinstance(entry, dict):
            errors.append(f"transitions[{q!r}] must map profile keys to states")
            transitions.append(table)
            continue
        legal = {}
        for combo in itertools.product(*(range(len(acts)) for acts in actions[qi])):
            names = tuple(actions[qi][i][c] for i, c in enumerate(combo))
            legal[_profile_key(names)] = combo
        for key in entry:
            if key not in legal:
                errors.append(f"transitions[{q!r}] has unknown profile {key!r}")
        for key, combo in legal.items():
            target = entry.get(key)
            if target is None:
                errors.append(f"missing transition for (state {q!r}, profile {key!r})")
            elif target not in state_index:
                errors.append(
                    f"transitions[{q!r}][{key!r}] targets unknown state {target!r}"
                )
            else:
                table[combo] = state_index[target]
        transitions.append(table)

    if errors:
        raise ModelError(errors)
    return Model(
        agent_count=agents,
        states=tuple(states),
        props=tuple(props),
        actions=tuple(actions),
        transitions=tuple(transitions),
    )


def load_model(data: bytes | str) -> Model:
    """Load and validate a model from JSON bytes or text."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        decoded = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError([f"JSON parse error: {exc}"]) from None
    return model_from_dict(decoded)


def model_to_dict(m: Model) -> dict:
    props = {q: sorted(m.props[i]) for i, q in enumerate(m.states)}
    actions = {
        q: {str(a): list(m.actions[i][a - 1]) for a in m.agents}
        for i, q in enumerate(m.states)
    }
    transitions = {}
    for i, q in enumerate(m.states):
        table = {}
        for combo, target in m.transitions[i].items():
            names = tuple(m.actions[i][j][c] for j, c in enumerate(combo))
            table[_profile_key(names)] = m.states[target]
        transitions[q] = table
    return {
        "agents": m.agent_count,
        "states": list(m.states),
        "props": props,
        "actions": actions,
        "transitions": transitions,
    }


def save_model(m: Model) -> bytes:
    """Canonical JSON encoding; load_model(save_model(m)) == m."""
    return (json.dumps(model_to_dict(m), indent=2, sort_keys=True) + "\n").encode("utf-8")


# --- statistics ------------------------------------------------------------


def branching_degree(m: Model, state_id: str) -> int:
    """Number of distinct successors over all full action profiles."""
    qi = m.index(state_id)
    return len(set(m.transitions[qi].values()))


def stable_bound(m: Model) -> Ordinal:
    """State count; labels never change when the time-limit bound grows past it."""
    return Ordinal.nat(len(m.states))


def branching_report(m: Model) -> BranchingReport:
    return BranchingReport(
        degrees={q: branching_degree(m, q) for q in m.states},
        image_finite=True,
        stable_bound=stable_bound(m),
    )


def lazy_branching_report(m: LazyModel) -> BranchingReport:
    from atlgts.ordinal import OMEGA

    return BranchingReport(
        degrees={},
        image_finite=m.image_finite,
        stable_bound=OMEGA if m.image_finite else None,
    )


# --- built-in models -------------------------------------------------------


def line_model(n: int) -> Model:
    """Single-agent chain q0 -> ... -> qn with p exactly at qn and a loop there."""
    if n < 0:
        raise ValueError("n must be non-negative")
    states = tuple(f"q{i}" for i in range(n + 1))
    props = tuple(frozenset({"p"}) if i == n else frozenset() for i in range(n + 1))
    actions = tuple((("0",),) for _ in range(n + 1))
    transitions = tuple({(0,): min(i + 1, n)} for i in range(n + 1))
    return Model(1, states, props, actions, transitions)


def fig3_model() -> Model:
    """Six-state chain q0..q5 with p only at q3 and a self-loop at q5.

    Finite truncation of the one-action line whose labels under <<>> F p
    are the standard regression fixture: 3,2,1,0,lose,lose at bound 4.
    """
    states = tuple(f"q{i}" for i in range(6))
    props = tuple(frozenset({"p"}) if i == 3 else frozenset() for i in range(6))
    actions = tuple((("0",),) for _ in range(6))
    transitions = tuple({(0,): min(i + 1, 5)} for i in range(6))
    return Model(1, states, props, actions, transitions)


def _fig2_props(q: str) -> frozenset[str]:
    if q == "q0":
        return frozenset()
    i, j = _fig2_parse(q)
    return frozenset({"p"}) if i == j else frozenset()


def _fig2_parse(q: str) -> tuple[int, int]:
    try:
        i_text, j_text = q.split(",")
        i, j = int(i_text), int(j_text)
    except ValueError:
        raise ValueError(f"unknown state {q!r}") from None
    if i < 0 or j < 0:
        raise ValueError(f"unknown state {q!r}")
    return i, j


def _fig2_actions(agent: int, q: str) -> tuple[str, ...] | AllNaturals:
    if agent != 1:
        raise ValueError(f"unknown agent {agent}")
    if q == "q0":
        return ALL_NATURALS
    _fig2_parse(q)
    return ("0",)


def _fig2_step(q: str, profile: tuple[str, ...]) -> str:
    (act,) = profile
    if q == "q0":
        return f"{int(act)},0"
    i, j = _fig2_parse(q)
    if act != "0":
        raise ValueError(f"illegal action {act!r} at {q!r}")
    return f"{i},{j + 1}"


def fig2_lazy_model() -> LazyModel:
    """The grid model with one agent: q0 branches to (i,0) for every natural i,
    then each row advances (i,j) -> (i,j+1); p holds exactly on the diagonal."""
    return LazyModel(
        name="fig2",
        agent_count=1,
        initial="q0",
        props=_fig2_props,
        actions=_fig2_actions,
        step=_fig2_step,
        image_finite=False,
    )


LAZY_MODELS: dict[str, Callable[[], LazyModel]] = {
    "fig2": fig2_lazy_model,
}


def lazy_model(name: str) -> LazyModel:
    try:
        return LAZY_MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown lazy model {name!r}") from None
