"""Executable state machine for evaluation games on finite and lazy models.

A session walks the game position by position: Boolean rules fire
automatically, disjunctions ask the position's verifier, strategic formulas
spawn one-step or embedded games whose offers and moves are applied in the
fixed rule order (time exhaustion, controller end-offer, opponent end-offer,
verifier step, falsifier step, limit lowering).  Machine players follow
label-derived canonical strategies on finite models and named scripts on
lazy models; every transition is recorded in a replayable transcript.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from atlgts.cgm import ALL_NATURALS, AllNaturals, LazyModel, Model, stable_bound
from atlgts.embedded_solver import (
    EXIT,
    ControllerStrategy,
    EmbeddedGameSpec,
    LabelMap,
    NonControllerStrategy,
    Full,
    InfinityCanonical,
    Player,
    ProfileDecision,
    ResponseDecision,
    canonical_controller,
    canonical_noncontroller,
    compute_labels,
    opponent,
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
    print_formula,
    subformulas,
)
from atlgts.ordinal import OMEGA, Ordinal, OrdinalError, parse_ordinal
from atlgts.semantics import (
    FinitelyBounded as FBKind,
    GtsBounded,
    GtsUnbounded,
    SemanticsKind,
    TruthMap,
    embedded_spec_for,
    evaluate,
)

DEFAULT_STEP_BUDGET = 10_000


class IllegalMove(ValueError):
    pass


class SessionError(ValueError):
    pass


@dataclass(frozen=True)
class Unbounded:
    pass


@dataclass(frozen=True)
class Bounded:
    gamma: Ordinal | None = None  # None: stable bound on finite, w+1 on lazy


@dataclass(frozen=True)
class FinitelyBounded:
    pass


Mode = Union[Unbounded, Bounded, FinitelyBounded]


@dataclass
class EmbeddedContext:
    """Identity of the active embedded game inside the session."""

    formula_i: int
    verifier: Player
    controller: Player
    coalition: tuple[int, ...]
    goal_i: int  # exit formula claimed by the controller
    safe_i: int  # exit formula claimed by the opponent
    until: bool


@dataclass
class XStepContext:
    formula_i: int
    verifier: Player
    coalition: tuple[int, ...]
    sub_i: int


class Policy:
    """Machine move supplier; decide() returns a JSON-able move value."""

    def decide(self, session: "Session", player: Player):  # pragma: no cover
        raise NotImplementedError


@dataclass
class Session:
    model: Union[Model, LazyModel]
    root: Formula
    subs: list[Formula]
    sub_index: dict[Formula, int]
    mode: Mode
    gamma_bound: Ordinal | None
    finite_limits_only: bool
    roles: dict[Player, str]
    policies: dict[Player, Optional[Policy]]
    # dynamic state
    phase: str = "position"
    verifier: Player = "E"
    state: str = ""
    formula_i: int = 0
    emb: Optional[EmbeddedContext] = None
    xstep: Optional[XStepContext] = None
    limit: Optional[Ordinal] = None
    announced: Optional[Ordinal] = None
    pending_profile: Optional[dict[int, str]] = None
    transcript: list = field(default_factory=list)
    winner: Optional[Player] = None
    reason: Optional[str] = None
    last_exit: Optional[str] = None
    _overlay: Optional["SolverPolicy"] = None

    # -- helpers ------------------------------------------------------------

    @property
    def is_lazy(self) -> bool:
        return isinstance(self.model, LazyModel)

    def formula(self) -> Formula:
        return self.subs[self.formula_i]

    def props_at(self, state_id: str) -> frozenset[str]:
        if self.is_lazy:
            return self.model.props(state_id)
        return self.model.props_of(state_id)

    def actions_at(self, agent: int, state_id: str):
        if self.is_lazy:
            return self.model.actions(agent, state_id)
        return self.model.action_names(state_id, agent)

    def agents(self) -> tuple[int, ...]:
        return self.model.agents

    def ended(self) -> bool:
        return self.phase == "ended"

    def pending_actor(self) -> Optional[Player]:
        if self.phase == "position":
            return self.verifier
        if self.phase in ("announce", "lower-limit"):
            return self.emb.controller
        if self.phase == "controller-end":
            return self.emb.controller
        if self.phase == "opponent-end":
            return opponent(self.emb.controller)
        if self.phase == "verifier-step":
            ctx = self.emb or self.xstep
            return ctx.verifier
        if self.phase == "falsifier-step":
            ctx = self.emb or self.xstep
            return opponent(ctx.verifier)
        return None

    def _record(self, phase: str, actor: Optional[Player], move) -> None:
        if self.emb is not None:
            context = "embedded"
        elif self.xstep is not None:
            context = "xstep"
        else:
            context = None
        self.transcript.append(
            {
                "phase": phase,
                "actor": actor,
                "move": move,
                "state": self.state,
                "limit": None if self.limit is None else str(self.limit),
                "context": context,
            }
        )

    # -- settling ------------------------------------------------------------

    def _end(self, winner: Player, default_reason: str) -> None:
        self.winner = winner
        self.reason = self.last_exit or default_reason
        self.phase = "ended"
        self._record("ended", None, {"winner": winner, "reason": self.reason})

    def _exit_to(self, formula_i: int, kind: str) -> None:
        """Leave the embedded game at the exit position (V, state, claim)."""
        assert self.emb is not None
        self.verifier = self.emb.verifier
        self.formula_i = formula_i
        self.emb = None
        self.limit = None
        self.last_exit = kind
        self.phase = "position"

    def _enter_embedded(self, f: Union[CoopU, CoopR]) -> None:
        until = isinstance(f, CoopU)
        controller = self.verifier if until else opponent(self.verifier)
        self.emb = EmbeddedContext(
            formula_i=self.formula_i,
            verifier=self.verifier,
            controller=controller,
            coalition=f.coalition,
            goal_i=self.sub_index[f.rhs],
            safe_i=self.sub_index[f.lhs],
            until=until,
        )
        self._record("embedded-entry", None, {"formula": print_formula(f)})
        if self.gamma_bound is not None:
            self.phase = "announce"
        else:
            self.phase = "round-start"

    def _apply_step_profiles(self, falsifier_profile: dict[int, str]) -> None:
        ctx = self.emb or self.xstep
        full = dict(self.pending_profile or {})
        full.update(falsifier_profile)
        names = tuple(full[a] for a in self.agents())
        if self.is_lazy:
            next_state = self.model.step(self.state, names)
        else:
            qi = self.model.index(self.state)
            idx = tuple(
                self.model.actions[qi][a - 1].index(full[a]) for a in self.agents()
            )
            next_state = self.model.states[self.model.transitions[qi][idx]]
        self.pending_profile = None
        self.state = next_state
        if self.xstep is not None:
            sub_i = self.xstep.sub_i
            self.verifier = self.xstep.verifier
            self.formula_i = sub_i
            self.xstep = None
            self.phase = "position"
            return
        # Embedded step: lower the limit per the configuration rule.
        if self.gamma_bound is None:
            self.phase = "round-start"
        elif self.limit.is_successor():
            self.limit = self.limit.predecessor()
            self.phase = "round-start"
        else:
            self.phase = "lower-limit"

    def _settle(self) -> None:
        """Apply automatic rules until a choice point or the end of the game."""
        while True:
            if self.phase == "position":
                f = self.formula()
                if isinstance(f, Prop):
                    holds = f.name in self.props_at(self.state)
                    winner = self.verifier if holds else opponent(self.verifier)
                    self._end(winner, "ending-position-prop")
                    return
                if isinstance(f, TrueF):
                    self._end(self.verifier, "true-false-atom")
                    return
                if isinstance(f, FalseF):
                    self._end(opponent(self.verifier), "true-false-atom")
                    return
                if isinstance(f, Not):
                    self._record("negation", None, None)
                    self.verifier = opponent(self.verifier)
                    self.formula_i = self.sub_index[f.sub]
                    continue
                if isinstance(f, Or):
                    break
                if isinstance(f, CoopX):
                    self.xstep = XStepContext(
                        formula_i=self.formula_i,
                        verifier=self.verifier,
                        coalition=f.coalition,
                        sub_i=self.sub_index[f.sub],
                    )
                    self.phase = "verifier-step"
                    continue
                if isinstance(f, (CoopU, CoopR)):
                    self._enter_embedded(f)
                    continue
                raise TypeError(f"not a formula node: {f!r}")
            if self.phase == "round-start":
                if self.gamma_bound is not None and self.limit.is_zero():
                    self._record("time-exhausted-exit", None, None)
                    self._exit_to(self.emb.goal_i, "time-exhausted-exit")
                    continue
                self.phase = "controller-end"
                break
            if self.phase == "verifier-step":
                ctx = self.emb or self.xstep
                if not ctx.coalition:
                    self._record("verifier-step", None, {})
                    self.pending_profile = {}
                    self.phase = "falsifier-step"
                    continue
                break
            if self.phase == "falsifier-step":
                ctx = self.emb or self.xstep
                complement = tuple(a for a in self.agents() if a not in ctx.coalition)
                if not complement:
                    self._record("falsifier-step", None, {})
                    self._apply_step_profiles({})
                    continue
                break
            # announce, controller-end, opponent-end, lower-limit, ended
            break
        if self.phase != "ended":
            self.last_exit = None

    # -- move legality --------------------------------------------------------

    def _profile_menu(self, agents: tuple[int, ...]) -> dict:
        options: dict[str, object] = {}
        for a in agents:
            acts = self.actions_at(a, self.state)
            if isinstance(acts, AllNaturals):
                options[str(a)] = "naturals"
            else:
                options[str(a)] = list(acts)
        return {"kind": "profile", "agents": options}

    def _ordinal_menu(self, below: Ordinal, finite_only: bool) -> dict:
        menu: dict[str, object] = {
            "kind": "ordinal",
            "below": str(below),
            "finiteOnly": finite_only,
        }
        if below.is_finite():
            menu["choices"] = [str(i) for i in range(below.to_int())]
        return menu

    def legal_moves(self) -> dict:
        """The exact menu for the pending actor."""
        if self.ended():
            raise SessionError("session has ended")
        actor = self.pending_actor()
        if self.phase == "position":
            menu = {"kind": "choice", "options": ["left", "right"]}
        elif self.phase in ("controller-end", "opponent-end"):
            menu = {"kind": "choice", "options": ["end", "continue"]}
        elif self.phase == "announce":
            menu = self._ordinal_menu(self.gamma_bound, self.finite_limits_only)
        elif self.phase == "lower-limit":
            menu = self._ordinal_menu(self.limit, False)
        elif self.phase == "verifier-step":
            ctx = self.emb or self.xstep
            menu = self._profile_menu(ctx.coalition)
        elif self.phase == "falsifier-step":
            ctx = self.emb or self.xstep
            complement = tuple(a for a in self.agents() if a not in ctx.coalition)
            menu = self._profile_menu(complement)
        else:  # pragma: no cover
            raise SessionError(f"no moves in phase {self.phase}")
        return {"phase": self.phase, "actor": actor, "menu": menu}

    def _parse_profile(self, move, agents: tuple[int, ...]) -> dict[int, str]:
        if not isinstance(move, dict):
            raise IllegalMove("profile move must map agent to action")
        try:
            given = {int(k): str(v) for k, v in move.items()}
        except (TypeError, ValueError):
            raise IllegalMove("profile keys must be agent numbers") from None
        if set(given) != set(agents):
            want = ",".join(str(a) for a in agents)
            raise IllegalMove(f"profile must cover exactly agents {{{want}}}")
        for a in agents:
            acts = self.actions_at(a, self.state)
            if isinstance(acts, AllNaturals):
                if not given[a].isdigit():
                    raise IllegalMove(f"agent {a} needs a natural-number action")
            elif given[a] not in acts:
                raise IllegalMove(
                    f"action {given[a]!r} not available to agent {a} at {self.state}"
                )
        return given

    def _parse_ordinal_move(self, move, below: Ordinal, finite_only: bool) -> Ordinal:
        if isinstance(move, int):
            move = str(move)
        if not isinstance(move, str):
            raise IllegalMove("expected ordinal text")
        try:
            value = parse_ordinal(move)
        except OrdinalError as exc:
            raise IllegalMove(str(exc)) from None
        if finite_only and not value.is_finite():
            raise IllegalMove("finite limits only")
        if not value < below:
            raise IllegalMove(f"limit must be strictly below {below}")
        return value

    def apply_move(self, actor: Player, move) -> "Session":
        """Validate and apply one move of the pending actor, then settle."""
        if self.ended():
            raise SessionError("session has ended")
        expected = self.pending_actor()
        if actor != expected:
            raise IllegalMove(f"it is {expected}'s turn")
        phase = self.phase
        if phase == "position":
            if move not in ("left", "right"):
                raise IllegalMove("choose 'left' or 'right'")
            f = self.formula()
            self._record(phase, actor, move)
            self.formula_i = self.sub_index[f.left if move == "left" else f.right]
        elif phase == "announce":
            value = self._parse_ordinal_move(
                move, self.gamma_bound, self.finite_limits_only
            )
            self._record(phase, actor, str(value))
            self.limit = value
            self.announced = value
            self.phase = "round-start"
        elif phase == "controller-end":
            if move not in ("end", "continue"):
                raise IllegalMove("choose 'end' or 'continue'")
            self._record(phase, actor, move)
            if move == "end":
                self._exit_to(self.emb.goal_i, "voluntary-exit")
            else:
                self.phase = "opponent-end"
        elif phase == "opponent-end":
            if move not in ("end", "continue"):
                raise IllegalMove("choose 'end' or 'continue'")
            self._record(phase, actor, move)
            if move == "end":
                self._exit_to(self.emb.safe_i, "voluntary-exit")
            else:
                self.phase = "verifier-step"
        elif phase == "verifier-step":
            ctx = self.emb or self.xstep
            profile = self._parse_profile(move, ctx.coalition)
            self._record(phase, actor, {str(a): v for a, v in profile.items()})
            self.pending_profile = profile
            self.phase = "falsifier-step"
        elif phase == "falsifier-step":
            ctx = self.emb or self.xstep
            complement = tuple(a for a in self.agents() if a not in ctx.coalition)
            profile = self._parse_profile(move, complement)
            self._record(phase, actor, {str(a): v for a, v in profile.items()})
            self._apply_step_profiles(profile)
        elif phase == "lower-limit":
            value = self._parse_ordinal_move(move, self.limit, False)
            self._record(phase, actor, str(value))
            self.limit = value
            self.phase = "round-start"
        else:  # pragma: no cover
            raise SessionError(f"no moves in phase {phase}")
        self._settle()
        return self

    # -- machine play ----------------------------------------------------------

    def machine_pending(self) -> bool:
        actor = self.pending_actor()
        return actor is not None and self.roles[actor] == "machine"

    def machine_reply(self) -> "Session":
        actor = self.pending_actor()
        if actor is None or self.roles[actor] != "machine":
            raise SessionError("no machine move pending")
        policy = self.policies[actor]
        move = policy.decide(self, actor)
        return self.apply_move(actor, move)

    def transcript_json(self) -> dict:
        moves = [dict(rec) for rec in self.transcript]
        return {"moves": moves, "winner": self.winner, "reason": self.reason}

    def solver(self) -> "SolverPolicy":
        """Solver data for views and label overlays; finite models only."""
        if self.is_lazy:
            raise SessionError("no solver data on lazy models")
        for policy in self.policies.values():
            if isinstance(policy, SolverPolicy):
                return policy
        if self._overlay is None:
            self._overlay = SolverPolicy(
                self.model, self.root, self.mode, self.gamma_bound
            )
        return self._overlay

    def label_context(self) -> Optional[int]:
        """Subformula index of the embedded game the overlay should show:
        the active one, else the root when it is strategic."""
        if self.emb is not None:
            return self.emb.formula_i
        if isinstance(self.root, (CoopU, CoopR)):
            return self.sub_index[self.root]
        return None


def _resolve_gamma(model, mode: Mode) -> tuple[Ordinal | None, bool]:
    if isinstance(mode, Unbounded):
        return None, False
    if isinstance(mode, FinitelyBounded):
        return OMEGA, True
    if mode.gamma is not None:
        return mode.gamma, False
    if isinstance(model, LazyModel):
        return OMEGA.plus(1), False
    return stable_bound(model), False


def _policy_kind(mode: Mode, gamma: Ordinal | None) -> SemanticsKind:
    if isinstance(mode, Unbounded):
        return GtsUnbounded()
    return GtsBounded(gamma)


@dataclass
class _EmbeddedData:
    spec: EmbeddedGameSpec
    controller_map: LabelMap
    opponent_map: LabelMap
    controller_strategy: ControllerStrategy
    opponent_strategy: NonControllerStrategy


class SolverPolicy(Policy):
    """Canonical machine play on finite models, assembled from the solver:
    disjunct choices by truth sets, steps and end-offers by canonical
    strategies, announcements by the controller's labels, lowering by the
    canonical timer."""

    def __deepcopy__(self, memo) -> "SolverPolicy":
        return self  # deterministic and append-only cached; shared freely

    def __init__(self, model: Model, root: Formula, mode: Mode, gamma: Ordinal | None):
        self.model = model
        solve_gamma = gamma if gamma is not None else stable_bound(model)
        self.gamma = solve_gamma
        self.truth: TruthMap = evaluate(model, root, _policy_kind(mode, solve_gamma))
        self.variant = InfinityCanonical() if gamma is None else Full()
        self._embedded: dict[int, _EmbeddedData] = {}
        self.announce_override: dict[Player, Ordinal] = {}

    def embedded_data(self, session: Session, formula_i: int) -> _EmbeddedData:
        data = self._embedded.get(formula_i)
        if data is None:
            sub = session.subs[formula_i]
            psi_mask = self.truth.masks[self.truth.subs.index(sub.lhs)]
            theta_mask = self.truth.masks[self.truth.subs.index(sub.rhs)]
            spec = embedded_spec_for(self.model, sub, psi_mask, theta_mask)
            bound = (
                self.gamma.plus(1)
                if isinstance(self.variant, InfinityCanonical)
                else self.gamma
            )
            cmap = compute_labels(spec, self.gamma)
            omap = opponent_labels(cmap)
            data = _EmbeddedData(
                spec=spec,
                controller_map=cmap,
                opponent_map=omap,
                controller_strategy=canonical_controller(spec, cmap),
                opponent_strategy=canonical_noncontroller(
                    spec, omap, self.variant, gamma_bound=bound
                ),
            )
            self._embedded[formula_i] = data
        return data

    def _truth_at(self, f: Formula, state_id: str) -> bool:
        return self.truth.is_true(state_id, f)

    def _decision_to_move(
        self, session: Session, decision, coalition_profile_index: int | None = None
    ) -> dict[str, str]:
        qi = self.model.index(session.state)
        if isinstance(decision, ProfileDecision):
            return {
                str(a): name
                for a, name in decision.names(self.model, session.state).items()
            }
        assert isinstance(decision, ResponseDecision)
        reply = decision.reply(coalition_profile_index)
        return {
            str(a): self.model.actions[qi][a - 1][idx]
            for a, idx in zip(decision.agents, reply)
        }

    def _pending_alpha_index(self, session: Session, coalition) -> int:
        tables = self.model.tables(coalition)
        qi = self.model.index(session.state)
        pending = session.pending_profile or {}
        idx = tuple(
            self.model.actions[qi][a - 1].index(pending[a]) for a in coalition
        )
        return tables.profiles[qi].index(idx)

    def _any_profile(self, session: Session, agents) -> dict[str, str]:
        return {str(a): self.actions_first(session, a) for a in agents}

    def actions_first(self, session: Session, agent: int) -> str:
        return self.model.action_names(session.state, agent)[0]

    def decide(self, session: Session, player: Player):
        phase = session.phase
        q = session.state
        if phase == "position":
            f = session.formula()
            if self._truth_at(f.left, q):
                return "left"
            if self._truth_at(f.right, q):
                return "right"
            return "left"
        if phase == "announce":
            override = self.announce_override.get(player)
            if override is not None:
                return str(override)
            data = self.embedded_data(session, session.emb.formula_i)
            return str(data.controller_strategy.announce(q))
        if phase == "controller-end":
            data = self.embedded_data(session, session.emb.formula_i)
            return "end" if data.controller_strategy.wants_exit(q) else "continue"
        if phase == "opponent-end":
            data = self.embedded_data(session, session.emb.formula_i)
            return "end" if data.opponent_strategy.wants_exit(q) else "continue"
        if phase == "lower-limit":
            data = self.embedded_data(session, session.emb.formula_i)
            return str(data.controller_strategy.timer(session.limit, q))
        if phase in ("verifier-step", "falsifier-step"):
            if session.xstep is not None:
                return self._xstep_move(session, player, phase)
            return self._embedded_step_move(session, player, phase)
        raise SessionError(f"machine asked to move in phase {phase}")

    def _xstep_move(self, session: Session, player: Player, phase: str):
        ctx = session.xstep
        target = self.truth.masks[ctx.sub_i]
        tables = self.model.tables(ctx.coalition)
        qi = self.model.index(session.state)
        if phase == "verifier-step":
            # Commit a profile keeping every outcome inside the target if any.
            for ai, mask in enumerate(tables.succ_mask[qi]):
                if mask & ~target == 0:
                    profile = tables.profiles[qi][ai]
                    return {
                        str(a): self.model.actions[qi][a - 1][idx]
                        for a, idx in zip(ctx.coalition, profile)
                    }
            return self._any_profile(session, ctx.coalition)
        alpha = self._pending_alpha_index(session, ctx.coalition)
        # Respond so that the verifier's formula fails next if possible.
        for bi, nxt in enumerate(tables.succ[qi][alpha]):
            if not (target >> nxt & 1):
                response = tables.responses[qi][bi]
                return {
                    str(a): self.model.actions[qi][a - 1][idx]
                    for a, idx in zip(tables.complement, response)
                }
        return self._any_profile(session, tables.complement)

    def _embedded_step_move(self, session: Session, player: Player, phase: str):
        emb = session.emb
        data = self.embedded_data(session, emb.formula_i)
        is_controller = emb.controller == player
        if is_controller:
            decision = data.controller_strategy.move(session.state)
        else:
            decision = data.opponent_strategy.decision(
                session.state, session.limit if session.limit is not None else None
            )
            if decision is EXIT:
                # End offers already passed this round; fall back to any step.
                agents = (
                    emb.coalition
                    if phase == "verifier-step"
                    else tuple(a for a in self.agents_of(session) if a not in emb.coalition)
                )
                return self._any_profile(session, agents)
        if phase == "falsifier-step":
            alpha = self._pending_alpha_index(session, emb.coalition)
            return self._decision_to_move(session, decision, alpha)
        return self._decision_to_move(session, decision)

    def agents_of(self, session: Session) -> tuple[int, ...]:
        return session.agents()

    def labels_for_context(self, session: Session, formula_i: int):
        data = self.embedded_data(session, formula_i)
        return data.controller_map, data.opponent_map, data.spec


@dataclass
class ScriptPolicy(Policy):
    """Scripted machine play for lazy models (and tests).

    Unspecified hooks fall back to safe defaults: never end, announce 0,
    play the first available action (``0`` for natural-number menus)."""

    name: str = "script"
    announce_fn: Optional[Callable[[Session], Ordinal]] = None
    controller_end_fn: Optional[Callable[[Session], bool]] = None
    opponent_end_fn: Optional[Callable[[Session], bool]] = None
    verifier_move_fn: Optional[Callable[[Session], dict[int, str]]] = None
    falsifier_move_fn: Optional[Callable[[Session], dict[int, str]]] = None
    lower_fn: Optional[Callable[[Session], Ordinal]] = None
    disjunct_fn: Optional[Callable[[Session], str]] = None

    def _default_profile(self, session: Session, agents) -> dict[str, str]:
        out = {}
        for a in agents:
            acts = session.actions_at(a, session.state)
            out[str(a)] = "0" if isinstance(acts, AllNaturals) else acts[0]
        return out

    def decide(self, session: Session, player: Player):
        phase = session.phase
        if phase == "position":
            return self.disjunct_fn(session) if self.disjunct_fn else "left"
        if phase == "announce":
            value = self.announce_fn(session) if self.announce_fn else Ordinal.nat(0)
            return str(value)
        if phase == "controller-end":
            want = self.controller_end_fn(session) if self.controller_end_fn else False
            return "end" if want else "continue"
        if phase == "opponent-end":
            want = self.opponent_end_fn(session) if self.opponent_end_fn else False
            return "end" if want else "continue"
        if phase == "lower-limit":
            value = self.lower_fn(session) if self.lower_fn else Ordinal.nat(0)
            return str(value)
        ctx = session.emb or session.xstep
        if phase == "verifier-step":
            if self.verifier_move_fn:
                return {str(a): v for a, v in self.verifier_move_fn(session).items()}
            return self._default_profile(session, ctx.coalition)
        if phase == "falsifier-step":
            complement = tuple(a for a in session.agents() if a not in ctx.coalition)
            if self.falsifier_move_fn:
                return {str(a): v for a, v in self.falsifier_move_fn(session).items()}
            return self._default_profile(session, complement)
        raise SessionError(f"script asked to move in phase {phase}")


# -- fig2 scripts --------------------------------------------------------------


def _fig2_coords(state: str) -> tuple[int, int] | None:
    if state == "q0":
        return None
    i_text, j_text = state.split(",")
    return int(i_text), int(j_text)


def _fig2_distance(session: Session) -> Ordinal:
    coords = _fig2_coords(session.state)
    if coords is None:
        return Ordinal.nat(0)
    i, j = coords
    return Ordinal.nat(max(0, i - j))


def fig2_abelard_script(n: int | None = None) -> ScriptPolicy:
    """At the branching state pick action n (or the announced limit when n is
    not given); afterwards the single action.  Never take the own exit."""

    def falsifier_move(session: Session) -> dict[int, str]:
        if session.state == "q0":
            if n is not None:
                return {1: str(n)}
            if session.announced is None or not session.announced.is_finite():
                return {1: "0"}
            return {1: str(session.announced.to_int())}
        return {1: "0"}

    return ScriptPolicy(name="fig2-abelard", falsifier_move_fn=falsifier_move)


def fig2_eloise_fixed_script(n: int) -> ScriptPolicy:
    """Announce a fixed natural and take the goal exit as soon as p holds."""
    return ScriptPolicy(
        name="fig2-eloise-n",
        announce_fn=lambda session: Ordinal.nat(n),
        controller_end_fn=lambda session: "p" in session.props_at(session.state),
    )


def fig2_eloise_omega_script() -> ScriptPolicy:
    """Announce w, then lower to the remaining diagonal distance."""
    return ScriptPolicy(
        name="fig2-eloise-omega",
        announce_fn=lambda session: OMEGA,
        lower_fn=_fig2_distance,
        controller_end_fn=lambda session: "p" in session.props_at(session.state),
    )


def fig2_eloise_diag_script() -> ScriptPolicy:
    """Announce the remaining diagonal distance of the current state."""
    return ScriptPolicy(
        name="fig2-eloise-diag",
        announce_fn=_fig2_distance,
        controller_end_fn=lambda session: "p" in session.props_at(session.state),
    )


SCRIPTS: dict[str, Callable[..., ScriptPolicy]] = {
    "fig2-abelard": fig2_abelard_script,
    "fig2-eloise-n": fig2_eloise_fixed_script,
    "fig2-eloise-omega": fig2_eloise_omega_script,
    "fig2-eloise-diag": fig2_eloise_diag_script,
}


def make_script(name: str, n: int | None = None) -> ScriptPolicy:
    try:
        factory = SCRIPTS[name]
    except KeyError:
        raise ValueError(f"unknown script {name!r}") from None
    if name == "fig2-abelard":
        return factory(n)
    if name == "fig2-eloise-n":
        if n is None:
            raise ValueError("script fig2-eloise-n needs a number")
        return factory(n)
    return factory()


# -- session construction --------------------------------------------------------


def new_session(
    model: Union[Model, LazyModel],
    state: str,
    f: Formula,
    mode: Mode,
    roles: dict[Player, str],
    scripts: Optional[dict[Player, ScriptPolicy]] = None,
    announce_override: Optional[dict[Player, Ordinal]] = None,
) -> Session:
    """Start an evaluation game at (E, state, f)."""
    scripts = scripts or {}
    for p in ("E", "A"):
        if p not in roles or roles[p] not in ("human", "machine"):
            raise SessionError("roles must map E and A to 'human' or 'machine'")
    if isinstance(model, LazyModel):
        try:
            model.props(state)
        except ValueError:
            raise SessionError(f"unknown state {state!r}") from None
    else:
        if not model.has_state(state):
            raise SessionError(f"unknown state {state!r}")
    gamma, finite_only = _resolve_gamma(model, mode)

    subs = subformulas(f)
    sub_index = {g: i for i, g in enumerate(subs)}
    policies: dict[Player, Optional[Policy]] = {"E": None, "A": None}
    solver_policy: Optional[SolverPolicy] = None
    for p in ("E", "A"):
        if roles[p] != "machine":
            if p in scripts and scripts[p] is not None:
                policies[p] = scripts[p]
            continue
        if p in scripts and scripts[p] is not None:
            policies[p] = scripts[p]
        elif isinstance(model, LazyModel):
            raise SessionError("lazy model requires scripted machine")
        else:
            if solver_policy is None:
                solver_policy = SolverPolicy(model, f, mode, gamma)
                if announce_override:
                    solver_policy.announce_override.update(announce_override)
            policies[p] = solver_policy

    session = Session(
        model=model,
        root=f,
        subs=subs,
        sub_index=sub_index,
        mode=mode,
        gamma_bound=gamma,
        finite_limits_only=finite_only,
        roles=dict(roles),
        policies=policies,
        verifier="E",
        state=state,
        formula_i=sub_index[f],
    )
    session._record("start", None, {"formula": print_formula(f), "state": state})
    session._settle()
    return session


def legal_moves(session: Session) -> dict:
    return session.legal_moves()


def apply_move(session: Session, actor: Player, move) -> Session:
    return session.apply_move(actor, move)


def run_machine(session: Session, step_budget: int = DEFAULT_STEP_BUDGET) -> dict:
    """Play all machine-pending moves until the game ends, a human must move,
    or the budget runs out.

    Budget exhaustion inside an embedded game is reported as
    ``step-budget-exceeded``; genuinely infinite embedded play loses for the
    controller, so that player is charged with the loss.
    """
    if step_budget < 1:
        raise ValueError("step budget must be at least 1")
    steps = 0
    while not session.ended() and session.machine_pending():
        if steps >= step_budget:
            if session.emb is not None:
                session.winner = opponent(session.emb.controller)
            session.reason = "step-budget-exceeded"
            session.phase = "ended"
            session._record(
                "ended",
                None,
                {"winner": session.winner, "reason": session.reason},
            )
            break
        session.machine_reply()
        steps += 1
    return session.transcript_json()
