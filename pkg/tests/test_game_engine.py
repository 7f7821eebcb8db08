import copy

import pytest

from conftest import adversary_can_win, corpus, enumerate_moves
from atlgts.cgm import fig2_lazy_model, fig3_model
from atlgts.formula import parse_formula, print_formula
from atlgts.game_engine import (
    Bounded,
    FinitelyBounded,
    IllegalMove,
    SessionError,
    Unbounded,
    fig2_abelard_script,
    fig2_eloise_diag_script,
    fig2_eloise_fixed_script,
    fig2_eloise_omega_script,
    make_script,
    new_session,
    run_machine,
)
from atlgts.generators import GenConfig, gen_formula
from atlgts.ordinal import Ordinal, parse_ordinal
from atlgts.semantics import GtsBounded, GtsUnbounded, Standard, evaluate

F_P = parse_formula("<<>> F p")
MACHINES = {"E": "machine", "A": "machine"}
HUMANS = {"E": "human", "A": "human"}


def test_initial_position(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(None), MACHINES)
    assert s.gamma_bound == Ordinal.nat(6)  # stable bound by default
    # The root is strategic, so the session settles at the announce phase
    # with Eloise (the controller) to move.
    assert s.phase == "announce"
    assert s.pending_actor() == "E"
    assert s.transcript[0]["move"]["formula"] == "<<>> (true U p)"


def test_unknown_state_rejected(fig3):
    with pytest.raises(SessionError, match="unknown state"):
        new_session(fig3, "zz", F_P, Bounded(None), MACHINES)


def test_lazy_machine_needs_script():
    lazy = fig2_lazy_model()
    with pytest.raises(SessionError, match="lazy model requires scripted machine"):
        new_session(lazy, "q0", F_P, FinitelyBounded(), MACHINES)


def test_fb_announce_menu_is_natural_only():
    lazy = fig2_lazy_model()
    s = new_session(lazy, "q0", F_P, FinitelyBounded(), HUMANS)
    menu = s.legal_moves()
    assert menu["phase"] == "announce"
    assert menu["menu"]["finiteOnly"] is True
    with pytest.raises(IllegalMove, match="finite limits only"):
        s.apply_move("E", "w")


def test_disjunction_menu(fig3):
    f = parse_formula("p | q")
    s = new_session(fig3, "q3", f, Unbounded(), HUMANS)
    menu = s.legal_moves()
    assert menu["menu"] == {"kind": "choice", "options": ["left", "right"]}
    s.apply_move("E", "left")
    assert s.ended() and s.winner == "E" and s.reason == "ending-position-prop"


def test_negation_swaps_verifier(fig3):
    f = parse_formula("~p")
    s = new_session(fig3, "q0", f, Unbounded(), HUMANS)
    # p is false at q0; after the automatic negation Abelard verifies p and
    # loses, so Eloise wins.
    assert s.ended() and s.winner == "E"
    phases = [rec["phase"] for rec in s.transcript]
    assert "negation" in phases


def test_true_false_atoms(fig3):
    s = new_session(fig3, "q0", parse_formula("true"), Unbounded(), HUMANS)
    assert s.ended() and s.winner == "E" and s.reason == "true-false-atom"
    s = new_session(fig3, "q0", parse_formula("false"), Unbounded(), HUMANS)
    assert s.ended() and s.winner == "A"
    s = new_session(fig3, "q0", parse_formula("~false"), Unbounded(), HUMANS)
    assert s.ended() and s.winner == "E"


def test_zero_limit_forces_exit(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(None), HUMANS)
    s.apply_move("E", "0")
    # Rule order: at limit 0 the game exits at the controller's claim with no
    # voluntary offers; p is false at q0, so the verifier loses.
    assert s.ended()
    assert s.winner == "A"
    assert s.reason == "time-exhausted-exit"
    phases = [rec["phase"] for rec in s.transcript]
    assert "controller-end" not in phases
    assert "opponent-end" not in phases


def test_controller_offer_precedes_opponent_offer(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(None), HUMANS)
    s.apply_move("E", "3")
    assert s.phase == "controller-end"
    s.apply_move("E", "continue")
    assert s.phase == "opponent-end"
    s.apply_move("A", "continue")
    # coalition is empty: the verifier's step is automatic, Abelard responds
    assert s.phase == "falsifier-step"
    assert s.pending_actor() == "A"
    s.apply_move("A", {"1": "0"})
    assert s.state == "q1"
    assert s.limit == Ordinal.nat(2)


def test_voluntary_exit_reason(fig3):
    s = new_session(fig3, "q3", F_P, Bounded(None), HUMANS)
    s.apply_move("E", "1")
    s.apply_move("E", "end")
    assert s.ended() and s.winner == "E" and s.reason == "voluntary-exit"


def test_opponent_end_offer_exit(fig3):
    f = parse_formula("<<>> (q U p)")  # q false everywhere: Abelard's exit wins
    s = new_session(fig3, "q0", f, Bounded(None), HUMANS)
    s.apply_move("E", "3")
    s.apply_move("E", "continue")
    s.apply_move("A", "end")
    assert s.ended() and s.winner == "A" and s.reason == "voluntary-exit"


def test_illegal_moves_rejected(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(None), HUMANS)
    with pytest.raises(IllegalMove, match="turn"):
        s.apply_move("A", "0")
    with pytest.raises(IllegalMove, match="strictly below"):
        s.apply_move("E", "9")
    with pytest.raises(IllegalMove):
        s.apply_move("E", "bogus")
    s.apply_move("E", "2")
    s.apply_move("E", "continue")
    s.apply_move("A", "continue")
    with pytest.raises(IllegalMove, match="cover exactly"):
        s.apply_move("A", {})
    with pytest.raises(IllegalMove, match="not available"):
        s.apply_move("A", {"1": "jump"})


def test_machine_play_matches_labels(fig3):
    # q1 at bound 3: canonical Eloise wins in at most two embedded rounds.
    s = new_session(fig3, "q1", F_P, Bounded(Ordinal.nat(3)), MACHINES)
    t = run_machine(s)
    assert t["winner"] == "E"
    steps = [r for r in t["moves"] if r["phase"] == "falsifier-step"]
    assert len(steps) <= 2
    # q0 at bound 3 is lost; at bound 4 it is won.
    assert run_machine(new_session(fig3, "q0", F_P, Bounded(Ordinal.nat(3)), MACHINES))["winner"] == "A"
    assert run_machine(new_session(fig3, "q0", F_P, Bounded(Ordinal.nat(4)), MACHINES))["winner"] == "E"


def test_machine_announcement_is_label(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(None), MACHINES)
    run_machine(s)
    announce = next(r for r in s.transcript if r["phase"] == "announce")
    assert announce["move"] == "3"


def test_unbounded_machine_play(fig3):
    t = run_machine(new_session(fig3, "q0", F_P, Unbounded(), MACHINES))
    assert t["winner"] == "E" and t["reason"] == "voluntary-exit"
    t = run_machine(new_session(fig3, "q4", F_P, Unbounded(), MACHINES))
    assert t["winner"] == "A"


def test_unbounded_budget_exhaustion(fig3):
    # Losing controller wanders forever in unbounded mode; the budget charges
    # the controller with the loss.
    f = parse_formula("<<>> (true U z)")  # z never holds
    s = new_session(fig3, "q0", f, Unbounded(), MACHINES)
    t = run_machine(s, step_budget=50)
    assert t["reason"] == "step-budget-exceeded"
    assert t["winner"] == "A"
    with pytest.raises(ValueError):
        run_machine(new_session(fig3, "q0", f, Unbounded(), MACHINES), step_budget=0)


def test_release_controller_is_opponent(fig3):
    # <<>> (q R p): Abelard controls the clock.  At q3 (p holds, q false),
    # Abelard announces and must eventually break p.
    f = parse_formula("<<>> (q R p)")
    s = new_session(fig3, "q3", f, Bounded(None), MACHINES)
    assert s.phase == "announce"
    assert s.pending_actor() == "A"
    t = run_machine(s)
    assert t["winner"] == "A"  # q4 breaks p one step later


def test_x_step_roles(fig3):
    f = parse_formula("<<1>> X p")
    s = new_session(fig3, "q2", f, Unbounded(), HUMANS)
    assert s.phase == "verifier-step"
    assert s.pending_actor() == "E"
    s.apply_move("E", {"1": "0"})
    assert s.ended() and s.winner == "E"  # q3 satisfies p


def test_transcript_replay(fig3):
    s = new_session(fig3, "q1", F_P, Bounded(Ordinal.nat(4)), MACHINES)
    run_machine(s)
    replay = new_session(fig3, "q1", F_P, Bounded(Ordinal.nat(4)), HUMANS)
    for rec in s.transcript:
        if rec["actor"] is not None:
            replay.apply_move(rec["actor"], rec["move"])
    assert replay.ended() and replay.winner == s.winner and replay.reason == s.reason
    assert [r["phase"] for r in replay.transcript] == [r["phase"] for r in s.transcript]


def test_fig2_session_initialises():
    lazy = fig2_lazy_model()
    s = new_session(
        lazy,
        "q0",
        F_P,
        FinitelyBounded(),
        {"E": "human", "A": "machine"},
        scripts={"A": fig2_abelard_script()},
    )
    assert s.phase == "announce"
    assert s.pending_actor() == "E"
    menu = s.legal_moves()
    assert menu["menu"]["finiteOnly"] is True


def test_fig2_abelard_beats_every_finite_announcement():
    lazy = fig2_lazy_model()
    for n in range(0, 8):
        s = new_session(
            lazy,
            "q0",
            F_P,
            FinitelyBounded(),
            MACHINES,
            scripts={"E": fig2_eloise_fixed_script(n), "A": fig2_abelard_script()},
        )
        t = run_machine(s)
        assert t["winner"] == "A", f"announcement {n}"
        # Abelard's first pick equals the announcement, so p sits n+1 steps away.
        if n > 0:
            first = next(r for r in t["moves"] if r["phase"] == "falsifier-step" and r["actor"])
            assert first["move"] == {"1": str(n)}


def test_fig2_omega_announcement_wins():
    lazy = fig2_lazy_model()
    for k in range(0, 8):
        s = new_session(
            lazy,
            "q0",
            F_P,
            Bounded(parse_ordinal("w+1")),
            MACHINES,
            scripts={"E": fig2_eloise_omega_script(), "A": fig2_abelard_script(k)},
        )
        t = run_machine(s)
        assert t["winner"] == "E", f"abelard picked {k}"
        announce = next(r for r in t["moves"] if r["phase"] == "announce")
        assert announce["move"] == "w"
        lower = next(r for r in t["moves"] if r["phase"] == "lower-limit")
        assert lower["move"] == str(k)


def test_fig2_diagonal_after_x_step():
    lazy = fig2_lazy_model()
    f = parse_formula("<<>> X <<>> F p")
    for k in range(0, 8):
        s = new_session(
            lazy,
            "q0",
            f,
            FinitelyBounded(),
            MACHINES,
            scripts={"E": fig2_eloise_diag_script(), "A": fig2_abelard_script(k)},
        )
        t = run_machine(s)
        assert t["winner"] == "E", f"abelard picked {k}"


def test_omega_announcement_on_finite_model(fig3):
    # With a bound above w the machine may be forced through the limit-ordinal
    # branch: after each step the controller lowers w to the state's label.
    s = new_session(
        fig3,
        "q0",
        F_P,
        Bounded(parse_ordinal("w+1")),
        MACHINES,
        announce_override={"E": parse_ordinal("w")},
    )
    t = run_machine(s)
    assert t["winner"] == "E"
    lower = next(r for r in t["moves"] if r["phase"] == "lower-limit")
    assert lower["move"] == "2"  # canonical timer drops to the label at q1


def test_human_lowering_menu(fig3):
    s = new_session(fig3, "q0", F_P, Bounded(parse_ordinal("w+1")), HUMANS)
    s.apply_move("E", "w")
    s.apply_move("E", "continue")
    s.apply_move("A", "continue")
    s.apply_move("A", {"1": "0"})
    assert s.phase == "lower-limit"
    menu = s.legal_moves()["menu"]
    assert menu == {"kind": "ordinal", "below": "w", "finiteOnly": False}
    with pytest.raises(IllegalMove):
        s.apply_move("E", "w")  # must strictly decrease
    s.apply_move("E", "2")
    assert s.limit == Ordinal.nat(2)
    assert s.state == "q1"


def test_make_script_registry():
    assert make_script("fig2-abelard").name == "fig2-abelard"
    assert make_script("fig2-eloise-n", 3).name == "fig2-eloise-n"
    with pytest.raises(ValueError):
        make_script("fig2-eloise-n")
    with pytest.raises(ValueError):
        make_script("nope")


# --- engine vs solver agreement -------------------------------------------------


def _engine_truth(model, f, state) -> bool:
    s = new_session(model, state, f, Bounded(None), MACHINES)
    return run_machine(s)["winner"] == "E"


def test_machine_vs_machine_agrees_with_evaluate():
    config = GenConfig(max_states=4, max_actions=2)
    for rng, model in corpus(301, 15, config):
        for _ in range(3):
            f = gen_formula(rng, model.agent_count, config, depth=2)
            truth = evaluate(model, f, GtsBounded(None))
            for state in model.states:
                assert _engine_truth(model, f, state) == truth.is_true(state), (
                    f"{print_formula(f)} at {state}"
                )


def test_machine_vs_machine_agreement_full_size():
    """Same determinacy check at full corpus size and depth, in every mode."""
    config = GenConfig()
    checked = 0
    for rng, model in corpus(311, 60, config):
        for _ in range(4):
            f = gen_formula(rng, model.agent_count, config)
            truth = evaluate(model, f, GtsBounded(None))
            for state in model.states[:2]:
                expected = truth.is_true(state)
                for mode in (Bounded(None), Unbounded(), FinitelyBounded()):
                    s = new_session(model, state, f, mode, MACHINES)
                    outcome = run_machine(s)
                    assert outcome["winner"] == ("E" if expected else "A"), (
                        print_formula(f),
                        state,
                        mode,
                    )
                    checked += 1
    assert checked >= 1000


@pytest.mark.parametrize("seed", [401, 402])
def test_adversarial_search_agrees_with_evaluate(seed):
    """The machine side, playing canonically, wins against best play exactly
    when the truth value says it should (evaluation-game determinacy)."""
    config = GenConfig(max_states=3, max_actions=2, max_agents=2)
    count = 0
    for rng, model in corpus(seed, 6, config):
        f = gen_formula(rng, model.agent_count, config, depth=2)
        truth = evaluate(model, f, GtsBounded(None))
        for state in model.states:
            expected = truth.is_true(state)
            # Abelard searches all moves against machine Eloise: he wins iff
            # the formula is false.
            s = new_session(model, state, f, Bounded(None), {"E": "machine", "A": "human"})
            assert adversary_can_win(s, "A") == (not expected)
            # And symmetrically.
            s = new_session(model, state, f, Bounded(None), {"E": "human", "A": "machine"})
            assert adversary_can_win(s, "E") == expected
            count += 1
    assert count >= 12


def test_negation_symmetry():
    config = GenConfig(max_states=4, max_actions=2)
    from atlgts.formula import Not

    for rng, model in corpus(501, 10, config):
        f = gen_formula(rng, model.agent_count, config, depth=2)
        for state in model.states:
            assert _engine_truth(model, f, state) != _engine_truth(model, Not(f), state)


def test_random_adversary_never_beats_winning_machine():
    """On full-size models a random adversary should never beat the canonical
    machine when the machine holds the winning side."""
    import random

    rng = random.Random(601)
    config = GenConfig()  # up to 6 states
    for _, model in corpus(601, 12, config):
        f = gen_formula(rng, model.agent_count, config, depth=2)
        truth = evaluate(model, f, GtsBounded(None))
        for state in model.states[:3]:
            machine_side = "E" if truth.is_true(state) else "A"
            human_side = "A" if machine_side == "E" else "E"
            roles = {machine_side: "machine", human_side: "human"}
            for _ in range(3):
                s = new_session(model, state, f, Bounded(None), roles)
                while not s.ended():
                    if s.machine_pending():
                        s.machine_reply()
                        continue
                    moves = enumerate_moves(s)
                    s.apply_move(s.pending_actor(), moves[rng.randrange(len(moves))])
                assert s.winner == machine_side


def test_random_legal_walks_keep_invariants():
    """Fuzz: any sequence of legal moves keeps the session well-formed, every
    bounded play terminates, and replaying the transcript reproduces it."""
    import random

    rng = random.Random(909)
    config = GenConfig()
    for _, model in corpus(909, 25, config):
        f = gen_formula(rng, model.agent_count, config)
        mode = rng.choice([Bounded(None), Unbounded(), FinitelyBounded()])
        state = model.states[rng.randrange(len(model.states))]
        s = new_session(model, state, f, mode, HUMANS)
        steps = 0
        budget = 40 * len(s.subs) * (len(model.states) + 2) + 200
        prev_limit = None
        while not s.ended() and steps < budget:
            menu = s.legal_moves()
            assert menu["actor"] == s.pending_actor()
            moves = enumerate_moves(s)
            if not moves:  # unbounded-mode ordinal menus have no finite listing
                assert menu["menu"]["kind"] == "ordinal"
                moves = ["0", "1"]
                moves = [m for m in moves if m != menu["menu"]["below"]]
            s.apply_move(menu["actor"], moves[rng.randrange(len(moves))])
            if s.limit is not None and prev_limit is not None and s.emb is not None:
                assert s.limit <= prev_limit or s.transcript[-1]["phase"] == "announce"
            prev_limit = s.limit
            steps += 1
        if not isinstance(mode, Unbounded):
            assert s.ended(), "bounded play must terminate"
        if s.ended():
            replay = new_session(model, state, f, mode, HUMANS)
            for rec in s.transcript:
                if rec["actor"] is not None:
                    replay.apply_move(rec["actor"], rec["move"])
            assert replay.ended()
            assert replay.winner == s.winner and replay.reason == s.reason


def test_monotone_in_announced_limit(fig3):
    """If the canonical controller wins when announcing its label, it keeps
    winning at every larger announcement below the bound."""
    labels = evaluate(fig3, F_P, GtsBounded(None)).labels_for(F_P)[0]
    for state in ("q1", "q2", "q3"):
        least = labels.finite(state)
        for announce in range(least, 6):
            s = new_session(
                fig3,
                state,
                F_P,
                Bounded(None),
                MACHINES,
                announce_override={"E": Ordinal.nat(announce)},
            )
            assert run_machine(s)["winner"] == "E", (state, announce)
        for announce in range(0, least):
            s = new_session(
                fig3,
                state,
                F_P,
                Bounded(None),
                MACHINES,
                announce_override={"E": Ordinal.nat(announce)},
            )
            assert run_machine(s)["winner"] == "A", (state, announce)
