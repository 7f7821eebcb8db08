"""Command-line entry points: check, labels, play, compare, difftest, serve.

Exit codes: 0 success (check: true at the queried state), 1 falsified or
failed, 2 usage/input errors.  Randomised commands require a seed and echo
it so runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from atlgts.cgm import (
    Model,
    ModelError,
    lazy_model,
    load_model,
)
from atlgts.embedded_solver import dump_labels
from atlgts.formula import (
    CoopR,
    CoopU,
    FormulaSyntaxError,
    parse_formula,
    print_formula,
)
from atlgts.game_engine import (
    Bounded,
    FinitelyBounded as FBMode,
    IllegalMove,
    SessionError,
    Unbounded,
    make_script,
    new_session,
    run_machine,
)
from atlgts.generators import GenConfig, gen_formula, gen_model
from atlgts.ordinal import Ordinal, OrdinalError, parse_ordinal
from atlgts.semantics import (
    ALL_KINDS,
    FinitelyBounded,
    GtsBounded,
    GtsUnbounded,
    Standard,
    compare_semantics,
    evaluate,
    kind_name,
    oracle_evaluate,
)

log = logging.getLogger("atlgts")


def _setup_logging() -> None:
    level = os.environ.get("ATLGTS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _load_model_arg(path: str) -> Model:
    return load_model(Path(path).read_bytes())


def _parse_gamma(text: str) -> Ordinal | None:
    if text == "auto":
        return None
    return parse_ordinal(text)


def _kind_from_args(args) -> object:
    name = args.semantics
    if name == "standard":
        return Standard()
    if name == "gts-unbounded":
        return GtsUnbounded()
    if name == "gts-finitely-bounded":
        return FinitelyBounded()
    if name == "gts-bounded":
        return GtsBounded(_parse_gamma(args.gamma_bound))
    raise ValueError(f"unknown semantics {name!r}")


def cmd_check(args) -> int:
    model = _load_model_arg(args.model)
    f = parse_formula(args.formula)
    kind = _kind_from_args(args)
    truth = evaluate(model, f, kind)
    if args.state is not None:
        value = truth.is_true(args.state)
        print("true" if value else "false")
        return 0 if value else 1
    for q in model.states:
        print(f"{q}\t{'true' if truth.is_true(q) else 'false'}")
    return 0


def cmd_labels(args) -> int:
    model = _load_model_arg(args.model)
    f = parse_formula(args.formula)
    if not isinstance(f, (CoopU, CoopR)):
        print("labels need an until- or release-formula at the top level", file=sys.stderr)
        return 2
    gamma = _parse_gamma(args.gamma_bound)
    kind = GtsBounded(gamma)
    truth = evaluate(model, f, kind)
    cmap, omap = truth.labels_for(f)
    chosen = cmap if cmap.player == args.player else omap
    print(dump_labels(chosen))
    return 0


def cmd_compare(args) -> int:
    model = _load_model_arg(args.model)
    f = parse_formula(args.formula)
    report = compare_semantics(model, f)
    print(json.dumps(report, indent=2))
    return 0 if not report["disagreements"] else 1


def _difftest_one(rng: random.Random, config: GenConfig, formulas_per_model: int):
    model = gen_model(rng, config)
    for _ in range(formulas_per_model):
        f = gen_formula(rng, model.agent_count, config)
        vectors = {
            kind_name(kind): evaluate(model, f, kind).to_bool_dict()
            for kind in ALL_KINDS
        }
        baseline = vectors["standard"]
        for name, vec in vectors.items():
            if vec != baseline:
                return model, f, vectors
        profile_counts = []
        for qi in range(len(model.states)):
            count = 1
            for acts in model.actions[qi]:
                count *= len(acts)
            profile_counts.append(count)
        if len(model.states) <= 4 and max(profile_counts) <= 4:
            oracle = oracle_evaluate(model, f).to_bool_dict()
            if oracle != baseline:
                vectors["oracle"] = oracle
                return model, f, vectors
    return None


def _kinds_disagree(model: Model, f) -> bool:
    vectors = [evaluate(model, f, kind).mask() for kind in ALL_KINDS]
    return any(v != vectors[0] for v in vectors)


def cmd_difftest(args) -> int:
    print(f"seed={args.seed} count={args.count} formulas={args.formulas}")
    rng = random.Random(args.seed)
    config = GenConfig()
    for i in range(args.count):
        failure = _difftest_one(rng, config, args.formulas)
        if failure is not None:
            model, f, vectors = failure
            from atlgts.cgm import model_to_dict
            from atlgts.minimize import shrink_instance

            print("DISAGREEMENT FOUND", file=sys.stderr)
            small_model, small_f = shrink_instance(model, f, _kinds_disagree)
            print(f"formula: {print_formula(small_f)}", file=sys.stderr)
            print(json.dumps(model_to_dict(small_model), indent=2), file=sys.stderr)
            small_vectors = {
                kind_name(kind): evaluate(small_model, small_f, kind).to_bool_dict()
                for kind in ALL_KINDS
            }
            if not _kinds_disagree(small_model, small_f):
                small_vectors = vectors  # oracle-only failure: report original
            print(json.dumps(small_vectors, indent=2), file=sys.stderr)
            return 1
        if (i + 1) % 50 == 0:
            log.info("difftest: %d models done", i + 1)
    print(f"OK: {args.count} models x {args.formulas} formulas agree across semantics")
    return 0


def _mode_from_args(args):
    if args.mode == "unbounded":
        return Unbounded()
    if args.mode == "finitely-bounded":
        return FBMode()
    return Bounded(_parse_gamma(args.gamma_bound))


def _render_menu(menu: dict) -> str:
    inner = menu["menu"]
    if inner["kind"] == "choice":
        return "choices: " + ", ".join(inner["options"])
    if inner["kind"] == "ordinal":
        base = f"ordinal below {inner['below']}"
        if inner.get("finiteOnly"):
            base += " (naturals only)"
        return base
    parts = []
    for agent, acts in inner["agents"].items():
        opts = "any natural" if acts == "naturals" else ", ".join(acts)
        parts.append(f"agent {agent}: {opts}")
    return "profile; " + "; ".join(parts)


def _parse_move_text(menu: dict, text: str):
    inner = menu["menu"]
    if inner["kind"] == "profile":
        move = {}
        for part in text.split(","):
            if "=" not in part:
                raise IllegalMove("profile syntax: agent=action[,agent=action...]")
            agent, act = part.split("=", 1)
            move[agent.strip()] = act.strip()
        return move
    return text.strip()


def cmd_play(args) -> int:
    if args.lazy:
        model = lazy_model(args.lazy)
    elif args.model:
        model = _load_model_arg(args.model)
    else:
        print("play needs -m/--model or --lazy", file=sys.stderr)
        return 2
    f = parse_formula(args.formula)
    humans = {
        "eloise": ("E",),
        "abelard": ("A",),
        "both": ("E", "A"),
        "none": (),
    }[args.role]
    roles = {p: ("human" if p in humans else "machine") for p in ("E", "A")}
    scripts = {}
    if args.script_e:
        scripts["E"] = make_script(args.script_e, args.script_n)
    if args.script_a:
        scripts["A"] = make_script(args.script_a, args.script_n)
    session = new_session(model, args.state, f, _mode_from_args(args), roles, scripts)
    printed = 0
    machine_moves = 0

    def show_events() -> int:
        count = 0
        for rec in session.transcript[printed:]:
            actor = rec["actor"] or "-"
            limit = f" [limit {rec['limit']}]" if rec["limit"] is not None else ""
            print(f"  {rec['phase']:<20} {actor:<2} {rec['move']!r:<30} @ {rec['state']}{limit}")
            count += 1
        return count

    printed += show_events()
    while not session.ended():
        if session.machine_pending():
            if machine_moves >= args.budget:
                print(f"machine step budget ({args.budget}) exhausted; aborting")
                return 1
            session.machine_reply()
            machine_moves += 1
            printed += show_events()
            continue
        menu = session.legal_moves()
        print(f"\n{menu['actor']} to move ({menu['phase']}) at {session.state}; "
              f"formula: {print_formula(session.formula())}")
        print("  " + _render_menu(menu))
        try:
            line = input("> ").strip()
        except EOFError:
            print("resigned")
            return 1
        if line in ("quit", "resign"):
            print("resigned")
            return 1
        try:
            session.apply_move(menu["actor"], _parse_move_text(menu, line))
        except (IllegalMove, SessionError) as exc:
            print(f"illegal move: {exc}")
            continue
        printed += show_events()
    print(f"\nwinner: {session.winner} ({session.reason})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from atlgts.session_service import SessionStore, create_app

    app = create_app(SessionStore(persist_dir=args.persist_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atlgts",
        description="ATL model checking and evaluation-game play",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, model_required=True):
        p.add_argument("-m", "--model", required=model_required, help="model JSON file")
        p.add_argument("-f", "--formula", required=True, help="formula text")

    p = sub.add_parser("check", help="evaluate a formula")
    add_common(p)
    p.add_argument("--state", help="single state to query")
    p.add_argument(
        "--semantics",
        default="standard",
        choices=["standard", "gts-unbounded", "gts-bounded", "gts-finitely-bounded"],
    )
    p.add_argument("--gamma-bound", default="auto", help="ordinal text or 'auto'")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("labels", help="dump winning time labels")
    add_common(p)
    p.add_argument("--gamma-bound", default="auto")
    p.add_argument("--player", default="E", choices=["E", "A"])
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("compare", help="agreement report across the four semantics")
    add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("difftest", help="seeded differential test")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=200, help="number of models")
    p.add_argument("--formulas", type=int, default=50, help="formulas per model")
    p.set_defaults(func=cmd_difftest)

    p = sub.add_parser("play", help="interactive terminal session")
    p.add_argument("-m", "--model", help="model JSON file")
    p.add_argument("--lazy", help="built-in lazy model name (e.g. fig2)")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--state", default="q0")
    p.add_argument(
        "--mode",
        default="bounded",
        choices=["unbounded", "bounded", "finitely-bounded"],
    )
    p.add_argument("--gamma-bound", default="auto")
    p.add_argument(
        "--role",
        default="eloise",
        choices=["eloise", "abelard", "both", "none"],
        help="which side(s) the human plays",
    )
    p.add_argument("--script-e", help="script name for a machine Eloise on lazy models")
    p.add_argument("--script-a", help="script name for a machine Abelard on lazy models")
    p.add_argument("--script-n", type=int, help="numeric parameter for scripts")
    p.add_argument("--budget", type=int, default=10_000)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--persist-dir", help="directory for JSON session snapshots")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (ModelError, FormulaSyntaxError, OrdinalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    if argv is None:
        sys.exit(code)
    return code
