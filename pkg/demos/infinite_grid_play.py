"""Walkthrough: the infinite grid where finite announcements always lose.

The lazy model branches from q0 to a row (i,0) for every natural i, then
each row marches right; p holds exactly on the diagonal (i,i).  Whatever
natural the verifier announces, the opponent picks a row just out of reach,
so the finitely bounded game is lost; announcing w and lowering on arrival,
or announcing after one step, both win.

Run with:  python3 demos/infinite_grid_play.py
"""

from atlgts.cgm import fig2_lazy_model
from atlgts.formula import parse_formula
from atlgts.game_engine import (
    Bounded,
    FinitelyBounded,
    fig2_abelard_script,
    fig2_eloise_diag_script,
    fig2_eloise_fixed_script,
    fig2_eloise_omega_script,
    new_session,
    run_machine,
)
from atlgts.ordinal import parse_ordinal


def play(title, model, formula, mode, eloise, abelard) -> None:
    session = new_session(
        model,
        "q0",
        formula,
        mode,
        {"E": "machine", "A": "machine"},
        scripts={"E": eloise, "A": abelard},
    )
    outcome = run_machine(session)
    path = [rec["state"] for rec in session.transcript if rec["phase"] == "falsifier-step"]
    print(f"{title}: winner {outcome['winner']} ({outcome['reason']}); "
          f"announced {session.announced}, visited {path[:6]}")


def main() -> None:
    grid = fig2_lazy_model()
    reach = parse_formula("<<>> F p")

    print("finitely bounded: every announcement n lets the opponent pick row n")
    for n in (0, 2, 5, 12):
        play(
            f"  announce {n}",
            grid,
            reach,
            FinitelyBounded(),
            fig2_eloise_fixed_script(n),
            fig2_abelard_script(),
        )

    print("\nbounded with announcements up to w: announce w, then lower on arrival")
    for pick in (0, 2, 5, 12):
        play(
            f"  opponent picks {pick}",
            grid,
            reach,
            Bounded(parse_ordinal("w+1")),
            fig2_eloise_omega_script(),
            fig2_abelard_script(pick),
        )

    print("\nafter one step the distance is known, so the announcement can wait")
    stepped = parse_formula("<<>> X <<>> F p")
    for pick in (0, 2, 5, 12):
        play(
            f"  opponent picks {pick}",
            grid,
            stepped,
            FinitelyBounded(),
            fig2_eloise_diag_script(),
            fig2_abelard_script(pick),
        )


if __name__ == "__main__":
    main()
