"""Walkthrough: winning time labels on the six-state chain.

Run with:  python3 demos/labels_walkthrough.py
"""

from atlgts.cgm import fig3_model
from atlgts.formula import parse_formula
from atlgts.game_engine import Bounded, new_session, run_machine
from atlgts.ordinal import Ordinal
from atlgts.semantics import GtsBounded, evaluate


def show(title, labels):
    print(f"\n{title}")
    for state, text in labels.rendered().items():
        print(f"  {state}: {text}")


def main() -> None:
    m = fig3_model()
    f = parse_formula("<<>> F p")
    print("model: chain q0 -> q1 -> ... -> q5 (self-loop), p holds only at q3")
    print(f"formula: {f!r}")

    # The label of a state is the least time limit the verifying side must
    # announce to win the reachability game from there.  At bound 3 the
    # distance-3 state q0 is out of reach; raising the bound to 4 rescues it.
    labels3 = evaluate(m, f, GtsBounded(Ordinal.nat(3))).labels_for(f)[0]
    show("labels with announcements below 3:", labels3)
    labels4 = evaluate(m, f, GtsBounded(Ordinal.nat(4))).labels_for(f)[0]
    show("labels with announcements below 4:", labels4)

    # Nesting flips the effect: the inner formula's truth set grows with the
    # bound, so the outer game's goal is closer and its labels can drop.
    nested = parse_formula("<<>> F <<>> F p")
    for bound in (3, 4):
        labels = evaluate(m, nested, GtsBounded(Ordinal.nat(bound))).labels_for(nested)[0]
        show(f"nested formula, bound {bound}:", labels)

    # Watch the canonical machine play out the bound-4 game from q0: announce
    # the label, then walk the chain until the clock pays out exactly at q3.
    session = new_session(
        m, "q0", f, Bounded(Ordinal.nat(4)), {"E": "machine", "A": "machine"}
    )
    outcome = run_machine(session)
    print("\nmachine-vs-machine transcript from q0 at bound 4:")
    for record in session.transcript:
        actor = record["actor"] or "-"
        limit = f" limit={record['limit']}" if record["limit"] else ""
        print(f"  {record['phase']:<22} {actor} {record['move']!r:<24} @ {record['state']}{limit}")
    print(f"winner: {outcome['winner']} ({outcome['reason']})")


if __name__ == "__main__":
    main()
