"""Classical single-tape Turing machines and the concrete machines used in
the experiments: a detectA solution, a parityCheck solution and the shift
machine.

Conventions: the head starts on the leftmost input cell; the initial state
is recorded per machine. A bounded run of t steps gets a window of
|x| + 2t + 2 cells so the head can never escape it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .simplex import Alphabet, DIRECTIONS, SimplexError

BLANK = "□"

_MOVE = {"L": -1, "S": 0, "R": 1}


class MachineError(ValueError):
    pass


class WindowError(MachineError):
    """Head would exit the allocated tape window; widen it and rerun."""


@dataclass(frozen=True)
class TransitionTable:
    """Total transition function delta: (symbol, state) -> (write, next, move).

    `delta` maps every (sigma, q) pair; moves are in {L, S, R}. The blank
    symbol must be part of `sigma`.
    """

    sigma: Alphabet
    states: Alphabet
    delta: dict
    initial_state: str
    name: str = ""

    def __post_init__(self):
        if BLANK not in self.sigma:
            raise MachineError(f"tape alphabet must contain the blank {BLANK!r}")
        if self.initial_state not in self.states:
            raise MachineError(f"unknown initial state {self.initial_state!r}")
        for s in self.sigma:
            for q in self.states:
                if (s, q) not in self.delta:
                    raise MachineError(f"delta undefined for ({s!r}, {q!r})")
        for (s, q), (w, nq, d) in self.delta.items():
            if s not in self.sigma or q not in self.states:
                raise MachineError(f"rule for undeclared pair ({s!r}, {q!r})")
            if w not in self.sigma:
                raise MachineError(f"rule ({s!r},{q!r}) writes undeclared {w!r}")
            if nq not in self.states:
                raise MachineError(f"rule ({s!r},{q!r}) enters undeclared {nq!r}")
            if d not in DIRECTIONS:
                raise MachineError(f"rule ({s!r},{q!r}) moves {d!r}")

    def rule(self, symbol, state):
        return self.delta[(symbol, state)]


@dataclass(frozen=True)
class TapeConfig:
    """Finite tape window, head index into the window, and current state.

    Cells outside the window are blank by construction; `step` raises
    WindowError rather than silently growing the window.
    """

    cells: tuple
    head: int
    state: str

    def content(self, strip=True) -> str:
        s = "".join(self.cells)
        return s.strip(BLANK) if strip else s


def initial_config(table: TransitionTable, input_str, t_budget: int) -> TapeConfig:
    """Window of |x| + 2t + 2 cells with the head on the leftmost input cell."""
    x = [c for c in input_str if c != BLANK]
    for c in x:
        if c not in table.sigma:
            raise MachineError(f"input symbol {c!r} not in tape alphabet")
    margin = t_budget + 1
    cells = [BLANK] * margin + x + [BLANK] * margin
    return TapeConfig(tuple(cells), head=margin, state=table.initial_state)


def step(table: TransitionTable, c: TapeConfig) -> TapeConfig:
    """One classical step: write delta1, enter delta2, move by delta3."""
    read = c.cells[c.head]
    write, nxt, d = table.rule(read, c.state)
    new_head = c.head + _MOVE[d]
    if not (0 <= new_head < len(c.cells)):
        raise WindowError(
            f"head at {c.head} moved {d} out of a {len(c.cells)}-cell window; "
            "allocate a wider window"
        )
    cells = list(c.cells)
    cells[c.head] = write
    return TapeConfig(tuple(cells), head=new_head, state=nxt)


def run(table: TransitionTable, c: TapeConfig, t: int) -> TapeConfig:
    if t < 0:
        raise MachineError("negative step count")
    for _ in range(t):
        c = step(table, c)
    return c


def run_on_input(table: TransitionTable, input_str, t: int) -> TapeConfig:
    return run(table, initial_config(table, input_str, t), t)


# ---------------------------------------------------------------------------
# Concrete machines


def build_detectA_solution() -> TransitionTable:
    """Scan right; accept on the first A, stay rejecting otherwise."""
    sigma = Alphabet((BLANK, "A", "B"))
    states = Alphabet(("reject", "accept"))
    delta = {
        (BLANK, "reject"): (BLANK, "reject", "S"),
        ("A", "reject"): ("A", "accept", "S"),
        ("B", "reject"): ("B", "reject", "R"),
    }
    for s in sigma:
        delta[(s, "accept")] = (s, "accept", "S")
    return TransitionTable(sigma, states, delta, initial_state="reject", name="detectA")


def build_parityCheck_solution() -> TransitionTable:
    """Repeatedly overwrite one A and one B with X's; accept when no letters
    remain, reject on an unmatched letter."""
    sigma = Alphabet((BLANK, "A", "B", "X"))
    states = Alphabet(
        ("reject", "accept", "getNextAB", "getNextA", "getNextB", "gotoStart")
    )
    delta = {}
    # getNextAB: move right to the first A or B, overwrite it with X.
    delta[(BLANK, "getNextAB")] = (BLANK, "accept", "S")
    delta[("X", "getNextAB")] = ("X", "getNextAB", "R")
    delta[("A", "getNextAB")] = ("X", "getNextB", "R")
    delta[("B", "getNextAB")] = ("X", "getNextA", "R")
    # getNextA: move right to the next A; none left means an unmatched B.
    delta[("A", "getNextA")] = ("X", "gotoStart", "L")
    delta[("B", "getNextA")] = ("B", "getNextA", "R")
    delta[("X", "getNextA")] = ("X", "getNextA", "R")
    delta[(BLANK, "getNextA")] = (BLANK, "reject", "S")
    # getNextB: mirror image.
    delta[("B", "getNextB")] = ("X", "gotoStart", "L")
    delta[("A", "getNextB")] = ("A", "getNextB", "R")
    delta[("X", "getNextB")] = ("X", "getNextB", "R")
    delta[(BLANK, "getNextB")] = (BLANK, "reject", "S")
    # gotoStart: move left to the blank before the string, then step back on.
    for s in ("A", "B", "X"):
        delta[(s, "gotoStart")] = (s, "gotoStart", "L")
    delta[(BLANK, "gotoStart")] = (BLANK, "getNextAB", "R")
    for s in sigma:
        delta[(s, "accept")] = (s, "accept", "S")
        delta[(s, "reject")] = (s, "reject", "S")
    return TransitionTable(
        sigma, states, delta, initial_state="getNextAB", name="parityCheck"
    )


def build_shiftMachine() -> TransitionTable:
    """Shift the 3-letter string left by the counter value, filling with A's.

    Input □n a1 a2 a3 □ with n in {0,1,2}. The machine runs two rounds of a
    fixed 8-step program over head positions 0,1,2,1,2,3,2,1,(0). A round
    either shifts the string one cell left (counter was nonzero; counter is
    decremented) or idles by rewriting every cell it visits. Both branches
    share the exact same head schedule and step count, which is what keeps
    the smooth relaxation's uncertainty propagation in closed form.

    One round: read counter (shift/idle branch), pass over a1, pick up a2,
    drop it on a1, pass over a2, pick up a3 writing an A in its place, drop
    a3 on a2, return to the counter.
    """
    sigma = Alphabet((BLANK, "A", "B", "0", "1", "2"))
    shift_states = ["S1", "S2", "S3A", "S3B", "S4", "S5", "S6A", "S6B"]
    idle_states = ["I1", "I2", "I3", "I4", "I5", "I6"]
    states = Alphabet(tuple(["check"] + shift_states + idle_states + ["R7"]))
    delta = {}

    def rewrite(state_from, state_to, move):
        for s in sigma:
            delta[(s, state_from)] = (s, state_to, move)

    # Round start at the counter cell: decrement and take the shift branch,
    # or idle. Non-digit reads are treated as a zero counter.
    for s in sigma:
        if s == "2":
            delta[(s, "check")] = ("1", "S1", "R")
        elif s == "1":
            delta[(s, "check")] = ("0", "S1", "R")
        else:
            delta[(s, "check")] = (s if s != "0" else "0", "I1", "R")
    # Shift branch: carry symbols in the state.
    rewrite("S1", "S2", "R")
    for s in sigma:
        carry = "S3B" if s == "B" else "S3A"
        delta[(s, "S2")] = (s, carry, "L")
    for s in sigma:
        delta[(s, "S3A")] = ("A", "S4", "R")
        delta[(s, "S3B")] = ("B", "S4", "R")
    rewrite("S4", "S5", "R")
    for s in sigma:
        carry = "S6B" if s == "B" else "S6A"
        delta[(s, "S5")] = ("A", carry, "L")
    for s in sigma:
        delta[(s, "S6A")] = ("A", "R7", "L")
        delta[(s, "S6B")] = ("B", "R7", "L")
    # Idle branch: same walk, rewrite everything.
    rewrite("I1", "I2", "R")
    rewrite("I2", "I3", "L")
    rewrite("I3", "I4", "R")
    rewrite("I4", "I5", "R")
    rewrite("I5", "I6", "L")
    rewrite("I6", "R7", "L")
    # Shared last step back to the counter.
    rewrite("R7", "check", "L")
    return TransitionTable(sigma, states, delta, initial_state="check", name="shiftMachine")


SHIFT_RUN_STEPS = 16  # two full rounds; further rounds idle and change nothing

BUILTIN_MACHINES = {
    "detectA": build_detectA_solution,
    "parityCheck": build_parityCheck_solution,
    "shiftMachine": build_shiftMachine,
}


# ---------------------------------------------------------------------------
# Machine description files: alphabet/state declarations, initial state and
# one line per (sigma, q) -> (sigma', q', d) rule. Round-trips losslessly.


def format_table(table: TransitionTable) -> str:
    lines = []
    if table.name:
        lines.append(f"# machine: {table.name}")
    lines.append("sigma: " + " ".join(table.sigma))
    lines.append("states: " + " ".join(table.states))
    lines.append("init: " + table.initial_state)
    for s in table.sigma:
        for q in table.states:
            w, nq, d = table.delta[(s, q)]
            lines.append(f"{s} {q} -> {w} {nq} {d}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> TransitionTable:
    sigma = states = init = None
    name = ""
    delta = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# machine:"):
                name = line.split(":", 1)[1].strip()
            continue
        try:
            if line.startswith("sigma:"):
                sigma = Alphabet(tuple(line.split(":", 1)[1].split()))
            elif line.startswith("states:"):
                states = Alphabet(tuple(line.split(":", 1)[1].split()))
            elif line.startswith("init:"):
                init = line.split(":", 1)[1].strip()
            else:
                lhs, rhs = line.split("->")
                s, q = lhs.split()
                w, nq, d = rhs.split()
                delta[(s, q)] = (w, nq, d)
        except (ValueError, SimplexError) as e:
            raise MachineError(f"line {lineno}: cannot parse {raw!r}: {e}") from None
    if sigma is None or states is None or init is None:
        raise MachineError("missing sigma:/states:/init: declaration")
    try:
        return TransitionTable(sigma, states, delta, initial_state=init, name=name)
    except MachineError as e:
        raise MachineError(f"invalid table: {e}") from None


def save_table(table: TransitionTable, path):
    with open(path, "w") as f:
        f.write(format_table(table))


def load_table(path) -> TransitionTable:
    with open(path) as f:
        return parse_table(f.read())
