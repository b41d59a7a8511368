import itertools

import numpy as np
import pytest

from smoothtm.machines import (
    BLANK, MachineError, WindowError, TapeConfig, TransitionTable,
    build_detectA_solution, build_parityCheck_solution, build_shiftMachine,
    format_table, initial_config, parse_table, run, run_on_input, step,
    SHIFT_RUN_STEPS,
)
from smoothtm.simplex import Alphabet


def contains_a(x: str) -> str:
    return "accept" if "A" in x else "reject"


def parity(x: str) -> str:
    return "accept" if x.count("A") == x.count("B") else "reject"


def all_strings(max_len, alphabet="AB", min_len=0):
    for l in range(min_len, max_len + 1):
        for tup in itertools.product(alphabet, repeat=l):
            yield "".join(tup)


def stay_machine():
    sigma = Alphabet((BLANK, "A"))
    states = Alphabet(("q",))
    delta = {(s, "q"): (s, "q", "S") for s in sigma}
    return TransitionTable(sigma, states, delta, initial_state="q")


def test_stay_machine_step_is_identity():
    t = stay_machine()
    c = initial_config(t, "A", 3)
    assert step(t, c) == c


def test_run_zero_steps_is_identity():
    t = build_detectA_solution()
    c = initial_config(t, "BAB", 10)
    assert run(t, c, 0) == c


def test_detectA_examples():
    t = build_detectA_solution()
    assert run_on_input(t, "BA", 5).state == "accept"
    assert run_on_input(t, "AAAA", 10).state == "accept"
    assert run_on_input(t, "BAB", 10).state == "accept"
    assert run_on_input(t, "BBB", 10).state == "reject"
    assert run_on_input(t, "", 10).state == "reject"


def test_parityCheck_examples():
    t = build_parityCheck_solution()
    assert run_on_input(t, "AABB", 42).state == "accept"
    assert run_on_input(t, "A", 42).state == "reject"
    assert run_on_input(t, "BABA", 42).state == "accept"
    assert run_on_input(t, "AB", 42).state == "accept"


@pytest.mark.parametrize("builder,t,oracle", [
    (build_detectA_solution, 10, contains_a),
    (build_parityCheck_solution, 42, parity),
])
def test_exhaustive_up_to_length_6(builder, t, oracle):
    table = builder()
    for x in all_strings(6):
        assert run_on_input(table, x, t).state == oracle(x), x


def test_shift_machine_worked_example():
    t = build_shiftMachine()
    out = run_on_input(t, "□2BAB□", SHIFT_RUN_STEPS)
    assert out.content() == "0BAA"
    assert run_on_input(t, "□0BAB□", SHIFT_RUN_STEPS).content() == "0BAB"
    assert run_on_input(t, "□1ABB□", SHIFT_RUN_STEPS).content() == "0BBA"


def test_shift_machine_all_inputs():
    # Behavioral contract: shift left n, fill with A, length invariant.
    t = build_shiftMachine()
    for n in "012":
        for a in itertools.product("AB", repeat=3):
            s = "".join(a)
            shifted = s[int(n):] + "A" * int(n)
            got = run_on_input(t, n + s, SHIFT_RUN_STEPS).content()
            assert got == "0" + shifted, (n, s, got)


def test_step_changes_one_cell_moves_at_most_one():
    rng = np.random.default_rng(3)
    t = build_parityCheck_solution()
    c = initial_config(t, "ABBA", 42)
    for _ in range(42):
        n = step(t, c)
        diff = sum(a != b for a, b in zip(c.cells, n.cells))
        assert diff <= 1
        assert abs(n.head - c.head) <= 1
        c = n


def test_run_composes():
    t = build_parityCheck_solution()
    c = initial_config(t, "AABB", 50)
    assert run(t, c, 17) == run(t, run(t, c, 9), 8)


def test_window_error():
    sigma = Alphabet((BLANK, "A"))
    states = Alphabet(("q",))
    delta = {(s, "q"): (s, "q", "L") for s in sigma}
    t = TransitionTable(sigma, states, delta, initial_state="q")
    c = TapeConfig((BLANK, "A"), head=0, state="q")
    with pytest.raises(WindowError):
        step(t, c)


def test_table_rejects_partial_delta():
    sigma = Alphabet((BLANK, "A"))
    states = Alphabet(("q",))
    with pytest.raises(MachineError):
        TransitionTable(sigma, states, {(BLANK, "q"): (BLANK, "q", "S")},
                        initial_state="q")


@pytest.mark.parametrize("builder", [
    build_detectA_solution, build_parityCheck_solution, build_shiftMachine,
])
def test_description_file_round_trip(builder):
    table = builder()
    text = format_table(table)
    back = parse_table(text)
    assert back == table
    assert format_table(back) == text


def test_parse_error_reports_line():
    text = "sigma: □ A\nstates: q\ninit: q\n□ q -> □ q\n"
    with pytest.raises(MachineError) as e:
        parse_table(text)
    assert "line 4" in str(e.value)
