"""Smoke test for the buchi_det extension module.

Build first:  pip install --no-build-isolation -e crates/python
"""

import buchi_det

THREE_STATE = """nba
states 3
alphabet a
init 0
accept 1
0 a 0
0 a 1
1 a 1
1 a 2
2 a 1
"""


def main():
    aut = buchi_det.BuchiAutomaton.parse(THREE_STATE)
    assert aut.num_states == 3
    assert aut.alphabet == ["a"]
    assert aut.accepts("| a")

    levels = aut.split_tree_levels(["a", "a", "a"])
    assert levels == [[[0]], [[1], [0]], [[1], [2], [0]], [[1], [2], [0]]], levels

    dpa = aut.determinize("ms")
    assert dpa.num_states == 3
    assert dpa.label(2) == "({1}:3,{2}:2,{0}:1)"
    accepted, min_priority, cycle = dpa.run_lasso("| a")
    assert accepted and min_priority == 4 and cycle == [2]

    for strategy in ["ms", "safra", "max", "adaptive"]:
        d = aut.determinize(strategy)
        again = buchi_det.ParityAutomaton.parse(d.to_text())
        assert again.to_text() == d.to_text()
        assert again.accepts("a | a")

    s = buchi_det.RankedSlice("({3}:4,{1}:2,{2}:3,{0}:1)")
    assert len(s) == 4
    assert s.ranks == [4, 2, 3, 1]
    assert s.rank_profile(3) == [1, 2, 4]
    tree = s.to_safra()
    assert buchi_det.RankedSlice.from_safra(tree) == s

    try:
        buchi_det.RankedSlice("({0}:1,{1}:2)")
    except ValueError as e:
        assert "rank 1" in str(e)
    else:
        raise AssertionError("invalid slice accepted")

    try:
        aut.determinize("fast")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown strategy accepted")

    print("smoke test passed:", repr(dpa), tree)


if __name__ == "__main__":
    main()
