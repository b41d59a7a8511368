import numpy as np
import pytest

from smoothtm.simplex import (
    Alphabet, SimplexError, check_dist, embed, entropy, mix,
)

AB3 = Alphabet(("□", "A", "B"))
DIRS = Alphabet(("L", "S", "R"))


def test_embed_vertices():
    assert np.array_equal(embed("A", AB3), [0, 1, 0])
    assert np.array_equal(embed("□", AB3), [1, 0, 0])
    assert np.array_equal(embed("L", DIRS), [1, 0, 0])


def test_embed_unknown_symbol_names_both():
    with pytest.raises(SimplexError) as e:
        embed("Z", AB3)
    assert "Z" in str(e.value) and "A" in str(e.value)


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(SimplexError):
        Alphabet(("A", "A"))
    with pytest.raises(SimplexError):
        Alphabet(())


def test_mix_identity_and_symmetry():
    da, db = embed("A", AB3), embed("B", AB3)
    assert np.array_equal(mix([(1.0, da)]), da)
    assert np.allclose(mix([(0.5, da), (0.5, db)]), [0, 0.5, 0.5], atol=1e-15)


def test_mix_direct_arithmetic():
    # 0.25 * (1,0,0) + 0.75 * (0,.5,.5) = (0.25, 0.375, 0.375)
    out = mix([(0.25, embed("□", AB3)), (0.75, np.array([0.0, 0.5, 0.5]))])
    assert np.allclose(out, [0.25, 0.375, 0.375], atol=1e-15)


def test_mix_errors():
    two = Alphabet(("x", "y"))
    with pytest.raises(SimplexError):
        mix([(0.5, embed("A", AB3)), (0.5, embed("x", two))])
    with pytest.raises(SimplexError):
        mix([(0.7, embed("A", AB3)), (0.2, embed("B", AB3))])


def test_mix_permutation_invariant_exactly():
    rng = np.random.default_rng(0)
    for _ in range(50):
        ws = rng.dirichlet([1, 1, 1])
        ds = [rng.dirichlet([1, 1, 1]) for _ in range(3)]
        pairs = list(zip(ws, ds))
        a = mix(pairs)
        b = mix([pairs[2], pairs[0], pairs[1]])
        assert abs(a.sum() - 1.0) <= 1e-12 and abs(b.sum() - 1.0) <= 1e-12
        # Canonical accumulation order: permutations agree bit-exactly.
        assert np.array_equal(a, b)


def test_outputs_are_valid_dists():
    rng = np.random.default_rng(1)
    for _ in range(200):
        ws = rng.dirichlet([0.5] * 4)
        ds = [rng.dirichlet([0.3] * 3) for _ in range(4)]
        out = mix(list(zip(ws, ds)))
        assert np.all(out >= 0.0)
        assert abs(out.sum() - 1.0) <= 1e-12
        check_dist(out, AB3)


def test_entropy():
    assert entropy(embed("A", AB3)) == 0.0
    assert abs(entropy([0.5, 0.5]) - np.log(2)) < 1e-12
    # -(0.25 log 0.25 + 0.75 log 0.75), frozen from direct evaluation
    assert abs(entropy([0.25, 0.75]) - 0.5623351446188083) < 1e-12


def test_check_dist_clamps_tiny_negatives():
    w = check_dist([1.0 + 5e-16, -5e-16])
    assert w[1] == 0.0
    with pytest.raises(SimplexError):
        check_dist([1.0001, -1e-4])
