"""Smoke test for the blocknorm extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import math
import random

import blocknorm as bn


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    reals = bn.Space(1, math.inf)
    l1 = bn.Space(2, 1.0)

    value, exact = bn.class_norm("strong:1", reals, [[1.0], [-2.0], [3.0]])
    assert exact and close(value, 6.0, 1e-12), value
    value, exact = bn.class_norm("weak:1", reals, [[1.0], [-2.0], [3.0]])
    assert exact and close(value, 6.0, 1e-12), value

    rank_one = bn.Operator.finite_type([l1, l1], [[1.0, 0.0], [0.0, 2.0]], reals, [3.0])
    norm = rank_one.sup_norm()
    assert norm["exact"] and close(norm["value"], 6.0), norm

    full = bn.Block.full([2, 2])
    est = bn.summing_norm(rank_one, full, ["strong:1", "strong:1"], ["strong:2", "strong:2"], truncation=2, seed=3)
    assert close(est["value"], 6.0), est
    again, _ = bn.block_value(rank_one, full, ["strong:2", "strong:2"], [s["entries"] for s in est["witness"]], 0, 0)
    assert close(again, est["value"], 1e-12)

    witness = bn.find_incompatibility_witness(
        bn.Block.full([16, 16]), ["strong:2", "strong:2"], ["strong:1", "strong:1"], 16
    )
    assert close(witness["worst_margin"], 15.0), witness["worst_margin"]

    rng = random.Random(5)
    l3 = bn.Space(3, 3.0)
    tri = bn.Operator.random([l1, bn.Space(2, 2.0), l3], bn.Space(2, math.inf), 17)
    samples = [
        [[[rng.gauss(0, 1) for _ in range(d)] for _ in range(3)] for d in (2, 2, 3)]
        for _ in range(5)
    ]
    assert bn.check_multiple_formula(tri, [1.5, 2.0, 3.0], samples)["status"]["status"] == "pass"
    assert bn.check_diagonal_reduction(tri, 2.0, "sup", samples)["status"]["status"] == "pass"
    assert bn.check_partition_formula(tri, 2.0, 1.0, samples)["status"]["status"] == "pass"

    try:
        bn.block_value(rank_one, full, ["weak:1", "strong:1"], [[[1.0, 0.0]], [[0.0, 1.0]]])
    except ValueError as e:
        assert "weak class" in str(e)
    else:
        raise AssertionError("weak outer class accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
