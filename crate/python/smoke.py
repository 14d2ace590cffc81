"""Smoke test for the posetpack Python bindings."""
import sys

import posetpack as pp


def main():
    p = pp.Poset(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)])
    assert len(p) == 5
    assert p.leq(0, 4) and not p.leq(1, 2)
    assert pp.Poset.from_text(p.to_text()) == p
    r = p.realizer()
    assert r is not None and len(r) == 2

    pk = pp.dense_grid_packing(p, [13, 13])
    rep = pk.verify(p, "packing")
    assert rep, rep.reasons
    print("grid", pk, rep)
    back = pp.Packing.from_text(pk.to_text(p))
    assert len(back) == len(pk)
    assert "<svg" in pk.svg()

    c2 = pp.Poset.chain(2)
    part = pp.stacked_pair_partition(c2, 4)
    assert part.verify(c2, "partition"), "stacked pair partition"

    chains = pp.equal_chain_partition(4, 2)
    assert chains is not None and len(chains) == 8
    assert pp.equal_chain_partition(4, 4) is None
    assert len(pp.gray_code(3)) == 8

    assert pp.partition_oracle("boolean:4", pp.Poset.chain(4)) is None
    found = pp.partition_oracle("boolean:2", c2)
    assert found is not None and found.verify(c2, "partition")

    a = pp.Absorber(9, 2, [[1, 2], [3, 4], [5, 6], [7, 8]], [1, 3, 5, 7], [9])
    assert a.law_holds()
    assert pp.Absorber.from_text(a.to_text()).elements() == a.elements()
    copies = a.absorb(c2)
    assert all(len(c) == 2 for c in copies)

    try:
        pp.Poset(2, [(0, 1), (1, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("cycle accepted")

    print("smoke ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
