"""Smoke test for the rftrace_py extension module.

Build and run:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/rftrace_py-*.whl
    python python/smoke_test.py
"""

import math
import os
import tempfile

import rftrace_py as rt


def ring_exact(n, q):
    return sum(q / (q + 2 - 2 * math.cos(2 * math.pi * j / n)) for j in range(n))


def main():
    g = rt.Graph.ring(100)
    assert (g.n, g.num_edges, len(g)) == (100, 100, 100)
    assert g.validate() == []

    exact = rt.exact_s(g, 1.0)
    assert abs(exact - ring_exact(100, 1.0)) < 1e-9

    r = rt.estimate_rf(g, 1.0, 10_000, seed=7)
    assert r.method == "forest" and r.k == 10_000
    assert abs(r.mean - exact) <= 4 * math.sqrt(rt.var_wilson(g, 1.0) / r.k), r
    assert rt.estimate_rf(g, 1.0, 10_000, seed=7).mean == r.mean
    print(r)

    gd = rt.estimate_girard(g, 1.0, 2_000, seed=3, direct=True)
    gc = rt.estimate_girard(g, 1.0, 2_000, seed=3)
    assert abs(gd.mean - gc.mean) < 1e-6 * gd.mean
    assert abs(gd.mean - exact) <= 4 * gd.stderr
    assert r.required_k(0.02) >= 1

    roots, steps = rt.sample_forest(g, 0.5, seed=1)
    assert roots == sorted(roots) and steps >= 100

    k2 = rt.Graph(2, [(0, 1, 1.0)])
    assert rt.spectrum(k2) == [0.0, 2.0]
    x = rt.smooth(k2, 1.0, [1.0, -1.0])
    assert all(abs(a - b) < 1e-9 for a, b in zip(x, [1 / 3, -1 / 3]))
    assert rt.Graph(3, [(0, 1, 1.0)]).laplacian_apply([1.0, 0.0, 5.0]) == [1.0, -1.0, 0.0]

    m = rt.SddMatrix.random(8, seed=5)
    s_m = rt.exact_s(m, 1.0)
    l1, l2 = m.laplacians()
    assert abs(rt.exact_s(l2, 1.0) - rt.exact_s(l1, 1.0) - s_m) < 1e-10
    est = rt.estimate_sdd(m, 1.0, 50_000, seed=2)
    assert abs(est.mean - s_m) <= 4 * est.stderr, (est, s_m)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "grid.tsv")
        grid = rt.Graph.grid2d(3, 4)
        grid.write(path)
        assert rt.Graph.read(path).edges() == grid.edges()
        mtx = os.path.join(d, "m.mtx")
        m.write(mtx)
        assert rt.SddMatrix.read(mtx).entries() == m.entries()
        try:
            rt.Graph.read(os.path.join(d, "missing.tsv"))
            raise AssertionError("missing file accepted")
        except OSError:
            pass

    for bad in (lambda: rt.estimate_rf(g, -1.0, 10), lambda: rt.Graph(2, [(0, 0, 1.0)])):
        try:
            bad()
            raise AssertionError("bad input accepted")
        except rt.RftraceError as e:
            assert isinstance(e, ValueError)
    try:
        rt.exact_s("not a graph", 1.0)
        raise AssertionError("wrong type accepted")
    except TypeError:
        pass

    heart = rt.Graph.heart(500, seed=1)
    assert heart.component_count() == 1
    q = rt.q_for_target(heart, 50.0)
    assert abs(rt.exact_s(heart, q) - 50.0) < 0.1
    assert rt.Graph.generate("ba:300:4:2").n == 300
    print("smoke test passed")


if __name__ == "__main__":
    main()
