from __future__ import annotations

import pytest

from groupevo.errors import InputError
from groupevo.ged import GedParams, build_evolution_graph
from groupevo.learn import ClassifierSpec
from groupevo.sweep import DEFAULT_GRID, cell_seed, render_matrix, run_cell, run_sweep, write_sweep
from groupevo.synth import lifecycle_script, plant_memberships

SPECS = [ClassifierSpec("tree"), ClassifierSpec("baseline")]


@pytest.fixture(scope="module")
def planted():
    return plant_memberships(lifecycle_script(24, 14, noise=0.1, seed=6))


@pytest.fixture(scope="module")
def result(planted):
    return run_sweep(planted.groups, None, DEFAULT_GRID, DEFAULT_GRID, SPECS, seed=17)


def test_matrix_layout(result):
    for clf in ("tree", "baseline"):
        lines = render_matrix(result, clf).splitlines()
        assert lines[0] == "beta\\alpha,50,60,70,80,90,100"
        assert [l.split(",")[0] for l in lines[1:]] == ["50", "60", "70", "80", "90", "100"]
        assert all(len(l.split(",")) == 7 for l in lines)
    assert len(result.rows) == 36 * 2


def test_cells_reproduce_in_isolation(result, planted):
    for a, b in [(0.5, 0.5), (0.8, 0.9), (0.6, 1.0)]:
        rows = run_cell(planted.groups, None, a, b, SPECS, 17)
        for row in rows:
            assert row == result.get(a, b, row.classifier)


def test_histogram_counts_edges(result, planted):
    for row in result.rows:
        assert sum(n for _, n in row.histogram) == row.n_edges
    edges = build_evolution_graph(planted.groups, None, GedParams(0.7, 0.6))
    assert result.get(0.7, 0.6, "tree").n_edges == len(edges)


def test_starved_cells_are_na(planted, result):
    counts = sorted({result.get(a, 0.5, "tree").n_instances for a in DEFAULT_GRID})
    assert len(counts) > 1
    floor = counts[-1]
    res = run_sweep(planted.groups, None, DEFAULT_GRID, [0.5], SPECS, seed=17, min_instances=floor)
    for r in res.rows:
        assert r.evaluable == (r.n_instances >= floor)
        if r.evaluable:
            assert r == result.get(r.alpha, r.beta, r.classifier)
    assert "NA" in render_matrix(res, "tree")


def test_single_cell(planted):
    res = run_sweep(planted.groups, None, [0.8], [0.8], [ClassifierSpec("tree")], seed=3)
    assert len(res.rows) == 1
    assert render_matrix(res, "tree").splitlines() == ["beta\\alpha,80", f"80,{res.rows[0].weighted_f:.3f}"]


def test_errors(planted, result):
    with pytest.raises(InputError):
        run_sweep(planted.groups, None, [], [0.5], SPECS)
    with pytest.raises(InputError):
        run_sweep(planted.groups, None, [0.5], [0.5], SPECS, min_instances=10**6)
    with pytest.raises(InputError):
        render_matrix(result, "forest")
    few = {f: planted.groups[f] for f in range(4)}
    with pytest.raises(InputError):
        run_sweep(few, None, [0.5], [0.5], SPECS)


def test_seeds_depend_on_cell_only():
    assert cell_seed(1, 0.5, 0.6, "tree") == cell_seed(1, 0.5, 0.6, "tree")
    assert len({cell_seed(1, a, b, c) for a in DEFAULT_GRID for b in DEFAULT_GRID for c in ("tree", "forest")}) == 72
    assert 0 <= cell_seed(2**70, 1.0, 1.0, "knn") < 2**63


def test_workers_do_not_change_results(planted, tmp_path):
    a = run_sweep(planted.groups, None, [0.5, 0.9], [0.6, 1.0], SPECS, seed=5, workers=1)
    b = run_sweep(planted.groups, None, [0.9, 0.5], [1.0, 0.6], SPECS, seed=5, workers=2)
    write_sweep(a, tmp_path / "a")
    write_sweep(b, tmp_path / "b")
    for name in ("sweep.csv", "matrix_tree.csv", "matrix_baseline.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
