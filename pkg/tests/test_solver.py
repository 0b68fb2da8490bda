import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polybox import GenSpec, Objective, ScalarPoly, eval_batch, generate_random_pol, new_polynomial
from polybox.errors import AllNonFinite, BadGrid, BadOptions, DimensionMismatch, InvalidBox
from polybox.solver import (
    MAXIMIZE,
    MINIMIZE,
    ROOT,
    Box,
    SolveOptions,
    make_grid,
    sample_start,
    scalar_grid_argmin,
    solve,
    solve_single_trial,
    trial_rng,
)

from .oracles import brute_force_grid_min


class TestMakeGrid:
    def test_worked_coordinates(self):
        g = make_grid(-1, 2, 1000)
        assert g.size == 1000
        assert f"{g[1]:.6f}" == "-0.996997"
        assert f"{g[529]:.8f}" == "0.58858859"
        assert f"{g[546]:.8f}" == "0.63963964"

    def test_endpoints_only(self):
        np.testing.assert_array_equal(make_grid(0, 1, 2), [0.0, 1.0])

    def test_endpoints_exact(self):
        g = make_grid(-0.3, 1.7, 777)
        assert g[0] == -0.3 and g[-1] == 1.7
        np.testing.assert_allclose(np.diff(g), 2.0 / 776, rtol=1e-12)

    def test_degenerate(self):
        np.testing.assert_array_equal(make_grid(1.5, 1.5, 4), [1.5] * 4)

    @pytest.mark.parametrize("lo, hi, n", [(0, 1, 1), (0, 1, 0), (1, 0, 5)])
    def test_bad(self, lo, hi, n):
        with pytest.raises(BadGrid):
            make_grid(lo, hi, n)


class TestScalarGridArgmin:
    def test_monotone(self):
        assert scalar_grid_argmin(ScalarPoly([1, 0]), [-1, 0, 1], MINIMIZE) == (-1.0, -1.0)

    def test_tie_goes_to_lowest_index(self):
        assert scalar_grid_argmin(ScalarPoly([1, 0, -1]), [-1, 0, 1], ROOT) == (-1.0, 0.0)

    def test_root_of_extracted_cubic(self):
        grid = make_grid(-1, 2, 1000)
        t, v = scalar_grid_argmin(ScalarPoly([2, 0, 0, -9]), grid, "root")
        exact = (9 / 2) ** (1 / 3)
        assert abs(t - exact) <= grid[1] - grid[0]
        assert v == pytest.approx(abs(2 * t**3 - 9))

    def test_maximize(self):
        assert scalar_grid_argmin(ScalarPoly([-1, 0, 4]), [-2, 0, 2], MAXIMIZE) == (0.0, -4.0)

    def test_non_finite_values_skipped(self):
        q = ScalarPoly([1.0] + [0.0] * 400)  # t**400 overflows for |t| > ~5.9
        t, v = scalar_grid_argmin(q, [1e3, 2.0, 1.5], MINIMIZE)
        assert t == 1.5 and v == pytest.approx(1.5**400, rel=1e-12)

    def test_all_non_finite(self):
        with pytest.raises(AllNonFinite):
            scalar_grid_argmin(ScalarPoly([np.inf]), [0.0, 1.0])

    def test_custom_objective(self):
        psi = Objective.custom(lambda v: (v - 1.0) ** 2)
        assert scalar_grid_argmin(ScalarPoly([1, 0, 0]), [-2, -1, 0, 1, 2], psi) == (-1.0, 0.0)


class TestSingleTrial:
    def test_worked_maximize_from_origin(self, example_pol, example_box):
        res = solve_single_trial(example_pol, example_box, [0, 0, 0], SolveOptions(ngrid=1000, mode="max"))
        np.testing.assert_array_equal(res.x, [-1.0, 2.0, 0.0])
        assert res.value == -16.0
        assert res.rounds <= 2

    def test_worked_minimize_from_origin(self, example_pol, example_box):
        res = solve_single_trial(example_pol, example_box, [0, 0, 0], SolveOptions(ngrid=1000))
        np.testing.assert_array_equal(res.x, [-1.0, -1.0, 2.0])
        assert res.value == -6.0

    def test_convex_1d_hits_zero(self):
        p = new_polynomial([[2]], [1.0])
        res = solve_single_trial(p, Box([-1.0], [1.0]), [1.0], SolveOptions(ngrid=3))
        assert res.x.tolist() == [0.0] and res.value == 0.0

    def test_history_monotone(self, example_pol, example_box):
        res = solve_single_trial(example_pol, example_box, [1.3, 0.2, -0.7], SolveOptions(ngrid=50, eps=0))
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))
        assert len(res.history) == res.rounds + 1

    def test_off_grid_start_kept_when_strictly_better(self):
        # x^2 on [-1, 2] with 4 grid points (-1, 0, 1, 2): 0.1 is off-grid but better than 1
        p = new_polynomial([[2]], [1.0])
        res = solve_single_trial(p, Box([-1.0], [2.0]), [0.1], SolveOptions(ngrid=4))
        # 0 is on the grid and strictly better, so it is taken
        assert res.x.tolist() == [0.0]
        res = solve_single_trial(p, Box([-1.0], [2.0]), [0.1], SolveOptions(ngrid=3))  # grid -1, .5, 2
        assert res.x.tolist() == [0.1]

    def test_iter_max_respected(self):
        p = generate_random_pol(GenSpec(6, 4, 12, seed=4))
        res = solve_single_trial(p, Box.uniform(-1, 2, 6), np.zeros(6), SolveOptions(eps=0, iter_max=1))
        assert res.rounds == 1

    def test_stopping_rule(self):
        # two rounds always: first improves, second cannot
        p = new_polynomial([[1, 0], [0, 1]], [1.0, 1.0])
        res = solve_single_trial(p, Box.uniform(-1, 1, 2), [1.0, 1.0], SolveOptions(ngrid=5))
        assert res.history == [2.0, -2.0, -2.0] and res.rounds == 2


class TestSampleStart:
    def test_degenerate_box(self):
        box = Box([1.0, 2.0], [1.0, 2.0])
        rng = np.random.default_rng(0)
        for _ in range(5):
            np.testing.assert_array_equal(sample_start(box, rng), [1.0, 2.0])
            np.testing.assert_array_equal(sample_start(box, rng, 7), [1.0, 2.0])

    @pytest.mark.parametrize("ngrid", [None, 1000])
    def test_mean(self, ngrid):
        box = Box([0.0, 0.0], [1.0, 1.0])
        rng = np.random.default_rng(123)
        xs = np.array([sample_start(box, rng, ngrid) for _ in range(10_000)])
        assert np.all((xs >= 0) & (xs <= 1))
        assert np.all((xs.mean(axis=0) > 0.47) & (xs.mean(axis=0) < 0.53))

    def test_deterministic(self):
        box = Box.uniform(-1, 2, 4)
        a = [sample_start(box, trial_rng(9, k)) for k in range(2, 6)]
        b = [sample_start(box, trial_rng(9, k)) for k in range(2, 6)]
        np.testing.assert_array_equal(a, b)

    def test_grid_mode_lands_on_grid(self):
        box = Box([-1.0, 0.5], [2.0, 0.75])
        rng = np.random.default_rng(3)
        grids = [make_grid(lo, hi, 13) for lo, hi in zip(box.xmin, box.xmax)]
        for _ in range(200):
            x = sample_start(box, rng, 13)
            assert all(x[j] in grids[j] for j in range(2))


class TestSolve:
    def test_worked_minimize(self, example_pol, example_box):
        sol = solve(example_pol, example_box, SolveOptions(x0=np.zeros(3), Ntrials=6, ngrid=1000))
        assert sol.f == -6.0
        np.testing.assert_array_equal(sol.x, [-1.0, -1.0, 2.0])

    def test_worked_root(self, example_pol, example_box):
        sol = solve(example_pol, example_box, SolveOptions(x0=np.zeros(3), Ntrials=6, ngrid=1000, mode="root"))
        assert abs(sol.f) <= 1e-3

    def test_worked_maximize_single_trial(self, example_pol, example_box):
        sol = solve(example_pol, example_box, SolveOptions(x0=np.zeros(3), Ntrials=1, ngrid=1000, mode="max"))
        assert sol.f == 16.0
        np.testing.assert_array_equal(sol.x, [-1.0, 2.0, 0.0])

    def test_worked_maximize_multistart_finds_global_max(self, example_pol, example_box):
        # P(2, 2, 2) = 2*4 + 2*8 = 24 is the maximum over the box; restarts reach it
        sol = solve(example_pol, example_box, SolveOptions(x0=np.zeros(3), Ntrials=6, ngrid=1000, mode="max"))
        assert sol.f == 24.0
        np.testing.assert_array_equal(sol.x, [2.0, 2.0, 2.0])
        assert sol.trial_values[0] == -16.0

    def test_solution_invariants(self, example_pol, example_box):
        for mode in ("min", "max", "root"):
            sol = solve(example_pol, example_box, SolveOptions(Ntrials=4, ngrid=200, mode=mode, seed=5))
            assert example_box.contains(sol.x)
            assert sol.f == eval_batch(example_pol, [sol.x])[0]
            assert float(Objective.parse(mode)(sol.f)) == min(sol.trial_values)
            assert len(sol.rounds_per_trial) == len(sol.trial_values) == 4
            assert sol.cpu > 0

    def test_x0_clamped(self, example_pol, example_box):
        sol = solve(example_pol, example_box, SolveOptions(x0=[10, -10, 0], ngrid=10, iter_max=1))
        assert example_box.contains(sol.x)

    def test_deterministic(self):
        p = generate_random_pol(GenSpec(5, 4, 10, seed=1))
        box = Box.uniform(-1, 2, 5)
        a = solve(p, box, SolveOptions(Ntrials=4, seed=17))
        b = solve(p, box, SolveOptions(Ntrials=4, seed=17))
        np.testing.assert_array_equal(a.x, b.x)
        assert (a.f, a.rounds_per_trial, a.trial_values) == (b.f, b.rounds_per_trial, b.trial_values)

    def test_trials_independent_of_count(self):
        p = generate_random_pol(GenSpec(4, 5, 10, seed=2))
        box = Box.uniform(-1, 2, 4)
        three = solve(p, box, SolveOptions(Ntrials=3, seed=8))
        five = solve(p, box, SolveOptions(Ntrials=5, seed=8))
        assert five.trial_values[:3] == three.trial_values
        assert five.f <= three.f

    def test_custom_objective(self, example_pol, example_box):
        target = Objective.custom(lambda v: np.abs(v - 5.0), name="level5")
        sol = solve(example_pol, example_box, SolveOptions(Ntrials=3, mode=target))
        assert abs(sol.f - 5.0) < 1e-2

    @pytest.mark.parametrize(
        "opts",
        [
            SolveOptions(Ntrials=0),
            SolveOptions(ngrid=1),
            SolveOptions(eps=-1.0),
            SolveOptions(iter_max=0),
            SolveOptions(mode="sideways"),
            SolveOptions(x0=[0.0, np.nan, 0.0]),
        ],
    )
    def test_bad_options(self, example_pol, example_box, opts):
        with pytest.raises(BadOptions):
            solve(example_pol, example_box, opts)

    def test_dimension_mismatch(self, example_pol):
        with pytest.raises(DimensionMismatch):
            solve(example_pol, Box.uniform(-1, 1, 2))
        with pytest.raises(DimensionMismatch):
            solve(example_pol, Box.uniform(-1, 1, 3), SolveOptions(x0=[0, 0]))

    @pytest.mark.parametrize("lo, hi", [([0, 0], [1]), ([1.0], [0.0]), ([np.inf], [1.0])])
    def test_invalid_box(self, lo, hi):
        with pytest.raises(InvalidBox):
            Box(lo, hi)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(nx=st.integers(1, 4), deg=st.integers(1, 5), card=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
    def test_coordinatewise_grid_optimality(self, nx, deg, card, seed):
        p = generate_random_pol(GenSpec(nx, deg, card, seed))
        box = Box.uniform(-1, 2, nx)
        sol = solve(p, box, SolveOptions(x0=box.xmin, Ntrials=2, ngrid=15, eps=0, iter_max=200, seed=seed))
        assert max(sol.rounds_per_trial) < 200
        grid = make_grid(-1, 2, 15)
        for j in range(nx):
            X = np.tile(sol.x, (grid.size, 1))
            X[:, j] = grid
            assert sol.f <= eval_batch(p, X).min() + 1e-12 * max(1.0, abs(sol.f))

    @settings(max_examples=40, deadline=None)
    @given(nx=st.integers(1, 3), deg=st.integers(1, 4), card=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
    def test_never_beats_tensor_grid(self, nx, deg, card, seed):
        p = generate_random_pol(GenSpec(nx, deg, card, seed))
        box = Box.uniform(-1, 2, nx)
        sol = solve(p, box, SolveOptions(x0=box.xmin, Ntrials=5, ngrid=9, eps=0, iter_max=50, seed=seed))
        grid = make_grid(-1, 2, 9).tolist()
        oracle = brute_force_grid_min(lambda x: eval_batch(p, [x])[0], [grid] * nx)
        assert sol.f >= oracle - 1e-9
