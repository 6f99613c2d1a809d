import math

import numpy as np
import pytest

from mdsat import encoding as enc
from mdsat import formula as fm
from mdsat import solver as sv
from mdsat import spectral as sp
from mdsat import statevec as svec


class TestCyclesRequired:
    def test_commuting_needs_one_cycle(self):
        assert sv.cycles_required(np.pi / 2, 8, 0.01, 0.0) == 1

    def test_worked_example(self):
        # ceil((ln 100 + 8 ln(1/cos(pi/8))) / ln 2) = 8
        assert sv.cycles_required(np.pi / 4, 8, 0.01, 0.5) == 8

    def test_monotone_in_epsilon(self):
        values = [sv.cycles_required(0.3 * np.pi, 6, e, 0.7) for e in (0.2, 0.1, 0.01, 0.001)]
        assert values == sorted(values)

    def test_domain(self):
        with pytest.raises(ValueError):
            sv.cycles_required(0.3, 4, 0.1, 1.0)
        with pytest.raises(ValueError):
            sv.cycles_required(0.3, 4, 1.5, 0.5)


class TestSchedule:
    def test_endpoints(self):
        s = sv.Schedule(kind="cubic", theta_init=0.47 * np.pi / 2, c_q=10)
        assert sv.schedule_angle(s, 0) == pytest.approx(0.47 * np.pi / 2, abs=1e-15)
        assert sv.schedule_angle(s, 10) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_midpoint(self):
        t0 = 0.47 * np.pi / 2
        s = sv.Schedule(kind="cubic", theta_init=t0, c_q=8)
        expected = t0 + (np.pi / 2 - t0) / 8
        assert sv.schedule_angle(s, 4) == pytest.approx(expected, abs=1e-15)

    def test_fixed_ignores_cycle(self):
        s = sv.Schedule(kind="fixed", theta_init=0.4)
        assert sv.schedule_angle(s, 3) == 0.4

    def test_range_checked(self):
        s = sv.Schedule(kind="cubic", theta_init=0.4, c_q=5)
        with pytest.raises(ValueError):
            sv.schedule_angle(s, 6)


class TestPrepareState:
    def test_pi_half_success_probability_exact(self, small_instances):
        for f in small_instances[:6]:
            prep = sv.Preparer(
                sv.PrepConfig(theta=np.pi / 2, mode="deterministic"),
                np.random.default_rng(0),
            )
            res = prep.prepare(f)
            assert res.r_star == 1
            expected = fm.count_solutions(f) / 2**f.n
            assert abs(res.success_probability - expected) < 1e-12

    def test_unate_one_cycle_full_fidelity(self):
        f = fm.generate("unate", 6, 10, 3, seed=6)
        theta = 0.3 * np.pi
        prep = sv.Preparer(
            sv.PrepConfig(theta=theta, mode="deterministic"), np.random.default_rng(0)
        )
        res = prep.prepare(f)
        assert res.r_star == 1
        p_gs = enc.ground_space_projector(f, theta)
        assert np.linalg.norm(p_gs @ res.state) > 1 - 1e-10

    def test_success_floor(self, small_instances):
        theta = 0.35 * np.pi
        for f in small_instances[:4]:
            prep = sv.Preparer(
                sv.PrepConfig(theta=theta, mode="deterministic"), np.random.default_rng(0)
            )
            res = prep.prepare(f)
            assert res.success_probability >= sv.success_probability_floor(theta, f.n)

    def test_cycle_bound_guarantee(self, small_instances):
        for f in small_instances[:4]:
            theta = 0.4 * np.pi
            mu = sp.convergence_rate(f, theta)
            for eps in (0.1, 0.01):
                cfg = sv.PrepConfig(theta=theta, epsilon=eps, mode="deterministic")
                res = sv.Preparer(cfg, np.random.default_rng(0)).prepare(f)
                p_gs = enc.ground_space_projector(f, theta)
                assert np.linalg.norm(p_gs @ res.state) >= 1 - eps
                assert res.r_star == sv.cycles_required(theta, f.n, eps, mu)

    def test_trace_distance_within_sqrt_two_epsilon(self, small_instances):
        # fidelity >= 1 - eps puts the prepared state within sqrt(2 eps) trace
        # distance of its best ground-space approximation
        theta = 0.4 * np.pi
        for f in small_instances[:4]:
            for eps in (0.1, 0.01):
                cfg = sv.PrepConfig(theta=theta, epsilon=eps, mode="deterministic")
                res = sv.Preparer(cfg, np.random.default_rng(0)).prepare(f)
                p_gs = enc.ground_space_projector(f, theta)
                fid = np.linalg.norm(p_gs @ res.state)
                trace_dist = math.sqrt(max(0.0, 1.0 - fid**2))
                assert trace_dist <= math.sqrt(2 * eps) + 1e-12

    def test_monte_carlo_counts_are_deterministic_per_seed(self):
        f = fm.random_satisfiable(np.random.default_rng(1), 5, 10, 3)
        cfg = sv.PrepConfig(theta=0.4 * np.pi, mode="monte_carlo")
        a = sv.Preparer(cfg, np.random.default_rng(42)).prepare(f)
        b = sv.Preparer(cfg, np.random.default_rng(42)).prepare(f)
        assert (a.restarts, a.measurements) == (b.restarts, b.measurements)

    def test_monte_carlo_matches_naive_simulation(self):
        """Empirical per-attempt success frequency from a naive check-by-check
        simulation must match the deterministic cumulative probability."""
        rng = np.random.default_rng(2024)
        f = fm.random_satisfiable(rng, 4, 6, 3)
        theta, eps = 0.45 * np.pi, 0.25
        mu = sp.convergence_rate(f, theta)
        r_star = sv.cycles_required(theta, f.n, eps, mu)
        projs = enc.clause_projectors(f, theta)
        cfg = sv.PrepConfig(theta=theta, epsilon=eps, mode="deterministic")
        p_exact = sv.Preparer(cfg, rng).prepare(f).success_probability

        attempts = 10_000
        successes = 0
        sim_rng = np.random.default_rng(77)
        for _ in range(attempts):
            psi = svec.plus_state(f.n)
            ok = True
            for _ in range(r_star):
                for proj in projs:
                    outcome = svec.check_clause(psi, proj, sim_rng)
                    if not outcome.passed:
                        ok = False
                        break
                    psi = outcome.post_state
                if not ok:
                    break
            successes += ok
        sigma = math.sqrt(p_exact * (1 - p_exact) / attempts)
        assert abs(successes / attempts - p_exact) <= 4 * sigma

    def test_layered_and_sequential_agree_in_layer_order(self, small_instances):
        from mdsat.phf import build_layers, layered_order

        theta = 0.3 * np.pi
        for f in small_instances[:4]:
            order = layered_order(build_layers(f, theta))
            lay = sv.allpass_trajectory(
                f, sv.PrepConfig(theta=theta, plan="layered", mode="deterministic"), 3
            )
            seq_state = svec.plus_state(f.n)
            projs = enc.clause_projectors(f, theta)
            cum = 1.0
            for _ in range(3):
                for ci in order:
                    out = svec.apply_check_unnormalized(seq_state, projs[ci])
                    p = out @ out
                    cum *= p
                    seq_state = out / np.sqrt(p)
            assert np.abs(lay.final_state - seq_state).max() < 1e-10
            assert abs(lay.success_probability - cum) < 1e-10

    def test_prepare_state_wrapper_and_trace(self, tmp_path):
        f = fm.random_satisfiable(np.random.default_rng(1), 4, 7, 3)
        cfg = sv.PrepConfig(theta=0.4 * np.pi, mode="monte_carlo")
        path = tmp_path / "trace.csv"
        with open(path, "w", newline="") as fh:
            tracer = sv.TraceWriter(fh)
            res = sv.prepare_state(f, cfg, np.random.default_rng(6), trace=tracer)
        lines = path.read_text().splitlines()
        assert lines[0] == "preparation,attempt,cycle,check,outcome,probability"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == res.measurements
        assert sum(1 for r in rows if r[4] == "fail") == res.restarts
        # the successful attempt passes every check of every cycle
        final = [r for r in rows if int(r[1]) == res.restarts]
        assert len(final) == res.r_star * f.m
        assert all(r[4] == "pass" for r in final)

    def test_restarts_exhausted_on_unsat(self):
        f = fm.formula_from_dimacs_codes(1, [[1], [-1]])
        cfg = sv.PrepConfig(
            theta=np.pi / 2, mode="monte_carlo", max_restarts=50,
            mu_source="user", mu=0.0,
        )
        with pytest.raises(sv.RestartsExhausted):
            sv.Preparer(cfg, np.random.default_rng(0)).prepare(f)


class TestReadoutUnique:
    def test_parameter_formulas(self):
        eps, copies = sv.unique_readout_parameters(np.pi / 2, 4, 0.1)
        assert copies == 11  # ceil(2 ln 40 / ln 2)
        assert abs(eps - (1 - 1 / math.sqrt(2)) ** 2 / 8) < 1e-12
        eps2, _ = sv.unique_readout_parameters(0.3 * np.pi, 4, 0.1)
        assert abs(eps2 - (1 - 1 / math.sqrt(2)) ** 2 / 8 * math.sin(0.3 * np.pi) ** 2) < 1e-12

    def test_recovers_planted_solution(self):
        f = fm.generate("planted_unique", 7, 28, 3, seed=10)
        planted = next(iter(fm.brute_force_solutions(f)))
        theta = 0.4 * np.pi
        hits = 0
        for trial in range(20):
            rng = np.random.default_rng([trial, 5])
            prep = sv.Preparer(sv.PrepConfig(theta=theta, mode="deterministic"), rng)
            try:
                a = sv.readout_unique(f, theta, 0.1, rng, preparer=prep)
            except sv.ReadoutFailed:
                continue
            assert a == planted
            hits += 1
        assert hits >= 18  # failure rate must stay near delta


class TestReadoutMultiple:
    def test_parameter_formulas(self):
        eps, shots = sv.multiple_readout_parameters(np.pi / 2, 4, 0.1)
        assert shots == 36  # ceil(8 ln 80)
        assert abs(eps - 1 / 8) < 1e-12

    def test_unique_instance_agrees_with_majority_readout(self):
        f = fm.generate("planted_unique", 6, 20, 3, seed=12)
        planted = next(iter(fm.brute_force_solutions(f)))
        theta = 0.45 * np.pi
        rng = np.random.default_rng(3)
        prep = sv.Preparer(sv.PrepConfig(theta=theta, mode="deterministic"), rng)
        a = sv.readout_multiple(f, theta, 0.1, rng, preparer=prep)
        assert a == planted

    def test_multi_solution_membership(self):
        f = fm.formula_from_dimacs_codes(2, [[1, 2]])
        theta = 0.4 * np.pi
        seen = set()
        for trial in range(12):
            rng = np.random.default_rng(trial)
            prep = sv.Preparer(sv.PrepConfig(theta=theta, mode="deterministic"), rng)
            a = sv.readout_multiple(f, theta, 0.1, rng, preparer=prep)
            assert a in {"01", "10", "11"}
            seen.add(a)
        assert seen  # at least one solution produced

    def test_zero_occurrence_variable_fixed_false(self):
        f = fm.formula_from_dimacs_codes(3, [[2, 3]])  # variable 1 unused
        rng = np.random.default_rng(0)
        prep = sv.Preparer(sv.PrepConfig(theta=0.4 * np.pi, mode="deterministic"), rng)
        a = sv.readout_multiple(f, 0.4 * np.pi, 0.1, rng, preparer=prep)
        assert a[0] == "0" and fm.evaluate(f, a)


class TestSolve:
    def test_satisfiable_random(self):
        f = fm.random_satisfiable(np.random.default_rng(31), 8, 24, 3)
        report = sv.solve(f, 0.45 * np.pi, delta=0.1, seed=11)
        assert report.status == "SAT" and report.verified
        assert fm.evaluate(f, report.assignment)
        assert report.measurements > 0

    def test_unsatisfiable_budget_verdict(self):
        f = fm.formula_from_dimacs_codes(1, [[1], [-1]])
        report = sv.solve(f, np.pi / 2, seed=0)
        assert report.status == "UNSAT" and report.assignment is None

    def test_seed_determinism(self):
        f = fm.random_satisfiable(np.random.default_rng(8), 6, 14, 3)
        r1 = sv.solve(f, 0.4 * np.pi, seed=123)
        r2 = sv.solve(f, 0.4 * np.pi, seed=123)
        assert r1.to_json(include_timing=False) == r2.to_json(include_timing=False)

    def test_unique_readout_mode(self):
        f = fm.generate("planted_unique", 6, 20, 3, seed=14)
        planted = next(iter(fm.brute_force_solutions(f)))
        report = sv.solve(f, 0.4 * np.pi, readout="unique", seed=2)
        assert report.status == "SAT" and report.assignment == planted

    def test_schedule_mode(self):
        f = fm.random_satisfiable(np.random.default_rng(40), 5, 10, 3)
        schedule = sv.Schedule(kind="cubic", theta_init=0.47 * np.pi / 2, c_q=12)
        report = sv.solve(f, schedule, seed=9)
        assert report.status == "SAT"
        assert report.schedule == {"kind": "cubic", "theta_init": 0.47 * np.pi / 2, "c_q": 12}

    def test_layered_plan(self):
        f = fm.random_satisfiable(np.random.default_rng(50), 6, 12, 3)
        report = sv.solve(f, 0.4 * np.pi, plan="layered", seed=4)
        assert report.status == "SAT" and fm.evaluate(f, report.assignment)


class TestTheoryBounds:
    def test_unrotated_expression(self):
        tb = sv.theory_bounds(np.pi / 2, 8, 30, 0.1, q=1, mu=0.0, d_sol=1)
        assert tb.unrotated_cost == pytest.approx(30 * math.log(10) * 2**8)
        tb4 = sv.theory_bounds(np.pi / 2, 8, 30, 0.1, q=1, mu=0.0, d_sol=4)
        assert tb4.unrotated_cost == pytest.approx(tb.unrotated_cost / 4)

    def test_amplitude_amplification_halves_exponent(self):
        theta = 0.3 * np.pi
        t1 = sv.theory_bounds(theta, 10, 30, 0.1, q=1, mu=0.5)
        t2 = sv.theory_bounds(theta, 10, 30, 0.1, q=2, mu=0.5)
        factor = (2 / (1 + math.cos(theta))) ** (10 / 2)
        assert t1.prep_cost / t2.prep_cost == pytest.approx(factor)

    def test_unate_schedule_polynomial(self):
        # cos(theta) = 1 - 2/n keeps the amplification factor bounded by e,
        # so the bound grows polynomially (close to n ln^2 n).
        costs = []
        for n in (8, 16, 32, 64):
            theta = math.acos(1 - 2 / n)
            tb = sv.theory_bounds(theta, n, n, 0.1, q=1, mu=0.0, readout="multiple")
            costs.append(tb.total_cost)
        for a, b, n in zip(costs, costs[1:], (8, 16, 32)):
            poly_ref = (2 * n / n) ** 3 * (math.log(2 * n) / math.log(n)) ** 2
            assert b / a < 8 * poly_ref  # far below any exponential doubling

    def test_gap_route(self):
        tb = sv.theory_bounds(0.4 * np.pi, 6, 12, 0.1, uniform_gap=0.2, g=3)
        assert tb.ln_inv_mu == pytest.approx(0.2 / 36)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            sv.theory_bounds(0.4, 6, 10, 0.1, q=3, mu=0.5)
        with pytest.raises(ValueError):
            sv.theory_bounds(0.4, 6, 10, 0.1)  # neither mu nor gap
        with pytest.raises(ValueError):
            sv.theory_bounds(0.4, 6, 10, 0.1, uniform_gap=0.1)  # missing g
