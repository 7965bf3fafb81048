"""Smoke test for the qest extension module: python3 smoke_test.py"""
import math

import qest


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    a = qest.BlochState(0.6, (0.0, 0.0, 2.0))
    assert a.n == (0.0, 0.0, 1.0)
    t, v = a.four_vector()
    assert close(t, 0.8) and close(v[2], 0.6)
    pure_up = qest.BlochState(1.0, (0, 0, 1))
    pure_down = qest.BlochState(1.0, (0, 0, -1))
    assert close(qest.fidelity(pure_up, pure_down), 0.0)
    assert close(qest.fidelity(a, a), 1.0)

    assert qest.split_copies(1000, 0.7, 3) == (126, 42, 291, 1)
    est = qest.adaptive_estimate(4096, a, seed=1)
    assert 0.0 <= est.r <= 1.0 and qest.fidelity(est, a) > 0.9
    tom = qest.tomography_estimate(4096, qest.BlochState(0.5, (1, 0, 0), d=2), seed=2)
    assert tom.d == 2 and tom.n[1] == 0.0

    rows = qest.run_experiment("adaptive", "bures", 3, [256, 1024, 4096], trials=2000, seed=3)
    assert [r["N"] for r in rows] == [256, 1024, 4096]
    fit = qest.fit_scaling([r["N"] for r in rows], [r["mean_fidelity"] for r in rows],
                           [r["std_err"] for r in rows])
    assert 0.8 < fit["b"] < 1.3, fit

    h = qest.qfi(0.5, math.pi / 2)
    assert close(h[0][0], 4 / 3, 1e-15) and close(h[1][1], 0.25)
    gm, dual = qest.bound_stats(0.5, 1.0, 0.3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert gm <= 1 + 1e-9 and dual >= 9 - 1e-6
    assert qest.verify_bounds(3, 50, 7) == (50, 50)

    assert close(qest.collective_bound("bures", 2, 100), 0.995)
    assert close(qest.mean_purity("bures", 2), math.pi / 4)
    draws = qest.sample_prior("point:0.3", 3, 10, seed=4)
    assert len(draws) == 10 and all(close(d[0], 0.3) for d in draws)

    try:
        qest.BlochState(1.5, (0, 0, 1))
    except ValueError:
        pass
    else:
        raise AssertionError("r > 1 accepted")
    print("qest smoke test: ok")


if __name__ == "__main__":
    main()
