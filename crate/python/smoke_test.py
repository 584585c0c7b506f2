"""Smoke test for the vqa_noise extension module."""

import json
import math

import vqa_noise as vn


def main():
    assert math.isclose(vn.variance_of_stochastic(0.1), -2.0 * math.log(0.8))
    assert vn.depolarizing_gaussian_variance(1, 1e-3) > 0.0

    s = vn.scaling_helpers(100, 100, 1, 1e-3)
    assert math.isclose(s["sufficient"], 1e-7, rel_tol=1e-9), s

    c = vn.Circuit(2)
    c.push_rotation("XI")
    c.push_cz(0, 1)
    c.push_rotation("YZ")
    assert c.n_params == 2
    assert vn.Circuit.from_json(c.to_json()).n_params == 2

    cost = vn.CostFunction(c, pauli="ZI")
    assert math.isclose(cost([0.0, 0.0]), 1.0)
    g = cost.gradient([0.3, 0.1])
    assert math.isclose(g[0], -math.sin(0.3) * math.cos(0.1), abs_tol=1e-12), g

    model, theta_opt = vn.toy_model(n=3, depth=1, seed=4)
    assert abs(model(theta_opt) - 1.0) < 1e-10

    noise = vn.NoiseSpec(q1=1e-4, q2=1e-3, q_readout=1e-3)
    ev = vn.NoisyEvaluator(model, noise)
    value, se = ev(theta_opt)
    assert value > 1.0 and se == 0.0
    rep = ev.mitigate(theta_opt)
    assert abs(rep["mitigated"] - 1.0) < abs(rep["raw_noisy"] - 1.0), rep
    bounds = ev.bounds(theta_opt)
    assert math.isclose(bounds["epsilon"], value - 1.0, rel_tol=1e-9), bounds

    traj = vn.NoisyEvaluator(model, noise, samples=2000, seed=7)
    tv, tse = traj(theta_opt)
    assert tse > 0.0 and abs(tv - value) < 5.0 * tse + 1e-9

    assert all(s["passed"] for s in vn.verify_channels(cases=20)["suites"])

    cfg = {
        "toy_model": {"n": 3, "depth": 1},
        "sweep": {"variable": "rate", "values": [1e-4, 1e-3], "seeds": [0], "optimizer": {"restarts": 1}},
    }
    rec = vn.run_sweep(json.dumps(cfg))
    assert len(rec["points"]) == 2 and rec["summary"]["failures"] == 0, rec["summary"]

    demo = vn.mitigation_demo(json.dumps({"toy_model": {"n": 3}, "noise": {"q1": 1e-4, "q2": 1e-3, "q_readout": 1e-3}}))
    assert abs(demo["mitigated_error"]) <= abs(demo["raw_error"])

    print("smoke test passed")


if __name__ == "__main__":
    main()
