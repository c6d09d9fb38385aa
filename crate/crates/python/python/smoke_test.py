"""Quick check that the extension imports and agrees with known values."""

import json
import math

import dualrisk


def main():
    law = dualrisk.JumpLaw.exponential(0.1)
    params = dualrisk.ModelParams(0.1, 0.1, 1.0, 0.5)
    sol = dualrisk.solve(law, params)
    assert sol["feasible"]
    assert abs(sol["beta"] - 2.0583123951776996) < 1e-9, sol
    assert abs(sol["c_star"] - 0.053667504192892003) < 1e-12, sol

    market = dualrisk.MarketParams(0.1, 0.2)
    msol = dualrisk.solve_market(law, params, market)
    assert msol["beta"] > sol["beta"] and msol["a_star"] > 0

    assert abs(dualrisk.implicit_c_star(0.1, 0.1, 1.0, 0.5) - sol["c_star"]) < 1e-12
    assert dualrisk.condition_lhs(law, params) < 0

    v1 = dualrisk.closed_form_state_ex1(1.0, 0.1, 1.0, 1.0, 1.0, 0.1, 0.5, 1.0)
    assert abs(v1 - 0.4668866802527305) < 1e-12, v1
    model = dualrisk.StateModel("constant 1", "affine 0.1 1 1", "affine 1 1 1", 0.5)
    q = dualrisk.ruin_probability_quadrature(model, 0.1, "optimal", 1.0)
    assert abs(q - v1) < 1e-8, q
    v2 = dualrisk.closed_form_state_ex2(1.0, 1.0, 1.0, 1.2, 0.4, 0.1, 5.0)
    assert abs(v2 - 0.11707268273365749) < 1e-12, v2

    est = dualrisk.simulate_constant(law, params, 0.0, 1.0, 20000, 7)
    target = math.exp(-0.9)
    assert abs(est["p_hat"] - target) <= 3.5 * est["std_err"], est

    code, text = dualrisk.run_command("solve", dualrisk.scenario_config("fig1_rd"))
    assert code == 0 and abs(json.loads(text)["beta"] - sol["beta"]) < 1e-12
    code, _ = dualrisk.run_command("solve", "scenario = fig1_rd\nrho = 100\n")
    assert code == 2
    assert "fig6_stateII" in dualrisk.SCENARIOS

    try:
        dualrisk.ModelParams(-1.0, 0.1, 1.0, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("negative rho accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
