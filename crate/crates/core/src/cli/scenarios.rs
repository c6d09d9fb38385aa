//! Built-in parameter sets, one per figure or check.

use super::config::{ControlSpec, HeatAxis, LawKind, RunConfig};
use crate::error::{Error, Result};
use crate::statedep::Coefficient;

/// Every scenario name, in catalog order.
pub const SCENARIOS: &[&str] = &[
    "fig1_noinvest",
    "fig1_rd",
    "fig1_market",
    "fig3_heatmap",
    "fig4_heatmap",
    "fig5_stateI",
    "fig6_stateII",
    "gamma1_thresholds",
    "beta_c_limit",
];

/// Initial wealths at which the first-figure scenarios are simulated.
pub const FIG1_X0S: [f64; 3] = [0.5, 1.0, 2.0];

fn fig1_base(name: &str) -> RunConfig {
    RunConfig {
        scenario: Some(name.into()),
        law: Some(LawKind::Exponential),
        nu: Some(0.1),
        rho: Some(0.1),
        lambda: Some(0.1),
        delta: Some(1.0),
        gamma: Some(0.5),
        x0: Some(1.0),
        x_min: Some(0.0),
        x_max: Some(10.0),
        x_n: Some(101),
        ..Default::default()
    }
}

/// Configuration of a named scenario.
pub fn scenario(name: &str) -> Result<RunConfig> {
    Ok(match name {
        "fig1_noinvest" => RunConfig {
            control: Some(ControlSpec::None),
            ..fig1_base(name)
        },
        "fig1_rd" => RunConfig {
            control: Some(ControlSpec::Optimal),
            ..fig1_base(name)
        },
        "fig1_market" => RunConfig {
            control: Some(ControlSpec::Optimal),
            mu: Some(0.1),
            sigma: Some(0.2),
            ..fig1_base(name)
        },
        "fig3_heatmap" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(2.0),
            rho: Some(2.0),
            lambda: Some(0.1),
            delta: Some(1.0),
            gamma: Some(0.5),
            heat_x: Some(HeatAxis::Gamma),
            heat_x_min: Some(0.05),
            heat_x_max: Some(0.95),
            heat_x_n: Some(19),
            heat_y: Some(HeatAxis::Delta),
            heat_y_min: Some(0.5),
            heat_y_max: Some(10.0),
            heat_y_n: Some(20),
            ..Default::default()
        },
        "fig4_heatmap" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(0.1),
            rho: Some(1.0),
            lambda: Some(0.1),
            delta: Some(1.0),
            gamma: Some(0.5),
            heat_x: Some(HeatAxis::Rho),
            heat_x_min: Some(1.0),
            heat_x_max: Some(50.0),
            heat_x_n: Some(50),
            heat_y: Some(HeatAxis::Lambda),
            heat_y_min: Some(0.1),
            heat_y_max: Some(3.0),
            heat_y_n: Some(30),
            ..Default::default()
        },
        "fig5_stateI" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(0.1),
            gamma: Some(0.5),
            state_rho: Some(Coefficient::constant(1.0)),
            state_lambda: Some(Coefficient::affine(0.1, 1.0, 1.0)),
            state_delta: Some(Coefficient::affine(1.0, 1.0, 1.0)),
            control: Some(ControlSpec::Optimal),
            x0: Some(1.0),
            x_min: Some(0.0),
            x_max: Some(10.0),
            x_n: Some(101),
            ..Default::default()
        },
        "fig6_stateII" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(0.1),
            gamma: Some(1.0),
            state_rho: Some(Coefficient::affine(1.0, 1.0, 1.0)),
            state_lambda: Some(Coefficient::rational(0.1, 1.2)),
            state_delta: Some(Coefficient::constant(0.4)),
            control: Some(ControlSpec::Cap { cap: 1e3 }),
            x0: Some(5.0),
            x_min: Some(0.0),
            x_max: Some(15.0),
            x_n: Some(151),
            ..Default::default()
        },
        // λ/ρ = 0.5: δ = 0.45 sits in the no-spending region, δ = 0.55 in
        // the maximal-spending one. `delta` is the lower side.
        "gamma1_thresholds" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(0.1),
            rho: Some(1.0),
            lambda: Some(0.5),
            delta: Some(0.45),
            gamma: Some(1.0),
            control: Some(ControlSpec::Optimal),
            x0: Some(1.0),
            ..Default::default()
        },
        "beta_c_limit" => RunConfig {
            scenario: Some(name.into()),
            law: Some(LawKind::Exponential),
            nu: Some(0.1),
            rho: Some(1.0),
            lambda: Some(0.05),
            delta: Some(1.0),
            gamma: Some(1.0),
            mu: Some(0.1),
            sigma: Some(0.2),
            ..Default::default()
        },
        _ => {
            return Err(Error::Config(format!(
                "unknown scenario {name:?}; known: {}",
                SCENARIOS.join(", ")
            )))
        }
    })
}

/// Scenario defaults (if `cfg` names one) overlaid with `cfg`.
pub fn resolve(cfg: &RunConfig) -> Result<RunConfig> {
    match &cfg.scenario {
        Some(name) => {
            let mut base = scenario(name)?;
            base.overlay(cfg)?;
            Ok(base)
        }
        None => Ok(cfg.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_round_trips() {
        for name in SCENARIOS {
            let c = scenario(name).unwrap();
            assert_eq!(c.scenario.as_deref(), Some(*name));
            let text = c.to_text();
            assert_eq!(RunConfig::parse(&text).unwrap(), c, "{name}");
        }
        assert!(scenario("fig2").is_err());
    }

    #[test]
    fn resolve_keeps_overrides() {
        let cfg = RunConfig {
            scenario: Some("fig1_rd".into()),
            x0: Some(2.0),
            ..Default::default()
        };
        let r = resolve(&cfg).unwrap();
        assert_eq!(r.x0, Some(2.0));
        assert_eq!(r.rho, Some(0.1));
    }
}
