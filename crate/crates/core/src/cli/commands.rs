//! Subcommand bodies. Each returns the text to print and an exit status;
//! an `Err` maps to status 1.

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ControlSpec, Format, RunConfig};
use super::scenarios::FIG1_X0S;
use crate::distributions::JumpLaw;
use crate::error::{Error, Result};
use crate::market::{beta_of_capped_c, beta_two, solve_market, MarketParams};
use crate::montecarlo::{
    adjustment_exponent, choose_barrier, choose_barrier_from_curve, joint_std_err, simulate_constant,
    simulate_market, simulate_state, MCEstimate,
};
use crate::solver::{
    alpha_constant_c, alpha_no_investment, asymptotic_report, condition_one_lhs, solve, Investment, Knob,
    ModelParams, Regime,
};
use crate::statedep::{
    closed_form_state_ex1, closed_form_state_ex2, no_investment_state_ex2, Coefficient, Policy,
    QuadratureEvaluator, StateExampleIIParams, StateExampleIParams, StateModel,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    pub code: i32,
}

impl CommandOutput {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

/// `x` rounded to 12 significant digits, written in its shortest form.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_sig(x))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Rows of optional numbers as CSV (missing cells empty) or a JSON array of
/// objects (missing cells null).
fn table(format: Format, header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    match format {
        Format::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| c.map(fmt_sig).unwrap_or_default()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.map_or(Value::Null, json_f64)))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            pretty(&Value::Array(arr))
        }
    }
}

fn infeasible(cfg: &RunConfig, message: String) -> CommandOutput {
    log::warn!("{message}");
    CommandOutput {
        text: pretty(&json!({ "feasible": false, "message": message, "config": cfg.to_text() })),
        code: EXIT_INFEASIBLE,
    }
}

/// A ruin-probability curve in initial wealth.
enum Curve {
    /// `e^{-βx}`; `β = 0` is certain ruin, `β = inf` certain survival.
    Exp(f64),
    StateI(StateExampleIParams),
    StateII(StateExampleIIParams),
    StateIINoInvest(StateExampleIIParams),
    Quadrature(Box<QuadratureEvaluator>),
}

impl Curve {
    fn value(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        match self {
            Self::Exp(b) if b.is_infinite() => Ok(0.0),
            Self::Exp(b) => Ok((-b * x).exp()),
            Self::StateI(p) => closed_form_state_ex1(p, x),
            Self::StateII(p) => closed_form_state_ex2(p, x),
            Self::StateIINoInvest(p) => no_investment_state_ex2(p, x),
            Self::Quadrature(q) => q.value(x),
        }
    }
}

/// First closed-form example if `model` has its shape.
fn match_example_one(model: &StateModel, nu: f64) -> Option<StateExampleIParams> {
    match (model.rho, model.lambda, model.delta) {
        (
            Coefficient::Constant { value: rho0 },
            Coefficient::Affine { scale: l0, c1, c2 },
            Coefficient::Affine { scale: d0, c1: e1, c2: e2 },
        ) if c1 == e1 && c2 == e2 => StateExampleIParams::new(rho0, l0, d0, c1, c2, nu, model.gamma).ok(),
        _ => None,
    }
}

/// Second closed-form example if `model` has its shape.
fn match_example_two(model: &StateModel, nu: f64) -> Option<StateExampleIIParams> {
    match (model.rho, model.lambda, model.delta) {
        (
            Coefficient::Affine { scale: rho0, c1, c2 },
            Coefficient::Rational { nu: n, lambda0 },
            Coefficient::Constant { value: delta0 },
        ) if n == nu && model.gamma == 1.0 => StateExampleIIParams::new(rho0, c1, c2, lambda0, delta0, nu).ok(),
        _ => None,
    }
}

/// Closed form where the model is one of the two examples, quadrature
/// otherwise.
fn state_curve(model: &StateModel, nu: f64, policy: Policy) -> Result<Curve> {
    if let Some(p) = match_example_one(model, nu) {
        match policy {
            Policy::Optimal => return Ok(Curve::StateI(p)),
            Policy::Constant { rate } => return Ok(Curve::StateI(p.with_c0(rate)?)),
            Policy::BangBang { .. } => {}
        }
    }
    if let Some(p) = match_example_two(model, nu) {
        match policy {
            Policy::BangBang { cap: None } => return Ok(Curve::StateII(p)),
            Policy::Constant { rate } if rate == 0.0 => return Ok(Curve::StateIINoInvest(p)),
            _ => {}
        }
    }
    Ok(Curve::Quadrature(Box::new(QuadratureEvaluator::new(model, nu, policy)?)))
}

fn state_inputs(cfg: &RunConfig) -> Result<(StateModel, f64, Policy)> {
    if cfg.market()?.is_some() {
        return Err(Error::Config("the market index is not available for state-dependent models".into()));
    }
    let law = cfg.jump_law()?;
    let nu = match law {
        JumpLaw::Exponential { rate } => rate,
        _ => return Err(Error::Config("state-dependent models need exponential jumps".into())),
    };
    let model = cfg.state_model()?;
    let policy = cfg.state_policy(&model)?;
    policy.validate(&model)?;
    Ok((model, nu, policy))
}

fn solution_json(cfg: &RunConfig, sol: Value) -> Value {
    let mut v = sol;
    if let Value::Object(map) = &mut v {
        map.entry("feasible").or_insert(json!(true));
        map.entry("a_star").or_insert(Value::Null);
        map.insert("config".into(), json!(cfg.to_text()));
    }
    v
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput> {
    if cfg.is_state_dependent() {
        return Err(Error::Config(
            "solve handles state-independent models; use curve or simulate for state-dependent ones".into(),
        ));
    }
    let law = cfg.jump_law()?;
    let p = cfg.model_params()?;
    let (value, feasible) = match cfg.market()? {
        Some(m) if p.gamma <= 1.0 => {
            let s = solve_market(&law, &p, &m)?;
            (serde_json::to_value(&s).map_err(json_err)?, true)
        }
        _ => {
            let s = solve(&law, &p)?;
            (serde_json::to_value(&s).map_err(json_err)?, s.feasible)
        }
    };
    let text = pretty(&solution_json(cfg, value));
    Ok(CommandOutput {
        text,
        code: if feasible { EXIT_OK } else { EXIT_INFEASIBLE },
    })
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Config(format!("serialisation failed: {e}"))
}

/// Exponent of the spending rule `control` in the state-independent model.
fn rd_curve(law: &JumpLaw, p: &ModelParams, control: ControlSpec, cap_m: f64) -> Result<Option<Curve>> {
    let constant = |c: f64| -> Result<Option<Curve>> { Ok(Some(Curve::Exp(alpha_constant_c(law, p, c)?))) };
    match control {
        ControlSpec::None => Ok(None),
        ControlSpec::Rate { rate } => constant(rate),
        ControlSpec::Cap { cap } => constant(cap),
        ControlSpec::Max => constant(cap_m),
        ControlSpec::Optimal => {
            let s = solve(law, p)?;
            if !s.feasible {
                let lhs = condition_one_lhs(law, p).unwrap_or(f64::NAN);
                return Err(Error::InvalidParameter(format!(
                    "column v_rd is infeasible: the condition rho - lambda E[Y] - (1/gamma - 1) C* < 0 fails (left side {lhs})"
                )));
            }
            Ok(Some(Curve::Exp(s.beta)))
        }
    }
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<CommandOutput> {
    let grid = cfg.x_grid()?;
    if grid.min < 0.0 {
        return Err(Error::Config(format!("x_min must be non-negative, got {}", grid.min)));
    }
    let control = cfg.control.unwrap_or(ControlSpec::Optimal);
    let mut header = vec!["x", "v_noinvest"];
    let mut curves = Vec::new();
    if cfg.is_state_dependent() {
        let (model, nu, policy) = state_inputs(cfg)?;
        curves.push(state_curve(&model, nu, Policy::Constant { rate: 0.0 })?);
        if control != ControlSpec::None {
            header.push("v_rd");
            curves.push(state_curve(&model, nu, policy)?);
        }
    } else {
        let law = cfg.jump_law()?;
        let p = cfg.model_params()?;
        let alpha = alpha_no_investment(&law, p.rho, p.lambda)?;
        if alpha.is_none() {
            log::warn!("rho >= lambda E[Y]: without spending ruin is certain");
        }
        curves.push(Curve::Exp(alpha.unwrap_or(0.0)));
        if let Some(c) = rd_curve(&law, &p, control, cfg.cap_m.unwrap_or(1e3))? {
            header.push("v_rd");
            curves.push(c);
        }
        if let Some(m) = cfg.market()? {
            header.push("v_rd_market");
            let beta = if p.gamma <= 1.0 {
                solve_market(&law, &p, &m)?.beta
            } else {
                f64::INFINITY
            };
            curves.push(Curve::Exp(beta));
        }
    }
    let mut rows = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let mut row = vec![Some(x)];
        for c in &curves {
            row.push(Some(c.value(x)?));
        }
        rows.push(row);
    }
    Ok(CommandOutput::ok(table(cfg.format.unwrap_or_default(), &header, &rows)))
}

pub fn cmd_heatmap(cfg: &RunConfig) -> Result<CommandOutput> {
    let law = cfg.jump_law()?;
    let base = cfg.model_params()?;
    let (ax, gx, ay, gy) = cfg.heat_grids()?;
    let mut rows = Vec::with_capacity(gx.n * gy.n);
    for u in gx.points() {
        for v in gy.points() {
            let p = ay.apply(ax.apply(base, u), v);
            p.validate()?;
            let s = solve(&law, &p)?;
            let c = if s.feasible {
                Some(s.c_star.rate().unwrap_or(f64::INFINITY))
            } else {
                None
            };
            rows.push(vec![Some(u), Some(v), c, Some(if s.feasible { 1.0 } else { 0.0 })]);
        }
    }
    let header = [ax.name(), ay.name(), "c_star", "feasible"];
    Ok(CommandOutput::ok(table(cfg.format.unwrap_or_default(), &header, &rows)))
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<CommandOutput> {
    let knob: Knob = cfg
        .knob
        .ok_or_else(|| Error::Config("missing key `knob`".into()))?;
    let law = cfg.jump_law()?;
    let p = cfg.model_params()?;
    let market = cfg.market()?;
    let report = asymptotic_report(&law, &p, knob, market.as_ref(), cfg.sweep()?)?;
    let header = ["param", "beta", "c_star", "computed", "predicted", "ratio"];
    let rows: Vec<Vec<Option<f64>>> = report
        .rows
        .iter()
        .map(|r| vec![Some(r.param), r.beta, r.c_star, r.computed, r.predicted, r.ratio])
        .collect();
    Ok(CommandOutput::ok(table(cfg.format.unwrap_or_default(), &header, &rows)))
}

fn estimate_json(est: &MCEstimate) -> Value {
    serde_json::to_value(est).unwrap_or(Value::Null)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.seed()?;
    let x0 = cfg
        .x0
        .ok_or_else(|| Error::Config("missing key `x0`".into()))?;
    let tail = cfg.barrier_tail();
    let (est, reference, detail) = if cfg.is_state_dependent() {
        let (model, nu, policy) = state_inputs(cfg)?;
        let curve = state_curve(&model, nu, policy)?;
        let barrier = match cfg.barrier {
            Some(b) => b,
            None => choose_barrier_from_curve(|x| curve.value(x), tail, x0).map_err(|e| {
                Error::Config(format!("cannot place the survival barrier ({e}); set `barrier`"))
            })?,
        };
        let sim = cfg.sim_config(barrier)?;
        let est = simulate_state(&model, nu, policy, x0, &sim)?;
        (est, curve.value(x0)?, json!({ "policy": policy }))
    } else {
        let law = cfg.jump_law()?;
        let p = cfg.model_params()?;
        let market = cfg.market()?;
        let cap_m = cfg.cap_m.unwrap_or(1e3);
        let market_sol = match &market {
            Some(m) if p.gamma <= 1.0 => Some(solve_market(&law, &p, m)?),
            _ => None,
        };
        let investment = match cfg.control.unwrap_or(ControlSpec::Optimal) {
            ControlSpec::Optimal => match &market_sol {
                Some(s) => s.c_star,
                None => {
                    let s = solve(&law, &p)?;
                    if !s.feasible {
                        return Ok(infeasible(
                            cfg,
                            "the optimal strategy still ruins with probability one".into(),
                        ));
                    }
                    s.c_star
                }
            },
            ControlSpec::None => Investment::Rate(0.0),
            ControlSpec::Rate { rate } => Investment::Rate(rate),
            ControlSpec::Cap { cap } => Investment::Rate(cap),
            ControlSpec::Max => Investment::MaxInvest,
        };
        let c = investment.capped(cap_m);
        let holding = match (&market, &market_sol) {
            (Some(_), Some(s)) => Some(cfg.exposure.unwrap_or(s.a_star)),
            (Some(_), None) => Some(cfg.exposure.unwrap_or(0.0)),
            _ => None,
        };
        let kappa = adjustment_exponent(&law, &p, c, market.as_ref().zip(holding))?;
        if kappa == 0.0 {
            return Ok(infeasible(cfg, "ruin is certain under this strategy".into()));
        }
        let barrier = match cfg.barrier {
            Some(b) => b,
            None if kappa.is_infinite() => 2.0 * x0,
            None => choose_barrier(kappa, tail)?,
        };
        let sim = cfg.sim_config(barrier)?;
        let est = match (&market, holding) {
            (Some(m), Some(a)) => simulate_market(&law, &p, m, investment, a, x0, &sim)?,
            _ => simulate_constant(&law, &p, c, x0, &sim)?,
        };
        let reference = if kappa.is_infinite() { 0.0 } else { (-kappa * x0).exp() };
        (
            est,
            reference,
            json!({ "spending": json_f64(c), "exposure": holding, "exponent": json_f64(kappa) }),
        )
    };
    let out = json!({
        "x0": x0,
        "reference": reference,
        "z_score": json_f64(est.z_score(reference)),
        "strategy": detail,
        "estimate": estimate_json(&est),
        "config": cfg.to_text(),
    });
    Ok(CommandOutput::ok(pretty(&out)))
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "crate::serde_ext::extended_f64")]
    pub computed: f64,
    #[serde(serialize_with = "crate::serde_ext::extended_f64")]
    pub reference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// Bound on `|z|` for Monte Carlo checks, on `|computed - reference|`
    /// otherwise.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn abs(name: impl Into<String>, computed: f64, reference: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            std_err: None,
            z: None,
            tolerance: tol,
            pass: (computed - reference).abs() <= tol,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::abs(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn mc(name: impl Into<String>, est: &MCEstimate, reference: f64, z_max: f64) -> Self {
        let z = est.z_score(reference);
        Self {
            name: name.into(),
            computed: est.p_hat,
            reference,
            std_err: Some(est.std_err),
            z: Some(z),
            tolerance: z_max,
            pass: z.abs() <= z_max,
        }
    }

    /// Absolute tolerance `tol` on a Monte Carlo estimate.
    pub fn mc_abs(name: impl Into<String>, est: &MCEstimate, reference: f64, tol: f64) -> Self {
        Self {
            std_err: Some(est.std_err),
            z: Some(est.z_score(reference)),
            ..Self::abs(name, est.p_hat, reference, tol)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Checks {
    checks: Vec<Check>,
    warnings: Vec<String>,
}

impl Checks {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn note(&mut self, est: &MCEstimate) {
        self.warnings.extend(est.warnings.iter().cloned());
    }
}

/// Least-squares slope of `ys` on `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn exponential_rate(law: &JumpLaw) -> Result<f64> {
    match law {
        JumpLaw::Exponential { rate } => Ok(*rate),
        _ => Err(Error::Config("this scenario needs exponential jumps".into())),
    }
}

fn verify_fig1(cfg: &RunConfig, name: &str, out: &mut Checks) -> Result<()> {
    let law = cfg.jump_law()?;
    let p = cfg.model_params()?;
    let tail = cfg.barrier_tail();
    match name {
        "fig1_noinvest" => {
            let alpha = alpha_no_investment(&law, p.rho, p.lambda)?
                .ok_or_else(|| Error::Config("no-investment exponent does not exist".into()))?;
            let sim = cfg.sim_config(choose_barrier(alpha, tail)?)?;
            for x0 in FIG1_X0S {
                let est = simulate_constant(&law, &p, 0.0, x0, &sim)?;
                out.push(Check::mc(format!("no investment, x = {x0}"), &est, (-alpha * x0).exp(), 3.5));
                out.note(&est);
            }
        }
        "fig1_rd" => {
            let s = solve(&law, &p)?;
            if !s.feasible {
                return Err(Error::Config("scenario parameters are infeasible".into()));
            }
            let c = s.c_star.capped(cfg.cap_m.unwrap_or(1e3));
            let sim = cfg.sim_config(choose_barrier(s.beta, tail)?)?;
            for x0 in FIG1_X0S {
                let est = simulate_constant(&law, &p, c, x0, &sim)?;
                out.push(Check::mc(format!("optimal spending, x = {x0}"), &est, s.value_at(x0), 3.5));
                out.note(&est);
            }
        }
        _ => {
            let m = cfg
                .market()?
                .ok_or_else(|| Error::Config("fig1_market needs mu and sigma".into()))?;
            let s = solve_market(&law, &p, &m)?;
            let sim = cfg.sim_config(choose_barrier(s.beta, tail)?)?;
            for x0 in FIG1_X0S {
                let est = simulate_market(&law, &p, &m, s.c_star, s.a_star, x0, &sim)?;
                let drift = est.step_halving.map_or(0.0, |h| h.drift);
                let tol = (3.5 * est.std_err).max(3.0 * drift);
                out.push(Check::mc_abs(
                    format!("optimal spending and index, x = {x0}"),
                    &est,
                    s.value_at(x0),
                    tol,
                ));
                out.note(&est);
            }
        }
    }
    Ok(())
}

fn verify_heatmaps(cfg: &RunConfig, name: &str, out: &mut Checks) -> Result<()> {
    let law = cfg.jump_law()?;
    let nu = exponential_rate(&law)?;
    let base = cfg.model_params()?;
    let (ax, gx, ay, gy) = cfg.heat_grids()?;
    let mut cells = Vec::new();
    for u in gx.points() {
        for v in gy.points() {
            let p = ay.apply(ax.apply(base, u), v);
            cells.push((u, v, p, solve(&law, &p)?));
        }
    }
    if name == "fig3_heatmap" {
        // Exponential jumps: E[Y] = 1/ν, and the condition reads
        // ρ - λ/ν - (δγ)^(1/(1-γ)) (1/γ - 1) ν^(-1/(1-γ)) < 0.
        let mismatches = cells
            .iter()
            .filter(|(_, _, p, s)| {
                let e = 1.0 / (1.0 - p.gamma);
                let lhs = p.rho - p.lambda / nu - (p.delta * p.gamma).powf(e) * (1.0 / p.gamma - 1.0) * nu.powf(-e);
                s.feasible != (lhs < 0.0)
            })
            .count();
        out.push(Check::abs("cells disagreeing with the feasibility condition", mismatches as f64, 0.0, 0.0));
        let (g, d) = (0.5, 10.0);
        let p = base.with_gamma(g).with_delta(d);
        let s = solve(&law, &p)?;
        let root = (p.lambda * p.lambda + p.rho * d * d).sqrt();
        let closed = d * d * p.rho * p.rho / ((p.lambda + root) * (p.lambda + root));
        out.push(Check::abs(
            "C* at gamma = 0.5, delta = 10",
            s.c_star.rate().unwrap_or(f64::NAN),
            closed,
            1e-10,
        ));
    } else {
        // C* must rise along the first axis and fall along the second.
        let ny = gy.n;
        let rate = |i: usize| cells[i].3.feasible.then(|| cells[i].3.c_star.rate()).flatten();
        let mut bad_x = 0usize;
        let mut bad_y = 0usize;
        for i in 0..cells.len() {
            if i + ny < cells.len() {
                if let (Some(a), Some(b)) = (rate(i), rate(i + ny)) {
                    bad_x += usize::from(b <= a);
                }
            }
            if (i + 1) % ny != 0 {
                if let (Some(a), Some(b)) = (rate(i), rate(i + 1)) {
                    bad_y += usize::from(b >= a);
                }
            }
        }
        out.push(Check::abs(format!("cells where C* fails to increase in {}", ax.name()), bad_x as f64, 0.0, 0.0));
        out.push(Check::abs(format!("cells where C* fails to decrease in {}", ay.name()), bad_y as f64, 0.0, 0.0));
        let n_infeasible = cells.iter().filter(|c| !c.3.feasible).count();
        out.push(Check::holds("grid shows both regions", n_infeasible > 0 && n_infeasible < cells.len()));
    }
    Ok(())
}

/// Grid of 20 wealth levels used by the state-dependent checks.
pub fn state_check_grid() -> Vec<f64> {
    (1..=20).map(|i| 0.5 * i as f64).collect()
}

fn verify_state_one(cfg: &RunConfig, out: &mut Checks) -> Result<()> {
    let (model, nu, _) = state_inputs(cfg)?;
    let ex = match_example_one(&model, nu)
        .ok_or_else(|| Error::Config("fig5_stateI needs the first example's coefficient shape".into()))?;
    let quad = QuadratureEvaluator::new(&model, nu, ex.policy())?;
    let worst = state_check_grid()
        .into_iter()
        .map(|x| Ok((closed_form_state_ex1(&ex, x)? - quad.value(x)?).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::abs("closed form vs quadrature, max over 20 points", worst, 0.0, 1e-8));
    let barrier = choose_barrier_from_curve(|x| closed_form_state_ex1(&ex, x), cfg.barrier_tail(), 2.0)?;
    let sim = cfg.sim_config(barrier)?;
    for x0 in FIG1_X0S {
        let est = simulate_state(&model, nu, ex.policy(), x0, &sim)?;
        out.push(Check::mc(format!("simulation vs closed form, x = {x0}"), &est, closed_form_state_ex1(&ex, x0)?, 3.5));
        out.push(Check::mc(format!("simulation vs quadrature, x = {x0}"), &est, quad.value(x0)?, 3.5));
        out.note(&est);
    }
    Ok(())
}

/// Local decay rate `-d ln V / dx` by central differences.
fn log_rate<F: Fn(f64) -> Result<f64>>(v: &F, x: f64) -> Result<f64> {
    let h = 1e-4 * (1.0 + x);
    Ok(-(v(x + h)?.ln() - v(x - h)?.ln()) / (2.0 * h))
}

fn verify_state_two(cfg: &RunConfig, out: &mut Checks) -> Result<()> {
    let (model, nu, policy) = state_inputs(cfg)?;
    let ex = match_example_two(&model, nu)
        .ok_or_else(|| Error::Config("fig6_stateII needs the second example's coefficient shape".into()))?;
    let v = |x: f64| closed_form_state_ex2(&ex, x);
    let xs = ex.x_star;
    let eps = 1e-12 * xs;
    out.push(Check::abs("continuity at the threshold", v(xs - eps)?, v(xs + eps)?, 1e-10));

    let grid: Vec<f64> = (0..=20).map(|i| 5.0 + 0.5 * i as f64).collect();
    let logs = grid.iter().map(|&x| Ok(v(x)?.ln())).collect::<Result<Vec<f64>>>()?;
    let fitted = -slope(&grid, &logs);
    let expected = ex.delta0 - ex.nu;
    out.push(Check::abs("fitted decay rate on [5, 15]", fitted, expected, 0.05 * expected));

    // A power law has decay rate falling like 1/(1+x); an exponential keeps it
    // constant.
    let (lo, hi) = (0.1 * xs, 0.9 * xs);
    let r_lo = log_rate(&v, lo)?;
    let r_hi = log_rate(&v, hi)?;
    let predicted = (1.0 + hi) / (1.0 + lo);
    out.push(Check::holds(
        format!("decay rate below the threshold falls (ratio {:.3}, power law {:.3})", r_lo / r_hi, predicted),
        r_lo / r_hi > 0.5 * predicted,
    ));
    let (a, b) = (log_rate(&v, xs + 2.0)?, log_rate(&v, xs + 10.0)?);
    out.push(Check::abs("decay rate above the threshold is constant", a, b, 1e-6 * b));

    let x0 = cfg.x0.unwrap_or(5.0);
    let barrier = choose_barrier_from_curve(v, cfg.barrier_tail(), x0)?;
    let sim = cfg.sim_config(barrier)?;
    let est = simulate_state(&model, nu, policy, x0, &sim)?;
    let tol = (3.5 * est.std_err).max(0.01);
    out.push(Check::mc_abs(format!("simulation with cap vs closed form, x = {x0}"), &est, v(x0)?, tol));
    out.note(&est);
    Ok(())
}

fn verify_gamma1(cfg: &RunConfig, out: &mut Checks) -> Result<()> {
    let law = cfg.jump_law()?;
    let nu = exponential_rate(&law)?;
    let p = cfg.model_params()?;
    if p.gamma != 1.0 {
        return Err(Error::Config("gamma1_thresholds needs gamma = 1".into()));
    }
    let threshold = p.lambda / p.rho;
    if p.delta >= threshold {
        return Err(Error::Config(format!("delta must lie below lambda/rho = {threshold}")));
    }
    let lo = p;
    let hi = p.with_delta(2.0 * threshold - p.delta);
    let x0 = cfg.x0.unwrap_or(1.0);
    let cap = cfg.cap_m.unwrap_or(1e3);
    let tail = cfg.barrier_tail();

    let s_lo = solve(&law, &lo)?;
    let s_hi = solve(&law, &hi)?;
    out.push(Check::holds("no spending below lambda/rho", s_lo.regime == Regime::SingularNoInvest));
    out.push(Check::holds("maximal spending above lambda/rho", s_hi.regime == Regime::SingularMaxInvest));
    out.push(Check::abs("exponent below: lambda/rho - nu", s_lo.beta, threshold - nu, 1e-10));
    out.push(Check::abs("exponent above: delta - nu", s_hi.beta, hi.delta - nu, 1e-10));

    for (side, params, sol) in [("below", lo, &s_lo), ("above", hi, &s_hi)] {
        let best = sol.c_star.capped(cap);
        let other = if best == 0.0 { cap } else { 0.0 };
        let k_best = alpha_constant_c(&law, &params, best)?;
        let sim = cfg.sim_config(choose_barrier(k_best, tail)?)?;
        let e_best = simulate_constant(&law, &params, best, x0, &sim)?;
        let e_other = simulate_constant(&law, &params, other, x0, &sim)?;
        out.push(Check::mc(format!("{side}: simulated optimal rule, x = {x0}"), &e_best, (-k_best * x0).exp(), 3.5));
        let gap = e_other.p_hat - e_best.p_hat;
        out.push(Check::holds(
            format!("{side}: the other rule ruins more often (gap {gap:.4})"),
            gap > 3.5 * joint_std_err(&e_best, &e_other),
        ));
        out.note(&e_best);
    }
    Ok(())
}

/// Spending levels `0, 1, 10, ..., 10^6`.
pub fn beta_c_levels() -> Vec<f64> {
    std::iter::once(0.0).chain((0..=6).map(|k| 10f64.powi(k))).collect()
}

fn verify_beta_c(cfg: &RunConfig, out: &mut Checks) -> Result<()> {
    let law = cfg.jump_law()?;
    let p = cfg.model_params()?;
    let m: MarketParams = cfg
        .market()?
        .ok_or_else(|| Error::Config("beta_c_limit needs mu and sigma".into()))?;
    let betas = beta_c_levels()
        .into_iter()
        .map(|c| beta_of_capped_c(&law, &p, &m, c))
        .collect::<Result<Vec<f64>>>()?;
    let b2 = beta_two(&law, p.delta)?;
    out.push(Check::holds("beta(c) increasing over 0, 1, ..., 1e6", betas.windows(2).all(|w| w[1] > w[0])));
    out.push(Check::abs("beta(1e6) vs beta_2", *betas.last().unwrap_or(&f64::NAN), b2, 1e-3));
    Ok(())
}

pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport> {
    let name = cfg
        .scenario
        .clone()
        .ok_or_else(|| Error::Config("verify needs `scenario`".into()))?;
    let mut out = Checks::default();
    match name.as_str() {
        "fig1_noinvest" | "fig1_rd" | "fig1_market" => {
            cfg.seed()?;
            verify_fig1(cfg, &name, &mut out)?;
        }
        "fig3_heatmap" | "fig4_heatmap" => verify_heatmaps(cfg, &name, &mut out)?,
        "fig5_stateI" => {
            cfg.seed()?;
            verify_state_one(cfg, &mut out)?;
        }
        "fig6_stateII" => {
            cfg.seed()?;
            verify_state_two(cfg, &mut out)?;
        }
        "gamma1_thresholds" => {
            cfg.seed()?;
            verify_gamma1(cfg, &mut out)?;
        }
        "beta_c_limit" => verify_beta_c(cfg, &mut out)?,
        _ => return Err(Error::Config(format!("no verification defined for scenario {name:?}"))),
    }
    Ok(VerifyReport {
        scenario: name,
        pass: out.checks.iter().all(|c| c.pass),
        checks: out.checks,
        warnings: out.warnings,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<CommandOutput> {
    let report = verify_report(cfg)?;
    let mut v = serde_json::to_value(&report).map_err(json_err)?;
    if let Value::Object(map) = &mut v {
        map.insert("config".into(), json!(cfg.to_text()));
    }
    Ok(CommandOutput {
        text: pretty(&v),
        code: if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED },
    })
}
