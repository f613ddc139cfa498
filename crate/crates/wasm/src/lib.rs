//! Browser bindings: simulate-and-discover, coefficient curves and
//! single-regressor invariance tables for a few small models.

use lre_core::discovery::{estimate_change_sets, lre, LreOptions, SkeletonOptions};
use lre_core::graph::GraphJson;
use lre_core::sem::InvarianceCheck;
use lre_core::{LinearSem, VarSet};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const PRESETS: &[&str] = &["pair", "chain", "triangle", "diamond"];

fn preset(name: &str) -> Result<LinearSem, String> {
    let (p, edges): (usize, &[(usize, usize, f64)]) = match name {
        "pair" => (2, &[(0, 1, 1.2)]),
        "chain" => (3, &[(0, 1, 0.9), (1, 2, 1.1)]),
        "triangle" => (3, &[(0, 1, 0.8), (0, 2, 0.7), (1, 2, 1.0)]),
        "diamond" => (4, &[(0, 1, 0.9), (0, 2, 0.8), (1, 2, 0.6), (1, 3, 1.0), (2, 3, 0.7)]),
        _ => return Err(format!("unknown preset '{name}', expected one of {PRESETS:?}")),
    };
    LinearSem::from_edges(p, edges, vec![vec![1.0; p]]).map_err(|e| e.to_string())
}

fn parse_vars(sem: &LinearSem, list: &str) -> Result<VarSet, String> {
    let names = sem.variable_names();
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|n| {
            names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| format!("unknown variable '{n}'"))
        })
        .collect()
}

fn changed_env(sem: &LinearSem, changed: VarSet, factor: f64) -> Result<LinearSem, String> {
    let vars = sem
        .noise_vars(0)
        .iter()
        .enumerate()
        .map(|(k, v)| if changed.contains(k) { v * factor } else { *v })
        .collect();
    sem.with_environment(vars).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Discovery {
    names: Vec<String>,
    truth: GraphJson,
    essential: GraphJson,
    learned: GraphJson,
    changed_estimate: Vec<String>,
    decisions: usize,
}

/// Samples two environments (the second scales the noise variance of
/// `changed` by 3) and runs discovery on them.
pub fn discover_json(preset_name: &str, changed: &str, n: usize, seed: u64, alpha: f64) -> Result<String, String> {
    let base = preset(preset_name)?;
    let changed = parse_vars(&base, changed)?;
    let sem = changed_env(&base, changed, 3.0)?;
    let envs = [
        sem.sample(0, n, seed).map_err(|e| e.to_string())?,
        sem.sample(1, n, seed.wrapping_add(1)).map_err(|e| e.to_string())?,
    ];
    let opts = LreOptions {
        alpha,
        skeleton: SkeletonOptions { alpha, max_cond: None },
        ..Default::default()
    };
    let out = lre(&envs, &opts).map_err(|e| e.to_string())?;
    let cs = estimate_change_sets(&envs, &out.essential, alpha, None).map_err(|e| e.to_string())?;
    let names = sem.variable_names();
    let result = Discovery {
        truth: sem
            .dag()
            .as_mixed()
            .clone()
            .with_names(Some(names.clone()))
            .to_json_value(),
        essential: out.essential.to_json_value(),
        learned: out.graph.to_json_value(),
        changed_estimate: cs[0].vars.iter().map(|v| names[v].clone()).collect(),
        decisions: out.decisions.len(),
        names,
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    variances: Vec<f64>,
    /// One series per regressor, in regressor order.
    coefficients: Vec<Vec<f64>>,
    regressors: Vec<String>,
}

/// Population coefficients of `target` on `regressors` while the noise
/// variance of `varied` sweeps `[lo, hi]`.
pub fn curve_json(
    preset_name: &str,
    target: &str,
    regressors: &str,
    varied: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<String, String> {
    let sem = preset(preset_name)?;
    let y = parse_vars(&sem, target)?;
    let s = parse_vars(&sem, regressors)?;
    let v = parse_vars(&sem, varied)?;
    if y.len() != 1 || v.len() != 1 {
        return Err("target and varied must name one variable each".into());
    }
    if s.is_empty() || s.contains(y.to_vec()[0]) {
        return Err("regressors must be nonempty and exclude the target".into());
    }
    if !(lo > 0.0 && hi > lo && steps >= 2) {
        return Err("need 0 < lo < hi and at least two steps".into());
    }
    let (y, v) = (y.to_vec()[0], v.to_vec()[0]);
    let names = sem.variable_names();
    let mut out = Curve {
        variances: Vec::with_capacity(steps),
        coefficients: vec![Vec::with_capacity(steps); s.len()],
        regressors: s.iter().map(|k| names[k].clone()).collect(),
    };
    for k in 0..steps {
        let var = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
        let mut vars = sem.noise_vars(0).to_vec();
        vars[v] = var;
        let m = LinearSem::new(sem.coefficients().clone(), vec![vars]).map_err(|e| e.to_string())?;
        let beta = m.population_regression(0, s, y).map_err(|e| e.to_string())?;
        out.variances.push(var);
        for (series, b) in out.coefficients.iter_mut().zip(beta.iter()) {
            series.push(*b);
        }
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Table {
    names: Vec<String>,
    /// `invariant[y][x]`: whether regressing `y` on `x` alone is invariant;
    /// `null` on the diagonal.
    invariant: Vec<Vec<Option<bool>>>,
}

/// Single-regressor invariance of every ordered pair when the noises in
/// `changed` move.
pub fn table_json(preset_name: &str, changed: &str) -> Result<String, String> {
    let sem = preset(preset_name)?;
    let changed = parse_vars(&sem, changed)?;
    let p = sem.p();
    let pairs: Vec<(usize, VarSet)> = (0..p)
        .flat_map(|y| (0..p).filter(move |&x| x != y).map(move |x| (y, VarSet::singleton(x))))
        .collect();
    let check = InvarianceCheck::default();
    let mut invariant = vec![vec![None; p]; p];
    for &(y, s) in &pairs {
        let inv = sem
            .is_invariant_under(0, changed, s, y, &check)
            .map_err(|e| e.to_string())?;
        invariant[y][s.to_vec()[0]] = Some(inv);
    }
    serde_json::to_string(&Table {
        names: sem.variable_names(),
        invariant,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn presets() -> String {
    PRESETS.join(",")
}

#[wasm_bindgen]
pub fn simulate_and_discover(preset: &str, changed: &str, n: usize, seed: u64, alpha: f64) -> Result<String, JsError> {
    discover_json(preset, changed, n, seed, alpha).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coefficient_curve(
    preset: &str,
    target: &str,
    regressors: &str,
    varied: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<String, JsError> {
    curve_json(preset, target, regressors, varied, lo, hi, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn invariance_table(preset: &str, changed: &str) -> Result<String, JsError> {
    table_json(preset, changed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn chain_is_recovered() {
        let v: Value = serde_json::from_str(&discover_json("chain", "x1", 20_000, 3, 0.01).unwrap()).unwrap();
        assert_eq!(v["learned"]["directed"], serde_json::json!([[0, 1], [1, 2]]));
        assert_eq!(v["changed_estimate"], serde_json::json!(["x1"]));
    }

    #[test]
    fn effect_on_cause_stays_flat() {
        let v: Value = serde_json::from_str(&curve_json("pair", "x2", "x1", "x1", 0.5, 4.0, 8).unwrap()).unwrap();
        let series: Vec<f64> = serde_json::from_value(v["coefficients"][0].clone()).unwrap();
        assert_eq!(series.len(), 8);
        assert!(series.iter().all(|b| (b - 1.2).abs() < 1e-12));

        let v: Value = serde_json::from_str(&curve_json("pair", "x1", "x2", "x1", 0.5, 4.0, 8).unwrap()).unwrap();
        let series: Vec<f64> = serde_json::from_value(v["coefficients"][0].clone()).unwrap();
        assert!(series.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn table_of_chain_with_root_change() {
        let v: Value = serde_json::from_str(&table_json("chain", "x1").unwrap()).unwrap();
        let inv = &v["invariant"];
        assert_eq!(inv[0][0], Value::Null);
        assert_eq!(inv[1][0], Value::Bool(true));
        assert_eq!(inv[0][1], Value::Bool(false));
        assert_eq!(inv[2][1], Value::Bool(true));
    }

    #[test]
    fn bad_requests_are_errors() {
        assert!(discover_json("nope", "", 100, 0, 0.01).is_err());
        assert!(table_json("pair", "x9").is_err());
        assert!(curve_json("pair", "x1", "x1", "x1", 0.5, 4.0, 8).is_err());
        assert!(curve_json("pair", "x2", "x1", "x1", 4.0, 0.5, 8).is_err());
    }
}
