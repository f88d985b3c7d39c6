//! Browser bindings. Every function takes and returns strings so the page
//! needs no glue beyond what wasm-bindgen generates.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use wirecalc::commands::load_text;
use wirecalc::execute_line;
use wirecalc_core::dense::eigenvalues;
use wirecalc_core::linear::{classify_stability, DEFAULT_STABILITY_TOL};
use wirecalc_core::plan::Plan;

/// Run one command line against the workspace text.
/// Returns `{"code":..,"stdout":..,"stderr":..}`.
#[wasm_bindgen]
pub fn run(workspace: &str, command: &str) -> String {
    let out = execute_line(command, Some((workspace, "workspace")));
    json!({ "code": out.code, "stdout": out.stdout, "stderr": out.stderr }).to_string()
}

/// Steady states of `name` under both composition plans, side by side.
/// With `enumerate` the composite system is built and searched directly.
#[wasm_bindgen]
pub fn steady_states(workspace: &str, name: &str, sets: bool, enumerate: bool) -> String {
    let cmd = match (sets, enumerate) {
        (false, false) => "stst",
        (true, false) => "stst-sets",
        (false, true) => "stst --enumerate",
        (true, true) => "stst-sets --enumerate",
    };
    let plans: Vec<Value> = ["tensor-then-wire", "serial-chain"]
        .iter()
        .map(|p| {
            let out = execute_line(&format!("{cmd} {name} --plan {p}"), Some((workspace, "workspace")));
            json!({ "plan": p, "code": out.code, "stdout": out.stdout, "stderr": out.stderr })
        })
        .collect();
    Value::Array(plans).to_string()
}

fn sweep_point(template: &str, name: &str, k: f64) -> Result<Value, String> {
    let text = template.replace("{k}", &format!("{k:?}"));
    let (_, env) = load_text(&text, "workspace")?;
    let l = env.linear(name, Plan::TensorThenWire)?;
    let eig = eigenvalues(&l.m_mid).map_err(|e| e.to_string())?;
    let verdict = classify_stability(&l, DEFAULT_STABILITY_TOL).map_err(|e| e.to_string())?;
    let eig: Vec<[f64; 2]> = eig.iter().map(|(re, im)| [*re, *im]).collect();
    Ok(json!({ "k": k, "verdict": verdict.to_string(), "eigenvalues": eig }))
}

/// Substitute `n` evenly spaced values of `k` for `{k}` in the template and
/// report the eigenvalues of the linear system `name` at each.
/// Returns a JSON array, or `{"error":..}` at the first failing value.
#[wasm_bindgen]
pub fn sweep(template: &str, name: &str, lo: f64, hi: f64, n: usize) -> String {
    let n = n.max(2);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        match sweep_point(template, name, k) {
            Ok(v) => pts.push(v),
            Err(e) => return json!({ "error": format!("k = {k}: {}", e.trim_end()) }).to_string(),
        }
    }
    Value::Array(pts).to_string()
}
