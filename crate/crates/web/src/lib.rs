//! WebAssembly bindings for the browser demo. Every export returns a JSON string;
//! the plain functions behind them are usable (and tested) natively.

use qndsim_core::cqed::{reflection_coefficients, CqedParams};
use qndsim_core::estimators::sweep_estimates;
use qndsim_core::sorter::run_sorter;
use qndsim_core::{Error, ExperimentConfig, Quantity, Result, SorterConfig, SorterInput};
use serde_json::{json, Map, Value};
use wasm_bindgen::prelude::*;

/// Mean photon numbers spaced logarithmically between `lo` and `hi`.
fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(Error::Config("need 0 < mu_min < mu_max and at least two points".into()));
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points).map(|i| lo * (step * i as f64).exp()).collect())
}

/// All nine cascade probabilities against μ for the default experiment with the
/// given channel transmission and per-node dark counts.
pub fn cascade_curves(transmission: f64, dark1: f64, dark2: f64, mu_min: f64, mu_max: f64, points: usize) -> Result<Value> {
    let mut cfg = ExperimentConfig::default();
    cfg.channel.transmission = transmission;
    cfg.node1.imperfections.dark_count = dark1;
    cfg.node2.imperfections.dark_count = dark2;
    cfg.mean_photon_sweep = log_grid(mu_min, mu_max, points)?;
    cfg.validate()?;
    let table = sweep_estimates(&cfg)?;

    let mut out = Map::new();
    out.insert("mu".into(), json!(cfg.mean_photon_sweep));
    for q in Quantity::ALL {
        out.insert(q.column().into(), json!(table.column(q)));
    }
    Ok(Value::Object(out))
}

/// Herald probabilities and fidelities of a k-node sorter fed a truncated coherent state.
pub fn sorter_heralds(k: usize, mean: f64, max_photons: usize, realistic: bool, transmission: f64) -> Result<Value> {
    let cfg = SorterConfig {
        k,
        input: SorterInput::TruncatedCoherent { mean, max_photons },
        realistic,
        transmission,
        ..SorterConfig::default()
    };
    let heralds: Vec<Value> = run_sorter(&cfg)?
        .into_iter()
        .map(|r| json!({ "label": r.label, "probability": r.probability, "fidelity": r.fidelity }))
        .collect();
    Ok(json!({ "k": k, "heralds": heralds }))
}

/// Reflection amplitude of the cavity, coupled and uncoupled, against cavity detuning
/// (atom kept on the cavity resonance).
pub fn reflection_spectrum(g: f64, kappa: f64, gamma: f64, span: f64, points: usize) -> Result<Value> {
    if !(span > 0.0 && span.is_finite()) || points < 2 {
        return Err(Error::Config("need a positive span and at least two points".into()));
    }
    let base = CqedParams::resonant(g, kappa, gamma);
    base.validate()?;
    let mut detuning = Vec::with_capacity(points);
    let mut columns: [Vec<f64>; 4] = Default::default();
    for i in 0..points {
        let d = -span + 2.0 * span * i as f64 / (points - 1) as f64;
        let p = CqedParams {
            delta_c: d,
            delta_a: d,
            ..base
        };
        detuning.push(d);
        for (j, coupled) in [true, false].into_iter().enumerate() {
            let r = reflection_coefficients(&p, coupled);
            columns[2 * j].push(r.norm_sqr());
            columns[2 * j + 1].push(r.arg());
        }
    }
    let [rc2, rc_phase, ru2, ru_phase] = columns;
    Ok(json!({
        "detuning": detuning,
        "coupled_power": rc2,
        "coupled_phase": rc_phase,
        "uncoupled_power": ru2,
        "uncoupled_phase": ru_phase,
        "cooperativity": base.cooperativity(),
    }))
}

fn export(v: Result<Value>) -> std::result::Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = cascadeCurves)]
pub fn cascade_curves_js(transmission: f64, dark1: f64, dark2: f64, mu_min: f64, mu_max: f64, points: usize) -> std::result::Result<String, JsValue> {
    export(cascade_curves(transmission, dark1, dark2, mu_min, mu_max, points))
}

#[wasm_bindgen(js_name = sorterHeralds)]
pub fn sorter_heralds_js(k: usize, mean: f64, max_photons: usize, realistic: bool, transmission: f64) -> std::result::Result<String, JsValue> {
    export(sorter_heralds(k, mean, max_photons, realistic, transmission))
}

#[wasm_bindgen(js_name = reflectionSpectrum)]
pub fn reflection_spectrum_js(g: f64, kappa: f64, gamma: f64, span: f64, points: usize) -> std::result::Result<String, JsValue> {
    export(reflection_spectrum(g, kappa, gamma, span, points))
}
