//! Browser bindings: three operations returning JSON strings for `www/index.html`.
//!
//! The plain functions are what the bindings call; they also run natively in tests.

use mixbif_core::newton;
use mixbif_core::parser::parse_str;
use mixbif_core::probe::{self, ProbeOptions, RadiusSchedule};
use mixbif_core::report::{self, CommandError};
use mixbif_core::{Complex64, Error, MixedPolynomial};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn fail(e: impl Into<CommandError>) -> String {
    e.into().to_json_line()
}

fn parse(expr: &str) -> Result<MixedPolynomial, String> {
    let f = parse_str(expr).map_err(fail)?;
    if f.is_zero() {
        return Err(fail(Error::ZeroPolynomial));
    }
    if f.is_constant() {
        return Err(fail(Error::ConstantPolynomial));
    }
    Ok(f)
}

fn points(v: &[Complex64]) -> Value {
    v.iter().map(|c| json!([c.re, c.im])).collect()
}

fn probe_options(phases: usize) -> ProbeOptions {
    ProbeOptions {
        phases: phases.clamp(4, 512),
        critical_starts: 128,
        schedule: RadiusSchedule {
            radii: vec![1e1, 1e2, 1e3, 1e4],
            starts: 128,
        },
        ..ProbeOptions::default()
    }
}

/// Formatted input, support, `Γ⁺`, bad faces, flags and (for `n = 2`) the boundary of
/// the Newton polygon in counter-clockwise order.
pub fn geometry_json(expr: &str) -> Result<String, String> {
    let f = parse(expr)?;
    let g = report::geometry(&f).map_err(fail)?;
    let flags = report::flags(&f).map_err(fail)?;
    let polygon = if f.n() == 2 {
        let gamma0 = newton::newton_polyhedron(&f).map_err(fail)?;
        let mut v: Vec<(f64, f64)> = gamma0
            .vertices()
            .iter()
            .map(|p| (f64::from(p[0]), f64::from(p[1])))
            .collect();
        let (cx, cy) = v.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (cx, cy) = (cx / v.len() as f64, cy / v.len() as f64);
        v.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).total_cmp(&(b.1 - cy).atan2(b.0 - cx)));
        v.into_iter().map(|(x, y)| json!([x, y])).collect()
    } else {
        Value::Null
    };
    Ok(json!({
        "expression": mixbif_core::format(&f),
        "n": f.n(),
        "support": g.support,
        "gamma_plus": g.gamma_plus,
        "bad_faces": g.bad_faces,
        "flags": flags,
        "polygon": polygon,
    })
    .to_string())
}

/// `f(Sing f)` sampled at `phases` phases.
pub fn critical_values_json(expr: &str, phases: usize) -> Result<String, String> {
    let f = parse(expr)?;
    let cv = probe::critical_values(&f, &probe_options(phases)).map_err(fail)?;
    let bound = probe::bad_face_critical_values(&f, &probe_options(phases)).map_err(fail)?;
    let b: Vec<Complex64> = bound.union.iter().map(|c| c.center).collect();
    Ok(json!({
        "critical": points(&cv.values()),
        "bound": points(&b),
        "max_modulus": cv.max_modulus,
    })
    .to_string())
}

/// Finite-limit `S(f)` clusters over radii 10…10⁴.
pub fn probe_s_json(expr: &str, phases: usize) -> Result<String, String> {
    let f = parse(expr)?;
    let opts = probe_options(phases);
    let s = probe::estimate_s(&f, &opts).map_err(fail)?;
    let fl: Vec<Complex64> = s.finite_limits().map(|c| c.center).collect();
    let other = s.clusters.len() - fl.len();
    Ok(json!({
        "s": points(&fl),
        "other_chains": other,
        "radii": opts.schedule.radii,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn geometry(expr: &str) -> Result<String, JsValue> {
    geometry_json(expr).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = criticalValues)]
pub fn critical_values(expr: &str, phases: usize) -> Result<String, JsValue> {
    critical_values_json(expr, phases).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = probeS)]
pub fn probe_s(expr: &str, phases: usize) -> Result<String, JsValue> {
    probe_s_json(expr, phases).map_err(|e| JsValue::from_str(&e))
}
