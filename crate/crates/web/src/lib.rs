//! WebAssembly bindings for the browser demo in `www/`. Every export takes plain
//! numbers and returns a JSON string; complex numbers are `[re, im]` pairs.

use lame_spectra::bloch::{band_sweep, default_k_grid, numeric_band_edges, Coefficients, RationalEta};
use lame_spectra::curve::band_edges;
use lame_spectra::lame::LameContext;
use lame_spectra::volterra::{find_locus_seed, integrate_flow_with, FlowOptions, FlowSample};
use lame_spectra::{EllipticParams, ThetaEvaluator, C64};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-12;

fn evaluator(tau_re: f64, tau_im: f64, eta: C64) -> lame_spectra::Result<ThetaEvaluator> {
    ThetaEvaluator::new(EllipticParams::new(C64::new(tau_re, tau_im), eta, TOL)?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Band edges per half-period label for real or complex η.
pub fn edges_json(ell: usize, eta_re: f64, eta_im: f64, tau_re: f64, tau_im: f64) -> Result<String, String> {
    if ell == 0 {
        return Err("band edges require ell >= 1".into());
    }
    let run = || -> lame_spectra::Result<_> {
        let ev = evaluator(tau_re, tau_im, C64::new(eta_re, eta_im))?;
        band_edges(&LameContext::new(ell, ev)?)
    };
    to_json(&run().map_err(|e| e.to_string())?)
}

#[derive(Serialize)]
struct Bands {
    k: Vec<f64>,
    /// Real parts of the Q eigenvalues at each k.
    energies: Vec<Vec<f64>>,
    stable_intervals: Vec<(f64, f64)>,
    max_imag: f64,
    numeric_edges: Vec<C64>,
}

/// Bloch bands of the periodic problem with η = p/q.
pub fn bands_json(ell: usize, p: i64, q: i64, tau_re: f64, tau_im: f64, kpoints: usize) -> Result<String, String> {
    let run = || -> lame_spectra::Result<Bands> {
        let re = RationalEta::new(p, q)?;
        let ev = evaluator(tau_re, tau_im, re.as_complex())?;
        let coeffs = Coefficients::Lame { ell };
        let x0 = C64::new(0.123456, 0.0);
        let sweep = band_sweep(&coeffs, re, x0, &default_k_grid(re, kpoints.max(2)), &ev)?;
        let edges = numeric_band_edges(&coeffs, re, x0, &ev)?;
        Ok(Bands {
            energies: sweep.energies.iter().map(|row| row.iter().map(|e| e.re).collect()).collect(),
            k: sweep.k,
            stable_intervals: sweep.stable_intervals,
            max_imag: sweep.max_imag,
            numeric_edges: edges.confident(),
        })
    };
    to_json(&run().map_err(|e| e.to_string())?)
}

#[derive(Serialize)]
struct Flow {
    trajectory: Vec<FlowSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Pole flow from a seeded on-locus configuration with ℓ(ℓ+1)/2 poles. A run that stops
/// early returns the partial trajectory together with the reason.
pub fn flow_json(
    ell: usize,
    eta_re: f64,
    eta_im: f64,
    tau_re: f64,
    tau_im: f64,
    seed: u64,
    t_end: f64,
    dt: f64,
) -> Result<String, String> {
    let ev = evaluator(tau_re, tau_im, C64::new(eta_re, eta_im)).map_err(|e| e.to_string())?;
    let start = find_locus_seed(ell, &ev, seed, 200).map_err(|e| e.to_string())?;
    let mut trajectory = Vec::new();
    let result = integrate_flow_with(&start, t_end, dt, &FlowOptions::default(), &ev, |s| trajectory.push(s.clone()));
    let error = match result {
        Ok(_) => None,
        Err(e) if trajectory.is_empty() => return Err(e.to_string()),
        Err(e) => Some(e.to_string()),
    };
    to_json(&Flow { trajectory, error })
}

#[wasm_bindgen]
pub fn edges(ell: usize, eta_re: f64, eta_im: f64, tau_re: f64, tau_im: f64) -> Result<String, JsValue> {
    edges_json(ell, eta_re, eta_im, tau_re, tau_im).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bands(ell: usize, p: i32, q: i32, tau_re: f64, tau_im: f64, kpoints: usize) -> Result<String, JsValue> {
    bands_json(ell, p.into(), q.into(), tau_re, tau_im, kpoints).map_err(|e| JsValue::from_str(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn flow(
    ell: usize,
    eta_re: f64,
    eta_im: f64,
    tau_re: f64,
    tau_im: f64,
    seed: u32,
    t_end: f64,
    dt: f64,
) -> Result<String, JsValue> {
    flow_json(ell, eta_re, eta_im, tau_re, tau_im, seed.into(), t_end, dt).map_err(|e| JsValue::from_str(&e))
}
