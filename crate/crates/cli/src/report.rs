//! JSON and CSV rendering. Complex numbers appear in JSON as `[re, im]`.

use lame_spectra::C64;
use serde::Serialize;

/// Version of the JSON layout; bumped on incompatible changes.
pub const SCHEMA: u32 = 1;

/// Parameters echoed in every report so that results carry their provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub ell: usize,
    pub eta: String,
    pub eta_value: C64,
    pub tau: String,
    pub tau_value: C64,
    pub tol: f64,
    pub series_cutoff: usize,
    pub seed: u64,
}

/// Top-level document: schema, command and parameters followed by the command's body.
#[derive(Debug, Serialize)]
pub struct Document<'a, B: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub params: Option<&'a Params>,
    #[serde(flatten)]
    pub body: B,
}

pub fn json<B: Serialize>(command: &str, params: Option<&Params>, body: B) -> String {
    let doc = Document { schema: SCHEMA, command, params, body };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}
