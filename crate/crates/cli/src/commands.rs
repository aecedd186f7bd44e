//! Subcommand implementations. Each returns the rendered output, an exit code and any
//! warnings; failures are rendered as structured error documents.

use lame_spectra::bloch::{
    band_sweep, default_k_grid, hausdorff, numeric_band_edges, BandSweep, Coefficients, EdgeCandidate, RationalEta,
};
use lame_spectra::curve::{
    a_polys_recurrence, band_edges, bloch_relation_scaled, closed_form_ell1, closed_form_ell2, curve_coeffs,
    curve_equations, edge_polynomials, fiber_points, omega, solve_curve_point, BandEdgeSet, Fix, NewtonOptions,
};
use lame_spectra::lame::{residual_relative, w_at, CurvePoint, LameContext};
use lame_spectra::numbers::Brackets;
use lame_spectra::suites::{rel_err, run_suite, SuiteReport, SUITES};
use lame_spectra::volterra::{
    degenerate_config, find_locus_seed, integrate_flow_with, FlowOptions, FlowSample, PoleConfig,
};
use lame_spectra::{EllipticParams, Error, ThetaEvaluator, C64};
use serde::Serialize;

use crate::parse::{format_complex, format_eta, parse_complex, parse_complex_list, parse_eta, parse_tau, Eta};
use crate::report::{csv, json, json_line, num, Params};
use crate::{Command, Common, Format};

/// Why a command could not produce its normal report.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Clap(clap::Error),
    #[error("{0}")]
    Core(#[from] Error),
}

impl Failure {
    pub fn message(&self) -> String {
        self.to_string()
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Clap(_) => 2,
            Failure::Core(e) => core_exit_code(e),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) | Failure::Clap(_) => "usage",
            Failure::Core(e) => core_kind(e),
        }
    }
}

fn core_exit_code(e: &Error) -> u8 {
    if e.is_margin_violation() {
        return 4;
    }
    match e {
        Error::InvalidParameter(_)
        | Error::NonPositiveImTau { .. }
        | Error::PoleProximity { .. }
        | Error::TorsionEta { .. }
        | Error::LatticeCollision { .. }
        | Error::OffLocus { .. } => 2,
        _ => 1,
    }
}

fn core_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::NonPositiveImTau { .. } => "non_positive_im_tau",
        Error::PoleProximity { .. } => "pole_proximity",
        Error::TorsionEta { .. } => "torsion_eta",
        Error::SeriesMismatch { .. } => "series_mismatch",
        Error::NotOnCurve { .. } => "not_on_curve",
        Error::InconsistentRatios { .. } => "inconsistent_ratios",
        Error::NoConvergence { .. } => "no_convergence",
        Error::SingularJacobian { .. } => "singular_jacobian",
        Error::LatticeCollision { .. } => "lattice_collision",
        Error::CoincidentPoles { .. } => "coincident_poles",
        Error::LocusBoundary { .. } => "locus_boundary",
        Error::OffLocus { .. } => "off_locus",
        Error::LocusDrift { .. } => "locus_drift",
        Error::MarginViolation { .. } => "margin_violation",
        Error::NoLocusSeed { .. } => "no_locus_seed",
        Error::Eigen(_) => "eigen",
    }
}

/// Rendered result of one run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub text: Option<String>,
    pub exit: u8,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorInfo<'a>,
}

#[derive(Serialize)]
struct ErrorInfo<'a> {
    kind: &'a str,
    message: String,
    exit_code: u8,
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Edges { .. } => "edges",
        Command::Spectrum { .. } => "spectrum",
        Command::Verify { .. } => "verify",
        Command::Flow { .. } => "flow",
        Command::CurvePoint { .. } => "curve-point",
        Command::Coeffs { .. } => "coeffs",
    }
}

pub fn run(cmd: &Command) -> Outcome {
    let name = command_name(cmd);
    let common = cmd.common();
    let setup = Setup::new(common);
    let result = setup.as_ref().map_err(|e| Failure::Usage(e.message())).and_then(|s| match cmd {
        Command::Edges { .. } => edges(s),
        Command::Spectrum { kpoints, x0, .. } => spectrum(s, *kpoints, x0),
        Command::Verify { suite, .. } => verify(s, suite),
        Command::Flow { poles, locus_seed, degenerate, t_end, dt, tol_locus, isospectral, x0, .. } => flow(
            s,
            &FlowArgs {
                poles: poles.as_deref(),
                locus_seed: *locus_seed,
                degenerate: *degenerate,
                t_end: *t_end,
                dt: *dt,
                tol_locus: *tol_locus,
                isospectral: *isospectral,
                x0,
            },
        ),
        Command::CurvePoint { zeta, energy, seed_zeta, seed_k, max_spread, .. } => {
            curve_point(s, zeta.as_deref(), energy.as_deref(), seed_zeta.as_deref(), seed_k.as_deref(), *max_spread)
        }
        Command::Coeffs { .. } => coeffs(s),
    });
    match result {
        Ok(out) => out,
        Err(f) => {
            let exit = f.exit_code();
            let params = setup.as_ref().ok().map(|s| &s.params);
            let text = (common.format != Format::Csv).then(|| {
                json(name, params, ErrorBody { error: ErrorInfo { kind: f.kind(), message: f.message(), exit_code: exit } })
            });
            Outcome { text, exit, warnings: Vec::new(), error: Some(f.message()) }
        }
    }
}

/// Parsed parameters shared by all commands.
struct Setup {
    common: Common,
    eta: Eta,
    ev: ThetaEvaluator,
    params: Params,
}

impl Setup {
    fn new(common: &Common) -> Result<Self, Failure> {
        let eta = parse_eta(&common.eta).map_err(Failure::Usage)?;
        let tau = parse_tau(&common.tau).map_err(Failure::Usage)?;
        if !(common.tol > 0.0) {
            return Err(Failure::Usage(format!("tol must be positive, got {}", common.tol)));
        }
        let ev = ThetaEvaluator::new(EllipticParams::new(tau, eta.value(), common.tol)?)?;
        let params = Params {
            ell: common.ell,
            eta: format_eta(&eta),
            eta_value: eta.value(),
            tau: format_complex(tau),
            tau_value: tau,
            tol: common.tol,
            series_cutoff: ev.series_cutoff(),
            seed: common.seed,
        };
        Ok(Self { common: common.clone(), eta, ev, params })
    }

    fn context(&self) -> Result<LameContext, Failure> {
        Ok(LameContext::new(self.common.ell, self.ev.clone())?)
    }

    fn curve_context(&self, what: &str) -> Result<LameContext, Failure> {
        if self.common.ell == 0 {
            return Err(Failure::Usage(format!("{what} requires ell >= 1")));
        }
        self.context()
    }

    fn rational(&self, what: &str) -> Result<RationalEta, Failure> {
        self.eta.rational().ok_or_else(|| Failure::Usage(format!("{what} requires a rational eta P/Q")))
    }

    fn done(&self, name: &str, body: impl Serialize) -> Outcome {
        Outcome { text: Some(json(name, Some(&self.params), body)), ..Outcome::default() }
    }
}

// ---------------------------------------------------------------- edges

#[derive(Serialize)]
struct LabelOut {
    label: usize,
    half_period: C64,
    expected: usize,
    count: usize,
    second_polynomial_vanishes: bool,
    edges: Vec<RootOut>,
}

#[derive(Serialize)]
struct RootOut {
    value: C64,
    multiplicity: usize,
}

#[derive(Serialize)]
struct EdgesBody {
    labels: Vec<LabelOut>,
    counts: [usize; 4],
    expected_counts: [usize; 4],
    ambiguous: bool,
    edges: Vec<C64>,
    edges_with_reflection: Vec<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<ClosedForm>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ClosedForm {
    Ell1 {
        /// E_a = 2θ_b(η)θ_c(η)/(θ_b(0)θ_c(0)) for cyclic (a, b, c) of labels 2, 3, 4.
        values: Vec<(usize, C64)>,
        max_rel_err: f64,
    },
    Ell2 {
        single_values: Vec<(usize, C64)>,
        single_max_rel_err: f64,
        quadratic_roots: [C64; 2],
        first_label_vs_quadratic_up_to_sign: f64,
        first_label_vs_quadratic_signed: f64,
        first_label_vs_negated_quadratic: f64,
        note: &'static str,
    },
}

const ELL2_NOTE: &str = "first-label edges are reported as computed; they equal the negated roots of \
[2]E^2+[2]^3E+2[4]=0, i.e. 1/2([2]^2 +- sqrt([2]^4-8[4]/[2])); the full edge set is invariant under E -> -E";

fn nearest_rel(target: C64, values: &[C64]) -> f64 {
    values.iter().map(|v| rel_err(target, *v)).fold(f64::INFINITY, f64::min)
}

fn label_values(set: &BandEdgeSet, a: usize) -> Vec<C64> {
    set.label(a).iter().map(|r| r.value).collect()
}

fn closed_form(set: &BandEdgeSet, ev: &ThetaEvaluator) -> Result<Option<ClosedForm>, Error> {
    match set.ell {
        1 => {
            let values = closed_form_ell1(ev)?.to_vec();
            let max_rel_err =
                values.iter().map(|(a, e)| nearest_rel(*e, &label_values(set, *a))).fold(0.0, f64::max);
            Ok(Some(ClosedForm::Ell1 { values, max_rel_err }))
        }
        2 => {
            let cf = closed_form_ell2(ev)?;
            let single_max_rel_err =
                cf.single.iter().map(|(a, e)| nearest_rel(*e, &label_values(set, *a))).fold(0.0, f64::max);
            let first = label_values(set, 1);
            let both: Vec<C64> = first.iter().flat_map(|v| [*v, -*v]).collect();
            let worst = |targets: &[C64], vals: &[C64]| targets.iter().map(|t| nearest_rel(*t, vals)).fold(0.0, f64::max);
            let negated = cf.quadratic_roots.map(|r| -r);
            Ok(Some(ClosedForm::Ell2 {
                single_values: cf.single.to_vec(),
                single_max_rel_err,
                quadratic_roots: cf.quadratic_roots,
                first_label_vs_quadratic_up_to_sign: worst(&cf.quadratic_roots, &both),
                first_label_vs_quadratic_signed: worst(&cf.quadratic_roots, &first),
                first_label_vs_negated_quadratic: worst(&negated, &first),
                note: ELL2_NOTE,
            }))
        }
        _ => Ok(None),
    }
}

fn edges(s: &Setup) -> Result<Outcome, Failure> {
    let ctx = s.curve_context("edges")?;
    let set = band_edges(&ctx)?;
    let ambiguous = set.ambiguous();
    let mut out = if s.common.format == Format::Csv {
        let rows = set
            .labels
            .iter()
            .flat_map(|l| {
                l.roots.iter().map(move |r| {
                    vec![l.label.to_string(), num(r.value.re), num(r.value.im), r.multiplicity.to_string()]
                })
            })
            .collect::<Vec<_>>();
        let header = ["label", "re", "im", "multiplicity"].map(String::from);
        Outcome { text: Some(csv(&header, &rows)), ..Outcome::default() }
    } else {
        let labels = set
            .labels
            .iter()
            .map(|l| LabelOut {
                label: l.label,
                half_period: omega(l.label, ctx.tau()),
                expected: l.expected,
                count: l.roots.iter().map(|r| r.multiplicity).sum(),
                second_polynomial_vanishes: l.second_vanishes,
                edges: l.roots.iter().map(|r| RootOut { value: r.value, multiplicity: r.multiplicity }).collect(),
            })
            .collect();
        let body = EdgesBody {
            labels,
            counts: set.counts(),
            expected_counts: set.expected_counts(),
            ambiguous,
            edges: set.edges(),
            edges_with_reflection: set.union_with_reflection.clone(),
            closed_form: closed_form(&set, ctx.ev())?,
        };
        s.done("edges", body)
    };
    if ambiguous {
        out.exit = 3;
        out.error = Some(format!(
            "root clusters are ambiguous: counts {:?}, expected {:?}",
            set.counts(),
            set.expected_counts()
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------- spectrum

#[derive(Serialize)]
struct SpectrumBody {
    p: i64,
    q: i64,
    x0: C64,
    kpoints: usize,
    warnings: Vec<String>,
    stable_intervals: Vec<(f64, f64)>,
    band_count: usize,
    reflection_error: f64,
    max_imag: f64,
    mislabeled: bool,
    numeric_edges: Vec<EdgeCandidate>,
    confident_count: usize,
    ambiguous_count: usize,
    analytic_edges: Option<Vec<C64>>,
    max_deviation: Option<f64>,
}

fn band_csv(sweep: &BandSweep) -> String {
    let q = sweep.energies.first().map_or(0, Vec::len);
    let complex = sweep.max_imag > 1e-9;
    let mut header = vec!["k".to_string()];
    for j in 1..=q {
        if complex {
            header.push(format!("re_E_{j}"));
            header.push(format!("im_E_{j}"));
        } else {
            header.push(format!("E_{j}"));
        }
    }
    let rows: Vec<Vec<String>> = sweep
        .k
        .iter()
        .zip(&sweep.energies)
        .map(|(k, es)| {
            let mut row = vec![num(*k)];
            for e in es {
                row.push(num(e.re));
                if complex {
                    row.push(num(e.im));
                }
            }
            row
        })
        .collect();
    csv(&header, &rows)
}

fn spectrum(s: &Setup, kpoints: usize, x0: &str) -> Result<Outcome, Failure> {
    let re = s.rational("spectrum")?;
    let ell = s.common.ell;
    let x0 = parse_complex(x0).map_err(Failure::Usage)?;
    let coeffs = Coefficients::Lame { ell };
    let mut warnings = Vec::new();
    if (re.q as usize) < 2 * ell + 2 {
        warnings.push(format!("Q = {} < 2l+2 = {}: gaps cannot all be resolved", re.q, 2 * ell + 2));
    }
    let sweep = band_sweep(&coeffs, re, x0, &default_k_grid(re, kpoints), &s.ev)?;
    if sweep.mislabeled {
        warnings.push("eigenvalue trajectories jump between grid points; increase --kpoints".into());
    }
    if s.common.format == Format::Csv {
        return Ok(Outcome { text: Some(band_csv(&sweep)), warnings, ..Outcome::default() });
    }
    let numeric = numeric_band_edges(&coeffs, re, x0, &s.ev)?;
    let analytic = if ell == 0 {
        None
    } else {
        match LameContext::new(ell, s.ev.clone()).and_then(|ctx| band_edges(&ctx)) {
            Ok(set) => Some(set.union_with_reflection),
            Err(e @ Error::TorsionEta { .. }) => {
                warnings.push(format!("analytic edges unavailable: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    };
    let max_deviation = analytic.as_ref().map(|a| hausdorff(&numeric.confident(), a));
    let body = SpectrumBody {
        p: re.p,
        q: re.q,
        x0: sweep.x0,
        kpoints: sweep.k.len(),
        warnings: warnings.clone(),
        band_count: sweep.stable_intervals.len(),
        stable_intervals: sweep.stable_intervals.clone(),
        reflection_error: sweep.reflection_error(),
        max_imag: sweep.max_imag,
        mislabeled: sweep.mislabeled,
        confident_count: numeric.confident().len(),
        ambiguous_count: numeric.ambiguous_count(),
        numeric_edges: numeric.candidates,
        analytic_edges: analytic,
        max_deviation,
    };
    let mut out = s.done("spectrum", body);
    out.warnings = warnings;
    Ok(out)
}

// ---------------------------------------------------------------- verify

#[derive(Serialize)]
struct VerifyBody {
    suite: String,
    pass: bool,
    reports: Vec<SuiteReport>,
}

fn verify(s: &Setup, suite: &str) -> Result<Outcome, Failure> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Failure::Usage(format!("unknown suite '{suite}'; expected one of {} or all", SUITES.join(", "))));
    };
    let params = s.ev.params();
    let reports = names
        .iter()
        .map(|n| run_suite(n, s.common.ell, params, s.common.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let mut out = if s.common.format == Format::Csv {
        let rows = reports
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(|c| {
                    vec![r.suite.clone(), c.name.clone(), num(c.max_rel_err), num(c.threshold), c.pass.to_string()]
                })
            })
            .collect::<Vec<_>>();
        let header = ["suite", "check", "max_rel_err", "threshold", "pass"].map(String::from);
        Outcome { text: Some(csv(&header, &rows)), ..Outcome::default() }
    } else {
        s.done("verify", VerifyBody { suite: suite.to_string(), pass, reports })
    };
    if !pass {
        out.exit = 1;
        out.error = Some("verification failed".into());
    }
    Ok(out)
}

// ---------------------------------------------------------------- flow

struct FlowArgs<'a> {
    poles: Option<&'a str>,
    locus_seed: bool,
    degenerate: bool,
    t_end: f64,
    dt: f64,
    tol_locus: f64,
    isospectral: bool,
    x0: &'a str,
}

#[derive(Serialize)]
struct Isospectrality {
    edges_start: Vec<C64>,
    edges_end: Vec<C64>,
    max_deviation: f64,
}

#[derive(Serialize)]
struct FlowBody {
    source: &'static str,
    initial: Vec<C64>,
    t_end: f64,
    dt: f64,
    tol_locus: f64,
    completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<FlowError>,
    max_gap: f64,
    min_margin: f64,
    trajectory: Vec<FlowSample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    isospectrality: Option<Isospectrality>,
}

#[derive(Serialize)]
struct FlowError {
    kind: &'static str,
    message: String,
    exit_code: u8,
}

#[derive(Serialize)]
struct FlowLine<'a> {
    t: f64,
    x: &'a [C64],
    locus_gap: f64,
}

fn flow(s: &Setup, a: &FlowArgs) -> Result<Outcome, Failure> {
    let ell = s.common.ell;
    let (source, cfg0) = match (a.poles, a.locus_seed, a.degenerate) {
        (Some(p), _, _) => ("poles", PoleConfig::new(parse_complex_list(p).map_err(Failure::Usage)?)),
        (None, true, _) => ("locus-seed", find_locus_seed(ell, &s.ev, s.common.seed, 200)?),
        (None, false, true) => ("degenerate", degenerate_config(ell, s.ev.eta())),
        (None, false, false) => return Err(Failure::Usage("flow needs --poles, --locus-seed or --degenerate".into())),
    };
    if cfg0.xs.is_empty() {
        return Err(Failure::Usage("flow needs at least one pole".into()));
    }
    let rational = if a.isospectral { Some(s.rational("the isospectrality check")?) } else { None };
    let x0 = parse_complex(a.x0).map_err(Failure::Usage)?;
    let opts = FlowOptions { tol_locus: a.tol_locus, ..FlowOptions::default() };
    let mut samples: Vec<FlowSample> = Vec::new();
    let result = integrate_flow_with(&cfg0, a.t_end, a.dt, &opts, &s.ev, |smp| samples.push(smp.clone()));
    let failure = match result {
        Ok(_) => None,
        // a configuration rejected before the first step produced no trajectory at all
        Err(e) if samples.is_empty() => return Err(e.into()),
        Err(e) => Some(Failure::Core(e)),
    };
    let isospectrality = match (rational, samples.last(), &failure) {
        (Some(re), Some(last), None) => {
            let start = numeric_band_edges(&Coefficients::Poles { xs: cfg0.xs.clone() }, re, x0, &s.ev)?.confident();
            let end = numeric_band_edges(&Coefficients::Poles { xs: last.xs.clone() }, re, x0, &s.ev)?.confident();
            Some(Isospectrality { max_deviation: hausdorff(&start, &end), edges_start: start, edges_end: end })
        }
        _ => None,
    };
    let exit = failure.as_ref().map_or(0, Failure::exit_code);
    let error_text = failure.as_ref().map(Failure::message);
    let text = match s.common.format {
        Format::Csv => {
            let mut header = vec!["t".to_string()];
            for j in 1..=cfg0.xs.len() {
                header.push(format!("re_x{j}"));
                header.push(format!("im_x{j}"));
            }
            header.push("locus_gap".into());
            let rows: Vec<Vec<String>> = samples
                .iter()
                .map(|smp| {
                    let mut row = vec![num(smp.t)];
                    for x in &smp.xs {
                        row.push(num(x.re));
                        row.push(num(x.im));
                    }
                    row.push(num(smp.gap));
                    row
                })
                .collect();
            csv(&header, &rows)
        }
        Format::Jsonl => samples
            .iter()
            .map(|smp| json_line(&FlowLine { t: smp.t, x: &smp.xs, locus_gap: smp.gap }))
            .collect(),
        Format::Json => {
            let body = FlowBody {
                source,
                initial: cfg0.xs.clone(),
                t_end: a.t_end,
                dt: a.dt,
                tol_locus: a.tol_locus,
                completed: failure.is_none(),
                error: failure.as_ref().map(|f| FlowError { kind: f.kind(), message: f.message(), exit_code: f.exit_code() }),
                max_gap: samples.iter().map(|x| x.gap).fold(0.0, f64::max),
                min_margin: samples.iter().map(|x| x.margin).fold(f64::INFINITY, f64::min),
                trajectory: samples.clone(),
                isospectrality,
            };
            json("flow", Some(&s.params), body)
        }
    };
    Ok(Outcome { text: Some(text), exit, warnings: Vec::new(), error: error_text })
}

// ---------------------------------------------------------------- curve-point

#[derive(Serialize)]
struct PointOut {
    zeta: C64,
    k: C64,
    e: C64,
    b1: C64,
    btau: C64,
    residual: f64,
    curve_sums: f64,
    bloch_relation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<Vec<C64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w_error: Option<String>,
}

#[derive(Serialize)]
struct CurvePointBody {
    mode: &'static str,
    points: Vec<PointOut>,
}

fn describe(p: &CurvePoint, max_spread: f64, ctx: &LameContext) -> Result<PointOut, Error> {
    let (bv, bs) = bloch_relation_scaled(p.zeta, p.k, ctx);
    let (s, w, w_spread, w_error) = match w_at(p, max_spread, ctx) {
        Ok((c, w)) => (Some(c.s), Some(w.w), Some(w.spread), None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    Ok(PointOut {
        zeta: p.zeta,
        k: p.k,
        e: p.e,
        b1: p.b1(ctx.eta()),
        btau: p.btau(ctx.eta(), ctx.tau()),
        residual: residual_relative(p, ctx)?,
        curve_sums: curve_equations(p, ctx)?.relative(),
        bloch_relation: if bs == 0.0 { 0.0 } else { bv.norm() / bs },
        s,
        w,
        w_spread,
        w_error,
    })
}

fn curve_point(
    s: &Setup,
    zeta: Option<&str>,
    energy: Option<&str>,
    seed_zeta: Option<&str>,
    seed_k: Option<&str>,
    max_spread: f64,
) -> Result<Outcome, Failure> {
    let ctx = s.curve_context("curve-point")?;
    let usage = |e: String| Failure::Usage(e);
    let (mode, points) = match (zeta, energy) {
        (Some(z), _) => ("fiber", fiber_points(parse_complex(z).map_err(usage)?, &ctx)?),
        (None, Some(e)) => {
            let e = parse_complex(e).map_err(usage)?;
            let z0 = parse_complex(seed_zeta.unwrap_or_default()).map_err(usage)?;
            let k0 = parse_complex(seed_k.unwrap_or_default()).map_err(usage)?;
            let seed = CurvePoint::new(z0, k0, e);
            ("fixed-energy", vec![solve_curve_point(Fix::E(e), &seed, &NewtonOptions::default(), &ctx)?])
        }
        (None, None) => return Err(Failure::Usage("curve-point needs --zeta or --energy".into())),
    };
    let points = points.iter().map(|p| describe(p, max_spread, &ctx)).collect::<Result<Vec<_>, _>>()?;
    if s.common.format == Format::Csv {
        let header = ["re_zeta", "im_zeta", "re_k", "im_k", "re_e", "im_e", "residual"].map(String::from);
        let rows = points
            .iter()
            .map(|p| {
                [p.zeta, p.k, p.e].iter().flat_map(|z| [num(z.re), num(z.im)]).chain([num(p.residual)]).collect()
            })
            .collect::<Vec<_>>();
        return Ok(Outcome { text: Some(csv(&header, &rows)), ..Outcome::default() });
    }
    Ok(s.done("curve-point", CurvePointBody { mode, points }))
}

// ---------------------------------------------------------------- coeffs

#[derive(Serialize)]
struct EdgePolyOut {
    label: usize,
    first: Vec<C64>,
    second: Vec<C64>,
}

#[derive(Serialize)]
struct CoeffsBody {
    brackets: Vec<C64>,
    curve_coefficients: Vec<C64>,
    curve_coefficient_symmetry_error: f64,
    a_polynomials: Vec<Vec<C64>>,
    edge_polynomials: Vec<EdgePolyOut>,
}

fn coeffs(s: &Setup) -> Result<Outcome, Failure> {
    let ctx = s.curve_context("coeffs")?;
    let ell = s.common.ell;
    let b = Brackets::new(&s.ev, 4 * ell + 2)?;
    let brackets: Vec<C64> = (1..=(4 * ell + 2) as i64).map(|n| b.get(n)).collect();
    let c = curve_coeffs(&ctx);
    let n = c.len() - 1;
    let sym = (0..=n).map(|j| rel_err(c[j], c[n - j])).fold(0.0, f64::max);
    let a_polynomials = a_polys_recurrence(&ctx)?.into_iter().map(|p| p.coeffs).collect();
    let edge_polynomials = (1..=4)
        .map(|a| edge_polynomials(a, &ctx).map(|(p1, p2)| EdgePolyOut { label: a, first: p1.coeffs, second: p2.coeffs }))
        .collect::<Result<Vec<_>, _>>()?;
    if s.common.format == Format::Csv {
        let header = ["j", "re_c", "im_c"].map(String::from);
        let rows = c.iter().enumerate().map(|(j, v)| vec![j.to_string(), num(v.re), num(v.im)]).collect::<Vec<_>>();
        return Ok(Outcome { text: Some(csv(&header, &rows)), ..Outcome::default() });
    }
    Ok(s.done(
        "coeffs",
        CoeffsBody { brackets, curve_coefficients: c, curve_coefficient_symmetry_error: sym, a_polynomials, edge_polynomials },
    ))
}
