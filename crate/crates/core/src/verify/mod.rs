//! The verification harness: configuration, checks and reports.

mod checks;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::group::{catalog, DiagVec, ParabolicId};
use crate::lemma::LemmaPart;
use crate::quadrature::{KronrodRule, QuadConfig};

pub use checks::*;
pub use report::{strip_timing, write_atomic, CheckReport, Fit, Report, Row, HEADROOM, SCHEMA};

/// Which checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckSet {
    Structure,
    Phi,
    Lemma,
    Prop,
    Iterated,
    Divergence,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    /// Rays of the t-grid.
    pub rays: usize,
    /// Radii per ray, including 0.
    pub radii: usize,
    /// Largest ‖t‖.
    pub radius: f64,
    /// κ ranges over [10^{−decades}, 10^{decades}].
    pub decades: f64,
    /// κ values per axis.
    pub count: usize,
    /// t-points of the iterated check, taken from the front of the default list.
    pub iterated_points: usize,
    /// Shell edges of the divergence scan.
    pub shells: usize,
    pub shell_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rays: 8,
            radii: 7,
            radius: 6.0,
            decades: 3.0,
            count: 7,
            iterated_points: 5,
            shells: 25,
            shell_max: 1e3,
        }
    }
}

impl GridSpec {
    /// Parses `key=value` pairs separated by commas over the defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let mut g = GridSpec::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("grid item '{item}' is not key=value")))?;
            let bad = || Error::InvalidInput(format!("bad value in grid item '{item}'"));
            let int = || v.parse::<usize>().map_err(|_| bad());
            let real = || v.parse::<f64>().map_err(|_| bad());
            match k {
                "rays" => g.rays = int()?,
                "radii" => g.radii = int()?,
                "radius" => g.radius = real()?,
                "decades" => g.decades = real()?,
                "count" => g.count = int()?,
                "points" => g.iterated_points = int()?,
                "shells" => g.shells = int()?,
                "shellMax" | "shell_max" => g.shell_max = real()?,
                _ => return Err(Error::InvalidInput(format!("unknown grid key '{k}'"))),
            }
        }
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rays > 0
            && self.radii > 0
            && self.radius >= 0.0
            && self.decades >= 0.0
            && self.count > 0
            && self.iterated_points > 0
            && self.iterated_points <= ITERATED_POINTS.len()
            && self.shells >= 4
            && self.shell_max > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("empty or malformed grid {self:?}")))
        }
    }
}

/// t-points of the iterated check.
pub const ITERATED_POINTS: [[f64; 3]; 5] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, -1.0],
    [0.5, 0.0, -0.5],
    [0.5, -0.25, -0.25],
    [0.25, 0.25, -0.5],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HarnessConfig {
    /// Restricts field-dependent checks to one field.
    pub field: Option<FieldTag>,
    pub grid: GridSpec,
    /// Overrides the per-check default r.
    pub r: Option<f64>,
    /// r₁ of part (i); both default splits when unset.
    pub r1: Option<f64>,
    /// Lemma part; all parts when unset.
    pub part: Option<LemmaPart>,
    /// ε values of the divergence scan.
    pub eps: Vec<f64>,
    /// Base quadrature settings of the lemma and bound sweeps.
    pub quad: QuadConfig,
    /// Relative tolerance of the three-dimensional integrals.
    pub iterated_tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            field: None,
            grid: GridSpec::default(),
            r: None,
            r1: None,
            part: None,
            eps: vec![0.05, 0.10, 0.15],
            quad: QuadConfig {
                abs_tol: 1e-300,
                ..QuadConfig::default()
            },
            iterated_tol: 5e-3,
            samples: 1000,
            seed: 1,
            out: None,
        }
    }
}

impl HarnessConfig {
    pub fn validate_for(&self, set: CheckSet) -> Result<()> {
        self.grid.validate()?;
        self.quad.validate()?;
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.iterated_tol > 0.0 && self.iterated_tol < 1.0) {
            return bad(format!("iterated tolerance {} out of range", self.iterated_tol));
        }
        let field = self.field;
        match set {
            CheckSet::Prop if field == Some(FieldTag::H) => {
                return bad("the bound sweep is defined for R and C only".into())
            }
            CheckSet::Iterated if field.is_some_and(|f| f != FieldTag::R) => {
                return bad("the iterated check runs over R only".into())
            }
            CheckSet::Divergence if field.is_some_and(|f| f != FieldTag::H) => {
                return bad("the divergence scan runs over H only".into())
            }
            _ => {}
        }
        if let Some(r) = self.r {
            let min = match set {
                CheckSet::Lemma => 2.0,
                CheckSet::Prop | CheckSet::Divergence => 4.0,
                CheckSet::Iterated | CheckSet::All => 5.0,
                _ => f64::NEG_INFINITY,
            };
            if !(r > min) {
                return bad(format!("r = {r} must exceed {min} for this check"));
            }
        }
        if let Some(r1) = self.r1 {
            let r = self.r.unwrap_or(LEMMA_R);
            if !(r1 >= 2.0 && r1 <= r) {
                return bad(format!("r1 = {r1} must satisfy 2 ≤ r1 ≤ r = {r}"));
            }
        }
        if set == CheckSet::Divergence || set == CheckSet::All {
            if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0 / 6.0)) {
                return bad(format!("ε values {:?} must lie in (0, 1/6)", self.eps));
            }
        }
        Ok(())
    }

    fn fields(&self, allowed: &[FieldTag]) -> Vec<FieldTag> {
        match self.field {
            Some(f) => allowed.iter().copied().filter(|x| *x == f).collect(),
            None => allowed.to_vec(),
        }
    }

    fn lemma_r1(&self) -> Vec<f64> {
        let r = self.r.unwrap_or(LEMMA_R);
        match self.r1 {
            Some(r1) => vec![r1],
            None => vec![r, 2.0],
        }
    }

    /// Budget settings of the three-dimensional integrals.
    pub fn iterated_quad(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.iterated_tol,
            abs_tol: 1e-300,
            tail_cut: 100.0,
            panel_scale: 3.0,
            rule: KronrodRule::G7K15,
            ..self.quad
        }
    }
}

pub const LEMMA_R: f64 = 4.0;
pub const PROP_R: f64 = 5.0;
pub const ITERATED_R: f64 = 6.0;
pub const CONTRAST_R: f64 = 5.0;
/// ε of the negative control, beyond the divergence threshold 1/6.
pub const CONTROL_EPS: f64 = 0.2;

/// Worker count from `VERIFY_THREADS`, if set.
pub fn thread_override() -> Result<Option<usize>> {
    match std::env::var("VERIFY_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("VERIFY_THREADS='{v}' is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn timed(f: impl FnOnce() -> CheckReport) -> CheckReport {
    let start = Instant::now();
    let mut r = f();
    r.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    r
}

/// Runs the selected checks in a fixed order.
pub fn run(set: CheckSet, cfg: &HarnessConfig) -> Result<Report> {
    cfg.validate_for(set)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_override()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let checks = pool.install(|| run_checks(set, cfg));
    Ok(Report {
        schema: SCHEMA,
        config: cfg.clone(),
        checks,
    })
}

fn run_checks(set: CheckSet, cfg: &HarnessConfig) -> Vec<CheckReport> {
    let want = |s: CheckSet| set == s || set == CheckSet::All;
    let mut out = Vec::new();
    if want(CheckSet::Structure) {
        out.push(timed(|| check_structure(&catalog(), "structure")));
        out.push(timed(check_structure_control));
    }
    if want(CheckSet::Phi) {
        for tag in cfg.fields(&FieldTag::ALL) {
            out.push(timed(|| check_phi(tag, cfg.samples, cfg.seed)));
        }
        out.push(timed(|| check_weyl(cfg.samples, cfg.seed)));
    }
    if want(CheckSet::Lemma) {
        let parts = match cfg.part {
            Some(p) => vec![p],
            None => LemmaPart::ALL.to_vec(),
        };
        let r = cfg.r.unwrap_or(LEMMA_R);
        for part in parts {
            let splits = if part == LemmaPart::I { cfg.lemma_r1() } else { vec![0.0] };
            let signs: &[f64] = if part.has_sign() { &[1.0, -1.0] } else { &[1.0] };
            for &r1 in &splits {
                for &sign in signs {
                    out.push(timed(|| check_lemma(part, r, r1, sign, &cfg.grid, &cfg.quad)));
                }
            }
        }
    }
    if want(CheckSet::Prop) {
        let r = cfg.r.unwrap_or(PROP_R);
        for tag in cfg.fields(&[FieldTag::R, FieldTag::C]) {
            for q in [ParabolicId::Q1, ParabolicId::Q3] {
                out.push(timed(|| check_prop(tag, q, r, &cfg.grid, &cfg.quad)));
            }
        }
        if cfg.fields(&[FieldTag::R]).contains(&FieldTag::R) {
            out.push(timed(|| check_q3_paths(r)));
        }
        out.push(timed(|| check_left_k(cfg.seed)));
    }
    if want(CheckSet::Iterated) && !cfg.fields(&[FieldTag::R]).is_empty() {
        let r = cfg.r.unwrap_or(ITERATED_R);
        let points: Vec<DiagVec> = ITERATED_POINTS[..cfg.grid.iterated_points]
            .iter()
            .map(|t| DiagVec::new(*t))
            .collect();
        out.push(timed(|| check_gaussian_calibration(&cfg.quad)));
        out.push(timed(|| check_iterated(r, &points, &cfg.iterated_quad())));
    }
    if want(CheckSet::Divergence) && !cfg.fields(&[FieldTag::H]).is_empty() {
        for &eps in &cfg.eps {
            out.push(timed(|| check_divergence(eps, &cfg.grid, &cfg.quad)));
        }
        out.push(timed(|| check_divergence_control(CONTROL_EPS, &cfg.grid, &cfg.quad)));
        let r = cfg.r.unwrap_or(CONTRAST_R);
        for tag in [FieldTag::R, FieldTag::C] {
            out.push(timed(|| check_contrast(tag, r, &cfg.quad)));
        }
    }
    if set == CheckSet::All {
        out.push(timed(check_quadrature));
    }
    out
}
