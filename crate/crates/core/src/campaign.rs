//! Batches of inequality checks driven by a TOML config.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::inner_dilatation;
use crate::error::{Error, Result};
use crate::inequality::{
    lower_q_criterion, verify_poletsky, EtaSpec, LowerQOptions, Mode, RadialWeight, VerificationReport, Verdict,
    VerifyOptions,
};
use crate::modulus::{CapacityOptions, FamilySpec, ResolutionSpec};
use crate::zoo::{multiplicity, MappingSpec, Region};

/// The campaign shipped with the crate: identity, `z²`, `z³` and the
/// log-weight example map at three orders.
pub const DEFAULT_CAMPAIGN: &str = include_str!("../campaigns/default.toml");

fn default_tol() -> f64 {
    1e-3
}

fn default_eta() -> String {
    "extremal".into()
}

fn default_seed() -> u64 {
    FamilySpec::default().seed
}

/// One instance as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub map: String,
    #[serde(default)]
    pub z0: [f64; 2],
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
    pub mode: Mode,
    #[serde(default = "default_eta")]
    pub eta: String,
    /// Solver grid `[radial, angular]`.
    #[serde(default)]
    pub grid: Option<[usize; 2]>,
    /// Joining family `[angles, perturbed]`, or the number of circles in
    /// lem4 mode.
    #[serde(default)]
    pub curves: Option<Vec<usize>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default, rename = "instance")]
    pub instances: Vec<InstanceConfig>,
}

/// Parses `extremal`, `constant`, `random:<seed>:<nodes>` or `scaled:<factor>`.
pub fn parse_eta(text: &str) -> Result<EtaSpec> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("eta field `{s}` is not a number")));
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Usage(format!("eta field `{s}` is not an integer")));
    match parts.as_slice() {
        ["extremal"] => Ok(EtaSpec::Extremal),
        ["constant"] => Ok(EtaSpec::Constant),
        ["random", seed, nodes] => {
            let nodes = int(nodes)? as usize;
            if nodes == 0 || nodes > 1 << 20 {
                return Err(Error::Usage(format!("random eta needs 1..=2^20 nodes, got {nodes}")));
            }
            Ok(EtaSpec::Random { seed: int(seed)?, nodes })
        }
        ["scaled", factor] => {
            let factor = num(factor)?;
            if !(factor >= 1.0 && factor.is_finite()) {
                return Err(Error::Usage(format!("eta scale factor must be finite and at least 1, got {factor}")));
            }
            Ok(EtaSpec::Scaled { factor })
        }
        _ => Err(Error::Usage(format!(
            "unknown eta `{text}`; expected extremal, constant, random:<seed>:<nodes> or scaled:<factor>"
        ))),
    }
}

/// A validated instance, ready to run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub map: MappingSpec,
    pub z0: Complex64,
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
    pub mode: Mode,
    pub eta: EtaSpec,
    pub family: FamilySpec,
    pub resolution: ResolutionSpec,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

impl CampaignConfig {
    /// Parses and validates a TOML config.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: CampaignConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            Error::parse(line, e.message().to_string())
        })?;
        config.instances()?;
        Ok(config)
    }

    pub fn default_campaign() -> Self {
        Self::from_toml(DEFAULT_CAMPAIGN).expect("bundled campaign is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Validates every instance against its mode's preconditions.
    pub fn instances(&self) -> Result<Vec<Instance>> {
        if !(self.tol >= 0.0 && self.tol < 1.0) {
            return Err(Error::Usage(format!("tol must lie in [0, 1), got {}", self.tol)));
        }
        if self.instances.is_empty() {
            return Err(Error::Usage("campaign has no instances".into()));
        }
        self.instances
            .iter()
            .enumerate()
            .map(|(k, inst)| {
                validate(k, inst).map_err(|e| {
                    let label = inst.name.clone().unwrap_or_else(|| format!("#{}", k + 1));
                    match e {
                        Error::Precondition(m) => Error::Precondition(format!("instance {label}: {m}")),
                        Error::Usage(m) => Error::Usage(format!("instance {label}: {m}")),
                        other => Error::Usage(format!("instance {label}: {other}")),
                    }
                })
            })
            .collect()
    }
}

fn validate(index: usize, inst: &InstanceConfig) -> Result<Instance> {
    let alpha = inst.alpha;
    if inst.mode == Mode::Duality {
        return Err(Error::Usage("duality checks are run with the `modulus` subcommand".into()));
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} violates 1<α≤2")));
    }
    let map = MappingSpec::parse(&inst.map)?;
    let z0 = Complex64::new(inst.z0[0], inst.z0[1]);
    let (r1, r2) = (inst.r1, inst.r2);
    if !(z0.re.is_finite() && z0.im.is_finite() && r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(Error::Precondition(format!("need a finite z0 and 0 < r1 < r2, got r1 = {r1}, r2 = {r2}")));
    }
    let domain = map.domain();
    match inst.mode {
        Mode::Th1 | Mode::Th1A | Mode::Lem4 => {
            if !domain.contains_open(z0) || !(r2 < domain.dist_to_boundary(z0)) {
                return Err(Error::Precondition(format!(
                    "z0 must be interior with r2 below the distance to the boundary of `{map}`"
                )));
            }
            if inst.mode == Mode::Th1 {
                if let Some(n) = map.known_multiplicity() {
                    if n != 1 {
                        return Err(Error::Precondition(format!("`{map}` is not injective (N = {n}); use th1A")));
                    }
                }
            }
        }
        Mode::Th2 => {
            let on_boundary =
                !domain.is_plane() && ((z0 - domain.center).norm() - domain.radius).abs() <= 1e-9 * domain.radius;
            if !on_boundary || !(r2 < 2.0 * domain.radius) {
                return Err(Error::Precondition(format!(
                    "th2 needs z0 on the boundary of the disk domain of `{map}` and ε1 below its diameter"
                )));
            }
        }
        Mode::Duality => unreachable!(),
    }
    let eta = parse_eta(&inst.eta)?;
    let mut family = FamilySpec { seed: inst.seed, ..FamilySpec::default() };
    if let Some(c) = &inst.curves {
        match (inst.mode, c.as_slice()) {
            (Mode::Lem4, [n]) if *n >= 1 => family.n_radii = *n,
            (Mode::Lem4, _) => return Err(Error::Usage("lem4 `curves` is [circles]".into())),
            (_, [a, b]) if *a >= 1 && *a <= 1 << 16 && *b <= 1 << 16 => {
                family.n_angles = *a;
                family.n_perturb = *b;
            }
            _ => return Err(Error::Usage("`curves` is [angles, perturbed] with at least one angle".into())),
        }
    }
    let resolution = match inst.grid {
        None => ResolutionSpec::default(),
        Some([nr, na]) => {
            if !(2..=1 << 14).contains(&nr) || !(2..=1 << 14).contains(&na) {
                return Err(Error::Usage(format!("grid sizes must lie in 2..=16384, got [{nr}, {na}]")));
            }
            ResolutionSpec::new(nr, na)
        }
    };
    let name = inst.name.clone().unwrap_or_else(|| format!("{}-{}-{}", index + 1, inst.map, inst.mode));
    Ok(Instance { name, map, z0, r1, r2, alpha, mode: inst.mode, eta, family, resolution })
}

/// Result of one instance: a report or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Done(VerificationReport),
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl Entry {
    pub fn report(&self) -> Option<&VerificationReport> {
        match &self.outcome {
            Outcome::Done(r) => Some(r),
            Outcome::Error { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

/// Run settings echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stamp {
    pub version: String,
    pub tol: f64,
    pub eta_nodes: usize,
    pub radial_panels: usize,
    pub angular_nodes: usize,
}

impl Stamp {
    pub fn new(tol: f64) -> Self {
        let d = VerifyOptions::default();
        Stamp {
            version: env!("CARGO_PKG_VERSION").to_string(),
            tol,
            eta_nodes: d.eta_nodes,
            radial_panels: d.radial_panels,
            angular_nodes: d.angular_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub stamp: Stamp,
    pub summary: Summary,
    pub entries: Vec<Entry>,
}

impl ReportBundle {
    pub fn from_entries(stamp: Stamp, entries: Vec<Entry>) -> Self {
        let mut summary = Summary { total: entries.len(), ..Summary::default() };
        for e in &entries {
            match e.report().map(|r| r.verdict) {
                Some(Verdict::Pass) => summary.pass += 1,
                Some(Verdict::Fail) => summary.fail += 1,
                None => summary.error += 1,
            }
        }
        ReportBundle { stamp, summary, entries }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.pass == self.summary.total
    }

    /// 0 when every instance passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Runs one validated instance.
pub fn run_instance(inst: &Instance, tol: f64) -> Result<VerificationReport> {
    match inst.mode {
        Mode::Lem4 => run_lower_q(inst, tol),
        mode => {
            let opts = VerifyOptions {
                capacity: CapacityOptions { family: inst.family, resolution: inst.resolution },
                tol,
                ..VerifyOptions::default()
            };
            verify_poletsky(&inst.map, inst.z0, inst.r1, inst.r2, inst.alpha, mode, &inst.eta, &opts)
        }
    }
}

/// lem4 instances use `p = α/(α−1)` and `Q = N·K_{I,α}^{p−1}`.
fn run_lower_q(inst: &Instance, tol: f64) -> Result<VerificationReport> {
    let alpha = inst.alpha;
    let p = alpha / (alpha - 1.0);
    let n = multiplicity(&inst.map, Region::Disk(crate::geometry::Disk::new(inst.z0, inst.r2 * (1.0 + 1e-6))))?;
    let q = RadialWeight::dilatation(&inst.map, alpha, n.count as f64, p - 1.0)?;
    let opts = LowerQOptions { n_radii: inst.family.n_radii, resolution: inst.resolution, tol, ..Default::default() };
    let mut report = lower_q_criterion(&inst.map, &q, inst.z0, p, inst.r1, inst.r2, &opts)?;
    report.params.seed = inst.family.seed;
    report.notes.push(format!("order p = {p}, N = {}", n.count));
    Ok(report)
}

/// Runs every instance, concurrently, keeping the declared order.
///
/// Instance errors are recorded in the bundle and never abort the run.
pub fn run_campaign(config: &CampaignConfig) -> Result<ReportBundle> {
    let instances = config.instances()?;
    let entries = instances
        .par_iter()
        .map(|inst| Entry {
            name: inst.name.clone(),
            outcome: match run_instance(inst, config.tol) {
                Ok(r) => Outcome::Done(r),
                Err(e) => Outcome::Error { message: e.to_string() },
            },
        })
        .collect();
    Ok(ReportBundle::from_entries(Stamp::new(config.tol), entries))
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    out.push_str(key);
    out.push_str(": ");
    out.push_str(&value.to_string());
    out.push('\n');
}

/// Structured text: one `key: value` per line, records separated by a
/// blank line, keys in a fixed order.
pub fn render_text(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    let s = &bundle.stamp;
    push_kv(&mut out, "version", &s.version);
    push_kv(&mut out, "tol", s.tol);
    push_kv(&mut out, "eta_nodes", s.eta_nodes);
    push_kv(&mut out, "radial_panels", s.radial_panels);
    push_kv(&mut out, "angular_nodes", s.angular_nodes);
    push_kv(&mut out, "total", bundle.summary.total);
    push_kv(&mut out, "pass", bundle.summary.pass);
    push_kv(&mut out, "fail", bundle.summary.fail);
    push_kv(&mut out, "error", bundle.summary.error);
    for e in &bundle.entries {
        out.push('\n');
        push_kv(&mut out, "name", &e.name);
        match &e.outcome {
            Outcome::Error { message } => {
                push_kv(&mut out, "status", "error");
                push_kv(&mut out, "message", message);
            }
            Outcome::Done(r) => {
                push_kv(&mut out, "status", "done");
                render_report(&mut out, r);
            }
        }
    }
    out
}

fn render_report(out: &mut String, r: &VerificationReport) {
    let p = &r.params;
    push_kv(out, "theorem", r.theorem);
    push_kv(out, "map", &p.map);
    push_kv(out, "alpha", p.alpha);
    push_kv(out, "z0", format!("{} {}", p.z0[0], p.z0[1]));
    push_kv(out, "r1", p.r1);
    push_kv(out, "r2", p.r2);
    push_kv(out, "eta", &p.eta);
    push_kv(out, "seed", p.seed);
    push_kv(out, "lhs.lower", r.lhs.lower);
    push_kv(out, "lhs.upper", r.lhs.upper);
    push_kv(out, "lhs.method", r.lhs.method.as_str());
    push_kv(out, "lhs.iterations", r.lhs.iterations);
    push_kv(out, "lhs.converged", r.lhs.converged);
    push_kv(
        out,
        "lhs.resolution",
        r.lhs.resolution.map(|[a, b]| format!("{a}x{b}")).unwrap_or_else(|| "-".into()),
    );
    push_kv(out, "rhs", r.rhs);
    push_kv(out, "margin", r.margin);
    push_kv(out, "lower_margin", r.lower_margin);
    push_kv(out, "verdict", r.verdict);
    push_kv(out, "certified", r.certified);
    push_kv(out, "rhs_divergent", r.rhs_divergent);
    for n in &r.notes {
        push_kv(out, "note", n);
    }
}

/// The same data as one JSON document.
pub fn render_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("report serialises");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    MarginVsAlpha,
    KField,
    ModulusConvergence,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "margin-vs-alpha" => Ok(PlotKind::MarginVsAlpha),
            "K-field" | "k-field" => Ok(PlotKind::KField),
            "modulus-convergence" => Ok(PlotKind::ModulusConvergence),
            _ => Err(Error::Usage(format!(
                "unknown plot kind `{s}`; expected margin-vs-alpha, K-field or modulus-convergence"
            ))),
        }
    }
}

/// Samples per side of the K-field grid.
pub const K_FIELD_SIDE: usize = 41;

/// Whitespace-separated table with a header row.
///
/// * `margin-vs-alpha`: `instance alpha margin lower_margin`, sorted by α.
/// * `K-field`: `instance x y K` on a square grid covering each instance's
///   ring, ring points only.
/// * `modulus-convergence`: `instance iteration value`, the solver's dual
///   objective per iteration.
pub fn emit_plot_data(bundle: &ReportBundle, kind: PlotKind) -> Result<String> {
    let reports: Vec<(&str, &VerificationReport)> =
        bundle.entries.iter().filter_map(|e| e.report().map(|r| (e.name.as_str(), r))).collect();
    if reports.is_empty() {
        return Err(Error::Usage("report bundle has no completed instances".into()));
    }
    let mut out = String::new();
    match kind {
        PlotKind::MarginVsAlpha => {
            out.push_str("instance alpha margin lower_margin\n");
            let mut rows = reports.clone();
            rows.sort_by(|a, b| a.1.params.alpha.total_cmp(&b.1.params.alpha));
            for (name, r) in rows {
                out.push_str(&format!("{name} {} {} {}\n", r.params.alpha, r.margin, r.lower_margin));
            }
        }
        PlotKind::KField => {
            out.push_str("instance x y K\n");
            for (name, r) in reports {
                let map = MappingSpec::parse(&r.params.map)?;
                let z0 = Complex64::new(r.params.z0[0], r.params.z0[1]);
                for (z, k) in k_field(&map, z0, r.params.r1, r.params.r2, r.params.alpha) {
                    out.push_str(&format!("{name} {} {} {k}\n", z.re, z.im));
                }
            }
        }
        PlotKind::ModulusConvergence => {
            out.push_str("instance iteration value\n");
            for (name, r) in reports {
                if r.lhs.history.is_empty() {
                    out.push_str(&format!("{name} 0 {}\n", r.lhs.lower));
                }
                for (k, v) in r.lhs.history.iter().enumerate() {
                    out.push_str(&format!("{name} {k} {v}\n"));
                }
            }
        }
    }
    Ok(out)
}

/// `K_{I,α}` at the grid points of the square around `z0` that fall in
/// the ring and the domain; undefined points are skipped.
pub fn k_field(map: &MappingSpec, z0: Complex64, r1: f64, r2: f64, alpha: f64) -> Vec<(Complex64, f64)> {
    let n = K_FIELD_SIDE;
    let domain = map.domain();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let z = z0
                + Complex64::new(
                    r2 * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
                    r2 * (2.0 * j as f64 / (n - 1) as f64 - 1.0),
                );
            let d = (z - z0).norm();
            if d < r1 || d > r2 || !domain.contains_open(z) {
                continue;
            }
            if let Ok(pair) = map.derivative(z) {
                out.push((z, inner_dilatation(&pair, alpha).value()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"
tol = 1e-3
[[instance]]
map = "identity"
r1 = 1.0
r2 = 2.718281828459045
alpha = 2.0
mode = "th1"
"#;

    #[test]
    fn single_identity_instance() {
        let config = CampaignConfig::from_toml(ONE).unwrap();
        let bundle = run_campaign(&config).unwrap();
        assert_eq!(bundle.summary, Summary { total: 1, pass: 1, fail: 0, error: 0 });
        assert_eq!(bundle.exit_code(), 0);
        let text = render_text(&bundle);
        assert!(text.contains("verdict: pass"));
        assert!(text.contains("name: 1-identity-th1"));
    }

    #[test]
    fn alpha_out_of_range_is_rejected_at_parse_time() {
        let bad = ONE.replace("alpha = 2.0", "alpha = 3.0");
        let e = CampaignConfig::from_toml(&bad).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        assert!(e.to_string().contains("1<α≤2"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = ONE.replace("r1 = 1.0", "r1 = \"one\"");
        match CampaignConfig::from_toml(&bad).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(CampaignConfig::from_toml(&ONE.replace("mode = \"th1\"", "mode = \"th9\"")).is_err());
        assert!(CampaignConfig::from_toml(&format!("{ONE}bogus = 1\n")).is_err());
        assert!(matches!(CampaignConfig::from_toml("tol = 1e-3\n"), Err(Error::Usage(_))));
    }

    #[test]
    fn geometry_checked_per_mode() {
        let th1_z2 = ONE.replace("\"identity\"", "\"z2\"");
        assert!(matches!(CampaignConfig::from_toml(&th1_z2), Err(Error::Precondition(_))));
        let outside = ONE.replace("\"identity\"", "\"sec4:1.5\"");
        assert!(matches!(CampaignConfig::from_toml(&outside), Err(Error::Precondition(_))));
        let interior_th2 =
            ONE.replace("\"identity\"", "\"sec4:1.5\"").replace("r1 = 1.0", "r1 = 0.1").replace("2.718281828459045", "0.5").replace("th1", "th2");
        assert!(matches!(CampaignConfig::from_toml(&interior_th2), Err(Error::Precondition(_))));
    }

    #[test]
    fn eta_specs() {
        assert_eq!(parse_eta("extremal").unwrap(), EtaSpec::Extremal);
        assert_eq!(parse_eta("random:3:16").unwrap(), EtaSpec::Random { seed: 3, nodes: 16 });
        assert_eq!(parse_eta("scaled:2").unwrap(), EtaSpec::Scaled { factor: 2.0 });
        for bad in ["", "scaled:0.5", "random:1", "random:x:2", "random:1:0", "optimal"] {
            assert!(parse_eta(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn default_campaign_parses() {
        let c = CampaignConfig::default_campaign();
        let inst = c.instances().unwrap();
        assert!(inst.len() >= 6);
        let round = CampaignConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(round, c);
    }

    #[test]
    fn plot_tables() {
        let bundle = run_campaign(&CampaignConfig::from_toml(ONE).unwrap()).unwrap();
        let m = emit_plot_data(&bundle, PlotKind::MarginVsAlpha).unwrap();
        assert!(m.starts_with("instance alpha margin lower_margin\n"));
        assert_eq!(m.lines().count(), 2);
        let k = emit_plot_data(&bundle, PlotKind::KField).unwrap();
        assert!(k.lines().skip(1).all(|l| l.ends_with(" 1")));
        let empty = ReportBundle::from_entries(bundle.stamp.clone(), vec![]);
        assert!(matches!(emit_plot_data(&empty, PlotKind::KField), Err(Error::Usage(_))));
        assert!(PlotKind::parse("histogram").is_err());
    }
}
