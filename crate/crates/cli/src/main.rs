use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use qcmod::calculus::inner_dilatation;
use qcmod::campaign::{emit_plot_data, render_json, render_text, run_campaign, CampaignConfig, PlotKind};
use qcmod::geometry::{generate_joining_family, generate_separating_family, push_forward, RingCondenser, PUSH_CHORD_TOL};
use qcmod::inequality::{verify_poletsky, Mode, VerifyOptions};
use qcmod::modulus::{
    condenser_capacity, duality_check, restricted_modulus_lower, ring_modulus_closed_form,
    separating_modulus_closed_form, CapacityOptions, FamilySpec, ModulusEstimate, ResolutionSpec,
};
use qcmod::zoo::{sec4_dilatation_claim, sec4_profile, sobolev_membership_probe, MappingSpec, REGISTRY};
use qcmod::Error;

#[derive(Parser)]
#[command(name = "qcmod", version, about = "Moduli of curve families and ring inequalities for planar maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wirtinger derivatives, Jacobian and inner dilatation at a point.
    Dilatation {
        #[arg(long, default_value = "identity")]
        map: String,
        #[arg(long, default_value = "0,0", value_parser = parse_point)]
        z0: Complex64,
        /// Order p of K_{I,p}.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// p-modulus of the joining or separating family of a ring.
    Modulus {
        #[command(flatten)]
        ring: RingArgs,
        /// Curve family: joining or separating.
        #[arg(long, default_value = "joining")]
        family: String,
        /// Compare the separating modulus with cap^{-1/(p-1)}.
        #[arg(long)]
        duality: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// p-capacity of a ring condenser or its image under a map.
    Capacity {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Checks one instance of a ring inequality.
    Verify {
        #[command(flatten)]
        ring: RingArgs,
        /// th1, th1A or th2.
        #[arg(long, default_value = "th1")]
        mode: String,
        /// extremal, constant, random:<seed>:<nodes> or scaled:<factor>.
        #[arg(long, default_value = "extremal")]
        eta: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Tabulates the log-weight example map: profile, dilatation claim and
    /// Sobolev probe.
    ExampleSec4 {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        /// Number of log-spaced radii in [0.01, 0.99].
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Runs a campaign config (path, `-` for standard input, or the bundled
    /// default when omitted).
    Campaign {
        config: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Emit a plot table instead: margin-vs-alpha, K-field or
        /// modulus-convergence.
        #[arg(long)]
        plot: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Lists the registered maps.
    Maps,
}

#[derive(Args)]
struct RingArgs {
    #[arg(long, default_value = "identity")]
    map: String,
    #[arg(long, default_value = "0,0", value_parser = parse_point)]
    z0: Complex64,
    #[arg(long)]
    r1: f64,
    #[arg(long)]
    r2: f64,
    /// Modulus order (α for the ring inequalities).
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver grid, `N` or `NRxNA`.
    #[arg(long, default_value = "512x512", value_parser = parse_grid)]
    grid: [usize; 2],
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SolverArgs {
    fn capacity(&self) -> CapacityOptions {
        CapacityOptions {
            family: FamilySpec { seed: self.seed, ..FamilySpec::default() },
            resolution: ResolutionSpec::new(self.grid[0], self.grid[1]),
        }
    }
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let x: f64 = x.trim().parse().map_err(|_| format!("bad coordinate `{x}`"))?;
    let y: f64 = y.trim().parse().map_err(|_| format!("bad coordinate `{y}`"))?;
    Ok(Complex64::new(x, y))
}

fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad grid size `{t}`"));
    let g = match s.split_once('x') {
        Some((a, b)) => [parse(a)?, parse(b)?],
        None => {
            let n = parse(s)?;
            [n, n]
        }
    };
    if g.iter().any(|n| !(2..=16384).contains(n)) {
        return Err("grid sizes must lie in 2..=16384".into());
    }
    Ok(g)
}

fn print_estimate(label: &str, e: &ModulusEstimate) {
    println!("{label}.lower: {}", e.lower);
    println!("{label}.upper: {}", e.upper);
    println!("{label}.method: {}", e.method.as_str());
    if let Some([a, b]) = e.resolution {
        println!("{label}.resolution: {a}x{b}");
        println!("{label}.iterations: {}", e.iterations);
        println!("{label}.converged: {}", e.converged);
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> qcmod::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> qcmod::Result<u8> {
    match cli.command {
        Command::Dilatation { map, z0, alpha } => {
            let map = MappingSpec::parse(&map)?;
            let pair = map.derivative(z0)?;
            println!("map: {map}");
            println!("z: {} {}", z0.re, z0.im);
            println!("f_z: {} {}", pair.fz.re, pair.fz.im);
            println!("f_zbar: {} {}", pair.fzbar.re, pair.fzbar.im);
            println!("jacobian: {}", pair.jacobian());
            println!("norm: {}", pair.norm());
            println!("min_stretch: {}", pair.min_stretch());
            println!("K_I: {}", inner_dilatation(&pair, alpha).value());
            Ok(0)
        }
        Command::Modulus { ring, family, duality, solver } => {
            let map = MappingSpec::parse(&ring.map)?;
            let condenser = RingCondenser::new(ring.z0, ring.r1, ring.r2)?;
            let opts = solver.capacity();
            if duality {
                let d = duality_check(&condenser, ring.alpha, &opts)?;
                println!("cap: {}", d.cap);
                println!("sep_modulus: {}", d.sep_modulus);
                println!("target: {}", d.target);
                println!("residual: {}", d.identity_residual);
                return Ok(0);
            }
            let (curves, closed) = match family.as_str() {
                "joining" => (
                    generate_joining_family(&condenser, opts.family.n_angles, opts.family.n_perturb, opts.family.seed)?,
                    ring_modulus_closed_form(ring.r1, ring.r2, ring.alpha)?,
                ),
                "separating" => (
                    generate_separating_family(&condenser, opts.family.n_radii)?,
                    separating_modulus_closed_form(ring.r1, ring.r2, ring.alpha)?,
                ),
                other => return Err(Error::Usage(format!("unknown family `{other}`"))),
            };
            if map.is_identity() {
                print_estimate("closed_form", &closed);
            }
            let pushed = push_forward(&curves, &map, PUSH_CHORD_TOL);
            println!("curves: {} ({} dropped)", pushed.len(), pushed.dropped);
            print_estimate("restricted", &restricted_modulus_lower(&pushed, ring.alpha, &opts.resolution)?);
            Ok(0)
        }
        Command::Capacity { ring, solver } => {
            let map = MappingSpec::parse(&ring.map)?;
            let condenser = RingCondenser::new(ring.z0, ring.r1, ring.r2)?;
            let e = condenser_capacity(&condenser, ring.alpha, Some(&map), &solver.capacity())?;
            print_estimate("capacity", &e);
            Ok(0)
        }
        Command::Verify { ring, mode, eta, tol, out, json, solver } => {
            let map = MappingSpec::parse(&ring.map)?;
            let mode = Mode::parse(&mode)?;
            let eta = qcmod::campaign::parse_eta(&eta)?;
            let opts = VerifyOptions { capacity: solver.capacity(), tol, ..VerifyOptions::default() };
            let report = verify_poletsky(&map, ring.z0, ring.r1, ring.r2, ring.alpha, mode, &eta, &opts)?;
            let text = if json {
                serde_json::to_string_pretty(&report).expect("report serialises") + "\n"
            } else {
                let entry = qcmod::campaign::Entry {
                    name: format!("{map}-{mode}"),
                    outcome: qcmod::campaign::Outcome::Done(report.clone()),
                };
                render_text(&qcmod::campaign::ReportBundle::from_entries(qcmod::campaign::Stamp::new(tol), vec![entry]))
            };
            write_out(out.as_ref(), &text)?;
            Ok(if report.verdict.is_pass() { 0 } else { 1 })
        }
        Command::ExampleSec4 { alpha, points } => {
            let map = MappingSpec::sec4(alpha)?;
            println!("s rho K_numeric K_claimed residual");
            let n = points.max(2);
            for k in 0..n {
                let s = 0.01 * (99.0f64).powf(k as f64 / (n - 1) as f64);
                let rho = sec4_profile(s, alpha)?.rho;
                let c = sec4_dilatation_claim(&map, Complex64::new(s, 0.0))?;
                println!("{s} {rho} {} {} {}", c.numeric, c.claimed, c.residual);
            }
            let radii: Vec<f64> = (0..=10).map(|j| 0.5 * 0.5f64.powi(j)).collect();
            let sob = sobolev_membership_probe(&map, alpha, &radii)?;
            println!("sobolev: {:?}", sob.verdict);
            Ok(0)
        }
        Command::Campaign { config, out, json, plot, tol } => {
            let mut config = match config.as_deref() {
                None => CampaignConfig::default_campaign(),
                Some("-") => {
                    let mut text = String::new();
                    std::io::stdin().read_to_string(&mut text).map_err(Error::from)?;
                    CampaignConfig::from_toml(&text)?
                }
                Some(path) => CampaignConfig::from_toml(&std::fs::read_to_string(path).map_err(Error::from)?)?,
            };
            if let Some(t) = tol {
                config.tol = t;
                config.instances()?;
            }
            let plot = plot.as_deref().map(PlotKind::parse).transpose()?;
            let bundle = run_campaign(&config)?;
            let out = out.or_else(|| config.output.as_ref().map(PathBuf::from));
            let text = match plot {
                Some(kind) => emit_plot_data(&bundle, kind)?,
                None if json => render_json(&bundle),
                None => render_text(&bundle),
            };
            write_out(out.as_ref(), &text)?;
            eprintln!(
                "{} instances: {} pass, {} fail, {} error",
                bundle.summary.total, bundle.summary.pass, bundle.summary.fail, bundle.summary.error
            );
            Ok(bundle.exit_code() as u8)
        }
        Command::Maps => {
            for (name, about) in REGISTRY {
                println!("{name:<28} {about}");
            }
            println!("{:<28} bilinear interpolation of an `x y u v` grid file", "grid:<path>");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
