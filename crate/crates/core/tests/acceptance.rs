//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines always reach the console.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcmod::calculus::{inner_dilatation, numeric_wirtinger, WirtingerPair};
use qcmod::campaign::{render_json, render_text, run_campaign, CampaignConfig};
use qcmod::geometry::{generate_joining_family, CurveFamily, RingCondenser};
use qcmod::inequality::{
    i_star, lower_q_criterion, verify_poletsky, EtaSpec, LowerQOptions, Mode, RadialWeight, VerifyOptions,
};
use qcmod::modulus::{
    condenser_capacity, duality_check, restricted_modulus_lower, CapacityOptions, FamilySpec, ResolutionSpec,
};
use qcmod::zoo::{sec4_dilatation_claim, sobolev_membership_probe, MappingSpec, SobolevVerdict};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn dilatation_identity() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for alpha in [1.2, 1.5, 1.9] {
        let map = MappingSpec::sec4(alpha).map_err(|e| e.to_string())?;
        for (k, s) in log_spaced(0.01, 0.99, 50).into_iter().enumerate() {
            let z = Complex64::from_polar(s, 0.37 * k as f64);
            let c = sec4_dilatation_claim(&map, z).map_err(|e| e.to_string())?;
            worst = worst.max(rel(c.numeric, 1.0 - s.ln()));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(worst < 5e-3 && secs < 10.0, format!("worst relative error {worst:.2e}, {secs:.2} s"))
}

fn identity_equality() -> Outcome {
    let t = Instant::now();
    let two_pi = 2.0 * PI;
    let report = verify_poletsky(
        &MappingSpec::identity(),
        Complex64::new(0.0, 0.0),
        1.0,
        E,
        2.0,
        Mode::Th1,
        &EtaSpec::Extremal,
        &VerifyOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let ring = RingCondenser::new(Complex64::new(0.0, 0.0), 1.0, E).map_err(|e| e.to_string())?;
    let family = generate_joining_family(&ring, 360, 100, 7).map_err(|e| e.to_string())?;
    let solver = restricted_modulus_lower(&family, 2.0, &ResolutionSpec::new(512, 512)).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    check(
        rel(report.lhs.lower, two_pi) < 0.02
            && rel(report.lhs.upper, two_pi) < 0.02
            && rel(report.rhs, two_pi) < 0.02
            && rel(solver.lower, two_pi) < 0.02
            && report.verdict.is_pass()
            && secs < 60.0,
        format!(
            "lhs {:.6}, rhs {:.6}, solver {:.6} (2π = {two_pi:.6}), {secs:.1} s",
            report.lhs.lower, report.rhs, solver.lower
        ),
    )
}

fn branched_square() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (r1, r2) in [(0.2, 0.4), (0.1, 0.8)] {
        let report = verify_poletsky(
            &MappingSpec::power(2).unwrap(),
            Complex64::new(0.0, 0.0),
            r1,
            r2,
            2.0,
            Mode::Th1A,
            &EtaSpec::Extremal,
            &VerifyOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let log = f64::ln(r2 / r1);
        let rhs = 4.0 * PI / log;
        ok &= report.lhs.upper <= report.rhs
            && rel(report.rhs, rhs) < 1e-3
            && rel(report.lhs.upper, PI / log) < 1e-9
            && report.margin >= 2.0 * PI / log
            && report.certified;
        parts.push(format!("A({r1},{r2}): upper {:.5} ≤ rhs {:.5}, margin {:.5}", report.lhs.upper, report.rhs, report.margin));
    }
    check(ok, parts.join("; "))
}

fn duality() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    // Hand values: cap_2 A(1,e) = 2π, cap_3 A(1,4) = 2π (∫ r^{−1/2})^{−2} = π/2.
    for (p, r2, cap) in [(2.0, E, 2.0 * PI), (3.0, 4.0, PI / 2.0)] {
        let ring = RingCondenser::new(Complex64::new(0.0, 0.0), 1.0, r2).unwrap();
        let d = duality_check(&ring, p, &CapacityOptions::default()).map_err(|e| e.to_string())?;
        let target = f64::powf(cap, -1.0 / (p - 1.0));
        let err = rel(d.sep_modulus, target);
        ok &= err < 0.02 && rel(d.target, target) < 1e-12;
        parts.push(format!("p={p}: {:.6} vs {target:.6} ({err:.1e})", d.sep_modulus));
    }
    check(ok, parts.join("; "))
}

fn lower_q_equality() -> Outcome {
    let q = RadialWeight::constant(1.0).unwrap();
    let r = lower_q_criterion(&MappingSpec::identity(), &q, Complex64::new(0.0, 0.0), 2.0, 0.1, 1.0, &LowerQOptions::default())
        .map_err(|e| e.to_string())?;
    let v = f64::ln(10.0) / (2.0 * PI);
    check(
        rel(r.lhs.lower, v) < 0.02 && rel(r.lhs.upper, v) < 0.02 && rel(r.rhs, v) < 0.02 && r.verdict.is_pass(),
        format!("lhs [{:.6}, {:.6}], rhs {:.6}, log(10)/2π = {v:.6}", r.lhs.lower, r.lhs.upper, r.rhs),
    )
}

/// `∫_{r1}^{r2} r^{−e} / log(e/r) dr`, `e = 1/(α−1)`, by composite Simpson in `log r`.
fn i_star_oracle(r1: f64, r2: f64, alpha: f64) -> f64 {
    let e = 1.0 / (alpha - 1.0);
    let n = 20_000;
    let (a, b) = (r1.ln(), r2.ln());
    let h = (b - a) / n as f64;
    let f = |u: f64| {
        let r = u.exp();
        r.powf(1.0 - e) / (1.0 - r.ln())
    };
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn divergence_probe() -> Outcome {
    let q = RadialWeight::log_weight();
    let r2 = 0.15;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut alphas = vec![1.2, 1.5, 1.9, 1.999];
    alphas.extend((0..8).map(|_| rng.gen_range(1.05..1.99)));
    let mut worst_ratio = f64::INFINITY;
    for &alpha in &alphas {
        let mut values = Vec::new();
        for j in 1..=6 {
            let r1 = 10f64.powi(-j);
            let v = i_star(&q, Complex64::new(0.0, 0.0), r1, r2, alpha).map_err(|e| e.to_string())?.value;
            let oracle = i_star_oracle(r1, r2, alpha);
            if rel(v, oracle) > 1e-6 {
                return Err(format!("α={alpha}, r1={r1}: {v} vs oracle {oracle}"));
            }
            values.push(v);
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(format!("α={alpha}: not increasing {values:?}"));
        }
        worst_ratio = worst_ratio.min(values[5] / values[0]);
    }
    check(worst_ratio > 10.0, format!("{} orders, smallest I*(1e-6)/I*(1e-1) = {worst_ratio:.2}", alphas.len()))
}

fn sobolev() -> Outcome {
    let radii: Vec<f64> = (0..=10).map(|j| 0.5 * 0.5f64.powi(j)).collect();
    let sec4 = sobolev_membership_probe(&MappingSpec::sec4(1.5).unwrap(), 1.5, &radii).map_err(|e| e.to_string())?;
    let inv = sobolev_membership_probe(&MappingSpec::inversion(), 2.0, &radii).map_err(|e| e.to_string())?;
    check(
        sec4.verdict == SobolevVerdict::Convergent && inv.verdict == SobolevVerdict::Divergent,
        format!("example map {:?}, inversion {:?}", sec4.verdict, inv.verdict),
    )
}

fn determinism() -> Outcome {
    let config = CampaignConfig::default_campaign();
    let a = run_campaign(&config).map_err(|e| e.to_string())?;
    let b = run_campaign(&config).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| run_campaign(&config)).map_err(|e| e.to_string())?;
    let same = render_text(&a) == render_text(&b)
        && render_json(&a) == render_json(&b)
        && render_text(&a) == render_text(&c)
        && render_json(&a) == render_json(&c);
    check(
        same && a.all_pass(),
        format!("{} instances, {} pass, reports identical across runs and thread counts: {same}", a.summary.total, a.summary.pass),
    )
}

const CASES: usize = 100;

fn random_pair(rng: &mut ChaCha8Rng) -> WirtingerPair {
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    WirtingerPair::new(c(rng), c(rng))
}

fn registry_maps() -> Vec<MappingSpec> {
    vec![
        MappingSpec::identity(),
        MappingSpec::affine(Complex64::new(2.0, 0.5), Complex64::new(0.3, -0.4)),
        MappingSpec::power(3).unwrap(),
        MappingSpec::radial_power(1.7).unwrap(),
        MappingSpec::sec4(1.5).unwrap(),
        MappingSpec::inversion(),
    ]
}

/// Analytic versus finite-difference pairs, with the error shrinking like
/// `h²` where it sits above rounding.
fn derivative_suite(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut violations = 0;
    let maps: Vec<_> =
        registry_maps().into_iter().filter(|m| m.analytic_derivative(Complex64::new(0.5, 0.1)).is_some()).collect();
    for k in 0..CASES {
        let map = &maps[k % maps.len()];
        let z = Complex64::from_polar(rng.gen_range(0.2..0.9), rng.gen_range(0.0..2.0 * PI));
        let exact = map.analytic_derivative(z).expect("filtered above").map_err(|e| e.to_string())?;
        let err = |h: f64| -> Result<f64, String> {
            let n = numeric_wirtinger(map, z, Some(h)).map_err(|e| e.to_string())?.pair;
            Ok(((n.fz - exact.fz).norm() + (n.fzbar - exact.fzbar).norm()) / exact.norm().max(1.0))
        };
        let (e1, e2) = (err(1e-3)?, err(5e-4)?);
        let quadratic = e1 < 1e-9 || (e1 / e2 > 3.0 && e1 / e2 < 5.0);
        if !(e2 < 1e-5 && quadratic) {
            violations += 1;
        }
    }
    Ok(violations)
}

fn sandwich_suite(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut violations = 0;
    let opts = CapacityOptions {
        family: FamilySpec { n_angles: 24, n_perturb: 8, n_radii: 24, seed: 1 },
        resolution: ResolutionSpec::new(32, 32),
    };
    for k in 0..CASES {
        let map = match k % 4 {
            0 => MappingSpec::affine(
                Complex64::new(rng.gen_range(1.0..2.0), rng.gen_range(-0.5..0.5)),
                Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)),
            ),
            1 => MappingSpec::power(rng.gen_range(2..5)).unwrap(),
            2 => MappingSpec::radial_power(rng.gen_range(0.5..2.0)).unwrap(),
            _ => MappingSpec::sec4(rng.gen_range(1.1..1.9)).unwrap(),
        };
        let r1: f64 = rng.gen_range(0.1..0.4);
        let r2 = (r1 * rng.gen_range(1.5..2.5)).min(0.95);
        let p = rng.gen_range(1.2..3.0);
        let ring = RingCondenser::new(Complex64::new(0.0, 0.0), r1, r2).unwrap();
        let e = condenser_capacity(&ring, p, Some(&map), &opts).map_err(|e| format!("{map}: {e}"))?;
        if !(e.lower <= e.upper) {
            violations += 1;
        }
    }
    Ok(violations)
}

fn monotonicity_suite(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut violations = 0;
    let grid = ResolutionSpec::new(32, 32).fixed();
    for _ in 0..CASES {
        let r2 = rng.gen_range(1.5..4.0);
        let ring = RingCondenser::new(Complex64::new(0.0, 0.0), 1.0, r2).unwrap();
        let p = rng.gen_range(1.2..3.0);
        let full = generate_joining_family(&ring, 16, 8, rng.gen()).unwrap();
        let keep = rng.gen_range(1..full.len());
        let sub = CurveFamily::new(full.kind, ring, full.curves[..keep].to_vec());
        let small = restricted_modulus_lower(&sub, p, &grid).map_err(|e| e.to_string())?;
        let big = restricted_modulus_lower(&full, p, &grid).map_err(|e| e.to_string())?;
        if small.lower > big.lower * (1.0 + 1e-6) + 1e-12 {
            violations += 1;
        }
    }
    Ok(violations)
}

fn scaling_suite(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    for _ in 0..CASES {
        let pair = random_pair(rng);
        let c: f64 = rng.gen_range(0.1..10.0);
        let p = rng.gen_range(1.0..4.0);
        let base = inner_dilatation(&pair, p).value();
        let scaled = inner_dilatation(&WirtingerPair::new(pair.fz * c, pair.fzbar * c), p).value();
        let expected = c.powf(2.0 - p) * base;
        let ok = if base.is_finite() { rel(scaled, expected) < 1e-10 } else { scaled.is_infinite() };
        if !ok {
            violations += 1;
        }
    }
    violations
}

fn invariant_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = derivative_suite(&mut rng)?;
    let s = sandwich_suite(&mut rng)?;
    let m = monotonicity_suite(&mut rng)?;
    let c = scaling_suite(&mut rng);
    check(
        d + s + m + c == 0,
        format!("violations over {CASES} cases each: derivatives {d}, sandwich {s}, monotonicity {m}, scaling {c}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("dilatation identity of the example map", dilatation_identity),
        ("identity-map equality case", identity_equality),
        ("branched square map", branched_square),
        ("capacity/separating duality", duality),
        ("lower-Q equality case", lower_q_equality),
        ("I* divergence probe", divergence_probe),
        ("Sobolev membership probe", sobolev),
        ("campaign determinism", determinism),
        ("invariant suites", invariant_suites),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(msg) => println!("acceptance {} PASS  {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("acceptance {} FAIL  {name}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
