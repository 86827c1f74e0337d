use qcmod::campaign::{emit_plot_data, render_json, render_text, run_campaign, CampaignConfig, Outcome, PlotKind};
use qcmod::Error;

const MIXED: &str = r#"
tol = 1e-3

[[instance]]
name = "lower-q identity"
map = "identity"
r1 = 0.1
r2 = 1.0
alpha = 2.0
mode = "lem4"
grid = [128, 64]
curves = [60]

[[instance]]
name = "boundary"
map = "sec4:1.5"
z0 = [1.0, 0.0]
r1 = 0.05
r2 = 0.2
alpha = 1.5
mode = "th2"
grid = [64, 64]
curves = [60, 10]

[[instance]]
name = "constant map"
map = "constant:1,0"
r1 = 0.1
r2 = 0.5
alpha = 1.5
mode = "th1A"

[[instance]]
name = "random eta"
map = "radial:1.5"
r1 = 0.2
r2 = 0.6
alpha = 1.5
mode = "th1"
eta = "random:4:12"
grid = [64, 64]
curves = [60, 10]
"#;

#[test]
fn instance_errors_are_recorded_not_fatal() {
    let bundle = run_campaign(&CampaignConfig::from_toml(MIXED).unwrap()).unwrap();
    assert_eq!(bundle.summary.total, 4);
    assert_eq!(bundle.summary.pass + bundle.summary.fail + bundle.summary.error, 4);
    assert!(matches!(bundle.entries[2].outcome, Outcome::Error { .. }));
    for k in [0, 1, 3] {
        let r = bundle.entries[k].report().unwrap_or_else(|| panic!("{:?}", bundle.entries[k]));
        assert!(r.verdict.is_pass(), "{r:?}");
        assert!(r.lhs.lower <= r.lhs.upper);
    }
    assert_eq!(bundle.exit_code(), 1);
    let names: Vec<_> = bundle.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["lower-q identity", "boundary", "constant map", "random eta"]);
}

#[test]
fn reports_are_reproducible() {
    let config = CampaignConfig::from_toml(MIXED).unwrap();
    let a = run_campaign(&config).unwrap();
    let b = run_campaign(&config).unwrap();
    assert_eq!(render_text(&a), render_text(&b));
    assert_eq!(render_json(&a), render_json(&b));
    let json: serde_json::Value = serde_json::from_str(&render_json(&a)).unwrap();
    assert_eq!(json["summary"]["total"], 4);
}

#[test]
fn text_report_keeps_key_order() {
    let bundle = run_campaign(&CampaignConfig::from_toml(MIXED).unwrap()).unwrap();
    let text = render_text(&bundle);
    let records: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(records.len(), 5);
    let keys: Vec<&str> = records[4].lines().map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(&keys[..4], ["name", "status", "theorem", "map"]);
}

#[test]
fn default_campaign_passes_and_plots() {
    let bundle = run_campaign(&CampaignConfig::default_campaign()).unwrap();
    assert!(bundle.all_pass(), "{}", render_text(&bundle));
    let table = emit_plot_data(&bundle, PlotKind::MarginVsAlpha).unwrap();
    let alphas: Vec<f64> = table.lines().skip(1).map(|l| l.split(' ').nth(1).unwrap().parse().unwrap()).collect();
    assert!(alphas.windows(2).all(|w| w[0] <= w[1]));
    let field = emit_plot_data(&bundle, PlotKind::KField).unwrap();
    for line in field.lines().skip(1).filter(|l| l.starts_with("sec4-")) {
        let cols: Vec<f64> = line.split(' ').skip(1).map(|c| c.parse().unwrap()).collect();
        let expected = 1.0 - cols[0].hypot(cols[1]).ln();
        assert!((cols[2] - expected).abs() < 1e-3 * expected, "{line}");
    }
    let conv = emit_plot_data(&bundle, PlotKind::ModulusConvergence).unwrap();
    assert!(conv.lines().count() > bundle.entries.len());
}

#[test]
fn bad_configs() {
    assert!(matches!(CampaignConfig::from_toml("[[instance]]\nmap = 1\n"), Err(Error::Parse { .. })));
    let alpha3 = MIXED.replacen("alpha = 2.0", "alpha = 3.0", 1);
    let e = CampaignConfig::from_toml(&alpha3).unwrap_err();
    assert!(e.to_string().contains("1<α≤2"), "{e}");
    assert!(CampaignConfig::from_toml(&MIXED.replace("random:4:12", "optimal")).is_err());
    assert!(CampaignConfig::from_toml(&MIXED.replace("mode = \"lem4\"", "mode = \"duality\"")).is_err());
}
