use biphoton::analysis::{
    analytic_cut, estimate_tilt, expected_tilt_degrees, extract_cut, fit_fringe,
    marginal_visibility, predicted_period, CutKind,
};
use biphoton::io::{load_preset, preset_names};
use biphoton::montecarlo::{sample_events, SamplerConfig};
use biphoton::physics::{rate_surface, Arm, Scheme};

// Closed-form periods λ_eff·z/d for the bundled geometries, in meters.
const SCHEME1_PERIODS: [(&str, CutKind, f64); 5] = [
    ("scheme1-nondegenerate", CutKind::FixD2ScanD1, 1.039_3e-3),
    ("scheme1-nondegenerate", CutKind::FixD1ScanD2, 1.148_7e-3),
    ("scheme1-degenerate-800nm", CutKind::FixD2ScanD1, 1.094e-3),
    ("scheme1-degenerate-800nm", CutKind::CoMoving, 0.547e-3),
    ("scheme1-nondegenerate", CutKind::CoMoving, 0.545_632_5e-3),
];
const SCHEME2_PERIODS: [(&str, CutKind, f64); 3] = [
    ("scheme2-nondegenerate", CutKind::FixD2ScanD1, 0.575_7e-3),
    ("scheme2-nondegenerate", CutKind::FixD1ScanD2, 0.636_3e-3),
    (
        "scheme2-nondegenerate",
        CutKind::CounterMoving,
        0.302_242_5e-3,
    ),
];

#[test]
fn analytic_cut_periods_match_closed_form() {
    for (name, kind, period) in SCHEME1_PERIODS.into_iter().chain(SCHEME2_PERIODS) {
        let cfg = load_preset(name).unwrap().experiment;
        let predicted = predicted_period(&cfg, kind).unwrap();
        assert!(
            (predicted / period - 1.0).abs() < 1e-9,
            "{name} {kind}: {predicted}"
        );
        let fit = fit_fringe(&analytic_cut(&cfg, kind, 257).unwrap(), &cfg).unwrap();
        assert!(fit.converged, "{name} {kind}");
        assert!(
            (fit.period / period - 1.0).abs() < 5e-3,
            "{name} {kind}: {}",
            fit.period
        );
    }
}

#[test]
fn difference_frequency_is_wider_than_the_window() {
    for (name, kind, period) in [
        (
            "scheme1-nondegenerate",
            CutKind::CounterMoving,
            10.912_65e-3,
        ),
        ("scheme2-nondegenerate", CutKind::CoMoving, 6.044_85e-3),
    ] {
        let cfg = load_preset(name).unwrap().experiment;
        assert!((predicted_period(&cfg, kind).unwrap() / period - 1.0).abs() < 1e-6);
        let fit = fit_fringe(&analytic_cut(&cfg, kind, 257).unwrap(), &cfg).unwrap();
        assert!(!fit.converged, "{name}: period must be flagged unreliable");
        assert!(fit.periods_spanned < 2.0);
        assert!(
            (fit.period / period - 1.0).abs() < 0.05,
            "{name}: {}",
            fit.period
        );
    }
}

#[test]
fn histogram_cuts_agree_with_analytic_periods() {
    let cfg = load_preset("scheme2-nondegenerate").unwrap().experiment;
    let hist = sample_events(&cfg, &SamplerConfig::default()).unwrap();
    for kind in [
        CutKind::FixD2ScanD1,
        CutKind::FixD1ScanD2,
        CutKind::CounterMoving,
    ] {
        let fit = fit_fringe(&extract_cut(&hist, kind, 64).unwrap(), &cfg).unwrap();
        let predicted = predicted_period(&cfg, kind).unwrap();
        assert!(fit.converged, "{kind}");
        assert!(
            (fit.period / predicted - 1.0).abs() < 0.01,
            "{kind}: {}",
            fit.period
        );
        assert!(fit.visibility > 0.8, "{kind}: {}", fit.visibility);
    }
}

#[test]
fn mirrored_cuts_carry_the_same_profile() {
    // Scheme II equals Scheme I with x2 reflected, so the co-moving cut of one
    // is the counter-moving cut of the other.
    let one = load_preset("scheme1-nondegenerate").unwrap().experiment;
    let two = one.with_scheme(Scheme::SchemeII);
    for kind in CutKind::ALL {
        let a = analytic_cut(&one, kind, 129).unwrap();
        let b = analytic_cut(&two, kind.mirrored(), 129).unwrap();
        for (ya, yb) in a.y().iter().zip(b.y()) {
            assert!((ya - yb).abs() <= 1e-14, "{kind}");
        }
    }
}

#[test]
fn stripe_tilt_of_surfaces_and_histograms() {
    for name in preset_names() {
        let cfg = load_preset(name).unwrap().experiment;
        let expected = expected_tilt_degrees(&cfg);
        let analytic = estimate_tilt(&rate_surface(&cfg, 64).unwrap()).unwrap();
        let tol = if cfg.is_degenerate() { 0.2 } else { 0.3 };
        assert!(
            (analytic.angle_degrees - expected).abs() <= tol,
            "{name}: {analytic:?}"
        );
        let hist = sample_events(&cfg, &SamplerConfig::default()).unwrap();
        let mc = estimate_tilt(&hist).unwrap();
        assert!((mc.angle_degrees - expected).abs() <= 0.6, "{name}: {mc:?}");
    }
}

#[test]
fn singles_show_no_interference() {
    for name in preset_names() {
        let cfg = load_preset(name).unwrap().experiment;
        let hist = sample_events(&cfg, &SamplerConfig::default()).unwrap();
        for arm in [Arm::D1, Arm::D2] {
            let m = marginal_visibility(&hist, &cfg, arm).unwrap();
            assert!(m.visibility < 0.05, "{name} {arm:?}: {m:?}");
        }
    }
}
