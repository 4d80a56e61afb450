//! Stage driver: surface → histogram → cuts → fits and tilt, with the oracle check on the side.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::manifest::{emit_config, load_preset, Output, RunManifest, PRESETS};
use super::output::{cut_csv, cut_dat, file_header, grid_csv, singles_csv, OutputDir};
use crate::analysis::{
    analytic_cut, estimate_tilt, expected_tilt_degrees, extract_cut, fit_fringe,
    marginal_visibility, predicted_period, CutKind, CutProfile, FringeFit, MarginalVisibility,
    Tilt,
};
use crate::error::{Error, Result};
use crate::montecarlo::{sample_events, CoincidenceHistogram};
use crate::physics::{oracle_check, rate_surface, Arm, OracleCheck, RateSurface};

/// Version of the summary document layout.
pub const SCHEMA_VERSION: &str = "1.0.0";
pub const SUMMARY_FILE: &str = "summary.json";

/// Analytic stripe-angle tolerance (degrees) for nondegenerate and degenerate patterns.
pub const TILT_TOLERANCE_ANALYTIC: f64 = 0.3;
pub const TILT_TOLERANCE_DEGENERATE: f64 = 0.2;
pub const TILT_TOLERANCE_HISTOGRAM: f64 = 0.6;
/// Allowed relative error of analytic-cut periods against the closed form.
pub const PERIOD_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutFit {
    pub cut: CutKind,
    pub predicted_period_m: Option<f64>,
    pub fit: FringeFit<f64>,
    /// `|fitted − predicted| / predicted`, when a prediction exists.
    pub period_relative_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltReport {
    pub tilt: Tilt<f64>,
    pub expected_degrees: f64,
    pub off_diagonal_degrees: f64,
    pub error_degrees: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramInfo {
    pub total_events: u64,
    pub binned_events: u64,
    pub n_bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceResults<V> {
    pub analytic: Option<V>,
    pub histogram: Option<V>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: String,
    pub format_version: String,
    pub config: BTreeMap<String, String>,
    pub predicted_periods_m: BTreeMap<String, Option<f64>>,
    pub expected_tilt_degrees: f64,
    pub histogram: Option<HistogramInfo>,
    pub fits: SourceResults<Vec<CutFit>>,
    pub tilt: SourceResults<TiltReport>,
    pub singles: Option<Vec<MarginalVisibility<f64>>>,
    pub oracle_check: Option<OracleCheck>,
    pub self_checks: Vec<SelfCheck>,
    pub files: Vec<String>,
    pub status: String,
}

impl<V> Default for SourceResults<V> {
    fn default() -> Self {
        Self {
            analytic: None,
            histogram: None,
        }
    }
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.self_checks.iter().all(|c| c.passed)
    }
}

/// What a completed run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: Summary,
    pub surface: Option<RateSurface<f64>>,
    pub histogram: Option<CoincidenceHistogram<f64>>,
    /// Final paths, including any `.partial` suffix.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 when every self-check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.passed() {
            0
        } else {
            2
        }
    }
}

fn config_snapshot(manifest: &RunManifest) -> BTreeMap<String, String> {
    emit_config(manifest)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn tilt_report(tilt: Tilt<f64>, expected: f64) -> TiltReport {
    TiltReport {
        tilt,
        expected_degrees: expected,
        off_diagonal_degrees: tilt.off_diagonal_degrees(),
        error_degrees: (tilt.angle_degrees - expected).abs(),
    }
}

fn fit_cuts(manifest: &RunManifest, cuts: &[CutProfile<f64>]) -> Result<Vec<CutFit>> {
    let cfg = &manifest.experiment;
    cuts.iter()
        .map(|cut| {
            let fit = fit_fringe(cut, cfg)?;
            let predicted = predicted_period(cfg, cut.kind()).ok();
            Ok(CutFit {
                cut: cut.kind(),
                predicted_period_m: predicted,
                period_relative_error: predicted.map(|p| (fit.period - p).abs() / p),
                fit,
            })
        })
        .collect()
}

fn check(name: &str, passed: bool, detail: String) -> SelfCheck {
    SelfCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Executes the stages requested by `manifest` and writes their outputs.
///
/// Returns `Err` when a stage fails; the files written up to that point are renamed
/// with a `.partial` suffix. A run whose self-checks fail still returns `Ok`, with
/// the same renaming applied and [`RunOutcome::exit_code`] equal to 2.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    let mut manifest = manifest.clone();
    manifest.normalize()?;
    let mut out = OutputDir::create(&manifest.output_dir)?;
    match execute(&manifest, &mut out) {
        Ok(mut outcome) => {
            if !outcome.summary.passed() {
                out.mark_partial()?;
            }
            outcome.files = out.written().to_vec();
            Ok(outcome)
        }
        Err(e) => {
            out.mark_partial()?;
            Err(e)
        }
    }
}

fn execute(manifest: &RunManifest, out: &mut OutputDir) -> Result<RunOutcome> {
    let cfg = &manifest.experiment;
    let header = file_header(manifest);
    let wants_analysis = manifest.wants(Output::Cuts)
        || manifest.wants(Output::Fits)
        || manifest.wants(Output::Tilt);
    let mut checks = Vec::new();
    let expected_tilt = expected_tilt_degrees(cfg);
    let tilt_tolerance = if cfg.is_degenerate() {
        TILT_TOLERANCE_DEGENERATE
    } else {
        TILT_TOLERANCE_ANALYTIC
    };

    let surface = if manifest.wants(Output::Surface) || wants_analysis {
        let surface = rate_surface(cfg, manifest.n_bins)?;
        if manifest.wants(Output::Surface) {
            out.write("surface.csv", &grid_csv(&header, &surface, false))?;
        }
        Some(surface)
    } else {
        None
    };

    let histogram = match (manifest.wants(Output::Histogram), manifest.sampler) {
        (true, Some(sampler)) => {
            let hist = sample_events(cfg, &sampler)?;
            out.write("histogram.csv", &grid_csv(&header, &hist, true))?;
            let centres = hist.centres(Arm::D1).to_vec();
            out.write(
                "singles.csv",
                &singles_csv(
                    &header,
                    &centres,
                    hist.singles(Arm::D1),
                    hist.singles(Arm::D2),
                ),
            )?;
            if !sampler.poisson_noise {
                let binned: u64 = hist.counts().iter().sum();
                checks.push(check(
                    "event-conservation",
                    binned == hist.total_events(),
                    format!("{binned} binned of {} drawn", hist.total_events()),
                ));
            }
            Some(hist)
        }
        (true, None) => {
            return Err(Error::InvalidArgument(
                "histogram requested without sampler settings".into(),
            ))
        }
        _ => None,
    };

    let mut analytic_cuts = Vec::new();
    let mut histogram_cuts = Vec::new();
    if manifest.wants(Output::Cuts) || manifest.wants(Output::Fits) {
        for kind in CutKind::ALL {
            analytic_cuts.push(analytic_cut(cfg, kind, manifest.cut_points)?);
            if let Some(hist) = &histogram {
                histogram_cuts.push(extract_cut(hist, kind, manifest.n_bins)?);
            }
        }
    }
    if manifest.wants(Output::Cuts) {
        for (source, cuts) in [("analytic", &analytic_cuts), ("histogram", &histogram_cuts)] {
            for cut in cuts {
                let stem = format!("cut_{source}_{}", cut.kind().slug());
                out.write(&format!("{stem}.csv"), &cut_csv(&header, cut))?;
                out.write(&format!("{stem}.dat"), &cut_dat(&header, cut))?;
            }
        }
    }

    let mut fits = SourceResults::default();
    if manifest.wants(Output::Fits) {
        let analytic = fit_cuts(manifest, &analytic_cuts)?;
        for f in &analytic {
            if let Some(err) = f.period_relative_error {
                let spanned =
                    2.0 * cfg.window_halfwidth() / f.predicted_period_m.unwrap_or(f64::INFINITY);
                if spanned >= crate::analysis::MIN_PERIODS_SPANNED {
                    checks.push(check(
                        &format!("period-{}", f.cut.slug()),
                        f.fit.converged && err <= PERIOD_TOLERANCE,
                        format!("fitted {:.6e} m, relative error {err:.2e}", f.fit.period),
                    ));
                }
            }
        }
        fits.analytic = Some(analytic);
        if !histogram_cuts.is_empty() {
            fits.histogram = Some(fit_cuts(manifest, &histogram_cuts)?);
        }
    }

    let mut tilt = SourceResults::default();
    if manifest.wants(Output::Tilt) {
        if let Some(surface) = &surface {
            let report = tilt_report(estimate_tilt(surface)?, expected_tilt);
            checks.push(check(
                "tilt-analytic",
                report.error_degrees <= tilt_tolerance,
                format!(
                    "{:.4} deg, expected {expected_tilt:.4}",
                    report.tilt.angle_degrees
                ),
            ));
            tilt.analytic = Some(report);
        }
        if let Some(hist) = &histogram {
            let report = tilt_report(estimate_tilt(hist)?, expected_tilt);
            checks.push(check(
                "tilt-histogram",
                report.error_degrees <= TILT_TOLERANCE_HISTOGRAM,
                format!(
                    "{:.4} deg, expected {expected_tilt:.4}",
                    report.tilt.angle_degrees
                ),
            ));
            tilt.histogram = Some(report);
        }
    }

    // Singles analysis needs a window spanning several single-photon periods.
    let singles = histogram.as_ref().and_then(|hist| {
        [Arm::D1, Arm::D2]
            .into_iter()
            .map(|arm| marginal_visibility(hist, cfg, arm).ok())
            .collect::<Option<Vec<_>>>()
    });

    let oracle = if manifest.wants(Output::OracleCheck) {
        let result = oracle_check(cfg, manifest.n_bins, manifest.quadrature_points)?;
        checks.push(check(
            "oracle-equivalence",
            result.passed,
            format!(
                "max deviation {:.3e}, quadrature change {:.3e}",
                result.max_deviation, result.quadrature_change
            ),
        ));
        Some(result)
    } else {
        None
    };

    let predicted_periods_m = CutKind::ALL
        .into_iter()
        .map(|k| (k.slug().to_string(), predicted_period(cfg, k).ok()))
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    let files = out
        .written()
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let summary = Summary {
        schema_version: SCHEMA_VERSION.to_string(),
        format_version: manifest.format_version.clone(),
        config: config_snapshot(manifest),
        predicted_periods_m,
        expected_tilt_degrees: expected_tilt,
        histogram: histogram.as_ref().map(|h| HistogramInfo {
            total_events: h.total_events(),
            binned_events: h.counts().iter().sum(),
            n_bins: h.n_bins(),
            seed: h.sampler().seed,
        }),
        fits,
        tilt,
        singles,
        oracle_check: oracle,
        self_checks: checks,
        files,
        status: if passed { "ok" } else { "self-check-failed" }.to_string(),
    };
    if manifest.wants(Output::Summary) {
        let mut json = serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::InvalidArgument(format!("summary serialization: {e}")))?;
        json.push('\n');
        out.write(SUMMARY_FILE, &json)?;
    }
    Ok(RunOutcome {
        summary,
        surface,
        histogram,
        files: Vec::new(),
    })
}

/// Settings shared by every preset in [`reproduce_fig4`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub events: Option<u64>,
    pub bins: Option<usize>,
    pub envelope: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, manifest: &mut RunManifest) -> Result<()> {
        if let Some(envelope) = self.envelope {
            manifest.experiment = manifest.experiment.with_envelope(envelope);
        }
        if self.seed.is_some() || self.events.is_some() {
            let mut sampler = manifest.sampler.unwrap_or_default();
            sampler.n_bins = manifest.n_bins;
            if let Some(seed) = self.seed {
                sampler.seed = seed;
            }
            if let Some(events) = self.events {
                sampler.n_events = events;
            }
            manifest.sampler = Some(sampler);
        }
        if let Some(bins) = self.bins {
            manifest.set_bins(bins)?;
        }
        manifest.normalize()
    }
}

/// Runs all four bundled presets with every output into `<root>/<preset>/`.
pub fn reproduce_fig4(root: &Path, overrides: &Overrides) -> Result<Vec<(String, RunOutcome)>> {
    PRESETS
        .iter()
        .map(|(name, _)| {
            let mut manifest = load_preset(name)?.with_outputs(&Output::ALL)?;
            overrides.apply(&mut manifest)?;
            manifest.output_dir = root.join(name);
            Ok((name.to_string(), run(&manifest)?))
        })
        .collect()
}
