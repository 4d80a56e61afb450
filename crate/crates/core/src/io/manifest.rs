//! Run manifests and the key-value configuration format.
//!
//! ```text
//! # comment
//! key = value        # trailing comments are allowed
//! ```
//!
//! One assignment per line; keys may appear at most once. Lengths carry a unit
//! suffix (`nm`, `um`, `µm`, `mm`, `cm`, `m`). Recognized keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `scheme` | `I` or `II` | required |
//! | `lambda1`, `lambda2` | length | required |
//! | `slit_spacing`, `slit_width`, `distance` | length | required |
//! | `window` | length, scan half-width | `3mm` |
//! | `envelope` | `true`/`false` | `true` |
//! | `n_bins` | surface and histogram bins per axis | `64` |
//! | `quadrature` | oracle nodes per slit | `64` |
//! | `cut_points` | samples per analytic cut | `257` |
//! | `events`, `seed`, `poisson_noise`, `chunk_size` | sampler settings | `1000000`, `42`, `false`, `65536` |
//! | `outputs` | comma list of `surface`, `histogram`, `cuts`, `fits`, `tilt`, `oracle-check`, `summary` | `surface, summary` |
//! | `output_dir` | path | `out` |
//! | `format_version` | semantic version | current |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::units::{format_length, parse_length};
use crate::error::{Error, Result};
use crate::montecarlo::{SamplerConfig, DEFAULT_BINS};
use crate::physics::{ExperimentConfig, ExperimentParams, Scheme, DEFAULT_QUADRATURE_POINTS};

/// Version of the emitted file formats.
pub const FORMAT_VERSION: &str = "1.0.0";
pub const DEFAULT_WINDOW: f64 = 3e-3;
pub const DEFAULT_CUT_POINTS: usize = 257;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Surface,
    Histogram,
    Cuts,
    Fits,
    Tilt,
    OracleCheck,
    Summary,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Output::Surface,
        Output::Histogram,
        Output::Cuts,
        Output::Fits,
        Output::Tilt,
        Output::OracleCheck,
        Output::Summary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Surface => "surface",
            Output::Histogram => "histogram",
            Output::Cuts => "cuts",
            Output::Fits => "fits",
            Output::Tilt => "tilt",
            Output::OracleCheck => "oracle-check",
            Output::Summary => "summary",
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s.trim())
            .ok_or_else(|| Error::config("outputs", format!("unknown output `{}`", s.trim())))
    }
}

/// Everything needed to execute one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: ExperimentConfig<f64>,
    /// Present whenever a histogram is requested.
    pub sampler: Option<SamplerConfig>,
    pub n_bins: usize,
    pub quadrature_points: usize,
    pub cut_points: usize,
    /// Sorted, without duplicates, never empty.
    pub requested_outputs: Vec<Output>,
    pub output_dir: PathBuf,
    pub format_version: String,
}

impl RunManifest {
    /// A manifest with default settings for `experiment`.
    pub fn new(experiment: ExperimentConfig<f64>, outputs: &[Output]) -> Result<Self> {
        let mut m = Self {
            experiment,
            sampler: None,
            n_bins: DEFAULT_BINS,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            cut_points: DEFAULT_CUT_POINTS,
            requested_outputs: outputs.to_vec(),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            format_version: FORMAT_VERSION.to_string(),
        };
        m.normalize()?;
        Ok(m)
    }

    pub fn wants(&self, output: Output) -> bool {
        self.requested_outputs.contains(&output)
    }

    /// Replaces the requested outputs, keeping the manifest invariants.
    pub fn with_outputs(mut self, outputs: &[Output]) -> Result<Self> {
        self.requested_outputs = outputs.to_vec();
        self.normalize()?;
        Ok(self)
    }

    /// Sets the bin count for surfaces and histograms alike.
    pub fn set_bins(&mut self, n_bins: usize) -> Result<()> {
        self.n_bins = n_bins;
        if let Some(s) = self.sampler.as_mut() {
            s.n_bins = n_bins;
        }
        self.normalize()
    }

    /// Sorts outputs, fills in a sampler when a histogram is requested and validates.
    pub fn normalize(&mut self) -> Result<()> {
        self.requested_outputs.sort();
        self.requested_outputs.dedup();
        if self.requested_outputs.is_empty() {
            return Err(Error::config(
                "outputs",
                "at least one output must be requested",
            ));
        }
        if self.wants(Output::Histogram) && self.sampler.is_none() {
            self.sampler = Some(SamplerConfig {
                n_bins: self.n_bins,
                ..SamplerConfig::default()
            });
        }
        if self.n_bins < 32 {
            return Err(Error::config(
                "n_bins",
                "n_bins >= 32 (tilt estimation needs 32x32)",
            ));
        }
        if self.quadrature_points < crate::physics::MIN_QUADRATURE_POINTS {
            return Err(Error::config("quadrature", "quadrature >= 16"));
        }
        if self.cut_points < crate::analysis::MIN_CUT_POINTS {
            return Err(Error::config("cut_points", "cut_points >= 16"));
        }
        if let Some(s) = &self.sampler {
            if s.n_bins != self.n_bins {
                return Err(Error::config("n_bins", "sampler and surface bins differ"));
            }
            s.validate()?;
        }
        let major = self.format_version.split('.').next().unwrap_or("");
        let ours = FORMAT_VERSION.split('.').next().unwrap_or("");
        if self.format_version.split('.').count() != 3
            || self
                .format_version
                .split('.')
                .any(|p| p.parse::<u64>().is_err())
        {
            return Err(Error::config(
                "format_version",
                "expected MAJOR.MINOR.PATCH",
            ));
        }
        if major != ours {
            return Err(Error::config(
                "format_version",
                format!("major version {major} is not supported (expected {ours})"),
            ));
        }
        Ok(())
    }
}

const KNOWN_KEYS: [&str; 18] = [
    "scheme",
    "lambda1",
    "lambda2",
    "slit_spacing",
    "slit_width",
    "distance",
    "window",
    "envelope",
    "n_bins",
    "quadrature",
    "cut_points",
    "events",
    "seed",
    "poisson_noise",
    "chunk_size",
    "outputs",
    "output_dir",
    "format_version",
];

/// Reads and validates a manifest from a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn split_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: index + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse {
                line: index + 1,
                message: "empty key".into(),
            });
        }
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::Parse {
                line: index + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(entries)
}

fn parse_value<V: FromStr>(field: &str, text: &str) -> Result<V> {
    text.parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{text}`")))
}

fn parse_bool(field: &str, text: &str) -> Result<bool> {
    match text {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(Error::config(
            field,
            format!("expected true or false, got `{text}`"),
        )),
    }
}

/// Parses the key-value config format into a validated manifest.
pub fn parse_config(text: &str) -> Result<RunManifest> {
    let mut entries = split_entries(text)?;
    let unknown: Vec<String> = entries
        .keys()
        .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }
    let mut take = |key: &str| entries.remove(key);
    let required = |key: &str, v: Option<String>| {
        v.ok_or_else(|| Error::config(key, "required key is missing"))
    };

    let scheme: Scheme = required("scheme", take("scheme"))?.parse()?;
    let length =
        |key: &str, v: Option<String>| -> Result<f64> { parse_length(key, &required(key, v)?) };
    let lambda1 = length("lambda1", take("lambda1"))?;
    let lambda2 = length("lambda2", take("lambda2"))?;
    let slit_spacing = length("slit_spacing", take("slit_spacing"))?;
    let slit_width = length("slit_width", take("slit_width"))?;
    let distance = length("distance", take("distance"))?;
    let window_halfwidth = match take("window") {
        Some(v) => parse_length("window", &v)?,
        None => DEFAULT_WINDOW,
    };
    let envelope = match take("envelope") {
        Some(v) => parse_bool("envelope", &v)?,
        None => true,
    };
    let experiment = ExperimentConfig::new(ExperimentParams {
        scheme,
        lambda1,
        lambda2,
        slit_spacing,
        slit_width,
        distance,
        window_halfwidth,
        envelope,
    })?;

    let n_bins = take("n_bins")
        .map(|v| parse_value("n_bins", &v))
        .transpose()?;
    let quadrature_points = take("quadrature")
        .map(|v| parse_value("quadrature", &v))
        .transpose()?;
    let cut_points = take("cut_points")
        .map(|v| parse_value("cut_points", &v))
        .transpose()?;
    let events = take("events")
        .map(|v| parse_value("events", &v))
        .transpose()?;
    let seed = take("seed").map(|v| parse_value("seed", &v)).transpose()?;
    let poisson = take("poisson_noise")
        .map(|v| parse_bool("poisson_noise", &v))
        .transpose()?;
    let chunk_size = take("chunk_size")
        .map(|v| parse_value("chunk_size", &v))
        .transpose()?;
    let outputs = match take("outputs") {
        Some(v) => v
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Output>>>()?,
        None => vec![Output::Surface, Output::Summary],
    };
    let output_dir = take("output_dir").map(PathBuf::from);
    let format_version = take("format_version");

    let n_bins = n_bins.unwrap_or(DEFAULT_BINS);
    let any_sampler_key =
        events.is_some() || seed.is_some() || poisson.is_some() || chunk_size.is_some();
    let sampler = any_sampler_key.then(|| {
        let d = SamplerConfig::default();
        SamplerConfig {
            n_events: events.unwrap_or(d.n_events),
            seed: seed.unwrap_or(d.seed),
            n_bins,
            poisson_noise: poisson.unwrap_or(d.poisson_noise),
            chunk_size: chunk_size.unwrap_or(d.chunk_size),
        }
    });
    let mut manifest = RunManifest {
        experiment,
        sampler,
        n_bins,
        quadrature_points: quadrature_points.unwrap_or(DEFAULT_QUADRATURE_POINTS),
        cut_points: cut_points.unwrap_or(DEFAULT_CUT_POINTS),
        requested_outputs: outputs,
        output_dir: output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        format_version: format_version.unwrap_or_else(|| FORMAT_VERSION.to_string()),
    };
    manifest.normalize()?;
    Ok(manifest)
}

/// Writes a manifest in the config format; [`parse_config`] reproduces it exactly.
pub fn emit_config(m: &RunManifest) -> String {
    let p = m.experiment.params();
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("scheme", p.scheme.to_string());
    line("lambda1", format_length(p.lambda1));
    line("lambda2", format_length(p.lambda2));
    line("slit_spacing", format_length(p.slit_spacing));
    line("slit_width", format_length(p.slit_width));
    line("distance", format_length(p.distance));
    line("window", format_length(p.window_halfwidth));
    line("envelope", p.envelope.to_string());
    line("n_bins", m.n_bins.to_string());
    line("quadrature", m.quadrature_points.to_string());
    line("cut_points", m.cut_points.to_string());
    if let Some(s) = &m.sampler {
        line("events", s.n_events.to_string());
        line("seed", s.seed.to_string());
        line("poisson_noise", s.poisson_noise.to_string());
        line("chunk_size", s.chunk_size.to_string());
    }
    let outputs: Vec<&str> = m.requested_outputs.iter().map(|o| o.name()).collect();
    line("outputs", outputs.join(", "));
    line("output_dir", m.output_dir.display().to_string());
    line("format_version", m.format_version.clone());
    out
}

/// Bundled configurations, one per panel of the two-axis measurement figure.
pub const PRESETS: [(&str, &str); 4] = [
    (
        "scheme1-degenerate-800nm",
        include_str!("../../presets/scheme1-degenerate-800nm.conf"),
    ),
    (
        "scheme1-nondegenerate",
        include_str!("../../presets/scheme1-nondegenerate.conf"),
    ),
    (
        "scheme2-degenerate-800nm",
        include_str!("../../presets/scheme2-degenerate-800nm.conf"),
    ),
    (
        "scheme2-nondegenerate",
        include_str!("../../presets/scheme2-nondegenerate.conf"),
    ),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn load_preset(name: &str) -> Result<RunManifest> {
    parse_config(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn presets_carry_reference_geometry() {
        let m = load_preset("scheme1-degenerate-800nm").unwrap();
        let p = m.experiment.params();
        assert_eq!(p.scheme, Scheme::SchemeI);
        assert_eq!((p.lambda1, p.lambda2), (800e-9, 800e-9));
        assert_eq!(
            (p.slit_spacing, p.slit_width, p.distance),
            (400e-6, 100e-6, 0.547)
        );
        assert_eq!(p.window_halfwidth, 3e-3);
        assert_eq!((m.n_bins, m.quadrature_points), (64, 64));

        let m = load_preset("scheme2-nondegenerate").unwrap();
        let p = m.experiment.params();
        assert_eq!(p.scheme, Scheme::SchemeII);
        assert_eq!((p.lambda1, p.lambda2, p.distance), (760e-9, 840e-9, 0.303));
        assert!(load_preset("scheme3").is_err());
        assert_eq!(preset_names().count(), 4);
    }

    #[test]
    fn named_constraint_on_wide_slits() {
        let text = preset_text("scheme1-nondegenerate")
            .unwrap()
            .replace("100um", "500um");
        match parse_config(&text) {
            Err(Error::InvalidConfig { field, constraint }) => {
                assert_eq!(field, "slit_width");
                assert!(constraint.contains("slit_spacing > slit_width"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_listed() {
        let text = format!(
            "{}\ncolour = red\nzoom = 2\n",
            preset_text("scheme1-nondegenerate").unwrap()
        );
        match parse_config(&text) {
            Err(Error::UnknownKeys(keys)) => assert_eq!(keys, vec!["colour", "zoom"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_config("scheme I"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("scheme = I\nscheme = II"),
            Err(Error::Parse { line: 2, .. })
        ));
        let missing = "scheme = I\nlambda1 = 800nm\n";
        assert!(matches!(
            parse_config(missing),
            Err(Error::InvalidConfig { .. })
        ));
        let bad_version = format!(
            "{}format_version = 2.0.0\n",
            preset_text("scheme1-nondegenerate").unwrap()
        );
        assert!(parse_config(&bad_version).is_err());
    }

    #[test]
    fn histogram_output_implies_sampler() {
        let text = format!(
            "{}outputs = histogram\n",
            preset_text("scheme1-nondegenerate").unwrap()
        );
        let m = parse_config(&text).unwrap();
        assert_eq!(m.sampler.unwrap().seed, 42);
        assert_eq!(m.sampler.unwrap().n_events, 1_000_000);
    }

    fn arb_manifest() -> impl Strategy<Value = RunManifest> {
        (
            any::<bool>(),
            400e-9..1200e-9f64,
            400e-9..1200e-9f64,
            200e-6..600e-6f64,
            0.1..0.9f64,
            0.2..1.5f64,
            0.1..0.9f64,
            any::<bool>(),
            proptest::option::of((
                1u64..10_000_000,
                any::<u64>(),
                any::<bool>(),
                1u64..1_000_000,
            )),
            proptest::sample::subsequence(Output::ALL.to_vec(), 1..=7),
            32usize..256,
            "[a-z][a-z0-9_/]{0,12}",
        )
            .prop_map(
                |(two, l1, l2, d, bfrac, z, wfrac, env, sampler, outputs, bins, dir)| {
                    let w = wfrac * (0.049 * z - d);
                    let experiment = ExperimentConfig::new(ExperimentParams {
                        scheme: if two {
                            Scheme::SchemeII
                        } else {
                            Scheme::SchemeI
                        },
                        lambda1: l1,
                        lambda2: l2,
                        slit_spacing: d,
                        slit_width: bfrac * d,
                        distance: z,
                        window_halfwidth: w,
                        envelope: env,
                    })
                    .unwrap();
                    let mut m = RunManifest::new(experiment, &outputs).unwrap();
                    m.sampler = sampler.map(|(n, seed, poisson, chunk)| SamplerConfig {
                        n_events: n,
                        seed,
                        n_bins: 64,
                        poisson_noise: poisson,
                        chunk_size: chunk,
                    });
                    m.set_bins(bins).unwrap();
                    m.output_dir = PathBuf::from(dir);
                    m
                },
            )
    }

    proptest! {
        #[test]
        fn emit_then_load_is_identity(m in arb_manifest()) {
            let text = emit_config(&m);
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
