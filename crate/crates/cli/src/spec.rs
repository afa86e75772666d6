//! Experiment specification: defaults, JSON config files and flag
//! overrides. Precedence is defaults < config file < command-line flags.

use std::path::PathBuf;

use bootlab::lattice::{EventKind, RuleFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    #[default]
    Simulate,
    Closure,
    Traverse,
    PcSearch,
    Window,
    Droplet,
    Enumerate,
    Asymptotics,
    Variational,
    Paradox,
    Render,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Closure => "closure",
            Self::Traverse => "traverse",
            Self::PcSearch => "pc-search",
            Self::Window => "window",
            Self::Droplet => "droplet",
            Self::Enumerate => "enumerate",
            Self::Asymptotics => "asymptotics",
            Self::Variational => "variational",
            Self::Paradox => "paradox",
            Self::Render => "render",
        }
    }

    /// Format used when `--format` is not given.
    pub fn default_format(self) -> Format {
        match self {
            Self::Simulate | Self::Closure | Self::Traverse | Self::Enumerate => Format::Json,
            Self::Render => Format::Svg,
            _ => Format::Csv,
        }
    }

    pub fn formats(self) -> &'static [Format] {
        match self {
            Self::Closure | Self::Render => &[Format::Json, Format::Csv, Format::Svg, Format::Png],
            Self::PcSearch | Self::Variational => &[Format::Csv, Format::Json, Format::Svg],
            Self::Enumerate | Self::Traverse => &[Format::Json],
            _ => &[Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Png,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
            Self::Png => "png",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnumerateTarget {
    #[default]
    Pairs,
    Infectors,
    Growth,
}

/// Everything a run needs. Every field has a default, so a config file
/// may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: CommandKind,
    pub rule: RuleFamily,
    pub width: usize,
    pub height: usize,
    /// Side lengths for `pc-search` and `window`.
    pub sizes: Vec<usize>,
    pub p: f64,
    /// Densities for `droplet`; falls back to `p` when empty.
    pub p_list: Vec<f64>,
    pub event: EventKind,
    pub trials: u64,
    pub seed: u64,
    /// Worker count; `None` uses the environment default.
    pub workers: Option<usize>,
    pub target: f64,
    pub tol: f64,
    pub eps: f64,
    pub trials_per_probe: u64,
    pub probe_cap: u64,
    pub log_l: Vec<f64>,
    pub b: u32,
    pub eta: f64,
    pub enumerate: EnumerateTarget,
    pub infector_rows: u32,
    pub infector_halfwidth: u32,
    /// `ln(1/p)` for `variational`; overrides `p` when set.
    pub log_inv_p: Option<f64>,
    pub grid_n: usize,
    /// Run the staged-growth experiment instead of the droplet scan.
    pub staged: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            command: CommandKind::Simulate,
            rule: RuleFamily::Anisotropic1b { b: 2 },
            width: 64,
            height: 64,
            sizes: vec![64],
            p: 0.1,
            p_list: Vec::new(),
            event: EventKind::InternallyFilled,
            trials: 1000,
            seed: 0,
            workers: None,
            target: 0.5,
            tol: 0.002,
            eps: 0.1,
            trials_per_probe: 64,
            probe_cap: bootlab::mc::DEFAULT_PROBE_CAP,
            log_l: vec![1e3, 1e6, 1e9, 1e12],
            b: 2,
            eta: 0.0,
            enumerate: EnumerateTarget::Pairs,
            infector_rows: 2,
            infector_halfwidth: 6,
            log_inv_p: None,
            grid_n: 512,
            staged: false,
            out: None,
            format: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(bootlab::par::default_workers)
    }

    /// Checks ranges that the type system does not.
    pub fn validate(&self) -> Result<(), String> {
        if !self.command.formats().contains(&self.format()) {
            return Err(format!(
                "format {:?} is not available for {}",
                self.format(),
                self.command.name()
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err("width and height must be positive".into());
        }
        for &p in std::iter::once(&self.p).chain(&self.p_list) {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("p must lie in [0,1], got {p}"));
            }
        }
        if self.trials == 0 {
            return Err("trials must be positive".into());
        }
        if self.workers == Some(0) {
            return Err("workers must be positive".into());
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err("sizes must be a non-empty list of positive integers".into());
        }
        if self.command == CommandKind::Render && self.width.max(self.height) > 4096 {
            return Err("render is limited to L <= 4096".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let s = ExperimentSpec::default();
        assert_eq!(ExperimentSpec::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let s = ExperimentSpec::from_json(r#"{"command":"pc-search","sizes":[64,256]}"#).unwrap();
        assert_eq!(s.command, CommandKind::PcSearch);
        assert_eq!(s.sizes, vec![64, 256]);
        assert_eq!(s.trials, 1000);
        assert!(ExperimentSpec::from_json(r#"{"nonsense":1}"#).is_err());
    }

    #[test]
    fn format_compatibility() {
        let mut s = ExperimentSpec {
            command: CommandKind::Enumerate,
            ..Default::default()
        };
        assert!(s.validate().is_ok());
        s.format = Some(Format::Png);
        assert!(s.validate().is_err());
    }
}
