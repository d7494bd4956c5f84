//! Experiment config files: parsing, defaults and resolution into core
//! `ExperimentConfig`s.

use hsmdp::calibration::DEFAULT_GRID_POINTS;
use hsmdp::{ExperimentConfig, PriorKind, Rule, TauMethod};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TABLE3: &str = include_str!("../presets/table3.toml");
pub const TABLE4: &str = include_str!("../presets/table4.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub experiment: Section,
    #[serde(rename = "method")]
    pub methods: Vec<MethodEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub n: Vec<usize>,
    pub p0: usize,
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub rule: RuleName,
    #[serde(default)]
    pub cut: Option<f64>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
}

fn default_reps() -> usize {
    200
}

fn default_sigma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    #[default]
    PosteriorProb,
    KappaHalf,
    HardThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauName {
    Oracle,
    Mmle,
    TruncHc,
    HcUntrunc,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LawName {
    #[default]
    #[serde(rename = "hs")]
    Hs,
    #[serde(rename = "hs+")]
    HsPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub tau: TauName,
    #[serde(default)]
    pub law: LawName,
    #[serde(default)]
    pub oracle_value: Option<f64>,
}

/// Fully resolved run: every default is filled in, so its JSON form is a
/// faithful description of what ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub file: ExperimentFile,
    pub runs: Vec<ExperimentConfig>,
}

impl Resolved {
    /// SHA-256 of the canonical JSON of the resolved config.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }
}

pub fn parse(text: &str) -> Result<ExperimentFile, String> {
    toml::from_str(text).map_err(|e| format!("config error: {e}"))
}

/// Applies CLI overrides and expands `n × method` into run configs,
/// `n` ascending and methods in file order.
pub fn resolve(mut file: ExperimentFile, seed: Option<u64>, reps: Option<usize>) -> Result<Resolved, String> {
    let e = &mut file.experiment;
    if let Some(s) = seed {
        e.seed = s;
    }
    if let Some(r) = reps {
        e.reps = r;
    }
    if e.n.is_empty() {
        return Err("config error: experiment.n must list at least one value".into());
    }
    if file.methods.is_empty() {
        return Err("config error: at least one [[method]] is required".into());
    }
    let rule = match e.rule {
        RuleName::PosteriorProb => {
            let c = *e.cut.get_or_insert(0.5);
            Rule::PosteriorProb(c)
        }
        RuleName::KappaHalf => Rule::KappaHalf,
        RuleName::HardThreshold => match e.threshold {
            Some(t) => Rule::HardThreshold(t),
            None => return Err("config error: rule = \"hard-threshold\" needs experiment.threshold".into()),
        },
    };
    let grid_points = *e.grid_points.get_or_insert(DEFAULT_GRID_POINTS);
    e.n.sort_unstable();
    let mut runs = Vec::new();
    for &n in &e.n {
        for (k, m) in file.methods.iter().enumerate() {
            let tau_method = match m.tau {
                TauName::Oracle => TauMethod::oracle(m.oracle_value.unwrap_or(e.p0.max(1) as f64 / n.max(1) as f64)),
                _ if m.oracle_value.is_some() => {
                    return Err(format!("config error: method {}: oracle_value is only valid with tau = \"oracle\"", k + 1))
                }
                TauName::Mmle => TauMethod::mmle(),
                TauName::TruncHc => TauMethod::truncated_half_cauchy(),
                TauName::HcUntrunc => TauMethod::untruncated_half_cauchy(),
                TauName::Uniform => TauMethod::uniform(),
            };
            let tau_method = TauMethod { grid_points, ..tau_method };
            let cfg = ExperimentConfig {
                rule,
                sigma: e.sigma,
                law: match m.law {
                    LawName::Hs => PriorKind::Horseshoe,
                    LawName::HsPlus => PriorKind::HorseshoePlus,
                },
                ..ExperimentConfig::new(n, e.p0, e.amplitude, tau_method, e.reps, e.seed)
            };
            cfg.validate()
                .map_err(|err| format!("config error: n = {n}, method {}: {err}", k + 1))?;
            runs.push(cfg);
        }
    }
    Ok(Resolved { file, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_with_expected_shape() {
        let t3 = resolve(parse(TABLE3).unwrap(), None, None).unwrap();
        let labels: Vec<String> = t3.runs.iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["Oracle HS", "MMLE HS", "TruncHC HS", "MMLE HS+", "HC-untrunc", "Uniform"]);
        let t4 = resolve(parse(TABLE4).unwrap(), None, None).unwrap();
        assert_eq!(t4.runs.len(), 20);
        assert!(t4.runs.windows(2).all(|w| w[0].n <= w[1].n));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = TABLE3.replace("p0 = 10", "p0 = 10\npee0 = 3");
        let e = parse(&bad).unwrap_err();
        assert!(e.contains("pee0") && e.contains("line"), "{e}");
        let bad = TABLE3.replace("law = \"hs+\"", "law = \"hs+\"\nspeed = 2");
        assert!(parse(&bad).unwrap_err().contains("speed"));
    }

    #[test]
    fn overrides_change_digest() {
        let a = resolve(parse(TABLE3).unwrap(), None, None).unwrap();
        let b = resolve(parse(TABLE3).unwrap(), None, Some(1000)).unwrap();
        assert_eq!(b.runs[0].reps, 1000);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), resolve(parse(TABLE3).unwrap(), None, None).unwrap().digest());
        // spelled-out defaults hash like omitted ones
        let explicit = TABLE3.replace("cut = 0.5", "cut = 0.5\ngrid_points = 200");
        assert_eq!(a.digest(), resolve(parse(&explicit).unwrap(), None, None).unwrap().digest());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = TABLE3.replace("p0 = 10", "p0 = 5000");
        assert!(resolve(parse(&bad).unwrap(), None, None).unwrap_err().contains("config error"));
        let bad = TABLE3.replace("rule = \"posterior-prob\"", "rule = \"hard-threshold\"");
        assert!(resolve(parse(&bad).unwrap(), None, None).is_err());
        assert!(resolve(parse(TABLE3).unwrap(), None, Some(0)).is_err());
    }
}
