//! Strict JSON experiment configuration.

use std::path::PathBuf;

use semilab_core::PotentialSpec;
use serde::{Deserialize, Serialize};

/// A pipeline stage selectable in `tasks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Solve,
    Fbi,
    Cauchy,
    Growth,
    Carleman,
    Nodal,
    Doubling,
    Tunneling,
    Vanishing,
    Render,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Fbi => "fbi",
            Task::Cauchy => "cauchy",
            Task::Growth => "growth",
            Task::Carleman => "carleman",
            Task::Nodal => "nodal",
            Task::Doubling => "doubling",
            Task::Tunneling => "tunneling",
            Task::Vanishing => "vanishing",
            Task::Render => "render",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Task::Solve),
            "fbi" => Ok(Task::Fbi),
            "cauchy" => Ok(Task::Cauchy),
            "growth" => Ok(Task::Growth),
            "carleman" => Ok(Task::Carleman),
            "nodal" => Ok(Task::Nodal),
            "doubling" => Ok(Task::Doubling),
            "tunneling" => Ok(Task::Tunneling),
            "vanishing" => Ok(Task::Vanishing),
            "render" => Ok(Task::Render),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

/// Grid resolution: a fixed power of two or `"auto"` (the eigensolver
/// rule `max(64, 16/h)` rounded up to a power of two).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridChoice {
    Fixed(usize),
    Named(String),
}

impl Default for GridChoice {
    fn default() -> Self {
        GridChoice::Named("auto".into())
    }
}

/// Calibrated thresholds echoed into every manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Zero-in-ball radius factor: balls have radius `c_ball * h`.
    pub c_ball: f64,
    /// Cap on the mean-value ratio at nodal balls.
    pub mean_value_cap: f64,
    /// Energy margin defining the allowed region `{V < E - margin}`.
    pub margin: f64,
    /// Frequency threshold for the FBI decay sup.
    pub c0: f64,
    /// Allowed spread of the Cauchy/growth constants across the sweep.
    pub ratio_cap: f64,
    /// Number of equispaced level sets rendered.
    pub n_levels: usize,
    /// Ball radius for the tunneling survey.
    pub tunneling_radius: f64,
    /// Highest derivative order per axis in the Cauchy fit; defaults to
    /// 20 in 1-D and 12 per axis in 2-D when omitted.
    pub alpha_max: Option<u32>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            c_ball: 3.0,
            mean_value_cap: 0.9,
            margin: 0.1,
            c0: 2.0,
            ratio_cap: 2.0,
            n_levels: 10,
            tunneling_radius: 0.1,
            alpha_max: None,
        }
    }
}

impl Thresholds {
    pub fn alpha_max_for(&self, dim: usize) -> u32 {
        self.alpha_max.unwrap_or(if dim == 1 { 20 } else { 12 })
    }
}

fn default_version() -> u32 {
    1
}

fn default_eigencount() -> usize {
    1
}

/// One experiment: a potential, an h-sweep, and the tasks to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub spec_version: u32,
    pub dim: usize,
    #[serde(default)]
    pub grid: GridChoice,
    pub h_list: Vec<f64>,
    pub potential: PotentialSpec,
    pub energy_target: f64,
    #[serde(default = "default_eigencount")]
    pub eigencount: usize,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
    if cfg.spec_version != 1 {
        return Err(format!("unsupported spec_version {}", cfg.spec_version));
    }
    if cfg.dim != 1 && cfg.dim != 2 {
        return Err(format!("dim must be 1 or 2, got {}", cfg.dim));
    }
    if cfg.h_list.is_empty() {
        return Err("h_list must be nonempty".into());
    }
    if cfg.h_list.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err("h_list entries must be positive and finite".into());
    }
    if cfg.h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err("h_list must be strictly decreasing".into());
    }
    if cfg.tasks.is_empty() {
        return Err("tasks must be nonempty".into());
    }
    if cfg.eigencount == 0 {
        return Err("eigencount must be positive".into());
    }
    match &cfg.grid {
        GridChoice::Named(s) if s != "auto" => {
            return Err(format!("grid must be an integer or \"auto\", got {s:?}"));
        }
        GridChoice::Fixed(n) if *n < 16 || !n.is_power_of_two() => {
            return Err(format!("grid must be a power of two >= 16, got {n}"));
        }
        _ => {}
    }
    for b in &cfg.potential.bumps {
        if b.center.len() != cfg.dim {
            return Err(format!(
                "bump center {:?} does not match dim {}",
                b.center, cfg.dim
            ));
        }
        if !(b.width > 0.0) {
            return Err(format!("bump width must be positive, got {}", b.width));
        }
    }
    let t = &cfg.thresholds;
    if !(t.c_ball > 0.0 && t.margin >= 0.0 && t.c0 > 0.0 && t.ratio_cap >= 1.0) {
        return Err("thresholds out of range".into());
    }
    if t.n_levels < 2 {
        return Err("n_levels must be at least 2".into());
    }
    Ok(cfg)
}

/// Grid resolution for one `h` under the config's grid choice.
pub fn resolution(cfg: &ExperimentConfig, h: f64) -> usize {
    match cfg.grid {
        GridChoice::Fixed(n) => n,
        GridChoice::Named(_) => semilab_core::resolution_for(h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(
            r#"{"dim":2,"h_list":[0.1],"potential":{"bumps":[]},"energy_target":1,"tasks":["solve"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.spec_version, 1);
        assert_eq!(cfg.eigencount, 1);
        assert!(cfg.potential.bumps.is_empty());
        assert_eq!(cfg.thresholds.c_ball, 3.0);
    }

    #[test]
    fn figure_potential_round_trips() {
        let cfg = parse_config(
            r#"{"dim":2,"h_list":[0.1],"energy_target":1,"tasks":["solve"],
                "potential":{"bumps":[
                  {"amplitude":5,"width":10,"center":[0.75,0.5]},
                  {"amplitude":2,"width":10,"center":[-0.25,0.75]},
                  {"amplitude":3,"width":5,"center":[-0.25,-0.25]}]}}"#,
        )
        .unwrap();
        let want = PotentialSpec::three_bumps();
        for (a, b) in cfg.potential.bumps.iter().zip(&want.bumps) {
            assert_eq!(a.amplitude, b.amplitude);
            assert_eq!(a.width, b.width);
            assert_eq!(a.center, b.center);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config(
            r#"{"dim":2,"h_list":[0.1],"potential":{"bumps":[]},"energy_target":1,
                "tasks":["solve"],"typo_key":3}"#,
        )
        .unwrap_err();
        assert!(err.contains("typo_key"), "{err}");
    }

    #[test]
    fn nondecreasing_h_list_rejected() {
        let err = parse_config(
            r#"{"dim":2,"h_list":[0.05,0.1],"potential":{"bumps":[]},"energy_target":1,"tasks":["solve"]}"#,
        )
        .unwrap_err();
        assert!(err.contains("decreasing"), "{err}");
    }

    #[test]
    fn bad_grid_and_tasks_rejected() {
        let base = |grid: &str, tasks: &str| {
            format!(
                r#"{{"dim":2,"grid":{grid},"h_list":[0.1],"potential":{{"bumps":[]}},"energy_target":1,"tasks":{tasks}}}"#
            )
        };
        assert!(parse_config(&base("100", r#"["solve"]"#)).is_err());
        assert!(parse_config(&base("\"big\"", r#"["solve"]"#)).is_err());
        assert!(parse_config(&base("\"auto\"", "[]")).is_err());
        assert!(parse_config(&base("\"auto\"", r#"["warp"]"#)).is_err());
        assert!(parse_config(&base("\"auto\"", r#"["nodal"]"#)).is_ok());
    }
}
