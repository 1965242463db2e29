use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use specklenoise::{GridScale, GridSpec, StateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Which curve family `curves` emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Shot-noise and classical-noise correlations.
    #[default]
    Fig1,
    /// Second-order term C_II / T for every (Fano, L/ell) pair.
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StateArg {
    Fock,
    Coherent,
    Thermal,
    Custom,
}

impl From<StateArg> for StateKind {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Fock => StateKind::Fock,
            StateArg::Coherent => StateKind::Coherent,
            StateArg::Thermal => StateKind::Thermal,
            StateArg::Custom => StateKind::Custom,
        }
    }
}

/// Effective parameters of one run. Precedence: flags, then `--config` file,
/// then these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub grid_scale: Scale,
    pub fano: Vec<f64>,
    pub l_over_ell: Vec<f64>,
    pub mean_t: f64,
    pub realizations: usize,
    pub shots: usize,
    pub counting_realizations: usize,
    pub sampler_shots: usize,
    pub bootstrap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// 0 lets rayon pick.
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    pub figure: Figure,
    pub state: StateArg,
    pub photons: f64,
    /// Only used by custom states.
    pub state_fano: f64,
    pub transmission: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        Self {
            grid_min: grid.min,
            grid_max: grid.max,
            grid_points: grid.points,
            grid_scale: Scale::Log,
            fano: vec![0.0, 1.0, 2.0],
            l_over_ell: vec![3.0, 4.0, 5.0],
            mean_t: 0.01,
            realizations: 100_000,
            shots: 1000,
            counting_realizations: 2000,
            sampler_shots: 1_000_000,
            bootstrap: specklenoise::ensemble::DEFAULT_BOOTSTRAP,
            seed: None,
            workers: 0,
            out: None,
            format: None,
            figure: Figure::Fig1,
            state: StateArg::Coherent,
            photons: 10.0,
            state_fano: 1.0,
            transmission: 0.3,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("RunConfig always serializes")
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            min: self.grid_min,
            max: self.grid_max,
            points: self.grid_points,
            scale: match self.grid_scale {
                Scale::Lin => GridScale::Lin,
                Scale::Log => GridScale::Log,
            },
        }
    }

    pub fn apply(&mut self, flags: &Flags) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = flags.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            grid_min, grid_max, grid_points, grid_scale, fano, l_over_ell, mean_t, realizations,
            shots, counting_realizations, sampler_shots, bootstrap, workers, figure, state,
            photons, state_fano, transmission
        );
        if flags.seed.is_some() {
            self.seed = flags.seed;
        }
        if flags.out.is_some() {
            self.out = flags.out.clone();
        }
        if flags.format.is_some() {
            self.format = flags.format;
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with any of the parameters below (flags take precedence)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit
    #[arg(long, global = true)]
    pub show_config: bool,

    #[arg(long, global = true)]
    pub grid_min: Option<f64>,
    #[arg(long, global = true)]
    pub grid_max: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub grid_scale: Option<Scale>,
    /// Comma-separated Fano factors
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub fano: Option<Vec<f64>>,
    /// Comma-separated slab-thickness to mean-free-path ratios
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub l_over_ell: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub mean_t: Option<f64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    /// Realizations used for the counting-mode comparison in `validate`
    #[arg(long, global = true)]
    pub counting_realizations: Option<usize>,
    /// Draws per photon-statistics case in `validate`
    #[arg(long, global = true)]
    pub sampler_shots: Option<usize>,
    /// Bootstrap resamples for correlation standard errors
    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; never changes results
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Curve family for `curves`
    #[arg(long, global = true, value_enum)]
    pub figure: Option<Figure>,
    /// Input state for `sample-stats`
    #[arg(long, global = true, value_enum)]
    pub state: Option<StateArg>,
    /// Mean photon number of the input state
    #[arg(long, global = true)]
    pub photons: Option<f64>,
    /// Fano factor of a custom state
    #[arg(long, global = true)]
    pub state_fano: Option<f64>,
    /// Channel transmission for `sample-stats`
    #[arg(long, global = true)]
    pub transmission: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_precedence() {
        let file = RunConfig::from_toml("mean_t = 0.02\nseed = 5\nfano = [0.5]\ngrid_scale = \"lin\"\n").unwrap();
        assert_eq!(file.mean_t, 0.02);
        assert_eq!(file.seed, Some(5));
        assert_eq!(file.grid_scale, Scale::Lin);
        assert_eq!(file.realizations, 100_000);
        assert_eq!(RunConfig::from_toml(&file.to_toml()).unwrap(), file);

        let mut cfg = file.clone();
        cfg.apply(&Flags {
            seed: Some(9),
            fano: Some(vec![1.0, 2.0]),
            ..Flags::default()
        });
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.fano, vec![1.0, 2.0]);
        assert_eq!(cfg.mean_t, 0.02);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("bogus = 1\n").is_err());
        assert!(RunConfig::from_toml("mean_t = \"x\"\n").is_err());
    }
}
