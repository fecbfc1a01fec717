//! Argument types shared by several commands.
//!
//! Every command accepts `--config <file.json>`. The file holds the same
//! keys as the long flags (with `_` for `-`); a flag given on the command
//! line wins over the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use squeeze_core::GaussianState;

use crate::error::{CliError, FieldContext, Result};
use crate::format::{read_json, Format, Provenance, Sink};

/// Squeezed and anti-squeezed variance in dB, written `v1,v2`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct DbPair(pub f64, pub f64);

impl FromStr for DbPair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `v1_db,v2_db`, got `{s}`"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        };
        Ok(DbPair(parse(a)?, parse(b)?))
    }
}

impl DbPair {
    pub fn state(self, field: &str) -> Result<GaussianState> {
        GaussianState::from_db(self.0, self.1).field(field)
    }
}

/// Built-in parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// The measured states and fitted OPO parameters of the reference
    /// experiment.
    Paper,
}

/// Output location flags.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(default)]
pub struct OutputArgs {
    /// Directory for output files.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// File name prefix.
    #[arg(long)]
    pub stem: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn overlay(&mut self, file: OutputArgs) {
        self.output_dir = self.output_dir.take().or(file.output_dir);
        self.stem = self.stem.take().or(file.stem);
        self.format = self.format.or(file.format);
    }

    pub fn sink(&self, default_stem: &str, provenance: bool) -> Sink {
        Sink {
            dir: self
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(".")),
            stem: self.stem.clone().unwrap_or_else(|| default_stem.to_owned()),
            format: self.format.unwrap_or_default(),
            provenance: provenance.then(Provenance::capture),
        }
    }
}

/// Loads the `--config` file when one was given.
pub fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), read_json)
}

/// `flag.or(file)` for each listed `Option` field.
macro_rules! overlay {
    ($flags:expr, $file:expr; $($field:ident),* $(,)?) => {
        $( $flags.$field = $flags.$field.take().or($file.$field); )*
    };
}
pub(crate) use overlay;

pub fn require<T>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| CliError::invalid(field, "missing; pass the flag or set it in --config"))
}
