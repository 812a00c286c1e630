//! Versioned JSON group specs.

use std::path::Path;

use schottky_zeta::{Complex64, GroupSpec, SchottkyGroup};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SPEC_SCHEMA: &str = "schottky-zeta/group-spec/v1";

/// Optional coefficient matrices for the period determinants, rows of
/// `[re, im]` pairs. Identity when absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one: Option<Vec<Vec<Complex64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Vec<Complex64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub schema: String,
    pub genus: usize,
    /// Conjugate to `alpha_1 = 0, alpha_-1 = inf, alpha_2 = 1` before use.
    #[serde(default)]
    pub normalize: bool,
    #[serde(flatten)]
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
}

/// A parsed spec with its group built and, if requested, normalized.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    pub group: SchottkyGroup,
    /// The input as used: generators after normalization.
    pub echo: SpecFile,
}

impl SpecFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let spec: SpecFile = serde_json::from_str(text).map_err(|source| CliError::Parse {
            path: path.to_owned(),
            source,
        })?;
        if spec.schema != SPEC_SCHEMA {
            return Err(CliError::Schema(spec.schema));
        }
        if spec.genus != spec.group.generators.len() {
            return Err(CliError::Usage(format!(
                "genus {} but {} generators",
                spec.genus,
                spec.group.generators.len()
            )));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn resolve(self) -> Result<ResolvedSpec, CliError> {
        let mut group = SchottkyGroup::build(&self.group)?;
        if self.normalize && !group.is_normalized() {
            group = group.normalize()?.0;
        }
        let mut resolved = group.to_spec();
        resolved.strict = self.group.strict;
        resolved.real = self.group.real;
        // circles given for the original placement no longer apply after
        // normalizing
        if !self.normalize {
            resolved.circles = self.group.circles.clone();
        }
        let echo = SpecFile {
            group: resolved,
            ..self
        };
        Ok(ResolvedSpec { group, echo })
    }
}
