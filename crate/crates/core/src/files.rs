//! JSON file formats. Variables and hyperplanes are 1-based on disk and
//! 0-based in memory.

use serde::{Deserialize, Serialize};

use crate::equipart::{Hyperplane, HyperplaneArrangement, WeightedPointCloud};
use crate::error::{domain, Error, Result};
use crate::repbuild::{Block, BlockKind, RepresentationSpec};

/// Deviation of `|a|^2 + b^2` from 1 above which loading warns.
pub const NORMALIZATION_WARN_TOL: f64 = 1e-6;

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn render<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file types always serialize")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockEntry {
    Equip { l: usize, vars: Vec<usize>, mult: u64 },
    Ortho { pairs: Vec<[usize; 2]>, mult: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub k: usize,
    pub d: usize,
    pub blocks: Vec<BlockEntry>,
}

fn to_zero_based(i: usize, what: &str) -> Result<usize> {
    i.checked_sub(1)
        .ok_or_else(|| Error::Domain(format!("{what} indices are 1-based, got 0")))
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn to_json(&self) -> String {
        render(self)
    }

    pub fn from_spec(spec: &RepresentationSpec, d: usize) -> Self {
        let blocks = spec
            .blocks
            .iter()
            .map(|b| match &b.kind {
                BlockKind::Equip { level, vars } => BlockEntry::Equip {
                    l: *level,
                    vars: vars.iter().map(|v| v + 1).collect(),
                    mult: b.mult,
                },
                BlockKind::Ortho { pairs } => BlockEntry::Ortho {
                    pairs: pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
                    mult: b.mult,
                },
            })
            .collect();
        Self {
            k: spec.k,
            d,
            blocks,
        }
    }

    /// The validated representation and target `d`.
    pub fn to_spec(&self) -> Result<(RepresentationSpec, usize)> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(n, entry)| {
                let block = match entry {
                    BlockEntry::Equip { l, vars, mult } => Block::equip(
                        *l,
                        vars.iter()
                            .map(|&v| to_zero_based(v, "variable"))
                            .collect::<Result<Vec<_>>>()?,
                        *mult,
                    ),
                    BlockEntry::Ortho { pairs, mult } => Block::ortho(
                        pairs
                            .iter()
                            .map(|&[i, j]| Ok((to_zero_based(i, "pair")?, to_zero_based(j, "pair")?)))
                            .collect::<Result<Vec<_>>>()?,
                        *mult,
                    ),
                };
                block
                    .validate(self.k)
                    .map_err(|e| Error::Domain(format!("blocks[{n}]: {e}")))?;
                Ok(block)
            })
            .collect::<Result<Vec<_>>>()?;
        if self.d == 0 {
            return domain("d must be at least 1");
        }
        Ok((RepresentationSpec::new(self.k, blocks)?, self.d))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperplaneEntry {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementFile {
    pub d: usize,
    pub hyperplanes: Vec<HyperplaneEntry>,
}

impl ArrangementFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn to_json(&self) -> String {
        render(self)
    }

    pub fn from_arrangement(arrangement: &HyperplaneArrangement) -> Self {
        Self {
            d: arrangement.d(),
            hyperplanes: arrangement
                .hyperplanes()
                .iter()
                .map(|h| HyperplaneEntry {
                    a: h.normal().to_vec(),
                    b: h.offset(),
                })
                .collect(),
        }
    }

    /// The arrangement, with every hyperplane rescaled onto the unit sphere.
    /// Returns a warning for each hyperplane that was noticeably off.
    pub fn to_arrangement(&self) -> Result<(HyperplaneArrangement, Vec<String>)> {
        let mut warnings = Vec::new();
        let hyperplanes = self
            .hyperplanes
            .iter()
            .enumerate()
            .map(|(n, h)| {
                if h.a.len() != self.d {
                    return domain(format!(
                        "hyperplanes[{}]: normal has {} entries, expected d = {}",
                        n + 1,
                        h.a.len(),
                        self.d
                    ));
                }
                let norm2: f64 = h.a.iter().map(|x| x * x).sum::<f64>() + h.b * h.b;
                if (norm2 - 1.0).abs() > NORMALIZATION_WARN_TOL {
                    warnings.push(format!(
                        "hyperplane {}: |a|^2 + b^2 = {norm2}, normalized on load",
                        n + 1
                    ));
                }
                Hyperplane::normalized(h.a.clone(), h.b)
                    .map_err(|e| Error::Domain(format!("hyperplanes[{}]: {e}", n + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((HyperplaneArrangement::new(hyperplanes)?, warnings))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassEntry {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassesFile {
    pub d: usize,
    pub masses: Vec<MassEntry>,
}

impl MassesFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn to_json(&self) -> String {
        render(self)
    }

    pub fn from_masses(masses: &[WeightedPointCloud]) -> Result<Self> {
        let Some(first) = masses.first() else {
            return domain("no masses to write");
        };
        Ok(Self {
            d: first.d(),
            masses: masses
                .iter()
                .map(|m| MassEntry {
                    points: m.points().to_vec(),
                    weights: if m.weights().iter().all(|&w| w == 1.0) {
                        None
                    } else {
                        Some(m.weights().to_vec())
                    },
                })
                .collect(),
        })
    }

    pub fn to_masses(&self) -> Result<Vec<WeightedPointCloud>> {
        if self.masses.is_empty() {
            return domain("the masses list is empty");
        }
        self.masses
            .iter()
            .enumerate()
            .map(|(n, m)| {
                let weights = m.weights.clone().unwrap_or_else(|| vec![1.0; m.points.len()]);
                WeightedPointCloud::new(self.d, m.points.clone(), weights)
                    .map_err(|e| Error::Domain(format!("masses[{}]: {e}", n + 1)))
            })
            .collect()
    }
}
