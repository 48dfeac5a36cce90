use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::probability::{Assignment, Distribution, JointDistribution, Label, Support, Supports};
use crate::scalar::{parse_rational, Scalar};

/// On-disk shape of a joint distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionFile {
    pub supports: SupportsFile,
    pub cells: Vec<CellFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportsFile {
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Label>>,
    #[serde(rename = "Yc", default, skip_serializing_if = "Option::is_none")]
    pub yc: Option<Vec<Label>>,
    #[serde(rename = "Yo")]
    pub yo: Vec<Label>,
    #[serde(rename = "Yp")]
    pub yp: Vec<Label>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellFile {
    pub z: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yc: Option<Label>,
    pub yo: Label,
    pub yp: Label,
    pub p: Probability,
}

/// A probability written as a number or as a decimal / `num/den` string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Text(String),
    Number(serde_json::Number),
}

impl Probability {
    fn parse<T: Scalar>(&self) -> Result<T> {
        let r = match self {
            Probability::Text(s) => parse_rational(s)?,
            Probability::Number(n) => parse_rational(&n.to_string())?,
        };
        Ok(T::from_ratio(&r))
    }

    fn from_scalar<T: Scalar>(p: &T) -> Self {
        Probability::Text(p.render())
    }
}

fn z_value(label: &Label) -> Result<u8> {
    (0..2u8)
        .find(|z| label.is_int(*z as i64))
        .ok_or_else(|| AuditError::UnknownLabel { variable: "Z".into(), label: label.to_string() })
}

impl DistributionFile {
    pub fn to_joint<T: Scalar>(&self) -> Result<JointDistribution<T>> {
        if let Some(z) = &self.supports.z {
            if z.len() != 2 || !z.contains(&Label::int(0)) || !z.contains(&Label::int(1)) {
                return Err(AuditError::Parse("support of Z must be [0, 1]".into()));
            }
        }
        let construct = self.supports.yc.clone().map(Support::new).transpose()?;
        let supports =
            Supports::new(construct, Support::new(self.supports.yo.clone())?, Support::new(self.supports.yp.clone())?);
        let has_construct = supports.construct.is_some();
        let cells = self
            .cells
            .iter()
            .map(|c| {
                if c.yc.is_some() != has_construct {
                    return Err(AuditError::MixedConstructPresence);
                }
                Ok((Assignment::new(z_value(&c.z)?, c.yc.clone(), c.yo.clone(), c.yp.clone()), c.p.parse::<T>()?))
            })
            .collect::<Result<Vec<_>>>()?;
        JointDistribution::from_cells(supports, cells)
    }

    pub fn from_joint<T: Scalar>(dist: &JointDistribution<T>) -> Self {
        let s = dist.supports();
        DistributionFile {
            supports: SupportsFile {
                z: Some(vec![Label::int(0), Label::int(1)]),
                yc: s.construct.map(|c| c.labels().to_vec()),
                yo: s.observed.labels().to_vec(),
                yp: s.predicted.labels().to_vec(),
            },
            cells: dist
                .assignments()
                .map(|(a, p)| CellFile {
                    z: Label::int(a.z as i64),
                    yc: a.yc,
                    yo: a.yo,
                    yp: a.yp,
                    p: Probability::from_scalar(p),
                })
                .collect(),
        }
    }
}

pub fn joint_from_json<T: Scalar>(text: &str) -> Result<JointDistribution<T>> {
    let file: DistributionFile = serde_json::from_str(text)?;
    file.to_joint()
}

/// Pretty-printed, with cells in canonical `(z, yc, yo, yp)` order.
pub fn joint_to_json<T: Scalar>(dist: &JointDistribution<T>) -> String {
    let mut s = serde_json::to_string_pretty(&DistributionFile::from_joint(dist)).expect("serializable");
    s.push('\n');
    s
}

pub fn read_joint_path<T: Scalar>(path: &Path) -> Result<JointDistribution<T>> {
    joint_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_joint_path<T: Scalar>(dist: &JointDistribution<T>, path: &Path) -> Result<()> {
    std::fs::write(path, joint_to_json(dist))?;
    Ok(())
}

/// A single law written as `{"label": probability, ...}`.
pub fn law_from_json<T: Scalar>(text: &str) -> Result<Distribution<T>> {
    let map: BTreeMap<String, Probability> = serde_json::from_str(text)?;
    let pairs = map.iter().map(|(k, v)| Ok((Label::parse(k), v.parse::<T>()?))).collect::<Result<Vec<_>>>()?;
    Distribution::from_pairs(pairs)
}

pub fn law_to_json<T: Scalar>(law: &Distribution<T>) -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        law.iter().map(|(l, p)| (l.to_string(), serde_json::Value::String(p.render()))).collect();
    serde_json::to_string_pretty(&map).expect("serializable")
}
