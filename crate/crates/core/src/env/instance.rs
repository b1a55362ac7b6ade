use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CvpMdp, Mdp, NpMdp, PMdp, SatMdp, StochCvpMdp, StochSatMdp};
use crate::circuit::GateCircuit;
use crate::error::{Error, Result};
use crate::formula::Cnf3Formula;
use crate::ndtm::NdtmSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Sat,
    Np,
    Cvp,
    P,
    StochSat,
    StochCvp,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Sat,
        Family::Np,
        Family::Cvp,
        Family::P,
        Family::StochSat,
        Family::StochCvp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sat => "sat",
            Family::Np => "np",
            Family::Cvp => "cvp",
            Family::P => "p",
            Family::StochSat => "stoch-sat",
            Family::StochCvp => "stoch-cvp",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown family {s:?}")))
    }
}

pub(crate) mod bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|&b| b as u8))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("bit {other} is not 0/1"))),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NpInstance {
    pub machine: NdtmSpec,
    #[serde(with = "bits")]
    pub input: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PInstance {
    pub circuit: GateCircuit,
    #[serde(with = "bits")]
    pub input: Vec<bool>,
}

/// On-disk form: `{"family": ..., "instance": {...}, "horizon": optional}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub family: Family,
    pub instance: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum FamilyInstance {
    Sat(SatMdp),
    Np(NpMdp),
    Cvp(CvpMdp),
    P(PMdp),
    StochSat(StochSatMdp),
    StochCvp(StochCvpMdp),
}

/// Runs `$body` with `$m` bound to the concrete MDP inside a [`FamilyInstance`].
#[macro_export]
macro_rules! with_mdp {
    ($inst:expr, $m:ident => $body:expr) => {
        match $inst {
            $crate::env::FamilyInstance::Sat($m) => $body,
            $crate::env::FamilyInstance::Np($m) => $body,
            $crate::env::FamilyInstance::Cvp($m) => $body,
            $crate::env::FamilyInstance::P($m) => $body,
            $crate::env::FamilyInstance::StochSat($m) => $body,
            $crate::env::FamilyInstance::StochCvp($m) => $body,
        }
    };
}

impl FamilyInstance {
    pub fn family(&self) -> Family {
        match self {
            FamilyInstance::Sat(_) => Family::Sat,
            FamilyInstance::Np(_) => Family::Np,
            FamilyInstance::Cvp(_) => Family::Cvp,
            FamilyInstance::P(_) => Family::P,
            FamilyInstance::StochSat(_) => Family::StochSat,
            FamilyInstance::StochCvp(_) => Family::StochCvp,
        }
    }

    pub fn horizon(&self) -> usize {
        with_mdp!(self, m => m.horizon())
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let inst = file.instance.clone();
        let parsed = match file.family {
            Family::Sat => FamilyInstance::Sat(SatMdp::new(serde_json::from_value(inst)?)),
            Family::StochSat => {
                FamilyInstance::StochSat(StochSatMdp::new(serde_json::from_value(inst)?))
            }
            Family::Cvp => FamilyInstance::Cvp(CvpMdp::new(serde_json::from_value(inst)?)?),
            Family::StochCvp => {
                FamilyInstance::StochCvp(StochCvpMdp::new(serde_json::from_value(inst)?)?)
            }
            Family::Np => {
                let np: NpInstance = serde_json::from_value(inst)?;
                FamilyInstance::Np(NpMdp::new(np.machine, np.input)?)
            }
            Family::P => {
                let p: PInstance = serde_json::from_value(inst)?;
                FamilyInstance::P(PMdp::new(p.circuit, p.input)?)
            }
        };
        Ok(match file.horizon {
            Some(h) => parsed.with_horizon(h)?,
            None => parsed,
        })
    }

    pub fn parse(json: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(json)?;
        FamilyInstance::from_file(&file)
    }

    pub fn with_horizon(self, h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(match self {
            FamilyInstance::Sat(m) => FamilyInstance::Sat(m.with_horizon(h)),
            FamilyInstance::Np(m) => FamilyInstance::Np(m.with_horizon(h)),
            FamilyInstance::Cvp(m) => FamilyInstance::Cvp(m.with_horizon(h)),
            FamilyInstance::P(m) => FamilyInstance::P(m.with_horizon(h)),
            FamilyInstance::StochSat(m) => FamilyInstance::StochSat(m.with_horizon(h)),
            FamilyInstance::StochCvp(m) => FamilyInstance::StochCvp(m.with_horizon(h)),
        })
    }

    /// The instance payload in its on-disk form.
    pub fn to_file(&self, keep_horizon: bool) -> InstanceFile {
        let instance = match self {
            FamilyInstance::Sat(m) => serde_json::to_value(m.formula()),
            FamilyInstance::StochSat(m) => serde_json::to_value(m.formula()),
            FamilyInstance::Cvp(m) => serde_json::to_value(m.circuit()),
            FamilyInstance::StochCvp(m) => serde_json::to_value(m.circuit()),
            FamilyInstance::Np(m) => serde_json::to_value(NpInstance {
                machine: m.spec().clone(),
                input: m.input().to_vec(),
            }),
            FamilyInstance::P(m) => serde_json::to_value(PInstance {
                circuit: m.circuit().clone(),
                input: m.x().to_vec(),
            }),
        }
        .expect("instance types serialize");
        InstanceFile {
            family: self.family(),
            instance,
            horizon: keep_horizon.then(|| self.horizon()),
        }
    }

    pub fn from_formula(psi: Cnf3Formula) -> Self {
        FamilyInstance::Sat(SatMdp::new(psi))
    }
}
