//! Declarative run configuration (TOML) with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chart::probe::ProbeSchedule;
use crate::chart::{DerivMode, LeeSpec, MetricSpec, ModelSpace, ScalarSpec};
use crate::error::{Error, Result};
use crate::identities::{SuiteConfig, TrialSampler};
use crate::quadrature::QuadratureSpec;
use crate::util::geometric_radii;
use crate::weyl::WeylStructure;

/// A geometric radius schedule `r0 … rmax` with `count` entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub r0: f64,
    pub rmax: f64,
    pub count: usize,
}

impl Default for RadiiSpec {
    fn default() -> Self {
        RadiiSpec {
            r0: 50.0,
            rmax: 1600.0,
            count: 6,
        }
    }
}

impl RadiiSpec {
    /// Parse `r0:rmax:count`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("--radii expects r0:rmax:count, got `{s}`")));
        }
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad radius `{v}`")));
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad radius count `{}`", parts[2])))?;
        Ok(RadiiSpec {
            r0: num(parts[0])?,
            rmax: num(parts[1])?,
            count,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        geometric_radii(self.r0, self.rmax, self.count)
    }

    pub fn validate(&self, model: &ModelSpace) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("radius count must be positive".into()));
        }
        if !(self.r0 > model.radius && self.r0.is_finite()) {
            return Err(Error::Domain(format!(
                "first radius {} must exceed the removed ball radius {}",
                self.r0, model.radius
            )));
        }
        if self.count > 1 && !(self.rmax > self.r0 && self.rmax.is_finite()) {
            return Err(Error::Config("rmax must exceed r0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Operator identities; `None` means 1e-6 (dual) or 1e-5 (finite differences).
    pub operator: Option<f64>,
    pub bochner: f64,
    pub integral: f64,
    /// Relative gauge-invariance and conformal-change tolerance.
    pub mass: f64,
    /// Convergence threshold on the extrapolated mass sequence.
    pub conv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            operator: None,
            bochner: 1e-5,
            integral: 1e-4,
            mass: 1e-4,
            conv: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub trials: usize,
    pub sign_trials: usize,
    pub integral_triples: usize,
    /// Annulus radii in units of the removed ball radius.
    pub annulus: [f64; 2],
    pub quadrature: QuadratureSpec,
    pub mode: DerivMode,
    /// Draw metric and Lee form per trial instead of using the configured ones.
    pub random_fields: bool,
    /// Negative control: flip the resolved Bochner sign.
    pub corrupt_sign: bool,
}

impl Default for VerifySection {
    fn default() -> Self {
        let s = SuiteConfig::default();
        VerifySection {
            trials: s.trials,
            sign_trials: s.sign_trials,
            integral_triples: s.integral_triples,
            annulus: s.annulus,
            quadrature: s.quadrature,
            mode: s.mode,
            random_fields: false,
            corrupt_sign: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Conformal factors; empty means `1 + t r^{2-m}` for `t ∈ {0.1, …, 0.5}`.
    pub factors: Vec<ScalarSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelSpace,
    pub metric: MetricSpec,
    pub lee: LeeSpec,
    /// Coefficients of `Z` over `X_1..X_m` for the single-field mass table.
    pub z: Option<Vec<f64>>,
    pub radii: RadiiSpec,
    pub quadrature: QuadratureSpec,
    pub probes: ProbeSchedule,
    pub tolerances: Tolerances,
    pub verify: VerifySection,
    pub sweep: SweepSection,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            model: ModelSpace {
                m: 3,
                radius: 1.0,
                fiber_length: 2.0 * std::f64::consts::PI,
                fibration: crate::chart::Fibration::Trivial,
            },
            metric: MetricSpec::FlatProduct,
            lee: LeeSpec::Zero,
            z: None,
            radii: RadiiSpec::default(),
            quadrature: QuadratureSpec::default(),
            probes: ProbeSchedule::default(),
            tolerances: Tolerances::default(),
            verify: VerifySection::default(),
            sweep: SweepSection::default(),
            out: None,
        }
    }
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub radii: Option<String>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Apply flag overrides, fill defaults that depend on `m`, and validate.
    ///
    /// `--tol` replaces the operator-identity tolerance and the mass tolerance.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(r) = &o.radii {
            self.radii = RadiiSpec::parse(r)?;
        }
        if let Some(t) = o.tol {
            self.tolerances.operator = Some(t);
            self.tolerances.mass = t;
        }
        let m = self.model.m;
        if self.z.is_none() {
            let mut z = vec![0.0; m];
            if m > 0 {
                z[0] = 1.0;
            }
            self.z = Some(z);
        }
        if self.sweep.factors.is_empty() {
            self.sweep.factors = [0.1, 0.2, 0.3, 0.4, 0.5]
                .iter()
                .map(|&t| ScalarSpec::one_plus_decaying(t, m))
                .collect();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.structure()?;
        self.radii.validate(&self.model)?;
        self.quadrature.validate()?;
        self.suite().validate()?;
        let z = self.z.as_ref().ok_or_else(|| Error::Config("z unresolved".into()))?;
        if z.len() != self.model.m {
            return Err(Error::Config(format!("z needs {} coefficients, got {}", self.model.m, z.len())));
        }
        for f in &self.sweep.factors {
            f.validate(&self.model)?;
        }
        if self.probes.radii.len() < 4 {
            return Err(Error::Config("probe schedule needs at least 4 radii".into()));
        }
        for t in [self.tolerances.mass, self.tolerances.conv] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config("tolerances must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn structure(&self) -> Result<WeylStructure> {
        WeylStructure::new(self.model.clone(), self.metric.clone(), self.lee.clone())
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            trials: self.verify.trials,
            sign_trials: self.verify.sign_trials,
            integral_triples: self.verify.integral_triples,
            annulus: self.verify.annulus,
            quadrature: self.verify.quadrature,
            mode: self.verify.mode,
            tolerance: self.tolerances.operator,
            bochner_tolerance: self.tolerances.bochner,
            integral_tolerance: self.tolerances.integral,
            corrupt_sign: self.verify.corrupt_sign,
        }
    }

    pub fn sampler(&self) -> TrialSampler {
        let mut s = TrialSampler::new(self.model.clone(), self.seed);
        if !self.verify.random_fields {
            s.metric = Some(self.metric.clone());
            s.lee = Some(self.lee.clone());
        }
        s
    }
}
