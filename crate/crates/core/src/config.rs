//! Analysis tolerances and the key-value configuration file.
//!
//! The file is TOML with flat keys. `model`, `surface`, `t_start`, `t_end`
//! and `t_steps` select the inputs; every other key overrides a field of
//! [`AnalysisConfig`] of the same name. Unknown keys are rejected.
//!
//! ```toml
//! model = "ot"
//! surface = "sphere:5"
//! grid = 64
//! capture_eps = 5e-4
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Seed grid per side for the singularity search and closed-leaf probes.
    pub grid: usize,
    pub newton_tol: f64,
    pub merge_radius: f64,
    /// Radius of the capture ball around singularities (parameter units).
    pub capture_eps: f64,
    /// Separatrix endpoint to saddle distance that declares a connection.
    pub connection_tol: f64,
    /// `|π′(0) − 1|` below this marks a closed leaf degenerate.
    pub degenerate_band: f64,
    /// Arclength budget in domain widths.
    pub budget: f64,
    /// `|trace|` below this is reported as a zero-divergence inconsistency.
    pub divergence_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Tolerance for return-map integrations.
    pub return_rtol: f64,
    /// Initial offset of separatrix seeds from their saddle.
    pub separatrix_offset: f64,
    /// Half width of transversals used for return maps.
    pub transversal_half_width: f64,
    /// Number of samples along a transversal when scanning for fixed points.
    pub transversal_samples: usize,
    /// A tangential near-fixed point of a return map whose displacement is
    /// below this is reported as a degenerate closed leaf.
    pub degenerate_gap: f64,
    /// Arclength budget of the probe leaves used to find recurrence.
    pub probe_budget: f64,
    /// Maximal number of recurrence candidates examined with return maps.
    pub max_candidates: usize,
    /// Saddles passed closer than this are recorded along separatrices.
    pub pass_radius: f64,
    /// Raster resolution for the dividing-set construction.
    pub dividing_grid: usize,
    /// Radius of the neighbourhoods of G₊ and G₋ used for the dividing set.
    pub neighborhood_radius: f64,
    /// Movie bracket width.
    pub t_tol: f64,
    /// Maximal number of events in one bracket before reporting accumulation.
    pub event_cap: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            grid: 48,
            newton_tol: 1e-10,
            merge_radius: 1e-6,
            capture_eps: 1e-3,
            connection_tol: 1e-3,
            degenerate_band: 1e-4,
            budget: 1000.0,
            divergence_tol: 1e-8,
            rtol: 1e-9,
            atol: 1e-11,
            return_rtol: 1e-12,
            separatrix_offset: 1e-4,
            transversal_half_width: 0.05,
            transversal_samples: 48,
            degenerate_gap: 1e-5,
            probe_budget: 30.0,
            max_candidates: 16,
            pass_radius: 0.05,
            dividing_grid: 128,
            neighborhood_radius: 0.03,
            t_tol: 1e-4,
            event_cap: 4,
        }
    }
}

impl AnalysisConfig {
    /// All integration tolerances halved.
    pub fn halved(&self) -> Self {
        Self {
            rtol: self.rtol / 2.0,
            atol: self.atol / 2.0,
            return_rtol: self.return_rtol / 2.0,
            newton_tol: self.newton_tol / 2.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("merge_radius", self.merge_radius),
            ("capture_eps", self.capture_eps),
            ("connection_tol", self.connection_tol),
            ("degenerate_band", self.degenerate_band),
            ("budget", self.budget),
            ("divergence_tol", self.divergence_tol),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("return_rtol", self.return_rtol),
            ("separatrix_offset", self.separatrix_offset),
            ("transversal_half_width", self.transversal_half_width),
            ("degenerate_gap", self.degenerate_gap),
            ("probe_budget", self.probe_budget),
            ("pass_radius", self.pass_radius),
            ("neighborhood_radius", self.neighborhood_radius),
            ("t_tol", self.t_tol),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {x}")));
            }
        }
        if self.grid < 4 || self.dividing_grid < 16 || self.transversal_samples < 8 {
            return Err(Error::Config("grid sizes too small".into()));
        }
        if self.separatrix_offset >= self.capture_eps {
            return Err(Error::Config(
                "separatrix_offset must be smaller than capture_eps".into(),
            ));
        }
        Ok(())
    }
}

/// Inputs and tolerances read from a configuration file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub model: Option<String>,
    pub surface: Option<String>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub t_steps: Option<usize>,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::Parse {
                line,
                msg: e.message().to_string(),
            }
        })?;
        let mut take_str = |k: &str| -> Result<Option<String>> {
            match table.remove(k) {
                None => Ok(None),
                Some(toml::Value::String(s)) => Ok(Some(s)),
                Some(v) => Err(Error::Config(format!("{k} must be a string, got {v}"))),
            }
        };
        let model = take_str("model")?;
        let surface = take_str("surface")?;
        let num = |v: toml::Value, k: &str| -> Result<f64> {
            match v {
                toml::Value::Float(x) => Ok(x),
                toml::Value::Integer(i) => Ok(i as f64),
                other => Err(Error::Config(format!("{k} must be a number, got {other}"))),
            }
        };
        let t_start = table.remove("t_start").map(|v| num(v, "t_start")).transpose()?;
        let t_end = table.remove("t_end").map(|v| num(v, "t_end")).transpose()?;
        let t_steps = match table.remove("t_steps") {
            None => None,
            Some(toml::Value::Integer(i)) if i >= 2 => Some(i as usize),
            Some(v) => return Err(Error::Config(format!("t_steps must be an integer >= 2, got {v}"))),
        };
        // floats written as integers (budget = 500) are accepted
        for key in [
            "newton_tol",
            "merge_radius",
            "capture_eps",
            "connection_tol",
            "degenerate_band",
            "budget",
            "divergence_tol",
            "rtol",
            "atol",
            "return_rtol",
            "separatrix_offset",
            "transversal_half_width",
            "degenerate_gap",
            "probe_budget",
            "pass_radius",
            "neighborhood_radius",
            "t_tol",
        ] {
            if let Some(toml::Value::Integer(i)) = table.get(key) {
                let x = *i as f64;
                table.insert(key.to_string(), toml::Value::Float(x));
            }
        }
        let analysis: AnalysisConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        analysis.validate()?;
        Ok(Self {
            model,
            surface,
            t_start,
            t_end,
            t_steps,
            analysis,
        })
    }
}
