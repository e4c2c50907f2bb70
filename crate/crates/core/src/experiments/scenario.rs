use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{derive_generator_params, GeneratorParams, ModelParams};

/// Default cap on `Σ n` over all runs of a scenario.
pub const DEFAULT_MAX_WORK: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Model {
        m: u32,
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "D")]
        d: f64,
    },
    Generator { m: u32, beta: f64, c: f64 },
}

/// Parameter axis varied across the variants of a scenario. The base value
/// in `params` is replaced by each listed value in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    A(Vec<f64>),
    D(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Output {
    #[serde(rename = "dnn_vs_d")]
    DnnVsD,
    #[serde(rename = "err_vs_n")]
    ErrVsN,
    #[serde(rename = "dnn_vs_D")]
    DnnVsSweep,
    #[serde(rename = "dnn_vs_n")]
    DnnVsN,
    #[serde(rename = "theory_only")]
    TheoryOnly,
    #[serde(rename = "clustering")]
    Clustering,
    #[serde(rename = "degree_ccdf")]
    DegreeCcdf,
}

impl Output {
    pub fn file_stem(self) -> &'static str {
        match self {
            Output::DnnVsD => "dnn_vs_d",
            Output::ErrVsN => "err_vs_n",
            Output::DnnVsSweep => "dnn_vs_sweep",
            Output::DnnVsN => "dnn_vs_n",
            Output::TheoryOnly => "theory",
            Output::Clustering => "clustering",
            Output::DegreeCcdf => "degree_ccdf",
        }
    }
}

fn default_support() -> u64 {
    10
}

fn default_slope_range() -> (u64, u64) {
    (4, 100)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub params: ParamSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Replaces `n_list` when full-scale runs are requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub seeds: u32,
    #[serde(default)]
    pub root_seed: u64,
    /// Probe degree; `m + 1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<u64>,
    pub outputs: Vec<Output>,
    #[serde(default = "default_support")]
    pub support_threshold: u64,
    /// Degree window for log-log slope fits of `d_nn(d)`.
    #[serde(default = "default_slope_range")]
    pub slope_range: (u64, u64),
    /// Largest degree tabulated by the theory-only output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory_d_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_work: Option<u64>,
}

/// One concrete parameter set of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Variant {
    /// Value of the swept parameter, or `A` when nothing is swept.
    pub label: f64,
    pub model: ModelParams,
    /// `None` for theory-only scenarios whose parameters have no generator.
    #[serde(skip)]
    pub generator: Option<GeneratorParams>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn m(&self) -> u32 {
        match self.params {
            ParamSpec::Model { m, .. } | ParamSpec::Generator { m, .. } => m,
        }
    }

    pub fn probe_degree(&self) -> u64 {
        self.d0.unwrap_or(u64::from(self.m()) + 1)
    }

    pub fn theory_only(&self) -> bool {
        self.outputs.iter().all(|&o| o == Output::TheoryOnly)
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    /// Switches to `full_n_list` if the scenario has one.
    pub fn use_full_scale(&mut self) {
        if let Some(full) = self.full_n_list.take() {
            self.n_list = full;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return invalid(format!("scenario name {:?} must be a non-empty identifier", self.name));
        }
        if self.outputs.is_empty() {
            return invalid("scenario requests no outputs");
        }
        self.variants()?;
        if self.theory_only() {
            return Ok(());
        }
        if self.seeds < 1 {
            return invalid("seeds must be >= 1");
        }
        if self.n_list.is_empty() {
            return invalid("n_list is empty");
        }
        let n0 = self.m() as usize + 1;
        if let Some(&n) = self.n_list.iter().find(|&&n| n < n0) {
            return invalid(format!("n = {n} is below m + 1 = {n0}"));
        }
        if self.probe_degree() < u64::from(self.m()) {
            return invalid(format!("d0 = {} is below m = {}", self.probe_degree(), self.m()));
        }
        let (lo, hi) = self.slope_range;
        if lo == 0 || lo >= hi {
            return invalid(format!("slope_range ({lo}, {hi}) must satisfy 0 < lo < hi"));
        }
        Ok(())
    }

    /// `Σ n` over every run the scenario would perform.
    pub fn work(&self) -> u64 {
        let variants = match &self.sweep {
            Some(Sweep::A(v) | Sweep::D(v)) => v.len() as u64,
            None => 1,
        };
        let per_seed: u64 = self.n_list.iter().map(|&n| n as u64).sum();
        variants * per_seed * u64::from(self.seeds)
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        let theory_only = self.theory_only();
        let build = |m: u32, a: f64, d: f64, label: f64| -> Result<Variant> {
            let model = ModelParams::new(m, a, d)?;
            let generator = if theory_only { None } else { Some(derive_generator_params(m, a, d)?) };
            Ok(Variant { label, model, generator })
        };
        match (self.params, &self.sweep) {
            (ParamSpec::Model { m, a, d }, None) => Ok(vec![build(m, a, d, a)?]),
            (ParamSpec::Model { m, d, .. }, Some(Sweep::A(list))) => {
                list.iter().map(|&a| build(m, a, d, a)).collect()
            }
            (ParamSpec::Model { m, a, .. }, Some(Sweep::D(list))) => {
                list.iter().map(|&d| build(m, a, d, d)).collect()
            }
            (ParamSpec::Generator { m, beta, c }, None) => {
                let g = GeneratorParams::new(m, beta, c)?;
                let model = g.model_params();
                Ok(vec![Variant { label: model.a(), model, generator: Some(g) }])
            }
            (ParamSpec::Generator { .. }, Some(_)) => {
                invalid("sweeps need (m, A, D) parameters, not generator parameters")
            }
        }
        .and_then(|v: Vec<Variant>| {
            if v.is_empty() {
                invalid("sweep list is empty")
            } else {
                Ok(v)
            }
        })
    }
}
