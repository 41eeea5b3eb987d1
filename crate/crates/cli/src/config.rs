use std::path::Path;

use fraclv::lotka::{LotkaParams, LotkaSystem};
use fraclv::rational::RationalOrder;
use fraclv::stability::{Matrix, VectorField};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Everything a run needs, read from one TOML file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    pub basin: Option<BasinConfig>,
    #[serde(default)]
    pub separatrix: SeparatrixConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub portrait: PortraitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lotka,
    Generic,
}

/// `kind = "lotka"` takes `a, b, c, alpha, beta`; `kind = "generic"` takes
/// `orders, equations` and optionally `equilibria`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<OrderSpec>,
    pub beta: Option<OrderSpec>,
    pub orders: Option<Vec<OrderSpec>>,
    /// One term list per component; a term is `[coeff, p1, ..., pn]`.
    pub equations: Option<Vec<Vec<Vec<f64>>>>,
    pub equilibria: Option<Vec<Vec<f64>>>,
}

impl ModelConfig {
    fn check_keys(&self) -> CliResult<()> {
        let lotka = [
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("c", self.c.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
        ];
        let generic = [
            ("orders", self.orders.is_some()),
            ("equations", self.equations.is_some()),
            ("equilibria", self.equilibria.is_some()),
        ];
        let (own, foreign, name) = match self.kind {
            ModelKind::Lotka => (&lotka[..], &generic[..], "lotka"),
            ModelKind::Generic => (&generic[..2], &lotka[..], "generic"),
        };
        if let Some((k, _)) = own.iter().find(|(_, set)| !set) {
            return Err(CliError::Config(format!(
                "model.{k} is required for kind = \"{name}\""
            )));
        }
        if let Some((k, _)) = foreign.iter().find(|(_, set)| *set) {
            return Err(CliError::Config(format!(
                "model.{k} does not apply to kind = \"{name}\""
            )));
        }
        Ok(())
    }
}

/// An order written as a number or as a `"v/u"` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Number(f64),
    Text(String),
}

impl OrderSpec {
    fn resolve(&self, field: &str) -> CliResult<RationalOrder> {
        match self {
            OrderSpec::Number(x) => RationalOrder::from_decimal(*x),
            OrderSpec::Text(s) => s.parse(),
        }
        .map_err(|e| CliError::at(field, e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub y0: Option<Vec<f64>>,
    /// Initial derivatives for orders above one.
    pub dy0: [f64; 2],
    pub t_end: f64,
    pub h: f64,
    pub escape_magnitude: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            y0: None,
            dy0: [0.0, 0.0],
            t_end: 40.0,
            h: 0.01,
            escape_magnitude: fraclv::solver::DEFAULT_ESCAPE_MAGNITUDE,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinConfig {
    pub y1: [f64; 2],
    pub y2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "BasinConfig::default_t_end")]
    pub t_end: f64,
    #[serde(default = "BasinConfig::default_h")]
    pub h: f64,
    #[serde(default = "BasinConfig::default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "BasinConfig::default_window_fraction")]
    pub window_fraction: f64,
    #[serde(default = "BasinConfig::default_escape")]
    pub escape_magnitude: f64,
    #[serde(default = "BasinConfig::default_perturbation")]
    pub perturbation: f64,
    /// Equilibrium whose basin boundary is extracted.
    #[serde(default)]
    pub target: usize,
}

impl BasinConfig {
    fn default_t_end() -> f64 {
        40.0
    }
    fn default_h() -> f64 {
        0.05
    }
    fn default_epsilon() -> f64 {
        1e-3
    }
    fn default_window_fraction() -> f64 {
        0.1
    }
    fn default_escape() -> f64 {
        fraclv::solver::DEFAULT_ESCAPE_MAGNITUDE
    }
    fn default_perturbation() -> f64 {
        1e-9
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparatrixConfig {
    pub budget: f64,
    pub step: f64,
    pub offset: f64,
    /// `[y1_min, y1_max, y2_min, y2_max]`
    pub window: Option<[f64; 4]>,
    pub project: bool,
    /// Keep this many evenly spread points; 0 keeps all.
    pub points: usize,
}

impl Default for SeparatrixConfig {
    fn default() -> Self {
        let t = fraclv::lotka::TraceOptions::default();
        Self {
            budget: t.budget,
            step: t.step,
            offset: t.offset,
            window: t.window,
            project: t.project,
            points: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub tol_band: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            tol_band: fraclv::stability::DEFAULT_TOL_BAND,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitConfig {
    /// Initial points; empty means `simulate.y0`.
    pub starts: Vec<Vec<f64>>,
    /// `[y1_min, y1_max, y2_min, y2_max]`; fitted to the starts when absent.
    pub window: Option<[f64; 4]>,
}

impl RunConfig {
    /// Reads `path` and applies `KEY=VALUE` overrides on dotted keys.
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        if overrides.is_empty() {
            // straight from the text so messages carry line numbers
            return toml::from_str(text).map_err(|e| CliError::Config(e.to_string()));
        }
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn model(&self) -> CliResult<Model> {
        let m = &self.model;
        m.check_keys()?;
        match m.kind {
            ModelKind::Lotka => {
                let (a, b, c) = (m.a.unwrap(), m.b.unwrap(), m.c.unwrap());
                let params = LotkaParams::new(a, b, c).map_err(|e| CliError::at("model", e))?;
                let alpha = m.alpha.as_ref().unwrap().resolve("model.alpha")?;
                let beta = m.beta.as_ref().unwrap().resolve("model.beta")?;
                let system =
                    LotkaSystem::new(params, alpha, beta).map_err(|e| CliError::at("model", e))?;
                Ok(Model::Lotka(system))
            }
            ModelKind::Generic => {
                let orders = m
                    .orders
                    .as_ref()
                    .unwrap()
                    .iter()
                    .enumerate()
                    .map(|(k, o)| o.resolve(&format!("model.orders[{k}]")))
                    .collect::<CliResult<Vec<_>>>()?;
                let field = PolynomialField::new(m.equations.as_ref().unwrap())?;
                if field.dim() != orders.len() {
                    return Err(CliError::Config(format!(
                        "model: {} equations but {} orders",
                        field.dim(),
                        orders.len()
                    )));
                }
                let equilibria = m.equilibria.clone().unwrap_or_default();
                for (k, e) in equilibria.iter().enumerate() {
                    if e.len() != field.dim() {
                        return Err(CliError::Config(format!(
                            "model.equilibria[{k}]: expected {} components, got {}",
                            field.dim(),
                            e.len()
                        )));
                    }
                }
                Ok(Model::Generic(GenericModel {
                    orders,
                    field,
                    equilibria,
                }))
            }
        }
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not KEY=VALUE")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in path {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override '{key}': '{p}' is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// A validated model.
#[derive(Debug, Clone)]
pub enum Model {
    Lotka(LotkaSystem),
    Generic(GenericModel),
}

#[derive(Debug, Clone)]
pub struct GenericModel {
    pub orders: Vec<RationalOrder>,
    pub field: PolynomialField,
    pub equilibria: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    coeff: f64,
    powers: Vec<i32>,
}

/// Autonomous right-hand side with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    equations: Vec<Vec<Term>>,
}

impl PolynomialField {
    pub fn new(equations: &[Vec<Vec<f64>>]) -> CliResult<Self> {
        let n = equations.len();
        if n == 0 {
            return Err(CliError::Config(
                "model.equations: at least one equation is required".into(),
            ));
        }
        let mut out = Vec::with_capacity(n);
        for (i, eq) in equations.iter().enumerate() {
            let mut terms = Vec::with_capacity(eq.len());
            for (k, t) in eq.iter().enumerate() {
                let field = format!("model.equations[{i}][{k}]");
                if t.len() != n + 1 {
                    return Err(CliError::Config(format!(
                        "{field}: expected [coeff, {n} powers], got {} numbers",
                        t.len()
                    )));
                }
                if !t[0].is_finite() {
                    return Err(CliError::Config(format!(
                        "{field}: coefficient must be finite"
                    )));
                }
                let powers = t[1..]
                    .iter()
                    .map(|&p| {
                        if p >= 0.0 && p.fract() == 0.0 && p <= 64.0 {
                            Ok(p as i32)
                        } else {
                            Err(CliError::Config(format!(
                                "{field}: powers must be integers in [0, 64], got {p}"
                            )))
                        }
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                terms.push(Term {
                    coeff: t[0],
                    powers,
                });
            }
            out.push(terms);
        }
        Ok(Self { equations: out })
    }
}

impl VectorField for PolynomialField {
    fn dim(&self) -> usize {
        self.equations.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, eq) in out.iter_mut().zip(&self.equations) {
            *o = eq
                .iter()
                .map(|t| {
                    t.coeff
                        * t.powers
                            .iter()
                            .zip(x)
                            .map(|(&p, &v)| v.powi(p))
                            .product::<f64>()
                })
                .sum();
        }
    }

    fn jacobian(&self, x: &[f64]) -> Option<Matrix> {
        let n = self.dim();
        let mut m = Matrix::zeros(n);
        for (i, eq) in self.equations.iter().enumerate() {
            for j in 0..n {
                let d: f64 = eq
                    .iter()
                    .filter(|t| t.powers[j] > 0)
                    .map(|t| {
                        let rest: f64 = (0..n)
                            .filter(|&k| k != j)
                            .map(|k| x[k].powi(t.powers[k]))
                            .product();
                        t.coeff * f64::from(t.powers[j]) * x[j].powi(t.powers[j] - 1) * rest
                    })
                    .sum();
                m.set(i, j, d);
            }
        }
        Some(m)
    }
}
