//! Scenario files. Unknown fields are rejected; errors carry the JSON path.

use cosmowave::cosmology::{Anchor, ScaleFactorModel, SideParams, Tau};
use cosmowave::potential::CouplingSpec;
use cosmowave::spectrum::ManifoldKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub universe: Option<UniverseConfig>,
    pub coupling: Option<CouplingConfig>,
    pub manifold: Option<ManifoldConfig>,
    pub modes: Option<ModesConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub classify: Option<ClassifyConfig>,
    pub potential: Option<PotentialConfig>,
    pub evolve: Option<EvolveConfig>,
    pub asymptotics: Option<AsymptoticsConfig>,
    pub bogoliubov: Option<BogoliubovConfig>,
    pub wkb: Option<WkbConfig>,
    pub riccati: Option<RiccatiConfig>,
    pub duffing: Option<DuffingConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UniverseConfig {
    SingleFuture { t_minus: f64, t_plus: f64, c0: f64, eta0: f64, c1: Option<f64>, eta1: Option<f64> },
    SinglePast { t_minus: f64, t_plus: f64, c0: f64, eta0: f64, c1: Option<f64>, eta1: Option<f64> },
    TwoSided { t_minus: f64, t_plus: f64, c0_minus: f64, eta0_minus: f64, c0_plus: f64, eta0_plus: f64 },
    BigRip { n: u32, t_minus: f64, t_plus: f64 },
    Constant { c: f64, t_minus: f64, t_plus: f64 },
}

fn side(c0: f64, eta0: f64, c1: Option<f64>, eta1: Option<f64>) -> SideParams {
    match (c1, eta1) {
        (Some(c1), Some(e1)) => SideParams::new(c0, eta0, c1, e1),
        (Some(c1), None) => SideParams::new(c0, eta0, c1, eta0 + 1.0),
        _ => SideParams::leading(c0, eta0),
    }
}

impl UniverseConfig {
    pub fn build(&self) -> cosmowave::Result<ScaleFactorModel> {
        match *self {
            UniverseConfig::SingleFuture { t_minus, t_plus, c0, eta0, c1, eta1 } => {
                ScaleFactorModel::single_future(t_minus, t_plus, side(c0, eta0, c1, eta1))
            }
            UniverseConfig::SinglePast { t_minus, t_plus, c0, eta0, c1, eta1 } => {
                ScaleFactorModel::single_past(t_minus, t_plus, side(c0, eta0, c1, eta1))
            }
            UniverseConfig::TwoSided { t_minus, t_plus, c0_minus, eta0_minus, c0_plus, eta0_plus } => {
                ScaleFactorModel::two_sided(t_minus, t_plus, c0_minus, eta0_minus, c0_plus, eta0_plus)
            }
            UniverseConfig::BigRip { n, t_minus, t_plus } => ScaleFactorModel::big_rip(n, t_minus, t_plus),
            UniverseConfig::Constant { c, t_minus, t_plus } => ScaleFactorModel::constant(c, t_minus, t_plus),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum XiConfig {
    Value(f64),
    Named(XiName),
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiName {
    Conformal,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub xi: XiConfig,
    #[serde(default)]
    pub m: f64,
    pub d: u32,
}

impl CouplingConfig {
    pub fn build(&self) -> cosmowave::Result<CouplingSpec> {
        match self.xi {
            XiConfig::Named(XiName::Conformal) => CouplingSpec::conformal(self.d, self.m),
            XiConfig::Value(x) => CouplingSpec::new(x, self.d, self.m),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldConfig {
    Sphere { radius: f64, d: u32 },
    Torus { lengths: Vec<f64> },
}

impl ManifoldConfig {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            ManifoldConfig::Sphere { radius, d } => ManifoldKind::SphereSd { radius: *radius, d: *d },
            ManifoldConfig::Torus { lengths } => ManifoldKind::FlatTorusTd { lengths: lengths.clone() },
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    pub eigenvalue_cutoff: f64,
    /// defaults to the cut required by the background
    pub infrared_delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_margin")]
    pub endpoint_margin: f64,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_margin() -> f64 {
    cosmowave::dynamics::DEFAULT_MARGIN
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rtol: default_rtol(), atol: default_atol(), endpoint_margin: default_margin() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SideChoice {
    Past,
    Future,
    Both,
}

fn both() -> SideChoice {
    SideChoice::Both
}
fn future() -> SideChoice {
    SideChoice::Future
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default = "both")]
    pub side: SideChoice,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "both")]
    pub side: SideChoice,
    /// innermost distance (finite end) or largest |tau| (infinite end)
    pub inner: Option<f64>,
    #[serde(default = "two")]
    pub decades: f64,
    #[serde(default = "twenty")]
    pub fit_points: usize,
    /// points of the V(tau) table across the chart
    #[serde(default = "two_hundred")]
    pub samples: usize,
}

fn two() -> f64 {
    2.0
}
fn twenty() -> usize {
    20
}
fn two_hundred() -> usize {
    200
}

/// A conformal time: offset `s` from `anchor` (minus, origin or plus).
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TauConfig {
    pub anchor: AnchorName,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorName {
    Minus,
    Origin,
    Plus,
}

impl TauConfig {
    pub fn tau(&self) -> Tau {
        let anchor = match self.anchor {
            AnchorName::Minus => Anchor::Minus,
            AnchorName::Origin => Anchor::Origin,
            AnchorName::Plus => Anchor::Plus,
        };
        Tau { anchor, s: self.s }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub mu: Vec<f64>,
    pub tau0: TauConfig,
    pub tau_end: TauConfig,
    pub psi0: [f64; 2],
    pub dpsi0: [f64; 2],
    #[serde(default = "two_hundred")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSeed {
    pub mu: f64,
    #[serde(default = "one")]
    pub mult: u64,
    pub psi0: [f64; 2],
    pub dpsi0: [f64; 2],
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    #[serde(default = "future")]
    pub side: SideChoice,
    pub tau0: TauConfig,
    pub seeds: Vec<ModeSeed>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BogoliubovConfig {
    /// (lo, hi) window in mu for the decay fit
    pub fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothPotentialConfig {
    Gaussian { amplitude: f64, width: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WkbConfig {
    pub potential: SmoothPotentialConfig,
    /// number of correction terms; defaults to l(d) of the coupling, else 2
    pub order: Option<usize>,
    pub span: [f64; 2],
    pub mu: Vec<f64>,
    #[serde(default = "four_hundred")]
    pub samples: usize,
}

fn four_hundred() -> usize {
    400
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiccatiInput {
    /// coef (tau+ - tau)^gamma
    Power { gamma: f64, #[serde(default = "unit")] coef: f64 },
    Constant { value: f64 },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SignChoice {
    Positive,
    Negative,
    Both,
}

fn both_signs() -> SignChoice {
    SignChoice::Both
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiConfig {
    pub input: Vec<RiccatiInput>,
    pub m: Vec<f64>,
    #[serde(default = "both_signs")]
    pub sign: SignChoice,
    #[serde(default)]
    pub tau_plus: f64,
    #[serde(default = "unit")]
    pub d1: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum DuffingGrid {
    List { phi0: Vec<f64> },
    Log { phi0_min: f64, phi0_max: f64, n: usize },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct DuffingConfig {
    #[serde(flatten)]
    pub grid: DuffingGrid,
}

impl DuffingConfig {
    pub fn values(&self) -> Vec<f64> {
        match &self.grid {
            DuffingGrid::List { phi0 } => phi0.clone(),
            DuffingGrid::Log { phi0_min, phi0_max, n } => {
                let n = (*n).max(2);
                (0..n)
                    .map(|i| phi0_min * (phi0_max / phi0_min).powf(i as f64 / (n - 1) as f64))
                    .collect()
            }
        }
    }
}

/// Parses a scenario, reporting the path of the offending field.
pub fn parse(text: &str) -> Result<ScenarioConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        format!("{path}: {}", e.into_inner())
    })
}
