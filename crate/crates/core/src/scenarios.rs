//! Named initial conditions with their model, background and reference data.
//!
//! A [`ScenarioConfig`] is fully resolved: [`ScenarioConfig::defaults`] gives
//! every field of a preset and callers override what they need. Random fields
//! come from ChaCha8 seeded with `seed`, drawn in storage order: density
//! first, then each velocity axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::error::{Error, Result};
use crate::gravity::{GravityParams, PotentialBoundary};
use crate::grid::{Boundary, Grid};
use crate::law::StateLaw;
use crate::orchestrator::{
    self, FluidKind, FluidSpec, ModelKind, ModelParams, RunState, SourceMode,
};
use crate::riemann::{delta_wave, expanding_riemann, vacuum_fan, RiemannData};
use crate::state::{FluidState, VACUUM_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[serde(rename = "riemann_1d")]
    Riemann1d,
    DustCollision,
    ChertockTest4,
    #[serde(rename = "gravity_static_1d")]
    GravityStatic1d,
    #[serde(rename = "gravity_static_2d")]
    GravityStatic2d,
    #[serde(rename = "newtonian_expanding_2d")]
    NewtonianExpanding2d,
    MeszarosFreeze,
    JeansSweep,
    #[serde(rename = "relativistic_2d")]
    Relativistic2d,
    MultifluidEquivalence,
    MultifluidDecoupling,
    ExpandingRiemannDelta,
}

impl Preset {
    pub const ALL: [Preset; 12] = [
        Preset::Riemann1d,
        Preset::DustCollision,
        Preset::ChertockTest4,
        Preset::GravityStatic1d,
        Preset::GravityStatic2d,
        Preset::NewtonianExpanding2d,
        Preset::MeszarosFreeze,
        Preset::JeansSweep,
        Preset::Relativistic2d,
        Preset::MultifluidEquivalence,
        Preset::MultifluidDecoupling,
        Preset::ExpandingRiemannDelta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Riemann1d => "riemann_1d",
            Preset::DustCollision => "dust_collision",
            Preset::ChertockTest4 => "chertock_test4",
            Preset::GravityStatic1d => "gravity_static_1d",
            Preset::GravityStatic2d => "gravity_static_2d",
            Preset::NewtonianExpanding2d => "newtonian_expanding_2d",
            Preset::MeszarosFreeze => "meszaros_freeze",
            Preset::JeansSweep => "jeans_sweep",
            Preset::Relativistic2d => "relativistic_2d",
            Preset::MultifluidEquivalence => "multifluid_equivalence",
            Preset::MultifluidDecoupling => "multifluid_decoupling",
            Preset::ExpandingRiemannDelta => "expanding_riemann_delta",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`")))
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Riemann1d => "two constant states, exact vacuum-fan or delta-wave solution",
            Preset::DustCollision => "two rectangular dust clouds colliding in vacuum",
            Preset::ChertockTest4 => {
                "linear velocity 1-x over smooth density, collapse at x=1, t=1"
            }
            Preset::GravityStatic1d => "random 1D dust with self-gravity, static background",
            Preset::GravityStatic2d => "random 2D dust with self-gravity, static background",
            Preset::NewtonianExpanding2d => {
                "random 2D dust with self-gravity in an expanding background"
            }
            Preset::MeszarosFreeze => "pre-formed 2D structure under fast expansion",
            Preset::JeansSweep => "random 2D gas with linear pressure law and self-gravity",
            Preset::Relativistic2d => "random 2D radiation fluid with self-gravity",
            Preset::MultifluidEquivalence => "Newtonian dust and radiation fluid, half each",
            Preset::MultifluidDecoupling => "dark-matter peaks with random baryons, 80/20",
            Preset::ExpandingRiemannDelta => "colliding Riemann data in an expanding background",
        }
    }

    /// Grid dimensions this preset accepts.
    pub fn dims(self) -> &'static [usize] {
        match self {
            Preset::Riemann1d
            | Preset::DustCollision
            | Preset::ChertockTest4
            | Preset::GravityStatic1d
            | Preset::ExpandingRiemannDelta => &[1],
            _ => &[2, 3],
        }
    }

    pub fn model(self) -> ModelKind {
        match self {
            Preset::Riemann1d
            | Preset::DustCollision
            | Preset::ChertockTest4
            | Preset::GravityStatic1d
            | Preset::GravityStatic2d => ModelKind::PressurelessStaticGravity,
            Preset::NewtonianExpanding2d
            | Preset::MeszarosFreeze
            | Preset::JeansSweep
            | Preset::ExpandingRiemannDelta => ModelKind::NewtonianExpanding,
            Preset::Relativistic2d => ModelKind::RelativisticExpanding,
            Preset::MultifluidEquivalence | Preset::MultifluidDecoupling => ModelKind::Multifluid,
        }
    }

    fn fluid_kinds(self) -> Vec<FluidKind> {
        match self {
            Preset::Relativistic2d => vec![FluidKind::Relativistic],
            Preset::MultifluidEquivalence => vec![FluidKind::Newtonian, FluidKind::Relativistic],
            Preset::MultifluidDecoupling => vec![FluidKind::Newtonian, FluidKind::Newtonian],
            _ => vec![FluidKind::Newtonian],
        }
    }
}

/// Scale-factor law of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackgroundSpec {
    Static,
    PowerLaw {
        p: f64,
        t0: f64,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// `(1 + t/t0)^p` with `t0` chosen so that `a` reaches `factor` at the
    /// final step of the run.
    Expansion {
        factor: f64,
        p: f64,
    },
}

impl BackgroundSpec {
    pub fn build(&self, t_end: f64) -> Result<Background> {
        match self {
            BackgroundSpec::Static => Ok(Background::Static),
            BackgroundSpec::PowerLaw { p, t0 } => Background::power_law(*p, *t0),
            BackgroundSpec::Tabulated { times, values } => {
                Background::tabulated(times.clone(), values.clone())
            }
            BackgroundSpec::Expansion { factor, p } => {
                if t_end > 0.0 {
                    Background::power_law_reaching(*factor, t_end, *p)
                } else if *factor == 1.0 {
                    Ok(Background::Static)
                } else {
                    Err(Error::config(
                        "background.factor",
                        "expansion needs at least one step",
                    ))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub shape: Vec<usize>,
    /// Domain length along every axis.
    pub length: f64,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::config(
                "grid.length",
                format!("must be positive (got {})", self.length),
            ));
        }
        let n = *self
            .shape
            .first()
            .ok_or_else(|| Error::config("grid.shape", "must list at least one axis"))?;
        Grid::new(&self.shape, self.length / n as f64, self.boundary)
            .map_err(|e| Error::config("grid", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSpec {
    #[serde(rename = "G")]
    pub g: f64,
    /// Linear pressure coefficient of Newtonian fluids.
    pub kappa: f64,
    /// Speed of light of radiation fluids.
    pub c_light: f64,
    pub source_mode: SourceMode,
    /// Factor used when `source_mode = "uniform"`.
    pub uniform_factor: f64,
    pub potential_boundary: PotentialBoundary,
    pub solver_tol: f64,
    pub max_iter: usize,
}

/// Shape parameters of the initial data. Each preset reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Velocities are uniform in `[-u_amp, u_amp]` per axis.
    pub u_amp: f64,
    pub rho_l: f64,
    pub u_l: f64,
    pub rho_r: f64,
    pub u_r: f64,
    /// Number of pre-formed peaks (decoupling preset).
    pub peaks: usize,
    /// Gaussian width of the peaks as a fraction of the domain.
    pub peak_width: f64,
    /// Steps of static self-gravity run before the scenario starts (freeze preset).
    pub prerun_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub seed: u64,
    pub steps: u64,
    pub r: f64,
    pub grid: GridSpec,
    pub background: BackgroundSpec,
    pub physics: PhysicsSpec,
    pub init: InitSpec,
    /// Mass fraction of each fluid.
    pub fractions: Vec<f64>,
}

const SLOW_EXPANSION: f64 = 3.5;
const FAST_EXPANSION: f64 = 128.0;
/// Largest `r * sound speed` for which runs with pressure stay free of
/// growing odd-even density modes over a hundred steps.
pub const ACOUSTIC_RC: f64 = 0.02;
const MATTER_EXPONENT: f64 = 2.0 / 3.0;
const RADIATION_EXPONENT: f64 = 0.5;

impl ScenarioConfig {
    /// Fully resolved defaults of `preset`.
    pub fn defaults(preset: Preset) -> Self {
        let margin = Boundary::ZeroMargin { width: 2 };
        let grid = |shape: &[usize], length: f64| GridSpec {
            shape: shape.to_vec(),
            length,
            boundary: margin,
        };
        let square = grid(&[200, 200], 1.0);
        let physics = PhysicsSpec {
            g: 0.0,
            kappa: 0.0,
            c_light: 1.0,
            source_mode: SourceMode::PerFluid,
            uniform_factor: crate::gravity::NEWTONIAN_FACTOR,
            potential_boundary: PotentialBoundary::Dirichlet,
            solver_tol: 1e-10,
            max_iter: 20_000,
        };
        let init = InitSpec {
            rho_min: 0.9,
            rho_max: 1.1,
            u_amp: 0.5,
            rho_l: 1.0,
            u_l: -1.0,
            rho_r: 1.0,
            u_r: 1.0,
            peaks: 3,
            peak_width: 0.03,
            prerun_steps: 0,
        };
        let expansion = |factor: f64, p: f64| BackgroundSpec::Expansion { factor, p };
        let base = Self {
            preset,
            seed: 0,
            steps: 100,
            r: 0.5,
            grid: square.clone(),
            background: BackgroundSpec::Static,
            physics,
            init,
            fractions: vec![1.0],
        };
        match preset {
            Preset::Riemann1d => Self {
                steps: 50,
                grid: GridSpec {
                    boundary: Boundary::Outflow,
                    ..grid(&[200], 2.0)
                },
                ..base
            },
            Preset::DustCollision => Self {
                steps: 300,
                r: 1.0,
                grid: grid(&[450], 9.0),
                init: InitSpec {
                    rho_l: 1.0,
                    u_l: 1.0,
                    rho_r: 1.0,
                    u_r: -1.0,
                    ..base.init.clone()
                },
                ..base
            },
            Preset::ChertockTest4 => Self {
                steps: 200,
                grid: grid(&[400], 4.0),
                ..base
            },
            Preset::GravityStatic1d => Self {
                grid: grid(&[200], 1.0),
                physics: PhysicsSpec {
                    g: 1.0,
                    ..base.physics.clone()
                },
                ..base
            },
            Preset::GravityStatic2d => Self {
                physics: PhysicsSpec {
                    g: 1.0,
                    ..base.physics.clone()
                },
                ..base
            },
            Preset::NewtonianExpanding2d => Self {
                background: expansion(SLOW_EXPANSION, MATTER_EXPONENT),
                physics: PhysicsSpec {
                    g: 1.0,
                    ..base.physics.clone()
                },
                ..base
            },
            Preset::MeszarosFreeze => Self {
                background: expansion(FAST_EXPANSION, MATTER_EXPONENT),
                physics: PhysicsSpec {
                    g: 1.0,
                    ..base.physics.clone()
                },
                init: InitSpec {
                    prerun_steps: 60,
                    ..base.init.clone()
                },
                ..base
            },
            Preset::JeansSweep => Self {
                r: ACOUSTIC_RC / 10f64.sqrt(),
                grid: GridSpec {
                    boundary: Boundary::Outflow,
                    ..square.clone()
                },
                background: expansion(SLOW_EXPANSION, MATTER_EXPONENT),
                physics: PhysicsSpec {
                    g: 1.0,
                    kappa: 1.0,
                    ..base.physics.clone()
                },
                ..base
            },
            Preset::Relativistic2d => Self {
                r: 0.25,
                grid: GridSpec {
                    boundary: Boundary::Outflow,
                    ..square.clone()
                },
                background: expansion(SLOW_EXPANSION, RADIATION_EXPONENT),
                physics: PhysicsSpec {
                    g: 50.0,
                    c_light: 0.05,
                    ..base.physics.clone()
                },
                init: InitSpec {
                    u_amp: 0.05,
                    ..base.init.clone()
                },
                ..base
            },
            Preset::MultifluidEquivalence => Self {
                r: ACOUSTIC_RC / 2.0,
                grid: GridSpec {
                    boundary: Boundary::Outflow,
                    ..square.clone()
                },
                background: expansion(SLOW_EXPANSION, MATTER_EXPONENT),
                physics: PhysicsSpec {
                    g: 50.0,
                    c_light: 2.0,
                    ..base.physics.clone()
                },
                fractions: vec![0.5, 0.5],
                ..base
            },
            Preset::MultifluidDecoupling => Self {
                background: expansion(SLOW_EXPANSION, MATTER_EXPONENT),
                physics: PhysicsSpec {
                    g: 10.0,
                    ..base.physics.clone()
                },
                fractions: vec![0.8, 0.2],
                ..base
            },
            Preset::ExpandingRiemannDelta => Self {
                grid: GridSpec {
                    boundary: Boundary::Outflow,
                    ..grid(&[200], 2.0)
                },
                background: expansion(2.0, MATTER_EXPONENT),
                init: InitSpec {
                    rho_l: 1.0,
                    u_l: 1.0,
                    rho_r: 1.0,
                    u_r: -1.0,
                    ..base.init.clone()
                },
                ..base
            },
        }
    }

    /// Domain coordinate of the left edge of cell 0 (every axis).
    pub fn origin(&self) -> f64 {
        match self.preset {
            Preset::ChertockTest4 => -self.grid.length / 4.0,
            Preset::Riemann1d | Preset::DustCollision | Preset::ExpandingRiemannDelta => {
                -self.grid.length / 2.0
            }
            _ => 0.0,
        }
    }

    pub fn riemann_data(&self) -> RiemannData {
        RiemannData::new(
            self.init.rho_l,
            self.init.u_l,
            self.init.rho_r,
            self.init.u_r,
        )
    }

    pub fn model_params(&self) -> ModelParams {
        let fluids = self
            .preset
            .fluid_kinds()
            .into_iter()
            .map(|kind| FluidSpec {
                kind,
                law: match kind {
                    FluidKind::Relativistic => StateLaw::Radiation {
                        c_light: self.physics.c_light,
                    },
                    FluidKind::Newtonian if self.physics.kappa > 0.0 => StateLaw::Linear {
                        kappa: self.physics.kappa,
                    },
                    FluidKind::Newtonian => StateLaw::Pressureless,
                },
            })
            .collect();
        ModelParams {
            kind: self.preset.model(),
            fluids,
            gravity: GravityParams {
                g: self.physics.g,
                source_factor: self.physics.uniform_factor,
                solver_tol: self.physics.solver_tol,
                max_iter: self.physics.max_iter,
                boundary: self.physics.potential_boundary,
            },
            source_mode: self.physics.source_mode,
            r: self.r,
        }
    }

    /// Checks every field; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        if !self.preset.dims().contains(&grid.dim()) {
            return Err(Error::config(
                "grid.shape",
                format!(
                    "preset {} needs a {:?}-dimensional grid, got {}",
                    self.preset.name(),
                    self.preset.dims(),
                    grid.dim()
                ),
            ));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::config(
                "r",
                format!("must be positive (got {})", self.r),
            ));
        }
        let kinds = self.preset.fluid_kinds();
        if self.fractions.len() != kinds.len() {
            return Err(Error::config(
                "fractions",
                format!("preset {} has {} fluids", self.preset.name(), kinds.len()),
            ));
        }
        if self.fractions.iter().any(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(Error::config("fractions", "fractions must be >= 0"));
        }
        let total: f64 = self.fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "fractions",
                format!("fractions must sum to 1 (got {total})"),
            ));
        }
        let p = &self.physics;
        if !(p.g >= 0.0 && p.g.is_finite()) {
            return Err(Error::config(
                "physics.G",
                format!("must be >= 0 (got {})", p.g),
            ));
        }
        if !(p.kappa >= 0.0 && p.kappa.is_finite()) {
            return Err(Error::config(
                "physics.kappa",
                format!("must be >= 0 (got {})", p.kappa),
            ));
        }
        if !(p.c_light > 0.0 && p.c_light.is_finite()) {
            return Err(Error::config(
                "physics.c_light",
                format!("must be > 0 (got {})", p.c_light),
            ));
        }
        if !(p.solver_tol > 0.0) || p.max_iter == 0 {
            return Err(Error::config(
                "physics.solver_tol",
                "solver tolerance and max_iter must be positive",
            ));
        }
        if self.preset.model() == ModelKind::PressurelessStaticGravity
            && self.background != BackgroundSpec::Static
        {
            return Err(Error::config(
                "background",
                format!("preset {} runs on a static background", self.preset.name()),
            ));
        }
        let i = &self.init;
        if !(0.0 <= i.rho_min && i.rho_min <= i.rho_max) {
            return Err(Error::config(
                "init.rho_min",
                "need 0 <= rho_min <= rho_max",
            ));
        }
        if !(i.u_amp >= 0.0) {
            return Err(Error::config("init.u_amp", "must be >= 0"));
        }
        if !(i.rho_l >= 0.0 && i.rho_r >= 0.0) {
            return Err(Error::config(
                "init.rho_l",
                "Riemann densities must be >= 0",
            ));
        }
        if !(i.peak_width > 0.0) {
            return Err(Error::config("init.peak_width", "must be positive"));
        }
        let bg = self
            .background
            .build(self.t_end(&grid))
            .map_err(|e| Error::config("background", e.to_string()))?;
        let k = if kinds.contains(&FluidKind::Relativistic) {
            orchestrator::RELATIVISTIC_SPEED
        } else {
            1.0
        };
        let drift = bg.drift_factor(0.0, self.r * grid.h())?;
        let worst = self.r * k * self.initial_speed_bound() * drift;
        if worst > crate::transport::CFL_LIMIT {
            return Err(Error::config(
                "r",
                format!(
                    "r = {} moves cells by up to {worst} > 1 on the first step (largest admissible r is {})",
                    self.r,
                    self.r / worst
                ),
            ));
        }
        Ok(())
    }

    /// Upper bound of |u| over the generated initial data, before any prerun.
    pub fn initial_speed_bound(&self) -> f64 {
        let i = &self.init;
        match self.preset {
            Preset::Riemann1d | Preset::DustCollision | Preset::ExpandingRiemannDelta => {
                i.u_l.abs().max(i.u_r.abs())
            }
            // u = 1 - x on [0, 2]
            Preset::ChertockTest4 => 1.0,
            _ => i.u_amp,
        }
    }

    /// Time of the final step.
    pub fn t_end(&self, grid: &Grid) -> f64 {
        self.steps as f64 * self.r * grid.h()
    }
}

/// A generated run together with the model that advances it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: ModelParams,
    pub run: RunState,
}

impl Scenario {
    pub fn steps(&self) -> u64 {
        self.config.steps
    }
}

/// Builds the initial run of `config`. The initial state is checked for
/// positivity and a CFL-admissible first step.
pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let grid = config.grid.build()?;
    let params = config.model_params();
    params
        .validate()
        .map_err(|e| Error::config("physics", e.to_string()))?;
    let bg = config.background.build(config.t_end(&grid))?;
    let fluids = initial_fluids(config, &grid)?;
    let run = RunState::new(grid, bg, fluids)?;
    check_initial_cfl(&run, &params)?;
    Ok(Scenario {
        config: config.clone(),
        params,
        run,
    })
}

/// Rejects a configuration whose first transport step already violates CFL.
pub fn check_initial_cfl(run: &RunState, params: &ModelParams) -> Result<()> {
    let t1 = params.r * run.grid.h();
    let g = run.bg.drift_factor(0.0, t1)?;
    for (f, spec) in run.fluids.iter().zip(&params.fluids) {
        let k = match spec.kind {
            FluidKind::Newtonian => 1.0,
            FluidKind::Relativistic => orchestrator::RELATIVISTIC_SPEED,
        };
        let worst = params.r * k * f.max_speed() * g;
        if worst > crate::transport::CFL_LIMIT {
            return Err(Error::config(
                "r",
                format!(
                    "r = {} moves cells by {worst} > 1 on the first step (largest admissible r is {})",
                    params.r,
                    params.r / worst
                ),
            ));
        }
    }
    Ok(())
}

fn cell_centers(grid: &Grid, origin: f64) -> Vec<Vec<f64>> {
    (0..grid.len())
        .map(|c| {
            grid.unravel(c)
                .iter()
                .map(|&i| origin + grid.center(i))
                .collect()
        })
        .collect()
}

fn random_fields(grid: &Grid, init: &InitSpec, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>) {
    let rho = (0..grid.len())
        .map(|_| uniform(rng, init.rho_min, init.rho_max))
        .collect();
    let vel = (0..grid.dim())
        .map(|_| {
            (0..grid.len())
                .map(|_| uniform(rng, -init.u_amp, init.u_amp))
                .collect()
        })
        .collect();
    (rho, vel)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Length of `[a, b]` inside cell `[x0, x0 + h]`, as a fraction of `h`.
fn cell_fraction(x0: f64, h: f64, a: f64, b: f64) -> f64 {
    ((x0 + h).min(b) - x0.max(a)).max(0.0) / h
}

fn finish(grid: &Grid, rho: Vec<f64>, vel: Vec<Vec<f64>>) -> Result<FluidState> {
    let mut s = FluidState::from_primitive(grid, rho, vel)?;
    s.apply_margin(grid);
    Ok(s)
}

/// Rescales `s` so that its interior mean density is `fraction`.
fn normalise(mut s: FluidState, grid: &Grid, fraction: f64) -> FluidState {
    let (sum, count) = (0..s.len())
        .filter(|&c| !grid.in_margin(&grid.unravel(c)))
        .fold((0.0, 0usize), |(m, k), c| (m + s.rho()[c], k + 1));
    if sum > 0.0 {
        s.scale_density(fraction * count as f64 / sum);
    }
    s
}

fn initial_fluids(cfg: &ScenarioConfig, grid: &Grid) -> Result<Vec<FluidState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let origin = cfg.origin();
    let h = grid.h();
    let n = grid.len();
    let init = &cfg.init;
    let fluids = match cfg.preset {
        Preset::Riemann1d | Preset::ExpandingRiemannDelta => {
            let mut rho = Vec::with_capacity(n);
            let mut u = Vec::with_capacity(n);
            for i in 0..n {
                let x0 = origin + i as f64 * h;
                let fl = cell_fraction(x0, h, f64::NEG_INFINITY, 0.0);
                let fr = 1.0 - fl;
                let r = fl * init.rho_l + fr * init.rho_r;
                let m = fl * init.rho_l * init.u_l + fr * init.rho_r * init.u_r;
                rho.push(r);
                u.push(if r > 0.0 { m / r } else { 0.0 });
            }
            vec![finish(grid, rho, vec![u])?]
        }
        Preset::DustCollision => {
            let l = cfg.grid.length;
            let half = l / 18.0;
            let clouds = [
                (-l / 4.0, init.rho_l, init.u_l),
                (l / 4.0, init.rho_r, init.u_r),
            ];
            let vacuum = VACUUM_FACTOR;
            let mut rho = vec![0.0; n];
            let mut u = vec![0.0; n];
            for i in 0..n {
                let x0 = origin + i as f64 * h;
                let mut m = 0.0;
                let mut p = 0.0;
                for &(c, d, v) in &clouds {
                    let f = cell_fraction(x0, h, c - half, c + half);
                    m += f * d;
                    p += f * d * v;
                }
                rho[i] = if m > 0.0 { m } else { vacuum };
                u[i] = if m > 0.0 { p / m } else { 0.0 };
            }
            vec![finish(grid, rho, vec![u])?]
        }
        Preset::ChertockTest4 => {
            let centers = cell_centers(grid, origin);
            let mut rho = vec![0.0; n];
            let mut u = vec![0.0; n];
            for (i, x) in centers.iter().map(|c| c[0]).enumerate() {
                if (0.0..=2.0).contains(&x) {
                    rho[i] = 1.0 + 0.5 * (std::f64::consts::PI * x).sin();
                    u[i] = 1.0 - x;
                }
            }
            vec![finish(grid, rho, vec![u])?]
        }
        Preset::GravityStatic1d
        | Preset::GravityStatic2d
        | Preset::NewtonianExpanding2d
        | Preset::JeansSweep
        | Preset::Relativistic2d => {
            let (rho, vel) = random_fields(grid, init, &mut rng);
            vec![finish(grid, rho, vel)?]
        }
        Preset::MeszarosFreeze => {
            let (rho, vel) = random_fields(grid, init, &mut rng);
            let mut pre = RunState::new(
                grid.clone(),
                Background::Static,
                vec![finish(grid, rho, vel)?],
            )?;
            let mut params = cfg.model_params();
            params.kind = ModelKind::PressurelessStaticGravity;
            params.fluids[0].law = StateLaw::Pressureless;
            orchestrator::run(&mut pre, &params, init.prerun_steps, 0)?;
            pre.fluids
        }
        Preset::MultifluidEquivalence => {
            let mut out = Vec::new();
            for &frac in &cfg.fractions {
                let (rho, vel) = random_fields(grid, init, &mut rng);
                out.push(normalise(finish(grid, rho, vel)?, grid, frac));
            }
            out
        }
        Preset::MultifluidDecoupling => {
            let l = cfg.grid.length;
            let w = init.peak_width * l;
            let centres: Vec<Vec<f64>> = (0..init.peaks)
                .map(|_| {
                    (0..grid.dim())
                        .map(|_| uniform(&mut rng, 0.25 * l, 0.75 * l))
                        .collect()
                })
                .collect();
            let centers = cell_centers(grid, origin);
            let dark: Vec<f64> = centers
                .iter()
                .map(|x| {
                    0.1 + centres
                        .iter()
                        .map(|c| {
                            let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                            (-d2 / (2.0 * w * w)).exp()
                        })
                        .sum::<f64>()
                })
                .collect();
            let dark = finish(grid, dark, vec![vec![0.0; n]; grid.dim()])?;
            let (rho, vel) = random_fields(grid, init, &mut rng);
            let baryons = finish(grid, rho, vel)?;
            vec![
                normalise(dark, grid, cfg.fractions[0]),
                normalise(baryons, grid, cfg.fractions[1]),
            ]
        }
    };
    Ok(fluids)
}

/// Analytic or summary reference of a preset at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    /// Exact cell averages of density and cell-centre velocities.
    Field { rho: Vec<f64>, u: Vec<Option<f64>> },
    /// Step background (cell averages) plus a delta peak of `mass` at `position`.
    Delta {
        rho: Vec<f64>,
        position: f64,
        mass: f64,
        speed: f64,
    },
    /// All matter reaches `x` at time `t`.
    Collapse { x: f64, t: f64 },
    /// A single merged peak at `x` holding the total mass in at most `max_support_cells`.
    MergedPeak {
        x: f64,
        mass: f64,
        max_support_cells: usize,
    },
}

pub fn reference_solution(cfg: &ScenarioConfig, t: f64) -> Result<Reference> {
    let grid = cfg.grid.build()?;
    let h = grid.h();
    let origin = cfg.origin();
    let n = grid.len();
    match cfg.preset {
        Preset::Riemann1d => {
            let d = cfg.riemann_data();
            if !(t > 0.0) {
                return Err(Error::Parameter(format!("time must be > 0 (got {t})")));
            }
            if d.u_l < d.u_r {
                Ok(fan_field(
                    n,
                    h,
                    origin,
                    |x0, x1| (d.u_l * t).clamp(x0, x1)..(d.u_r * t).clamp(x0, x1),
                    &d,
                    1.0,
                    |x| vacuum_fan(&d, t, x).map(|p| p.u).unwrap_or(None),
                ))
            } else {
                let w = if d.u_l == d.u_r {
                    None
                } else {
                    Some(delta_wave(&d)?)
                };
                let (c, mass) = w.map_or((d.u_l, 0.0), |w| (w.c, w.alpha * t));
                let rho = (0..n)
                    .map(|i| {
                        let x0 = origin + i as f64 * h;
                        let fl = cell_fraction(x0, h, f64::NEG_INFINITY, c * t);
                        fl * d.rho_l + (1.0 - fl) * d.rho_r
                    })
                    .collect();
                Ok(Reference::Delta {
                    rho,
                    position: c * t,
                    mass,
                    speed: c,
                })
            }
        }
        Preset::ExpandingRiemannDelta => {
            let d = cfg.riemann_data();
            if !(d.u_l < d.u_r) {
                return Err(Error::Unsupported(
                    "no closed form for colliding data on an expanding background".into(),
                ));
            }
            let bg = cfg.background.build(cfg.t_end(&grid))?;
            let a0 = bg.scale_at(0.0)?;
            let drift = a0 * bg.inverse_square_integral(0.0, t)?;
            let decay = a0 / bg.scale_at(t)?;
            Ok(fan_field(
                n,
                h,
                origin,
                |x0, x1| (d.u_l * drift).clamp(x0, x1)..(d.u_r * drift).clamp(x0, x1),
                &d,
                decay,
                |x| {
                    expanding_riemann(&d, &bg, t, x)
                        .map(|p| p.u)
                        .unwrap_or(None)
                },
            ))
        }
        Preset::ChertockTest4 => Ok(Reference::Collapse { x: 1.0, t: 1.0 }),
        Preset::DustCollision => {
            let l = cfg.grid.length;
            let i = &cfg.init;
            Ok(Reference::MergedPeak {
                x: 0.0,
                mass: l / 9.0 * (i.rho_l + i.rho_r),
                max_support_cells: 30,
            })
        }
        other => Err(Error::Unsupported(format!(
            "preset {} has no reference solution",
            other.name()
        ))),
    }
}

/// Cell averages of a step profile with a vacuum gap, states decayed by `decay^3`.
fn fan_field(
    n: usize,
    h: f64,
    origin: f64,
    gap: impl Fn(f64, f64) -> std::ops::Range<f64>,
    d: &RiemannData,
    decay: f64,
    velocity: impl Fn(f64) -> Option<f64>,
) -> Reference {
    let d3 = decay * decay * decay;
    let mut rho = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        let x0 = origin + i as f64 * h;
        let x1 = x0 + h;
        let g = gap(x0, x1);
        let left = (g.start - x0) / h;
        let right = (x1 - g.end) / h;
        rho.push((left * d.rho_l + right * d.rho_r) * d3);
        u.push(velocity(x0 + h / 2.0));
    }
    Reference::Field { rho, u }
}
