//! Splitting drivers: transport first, then the shared Poisson solve and the
//! gravity/pressure kick, then (for radiation fluids) the velocity correction.

use serde::{Deserialize, Serialize};

use crate::background::Background;
use crate::diagnostics::{diagnostics, Diagnostics};
use crate::error::{Error, Result};
use crate::gravity::{
    newtonian_kick, relativistic_kick, solve_source, GravityParams, Potential, NEWTONIAN_FACTOR,
    RADIATION_FACTOR,
};
use crate::grid::Grid;
use crate::law::StateLaw;
use crate::state::FluidState;
use crate::transport::{self, check_cfl, project, CFL_LIMIT};

/// Velocity multiplier of the relativistic transport sub-step.
pub const RELATIVISTIC_SPEED: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluidKind {
    Newtonian,
    Relativistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidSpec {
    pub kind: FluidKind,
    pub law: StateLaw,
}

impl FluidSpec {
    pub fn dust() -> Self {
        Self {
            kind: FluidKind::Newtonian,
            law: StateLaw::Pressureless,
        }
    }

    pub fn radiation(c_light: f64) -> Self {
        Self {
            kind: FluidKind::Relativistic,
            law: StateLaw::Radiation { c_light },
        }
    }

    fn source_factor(&self) -> f64 {
        match self.kind {
            FluidKind::Newtonian => NEWTONIAN_FACTOR,
            FluidKind::Relativistic => RADIATION_FACTOR,
        }
    }

    fn speed_factor(&self) -> f64 {
        match self.kind {
            FluidKind::Newtonian => 1.0,
            FluidKind::Relativistic => RELATIVISTIC_SPEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PressurelessStaticGravity,
    NewtonianExpanding,
    RelativisticExpanding,
    Multifluid,
}

/// How the shared Poisson source weights each fluid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    /// `sum_i factor_i G a^2 rho_i`, 4 pi for Newtonian and 8 pi for radiation fluids.
    #[default]
    PerFluid,
    /// `GravityParams::source_factor * G a^2 sum_i rho_i`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub fluids: Vec<FluidSpec>,
    pub gravity: GravityParams,
    #[serde(default)]
    pub source_mode: SourceMode,
    pub r: f64,
}

impl ModelParams {
    pub fn single(kind: ModelKind, fluid: FluidSpec, g: f64, r: f64) -> Self {
        let gravity = match fluid.kind {
            FluidKind::Newtonian => GravityParams::newtonian(g),
            FluidKind::Relativistic => GravityParams::relativistic(g),
        };
        Self {
            kind,
            fluids: vec![fluid],
            gravity,
            source_mode: SourceMode::PerFluid,
            r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Parameter(format!(
                "r must be positive (got {})",
                self.r
            )));
        }
        self.gravity.validate()?;
        for f in &self.fluids {
            f.law.validate()?;
            match (f.kind, f.law) {
                (FluidKind::Relativistic, StateLaw::Radiation { .. }) => {}
                (FluidKind::Relativistic, _) => {
                    return Err(Error::Parameter(
                        "relativistic fluids need the radiation law".into(),
                    ))
                }
                (FluidKind::Newtonian, StateLaw::Radiation { .. }) => {
                    return Err(Error::Parameter(
                        "the radiation law needs a relativistic fluid".into(),
                    ))
                }
                _ => {}
            }
        }
        let one = |want: FluidKind| -> Result<()> {
            if self.fluids.len() != 1 || self.fluids[0].kind != want {
                return Err(Error::Parameter(format!(
                    "{:?} takes exactly one {want:?} fluid",
                    self.kind
                )));
            }
            Ok(())
        };
        match self.kind {
            ModelKind::PressurelessStaticGravity => {
                one(FluidKind::Newtonian)?;
                if !self.fluids[0].law.is_pressureless() {
                    return Err(Error::Parameter(
                        "static gravity model is pressureless".into(),
                    ));
                }
            }
            ModelKind::NewtonianExpanding => one(FluidKind::Newtonian)?,
            ModelKind::RelativisticExpanding => one(FluidKind::Relativistic)?,
            ModelKind::Multifluid => {
                if self.fluids.len() < 2 {
                    return Err(Error::Parameter(
                        "multifluid needs at least two fluids".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One sampled history entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: u64,
    pub t: f64,
    pub a: f64,
    pub fluids: Vec<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub grid: Grid,
    pub bg: Background,
    pub fluids: Vec<FluidState>,
    pub t: f64,
    pub n: u64,
    /// Last potential, reused as the initial guess of the next solve.
    pub potential: Option<Potential>,
    pub history: Vec<Record>,
}

impl RunState {
    pub fn new(grid: Grid, bg: Background, fluids: Vec<FluidState>) -> Result<Self> {
        bg.validate()?;
        if fluids.is_empty() {
            return Err(Error::Parameter("a run needs at least one fluid".into()));
        }
        if fluids
            .iter()
            .any(|f| f.len() != grid.len() || f.dim() != grid.dim())
        {
            return Err(Error::Parameter(
                "every fluid must live on the run grid".into(),
            ));
        }
        Ok(Self {
            grid,
            bg,
            fluids,
            t: 0.0,
            n: 0,
            potential: None,
            history: Vec::new(),
        })
    }

    pub fn record(&self) -> Result<Record> {
        Ok(Record {
            n: self.n,
            t: self.t,
            a: self.bg.scale_at(self.t)?,
            fluids: self
                .fluids
                .iter()
                .map(|f| diagnostics(f, &self.grid, &self.bg, self.t))
                .collect::<Result<_>>()?,
        })
    }

    pub fn dt(&self, params: &ModelParams) -> f64 {
        params.r * self.grid.h()
    }
}

fn expect_kind(params: &ModelParams, kind: ModelKind) -> Result<()> {
    if params.kind != kind {
        return Err(Error::Parameter(format!(
            "expected a {kind:?} model, got {:?}",
            params.kind
        )));
    }
    Ok(())
}

pub fn step_static_gravity(run: &RunState, params: &ModelParams) -> Result<RunState> {
    expect_kind(params, ModelKind::PressurelessStaticGravity)?;
    if !run.bg.is_static() {
        return Err(Error::Parameter(
            "static gravity model needs a static background".into(),
        ));
    }
    advance(run, params)
}

pub fn step_newtonian(run: &RunState, params: &ModelParams) -> Result<RunState> {
    expect_kind(params, ModelKind::NewtonianExpanding)?;
    advance(run, params)
}

pub fn step_relativistic(run: &RunState, params: &ModelParams) -> Result<RunState> {
    expect_kind(params, ModelKind::RelativisticExpanding)?;
    advance(run, params)
}

pub fn step_multifluid(run: &RunState, params: &ModelParams) -> Result<RunState> {
    expect_kind(params, ModelKind::Multifluid)?;
    advance(run, params)
}

/// Dispatches on `params.kind`.
pub fn step(run: &RunState, params: &ModelParams) -> Result<RunState> {
    match params.kind {
        ModelKind::PressurelessStaticGravity => step_static_gravity(run, params),
        ModelKind::NewtonianExpanding => step_newtonian(run, params),
        ModelKind::RelativisticExpanding => step_relativistic(run, params),
        ModelKind::Multifluid => step_multifluid(run, params),
    }
}

/// Shared Poisson right-hand side at scale factor `a`.
fn poisson_source(fluids: &[FluidState], params: &ModelParams, a: f64) -> Vec<f64> {
    let g = params.gravity.g;
    let mut src = vec![0.0; fluids[0].len()];
    for (f, spec) in fluids.iter().zip(&params.fluids) {
        let factor = match params.source_mode {
            SourceMode::PerFluid => spec.source_factor(),
            SourceMode::Uniform => params.gravity.source_factor,
        };
        let k = factor * g * a * a;
        for (s, &rho) in src.iter_mut().zip(f.rho()) {
            *s += k * rho;
        }
    }
    src
}

fn advance(run: &RunState, params: &ModelParams) -> Result<RunState> {
    params.validate()?;
    if params.fluids.len() != run.fluids.len() {
        return Err(Error::Parameter(format!(
            "model has {} fluids, run has {}",
            params.fluids.len(),
            run.fluids.len()
        )));
    }
    let grid = &run.grid;
    let (r, dt) = (params.r, run.dt(params));
    let t1 = run.t + r * grid.h();
    let a1 = run.bg.scale_at(t1)?;

    // (i) transport
    let moved: Vec<FluidState> = run
        .fluids
        .iter()
        .zip(&params.fluids)
        .map(|(f, spec)| {
            transport::step_expanding_scaled(f, grid, &run.bg, run.t, r, spec.speed_factor())
        })
        .collect::<Result<_>>()?;

    // (ii) shared potential, then per-fluid kicks
    let potential = if params.gravity.g == 0.0 {
        Potential::zero(grid, params.gravity.boundary)
    } else {
        let src = poisson_source(&moved, params, a1);
        solve_source(&src, grid, &params.gravity, run.potential.as_ref())?
    };
    let mut fluids = Vec::with_capacity(moved.len());
    for (f, spec) in moved.iter().zip(&params.fluids) {
        let kicked = match (spec.kind, spec.law) {
            (FluidKind::Relativistic, StateLaw::Radiation { c_light }) => {
                let k = relativistic_kick(f, grid, &potential, c_light, a1, dt)?;
                // (iii) velocity correction
                correct_velocity(&k, grid, r, a1)?
            }
            _ => newtonian_kick(f, grid, &potential, &spec.law, a1, dt)?,
        };
        fluids.push(kicked);
    }
    Ok(RunState {
        grid: run.grid.clone(),
        bg: run.bg.clone(),
        fluids,
        t: t1,
        n: run.n + 1,
        potential: Some(potential),
        history: run.history.clone(),
    })
}

/// Moves the velocity fields by `-u dt / (6a)` with the overlap projection,
/// keeping the density; momentum is rebuilt as `rho u`.
fn correct_velocity(state: &FluidState, grid: &Grid, r: f64, a: f64) -> Result<FluidState> {
    let vel: Vec<Vec<f64>> = (0..grid.dim()).map(|ax| state.velocity_field(ax)).collect();
    let shifts: Vec<Vec<f64>> = vel
        .iter()
        .map(|u| u.iter().map(|&v| -(r * v) / (6.0 * a)).collect())
        .collect();
    check_cfl(&shifts, CFL_LIMIT)?;
    let fields: Vec<&[f64]> = vel.iter().map(|v| v.as_slice()).collect();
    let moved = project(grid, &fields, &shifts);
    let rho = state.rho();
    let moms = moved
        .into_iter()
        .map(|u| {
            u.iter()
                .enumerate()
                .map(|(c, &v)| if state.is_vacuum(c) { 0.0 } else { rho[c] * v })
                .collect()
        })
        .collect();
    Ok(state.with_fields(rho.to_vec(), moms))
}

/// Sampling plan of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPlan {
    /// Record diagnostics every k steps (0 disables).
    pub diagnostics_every: u64,
    /// Invoke the snapshot hook every k steps (0 disables).
    pub snapshot_every: u64,
}

impl Default for OutputPlan {
    fn default() -> Self {
        Self {
            diagnostics_every: 1,
            snapshot_every: 0,
        }
    }
}

/// Advances `run` by `steps` steps in place. On error `run` keeps the last
/// valid state. The hook receives the state at step 0 and every
/// `snapshot_every` steps.
pub fn run_steps<F>(
    run: &mut RunState,
    params: &ModelParams,
    steps: u64,
    plan: OutputPlan,
    mut on_snapshot: F,
) -> Result<()>
where
    F: FnMut(&RunState) -> Result<()>,
{
    params.validate()?;
    let sample = |every: u64, n: u64| every > 0 && n % every == 0;
    if run.history.is_empty() && plan.diagnostics_every > 0 {
        let rec = run.record()?;
        run.history.push(rec);
    }
    if sample(plan.snapshot_every, run.n) {
        on_snapshot(run)?;
    }
    for _ in 0..steps {
        let history = std::mem::take(&mut run.history);
        let mut next = match step(run, params) {
            Ok(next) => next,
            Err(e) => {
                run.history = history;
                return Err(e);
            }
        };
        next.history = history;
        if sample(plan.diagnostics_every, next.n) {
            let rec = next.record()?;
            next.history.push(rec);
        }
        *run = next;
        if sample(plan.snapshot_every, run.n) {
            on_snapshot(run)?;
        }
    }
    Ok(())
}

/// [`run_steps`] without snapshots.
pub fn run(
    run: &mut RunState,
    params: &ModelParams,
    steps: u64,
    diagnostics_every: u64,
) -> Result<()> {
    let plan = OutputPlan {
        diagnostics_every,
        snapshot_every: 0,
    };
    run_steps(run, params, steps, plan, |_| Ok(()))
}
