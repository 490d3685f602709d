//! The self-consistent time loop.
//!
//! A step is split symmetrically around the transport:
//!
//! 1. shift `B±` one node and add half the ray integral of `j^n`;
//! 2. predict `∂tA^{n+1}` with the extrapolated current `2j^n − j^{n−1}`;
//! 3. fill `f^{n+1}` by tracing characteristics through the field history;
//! 4. take `j^{n+1}` from the new moments and finish the ray integral.
//!
//! The predicted field only enters the last RK stage of each trace, where its
//! `O(dt³)` error is harmless; optional corrector passes repeat 3–4.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::PhaseGrid;
use crate::profile::InitialData;
use crate::state::{DistributionState, FieldState, SUPPORT_EPS};
use crate::transport::{check_boundary, fill_analytic, moments, step_depth_one, FieldHistory};
use crate::wave::{finish_kick, initial_fields, integrate_a, shift_and_kick, SourceHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    /// Trace every node back to `t = 0` and evaluate `f₀` there.
    Analytic,
    /// Trace one step and interpolate the stored previous level.
    DepthOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub transport: TransportMode,
    /// When false, particles feel no force and the wave equation has no source.
    pub coupling: bool,
    /// Clip `f` to `[0, ‖f₀‖∞]` after each transport (off by default).
    pub clamp: bool,
    /// Number of distribution levels kept for the `∂x∂tA` representation.
    pub history_cap: usize,
    pub corrector_passes: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            transport: TransportMode::Analytic,
            coupling: true,
            clamp: false,
            history_cap: 4096,
            corrector_passes: 0,
        }
    }
}

/// Distribution, fields, and moments at one time level.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub step: usize,
    pub distribution: DistributionState,
    pub fields: FieldState,
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
}

pub struct Simulation {
    pub grid: PhaseGrid,
    pub data: InitialData,
    pub options: SolverOptions,
    pub state: SimulationState,
    /// `∂tA` felt by the particles at every level so far.
    pub force: FieldHistory,
    /// `j` at every level so far.
    pub sources: SourceHistory,
    /// `f` at levels `0..min(step + 1, history_cap)`.
    pub f_history: Vec<Vec<f64>>,
    threshold: f64,
}

impl Simulation {
    pub fn new(grid: PhaseGrid, data: InitialData, options: SolverOptions) -> Result<Self> {
        let threshold = SUPPORT_EPS * data.f0_sup();
        let dist = DistributionState::sample(&grid, |x, v| data.f0.value(x, v), 0.0, threshold);
        check_boundary(&grid, &dist.values, threshold)?;
        let fields = initial_fields(&data, &grid.x);
        let (rho, j) = moments(&grid, &dist.values);
        let mut force = FieldHistory::new(grid.x, grid.dt);
        force.push(if options.coupling { fields.dt_a() } else { vec![0.0; grid.nx1()] });
        let mut sources = SourceHistory::new(grid.x, grid.dt);
        sources.push(j.clone());
        let f_history = if options.history_cap > 0 { vec![dist.values.clone()] } else { Vec::new() };
        Ok(Simulation {
            grid,
            data,
            options,
            state: SimulationState { step: 0, distribution: dist, fields, rho, j },
            force,
            sources,
            f_history,
            threshold,
        })
    }

    pub fn time(&self) -> f64 {
        self.grid.time(self.state.step)
    }

    pub fn support_threshold(&self) -> f64 {
        self.threshold
    }

    fn transport(&self, n: usize) -> Result<Vec<f64>> {
        let mut f = match self.options.transport {
            TransportMode::Analytic => fill_analytic(&self.grid, &self.data.f0, &self.force, n)?,
            TransportMode::DepthOne => {
                step_depth_one(&self.grid, &self.state.distribution.values, &self.force, n)?
            }
        };
        if self.options.clamp {
            let top = self.data.f0_sup();
            f.iter_mut().for_each(|q| *q = q.clamp(0.0, top));
        }
        check_boundary(&self.grid, &f, self.threshold)?;
        Ok(f)
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<()> {
        let n = self.state.step;
        self.step_inner().map_err(|e| e.at_step(n + 1))
    }

    fn step_inner(&mut self) -> Result<()> {
        let n = self.state.step;
        let dt = self.grid.dt;
        let nx1 = self.grid.nx1();
        let zero = vec![0.0; nx1];
        let coupled = self.options.coupling;
        let j_n = if coupled { self.state.j.clone() } else { zero.clone() };

        let (p, m) = shift_and_kick(&self.state.fields.b_plus, &self.state.fields.b_minus, &j_n, dt);
        let field_with = |j: &[f64]| {
            let (mut p1, mut m1) = (p.clone(), m.clone());
            finish_kick(&mut p1, &mut m1, j, dt);
            (p1, m1)
        };
        let e_of = |p: &[f64], m: &[f64]| -> Vec<f64> { p.iter().zip(m).map(|(a, b)| 0.5 * (a + b)).collect() };

        if coupled {
            let j_pred: Vec<f64> = if n > 0 {
                let prev = &self.sources.j_values[n - 1];
                j_n.iter().zip(prev).map(|(a, b)| 2.0 * a - b).collect()
            } else {
                j_n.clone()
            };
            let (pp, mp) = field_with(&j_pred);
            self.force.push(e_of(&pp, &mp));
        } else {
            self.force.push(zero.clone());
        }

        let mut f = self.transport(n + 1)?;
        let (mut rho, mut j) = moments(&self.grid, &f);
        if coupled {
            for _ in 0..self.options.corrector_passes {
                let (pc, mc) = field_with(&j);
                self.force.replace_last(e_of(&pc, &mc));
                f = self.transport(n + 1)?;
                (rho, j) = moments(&self.grid, &f);
            }
        }

        let (p1, m1) = field_with(if coupled { &j } else { &zero });
        if coupled {
            self.force.replace_last(e_of(&p1, &m1));
        }
        let fs = &self.state.fields;
        let a = integrate_a(&fs.a, &fs.b_plus, &fs.b_minus, &p1, &m1, dt);
        let t = self.grid.time(n + 1);
        self.state.fields = FieldState { b_plus: p1, b_minus: m1, a, time: t };

        if self.f_history.len() == n + 1 && self.f_history.len() < self.options.history_cap {
            self.f_history.push(f.clone());
        }
        self.sources.push(j.clone());
        self.state.distribution = DistributionState::new(&self.grid, f, t, self.threshold);
        self.state.rho = rho;
        self.state.j = j;
        self.state.step = n + 1;
        Ok(())
    }

    /// Run the remaining steps, calling `observe` after the initial state and after every step.
    pub fn run_with(&mut self, mut observe: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        if self.state.step == 0 {
            observe(self)?;
        }
        while self.state.step < self.grid.n_steps {
            self.step()?;
            let step = self.state.step;
            observe(self).map_err(|e| e.at_step(step))?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        self.run_with(|_| Ok(()))
    }
}
