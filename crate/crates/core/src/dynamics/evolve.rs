use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::config::IntegratorConfig;
use super::flow::{integrate, RunStats, Sink};
use super::kernel::{GeneratorKernel, Superoperator};
use crate::error::{Error, Result};
use crate::model::{DecayChannel, HamiltonianSpec};
use crate::quantum::{DensityMatrix, HilbertSpace, Level, StateVector, C64};

type ProbeFn = dyn Fn(&[C64]) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    /// Value at each grid time.
    Sampled,
    /// Largest value seen so far, including every integration step.
    RunningMax,
}

/// Named real function of the raw state (ψ, or row-major vec(ρ)).
#[derive(Clone)]
pub struct Probe {
    name: String,
    mode: ProbeMode,
    f: Arc<ProbeFn>,
}

impl std::fmt::Debug for Probe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Probe").field("name", &self.name).field("mode", &self.mode).finish()
    }
}

impl Probe {
    pub fn sampled(name: impl Into<String>, f: impl Fn(&[C64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), mode: ProbeMode::Sampled, f: Arc::new(f) }
    }

    pub fn running_max(name: impl Into<String>, f: impl Fn(&[C64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), mode: ProbeMode::RunningMax, f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> ProbeMode {
        self.mode
    }

    pub fn eval(&self, x: &[C64]) -> f64 {
        (self.f)(x)
    }
}

/// Sampled observables of one propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    records: Vec<(String, Vec<f64>)>,
    snapshots: Vec<Vec<C64>>,
    final_state: Vec<C64>,
    stats: RunStats,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|(n, _)| n.as_str())
    }

    pub fn record(&self, name: &str) -> Option<&[f64]> {
        self.records.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.record(name).and_then(|v| v.last().copied())
    }

    /// Largest sampled value (for running-max probes, the overall maximum).
    pub fn max(&self, name: &str) -> Option<f64> {
        self.record(name).map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn min(&self, name: &str) -> Option<f64> {
        self.record(name).map(|v| v.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// States at the grid times; empty unless `record_states` was set.
    pub fn snapshots(&self) -> &[Vec<C64>] {
        &self.snapshots
    }

    pub fn final_state(&self) -> &[C64] {
        &self.final_state
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    /// Append another record computed from the stored snapshots or otherwise.
    pub fn push_record(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::InvalidGrid(format!("record '{name}' has {} values for {} times", values.len(), self.times.len())));
        }
        if self.record(&name).is_some() {
            return Err(Error::InvalidParameter { param: name, reason: "duplicate record name".into() });
        }
        self.records.push((name, values));
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Check {
    Norm,
    Trace { dim: usize },
}

struct Recorder<'a> {
    probes: &'a [Probe],
    values: Vec<Vec<f64>>,
    running: Vec<f64>,
    times: Vec<f64>,
    snapshots: Vec<Vec<C64>>,
    keep: bool,
    check: Check,
    reference: f64,
    cfg: &'a IntegratorConfig,
    space: Arc<HilbertSpace>,
}

impl<'a> Recorder<'a> {
    fn new(probes: &'a [Probe], cfg: &'a IntegratorConfig, check: Check, space: Arc<HilbertSpace>) -> Result<Self> {
        for (i, p) in probes.iter().enumerate() {
            if probes[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::InvalidParameter { param: p.name.clone(), reason: "duplicate probe name".into() });
            }
        }
        Ok(Self {
            probes,
            values: vec![Vec::new(); probes.len()],
            running: vec![f64::NEG_INFINITY; probes.len()],
            times: Vec::new(),
            snapshots: Vec::new(),
            keep: cfg.record_states,
            check,
            reference: f64::NAN,
            cfg,
            space,
        })
    }

    fn invariant(&self, x: &[C64]) -> f64 {
        match self.check {
            Check::Norm => x.iter().map(|c| c.norm_sqr()).sum(),
            Check::Trace { dim } => (0..dim).map(|i| x[i * dim + i].re).sum(),
        }
    }

    fn finish(self, final_state: Vec<C64>, stats: RunStats) -> Trajectory {
        let records = self.probes.iter().map(|p| p.name.clone()).zip(self.values).collect();
        Trajectory { times: self.times, records, snapshots: self.snapshots, final_state, stats }
    }
}

impl Sink for Recorder<'_> {
    fn sample(&mut self, index: usize, t: f64, x: &[C64]) -> Result<()> {
        let inv = self.invariant(x);
        if index == 0 {
            self.reference = inv;
        }
        let drift = (inv - self.reference).abs();
        if !(drift <= self.cfg.drift_tol) {
            return Err(match self.check {
                Check::Norm => Error::NormDrift { t, drift },
                Check::Trace { .. } => Error::TraceDrift { t, drift },
            });
        }
        if let (Check::Trace { dim }, Some(every)) = (self.check, self.cfg.positivity_every) {
            if index.is_multiple_of(every) {
                let rho = DensityMatrix::new_unchecked(self.space.clone(), DMatrix::from_row_slice(dim, dim, x))?;
                let min_eig = rho.min_eigenvalue();
                if min_eig < -self.cfg.positivity_tol {
                    return Err(Error::PositivityViolation { t, min_eig });
                }
            }
        }
        self.times.push(t);
        for (i, p) in self.probes.iter().enumerate() {
            let v = p.eval(x);
            let v = match p.mode {
                ProbeMode::Sampled => v,
                ProbeMode::RunningMax => {
                    self.running[i] = self.running[i].max(v);
                    self.running[i]
                }
            };
            self.values[i].push(v);
        }
        if self.keep {
            self.snapshots.push(x.to_vec());
        }
        Ok(())
    }

    fn wants_steps(&self) -> bool {
        self.probes.iter().any(|p| p.mode == ProbeMode::RunningMax)
    }

    fn step(&mut self, _t: f64, x: &[C64]) {
        for (i, p) in self.probes.iter().enumerate() {
            if p.mode == ProbeMode::RunningMax {
                self.running[i] = self.running[i].max(p.eval(x));
            }
        }
    }
}

/// Fastest angular scale of `H(t)`: the largest drive frequency plus the
/// spectral radius of `H` sampled over a drive period.
pub fn drive_scale(h: &HamiltonianSpec) -> f64 {
    let w = h.max_frequency();
    let period = if w > 0.0 { std::f64::consts::TAU / w } else { 0.0 };
    let radius = (0..4)
        .map(|i| {
            let m = h.evaluate(i as f64 * period / 4.0).matrix().clone();
            let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            m.symmetric_eigenvalues().iter().fold(0.0f64, |a, e| a.max(e.abs()))
        })
        .fold(0.0, f64::max);
    w + radius
}

fn decay_scale(channels: &[DecayChannel]) -> f64 {
    channels.iter().map(|c| c.rate * c.jump.matrix().norm_squared()).sum()
}

pub fn evolve_schrodinger(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    grid: &[f64],
    cfg: &IntegratorConfig,
    probes: &[Probe],
) -> Result<Trajectory> {
    if psi0.space() != h.space() {
        return Err(Error::SpaceMismatch("initial state and Hamiltonian spaces differ".into()));
    }
    let kern = GeneratorKernel::schrodinger(h)?;
    let mut x: Vec<C64> = psi0.data().iter().copied().collect();
    let mut rec = Recorder::new(probes, cfg, Check::Norm, h.space().clone())?;
    let stats = integrate(&kern, &mut x, 1, grid, cfg, drive_scale(h), &mut rec)?;
    Ok(rec.finish(x, stats))
}

pub fn evolve_lindblad(
    h: &HamiltonianSpec,
    channels: &[DecayChannel],
    rho0: &DensityMatrix,
    grid: &[f64],
    cfg: &IntegratorConfig,
    probes: &[Probe],
) -> Result<Trajectory> {
    if rho0.space() != h.space() {
        return Err(Error::SpaceMismatch("initial state and Hamiltonian spaces differ".into()));
    }
    let kern = Superoperator::new(h, channels)?.kernel()?;
    let mut x = rho0.to_vec_row_major();
    let dim = h.space().dim();
    let mut rec = Recorder::new(probes, cfg, Check::Trace { dim }, h.space().clone())?;
    let scale = drive_scale(h) + decay_scale(channels);
    let stats = integrate(&kern, &mut x, 1, grid, cfg, scale, &mut rec)?;
    Ok(rec.finish(x, stats))
}

/// Indices of |00>, |01>, |10>, |11> in a two-atom space.
pub fn computational_indices(space: &HilbertSpace) -> Result<[usize; 4]> {
    if space.num_sites() != 2 {
        return Err(Error::SpaceMismatch("gate extraction needs a two-atom space".into()));
    }
    let g = [Level::G0, Level::G1];
    let mut out = [0; 4];
    for (n, slot) in out.iter_mut().enumerate() {
        *slot = space.index_of(&[g[n / 2], g[n % 2]])?;
    }
    Ok(out)
}

struct BlockSink;

impl Sink for BlockSink {
    fn sample(&mut self, _: usize, _: f64, _: &[C64]) -> Result<()> {
        Ok(())
    }
}

/// Propagate the four computational basis states to `t_g` and return the
/// projected 4×4 matrix `U_ij = <i|U(t_g)|j>` (not re-unitarized).
pub fn compute_gate_unitary(h: &HamiltonianSpec, t_g: f64, cfg: &IntegratorConfig) -> Result<DMatrix<C64>> {
    let comp = computational_indices(h.space())?;
    let n = h.space().dim();
    let mut x = vec![C64::new(0.0, 0.0); n * 4];
    for (j, &c) in comp.iter().enumerate() {
        x[c * 4 + j] = C64::new(1.0, 0.0);
    }
    if t_g > 0.0 {
        let kern = GeneratorKernel::schrodinger(h)?;
        integrate(&kern, &mut x, 4, &[0.0, t_g], cfg, drive_scale(h), &mut BlockSink)?;
    }
    for j in 0..4 {
        let norm: f64 = (0..n).map(|i| x[i * 4 + j].norm_sqr()).sum();
        if (norm - 1.0).abs() > cfg.drift_tol {
            return Err(Error::NormDrift { t: t_g, drift: (norm - 1.0).abs() });
        }
    }
    Ok(DMatrix::from_fn(4, 4, |i, j| x[comp[i] * 4 + j]))
}

/// Choi matrix `χ = Σ_ij |i><j| ⊗ P E(|i><j|) P` of the map ρ(0) → ρ(t_g)
/// restricted to the computational block. Only the ten probes with `i ≤ j`
/// are propagated; the rest follow from `E(X†) = E(X)†`.
pub fn compute_process_choi(
    h: &HamiltonianSpec,
    channels: &[DecayChannel],
    t_g: f64,
    cfg: &IntegratorConfig,
) -> Result<DMatrix<C64>> {
    let comp = computational_indices(h.space())?;
    let n = h.space().dim();
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).collect();
    let k = pairs.len();
    let mut x = vec![C64::new(0.0, 0.0); n * n * k];
    for (col, &(i, j)) in pairs.iter().enumerate() {
        x[(comp[i] * n + comp[j]) * k + col] = C64::new(1.0, 0.0);
    }
    if t_g > 0.0 {
        let kern = Superoperator::new(h, channels)?.kernel()?;
        let scale = drive_scale(h) + decay_scale(channels);
        integrate(&kern, &mut x, k, &[0.0, t_g], cfg, scale, &mut BlockSink)?;
    }
    let mut chi = DMatrix::<C64>::zeros(16, 16);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                let v = x[(comp[a] * n + comp[b]) * k + col];
                chi[(4 * i + a, 4 * j + b)] = v;
                chi[(4 * j + b, 4 * i + a)] = v.conj();
            }
        }
    }
    Ok(chi)
}

/// Choi matrix `|U>><<U|` of a unitary (or any linear) map `X ↦ U X U†`.
pub fn unitary_choi(u: &DMatrix<C64>) -> DMatrix<C64> {
    let d = u.nrows();
    let v = DVector::from_fn(d * d, |r, _| u[(r % d, r / d)]);
    &v * v.adjoint()
}

/// Propagate a density matrix to `t` and return it.
pub fn propagate_density(
    h: &HamiltonianSpec,
    channels: &[DecayChannel],
    rho0: &DensityMatrix,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix> {
    let traj = evolve_lindblad(h, channels, rho0, &[0.0, t], cfg, &[])?;
    DensityMatrix::from_vec_row_major(h.space(), traj.final_state())
}
