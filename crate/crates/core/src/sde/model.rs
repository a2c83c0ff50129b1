//! The controlled problem: coefficient maps, their state gradients, the
//! finite action grid and the initial law.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub dim_x: usize,
    pub dim_w: usize,
    pub dim_a: usize,
}

impl Dims {
    pub fn new(dim_x: usize, dim_w: usize, dim_a: usize) -> Result<Self> {
        if dim_x == 0 || dim_w == 0 || dim_a == 0 {
            return Err(Error::InvalidParameter("all dimensions must be positive".into()));
        }
        Ok(Self { dim_x, dim_w, dim_a })
    }

    pub fn scalar() -> Self {
        Self { dim_x: 1, dim_w: 1, dim_a: 1 }
    }
}

/// Coefficients of the controlled SDE and the cost, evaluated at a single
/// action. Matrices are written row-major into caller-provided buffers:
///
/// - `diffusion`: `[i][j]` is `σ_ij`, shape `dim_x × dim_w`;
/// - `drift_jacobian`: `[i][k]` is `∂b_i/∂x_k`;
/// - `diffusion_jacobian`: `[i][j][k]` is `∂σ_ij/∂x_k`.
pub trait Coefficients: Send + Sync {
    fn drift(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]);
    fn diffusion(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]);
    fn cost_rate(&self, t: f64, x: &[f64], a: &[f64]) -> f64;
    fn terminal_cost(&self, x: &[f64]) -> f64;
    fn drift_jacobian(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]);
    fn diffusion_jacobian(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]);
    fn cost_gradient(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]);
    fn terminal_gradient(&self, x: &[f64], out: &mut [f64]);

    /// True when `b`, `σ` and `c` ignore `x`. Their state derivatives then
    /// vanish and per-atom values can be tabulated once per time step.
    fn state_free(&self) -> bool {
        false
    }
}

/// `b`, `σ` and `c` at every atom for one time, valid for any state when the
/// coefficients are state-free.
pub(crate) struct AtomTable {
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
}

impl AtomTable {
    pub fn build(model: &ModelSpec, t: f64) -> Option<Self> {
        let coeffs = model.coefficients();
        if !coeffs.state_free() {
            return None;
        }
        let d = model.dims();
        let n = model.actions().len();
        let x = vec![0.0; d.dim_x];
        let mut table = Self { b: vec![0.0; n * d.dim_x], s: vec![0.0; n * d.dim_x * d.dim_w], c: vec![0.0; n] };
        for a in 0..n {
            let act = model.actions().action(a);
            coeffs.drift(t, &x, act, &mut table.b[a * d.dim_x..(a + 1) * d.dim_x]);
            let m = d.dim_x * d.dim_w;
            coeffs.diffusion(t, &x, act, &mut table.s[a * m..(a + 1) * m]);
            table.c[a] = coeffs.cost_rate(t, &x, act);
        }
        Some(table)
    }
}

type VecFn = Arc<dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;
type TerminalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type TerminalVecFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Closure-backed coefficients. Anything left unset is identically zero.
#[derive(Clone, Default)]
pub struct FnCoefficients {
    drift: Option<VecFn>,
    diffusion: Option<VecFn>,
    cost_rate: Option<ScalarFn>,
    terminal_cost: Option<TerminalFn>,
    drift_jacobian: Option<VecFn>,
    diffusion_jacobian: Option<VecFn>,
    cost_gradient: Option<VecFn>,
    terminal_gradient: Option<TerminalVecFn>,
}

impl FnCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn drift(mut self, f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.drift = Some(Arc::new(f));
        self
    }

    pub fn diffusion(mut self, f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.diffusion = Some(Arc::new(f));
        self
    }

    pub fn cost_rate(mut self, f: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.cost_rate = Some(Arc::new(f));
        self
    }

    pub fn terminal_cost(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.terminal_cost = Some(Arc::new(f));
        self
    }

    pub fn drift_jacobian(mut self, f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.drift_jacobian = Some(Arc::new(f));
        self
    }

    pub fn diffusion_jacobian(mut self, f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.diffusion_jacobian = Some(Arc::new(f));
        self
    }

    pub fn cost_gradient(mut self, f: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.cost_gradient = Some(Arc::new(f));
        self
    }

    pub fn terminal_gradient(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.terminal_gradient = Some(Arc::new(f));
        self
    }
}

fn call_or_zero(f: &Option<VecFn>, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
    match f {
        Some(f) => f(t, x, a, out),
        None => out.fill(0.0),
    }
}

impl Coefficients for FnCoefficients {
    fn drift(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        call_or_zero(&self.drift, t, x, a, out)
    }
    fn diffusion(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        call_or_zero(&self.diffusion, t, x, a, out)
    }
    fn cost_rate(&self, t: f64, x: &[f64], a: &[f64]) -> f64 {
        self.cost_rate.as_ref().map_or(0.0, |f| f(t, x, a))
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        self.terminal_cost.as_ref().map_or(0.0, |f| f(x))
    }
    fn drift_jacobian(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        call_or_zero(&self.drift_jacobian, t, x, a, out)
    }
    fn diffusion_jacobian(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        call_or_zero(&self.diffusion_jacobian, t, x, a, out)
    }
    fn cost_gradient(&self, t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        call_or_zero(&self.cost_gradient, t, x, a, out)
    }
    fn terminal_gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.terminal_gradient {
            Some(f) => f(x, out),
            None => out.fill(0.0),
        }
    }
}

/// Finite set of actions `A_h`, stored row-major `n_actions × dim_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    dim_a: usize,
    points: Vec<f64>,
}

impl ActionGrid {
    pub fn new(dim_a: usize, points: Vec<f64>) -> Result<Self> {
        if dim_a == 0 || points.is_empty() || !points.len().is_multiple_of(dim_a) {
            return Err(Error::InvalidParameter("action grid must hold a positive whole number of actions".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("action grid has non-finite entries".into()));
        }
        Ok(Self { dim_a, points })
    }

    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    /// `n` equally spaced scalar actions on `[lo, hi]`, endpoints included.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(lo <= hi) {
            return Err(Error::InvalidParameter("uniform action grid needs n ≥ 1 and lo ≤ hi".into()));
        }
        if n == 1 {
            return Self::scalar(&[lo]);
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut v: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();
        v[n - 1] = hi;
        Self::scalar(&v)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim_a
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// All actions, row-major.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    #[inline]
    pub fn action(&self, idx: usize) -> &[f64] {
        &self.points[idx * self.dim_a..(idx + 1) * self.dim_a]
    }
}

pub type InitialSampler = Arc<dyn Fn(&mut dyn RngCore, &mut [f64]) + Send + Sync>;

/// The initial law ν.
#[derive(Clone)]
pub enum InitialLaw {
    Dirac(Vec<f64>),
    Sampler(InitialSampler),
}

impl fmt::Debug for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialLaw::Dirac(x) => f.debug_tuple("Dirac").field(x).finish(),
            InitialLaw::Sampler(_) => f.write_str("Sampler(..)"),
        }
    }
}

#[derive(Clone)]
pub struct ModelSpec {
    dims: Dims,
    coefficients: Arc<dyn Coefficients>,
    actions: ActionGrid,
    initial: InitialLaw,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("dims", &self.dims)
            .field("actions", &self.actions)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn new(
        dims: Dims,
        coefficients: Arc<dyn Coefficients>,
        actions: ActionGrid,
        initial: InitialLaw,
    ) -> Result<Self> {
        if actions.dim_a() != dims.dim_a {
            return Err(Error::DimensionMismatch(format!(
                "action grid has dim {} but model expects {}",
                actions.dim_a(),
                dims.dim_a
            )));
        }
        if let InitialLaw::Dirac(x0) = &initial {
            if x0.len() != dims.dim_x {
                return Err(Error::DimensionMismatch(format!(
                    "initial state has dim {} but model expects {}",
                    x0.len(),
                    dims.dim_x
                )));
            }
        }
        Ok(Self { dims, coefficients, actions, initial })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coefficients(&self) -> &dyn Coefficients {
        self.coefficients.as_ref()
    }

    pub fn actions(&self) -> &ActionGrid {
        &self.actions
    }

    pub fn initial(&self) -> &InitialLaw {
        &self.initial
    }

    pub fn with_actions(&self, actions: ActionGrid) -> Result<Self> {
        Self::new(self.dims, self.coefficients.clone(), actions, self.initial.clone())
    }

    pub fn with_initial(&self, initial: InitialLaw) -> Result<Self> {
        Self::new(self.dims, self.coefficients.clone(), self.actions.clone(), initial)
    }

    /// Compares the analytic state gradients against central differences at
    /// `n_probes` random points (standard normal states, uniform times on
    /// `[0, horizon]`, every grid action).
    pub fn check_gradients(&self, horizon: f64, n_probes: usize, seed: u64) -> GradientCheck {
        let Dims { dim_x: dx, dim_w: dw, .. } = self.dims;
        let c = self.coefficients.as_ref();
        let mut worst = 0.0f64;
        let mut rng = super::brownian::aux_stream(seed, 0);
        let mut x = vec![0.0; dx];
        let (mut jb, mut js, mut gc, mut gg) =
            (vec![0.0; dx * dx], vec![0.0; dx * dw * dx], vec![0.0; dx], vec![0.0; dx]);
        let (mut bp, mut bm, mut sp, mut sm) = (vec![0.0; dx], vec![0.0; dx], vec![0.0; dx * dw], vec![0.0; dx * dw]);
        let mut rel = |analytic: f64, fd: f64| {
            let e = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1.0);
            worst = worst.max(e);
        };
        for _ in 0..n_probes {
            for v in x.iter_mut() {
                *v = rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng);
            }
            let t = horizon * super::brownian::unit_uniform(&mut rng);
            c.terminal_gradient(&x, &mut gg);
            for ai in 0..self.actions.len() {
                let a = self.actions.action(ai);
                c.drift_jacobian(t, &x, a, &mut jb);
                c.diffusion_jacobian(t, &x, a, &mut js);
                c.cost_gradient(t, &x, a, &mut gc);
                if c.state_free() {
                    // The solver drops these terms, so they must vanish.
                    for v in jb.iter().chain(&js).chain(&gc) {
                        rel(*v, 0.0);
                    }
                }
                for k in 0..dx {
                    let h = 1e-6 * (1.0 + x[k].abs());
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let width = xp[k] - xm[k];
                    c.drift(t, &xp, a, &mut bp);
                    c.drift(t, &xm, a, &mut bm);
                    c.diffusion(t, &xp, a, &mut sp);
                    c.diffusion(t, &xm, a, &mut sm);
                    for i in 0..dx {
                        rel(jb[i * dx + k], (bp[i] - bm[i]) / width);
                        for j in 0..dw {
                            rel(js[(i * dw + j) * dx + k], (sp[i * dw + j] - sm[i * dw + j]) / width);
                        }
                    }
                    rel(gc[k], (c.cost_rate(t, &xp, a) - c.cost_rate(t, &xm, a)) / width);
                    if ai == 0 {
                        rel(gg[k], (c.terminal_cost(&xp) - c.terminal_cost(&xm)) / width);
                    }
                }
            }
        }
        GradientCheck { max_relative_error: worst }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
}

impl GradientCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative_error <= tol
    }
}

/// Scalar model with per-action polynomial coefficients in the state:
/// `b = b0[a] + b1[a] x`, `σ = s0[a] + s1[a] x`, `c = c0[a] + c1[a] x + c2[a] x²`,
/// `g = g0 + g1 x + g2 x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCoefficients {
    pub actions: Vec<f64>,
    pub drift: Vec<[f64; 2]>,
    pub diffusion: Vec<[f64; 2]>,
    pub cost: Vec<[f64; 3]>,
    pub terminal: [f64; 3],
}

impl TableCoefficients {
    fn index(&self, a: f64) -> usize {
        // Actions are looked up by value; grid actions are exact copies.
        self.actions.iter().position(|&v| v == a).unwrap_or_else(|| {
            self.actions
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - a).abs().total_cmp(&(y.1 - a).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.actions.len();
        if n == 0 {
            return Err(Error::InvalidParameter("coefficient table has no actions".into()));
        }
        if self.drift.len() != n || self.diffusion.len() != n || self.cost.len() != n {
            return Err(Error::InvalidParameter("coefficient table rows must match the number of actions".into()));
        }
        let all = self
            .actions
            .iter()
            .chain(self.drift.iter().flatten())
            .chain(self.diffusion.iter().flatten())
            .chain(self.cost.iter().flatten())
            .chain(self.terminal.iter());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("coefficient table has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn into_model(self, x0: f64) -> Result<ModelSpec> {
        self.validate()?;
        let actions = ActionGrid::scalar(&self.actions)?;
        ModelSpec::new(Dims::scalar(), Arc::new(self), actions, InitialLaw::Dirac(vec![x0]))
    }
}

impl Coefficients for TableCoefficients {
    fn drift(&self, _t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        let [b0, b1] = self.drift[self.index(a[0])];
        out[0] = b0 + b1 * x[0];
    }
    fn diffusion(&self, _t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        let [s0, s1] = self.diffusion[self.index(a[0])];
        out[0] = s0 + s1 * x[0];
    }
    fn cost_rate(&self, _t: f64, x: &[f64], a: &[f64]) -> f64 {
        let [c0, c1, c2] = self.cost[self.index(a[0])];
        c0 + x[0] * (c1 + c2 * x[0])
    }
    fn terminal_cost(&self, x: &[f64]) -> f64 {
        let [g0, g1, g2] = self.terminal;
        g0 + x[0] * (g1 + g2 * x[0])
    }
    fn drift_jacobian(&self, _t: f64, _x: &[f64], a: &[f64], out: &mut [f64]) {
        out[0] = self.drift[self.index(a[0])][1];
    }
    fn diffusion_jacobian(&self, _t: f64, _x: &[f64], a: &[f64], out: &mut [f64]) {
        out[0] = self.diffusion[self.index(a[0])][1];
    }
    fn cost_gradient(&self, _t: f64, x: &[f64], a: &[f64], out: &mut [f64]) {
        let [_, c1, c2] = self.cost[self.index(a[0])];
        out[0] = c1 + 2.0 * c2 * x[0];
    }
    fn terminal_gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.terminal[1] + 2.0 * self.terminal[2] * x[0];
    }
}

/// `A = {−1, +1}`, `b = 0`, `σ = a`, `ν = δ_0`, terminal cost `x²/2`.
pub fn std_counter_model() -> ModelSpec {
    let coeffs = FnCoefficients::new()
        .diffusion(|_, _, a, out| out[0] = a[0])
        .terminal_cost(|x| 0.5 * x[0] * x[0])
        .terminal_gradient(|x, out| out[0] = x[0]);
    ModelSpec::new(
        Dims::scalar(),
        Arc::new(coeffs),
        ActionGrid::scalar(&[-1.0, 1.0]).expect("static grid"),
        InitialLaw::Dirac(vec![0.0]),
    )
    .expect("static model")
}

/// `A = {0, 1}`, `b = 0`, `σ = a`, `ν = δ_0`, terminal cost `x²`.
pub fn first_order_model() -> ModelSpec {
    let coeffs = FnCoefficients::new()
        .diffusion(|_, _, a, out| out[0] = a[0])
        .terminal_cost(|x| x[0] * x[0])
        .terminal_gradient(|x, out| out[0] = 2.0 * x[0]);
    ModelSpec::new(
        Dims::scalar(),
        Arc::new(coeffs),
        ActionGrid::scalar(&[0.0, 1.0]).expect("static grid"),
        InitialLaw::Dirac(vec![0.0]),
    )
    .expect("static model")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_endpoints() {
        let g = ActionGrid::uniform(0.1, 1.5, 31).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g.action(0), &[0.1]);
        assert_eq!(g.action(30), &[1.5]);
    }

    #[test]
    fn unset_coefficients_are_zero() {
        let c = FnCoefficients::new();
        let mut out = [1.0, 2.0];
        Coefficients::drift(&c, 0.0, &[1.0, 1.0], &[0.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
        assert_eq!(Coefficients::cost_rate(&c, 0.0, &[1.0], &[1.0]), 0.0);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let r = ModelSpec::new(
            Dims::scalar(),
            Arc::new(FnCoefficients::new()),
            ActionGrid::new(2, vec![0.0, 1.0]).unwrap(),
            InitialLaw::Dirac(vec![0.0]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = ModelSpec::new(
            Dims::scalar(),
            Arc::new(FnCoefficients::new()),
            ActionGrid::scalar(&[0.0]).unwrap(),
            InitialLaw::Dirac(vec![0.0, 0.0]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn catalogue_gradients_are_consistent() {
        assert!(std_counter_model().check_gradients(1.0, 20, 1).passes(1e-5));
        assert!(first_order_model().check_gradients(1.0, 20, 1).passes(1e-5));
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let coeffs = FnCoefficients::new()
            .drift(|_, x, _, out| out[0] = x[0].sin())
            .drift_jacobian(|_, x, _, out| out[0] = x[0].sin());
        let m = ModelSpec::new(
            Dims::scalar(),
            Arc::new(coeffs),
            ActionGrid::scalar(&[0.0]).unwrap(),
            InitialLaw::Dirac(vec![0.0]),
        )
        .unwrap();
        assert!(!m.check_gradients(1.0, 10, 3).passes(1e-5));
    }

    /// Linear drift that wrongly claims to be state-free.
    struct Mislabelled;

    impl Coefficients for Mislabelled {
        fn drift(&self, _: f64, x: &[f64], _: &[f64], out: &mut [f64]) {
            out[0] = 2.0 * x[0];
        }
        fn diffusion(&self, _: f64, _: &[f64], _: &[f64], out: &mut [f64]) {
            out[0] = 1.0;
        }
        fn cost_rate(&self, _: f64, _: &[f64], _: &[f64]) -> f64 {
            0.0
        }
        fn terminal_cost(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn drift_jacobian(&self, _: f64, _: &[f64], _: &[f64], out: &mut [f64]) {
            out[0] = 2.0;
        }
        fn diffusion_jacobian(&self, _: f64, _: &[f64], _: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn cost_gradient(&self, _: f64, _: &[f64], _: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn terminal_gradient(&self, _: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn state_free(&self) -> bool {
            true
        }
    }

    #[test]
    fn false_state_free_claim_is_caught() {
        let m = ModelSpec::new(
            Dims::scalar(),
            Arc::new(Mislabelled),
            ActionGrid::scalar(&[0.0]).unwrap(),
            InitialLaw::Dirac(vec![0.0]),
        )
        .unwrap();
        assert!(!m.check_gradients(1.0, 5, 3).passes(1e-5));
    }

    #[test]
    fn table_model_gradients() {
        let table = TableCoefficients {
            actions: vec![-1.0, 0.5],
            drift: vec![[0.1, -0.3], [0.0, 0.2]],
            diffusion: vec![[0.2, 0.0], [0.1, 0.05]],
            cost: vec![[1.0, 0.5, 0.25], [0.0, 0.0, 1.0]],
            terminal: [0.0, 1.0, 0.5],
        };
        let m = table.into_model(0.0).unwrap();
        assert!(m.check_gradients(1.0, 25, 9).passes(1e-5));
    }
}
