//! Variational eigensolver: an objective that binds trial angles into a
//! kernel and returns the observable's expectation, minimized with
//! Nelder-Mead.

use std::cell::RefCell;
use std::sync::Arc;

use argmin::core::{CostFunction, Executor, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use thiserror::Error;

use crate::compiler::{bind_args, ArgPack, ArgValue, CompiledKernel, KernelRegistry};
use crate::operators::PauliOperator;
use crate::parser::TypeAnnotation;
use crate::runtime::{check_hermitian, observe, Backend, RuntimeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VqeError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("{0}")]
    Parameters(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

/// Where the trial vector goes in the kernel's argument list.
#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Float(String),
    List(String),
}

/// `x ↦ ⟨ψ(x)|H|ψ(x)⟩` for a kernel whose free float parameters make up `x`.
/// Every other parameter comes from the fixed argument pack.
pub struct ObjectiveFunction<'a> {
    registry: &'a KernelRegistry,
    kernel: Arc<CompiledKernel>,
    observable: PauliOperator,
    backend: &'a dyn Backend,
    fixed: ArgPack,
    slots: Vec<Slot>,
    /// Zero evaluates exactly.
    pub shots: u64,
    pub seed: u64,
}

impl<'a> ObjectiveFunction<'a> {
    /// Parameters missing from `fixed` are variational. They must be
    /// `float`, or a single `List[float]` that takes the whole vector.
    pub fn new(
        registry: &'a KernelRegistry,
        kernel: &str,
        observable: PauliOperator,
        backend: &'a dyn Backend,
        fixed: ArgPack,
    ) -> Result<Self, VqeError> {
        let kernel = registry
            .get(kernel)
            .ok_or_else(|| RuntimeError::UnknownKernel(kernel.to_string()))?;
        check_hermitian(&observable)?;
        let mut slots = Vec::new();
        for p in kernel.signature.iter().filter(|p| !fixed.contains_key(&p.name)) {
            slots.push(match p.ty {
                TypeAnnotation::Float => Slot::Float(p.name.clone()),
                TypeAnnotation::ListFloat => Slot::List(p.name.clone()),
                ref other => {
                    return Err(VqeError::Parameters(format!(
                        "parameter `{}` of type {other} needs a fixed value",
                        p.name
                    )))
                }
            });
        }
        let lists = slots.iter().filter(|s| matches!(s, Slot::List(_))).count();
        if slots.is_empty() || (lists == 1 && slots.len() > 1) || lists > 1 {
            return Err(VqeError::Parameters(format!(
                "`{}` needs either float parameters or one List[float] left unbound",
                kernel.name
            )));
        }
        Ok(ObjectiveFunction {
            registry,
            kernel,
            observable,
            backend,
            fixed,
            slots,
            shots: 0,
            seed: 0,
        })
    }

    /// Number of angles, or `None` when a list parameter accepts any length.
    pub fn dimension(&self) -> Option<usize> {
        match self.slots.as_slice() {
            [Slot::List(_)] => None,
            s => Some(s.len()),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, VqeError> {
        let mut pack = self.fixed.clone();
        match self.slots.as_slice() {
            [Slot::List(name)] => {
                pack.insert(name.clone(), ArgValue::List(x.iter().map(|&v| ArgValue::Float(v)).collect()));
            }
            slots => {
                if x.len() != slots.len() {
                    return Err(VqeError::Parameters(format!("expected {} angle(s), got {}", slots.len(), x.len())));
                }
                for (s, &v) in slots.iter().zip(x) {
                    if let Slot::Float(name) = s {
                        pack.insert(name.clone(), ArgValue::Float(v));
                    }
                }
            }
        }
        // Keep the caller's parameter order for binding.
        let ordered: ArgPack = self
            .kernel
            .signature
            .iter()
            .filter_map(|p| pack.get(&p.name).map(|v| (p.name.clone(), v.clone())))
            .collect();
        let bound = bind_args(self.kernel.clone(), &ordered, self.registry).map_err(RuntimeError::from)?;
        Ok(observe(self.registry, &bound, &self.observable, self.backend, self.shots, self.seed)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    /// Hard cap on objective evaluations.
    pub max_evaluations: usize,
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// Stop when the standard deviation of simplex values falls below this.
    pub sd_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 100,
            initial_step: 0.5,
            sd_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Objective value of every evaluation, in order.
    pub history: Vec<f64>,
    /// False when the evaluation budget ran out first.
    pub converged: bool,
}

struct Tracked<F> {
    f: RefCell<F>,
    budget: usize,
    history: RefCell<Vec<f64>>,
    best: RefCell<Option<(Vec<f64>, f64)>>,
    error: RefCell<Option<VqeError>>,
}

impl<F: FnMut(&[f64]) -> Result<f64, VqeError>> Tracked<F> {
    fn stopped(&self) -> bool {
        self.error.borrow().is_some() || self.history.borrow().len() >= self.budget
    }
}

// argmin unwraps cost errors while building the initial simplex, so failures
// and the spent budget are signalled with +inf and reported after the run.
impl<F: FnMut(&[f64]) -> Result<f64, VqeError>> CostFunction for Tracked<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        if self.stopped() {
            return Ok(f64::INFINITY);
        }
        let v = match (self.f.borrow_mut())(x) {
            Ok(v) => v,
            Err(e) => {
                *self.error.borrow_mut() = Some(e);
                return Ok(f64::INFINITY);
            }
        };
        self.history.borrow_mut().push(v);
        let mut best = self.best.borrow_mut();
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            *best = Some((x.clone(), v));
        }
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

/// Minimizes `f` from `x0`. Returns the best point seen even when the budget
/// runs out before the simplex converges.
pub fn nelder_mead(
    f: impl FnMut(&[f64]) -> Result<f64, VqeError>,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> Result<Minimum, VqeError> {
    if x0.is_empty() {
        return Err(VqeError::Parameters("need at least one parameter".into()));
    }
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.sd_tolerance)
        .map_err(|e| VqeError::Optimizer(e.to_string()))?;
    let problem = Tracked {
        f: RefCell::new(f),
        budget: opts.max_evaluations,
        history: RefCell::default(),
        best: RefCell::default(),
        error: RefCell::default(),
    };
    // Each iteration costs at least one evaluation, so the budget bounds it.
    let run = Executor::new(&problem, solver)
        .configure(|s| s.max_iters(opts.max_evaluations as u64))
        .run()
        .map_err(|e| VqeError::Optimizer(e.to_string()))?;
    if let Some(e) = problem.error.take() {
        return Err(e);
    }
    let converged = !problem.stopped()
        && run.state().termination_status == TerminationStatus::Terminated(TerminationReason::SolverConverged);
    let history = problem.history.take();
    let (x, value) = problem
        .best
        .take()
        .ok_or_else(|| VqeError::Optimizer("no evaluation succeeded".into()))?;
    Ok(Minimum {
        x,
        value,
        evaluations: history.len(),
        history,
        converged,
    })
}

impl<F: FnMut(&[f64]) -> Result<f64, VqeError>> CostFunction for &Tracked<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        (*self).cost(x)
    }
}

/// Runs the variational loop for `objective` from `x0`.
pub fn vqe(objective: &ObjectiveFunction<'_>, x0: &[f64], opts: &NelderMeadOptions) -> Result<Minimum, VqeError> {
    nelder_mead(|x| objective.evaluate(x), x0, opts)
}
