//! Grover search on an `L`-qubit index register.
//!
//! The circuit is `|0⟩ → HT → G^R` with each iteration
//! `G = HT · P · HT · O` applied in the order O, HT, P, HT, so one iteration
//! is `2L + 2` counted steps and a full run is `Q(L) = L + (2L + 2) R`.
//! The oracle is a phase oracle on the index register and the conditional
//! phase shift `P` (`|0⟩ → |0⟩`, `|x⟩ → −|x⟩`) is a single step.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statevec::{Site, StateVector, C64, ZERO};
use crate::trace::{Recorder, Stage, StepTrace, TraceOptions};

/// Largest `L` analysed at every step without an explicit stride.
pub const MAX_FULL_ANALYSIS_L: usize = 14;

/// Solutions used for the reference traces at `L = 8, 9, 10, 12, 14`.
pub const REFERENCE_SOLUTIONS: [(usize, usize); 5] =
    [(8, 19), (9, 388), (10, 799), (12, 1332), (14, 9875)];

#[derive(Clone, Debug, PartialEq)]
pub struct GroverInstance {
    n_index: usize,
    solutions: Vec<usize>,
    seed: Option<u64>,
}

impl GroverInstance {
    pub fn new(n_index: usize, solutions: Vec<usize>) -> Result<Self> {
        if n_index == 0 || n_index > crate::statevec::MAX_QUBITS {
            return Err(Error::domain(format!("index register size {n_index} out of range")));
        }
        let n = 1usize << n_index;
        if solutions.is_empty() || solutions.len() >= n {
            return Err(Error::domain(format!(
                "need 1 <= M < N = {n} solutions, got {}",
                solutions.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &x in &solutions {
            if x >= n {
                return Err(Error::domain(format!("solution {x} >= N = {n}")));
            }
            if !seen.insert(x) {
                return Err(Error::domain(format!("solution {x} listed twice")));
            }
        }
        Ok(GroverInstance { n_index, solutions, seed: None })
    }

    /// `M` distinct solutions drawn from a seeded generator.
    pub fn random(n_index: usize, m: usize, seed: u64) -> Result<Self> {
        if n_index == 0 || n_index > crate::statevec::MAX_QUBITS {
            return Err(Error::domain(format!("index register size {n_index} out of range")));
        }
        let n = 1usize << n_index;
        if m == 0 || m >= n {
            return Err(Error::domain(format!("need 1 <= M < N = {n}, got {m}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let solutions = sample(&mut rng, n, m).into_vec();
        let mut inst = GroverInstance::new(n_index, solutions)?;
        inst.seed = Some(seed);
        Ok(inst)
    }

    /// The reference solution for `L` when one is tabulated, otherwise a
    /// seeded draw with seed `L`.
    pub fn reference(n_index: usize) -> Result<Self> {
        match REFERENCE_SOLUTIONS.iter().find(|(l, _)| *l == n_index) {
            Some(&(_, x)) => GroverInstance::new(n_index, vec![x]),
            None => GroverInstance::random(n_index, 1, n_index as u64),
        }
    }

    pub fn n_index(&self) -> usize {
        self.n_index
    }

    pub fn dim(&self) -> usize {
        1 << self.n_index
    }

    pub fn solutions(&self) -> &[usize] {
        &self.solutions
    }

    pub fn m(&self) -> usize {
        self.solutions.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn params(&self) -> GroverParams {
        grover_params(self.n_index, self.m()).expect("instance invariants hold")
    }
}

/// Every multiple of 8 below `N = 2^L` is a solution.
pub fn multiples_of_eight_instance(n_index: usize) -> Result<GroverInstance> {
    if n_index < 4 {
        return Err(Error::domain("multiples-of-eight instance needs L >= 4"));
    }
    GroverInstance::new(n_index, (0..1usize << n_index).step_by(8).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverParams {
    /// Rotation angle per iteration, `cos(θ/2) = √((N − M)/N)`.
    pub theta: f64,
    /// `R = ⌈arccos(√(M/N)) / θ⌉`.
    pub iterations: usize,
}

impl GroverParams {
    /// Counted steps of a full run.
    pub fn total_steps(&self, n_index: usize) -> usize {
        n_index + (2 * n_index + 2) * self.iterations
    }
}

pub fn grover_params(n_index: usize, m: usize) -> Result<GroverParams> {
    if n_index == 0 || n_index >= 64 {
        return Err(Error::domain(format!("index register size {n_index} out of range")));
    }
    let n = (1u64 << n_index) as f64;
    if m == 0 || m as f64 >= n {
        return Err(Error::domain(format!("need 1 <= M < N, got M = {m}")));
    }
    let m = m as f64;
    let theta = 2.0 * ((m / n).sqrt()).asin();
    let ratio = (m / n).sqrt().acos() / theta;
    // ratios that are integers in exact arithmetic (e.g. L=2, M=1) must not round up
    let iterations = (ratio - 1e-9).ceil().max(0.0) as usize;
    Ok(GroverParams { theta, iterations })
}

/// Phase oracle: negates the amplitude of every solution label.
pub fn apply_oracle(state: &mut StateVector, solutions: &[usize]) -> Result<()> {
    let dim = state.dim();
    if let Some(&x) = solutions.iter().find(|&&x| x >= dim) {
        return Err(Error::domain(format!("solution {x} outside the register")));
    }
    let amps = state.amplitudes_mut();
    for &x in solutions {
        amps[x] = -amps[x];
    }
    Ok(())
}

/// `P|0⟩ = |0⟩`, `P|x⟩ = −|x⟩` for `x > 0`.
pub fn apply_conditional_phase(state: &mut StateVector) {
    for a in state.amplitudes_mut().iter_mut().skip(1) {
        *a = -*a;
    }
}

fn hadamard_stage(
    state: &mut StateVector,
    rec: &mut Option<&mut Recorder<'_>>,
) -> Result<()> {
    let n = state.n_qubits();
    for site in Site::range(1, n) {
        state.apply_hadamard_all([site])?;
        if let Some(r) = rec.as_deref_mut() {
            r.push(Stage::Hadamard, format!("H({site})"), state)?;
        }
    }
    Ok(())
}

fn iteration(
    state: &mut StateVector,
    solutions: &[usize],
    rec: &mut Option<&mut Recorder<'_>>,
) -> Result<()> {
    apply_oracle(state, solutions)?;
    if let Some(r) = rec.as_deref_mut() {
        r.push(Stage::Oracle, "O".into(), state)?;
    }
    hadamard_stage(state, rec)?;
    apply_conditional_phase(state);
    if let Some(r) = rec.as_deref_mut() {
        r.push(Stage::Phase, "P".into(), state)?;
    }
    hadamard_stage(state, rec)
}

/// Applies `iterations` Grover iterations to `state` through the gate circuit.
pub fn apply_iterations(state: &mut StateVector, solutions: &[usize], iterations: usize) -> Result<()> {
    for _ in 0..iterations {
        iteration(state, solutions, &mut None)?;
    }
    Ok(())
}

/// `|ψ_k⟩ = G^k HT|0⟩` through the gate circuit.
pub fn simulate_psi_k(instance: &GroverInstance, k: usize) -> Result<StateVector> {
    let mut s = StateVector::basis(instance.n_index, 0)?;
    hadamard_stage(&mut s, &mut None)?;
    apply_iterations(&mut s, &instance.solutions, k)?;
    Ok(s)
}

/// Full step-resolved run with `e_max` at the steps selected by `opts`.
pub fn run_grover(instance: &GroverInstance, opts: &TraceOptions) -> Result<StepTrace> {
    let l = instance.n_index;
    if l > MAX_FULL_ANALYSIS_L && opts.stride == 1 && opts.window.is_none() {
        return Err(Error::domain(format!(
            "per-step analysis above L = {MAX_FULL_ANALYSIS_L} needs a stride > 1"
        )));
    }
    let params = instance.params();
    let mut state = StateVector::basis(l, 0)?;
    let mut rec = Recorder::new(opts, &state)?;
    {
        let mut sink = Some(&mut rec);
        hadamard_stage(&mut state, &mut sink)?;
        for _ in 0..params.iterations {
            iteration(&mut state, &instance.solutions, &mut sink)?;
        }
    }
    let mut trace = rec.finish();
    trace.push_meta("algorithm", "grover");
    trace.push_meta("L", l);
    trace.push_meta("M", instance.m());
    trace.push_meta("solutions", join(&instance.solutions));
    trace.push_meta("seed", instance.seed.map_or("none".into(), |s| s.to_string()));
    trace.push_meta("theta", format!("{:.12}", params.theta));
    trace.push_meta("R", params.iterations);
    trace.push_meta("Q", params.total_steps(l));
    trace.push_meta("stride", opts.stride);
    debug_assert_eq!(trace.total_steps(), params.total_steps(l));
    Ok(trace)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// `cos((2k+1)θ/2)|α⟩ + sin((2k+1)θ/2)|β⟩` built directly from the amplitudes.
pub fn analytic_psi_k(instance: &GroverInstance, k: usize) -> Result<StateVector> {
    let p = instance.params();
    let dim = instance.dim();
    let m = instance.m() as f64;
    let angle = (2 * k + 1) as f64 * p.theta / 2.0;
    let off = angle.cos() / (dim as f64 - m).sqrt();
    let on = angle.sin() / m.sqrt();
    let mut amps = vec![C64::new(off, 0.0); dim];
    for &x in &instance.solutions {
        amps[x] = C64::new(on, 0.0);
    }
    StateVector::from_amplitudes(amps)
}

/// Leading term `(1/4) sin²((2k+1)θ) L²` of `⟨ψ_k|(ΔM_x)²|ψ_k⟩` for `M = O(1)`.
pub fn analytic_mx_variance(n_index: usize, theta: f64, k: usize) -> f64 {
    let l = n_index as f64;
    0.25 * ((2 * k + 1) as f64 * theta).sin().powi(2) * l * l
}

/// Success probabilities of the coherent run and of the run whose state is
/// replaced, at iteration `split_iteration`, by the equal mixture of
/// `|ψ_0⟩` and `|x_1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceOutcome {
    pub split_iteration: usize,
    pub coherent: f64,
    pub decohered: f64,
}

/// Midpoint decoherence thought experiment, split at `k = ⌈R/2⌉`.
pub fn decohere_midpoint_demo(instance: &GroverInstance) -> Result<DecoherenceOutcome> {
    if instance.m() != 1 {
        return Err(Error::domain("decoherence demo is defined for a single solution"));
    }
    let x1 = instance.solutions[0];
    let r = instance.params().iterations;
    let split = r.div_ceil(2);
    let remaining = r - split;

    let coherent = simulate_psi_k(instance, r)?.probability(x1);

    let mut uniform_branch = simulate_psi_k(instance, 0)?;
    apply_iterations(&mut uniform_branch, &instance.solutions, remaining)?;
    let mut solution_branch = StateVector::basis(instance.n_index, x1)?;
    apply_iterations(&mut solution_branch, &instance.solutions, remaining)?;
    let decohered = 0.5 * uniform_branch.probability(x1) + 0.5 * solution_branch.probability(x1);

    Ok(DecoherenceOutcome { split_iteration: split, coherent, decohered })
}

/// `|α⟩` and `|β⟩` of the two-dimensional rotation plane.
pub fn rotation_plane(instance: &GroverInstance) -> Result<(StateVector, StateVector)> {
    let dim = instance.dim();
    let mut alpha = vec![C64::new(1.0, 0.0); dim];
    let mut beta = vec![ZERO; dim];
    for &x in &instance.solutions {
        alpha[x] = ZERO;
        beta[x] = C64::new(1.0, 0.0);
    }
    Ok((StateVector::from_amplitudes(alpha)?, StateVector::from_amplitudes(beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn params_examples() {
        let p = grover_params(2, 1).unwrap();
        assert!((p.theta - PI / 3.0).abs() < 1e-12);
        assert_eq!(p.iterations, 1);

        let p = grover_params(4, 8).unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-12);

        // closed form against a direct evaluation of the defining expressions
        let p = grover_params(14, 1).unwrap();
        let s = 2f64.powi(-7);
        let r = (s.acos() / (2.0 * s.asin())).ceil() as usize;
        assert_eq!(p.iterations, r);
        assert_eq!(p.iterations, (PI / 4.0 * 128.0).ceil() as usize);
        assert_eq!(p.iterations, 101);

        assert!(grover_params(3, 0).is_err());
        assert!(grover_params(3, 8).is_err());
    }

    #[test]
    fn theta_satisfies_half_angle_relation() {
        for l in 2..12 {
            for m in [1usize, 2, 3, 5] {
                if m >= 1 << l {
                    continue;
                }
                let p = grover_params(l, m).unwrap();
                let n = (1usize << l) as f64;
                assert!(((p.theta / 2.0).cos() - ((n - m as f64) / n).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let mut s = StateVector::basis(2, 0).unwrap();
        s.apply_hadamard_all(Site::range(1, 2)).unwrap();
        let before = s.clone();
        apply_oracle(&mut s, &[3]).unwrap();
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        for (got, want) in re.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        apply_oracle(&mut s, &[3]).unwrap();
        assert_eq!(s, before);

        let mut b = StateVector::basis(2, 1).unwrap();
        apply_oracle(&mut b, &[3]).unwrap();
        assert_eq!(b, StateVector::basis(2, 1).unwrap());
        assert!(apply_oracle(&mut b, &[4]).is_err());
    }

    #[test]
    fn conditional_phase_examples() {
        let mut s = StateVector::basis(3, 0).unwrap();
        apply_conditional_phase(&mut s);
        assert_eq!(s, StateVector::basis(3, 0).unwrap());
        let mut s = StateVector::basis(3, 5).unwrap();
        apply_conditional_phase(&mut s);
        assert_eq!(s.amplitudes()[5], C64::new(-1.0, 0.0));
    }

    #[test]
    fn two_qubit_search_is_exact() {
        let inst = GroverInstance::new(2, vec![3]).unwrap();
        let s = simulate_psi_k(&inst, 1).unwrap();
        assert!((s.probability(3) - 1.0).abs() < 1e-12);
        let a = analytic_psi_k(&inst, 1).unwrap();
        assert!((a.probability(3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_k0_is_uniform() {
        let inst = GroverInstance::new(5, vec![7]).unwrap();
        let a = analytic_psi_k(&inst, 0).unwrap();
        for amp in a.amplitudes() {
            assert!((amp.re - 1.0 / 32f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn step_count_matches_q() {
        for l in [2, 3, 5] {
            let inst = GroverInstance::random(l, 1, 1).unwrap();
            let t = run_grover(&inst, &TraceOptions::states_only()).unwrap();
            let p = inst.params();
            assert_eq!(t.total_steps(), l + (2 * l + 2) * p.iterations);
            assert_eq!(t.count_stage(Stage::Oracle), p.iterations);
            assert_eq!(t.count_stage(Stage::Phase), p.iterations);
            assert_eq!(t.count_stage(Stage::Hadamard), l * (2 * p.iterations + 1));
        }
    }

    #[test]
    fn instance_validation() {
        assert!(GroverInstance::new(3, vec![]).is_err());
        assert!(GroverInstance::new(3, vec![1, 1]).is_err());
        assert!(GroverInstance::new(3, vec![8]).is_err());
        assert!(GroverInstance::random(3, 8, 0).is_err());
        let a = GroverInstance::random(10, 3, 42).unwrap();
        let b = GroverInstance::random(10, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(GroverInstance::reference(10).unwrap().solutions(), &[799]);
    }

    #[test]
    fn multiples_of_eight() {
        let i = multiples_of_eight_instance(4).unwrap();
        assert_eq!(i.solutions(), &[0, 8]);
        assert_eq!(multiples_of_eight_instance(6).unwrap().m(), 8);
        assert!(multiples_of_eight_instance(3).is_err());
    }

    #[test]
    fn mx_variance_leading_term() {
        let l = 12;
        let theta = PI / 2.0 / 3.0;
        assert!((analytic_mx_variance(l, theta, 1) - 36.0).abs() < 1e-9);
        assert!(analytic_mx_variance(l, 1e-6, 0) < 1e-9);
    }

    #[test]
    fn large_registers_need_a_stride() {
        let inst = GroverInstance::new(15, vec![1]).unwrap();
        assert!(run_grover(&inst, &TraceOptions::default()).is_err());
    }
}
