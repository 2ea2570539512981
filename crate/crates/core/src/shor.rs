//! Shor order finding with a two-register statevector.
//!
//! Register R1 (`L = 2L′` qubits) occupies sites `1..=L`; R2 (`L′` qubits)
//! occupies sites `L+1..=L+L′`, so a basis label is `a·2^L′ + y`. The run is
//! `|0⟩|1⟩ → HT on R1 → ME → DFT on R1`, where modular exponentiation is
//! `L` controlled multiplications on R2 labels and the DFT is the
//! `L(L+1)/2`-step staircase circuit. Total `Q(L) = 2L + L(L+1)/2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statevec::{Site, StateVector, C64, ZERO};
use crate::trace::{Branch, Recorder, Stage, StepTrace, TraceOptions};
use crate::vcm::{build_vcm, max_eigen, AdditiveOperator, DEFAULT_DEGENERACY_RTOL};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_mul(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, n);
        }
        base = mod_mul(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Least `r >= 1` with `x^r ≡ 1 (mod n)`.
pub fn multiplicative_order(x: u64, n: u64) -> Result<u64> {
    if n < 2 || x == 0 || x >= n {
        return Err(Error::domain(format!("need 0 < x < N with N >= 2, got x={x}, N={n}")));
    }
    if gcd(x, n) != 1 {
        return Err(Error::domain(format!("gcd({x}, {n}) != 1")));
    }
    let mut r = 1;
    let mut v = x % n;
    while v != 1 {
        v = mod_mul(v, x, n);
        r += 1;
    }
    Ok(r)
}

/// Register sizes `(L, L′, L_tot)` with `log₂N <= L′ < log₂N + 1`, `L = 2L′`.
///
/// When `N` is a power of two both bounds are tight and `L′ = log₂N` is taken.
pub fn register_sizes(n: u64) -> Result<(usize, usize, usize)> {
    if n < 3 {
        return Err(Error::domain(format!("N must be >= 3, got {n}")));
    }
    let lp = if n.is_power_of_two() {
        n.trailing_zeros() as usize
    } else {
        (u64::BITS - n.leading_zeros()) as usize
    };
    Ok((2 * lp, lp, 3 * lp))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorInstance {
    n: u64,
    x: u64,
    order: u64,
    l1: usize,
    l2: usize,
}

impl ShorInstance {
    pub fn new(n: u64, x: u64) -> Result<Self> {
        let (l1, l2, _) = register_sizes(n)?;
        let order = multiplicative_order(x, n)?;
        Ok(ShorInstance { n, x, order, l1, l2 })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.x
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Size `L` of R1.
    pub fn first_register(&self) -> usize {
        self.l1
    }

    /// Size `L′` of R2.
    pub fn second_register(&self) -> usize {
        self.l2
    }

    pub fn total_qubits(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn r1_sites(&self) -> Vec<Site> {
        Site::range(1, self.l1).collect()
    }

    pub fn r2_sites(&self) -> Vec<Site> {
        Site::range(self.l1 + 1, self.l1 + self.l2).collect()
    }

    pub fn total_steps(&self) -> usize {
        2 * self.l1 + self.l1 * (self.l1 + 1) / 2
    }

    /// Counted steps of the DFT stage.
    pub fn dft_steps(&self) -> usize {
        self.l1 * (self.l1 + 1) / 2
    }

    /// DFT-stage step index after the pairwise transformations targeting the
    /// first `L/2` qubits, `(L/4)(L/2 + 1)`.
    pub fn mid_dft_step(&self) -> usize {
        let half = self.l1 / 2;
        half * (half + 1) / 2
    }

    /// Initial state `|0⟩^(1) |1⟩^(2)`.
    pub fn initial_state(&self) -> Result<StateVector> {
        StateVector::basis(self.total_qubits(), 1)
    }

    fn label(&self, a: u64, y: u64) -> usize {
        ((a << self.l2) | y) as usize
    }

    /// `2^{-L/2} Σ_a |a⟩|x^a mod N⟩` built directly.
    pub fn analytic_me_state(&self) -> Result<StateVector> {
        let dim = 1usize << self.total_qubits();
        let amp = C64::new((-(self.l1 as f64) / 2.0).exp2(), 0.0);
        let mut amps = vec![ZERO; dim];
        let mut y = 1 % self.n;
        for a in 0..1u64 << self.l1 {
            amps[self.label(a, y)] = amp;
            y = mod_mul(y, self.x, self.n);
        }
        StateVector::from_amplitudes(amps)
    }
}

/// Controlled multiplication of the R2 label by `x^{2^j} mod N`, with the
/// control on R1 site `control`.
pub fn apply_controlled_modmul(
    state: &mut StateVector,
    control: Site,
    j: u32,
    instance: &ShorInstance,
) -> Result<()> {
    if state.n_qubits() != instance.total_qubits() {
        return Err(Error::domain("state does not match the instance registers"));
    }
    if control.get() > instance.l1 {
        return Err(Error::domain(format!("control site {control} is not in R1")));
    }
    let l2 = instance.l2;
    let n = instance.n;
    let mult = (0..j).fold(instance.x % n, |m, _| mod_mul(m, m, n));
    let ctrl_bit = 1usize << state.bit_position(control);
    let y_mask = (1usize << l2) - 1;
    let amps = state.amplitudes();
    let mut out = vec![ZERO; amps.len()];
    for (i, amp) in amps.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let y = (i & y_mask) as u64;
        if y >= n {
            return Err(Error::Consistency(format!(
                "R2 label {y} >= N = {n} carries amplitude"
            )));
        }
        let target = if i & ctrl_bit != 0 {
            (i & !y_mask) | mod_mul(y, mult, n) as usize
        } else {
            i
        };
        out[target] = *amp;
    }
    state.replace_amplitudes(out);
    Ok(())
}

/// Modular exponentiation stage: control site `l` drives `x^{2^{L−l}}`,
/// applied least-significant control first (`j = 0, 1, …, L−1`).
fn modexp_stage(
    state: &mut StateVector,
    instance: &ShorInstance,
    rec: &mut Option<&mut Recorder<'_>>,
) -> Result<()> {
    let l = instance.l1;
    for j in 0..l {
        let control = Site::new(l - j);
        apply_controlled_modmul(state, control, j as u32, instance)?;
        if let Some(r) = rec.as_deref_mut() {
            r.push(Stage::ModExp, format!("CU({control})"), state)?;
        }
    }
    Ok(())
}

/// One counted step of the DFT circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DftGate {
    Hadamard(Site),
    /// Controlled phase `π / 2^(target − control)` between two R1 sites.
    Phase { control: Site, target: Site },
}

/// The staircase DFT on sites `1..=l`: targets are processed most
/// significant first; each target receives the controlled phases from the
/// already-processed sites (nearest first) and then its Hadamard, so the
/// `m`-th target costs `m` steps.
pub fn dft_schedule(l: usize) -> Vec<DftGate> {
    let mut gates = Vec::with_capacity(l * (l + 1) / 2);
    for t in 1..=l {
        for c in (1..t).rev() {
            gates.push(DftGate::Phase { control: Site::new(c), target: Site::new(t) });
        }
        gates.push(DftGate::Hadamard(Site::new(t)));
    }
    gates
}

pub(crate) fn apply_dft_gate(state: &mut StateVector, gate: DftGate, inverse: bool) -> Result<String> {
    match gate {
        DftGate::Hadamard(s) => {
            state.apply_hadamard_all([s])?;
            Ok(format!("H({s})"))
        }
        DftGate::Phase { control, target } => {
            let d = (target.get() - control.get()) as i32;
            let angle = std::f64::consts::PI / 2f64.powi(d);
            state.apply_controlled_phase(control, target, if inverse { -angle } else { angle })?;
            Ok(format!("CP({control}-{target})"))
        }
    }
}

/// Runs the DFT on R1 sites `1..=l`, recording each step when a sink is given.
///
/// The output qubit order is bit-reversed; see [`dft_readout`].
pub fn run_dft(state: &mut StateVector, l: usize) -> Result<()> {
    run_dft_recorded(state, l, None)
}

pub(crate) fn run_dft_recorded(
    state: &mut StateVector,
    l: usize,
    mut rec: Option<&mut Recorder<'_>>,
) -> Result<()> {
    for gate in dft_schedule(l) {
        let label = apply_dft_gate(state, gate, false)?;
        if let Some(r) = rec.as_deref_mut() {
            r.push(Stage::Dft, label, state)?;
        }
    }
    Ok(())
}

/// Inverse of [`run_dft`] (the schedule reversed with conjugate phases).
pub fn run_inverse_dft(state: &mut StateVector, l: usize) -> Result<()> {
    for gate in dft_schedule(l).into_iter().rev() {
        apply_dft_gate(state, gate, true)?;
    }
    Ok(())
}

/// Undoes the bit reversal of the first `l` sites so that R1 label `c`
/// carries the DFT amplitude `2^{-L/2} Σ_a e^{2πi a c / 2^L} ψ_a`.
pub fn dft_readout(state: &StateVector, l: usize) -> Result<StateVector> {
    let n = state.n_qubits();
    if l > n {
        return Err(Error::domain("readout register larger than the state"));
    }
    let perm: Vec<Site> = (1..=n)
        .map(|s| Site::new(if s <= l { l + 1 - s } else { s }))
        .collect();
    state.permute_sites(&perm)
}

/// One post-measurement branch of a measured run.
#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub branch: Branch,
    pub trace: StepTrace,
}

#[derive(Clone, Debug)]
pub enum ShorTrace {
    Coherent(StepTrace),
    Measured(Vec<BranchTrace>),
}

impl ShorTrace {
    pub fn traces(&self) -> Vec<&StepTrace> {
        match self {
            ShorTrace::Coherent(t) => vec![t],
            ShorTrace::Measured(bs) => bs.iter().map(|b| &b.trace).collect(),
        }
    }
}

fn metadata(trace: &mut StepTrace, instance: &ShorInstance, opts: &TraceOptions, measured: bool) {
    trace.push_meta("algorithm", "shor");
    trace.push_meta("N", instance.n);
    trace.push_meta("x", instance.x);
    trace.push_meta("r", instance.order);
    trace.push_meta("L", instance.l1);
    trace.push_meta("L_prime", instance.l2);
    trace.push_meta("L_tot", instance.total_qubits());
    trace.push_meta("Q", instance.total_steps());
    trace.push_meta("stride", opts.stride);
    trace.push_meta("measure", measured);
}

/// Runs init, HT and ME; returns the `ψ_ME` state and the partial trace.
fn run_to_me(instance: &ShorInstance, opts: &TraceOptions) -> Result<(StateVector, StepTrace)> {
    let mut state = instance.initial_state()?;
    let mut rec = Recorder::new(opts, &state)?;
    for site in instance.r1_sites() {
        state.apply_hadamard_all([site])?;
        rec.push(Stage::Hadamard, format!("H({site})"), &state)?;
    }
    modexp_stage(&mut state, instance, &mut Some(&mut rec))?;
    Ok((state, rec.finish()))
}

/// `ψ_ME` through the circuit (no analysis).
pub fn simulate_me_state(instance: &ShorInstance) -> Result<StateVector> {
    let mut state = instance.initial_state()?;
    state.apply_hadamard_all(instance.r1_sites())?;
    modexp_stage(&mut state, instance, &mut None)?;
    Ok(state)
}

/// State after `dft_step` counted DFT steps (`0` is `ψ_ME`).
pub fn simulate_dft_prefix(instance: &ShorInstance, dft_step: usize) -> Result<StateVector> {
    if dft_step > instance.dft_steps() {
        return Err(Error::domain("DFT step index beyond the stage"));
    }
    let mut state = simulate_me_state(instance)?;
    for gate in dft_schedule(instance.l1).into_iter().take(dft_step) {
        apply_dft_gate(&mut state, gate, false)?;
    }
    Ok(state)
}

/// Outcome `x^a mod N` for `a = 1..=r`, its probability and the projected state.
pub fn measure_second_register(
    state: &StateVector,
    instance: &ShorInstance,
) -> Result<Vec<(Branch, StateVector)>> {
    let r2 = instance.r2_sites();
    (1..=instance.order)
        .map(|a| {
            let residue = mod_pow(instance.x, a, instance.n);
            let (post, probability) = state.project(&r2, residue as usize)?;
            Ok((Branch { label: a, residue, probability }, post))
        })
        .collect()
}

/// Step-resolved run. With `measure_after_me`, every outcome of R2 after
/// the ME stage is enumerated and continued through the DFT.
pub fn run_shor_trace(
    instance: &ShorInstance,
    measure_after_me: bool,
    opts: &TraceOptions,
) -> Result<ShorTrace> {
    let (mut state, prefix) = run_to_me(instance, opts)?;
    if !measure_after_me {
        let mut rec = Recorder::resume(opts, prefix);
        run_dft_recorded(&mut state, instance.l1, Some(&mut rec))?;
        let mut trace = rec.finish();
        metadata(&mut trace, instance, opts, false);
        return Ok(ShorTrace::Coherent(trace));
    }
    let branches = measure_second_register(&state, instance)?;
    let traces = branches
        .into_par_iter()
        .map(|(branch, mut post)| {
            let mut rec = Recorder::resume(opts, prefix.clone());
            run_dft_recorded(&mut post, instance.l1, Some(&mut rec))?;
            let mut trace = rec.finish();
            metadata(&mut trace, instance, opts, true);
            trace.branch = Some(branch.clone());
            Ok(BranchTrace { branch, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShorTrace::Measured(traces))
}

/// One measured run with the outcome drawn from the Born distribution.
pub fn run_shor_sampled(instance: &ShorInstance, seed: u64, opts: &TraceOptions) -> Result<BranchTrace> {
    let (state, prefix) = run_to_me(instance, opts)?;
    let branches = measure_second_register(&state, instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let idx = branches
        .iter()
        .position(|(b, _)| {
            acc += b.probability;
            u < acc
        })
        .unwrap_or(branches.len() - 1);
    let (branch, mut post) = branches.into_iter().nth(idx).expect("at least one branch");
    let mut rec = Recorder::resume(opts, prefix);
    run_dft_recorded(&mut post, instance.l1, Some(&mut rec))?;
    let mut trace = rec.finish();
    metadata(&mut trace, instance, opts, true);
    trace.push_meta("sample_seed", seed);
    trace.branch = Some(branch.clone());
    Ok(BranchTrace { branch, trace })
}

/// Every `(N, x)` with register size `L′` (i.e. `2^{L′−1} < N <= 2^{L′}`)
/// and `ord_N(x) = r`, in ascending `(N, x)` order.
pub fn pairs_with_order(r: u64, l_prime: usize) -> Vec<(u64, u64)> {
    if !(2..=20).contains(&l_prime) {
        return Vec::new();
    }
    let lo = (1u64 << (l_prime - 1)) + 1;
    let hi = 1u64 << l_prime;
    (lo.max(3)..=hi)
        .flat_map(|n| (2..n).map(move |x| (n, x)))
        .filter(|&(n, x)| gcd(x, n) == 1 && multiplicative_order(x, n).ok() == Some(r))
        .collect()
}

/// True when `N` is composite and not a prime power.
pub fn is_factoring_modulus(n: u64) -> bool {
    let mut m = n;
    let mut distinct = 0;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            distinct += 1;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        distinct += 1;
    }
    distinct >= 2
}

/// For each `L_tot` (a multiple of 3), the first instance of order `r`:
/// smallest odd `N` with at least two distinct prime factors in the
/// register's range, then smallest `x`. `None` marks a size without one.
pub fn find_pairs_with_order(r: u64, l_tot: &[usize]) -> Result<Vec<(usize, Option<ShorInstance>)>> {
    if r < 2 {
        return Err(Error::domain("order must be at least 2"));
    }
    l_tot
        .iter()
        .map(|&t| {
            if t % 3 != 0 || t < 6 {
                return Err(Error::domain(format!("L_tot = {t} is not a multiple of 3 >= 6")));
            }
            let found = pairs_with_order(r, t / 3)
                .into_iter()
                .find(|&(n, _)| n % 2 == 1 && is_factoring_modulus(n))
                .map(|(n, x)| ShorInstance::new(n, x))
                .transpose()?;
            Ok((t, found))
        })
        .collect()
}

/// Top eigenspace of the `ψ_ME` VCM decoded to additive operators.
pub fn extract_amax_me(instance: &ShorInstance) -> Result<crate::vcm::SpectralResult> {
    let state = simulate_me_state(instance)?;
    max_eigen(&build_vcm(&state), DEFAULT_DEGENERACY_RTOL)
}

/// Coefficient mass `Σ |c|²` of an operator on the R2 sites.
pub fn second_register_mass(op: &AdditiveOperator, instance: &ShorInstance) -> f64 {
    op.sites()
        .iter()
        .zip(op.coefficients())
        .filter(|(s, _)| s.get() > instance.l1)
        .flat_map(|(_, t)| t.iter())
        .map(|c| c.norm_sqr())
        .sum()
}

/// Samples a random R1 amplitude vector (for unitarity checks).
pub fn random_state(n_qubits: usize, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1usize << n_qubits)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::from_amplitudes(amps)
}
