//! Dense statevector register.
//!
//! Sites are numbered `1..=n` and site 1 is the most significant bit of the
//! basis label, so the basis label of `|b_1 b_2 ... b_n⟩` is `Σ b_l 2^(n-l)`.
//! Pauli conventions: `σ_z|0⟩ = |0⟩`, `σ_y = ((0, -i), (i, 0))`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hard cap on the register size (2^26 amplitudes is 1 GiB).
pub const MAX_QUBITS: usize = 26;
/// Above this size a warning is logged.
pub const WARN_QUBITS: usize = 21;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// One-based qubit label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(usize);

impl Site {
    /// # Panics
    /// If `l == 0`.
    pub fn new(l: usize) -> Self {
        assert!(l >= 1, "sites are numbered from 1");
        Site(l)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Sites `first..=last`.
    pub fn range(first: usize, last: usize) -> impl Iterator<Item = Site> + Clone {
        (first..=last).map(Site::new)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Pauli axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -I], [I, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::domain(format!("unknown axis '{other}'"))),
        }
    }
}

/// Validated 2×2 unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    m: [[C64; 2]; 2],
}

impl Gate {
    /// Checks unitarity once, at construction.
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let mut defect: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let mut s = ZERO;
                for k in 0..2 {
                    s += m[k][r].conj() * m[k][c];
                }
                let target = if r == c { ONE } else { ZERO };
                defect = defect.max((s - target).norm());
            }
        }
        if defect > 1e-12 {
            return Err(Error::Validation(format!(
                "gate is not unitary (|U†U - I| = {defect:e})"
            )));
        }
        Ok(Gate { m })
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Gate { m: [[h, h], [h, -h]] }
    }

    pub fn identity() -> Self {
        Gate { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn pauli(axis: Axis) -> Self {
        Gate { m: axis.matrix() }
    }

    /// `e^{iφ} Rz(α) Ry(β) Rz(γ)`; every single-qubit unitary has this form.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64, phase: f64) -> Self {
        let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        let g = C64::from_polar(1.0, phase);
        let e = |t: f64| C64::from_polar(1.0, t);
        Gate {
            m: [
                [
                    g * e(-(alpha + gamma) / 2.0) * cb,
                    -g * e(-(alpha - gamma) / 2.0) * sb,
                ],
                [
                    g * e((alpha - gamma) / 2.0) * sb,
                    g * e((alpha + gamma) / 2.0) * cb,
                ],
            ],
        }
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Gate {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn matrix(&self) -> &[[C64; 2]; 2] {
        &self.m
    }
}

/// Inserts a zero bit at position `pos`, shifting higher bits up.
#[inline]
pub(crate) fn insert_zero(x: usize, pos: usize) -> usize {
    let low = x & ((1usize << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

/// `2^n` complex amplitudes of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::domain(format!(
            "register size {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    if n_qubits > WARN_QUBITS {
        log::warn!("{n_qubits}-qubit register: {} MiB of amplitudes", (16usize << n_qubits) >> 20);
    }
    Ok(())
}

impl StateVector {
    /// Computational basis state `|basis_index⟩`.
    pub fn basis(n_qubits: usize, basis_index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return Err(Error::domain(format!(
                "basis index {basis_index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[basis_index] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the vector is rescaled to unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::domain(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::domain("amplitudes have zero or non-finite norm"));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { n_qubits, amps })
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading sites.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_size(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub(crate) fn replace_amplitudes(&mut self, amps: Vec<C64>) {
        debug_assert_eq!(amps.len(), self.amps.len());
        self.amps = amps;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born probability of basis label `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps.get(index).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn check_site(&self, site: Site) -> Result<()> {
        if site.get() > self.n_qubits {
            return Err(Error::domain(format!(
                "site {site} outside 1..={}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Bit position of `site` within the basis label.
    #[inline]
    pub fn bit_position(&self, site: Site) -> usize {
        self.n_qubits - site.get()
    }

    pub fn apply_gate(&mut self, site: Site, gate: &Gate) -> Result<()> {
        self.check_site(site)?;
        let pos = self.bit_position(site);
        let bit = 1usize << pos;
        let [[g00, g01], [g10, g11]] = gate.m;
        for k in 0..self.amps.len() / 2 {
            let i0 = insert_zero(k, pos);
            let i1 = i0 | bit;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = g00 * a0 + g01 * a1;
            self.amps[i1] = g10 * a0 + g11 * a1;
        }
        Ok(())
    }

    /// Hadamard on every site in `sites`, returning the number of gate steps.
    pub fn apply_hadamard_all(&mut self, sites: impl IntoIterator<Item = Site>) -> Result<usize> {
        let h = Gate::hadamard();
        let mut steps = 0;
        for site in sites {
            self.apply_gate(site, &h)?;
            steps += 1;
        }
        Ok(steps)
    }

    /// Multiplies by `e^{i angle}` every amplitude whose label has both sites set.
    pub fn apply_controlled_phase(&mut self, a: Site, b: Site, angle: f64) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::domain("controlled phase needs two distinct sites"));
        }
        let mask = (1usize << self.bit_position(a)) | (1usize << self.bit_position(b));
        let phase = C64::from_polar(1.0, angle);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= phase;
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::domain(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Single-site reduced density matrix, `ρ[r][c] = Σ ψ_r ψ_c^*`.
    pub fn reduced_density_single(&self, site: Site) -> Result<[[C64; 2]; 2]> {
        self.check_site(site)?;
        let pos = self.bit_position(site);
        let bit = 1usize << pos;
        let (mut r00, mut r01, mut r11) = (0.0, ZERO, 0.0);
        for k in 0..self.amps.len() / 2 {
            let i0 = insert_zero(k, pos);
            let (a0, a1) = (self.amps[i0], self.amps[i0 | bit]);
            r00 += a0.norm_sqr();
            r11 += a1.norm_sqr();
            r01 += a0 * a1.conj();
        }
        Ok([[C64::new(r00, 0.0), r01], [r01.conj(), C64::new(r11, 0.0)]])
    }

    /// Two-site reduced density matrix in the basis `|b_a b_b⟩` (index `2 b_a + b_b`).
    pub fn reduced_density_pair(&self, a: Site, b: Site) -> Result<[[C64; 4]; 4]> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::domain("pair density matrix needs two distinct sites"));
        }
        let (pa, pb) = (self.bit_position(a), self.bit_position(b));
        let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
        let (ba, bb) = (1usize << pa, 1usize << pb);
        let mut rho = [[ZERO; 4]; 4];
        for k in 0..self.amps.len() / 4 {
            let base = insert_zero(insert_zero(k, lo), hi);
            let v = [
                self.amps[base],
                self.amps[base | bb],
                self.amps[base | ba],
                self.amps[base | ba | bb],
            ];
            for r in 0..4 {
                if v[r] == ZERO {
                    continue;
                }
                for c in r..4 {
                    rho[r][c] += v[r] * v[c].conj();
                }
            }
        }
        for r in 0..4 {
            for c in 0..r {
                rho[r][c] = rho[c][r].conj();
            }
        }
        Ok(rho)
    }

    /// `⟨ψ|σ_α(l) σ_β(l′)|ψ⟩`; `l == l′` is the product on one site.
    pub fn pauli_pair_expectation(&self, l: Site, alpha: Axis, lp: Site, beta: Axis) -> Result<C64> {
        if l == lp {
            let rho = self.reduced_density_single(l)?;
            return Ok(single_site_product(&rho, alpha, beta));
        }
        let rho = self.reduced_density_pair(l, lp)?;
        Ok(pair_expectation(&rho, alpha, beta))
    }

    /// Born probabilities of every outcome on `sites`; `sites[0]` is the
    /// most significant outcome bit.
    pub fn outcome_probabilities(&self, sites: &[Site]) -> Result<Vec<f64>> {
        for &s in sites {
            self.check_site(s)?;
        }
        let mut probs = vec![0.0; 1 << sites.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            probs[self.outcome_of(i, sites)] += amp.norm_sqr();
        }
        Ok(probs)
    }

    fn outcome_of(&self, label: usize, sites: &[Site]) -> usize {
        sites.iter().fold(0, |acc, &s| {
            (acc << 1) | ((label >> self.bit_position(s)) & 1)
        })
    }

    /// Projects `sites` onto `outcome`; returns the renormalized state and
    /// its Born probability.
    pub fn project(&self, sites: &[Site], outcome: usize) -> Result<(StateVector, f64)> {
        for &s in sites {
            self.check_site(s)?;
        }
        if sites.len() < usize::BITS as usize && outcome >> sites.len() != 0 {
            return Err(Error::domain(format!(
                "outcome {outcome} needs more than {} bits",
                sites.len()
            )));
        }
        let mut amps = self.amps.clone();
        let mut prob = 0.0;
        for (i, amp) in amps.iter_mut().enumerate() {
            if self.outcome_of(i, sites) == outcome {
                prob += amp.norm_sqr();
            } else {
                *amp = ZERO;
            }
        }
        if prob < 1e-14 {
            return Err(Error::ImpossibleOutcome { outcome, probability: prob });
        }
        let scale = 1.0 / prob.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok((StateVector { n_qubits: self.n_qubits, amps }, prob))
    }

    /// Relabels qubits: the qubit at site `l` moves to site `perm[l-1]`.
    pub fn permute_sites(&self, perm: &[Site]) -> Result<StateVector> {
        let n = self.n_qubits;
        if perm.len() != n {
            return Err(Error::domain("permutation length differs from register size"));
        }
        let mut seen = vec![false; n];
        for s in perm {
            self.check_site(*s)?;
            if std::mem::replace(&mut seen[s.get() - 1], true) {
                return Err(Error::domain("permutation repeats a site"));
            }
        }
        let mut amps = vec![ZERO; self.amps.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let mut j = 0;
            for (from, to) in perm.iter().enumerate() {
                let bit = (i >> (n - 1 - from)) & 1;
                j |= bit << (n - to.get());
            }
            amps[j] = *amp;
        }
        Ok(StateVector { n_qubits: n, amps })
    }
}

/// `⟨σ_α σ_β⟩` on one site from its 2×2 density matrix.
pub(crate) fn single_site_product(rho: &[[C64; 2]; 2], alpha: Axis, beta: Axis) -> C64 {
    let (a, b) = (alpha.matrix(), beta.matrix());
    let mut prod = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            prod[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    trace_product2(rho, &prod)
}

pub(crate) fn single_site_expectation(rho: &[[C64; 2]; 2], axis: Axis) -> C64 {
    trace_product2(rho, &axis.matrix())
}

fn trace_product2(rho: &[[C64; 2]; 2], op: &[[C64; 2]; 2]) -> C64 {
    let mut t = ZERO;
    for r in 0..2 {
        for c in 0..2 {
            t += rho[r][c] * op[c][r];
        }
    }
    t
}

/// `Tr(ρ σ_α ⊗ σ_β)` for a two-site density matrix.
pub(crate) fn pair_expectation(rho: &[[C64; 4]; 4], alpha: Axis, beta: Axis) -> C64 {
    let (a, b) = (alpha.matrix(), beta.matrix());
    let mut t = ZERO;
    for r in 0..4 {
        for c in 0..4 {
            let op_cr = a[c >> 1][r >> 1] * b[c & 1][r & 1];
            if op_cr != ZERO {
                t += rho[r][c] * op_cr;
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn scrambled(n: usize) -> StateVector {
        let mut s = StateVector::basis(n, 0).unwrap();
        for l in 1..=n {
            let t = l as f64;
            s.apply_gate(Site::new(l), &Gate::from_euler(0.3 * t, 1.1 + 0.2 * t, -0.7 * t, 0.1))
                .unwrap();
        }
        for l in 1..n {
            s.apply_controlled_phase(Site::new(l), Site::new(l + 1), 0.9 + l as f64).unwrap();
            s.apply_gate(Site::new(l + 1), &Gate::hadamard()).unwrap();
        }
        s
    }

    #[test]
    fn basis_states() {
        let s = StateVector::basis(1, 0).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = StateVector::basis(2, 3).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(StateVector::basis(2, 4).is_err());
        assert!(StateVector::basis(0, 0).is_err());
        assert!(StateVector::basis(MAX_QUBITS + 1, 0).is_err());
    }

    #[test]
    fn hadamard_and_identity() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_gate(Site::new(1), &Gate::hadamard()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amplitudes()[0], C64::new(h, 0.0), 1e-15));
        assert!(close(s.amplitudes()[1], C64::new(h, 0.0), 1e-15));

        let mut s = StateVector::basis(1, 1).unwrap();
        s.apply_gate(Site::new(1), &Gate::hadamard()).unwrap();
        assert!(close(s.amplitudes()[1], C64::new(-h, 0.0), 1e-15));

        let before = scrambled(4);
        let mut after = before.clone();
        after.apply_gate(Site::new(2), &Gate::identity()).unwrap();
        assert_eq!(before, after);

        let mut twice = before.clone();
        for _ in 0..2 {
            twice.apply_gate(Site::new(3), &Gate::hadamard()).unwrap();
        }
        for (a, b) in twice.amplitudes().iter().zip(before.amplitudes()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn hadamard_all_gives_uniform_state() {
        let mut s = StateVector::basis(3, 0).unwrap();
        let steps = s.apply_hadamard_all(Site::range(1, 3)).unwrap();
        assert_eq!(steps, 3);
        for a in s.amplitudes() {
            assert!(close(*a, C64::new(1.0 / 8f64.sqrt(), 0.0), 1e-15));
        }
    }

    #[test]
    fn rejects_non_unitary_gate() {
        let err = Gate::new([[ONE, ONE], [ZERO, ONE]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(Gate::new(Gate::from_euler(0.1, 0.2, 0.3, 0.4).m).is_ok());
    }

    #[test]
    fn gate_then_adjoint_restores() {
        let s0 = scrambled(5);
        let g = Gate::from_euler(1.3, -0.4, 2.2, 0.7);
        let mut s = s0.clone();
        s.apply_gate(Site::new(4), &g).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        s.apply_gate(Site::new(4), &g.dagger()).unwrap();
        for (a, b) in s.amplitudes().iter().zip(s0.amplitudes()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn inner_products() {
        let z = StateVector::basis(1, 0).unwrap();
        let o = StateVector::basis(1, 1).unwrap();
        assert_eq!(z.inner(&z).unwrap(), ONE);
        assert_eq!(z.inner(&o).unwrap(), ZERO);
        let s = scrambled(4);
        assert!(close(s.inner(&s).unwrap(), ONE, 1e-12));
        assert!(z.inner(&s).is_err());
    }

    #[test]
    fn pauli_examples() {
        let s = StateVector::basis(2, 0).unwrap();
        let e = s.pauli_pair_expectation(Site::new(1), Axis::Z, Site::new(2), Axis::Z).unwrap();
        assert!(close(e, ONE, 1e-15));
        let s = StateVector::basis(1, 0).unwrap();
        let e = s.pauli_pair_expectation(Site::new(1), Axis::X, Site::new(1), Axis::Y).unwrap();
        assert!(close(e, I, 1e-15));
    }

    #[test]
    fn pauli_hermitian_symmetry() {
        let s = scrambled(4);
        for l in 1..=4 {
            for lp in 1..=4 {
                for a in Axis::ALL {
                    for b in Axis::ALL {
                        let v = s.pauli_pair_expectation(Site::new(l), a, Site::new(lp), b).unwrap();
                        let w = s.pauli_pair_expectation(Site::new(lp), b, Site::new(l), a).unwrap();
                        assert!(close(v, w.conj(), 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn projection() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_gate(Site::new(1), &Gate::hadamard()).unwrap();
        let (post, p) = s.project(&[Site::new(1)], 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(post.amplitudes()[0], ONE, 1e-15));

        let b = StateVector::basis(3, 5).unwrap();
        let err = b.project(&[Site::new(1)], 0).unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome { .. }));
        assert!(b.project(&[Site::new(1)], 2).is_err());

        let s = scrambled(5);
        let sites = [Site::new(4), Site::new(2)];
        let total: f64 = s.outcome_probabilities(&sites).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn permutation_moves_bits() {
        // |100⟩ with qubit 1 moved to site 3 becomes |001⟩.
        let s = StateVector::basis(3, 0b100).unwrap();
        let p = s
            .permute_sites(&[Site::new(3), Site::new(1), Site::new(2)])
            .unwrap();
        assert_eq!(p.probability(0b001), 1.0);
        assert!(s.permute_sites(&[Site::new(1), Site::new(1), Site::new(2)]).is_err());
    }

    #[test]
    fn tensor_product_ordering() {
        let a = StateVector::basis(1, 1).unwrap();
        let b = StateVector::basis(2, 1).unwrap();
        assert_eq!(a.tensor(&b).unwrap().probability(0b101), 1.0);
    }
}
