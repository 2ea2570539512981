//! Variance-covariance matrix (VCM) of Pauli fluctuations and its top
//! eigenspace.
//!
//! For sites `l, l′` and axes `α, β` the matrix holds
//! `⟨σ_α(l) σ_β(l′)⟩ − ⟨σ_α(l)⟩⟨σ_β(l′)⟩`. Rows and columns are site-major
//! with axis order x, y, z, so row `3·i + axis` belongs to the `i`-th site of
//! the analysed subset. The largest eigenvalue `e_max` scales as `L^(p-1)`
//! where `p` is the macroscopic-entanglement index.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statevec::{
    pair_expectation, single_site_expectation, single_site_product, Axis, Site, StateVector, C64,
    ZERO,
};

/// Residual bound `‖Vv − e v‖` accepted for a returned top eigenvector.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Default relative window for counting degenerate top eigenvalues.
pub const DEFAULT_DEGENERACY_RTOL: f64 = 1e-8;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug)]
pub struct Vcm {
    sites: Vec<Site>,
    entries: DMatrix<C64>,
}

impl Vcm {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Entry for `(site position i, α), (site position j, β)`.
    pub fn entry(&self, i: usize, alpha: Axis, j: usize, beta: Axis) -> C64 {
        self.entries[(3 * i + alpha.index(), 3 * j + beta.index())]
    }

    /// The 3×3 block of site positions `i, j`.
    pub fn block(&self, i: usize, j: usize) -> [[C64; 3]; 3] {
        let mut b = [[ZERO; 3]; 3];
        for (a, row) in b.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.entries[(3 * i + a, 3 * j + c)];
            }
        }
        b
    }

    /// `max |V − V†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.entries.nrows();
        let mut d: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                d = d.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|v| v.re).sum()
    }

    /// `c†Vc`, the fluctuation of an additive operator given by the matrix.
    pub fn quadratic_form(&self, op: &AdditiveOperator) -> Result<f64> {
        if op.sites() != self.sites() {
            return Err(Error::domain("operator and VCM are defined on different sites"));
        }
        let c = op.to_vector();
        Ok((c.adjoint() * &self.entries * &c)[(0, 0)].re)
    }

    /// Writes the matrix as CSV: a `(l,axis)` row label followed by `re,im`
    /// pairs for every column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let labels: Vec<String> = self
            .sites
            .iter()
            .flat_map(|s| Axis::ALL.iter().map(move |a| format!("({},{})", s, a.label())))
            .collect();
        write!(w, "row")?;
        for l in &labels {
            write!(w, ",{l}.re,{l}.im")?;
        }
        writeln!(w)?;
        for (r, label) in labels.iter().enumerate() {
            write!(w, "\"{label}\"")?;
            for c in 0..labels.len() {
                let v = self.entries[(r, c)];
                write!(w, ",{:.6},{:.6}", v.re, v.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// VCM over all sites of `state`.
pub fn build_vcm(state: &StateVector) -> Vcm {
    let sites: Vec<Site> = Site::range(1, state.n_qubits()).collect();
    build_vcm_on(state, &sites).expect("all sites are in range")
}

/// VCM over a subset of sites, in the given order.
pub fn build_vcm_on(state: &StateVector, sites: &[Site]) -> Result<Vcm> {
    if sites.is_empty() {
        return Err(Error::domain("VCM needs at least one site"));
    }
    for (i, s) in sites.iter().enumerate() {
        state.check_site(*s)?;
        if sites[..i].contains(s) {
            return Err(Error::domain(format!("site {s} listed twice")));
        }
    }
    let n = sites.len();

    let singles: Vec<[[C64; 2]; 2]> = sites
        .par_iter()
        .map(|&s| state.reduced_density_single(s))
        .collect::<Result<_>>()?;
    let means: Vec<[C64; 3]> = singles
        .iter()
        .map(|rho| Axis::ALL.map(|a| single_site_expectation(rho, a)))
        .collect();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let pair_blocks: Vec<[[C64; 3]; 3]> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let rho = state.reduced_density_pair(sites[i], sites[j])?;
            Ok(Axis::ALL.map(|a| {
                Axis::ALL.map(|b| {
                    pair_expectation(&rho, a, b) - means[i][a.index()] * means[j][b.index()]
                })
            }))
        })
        .collect::<Result<_>>()?;

    let mut m = DMatrix::from_element(3 * n, 3 * n, ZERO);
    for (i, rho) in singles.iter().enumerate() {
        for a in Axis::ALL {
            for b in Axis::ALL {
                m[(3 * i + a.index(), 3 * i + b.index())] = single_site_product(rho, a, b)
                    - means[i][a.index()] * means[i][b.index()];
            }
        }
    }
    for (&(i, j), block) in pairs.iter().zip(&pair_blocks) {
        for a in 0..3 {
            for b in 0..3 {
                m[(3 * i + a, 3 * j + b)] = block[a][b];
                m[(3 * j + b, 3 * i + a)] = block[a][b].conj();
            }
        }
    }
    Ok(Vcm { sites: sites.to_vec(), entries: m })
}

/// Invariant checks gathered while extracting the spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VcmDiagnostics {
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// Largest `‖Vv − e_max v‖` over the returned top eigenvectors.
    pub residual: f64,
}

impl VcmDiagnostics {
    /// Hermitian to 1e-12 and positive semidefinite to −1e-9.
    pub fn is_valid(&self) -> bool {
        self.hermitian_defect <= 1e-12 && self.min_eigenvalue >= -1e-9
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub e_max: f64,
    pub degeneracy: usize,
    /// Maximally fluctuating additive operators spanning the top eigenspace.
    pub top_operators: Vec<AdditiveOperator>,
    /// All eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    pub diagnostics: VcmDiagnostics,
}

impl SpectralResult {
    /// Gap between `e_max` and the first eigenvalue outside the top eigenspace.
    pub fn gap(&self) -> Option<f64> {
        self.eigenvalues.get(self.degeneracy).map(|e| self.e_max - e)
    }
}

/// Largest eigenvalue of the VCM and its eigenspace.
pub fn max_eigen(vcm: &Vcm, degeneracy_rtol: f64) -> Result<SpectralResult> {
    let hermitian_defect = vcm.hermitian_defect();
    let m = &vcm.entries;
    let sym = (m + m.adjoint()).map(|v| v * 0.5);
    let eig = SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical {
            message: format!("Hermitian eigensolver did not converge ({}×{})", m.nrows(), m.ncols()),
            residual: f64::NAN,
        }
    })?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let e_max = eigenvalues[0];
    let window = degeneracy_rtol * e_max.abs().max(f64::MIN_POSITIVE);
    let degeneracy = eigenvalues.iter().take_while(|&&e| e_max - e <= window).count();

    let mut residual: f64 = 0.0;
    let mut top_operators = Vec::with_capacity(degeneracy);
    for &idx in order.iter().take(degeneracy) {
        let v = eig.eigenvectors.column(idx).into_owned();
        let r = (m * &v - v.map(|x| x * e_max)).norm() / v.norm();
        residual = residual.max(r);
        top_operators.push(AdditiveOperator::from_vector(vcm.sites.clone(), &v)?);
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::Numerical {
            message: "top eigenvector residual above tolerance".into(),
            residual,
        });
    }

    Ok(SpectralResult {
        e_max,
        degeneracy,
        top_operators,
        diagnostics: VcmDiagnostics {
            hermitian_defect,
            min_eigenvalue: *eigenvalues.last().expect("non-empty spectrum"),
            trace: vcm.trace(),
            residual,
        },
        eigenvalues,
    })
}

/// `ψ ↦ e_max` with the default degeneracy window.
pub fn e_max(state: &StateVector) -> Result<f64> {
    Ok(max_eigen(&build_vcm(state), DEFAULT_DEGENERACY_RTOL)?.e_max)
}

/// `Â = Σ_l Σ_α c_{lα} σ_α(l)` with `Σ |c_{lα}|² = L`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveOperator {
    sites: Vec<Site>,
    coeffs: Vec<[C64; 3]>,
}

impl AdditiveOperator {
    /// Rescales `coeffs` to the `Σ|c|² = L` convention.
    pub fn new(sites: Vec<Site>, coeffs: Vec<[C64; 3]>) -> Result<Self> {
        if sites.is_empty() || sites.len() != coeffs.len() {
            return Err(Error::domain("operator needs one coefficient triple per site"));
        }
        let norm: f64 = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("operator coefficients are all zero"));
        }
        let scale = (sites.len() as f64 / norm).sqrt();
        let coeffs = coeffs.into_iter().map(|t| t.map(|c| c * scale)).collect();
        Ok(AdditiveOperator { sites, coeffs })
    }

    /// Decodes a site-major eigenvector, fixing the gauge so the
    /// largest-magnitude coefficient is real positive.
    pub fn from_vector(sites: Vec<Site>, v: &DVector<C64>) -> Result<Self> {
        if v.len() != 3 * sites.len() {
            return Err(Error::domain("vector length is not 3 × site count"));
        }
        let mut pivot = ZERO;
        let mut best = -1.0;
        for c in v.iter() {
            // strict comparison keeps the first of equal-magnitude entries
            if c.norm() > best + 1e-12 {
                best = c.norm();
                pivot = *c;
            }
        }
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        let coeffs = v
            .as_slice()
            .chunks(3)
            .map(|t| [t[0] * phase, t[1] * phase, t[2] * phase])
            .collect();
        AdditiveOperator::new(sites, coeffs)
    }

    /// `M_α = Σ_l σ_α(l)`, or with `staggered`, `Σ_l (−1)^l σ_α(l)`.
    pub fn magnetization(n_sites: usize, axis: Axis, staggered: bool) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::domain("magnetization needs at least one site"));
        }
        let sites: Vec<Site> = Site::range(1, n_sites).collect();
        let coeffs = sites
            .iter()
            .map(|s| {
                let mut t = [ZERO; 3];
                let sign = if staggered && s.get() % 2 == 1 { -1.0 } else { 1.0 };
                t[axis.index()] = C64::new(sign, 0.0);
                t
            })
            .collect();
        AdditiveOperator::new(sites, coeffs)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn coefficients(&self) -> &[[C64; 3]] {
        &self.coeffs
    }

    pub fn coefficient(&self, site: Site, axis: Axis) -> Option<C64> {
        let i = self.sites.iter().position(|&s| s == site)?;
        Some(self.coeffs[i][axis.index()])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Site-major coefficient vector matching the VCM layout.
    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_iterator(3 * self.coeffs.len(), self.coeffs.iter().flatten().copied())
    }

    /// `Â|ψ⟩` (not normalized).
    pub fn apply(&self, state: &StateVector) -> Result<Vec<C64>> {
        let amps = state.amplitudes();
        let mut out = vec![ZERO; amps.len()];
        for (site, [cx, cy, cz]) in self.sites.iter().zip(&self.coeffs) {
            state.check_site(*site)?;
            let bit = 1usize << state.bit_position(*site);
            for (i, o) in out.iter_mut().enumerate() {
                let flipped = amps[i ^ bit];
                let set = i & bit != 0;
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                let y = if set { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                let z = if set { -amps[i] } else { amps[i] };
                *o += cx * flipped + cy * y * flipped + cz * z;
            }
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(ops: &[AdditiveOperator], mut w: W) -> Result<()> {
        writeln!(w, "operator,site,axis,re,im")?;
        for (k, op) in ops.iter().enumerate() {
            for (s, t) in op.sites.iter().zip(&op.coeffs) {
                for a in Axis::ALL {
                    let c = t[a.index()];
                    writeln!(w, "{k},{s},{},{:.6},{:.6}", a.label(), c.re, c.im)?;
                }
            }
        }
        Ok(())
    }
}

/// `⟨ψ|ΔÂ†ΔÂ|ψ⟩ = ‖(Â − ⟨Â⟩)ψ‖²`, evaluated directly on the state.
pub fn operator_fluctuation(state: &StateVector, op: &AdditiveOperator) -> Result<f64> {
    let a_psi = op.apply(state)?;
    let amps = state.amplitudes();
    let mean: C64 = amps.iter().zip(&a_psi).map(|(p, q)| p.conj() * q).sum();
    Ok(a_psi
        .iter()
        .zip(amps)
        .map(|(q, p)| (q - mean * p).norm_sqr())
        .sum())
}

/// Orthonormal basis (as columns) of the span of the given operators.
fn orthonormal_span(ops: &[AdditiveOperator]) -> DMatrix<C64> {
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for op in ops {
        let mut v = op.to_vector();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-10 {
            basis.push(v / C64::new(n, 0.0));
        }
    }
    DMatrix::from_columns(&basis)
}

/// Largest principal angle (radians) between the spans of two operator sets.
///
/// Returns `π/2` when the spans have different dimensions.
pub fn max_principal_angle(a: &[AdditiveOperator], b: &[AdditiveOperator]) -> Result<f64> {
    let (Some(fa), Some(fb)) = (a.first(), b.first()) else {
        return Err(Error::domain("principal angles need non-empty operator sets"));
    };
    if a.iter().chain(b).any(|op| op.sites() != fa.sites()) || fa.sites() != fb.sites() {
        return Err(Error::domain("operators are defined on different sites"));
    }
    let qa = orthonormal_span(a);
    let qb = orthonormal_span(b);
    if qa.ncols() != qb.ncols() {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    // sin of the largest angle is the spectral norm of (I − QaQa†)Qb
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    let sin = resid.singular_values().max().min(1.0);
    Ok(sin.asin())
}
