//! Finite-size scaling of `e_max` and classification of the index `p`.
//!
//! `e_max(L) = O(L^{p−1})`, so a line with positive slope means `p = 2` and
//! a flat sequence means `p = 1`. The numeric thresholds live in
//! [`FitThresholds`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grover::{self, GroverInstance};
use crate::shor::{self, ShorInstance};
use crate::statevec::StateVector;
use crate::trace::{TraceOptions, VERSION};
use crate::vcm;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    /// `p = 1`, not macroscopically entangled.
    P1,
    /// `p = 2`, macroscopically entangled.
    P2,
    Indeterminate,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::P1 => "p=1",
            Classification::P2 => "p=2",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitThresholds {
    pub min_slope: f64,
    pub min_r_squared: f64,
    /// `max − min` of `e_max` below which the sequence counts as flat.
    pub max_flat_range: f64,
}

impl Default for FitThresholds {
    fn default() -> Self {
        FitThresholds { min_slope: 0.05, min_r_squared: 0.98, max_flat_range: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    /// `(size, e_max)` sorted by size.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slope of `ln e_max` against `ln size`; `p ≈ 1 + loglog_slope`.
    pub loglog_slope: f64,
    pub classification: Classification,
}

/// Least-squares line `y = slope·x + intercept` and its `R²`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * my.abs().max(1.0) * n {
        // constant data is fitted exactly by the flat line
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r_squared)
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    fit_scaling_with(points, &FitThresholds::default())
}

pub fn fit_scaling_with(points: &[(f64, f64)], thresholds: &FitThresholds) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::domain("scaling fit needs distinct sizes"));
    }
    if sorted.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::domain("scaling fit got non-finite points"));
    }
    let (slope, intercept, r_squared) = linear_fit(&sorted);
    let loglog_slope = if sorted.iter().all(|p| p.0 > 0.0 && p.1 > 0.0) {
        let logs: Vec<(f64, f64)> = sorted.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
        linear_fit(&logs).0
    } else {
        f64::NAN
    };
    let (lo, hi) = sorted
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let classification = if slope >= thresholds.min_slope && r_squared >= thresholds.min_r_squared {
        Classification::P2
    } else if hi - lo <= thresholds.max_flat_range {
        Classification::P1
    } else {
        Classification::Indeterminate
    };
    Ok(ScalingFit { points: sorted, slope, intercept, r_squared, loglog_slope, classification })
}

/// Which Grover state of each size is analysed.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroverSelector {
    /// `ψ_0`, right after the first Hadamard transformation.
    Initial,
    /// `ψ_⌈R/s⌉`.
    Fraction(usize),
    /// `ψ_R`.
    Final,
    /// Largest `e_max` over every step of the full trace.
    TraceMax,
}

impl GroverSelector {
    pub fn iteration(self, r: usize) -> Option<usize> {
        match self {
            GroverSelector::Initial => Some(0),
            GroverSelector::Fraction(s) => Some(r.div_ceil(s)),
            GroverSelector::Final => Some(r),
            GroverSelector::TraceMax => None,
        }
    }
}

impl fmt::Display for GroverSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroverSelector::Initial => f.write_str("psi_0"),
            GroverSelector::Fraction(s) => write!(f, "psi_R/{s}"),
            GroverSelector::Final => f.write_str("psi_R"),
            GroverSelector::TraceMax => f.write_str("trace_max"),
        }
    }
}

impl FromStr for GroverSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "initial" | "psi_0" => Ok(GroverSelector::Initial),
            "R" | "final" | "psi_R" => Ok(GroverSelector::Final),
            "max" | "trace_max" => Ok(GroverSelector::TraceMax),
            "half" => Ok(GroverSelector::Fraction(2)),
            "third" => Ok(GroverSelector::Fraction(3)),
            "quarter" => Ok(GroverSelector::Fraction(4)),
            other => {
                let frac = other.strip_prefix("psi_").unwrap_or(other);
                frac.strip_prefix("R/")
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&d| d >= 1)
                    .map(GroverSelector::Fraction)
                    .ok_or_else(|| Error::domain(format!("unknown Grover selector '{other}'")))
            }
        }
    }
}

/// How the Grover instance of each size is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroverFamily {
    /// `M` solutions; `M = 1` uses the tabulated reference solutions.
    Solutions { m: usize, seed: Option<u64> },
    MultiplesOfEight,
}

impl GroverFamily {
    pub fn instance(&self, l: usize) -> Result<GroverInstance> {
        match *self {
            GroverFamily::Solutions { m: 1, seed: None } => GroverInstance::reference(l),
            GroverFamily::Solutions { m, seed } => {
                GroverInstance::random(l, m, seed.unwrap_or(l as u64))
            }
            GroverFamily::MultiplesOfEight => grover::multiples_of_eight_instance(l),
        }
    }
}

/// One `(selector, size, e_max)` sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub selector: String,
    pub size: usize,
    pub e_max: f64,
}

/// `e_max` of the selected Grover states over a list of register sizes.
///
/// `simulate` runs the gate circuit; otherwise the closed-form `ψ_k` is
/// used. [`GroverSelector::TraceMax`] always simulates the full trace.
pub fn sweep_grover(
    sizes: &[usize],
    family: GroverFamily,
    selectors: &[GroverSelector],
    simulate: bool,
) -> Result<Vec<SweepPoint>> {
    let jobs: Vec<(GroverSelector, usize)> = selectors
        .iter()
        .flat_map(|&s| sizes.iter().map(move |&l| (s, l)))
        .collect();
    jobs.par_iter()
        .map(|&(sel, l)| {
            let inst = family.instance(l)?;
            let e_max = match sel.iteration(inst.params().iterations) {
                Some(k) => {
                    let state = if simulate {
                        grover::simulate_psi_k(&inst, k)?
                    } else {
                        grover::analytic_psi_k(&inst, k)?
                    };
                    vcm::e_max(&state)?
                }
                None => {
                    let opts = TraceOptions::with_stride(if l > grover::MAX_FULL_ANALYSIS_L { 2 } else { 1 });
                    grover::run_grover(&inst, &opts)?
                        .e_max_series()
                        .into_iter()
                        .map(|(_, e)| e)
                        .fold(f64::NEG_INFINITY, f64::max)
                }
            };
            Ok(SweepPoint { selector: sel.to_string(), size: l, e_max })
        })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShorSelector {
    /// `ψ_ME`.
    ModExp,
    /// After the pairwise transformations targeting `L/2` qubits of R1.
    MidDft,
    /// `ψ_DFT`.
    Final,
}

impl ShorSelector {
    pub const ALL: [ShorSelector; 3] = [ShorSelector::ModExp, ShorSelector::MidDft, ShorSelector::Final];

    /// Counted DFT steps taken before the snapshot.
    pub fn dft_step(self, instance: &ShorInstance) -> usize {
        match self {
            ShorSelector::ModExp => 0,
            ShorSelector::MidDft => instance.mid_dft_step(),
            ShorSelector::Final => instance.dft_steps(),
        }
    }
}

impl fmt::Display for ShorSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShorSelector::ModExp => "ME",
            ShorSelector::MidDft => "midDFT",
            ShorSelector::Final => "final",
        })
    }
}

impl FromStr for ShorSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ME" | "me" => Ok(ShorSelector::ModExp),
            "midDFT" | "mid-dft" | "middft" | "mid" => Ok(ShorSelector::MidDft),
            "final" | "DFT" | "dft" => Ok(ShorSelector::Final),
            other => Err(Error::domain(format!("unknown Shor selector '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShorSweep {
    pub points: Vec<SweepPoint>,
    pub instances: Vec<ShorInstance>,
    /// Sizes for which no instance of the requested order exists.
    pub missing: Vec<usize>,
}

/// Snapshots of one instance at the requested DFT steps.
pub fn shor_snapshots(instance: &ShorInstance, dft_steps: &[usize]) -> Result<Vec<StateVector>> {
    let mut wanted: Vec<usize> = dft_steps.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut state = shor::simulate_me_state(instance)?;
    let schedule = shor::dft_schedule(instance.first_register());
    let mut taken = 0;
    let mut snaps = BTreeMap::new();
    for &w in &wanted {
        if w > schedule.len() {
            return Err(Error::domain("snapshot beyond the DFT stage"));
        }
        for &g in &schedule[taken..w] {
            shor::apply_dft_gate(&mut state, g, false)?;
        }
        taken = w;
        snaps.insert(w, state.clone());
    }
    Ok(dft_steps.iter().map(|s| snaps[s].clone()).collect())
}

/// `e_max` of the selected Shor states for instances of order `r`.
pub fn sweep_shor(r: u64, l_tot: &[usize], selectors: &[ShorSelector]) -> Result<ShorSweep> {
    let found = shor::find_pairs_with_order(r, l_tot)?;
    let mut missing = Vec::new();
    let mut instances = Vec::new();
    for (t, inst) in found {
        match inst {
            Some(i) => instances.push(i),
            None => {
                log::warn!("no instance of order {r} with L_tot = {t}");
                missing.push(t);
            }
        }
    }
    let per_instance: Vec<Vec<SweepPoint>> = instances
        .par_iter()
        .map(|inst| {
            let steps: Vec<usize> = selectors.iter().map(|s| s.dft_step(inst)).collect();
            let states = shor_snapshots(inst, &steps)?;
            selectors
                .iter()
                .zip(&states)
                .map(|(sel, st)| {
                    Ok(SweepPoint { selector: sel.to_string(), size: inst.total_qubits(), e_max: vcm::e_max(st)? })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // selector-major order, matching sweep_grover
    let mut points = Vec::new();
    for sel in selectors {
        let label = sel.to_string();
        for pts in &per_instance {
            points.extend(pts.iter().filter(|p| p.selector == label).cloned());
        }
    }
    Ok(ShorSweep { points, instances, missing })
}

/// Groups points by selector (first-appearance order) and fits each group.
pub fn fit_by_selector(points: &[SweepPoint], thresholds: &FitThresholds) -> Result<Vec<(String, ScalingFit)>> {
    let mut order: Vec<String> = Vec::new();
    for p in points {
        if !order.contains(&p.selector) {
            order.push(p.selector.clone());
        }
    }
    order
        .into_iter()
        .map(|sel| {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.selector == sel)
                .map(|p| (p.size as f64, p.e_max))
                .collect();
            let fit = fit_scaling_with(&pts, thresholds)?;
            Ok((sel, fit))
        })
        .collect()
}

/// Points CSV: `#` header lines, then `selector,size,e_max`.
pub fn write_points_csv<W: Write>(points: &[SweepPoint], header: &[(String, String)], mut w: W) -> Result<()> {
    writeln!(w, "# macroent {VERSION}")?;
    for (k, v) in header {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "selector,size,e_max")?;
    for p in points {
        writeln!(w, "{},{},{:.6}", p.selector, p.size, p.e_max)?;
    }
    Ok(())
}

pub fn read_points_csv<R: BufRead>(r: R) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    let mut seen_header = false;
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != "selector,size,e_max" {
                return Err(Error::domain(format!("line {}: expected points header, got '{line}'", no + 1)));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || Error::domain(format!("line {}: malformed point '{line}'", no + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        points.push(SweepPoint {
            selector: fields[0].to_string(),
            size: fields[1].parse().map_err(|_| bad())?,
            e_max: fields[2].parse().map_err(|_| bad())?,
        });
    }
    Ok(points)
}

/// Fit report CSV: `selector,slope,intercept,r_squared,loglog_slope,classification`.
pub fn write_fit_report<W: Write>(fits: &[(String, ScalingFit)], header: &[(String, String)], mut w: W) -> Result<()> {
    writeln!(w, "# macroent {VERSION}")?;
    for (k, v) in header {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "selector,slope,intercept,r_squared,loglog_slope,classification")?;
    for (sel, f) in fits {
        writeln!(
            w,
            "{sel},{:.6},{:.6},{:.6},{:.6},{}",
            f.slope, f.intercept, f.r_squared, f.loglog_slope, f.classification
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_p2() {
        let f = fit_scaling(&[(4.0, 4.0), (6.0, 6.0), (8.0, 8.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.loglog_slope - 1.0).abs() < 1e-6);
        assert_eq!(f.classification, Classification::P2);
    }

    #[test]
    fn constant_is_p1() {
        let f = fit_scaling(&[(4.0, 2.0), (8.0, 2.0), (12.0, 2.0)]).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert_eq!(f.classification, Classification::P1);
    }

    #[test]
    fn scattered_growth_is_indeterminate() {
        let f = fit_scaling(&[(4.0, 1.0), (6.0, 9.0), (8.0, 2.0), (10.0, 8.0)]).unwrap();
        assert_eq!(f.classification, Classification::Indeterminate);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (1.0, 2.0), (3.0, 2.0)]).is_err());
    }

    #[test]
    fn selectors_parse() {
        assert_eq!("R/3".parse::<GroverSelector>().unwrap(), GroverSelector::Fraction(3));
        assert_eq!("psi_R/2".parse::<GroverSelector>().unwrap(), GroverSelector::Fraction(2));
        assert_eq!("final".parse::<GroverSelector>().unwrap(), GroverSelector::Final);
        assert!("R/0".parse::<GroverSelector>().is_err());
        assert_eq!(GroverSelector::Fraction(2).iteration(25), Some(13));
        assert_eq!("mid-dft".parse::<ShorSelector>().unwrap(), ShorSelector::MidDft);
        for s in ShorSelector::ALL {
            assert_eq!(s.to_string().parse::<ShorSelector>().unwrap(), s);
        }
    }

    #[test]
    fn points_csv_round_trip() {
        let pts = vec![
            SweepPoint { selector: "ME".into(), size: 15, e_max: 5.0 },
            SweepPoint { selector: "ME".into(), size: 18, e_max: 6.123456 },
        ];
        let mut buf = Vec::new();
        write_points_csv(&pts, &[("r".into(), "6".into())], &mut buf).unwrap();
        let back = read_points_csv(&buf[..]).unwrap();
        assert_eq!(back, pts);
        assert!(read_points_csv(&b"a,b\n"[..]).is_err());
    }

    #[test]
    fn initial_grover_states_are_flat() {
        let pts = sweep_grover(&[4, 6, 8], GroverFamily::Solutions { m: 1, seed: Some(3) }, &[GroverSelector::Initial], false)
            .unwrap();
        for p in &pts {
            assert!((p.e_max - 2.0).abs() < 1e-9);
        }
    }
}
