//! Step-resolved `e_max` traces and their CSV form.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::statevec::StateVector;
use crate::vcm::{build_vcm, max_eigen, SpectralResult, VcmDiagnostics, DEFAULT_DEGENERACY_RTOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Init,
    Hadamard,
    Oracle,
    Phase,
    ModExp,
    Dft,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::Hadamard => "HT",
            Stage::Oracle => "oracle",
            Stage::Phase => "phase",
            Stage::ModExp => "ME",
            Stage::Dft => "DFT",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which steps of a run get a VCM analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceOptions {
    /// Analyse steps whose index is a multiple of `stride`.
    pub stride: usize,
    /// Restrict analysis to `first..=last` (inclusive) when set.
    pub window: Option<(usize, usize)>,
    /// Keep the full spectral result (eigenvalues and top operators).
    pub keep_spectra: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { stride: 1, window: None, keep_spectra: false }
    }
}

impl TraceOptions {
    pub fn with_stride(stride: usize) -> Self {
        TraceOptions { stride, ..Default::default() }
    }

    /// Only the recorded circuit, no analysis at all.
    pub fn states_only() -> Self {
        TraceOptions { stride: 1, window: Some((1, 0)), keep_spectra: false }
    }

    pub fn analyses(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride)
            && self.window.is_none_or(|(first, last)| (first..=last).contains(&step))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::domain("stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StepAnalysis {
    pub e_max: f64,
    pub degeneracy: usize,
    pub diagnostics: VcmDiagnostics,
    pub spectrum: Option<SpectralResult>,
}

impl StepAnalysis {
    pub fn of(state: &StateVector, keep_spectrum: bool) -> Result<Self> {
        let spec = max_eigen(&build_vcm(state), DEFAULT_DEGENERACY_RTOL)?;
        Ok(StepAnalysis {
            e_max: spec.e_max,
            degeneracy: spec.degeneracy,
            diagnostics: spec.diagnostics,
            spectrum: keep_spectrum.then_some(spec),
        })
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub stage: Stage,
    pub gate: String,
    pub analysis: Option<StepAnalysis>,
}

impl StepRecord {
    pub fn e_max(&self) -> Option<f64> {
        self.analysis.as_ref().map(|a| a.e_max)
    }
}

/// Measurement branch attached to a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// Exponent label `a` of the observed residue `x^a mod N`.
    pub label: u64,
    pub residue: u64,
    pub probability: f64,
}

#[derive(Clone, Debug, Default)]
pub struct StepTrace {
    pub metadata: Vec<(String, String)>,
    pub records: Vec<StepRecord>,
    pub branch: Option<Branch>,
}

impl StepTrace {
    /// Number of counted circuit steps (the init record is step 0).
    pub fn total_steps(&self) -> usize {
        self.records.last().map_or(0, |r| r.step)
    }

    pub fn count_stage(&self, stage: Stage) -> usize {
        self.records.iter().filter(|r| r.stage == stage).count()
    }

    /// `(step, e_max)` for every analysed step.
    pub fn e_max_series(&self) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.e_max().map(|e| (r.step, e)))
            .collect()
    }

    pub fn record(&self, step: usize) -> Option<&StepRecord> {
        self.records.get(step).filter(|r| r.step == step)
    }

    pub fn diagnostics(&self) -> impl Iterator<Item = &VcmDiagnostics> {
        self.records.iter().filter_map(|r| r.analysis.as_ref().map(|a| &a.diagnostics))
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub(crate) fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    /// `#`-prefixed metadata lines, then `step,stage,gate,e_max` rows for
    /// analysed steps (plus `branch,probability` for measurement branches).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# macroent {VERSION}")?;
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}={v}")?;
        }
        match &self.branch {
            Some(b) => {
                writeln!(w, "# branch residue={} probability={:.6}", b.residue, b.probability)?;
                writeln!(w, "step,stage,gate,e_max,branch,probability")?;
            }
            None => writeln!(w, "step,stage,gate,e_max")?,
        }
        for r in &self.records {
            let Some(e) = r.e_max() else { continue };
            write!(w, "{},{},{},{:.6}", r.step, r.stage, r.gate, e)?;
            if let Some(b) = &self.branch {
                write!(w, ",{},{:.6}", b.label, b.probability)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Accumulates records as a circuit runs.
pub(crate) struct Recorder<'a> {
    opts: &'a TraceOptions,
    pub(crate) trace: StepTrace,
    next_step: usize,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(opts: &'a TraceOptions, state: &StateVector) -> Result<Self> {
        opts.validate()?;
        let mut r = Recorder { opts, trace: StepTrace::default(), next_step: 0 };
        r.push(Stage::Init, "-".into(), state)?;
        Ok(r)
    }

    /// Continues numbering from an existing trace (measurement branches).
    pub(crate) fn resume(opts: &'a TraceOptions, trace: StepTrace) -> Self {
        let next_step = trace.total_steps() + 1;
        Recorder { opts, trace, next_step }
    }

    pub(crate) fn push(&mut self, stage: Stage, gate: String, state: &StateVector) -> Result<()> {
        let step = self.next_step;
        let analysis = if self.opts.analyses(step) {
            Some(StepAnalysis::of(state, self.opts.keep_spectra)?)
        } else {
            None
        };
        self.trace.records.push(StepRecord { step, stage, gate, analysis });
        self.next_step += 1;
        Ok(())
    }

    pub(crate) fn finish(self) -> StepTrace {
        self.trace
    }
}
