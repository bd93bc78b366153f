//! Compare simulated links against the observed links and report correct
//! re-link proportions per record and per simulation.

use std::io::Write;

use crate::comparison::Threshold;
use crate::datamodel::{AgreementMatrix, LinkSet, MugProfile};
use crate::linker::{composite_weights, greedy_link};
use crate::{Error, Result};

/// Correct re-link counts over the (record x simulation) grid.
///
/// Both accuracy views are stored as integer counts; the grand mean is the
/// shared total divided by `n_records * n_samples`, so averaging per record
/// and averaging per simulation give the bit-identical number.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    n_records: usize,
    n_samples: usize,
    per_record_correct: Vec<u32>,
    per_sim_correct: Vec<u32>,
    /// X records with no partner in the observed link set; such a record
    /// counts as correct in a simulation only when it is unlinked there too.
    pub observed_unlinked: usize,
    /// Links in the observed set, kept for block-level reporting.
    pub observed_links: usize,
}

impl AccuracyReport {
    pub fn n_records(&self) -> usize {
        self.n_records
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Fraction of simulations in which each X record re-linked to its
    /// observed partner.
    pub fn per_record(&self) -> Vec<f64> {
        self.per_record_correct
            .iter()
            .map(|&c| c as f64 / self.n_samples as f64)
            .collect()
    }

    /// Fraction of X records correctly re-linked in each simulation.
    pub fn per_simulation(&self) -> Vec<f64> {
        self.per_sim_correct
            .iter()
            .map(|&c| c as f64 / self.n_records as f64)
            .collect()
    }

    pub fn total_correct(&self) -> u64 {
        self.per_record_correct.iter().map(|&c| c as u64).sum()
    }

    fn cells(&self) -> u64 {
        self.n_records as u64 * self.n_samples as u64
    }

    pub fn mean_per_record(&self) -> f64 {
        self.total_correct() as f64 / self.cells() as f64
    }

    pub fn mean_per_simulation(&self) -> f64 {
        let total: u64 = self.per_sim_correct.iter().map(|&c| c as u64).sum();
        total as f64 / self.cells() as f64
    }

    pub fn grand_mean(&self) -> f64 {
        self.mean_per_record()
    }

    pub fn min_max_per_record(&self) -> (f64, f64) {
        min_max(&self.per_record())
    }

    pub fn min_max_per_simulation(&self) -> (f64, f64) {
        min_max(&self.per_simulation())
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// The observed links of a block: greedy linking over the composite weights
/// of its initial agreement matrix.
pub fn observed_links(
    initial: &AgreementMatrix,
    theta: &Threshold,
    mug: &MugProfile,
    cutoff: f64,
) -> Result<LinkSet> {
    greedy_link(&composite_weights(initial, theta, mug)?, cutoff)
}

/// Score every simulation against the observed links. Record `i` is correct
/// in sample `s` when its partner there equals its observed partner
/// (including both being unlinked).
pub fn relink_accuracy(observed: &LinkSet, simulated: &[LinkSet]) -> Result<AccuracyReport> {
    let n_records = observed.n_x();
    if n_records == 0 {
        return Err(Error::DimensionMismatch("observed link set is empty of records".into()));
    }
    if simulated.is_empty() {
        return Err(Error::DimensionMismatch("no simulated link sets".into()));
    }
    let n_samples = simulated.len();
    let mut per_record_correct = vec![0u32; n_records];
    let mut per_sim_correct = vec![0u32; n_samples];
    for (s, sim) in simulated.iter().enumerate() {
        if sim.n_x() != n_records {
            return Err(Error::DimensionMismatch(format!(
                "simulated sample {} covers {} X records, observed covers {}",
                s + 1,
                sim.n_x(),
                n_records
            )));
        }
        for i in 0..n_records {
            if sim.partner(i) == observed.partner(i) {
                per_record_correct[i] += 1;
                per_sim_correct[s] += 1;
            }
        }
    }
    Ok(AccuracyReport {
        n_records,
        n_samples,
        per_record_correct,
        per_sim_correct,
        observed_unlinked: observed.unlinked_x().len(),
        observed_links: observed.links().len(),
    })
}

/// Incremental accuracy accumulator for streamed simulations, producing the
/// same report as [`relink_accuracy`] without holding the link sets.
#[derive(Debug, Clone)]
pub struct AccuracyAccumulator {
    observed: LinkSet,
    per_record_correct: Vec<u32>,
    per_sim_correct: Vec<u32>,
}

impl AccuracyAccumulator {
    pub fn new(observed: LinkSet) -> Self {
        let n = observed.n_x();
        AccuracyAccumulator {
            observed,
            per_record_correct: vec![0; n],
            per_sim_correct: Vec::new(),
        }
    }

    pub fn observed(&self) -> &LinkSet {
        &self.observed
    }

    pub fn add_sample(&mut self, simulated: &LinkSet) -> Result<()> {
        if simulated.n_x() != self.observed.n_x() {
            return Err(Error::DimensionMismatch(
                "simulated link set covers a different X index set".into(),
            ));
        }
        let mut correct = 0u32;
        for i in 0..self.observed.n_x() {
            if simulated.partner(i) == self.observed.partner(i) {
                self.per_record_correct[i] += 1;
                correct += 1;
            }
        }
        self.per_sim_correct.push(correct);
        Ok(())
    }

    pub fn finish(self) -> Result<AccuracyReport> {
        if self.per_sim_correct.is_empty() {
            return Err(Error::DimensionMismatch("no simulated link sets".into()));
        }
        Ok(AccuracyReport {
            n_records: self.observed.n_x(),
            n_samples: self.per_sim_correct.len(),
            per_record_correct: self.per_record_correct,
            per_sim_correct: self.per_sim_correct,
            observed_unlinked: self.observed.unlinked_x().len(),
            observed_links: self.observed.links().len(),
        })
    }
}

/// Aggregate of the per-block reports: a record-count-weighted grand mean.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub grand_mean: f64,
    /// Indices of blocks excluded from the mean because they formed no
    /// observed links. If no block formed links, nothing is excluded and
    /// the mean rests purely on the unlinked-correct convention.
    pub excluded: Vec<usize>,
    pub total_records: usize,
}

/// Record-count-weighted grand mean across blocks. Blocks whose observed
/// link set is empty are excluded with a warning entry, unless every block
/// is link-free.
pub fn summarize(reports: &[AccuracyReport]) -> Result<Aggregate> {
    if reports.is_empty() {
        return Err(Error::Estimation("no block reports to summarize".into()));
    }
    let any_links = reports.iter().any(|r| r.observed_links > 0);
    let mut excluded = Vec::new();
    let mut correct: u64 = 0;
    let mut cells: u64 = 0;
    let mut total_records = 0;
    for (idx, r) in reports.iter().enumerate() {
        if any_links && r.observed_links == 0 {
            excluded.push(idx);
            continue;
        }
        correct += r.total_correct();
        cells += r.cells();
        total_records += r.n_records();
    }
    Ok(Aggregate {
        grand_mean: correct as f64 / cells as f64,
        excluded,
        total_records,
    })
}

/// per_record.csv rows: x_entity_id, proportion.
pub fn write_per_record_csv<W: Write>(
    report: &AccuracyReport,
    ids: &[String],
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["x_entity_id", "proportion"])?;
    for (id, p) in ids.iter().zip(report.per_record()) {
        wtr.write_record([id.clone(), format!("{p}")])?;
    }
    wtr.flush().map_err(Error::from)?;
    Ok(())
}

/// per_simulation.csv rows: sample_index, proportion.
pub fn write_per_simulation_csv<W: Write>(report: &AccuracyReport, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sample_index", "proportion"])?;
    for (s, p) in report.per_simulation().iter().enumerate() {
        wtr.write_record([format!("{}", s + 1), format!("{p}")])?;
    }
    wtr.flush().map_err(Error::from)?;
    Ok(())
}
