//! The agreement-matrix Markov chain: transition kernel, thinned sampling
//! and chain distances.
//!
//! A kernel step picks one (X record, variable) uniformly at random, flips
//! the matched-pair cell's value to `1 - value` with probability `p1` (when
//! it agrees) or `p2` (when it does not), then propagates to the row's
//! non-match cells: after an agree -> disagree move every agreeing cell is
//! forced to flip and disagreeing ones flip with probability `q1`; after
//! disagree -> agree the same with `q2`; while the matched cell stays
//! disagreeing, disagreeing cells flip with probability `q3`. Missing cells
//! are never touched, and a step that selects a missing (or absent)
//! matched-pair cell ends with no change.
//!
//! Every cell only ever holds its initial value or its complement. The state
//! keeps both precomputed per cell and toggles a flip bit, so repeated flips
//! cannot drift numerically and distances reduce to bit counts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::comparison::{agrees, Threshold};
use crate::datamodel::{AgreementMatrix, MatrixMode, TransitionParams, MISSING};
use crate::{Error, Result};

/// Chain run settings: `n_samples` retained states, one every `thinning`
/// kernel steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_samples: usize,
    pub thinning: usize,
    pub seed: u64,
    pub mode: MatrixMode,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.thinning < 1 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        Ok(())
    }
}

/// One retained chain state: the matrix after `index * thinning` steps and
/// its distance to the first retained sample.
#[derive(Debug, Clone)]
pub struct ChainSample {
    /// 1-based sample index.
    pub index: usize,
    pub matrix: AgreementMatrix,
    pub distance: f64,
}

/// What one kernel step did to the matched-pair cell, for audit and
/// invariant checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub x: usize,
    pub var: usize,
    /// Agreement status (before, after) of the matched-pair cell; `None`
    /// when the step ended with no change because the cell was missing or
    /// the selected row has no matched pair in this block.
    pub diag: Option<(bool, bool)>,
}

/// Mutable chain state over one agreement matrix.
#[derive(Debug, Clone)]
pub struct ChainState {
    n_x: usize,
    n_y: usize,
    n_vars: usize,
    n_matched: usize,
    mode: MatrixMode,
    base: Vec<f64>,
    /// Complement value per cell, computed once.
    alt: Vec<f64>,
    missing: Vec<bool>,
    /// False for missing cells and for values exactly 0.5, whose complement
    /// is the value itself.
    flippable: Vec<bool>,
    status_base: Vec<bool>,
    status_alt: Vec<bool>,
    flip: Vec<bool>,
}

impl ChainState {
    pub fn new(matrix: &AgreementMatrix, theta: &Threshold) -> Result<Self> {
        if theta.len() != matrix.n_vars() {
            return Err(Error::DimensionMismatch(format!(
                "{} thresholds for {} variables",
                theta.len(),
                matrix.n_vars()
            )));
        }
        for (l, &th) in theta.values().iter().enumerate() {
            if !(th > 0.5 && th <= 1.0) {
                return Err(Error::Config(format!(
                    "variable {l}: kernel requires theta in (0.5, 1], got {th}"
                )));
            }
        }
        let n = matrix.n_cells();
        let mut base = Vec::with_capacity(n);
        let mut alt = Vec::with_capacity(n);
        let mut missing = Vec::with_capacity(n);
        let mut flippable = Vec::with_capacity(n);
        let mut status_base = Vec::with_capacity(n);
        let mut status_alt = Vec::with_capacity(n);
        let n_vars = matrix.n_vars();
        for (idx, &v) in matrix.cells().iter().enumerate() {
            let th = theta.var(idx % n_vars);
            if v == MISSING {
                base.push(MISSING);
                alt.push(MISSING);
                missing.push(true);
                flippable.push(false);
                status_base.push(false);
                status_alt.push(false);
            } else {
                let flipped = 1.0 - v;
                base.push(v);
                alt.push(flipped);
                missing.push(false);
                flippable.push(v != flipped);
                status_base.push(agrees(v, th));
                status_alt.push(agrees(flipped, th));
            }
        }
        Ok(ChainState {
            n_x: matrix.n_x(),
            n_y: matrix.n_y(),
            n_vars,
            n_matched: matrix.n_matched(),
            mode: matrix.mode(),
            base,
            alt,
            missing,
            flippable,
            status_base,
            status_alt,
            flip: vec![false; n],
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_matched(&self) -> usize {
        self.n_matched
    }

    pub fn n_cells(&self) -> usize {
        self.base.len()
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n_y + j) * self.n_vars + l
    }

    #[inline]
    pub fn is_missing(&self, i: usize, j: usize, l: usize) -> bool {
        self.missing[self.idx(i, j, l)]
    }

    /// Current value of a non-missing cell.
    pub fn value(&self, i: usize, j: usize, l: usize) -> Option<f64> {
        let c = self.idx(i, j, l);
        if self.missing[c] {
            None
        } else if self.flip[c] {
            Some(self.alt[c])
        } else {
            Some(self.base[c])
        }
    }

    /// Current agreement status of a non-missing cell.
    #[inline]
    pub fn status(&self, i: usize, j: usize, l: usize) -> Option<bool> {
        let c = self.idx(i, j, l);
        if self.missing[c] {
            None
        } else {
            Some(self.status_at(c))
        }
    }

    #[inline]
    fn status_at(&self, c: usize) -> bool {
        if self.flip[c] {
            self.status_alt[c]
        } else {
            self.status_base[c]
        }
    }

    #[inline]
    fn toggle(&mut self, c: usize) {
        if self.flippable[c] {
            self.flip[c] = !self.flip[c];
        }
    }

    /// Apply one kernel step.
    pub fn step<R: Rng>(&mut self, params: &TransitionParams, rng: &mut R) -> StepInfo {
        let i = rng.random_range(0..self.n_x);
        let l = rng.random_range(0..self.n_vars);
        let info_skip = StepInfo { x: i, var: l, diag: None };

        if i >= self.n_matched {
            // No matched-pair cell for this row in the block.
            return info_skip;
        }
        let d = self.idx(i, i, l);
        if self.missing[d] {
            return info_skip;
        }
        let t = params.var(l);
        let was = self.status_at(d);
        let flip_prob = if was { t.p1 } else { t.p2 };
        if rng.random_bool(flip_prob) {
            self.toggle(d);
        }
        let now = self.status_at(d);

        match (was, now) {
            (true, true) => {}
            (true, false) | (false, true) => {
                let q = if was { t.q1 } else { t.q2 };
                for j in 0..self.n_y {
                    if j == i {
                        continue;
                    }
                    let c = self.idx(i, j, l);
                    if self.missing[c] {
                        continue;
                    }
                    if self.status_at(c) {
                        // The record's value changed, so pairs that agreed
                        // with the old value cannot agree any more.
                        self.toggle(c);
                    } else if rng.random_bool(q) {
                        self.toggle(c);
                    }
                }
            }
            (false, false) => {
                for j in 0..self.n_y {
                    if j == i {
                        continue;
                    }
                    let c = self.idx(i, j, l);
                    if !self.missing[c] && !self.status_at(c) && rng.random_bool(t.q3) {
                        self.toggle(c);
                    }
                }
            }
        }
        StepInfo { x: i, var: l, diag: Some((was, now)) }
    }

    /// Snapshot the current values as a plain matrix.
    pub fn materialize(&self) -> AgreementMatrix {
        let cells: Vec<f64> = (0..self.base.len())
            .map(|c| if self.flip[c] { self.alt[c] } else { self.base[c] })
            .collect();
        AgreementMatrix::new(self.n_x, self.n_y, self.n_vars, self.n_matched, self.mode, cells)
            .expect("chain state stays within the value domain")
    }

    /// Flip bits relative to the initial matrix (true = value changed).
    pub fn flip_bits(&self) -> &[bool] {
        &self.flip
    }

    /// Fraction of cells whose value differs from the initial matrix.
    pub fn distance_to_start(&self) -> f64 {
        let changed = self.flip.iter().filter(|&&f| f).count();
        changed as f64 / self.flip.len() as f64
    }

    /// Fraction of cells whose value differs from a reference flip pattern
    /// taken from the same chain.
    pub fn distance_to_flips(&self, reference: &[bool]) -> Result<f64> {
        if reference.len() != self.flip.len() {
            return Err(Error::DimensionMismatch(
                "flip pattern comes from a different matrix".into(),
            ));
        }
        let changed = self
            .flip
            .iter()
            .zip(reference)
            .filter(|(a, b)| a != b)
            .count();
        Ok(changed as f64 / self.flip.len() as f64)
    }
}

/// The reproducible generator used for every chain. Eight ChaCha rounds are
/// plenty for simulation use and keep stepping cheap.
pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

/// Apply one kernel step to a matrix, drawing from `rng`.
pub fn kernel_step<R: Rng>(
    state: &AgreementMatrix,
    params: &TransitionParams,
    theta: &Threshold,
    rng: &mut R,
) -> Result<AgreementMatrix> {
    let mut chain = ChainState::new(state, theta)?;
    chain.step(params, rng);
    Ok(chain.materialize())
}

/// Run the chain for `n_samples * thinning` steps, visiting the state at
/// every `thinning`-step boundary. `visit` receives the 1-based sample index.
pub fn run_thinned<F>(
    initial: &AgreementMatrix,
    params: &TransitionParams,
    theta: &Threshold,
    cfg: &ChainConfig,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &ChainState) -> Result<()>,
{
    cfg.validate()?;
    if params.len() != initial.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "{} transition parameters for {} variables",
            params.len(),
            initial.n_vars()
        )));
    }
    let mut state = ChainState::new(initial, theta)?;
    let mut rng = chain_rng(cfg.seed);
    for s in 1..=cfg.n_samples {
        for _ in 0..cfg.thinning {
            state.step(params, &mut rng);
        }
        visit(s, &state)?;
    }
    Ok(())
}

/// Collect the thinned samples. Sample `s` is the state after `s * thinning`
/// steps; each sample's distance is measured against sample 1.
pub fn simulate_chain(
    initial: &AgreementMatrix,
    params: &TransitionParams,
    theta: &Threshold,
    cfg: &ChainConfig,
) -> Result<Vec<ChainSample>> {
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut reference: Option<Vec<bool>> = None;
    run_thinned(initial, params, theta, cfg, |s, state| {
        let reference = reference.get_or_insert_with(|| state.flip_bits().to_vec());
        samples.push(ChainSample {
            index: s,
            matrix: state.materialize(),
            distance: state.distance_to_flips(reference)?,
        });
        Ok(())
    })?;
    Ok(samples)
}

/// Fraction of cells whose value differs between two same-shaped matrices.
/// Missing cells count as unchanged only when missing on both sides.
pub fn distance(sample: &AgreementMatrix, reference: &AgreementMatrix) -> Result<f64> {
    if sample.n_x() != reference.n_x()
        || sample.n_y() != reference.n_y()
        || sample.n_vars() != reference.n_vars()
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            sample.n_x(),
            sample.n_y(),
            sample.n_vars(),
            reference.n_x(),
            reference.n_y(),
            reference.n_vars()
        )));
    }
    let changed = sample
        .cells()
        .iter()
        .zip(reference.cells())
        .filter(|(a, b)| a != b)
        .count();
    Ok(changed as f64 / sample.n_cells() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Mug, MugProfile, Transition};
    use crate::estimation::transition_params;

    fn params1(p1: f64, p2: f64, q1: f64, q2: f64) -> TransitionParams {
        TransitionParams::new(vec![Transition { p1, p2, q1, q2, q3: 1.0 }]).unwrap()
    }

    fn theta1(th: f64) -> Threshold {
        let specs = vec![crate::datamodel::VariableSpec::new("V", 1.0, 1.0 - th).unwrap()];
        Threshold::from_specs(&specs).unwrap()
    }

    #[test]
    fn forced_flip_cascades_to_agreeing_cell() {
        // Single X record and variable, so the step selection is forced.
        let m = AgreementMatrix::new(
            1,
            2,
            1,
            1,
            MatrixMode::Extended,
            vec![1.0, 0.99],
        )
        .unwrap();
        let theta = theta1(0.98);
        let params = params1(1.0, 0.0, 0.0, 0.0);
        let mut rng = chain_rng(7);
        let next = kernel_step(&m, &params, &theta, &mut rng).unwrap();
        assert_eq!(next.get(0, 0, 0), Some(0.0));
        assert_eq!(next.get(0, 1, 0), Some(1.0 - 0.99));
    }

    #[test]
    fn frozen_chain_with_agreeing_diagonal() {
        // p1 = p2 = 0 and an agreeing matched cell: nothing can move.
        let m = AgreementMatrix::new(
            2,
            2,
            1,
            2,
            MatrixMode::Extended,
            vec![1.0, 0.99, 0.2, 1.0],
        )
        .unwrap();
        let theta = theta1(0.98);
        let params = params1(0.0, 0.0, 1.0, 1.0);
        let cfg = ChainConfig {
            n_samples: 5,
            thinning: 3,
            seed: 11,
            mode: MatrixMode::Extended,
        };
        let samples = simulate_chain(&m, &params, &theta, &cfg).unwrap();
        for s in &samples {
            assert_eq!(s.matrix, m);
            assert_eq!(s.distance, 0.0);
        }
    }

    #[test]
    fn missing_diagonal_skips_the_step() {
        let m = AgreementMatrix::new(
            1,
            2,
            1,
            1,
            MatrixMode::Extended,
            vec![crate::datamodel::MISSING, 0.99],
        )
        .unwrap();
        let theta = theta1(0.98);
        let params = params1(1.0, 1.0, 1.0, 1.0);
        let mut state = ChainState::new(&m, &theta).unwrap();
        let mut rng = chain_rng(3);
        for _ in 0..50 {
            let info = state.step(&params, &mut rng);
            assert_eq!(info.diag, None);
        }
        assert_eq!(state.materialize(), m);
    }

    #[test]
    fn row_without_matched_pair_is_left_alone() {
        let m = AgreementMatrix::new(2, 2, 1, 1, MatrixMode::Extended, vec![1.0, 0.99, 0.7, 0.2])
            .unwrap();
        let theta = theta1(0.98);
        let params = params1(1.0, 1.0, 1.0, 1.0);
        let mut state = ChainState::new(&m, &theta).unwrap();
        let mut rng = chain_rng(5);
        for _ in 0..200 {
            let info = state.step(&params, &mut rng);
            if info.x == 1 {
                assert_eq!(info.diag, None);
            }
        }
        // row 1 never changes
        assert_eq!(state.value(1, 0, 0), Some(0.7));
        assert_eq!(state.value(1, 1, 0), Some(0.2));
    }

    #[test]
    fn sample_counting_contract() {
        // S = 3, d = 2 consumes exactly 6 kernel steps, snapshots at 2, 4, 6.
        let m = AgreementMatrix::new(
            3,
            3,
            2,
            3,
            MatrixMode::Extended,
            vec![1.0, 0.0, 0.3, 1.0, 0.99, 0.1, 0.2, 1.0, 0.98, 0.0, 1.0, 1.0, 0.5, 0.97, 1.0, 0.6, 0.0, 1.0],
        )
        .unwrap();
        let theta = Threshold::from_values(vec![0.9, 0.9]);
        let mug = MugProfile::new(vec![
            Mug { m: 0.8, u: 0.3, g: 0.0 },
            Mug { m: 0.7, u: 0.2, g: 0.0 },
        ])
        .unwrap();
        let params = transition_params(&mug).unwrap();
        let cfg = ChainConfig { n_samples: 3, thinning: 2, seed: 99, mode: MatrixMode::Extended };
        let samples = simulate_chain(&m, &params, &theta, &cfg).unwrap();
        assert_eq!(samples.len(), 3);

        // replay manually with the same seed
        let mut state = ChainState::new(&m, &theta).unwrap();
        let mut rng = chain_rng(99);
        let mut manual = Vec::new();
        for step in 1..=6 {
            state.step(&params, &mut rng);
            if step % 2 == 0 {
                manual.push(state.materialize());
            }
        }
        for (got, want) in samples.iter().zip(&manual) {
            assert_eq!(&got.matrix, want);
        }
    }

    #[test]
    fn same_seed_reproduces_samples() {
        let m = AgreementMatrix::filled(4, 5, 2, MatrixMode::Extended, 1.0);
        let theta = Threshold::exact(2);
        let mug = MugProfile::new(vec![Mug { m: 0.8, u: 0.2, g: 0.0 }; 2]).unwrap();
        let params = transition_params(&mug).unwrap();
        let cfg = ChainConfig { n_samples: 4, thinning: 5, seed: 123, mode: MatrixMode::Extended };
        let a = simulate_chain(&m, &params, &theta, &cfg).unwrap();
        let b = simulate_chain(&m, &params, &theta, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.matrix, y.matrix);
            assert_eq!(x.distance, y.distance);
        }
    }

    #[test]
    fn distance_counts_changed_cells() {
        let a = AgreementMatrix::new(2, 2, 2, 2, MatrixMode::Extended, vec![1.0; 8]).unwrap();
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
        let b = AgreementMatrix::new(2, 2, 2, 2, MatrixMode::Extended, vec![0.0; 8]).unwrap();
        assert_eq!(distance(&b, &a).unwrap(), 1.0);
        let mut c = a.clone();
        c.set(0, 1, 1, 0.0);
        assert_eq!(distance(&c, &a).unwrap(), 0.125);
    }

    #[test]
    fn distance_requires_same_dims() {
        let a = AgreementMatrix::filled(2, 2, 2, MatrixMode::Extended, 1.0);
        let b = AgreementMatrix::filled(2, 3, 2, MatrixMode::Extended, 1.0);
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn kernel_requires_theta_above_half() {
        let m = AgreementMatrix::filled(1, 1, 1, MatrixMode::Extended, 1.0);
        let specs = vec![crate::datamodel::VariableSpec::new("V", 1.0, 0.49).unwrap()];
        let theta = Threshold::from_specs(&specs).unwrap();
        assert!((theta.var(0) - 0.51).abs() < 1e-12);
        assert!(ChainState::new(&m, &theta).is_ok());
        // a raw threshold at 0.5 is rejected
        assert!(ChainState::new(&m, &Threshold::from_values(vec![0.5])).is_err());
    }

    #[test]
    fn half_valued_cells_never_count_as_changed() {
        // 0.5 flips to itself; the distance must stay 0 for such cells.
        let m = AgreementMatrix::new(1, 2, 1, 1, MatrixMode::Extended, vec![0.5, 0.5]).unwrap();
        let theta = theta1(0.9);
        let params = params1(1.0, 1.0, 1.0, 1.0);
        let mut state = ChainState::new(&m, &theta).unwrap();
        let mut rng = chain_rng(17);
        for _ in 0..100 {
            state.step(&params, &mut rng);
        }
        assert_eq!(state.distance_to_start(), 0.0);
        assert_eq!(state.materialize(), m);
    }
}
