//! Synthetic population generator: a large file Y of numeric-coded person
//! records, a uniform subsample X, and a perturbation pass that plants
//! realistic errors into X at configurable rates.
//!
//! Fields (all numeric codes): SA1 (area), MB (meshblock, carrying its SA1
//! as a numeric prefix), BDAY (day of year), BYEAR, SEX, EYE, COB (country
//! code grouped into two-digit regions, with one majority code).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{AlignedPair, Record, RecordTable, VariableSpec};
use crate::simulator::chain_rng;
use crate::{Error, Result};

/// Canonical field order of generated tables.
pub const FIELDS: [&str; 7] = ["SA1", "MB", "BDAY", "BYEAR", "SEX", "EYE", "COB"];

const SA1: usize = 0;
const MB: usize = 1;
const BDAY: usize = 2;
const BYEAR: usize = 3;
const SEX: usize = 4;
const EYE: usize = 5;
const COB: usize = 6;

/// Error rates of the perturbation pass. Rates apply per record,
/// independently, so realized counts are binomial; the defaults reproduce
/// the reference recipe (its absolute counts at a 50,000-record subsample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationPlan {
    /// SA1 moved to an adjacent area, MB prefix updated along.
    pub sa1_adjacent_rate: f64,
    /// MB replaced by another meshblock of the same SA1.
    pub mb_within_sa1_rate: f64,
    pub bday_missing_rate: f64,
    /// BDAY redrawn to a different day of year.
    pub bday_altered_rate: f64,
    pub byear_minus2_rate: f64,
    pub byear_plus2_rate: f64,
    pub byear_minus1_rate: f64,
    pub byear_plus1_rate: f64,
    pub sex_flip_rate: f64,
    pub eye_missing_rate: f64,
    /// EYE replaced by a different valid category.
    pub eye_replace_rate: f64,
    /// Fraction of majority-coded records whose COB goes missing.
    pub cob_missing_majority_rate: f64,
    /// Fraction of other-coded records whose COB goes missing.
    pub cob_missing_other_rate: f64,
    /// Fraction of other-coded records recoded; of those, a
    /// `cob_recode_majority_share` fraction becomes the majority code, the
    /// rest another country of the same two-digit region.
    pub cob_recode_rate: f64,
    pub cob_recode_majority_share: f64,
}

impl Default for PerturbationPlan {
    fn default() -> Self {
        PerturbationPlan {
            sa1_adjacent_rate: 0.01,
            mb_within_sa1_rate: 0.03,
            bday_missing_rate: 0.08,
            bday_altered_rate: 0.01,
            byear_minus2_rate: 0.001,
            byear_plus2_rate: 0.001,
            byear_minus1_rate: 0.024,
            byear_plus1_rate: 0.024,
            sex_flip_rate: 0.001,
            eye_missing_rate: 0.10,
            eye_replace_rate: 0.10,
            cob_missing_majority_rate: 0.02,
            cob_missing_other_rate: 0.02,
            cob_recode_rate: 0.02,
            cob_recode_majority_share: 0.5,
        }
    }
}

impl PerturbationPlan {
    /// All rates are unchanged when no perturbation is wanted.
    pub fn none() -> Self {
        PerturbationPlan {
            sa1_adjacent_rate: 0.0,
            mb_within_sa1_rate: 0.0,
            bday_missing_rate: 0.0,
            bday_altered_rate: 0.0,
            byear_minus2_rate: 0.0,
            byear_plus2_rate: 0.0,
            byear_minus1_rate: 0.0,
            byear_plus1_rate: 0.0,
            sex_flip_rate: 0.0,
            eye_missing_rate: 0.0,
            eye_replace_rate: 0.0,
            cob_missing_majority_rate: 0.0,
            cob_missing_other_rate: 0.0,
            cob_recode_rate: 0.0,
            cob_recode_majority_share: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            ("sa1_adjacent_rate", self.sa1_adjacent_rate),
            ("mb_within_sa1_rate", self.mb_within_sa1_rate),
            ("bday_missing_rate", self.bday_missing_rate),
            ("bday_altered_rate", self.bday_altered_rate),
            ("byear_minus2_rate", self.byear_minus2_rate),
            ("byear_plus2_rate", self.byear_plus2_rate),
            ("byear_minus1_rate", self.byear_minus1_rate),
            ("byear_plus1_rate", self.byear_plus1_rate),
            ("sex_flip_rate", self.sex_flip_rate),
            ("eye_missing_rate", self.eye_missing_rate),
            ("eye_replace_rate", self.eye_replace_rate),
            ("cob_missing_majority_rate", self.cob_missing_majority_rate),
            ("cob_missing_other_rate", self.cob_missing_other_rate),
            ("cob_recode_rate", self.cob_recode_rate),
            ("cob_recode_majority_share", self.cob_recode_majority_share),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} = {r} is not in [0, 1]")));
            }
        }
        let sums = [
            ("sa1_adjacent_rate + mb_within_sa1_rate", self.sa1_adjacent_rate + self.mb_within_sa1_rate),
            ("bday_missing_rate + bday_altered_rate", self.bday_missing_rate + self.bday_altered_rate),
            (
                "byear shift rates",
                self.byear_minus2_rate + self.byear_plus2_rate + self.byear_minus1_rate + self.byear_plus1_rate,
            ),
            ("eye_missing_rate + eye_replace_rate", self.eye_missing_rate + self.eye_replace_rate),
            ("cob_missing_other_rate + cob_recode_rate", self.cob_missing_other_rate + self.cob_recode_rate),
        ];
        for (name, s) in sums {
            if s > 1.0 {
                return Err(Error::Config(format!("{name} = {s} exceeds 1")));
            }
        }
        Ok(())
    }
}

/// Value spaces of the generated population plus the perturbation plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_y: usize,
    pub n_x: usize,
    pub seed: u64,
    pub sa1_count: u64,
    pub mb_per_sa1: u64,
    /// MB = SA1 * mb_code_factor + within-SA1 index; the factor fixes the
    /// numeric width of the within-SA1 part.
    pub mb_code_factor: u64,
    pub bday_days: u64,
    pub byear_min: i64,
    pub byear_max: i64,
    pub eye_values: u64,
    pub cob_majority_code: u64,
    pub cob_majority_share: f64,
    /// Two-digit regions counted up from the majority code's region.
    pub cob_region_count: u64,
    pub cob_codes_per_region: u64,
    pub plan: PerturbationPlan,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_y: 2000,
            n_x: 500,
            seed: 1,
            sa1_count: 50,
            mb_per_sa1: 20,
            mb_code_factor: 1000,
            bday_days: 365,
            byear_min: 1920,
            byear_max: 2000,
            eye_values: 5,
            cob_majority_code: 1101,
            cob_majority_share: 0.75,
            cob_region_count: 12,
            cob_codes_per_region: 25,
            plan: PerturbationPlan::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_x > self.n_y {
            return Err(Error::Config(format!(
                "n_x = {} exceeds n_y = {}",
                self.n_x, self.n_y
            )));
        }
        if self.sa1_count < 2 {
            return Err(Error::Config("sa1_count must be at least 2".into()));
        }
        if self.mb_per_sa1 < 1 || self.mb_per_sa1 >= self.mb_code_factor {
            return Err(Error::Config(
                "mb_per_sa1 must be at least 1 and below mb_code_factor".into(),
            ));
        }
        if self.bday_days < 2 {
            return Err(Error::Config("bday_days must be at least 2".into()));
        }
        if self.byear_max <= self.byear_min {
            return Err(Error::Config("byear_max must exceed byear_min".into()));
        }
        if self.eye_values < 2 {
            return Err(Error::Config("eye_values must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.cob_majority_share) {
            return Err(Error::Config("cob_majority_share must be in [0, 1]".into()));
        }
        if self.cob_region_count < 1 || self.cob_codes_per_region < 1 {
            return Err(Error::Config("COB code list must not be empty".into()));
        }
        if self.other_cob_codes().is_empty() {
            return Err(Error::Config(
                "COB code list has no codes besides the majority code".into(),
            ));
        }
        self.plan.validate()?;
        // plan vs value spaces
        if self.plan.mb_within_sa1_rate > 0.0 && self.mb_per_sa1 < 2 {
            return Err(Error::Config(
                "mb_within_sa1_rate needs at least 2 meshblocks per SA1".into(),
            ));
        }
        if self.plan.cob_recode_rate > 0.0 && self.cob_codes_per_region < 2 {
            return Err(Error::Config(
                "cob_recode_rate needs at least 2 codes per region".into(),
            ));
        }
        Ok(())
    }

    fn majority_region(&self) -> u64 {
        self.cob_majority_code / 100
    }

    /// Country codes other than the majority code, grouped by the two
    /// leading digits.
    pub fn other_cob_codes(&self) -> Vec<u64> {
        let mut codes = Vec::new();
        for r in 0..self.cob_region_count {
            let region = self.majority_region() + r;
            for c in 1..=self.cob_codes_per_region {
                let code = region * 100 + c;
                if code != self.cob_majority_code {
                    codes.push(code);
                }
            }
        }
        codes
    }

    /// Variable specs matching the generated value spaces, zero tolerance
    /// everywhere and SA1 flagged for blocking. Callers adjust tolerances.
    pub fn variable_specs(&self) -> Vec<VariableSpec> {
        let mb_min = self.mb_code_factor + 1;
        let mb_max = self.sa1_count * self.mb_code_factor + self.mb_per_sa1;
        let cob_min = (self.majority_region() * 100 + 1).min(self.cob_majority_code);
        let cob_max = (self.majority_region() + self.cob_region_count - 1) * 100
            + self.cob_codes_per_region;
        let mut specs = vec![
            VariableSpec::new("SA1", (self.sa1_count - 1).max(1) as f64, 0.0).unwrap(),
            VariableSpec::new("MB", (mb_max - mb_min) as f64, 0.0).unwrap(),
            VariableSpec::new("BDAY", (self.bday_days - 1) as f64, 0.0).unwrap(),
            VariableSpec::new("BYEAR", (self.byear_max - self.byear_min) as f64, 0.0).unwrap(),
            VariableSpec::new("SEX", 1.0, 0.0).unwrap(),
            VariableSpec::new("EYE", (self.eye_values - 1) as f64, 0.0).unwrap(),
            VariableSpec::new("COB", (cob_max - cob_min) as f64, 0.0).unwrap(),
        ];
        specs[SA1].blocking = true;
        specs
    }
}

/// Counts of perturbations actually applied, for plan-fidelity audits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PerturbationSummary {
    pub records: usize,
    pub sa1_adjacent: usize,
    pub mb_within_sa1: usize,
    pub bday_missing: usize,
    pub bday_altered: usize,
    pub byear_minus2: usize,
    pub byear_plus2: usize,
    pub byear_minus1: usize,
    pub byear_plus1: usize,
    pub sex_flipped: usize,
    pub eye_missing: usize,
    pub eye_replaced: usize,
    pub cob_missing_majority: usize,
    pub cob_missing_other: usize,
    pub cob_recoded_majority: usize,
    pub cob_recoded_region: usize,
    /// Majority/other-coded record counts, the denominators of the COB rates.
    pub majority_coded: usize,
    pub other_coded: usize,
}

/// Generate file Y: `n_y` records with unique RECIDs, every field drawn
/// independently except MB, which embeds its SA1 prefix.
pub fn generate_population(cfg: &GeneratorConfig) -> Result<RecordTable> {
    cfg.validate()?;
    let mut rng = chain_rng(cfg.seed);
    let other_codes = cfg.other_cob_codes();
    let mut records = Vec::with_capacity(cfg.n_y);
    for recid in 1..=cfg.n_y {
        let sa1 = rng.random_range(1..=cfg.sa1_count);
        let mb_idx = rng.random_range(1..=cfg.mb_per_sa1);
        let mb = sa1 * cfg.mb_code_factor + mb_idx;
        let bday = rng.random_range(1..=cfg.bday_days);
        let byear = rng.random_range(cfg.byear_min..=cfg.byear_max);
        let sex = rng.random_range(1..=2u64);
        let eye = rng.random_range(1..=cfg.eye_values);
        let cob = if rng.random_bool(cfg.cob_majority_share) {
            cfg.cob_majority_code
        } else {
            other_codes[rng.random_range(0..other_codes.len())]
        };
        records.push(Record {
            entity_id: recid.to_string(),
            values: vec![
                Some(sa1 as f64),
                Some(mb as f64),
                Some(bday as f64),
                Some(byear as f64),
                Some(sex as f64),
                Some(eye as f64),
                Some(cob as f64),
            ],
        });
    }
    RecordTable::new(FIELDS.iter().map(|s| s.to_string()).collect(), records)
}

/// Uniform subsample without replacement; the result pairs each X record
/// with its Y original by RECID.
pub fn subsample(population: &RecordTable, n_x: usize, seed: u64) -> Result<AlignedPair> {
    if n_x > population.len() {
        return Err(Error::Config(format!(
            "subsample of {n_x} requested from {} records",
            population.len()
        )));
    }
    let mut rng = chain_rng(seed);
    let chosen = rand::seq::index::sample(&mut rng, population.len(), n_x);
    let records: Vec<Record> = chosen
        .iter()
        .map(|i| population.records()[i].clone())
        .collect();
    let x = RecordTable::new(population.variables().to_vec(), records)?;
    AlignedPair::new(x, population.clone())
}

/// Apply the perturbation plan to a copy of X. Each record draws one
/// uniform per field; the field's rates partition the unit interval, so a
/// record receives at most one perturbation per field and realized counts
/// are binomial at the configured rates. RECIDs are never touched.
pub fn perturb(
    table: &RecordTable,
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<(RecordTable, PerturbationSummary)> {
    cfg.validate()?;
    if table.variables() != FIELDS {
        return Err(Error::Config(
            "perturb expects the generated SA1..COB field layout".into(),
        ));
    }
    let plan = &cfg.plan;
    let mut rng = chain_rng(seed);
    let mut summary = PerturbationSummary {
        records: table.len(),
        ..PerturbationSummary::default()
    };
    let other_codes = cfg.other_cob_codes();

    let mut records = table.records().to_vec();
    for rec in &mut records {
        // SA1 / MB (coupled: an SA1 move rewrites the MB prefix)
        let u = rng.random::<f64>();
        if u < plan.sa1_adjacent_rate {
            if let (Some(sa1), Some(mb)) = (rec.values[SA1], rec.values[MB]) {
                let sa1 = sa1 as u64;
                let new_sa1 = if sa1 <= 1 {
                    2
                } else if sa1 >= cfg.sa1_count {
                    cfg.sa1_count - 1
                } else if rng.random_bool(0.5) {
                    sa1 + 1
                } else {
                    sa1 - 1
                };
                let mb_idx = mb as u64 - sa1 * cfg.mb_code_factor;
                rec.values[SA1] = Some(new_sa1 as f64);
                rec.values[MB] = Some((new_sa1 * cfg.mb_code_factor + mb_idx) as f64);
                summary.sa1_adjacent += 1;
            }
        } else if u < plan.sa1_adjacent_rate + plan.mb_within_sa1_rate {
            if let (Some(sa1), Some(mb)) = (rec.values[SA1], rec.values[MB]) {
                let sa1 = sa1 as u64;
                let idx = mb as u64 - sa1 * cfg.mb_code_factor;
                let new_idx = draw_different(&mut rng, idx, cfg.mb_per_sa1);
                rec.values[MB] = Some((sa1 * cfg.mb_code_factor + new_idx) as f64);
                summary.mb_within_sa1 += 1;
            }
        }

        // BDAY
        let u = rng.random::<f64>();
        if u < plan.bday_missing_rate {
            rec.values[BDAY] = None;
            summary.bday_missing += 1;
        } else if u < plan.bday_missing_rate + plan.bday_altered_rate {
            if let Some(day) = rec.values[BDAY] {
                let new_day = draw_different(&mut rng, day as u64, cfg.bday_days);
                rec.values[BDAY] = Some(new_day as f64);
                summary.bday_altered += 1;
            }
        }

        // BYEAR
        let u = rng.random::<f64>();
        let r = [
            plan.byear_minus2_rate,
            plan.byear_plus2_rate,
            plan.byear_minus1_rate,
            plan.byear_plus1_rate,
        ];
        if let Some(year) = rec.values[BYEAR] {
            if u < r[0] {
                rec.values[BYEAR] = Some(year - 2.0);
                summary.byear_minus2 += 1;
            } else if u < r[0] + r[1] {
                rec.values[BYEAR] = Some(year + 2.0);
                summary.byear_plus2 += 1;
            } else if u < r[0] + r[1] + r[2] {
                rec.values[BYEAR] = Some(year - 1.0);
                summary.byear_minus1 += 1;
            } else if u < r[0] + r[1] + r[2] + r[3] {
                rec.values[BYEAR] = Some(year + 1.0);
                summary.byear_plus1 += 1;
            }
        }

        // SEX
        let u = rng.random::<f64>();
        if u < plan.sex_flip_rate {
            if let Some(sex) = rec.values[SEX] {
                rec.values[SEX] = Some(if sex == 1.0 { 2.0 } else { 1.0 });
                summary.sex_flipped += 1;
            }
        }

        // EYE
        let u = rng.random::<f64>();
        if u < plan.eye_missing_rate {
            rec.values[EYE] = None;
            summary.eye_missing += 1;
        } else if u < plan.eye_missing_rate + plan.eye_replace_rate {
            if let Some(eye) = rec.values[EYE] {
                let new_eye = draw_different(&mut rng, eye as u64, cfg.eye_values);
                rec.values[EYE] = Some(new_eye as f64);
                summary.eye_replaced += 1;
            }
        }

        // COB: rates are conditional on the current coding
        let u = rng.random::<f64>();
        if let Some(cob) = rec.values[COB] {
            let code = cob as u64;
            if code == cfg.cob_majority_code {
                summary.majority_coded += 1;
                if u < plan.cob_missing_majority_rate {
                    rec.values[COB] = None;
                    summary.cob_missing_majority += 1;
                }
            } else {
                summary.other_coded += 1;
                if u < plan.cob_missing_other_rate {
                    rec.values[COB] = None;
                    summary.cob_missing_other += 1;
                } else if u < plan.cob_missing_other_rate + plan.cob_recode_rate {
                    if rng.random_bool(plan.cob_recode_majority_share) {
                        rec.values[COB] = Some(cfg.cob_majority_code as f64);
                        summary.cob_recoded_majority += 1;
                    } else {
                        let region = code / 100;
                        let candidates: Vec<u64> = other_codes
                            .iter()
                            .copied()
                            .filter(|&c| c / 100 == region && c != code)
                            .collect();
                        if !candidates.is_empty() {
                            let pick = candidates[rng.random_range(0..candidates.len())];
                            rec.values[COB] = Some(pick as f64);
                            summary.cob_recoded_region += 1;
                        }
                    }
                }
            }
        }
    }

    let out = RecordTable::new(table.variables().to_vec(), records)?;
    Ok((out, summary))
}

/// Uniform draw from `1..=space` excluding `current`.
fn draw_different<R: Rng>(rng: &mut R, current: u64, space: u64) -> u64 {
    debug_assert!(space >= 2 && current >= 1 && current <= space);
    let v = rng.random_range(1..space);
    if v >= current {
        v + 1
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n_y: 300,
            n_x: 100,
            seed: 42,
            sa1_count: 5,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn population_has_unique_recids_and_mb_prefixes() {
        let cfg = small_cfg();
        let y = generate_population(&cfg).unwrap();
        assert_eq!(y.len(), 300);
        for rec in y.records() {
            let sa1 = rec.values[SA1].unwrap() as u64;
            let mb = rec.values[MB].unwrap() as u64;
            assert_eq!(mb / cfg.mb_code_factor, sa1);
        }
    }

    #[test]
    fn population_majority_share_is_binomial() {
        let mut cfg = small_cfg();
        cfg.n_y = 4000;
        let y = generate_population(&cfg).unwrap();
        let majority = y
            .records()
            .iter()
            .filter(|r| r.values[COB] == Some(cfg.cob_majority_code as f64))
            .count();
        let n = cfg.n_y as f64;
        let p = cfg.cob_majority_share;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!(
            (majority as f64 - n * p).abs() < 4.0 * sigma,
            "majority count {majority} too far from {}",
            n * p
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small_cfg();
        assert_eq!(generate_population(&cfg).unwrap(), generate_population(&cfg).unwrap());
    }

    #[test]
    fn subsample_contract() {
        let cfg = small_cfg();
        let y = generate_population(&cfg).unwrap();
        let pair = subsample(&y, 100, 7).unwrap();
        assert_eq!(pair.file_x.len(), 100);
        // every sampled RECID exists in Y exactly once
        for rec in pair.file_x.records() {
            let hits = y
                .records()
                .iter()
                .filter(|r| r.entity_id == rec.entity_id)
                .count();
            assert_eq!(hits, 1);
        }
        assert!(subsample(&y, 301, 7).is_err());
        // boundary: n_x == n_y is a permutation
        let full = subsample(&y, 300, 9).unwrap();
        assert_eq!(full.file_x.len(), 300);
        // single record
        let one = subsample(&y, 1, 11).unwrap();
        assert_eq!(one.file_x.len(), 1);
    }

    #[test]
    fn zero_plan_is_identity() {
        let mut cfg = small_cfg();
        cfg.plan = PerturbationPlan::none();
        let y = generate_population(&cfg).unwrap();
        let (px, summary) = perturb(&y, &cfg, 3).unwrap();
        assert_eq!(px, y);
        assert_eq!(summary.sa1_adjacent, 0);
        assert_eq!(summary.bday_missing, 0);
    }

    #[test]
    fn total_sex_flip_reverses_every_record() {
        let mut cfg = small_cfg();
        cfg.plan = PerturbationPlan::none();
        cfg.plan.sex_flip_rate = 1.0;
        let y = generate_population(&cfg).unwrap();
        let (px, summary) = perturb(&y, &cfg, 3).unwrap();
        assert_eq!(summary.sex_flipped, y.len());
        for (a, b) in y.records().iter().zip(px.records()) {
            let old = a.values[SEX].unwrap();
            let new = b.values[SEX].unwrap();
            assert_eq!(new, if old == 1.0 { 2.0 } else { 1.0 });
        }
    }

    #[test]
    fn recids_never_change_and_mb_prefix_follows_sa1() {
        let cfg = small_cfg();
        let y = generate_population(&cfg).unwrap();
        let (px, _) = perturb(&y, &cfg, 5).unwrap();
        for (a, b) in y.records().iter().zip(px.records()) {
            assert_eq!(a.entity_id, b.entity_id);
            let sa1 = b.values[SA1].unwrap() as u64;
            let mb = b.values[MB].unwrap() as u64;
            assert_eq!(mb / cfg.mb_code_factor, sa1);
        }
    }

    #[test]
    fn perturbation_counts_track_rates() {
        let mut cfg = small_cfg();
        cfg.n_y = 20_000;
        let y = generate_population(&cfg).unwrap();
        let (_, s) = perturb(&y, &cfg, 13).unwrap();
        let n = y.len() as f64;
        let within = |count: usize, p: f64, n: f64| {
            let sigma = (n * p * (1.0 - p)).sqrt();
            (count as f64 - n * p).abs() <= 4.0 * sigma
        };
        assert!(within(s.bday_missing, cfg.plan.bday_missing_rate, n));
        assert!(within(s.eye_missing, cfg.plan.eye_missing_rate, n));
        assert!(within(s.sa1_adjacent, cfg.plan.sa1_adjacent_rate, n));
        assert!(within(
            s.cob_missing_majority,
            cfg.plan.cob_missing_majority_rate,
            s.majority_coded as f64
        ));
    }

    #[test]
    fn incompatible_plan_is_rejected() {
        let mut cfg = small_cfg();
        cfg.mb_per_sa1 = 1;
        assert!(cfg.validate().is_err());
        cfg.mb_per_sa1 = 20;
        cfg.plan.bday_missing_rate = 0.9;
        cfg.plan.bday_altered_rate = 0.2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn variable_specs_cover_generated_values() {
        let cfg = small_cfg();
        let specs = cfg.variable_specs();
        assert_eq!(specs.len(), FIELDS.len());
        assert!(specs[SA1].blocking);
        let y = generate_population(&cfg).unwrap();
        for rec in y.records() {
            for (l, v) in rec.values.iter().enumerate() {
                let v = v.unwrap();
                assert!(v.is_finite());
                assert!(specs[l].t_range > 0.0);
            }
        }
    }
}
