//! End-to-end orchestration: load or generate the file pair, partition into
//! blocks, run one chain per block, re-link every retained sample and write
//! the report CSVs.
//!
//! Blocks are independent workloads; they run through [`exec::map_mode`]
//! and each derives its chain seed from the master seed and its block key,
//! so results do not depend on scheduling. All rows are written in block
//! order, which makes runs byte-reproducible.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::assessment::{self, AccuracyAccumulator, AccuracyReport};
use crate::comparison::{
    block_partition, build_agreement_matrix, Block, Threshold,
};
use crate::config::RunConfig;
use crate::datamodel::{
    AgreementMatrix, AlignedPair, LinkSet, MatrixMode, MugProfile, RecordTable, VariableSpec,
};
use crate::estimation::{estimate_mug, smooth_profile, transition_params};
use crate::exec::{self, ExecMode};
use crate::linker::{field_weights, greedy_link, FieldWeights, WeightMatrix};
use crate::simulator::{run_thinned, ChainConfig, ChainState};
use crate::synthgen;
use crate::{Error, Result};

/// Inputs resolved to an aligned, canonicalized pair.
pub struct PreparedRun {
    pub pair: AlignedPair,
    pub specs: Vec<VariableSpec>,
    pub blocking: Vec<String>,
    pub external_mug: Option<MugProfile>,
}

/// Load the configured input files, or generate-subsample-perturb through
/// the synthgen section, and canonicalize the alignment.
pub fn prepare(cfg: &RunConfig) -> Result<PreparedRun> {
    let specs = cfg.effective_variables();
    if specs.is_empty() {
        return Err(Error::Config("no linking variables declared".into()));
    }
    let pair = match (&cfg.input, &cfg.synthgen) {
        (Some(input), None) => {
            let x = RecordTable::read_csv_path(&input.x, &specs)?;
            let y = RecordTable::read_csv_path(&input.y, &specs)?;
            AlignedPair::new(x, y)?
        }
        (None, Some(gen)) => synth_pair(gen)?,
        _ => return Err(Error::Config("config must declare exactly one input source".into())),
    };
    let external_mug = cfg.external_mug(&specs)?;
    Ok(PreparedRun {
        pair: pair.canonicalize(),
        specs,
        blocking: cfg.effective_blocking(),
        external_mug,
    })
}

/// Generate Y, subsample X and perturb it; the generator seed feeds three
/// derived streams so the stages stay independent.
fn synth_pair(gen: &synthgen::GeneratorConfig) -> Result<AlignedPair> {
    let population = synthgen::generate_population(gen)?;
    let pair = synthgen::subsample(&population, gen.n_x, exec::block_seed(gen.seed, &"subsample"))?;
    let (x, _) = synthgen::perturb(&pair.file_x, gen, exec::block_seed(gen.seed, &"perturb"))?;
    AlignedPair::new(x, population)
}

/// One resolved linking-method variant: its thresholds and cutoff.
#[derive(Debug, Clone)]
pub struct ResolvedVariant {
    pub name: String,
    pub theta: Threshold,
    pub cutoff: f64,
}

/// Thresholds for a tolerance assignment under a matrix mode. Original mode
/// always compares at exact agreement.
pub fn resolve_theta(
    specs: &[VariableSpec],
    overrides: Option<&BTreeMap<String, f64>>,
    mode: MatrixMode,
) -> Result<Threshold> {
    if mode == MatrixMode::Original {
        return Ok(Threshold::exact(specs.len()));
    }
    match overrides {
        None => Threshold::from_specs(specs),
        Some(tols) => {
            let mut adjusted = specs.to_vec();
            for spec in &mut adjusted {
                if let Some(&d) = tols.get(&spec.name) {
                    spec.tolerance = d;
                }
                spec.validate()?;
            }
            Threshold::from_specs(&adjusted)
        }
    }
}

struct BlockJob<'a> {
    pair: &'a AlignedPair,
    specs: &'a [VariableSpec],
    block: &'a Block,
    chain_theta: &'a Threshold,
    mode: MatrixMode,
    samples: usize,
    thinning: usize,
    master_seed: u64,
    external: Option<&'a MugProfile>,
    reestimate: bool,
    variants: &'a [ResolvedVariant],
    dump_dir: Option<&'a Path>,
}

struct BlockResult {
    key: String,
    n_x: usize,
    n_y: usize,
    n_matched: usize,
    mug_raw: MugProfile,
    /// One report and observed link set per variant, in variant order.
    reports: Vec<AccuracyReport>,
    observed: Vec<LinkSet>,
    /// Per sample: (distance to sample 1, distance to the initial matrix).
    distances: Vec<(f64, f64)>,
    x_ids: Vec<String>,
    y_ids: Vec<String>,
    snapshot_hash: u64,
}

enum BlockOutcome {
    Assessed(Box<BlockResult>),
    Skipped {
        key: String,
        n_x: usize,
        n_y: usize,
        reason: String,
    },
}

fn profile_at(
    a0: &AgreementMatrix,
    theta: &Threshold,
    external: Option<&MugProfile>,
) -> Result<(MugProfile, MugProfile)> {
    let n_offdiag = a0.n_x() * a0.n_y() - a0.n_matched();
    let raw = match external {
        Some(m) => m.clone(),
        None => estimate_mug(a0, theta)?,
    };
    let smoothed = smooth_profile(&raw, n_offdiag)?;
    Ok((raw, smoothed))
}

struct VariantRunner {
    theta: Threshold,
    cutoff: f64,
    fw: Vec<FieldWeights>,
    acc: AccuracyAccumulator,
    reestimate: bool,
}

impl VariantRunner {
    fn relink(&mut self, state: &ChainState, n_offdiag: usize) -> Result<()> {
        let weights = if self.reestimate {
            let raw = estimate_from_state(state, &self.theta)?;
            let smoothed = smooth_profile(&raw, n_offdiag)?;
            let fw = per_variable_weights(&smoothed)?;
            weights_from_state(state, &self.theta, &fw)
        } else {
            weights_from_state(state, &self.theta, &self.fw)
        };
        let links = greedy_link(&weights, self.cutoff)?;
        self.acc.add_sample(&links)
    }
}

fn per_variable_weights(mug: &MugProfile) -> Result<Vec<FieldWeights>> {
    (0..mug.len()).map(|l| field_weights(mug.var(l))).collect()
}

/// Composite weights straight off the chain state, without materializing a
/// matrix. Agreement is re-evaluated against the supplied thresholds, which
/// may differ from the chain's own.
fn weights_from_state(state: &ChainState, theta: &Threshold, fw: &[FieldWeights]) -> WeightMatrix {
    let (n_x, n_y, n_vars) = (state.n_x(), state.n_y(), state.n_vars());
    let mut weights = Vec::with_capacity(n_x * n_y);
    for i in 0..n_x {
        for j in 0..n_y {
            let mut w = 0.0;
            for (l, f) in fw.iter().enumerate().take(n_vars) {
                if let Some(v) = state.value(i, j, l) {
                    w += if v >= theta.var(l) { f.agree } else { f.disagree };
                }
            }
            weights.push(w);
        }
    }
    WeightMatrix::new(n_x, n_y, weights).expect("state dims are consistent")
}

/// m/u/g counts over the current chain state at arbitrary thresholds.
fn estimate_from_state(state: &ChainState, theta: &Threshold) -> Result<MugProfile> {
    let (n_x, n_y, n_vars) = (state.n_x(), state.n_y(), state.n_vars());
    let n_matched = state.n_matched();
    let total = n_x * n_y;
    let n_offdiag = total - n_matched;
    if n_matched == 0 || n_offdiag == 0 {
        return Err(Error::Estimation("degenerate block for re-estimation".into()));
    }
    let mut per_var = Vec::with_capacity(n_vars);
    for l in 0..n_vars {
        let th = theta.var(l);
        let (mut diag_agree, mut off_agree, mut missing) = (0usize, 0usize, 0usize);
        for i in 0..n_x {
            for j in 0..n_y {
                match state.value(i, j, l) {
                    None => missing += 1,
                    Some(v) => {
                        if v >= th {
                            if i == j && i < n_matched {
                                diag_agree += 1;
                            } else {
                                off_agree += 1;
                            }
                        }
                    }
                }
            }
        }
        per_var.push(crate::datamodel::Mug {
            m: diag_agree as f64 / n_matched as f64,
            u: off_agree as f64 / n_offdiag as f64,
            g: missing as f64 / total as f64,
        });
    }
    MugProfile::new(per_var).map_err(|e| Error::Estimation(format!("re-estimated profile invalid: {e}")))
}

fn process_block(job: &BlockJob) -> Result<BlockOutcome> {
    let key = job.block.key.to_string();
    let n_x = job.block.x_members.len();
    let n_y = job.block.y_members.len();
    let skip = |reason: String| {
        Ok(BlockOutcome::Skipped { key: key.clone(), n_x, n_y, reason })
    };
    if n_x == 0 {
        return skip("no X records".into());
    }
    let a0 = build_agreement_matrix(job.pair, job.block, job.specs, job.mode)?;
    let n_offdiag = a0.n_x() * a0.n_y() - a0.n_matched();

    let (mug_raw, mug_chain) = match profile_at(&a0, job.chain_theta, job.external) {
        Ok(p) => p,
        Err(Error::Estimation(reason)) => return skip(reason),
        Err(e) => return Err(e),
    };
    let params = transition_params(&mug_chain)?;

    let mut runners = Vec::with_capacity(job.variants.len());
    let mut observed_sets = Vec::with_capacity(job.variants.len());
    for variant in job.variants {
        let smoothed = if variant.theta.values() == job.chain_theta.values() {
            mug_chain.clone()
        } else {
            match profile_at(&a0, &variant.theta, job.external) {
                Ok((_, s)) => s,
                Err(Error::Estimation(reason)) => {
                    return skip(format!("variant {}: {reason}", variant.name))
                }
                Err(e) => return Err(e),
            }
        };
        let fw = per_variable_weights(&smoothed)?;
        let observed = greedy_link(
            &crate::linker::composite_weights(&a0, &variant.theta, &smoothed)?,
            variant.cutoff,
        )?;
        observed_sets.push(observed.clone());
        runners.push(VariantRunner {
            theta: variant.theta.clone(),
            cutoff: variant.cutoff,
            fw,
            acc: AccuracyAccumulator::new(observed),
            reestimate: job.reestimate,
        });
    }

    let chain_cfg = ChainConfig {
        n_samples: job.samples,
        thinning: job.thinning,
        seed: exec::block_seed(job.master_seed, &job.block.key),
        mode: job.mode,
    };

    let mut distances = Vec::with_capacity(job.samples);
    let mut reference: Option<Vec<bool>> = None;
    let mut hash = exec::fnv1a64(b"MACSIM-SNAPSHOTS");
    let mut dump = match job.dump_dir {
        Some(dir) => Some(SnapshotWriter::create(dir, &key, &a0, job.samples)?),
        None => None,
    };

    run_thinned(&a0, &params, job.chain_theta, &chain_cfg, |_, state| {
        let reference = reference.get_or_insert_with(|| state.flip_bits().to_vec());
        distances.push((state.distance_to_flips(reference)?, state.distance_to_start()));
        let mut bytes = Vec::with_capacity(state.flip_bits().len());
        bytes.extend(state.flip_bits().iter().map(|&b| b as u8));
        hash = exec::fnv1a64_extend(hash, &bytes);
        for runner in &mut runners {
            runner.relink(state, n_offdiag)?;
        }
        if let Some(w) = &mut dump {
            w.append(&state.materialize())?;
        }
        Ok(())
    })?;
    if let Some(w) = dump {
        w.finish()?;
    }

    let reports = runners
        .into_iter()
        .map(|r| r.acc.finish())
        .collect::<Result<Vec<_>>>()?;

    let x_ids = job
        .block
        .x_members
        .iter()
        .map(|&i| job.pair.file_x.records()[i].entity_id.clone())
        .collect();
    let y_ids = job
        .block
        .y_members
        .iter()
        .map(|&j| job.pair.file_y.records()[j].entity_id.clone())
        .collect();

    Ok(BlockOutcome::Assessed(Box::new(BlockResult {
        key,
        n_x,
        n_y,
        n_matched: job.block.n_matched,
        mug_raw,
        reports,
        observed: observed_sets,
        distances,
        x_ids,
        y_ids,
        snapshot_hash: hash,
    })))
}

fn run_blocks(
    prepared: &PreparedRun,
    cfg: &RunConfig,
    variants: &[ResolvedVariant],
    exec_mode: ExecMode,
) -> Result<Vec<BlockOutcome>> {
    let chain_theta = resolve_theta(&prepared.specs, None, cfg.run.mode)?;
    let partition = block_partition(&prepared.pair, &prepared.blocking)?;
    let dump_dir = if cfg.run.dump_snapshots {
        let dir = cfg.run.out_dir.join("snapshots");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Some(dir)
    } else {
        None
    };

    let jobs: Vec<&Block> = partition.blocks.iter().collect();
    let outcomes = exec::map_mode(exec_mode, jobs, |block| {
        let job = BlockJob {
            pair: &prepared.pair,
            specs: &prepared.specs,
            block,
            chain_theta: &chain_theta,
            mode: cfg.run.mode,
            samples: cfg.run.samples,
            thinning: cfg.run.thinning,
            master_seed: cfg.run.seed,
            external: prepared.external_mug.as_ref(),
            reestimate: cfg.run.reestimate_per_sample,
            variants,
            dump_dir: dump_dir.as_deref(),
        };
        process_block(&job)
    });
    outcomes.into_iter().collect()
}

/// Result summary of an assess run.
#[derive(Debug, Clone)]
pub struct AssessOutput {
    pub grand_mean: f64,
    pub assessed_blocks: usize,
    pub skipped_blocks: usize,
    pub excluded_blocks: usize,
    pub total_records: usize,
    pub out_dir: PathBuf,
}

/// Run the full assessment pipeline and write the report CSVs.
pub fn run_assess(cfg: &RunConfig) -> Result<AssessOutput> {
    run_assess_with_mode(cfg, ExecMode::auto())
}

pub fn run_assess_with_mode(cfg: &RunConfig, exec_mode: ExecMode) -> Result<AssessOutput> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let base = ResolvedVariant {
        name: "base".into(),
        theta: resolve_theta(&prepared.specs, None, cfg.run.mode)?,
        cutoff: cfg.run.cutoff,
    };
    let outcomes = run_blocks(&prepared, cfg, std::slice::from_ref(&base), exec_mode)?;

    let out_dir = &cfg.run.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let results: Vec<&BlockResult> = outcomes
        .iter()
        .filter_map(|o| match o {
            BlockOutcome::Assessed(r) => Some(r.as_ref()),
            BlockOutcome::Skipped { .. } => None,
        })
        .collect();
    let reports: Vec<AccuracyReport> = results.iter().map(|r| r.reports[0].clone()).collect();
    if reports.is_empty() {
        return Err(Error::Estimation(
            "no block could be assessed; every block was degenerate".into(),
        ));
    }
    let aggregate = assessment::summarize(&reports)?;
    let excluded: std::collections::HashSet<usize> = aggregate.excluded.iter().copied().collect();

    write_distances_csv(&out_dir.join("distances.csv"), &results)?;
    write_per_record_csv(&out_dir.join("per_record.csv"), &results)?;
    write_per_simulation_csv(&out_dir.join("per_simulation.csv"), &results)?;
    write_mug_csv(&out_dir.join("mug.csv"), &results, &prepared.specs)?;
    write_observed_links_csv(&out_dir.join("observed_links.csv"), &results)?;
    write_summary_csv(
        &out_dir.join("summary.csv"),
        &outcomes,
        &excluded,
        aggregate.grand_mean,
        cfg.run.samples,
    )?;

    Ok(AssessOutput {
        grand_mean: aggregate.grand_mean,
        assessed_blocks: results.len(),
        skipped_blocks: outcomes.len() - results.len(),
        excluded_blocks: aggregate.excluded.len(),
        total_records: aggregate.total_records,
        out_dir: out_dir.clone(),
    })
}

/// Result summary of a compare run.
#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub variant_names: [String; 2],
    pub grand_means: [f64; 2],
    pub delta: f64,
    pub assessed_blocks: usize,
    pub out_dir: PathBuf,
}

/// Assess two linking-method variants against the identical simulated
/// sample stream and report their grand means side by side.
pub fn run_compare(cfg: &RunConfig) -> Result<CompareOutput> {
    run_compare_with_mode(cfg, ExecMode::auto())
}

pub fn run_compare_with_mode(cfg: &RunConfig, exec_mode: ExecMode) -> Result<CompareOutput> {
    cfg.validate()?;
    let compare = cfg
        .compare
        .as_ref()
        .ok_or_else(|| Error::Config("compare requires a [compare] section".into()))?;
    let prepared = prepare(cfg)?;
    let variants: Vec<ResolvedVariant> = compare
        .variants
        .iter()
        .map(|v| {
            Ok(ResolvedVariant {
                name: v.name.clone(),
                theta: resolve_theta(&prepared.specs, v.tolerances.as_ref(), cfg.run.mode)?,
                cutoff: v.cutoff.unwrap_or(cfg.run.cutoff),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = run_blocks(&prepared, cfg, &variants, exec_mode)?;

    let out_dir = &cfg.run.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let results: Vec<&BlockResult> = outcomes
        .iter()
        .filter_map(|o| match o {
            BlockOutcome::Assessed(r) => Some(r.as_ref()),
            BlockOutcome::Skipped { .. } => None,
        })
        .collect();
    if results.is_empty() {
        return Err(Error::Estimation(
            "no block could be assessed; every block was degenerate".into(),
        ));
    }
    let mut aggregates = Vec::with_capacity(2);
    for v in 0..2 {
        let reports: Vec<AccuracyReport> = results.iter().map(|r| r.reports[v].clone()).collect();
        aggregates.push(assessment::summarize(&reports)?);
    }

    let names = [variants[0].name.clone(), variants[1].name.clone()];
    write_compare_csv(&out_dir.join("compare.csv"), &outcomes, &names, &aggregates)?;

    Ok(CompareOutput {
        variant_names: names,
        grand_means: [aggregates[0].grand_mean, aggregates[1].grand_mean],
        delta: aggregates[0].grand_mean - aggregates[1].grand_mean,
        assessed_blocks: results.len(),
        out_dir: out_dir.clone(),
    })
}

/// Output of a generate run.
#[derive(Debug, Clone)]
pub struct GenerateOutput {
    pub x_path: PathBuf,
    pub y_path: PathBuf,
    pub alignment_path: PathBuf,
    pub n_x: usize,
    pub n_y: usize,
}

/// Generate the synthetic pair and write X.csv, Y.csv and alignment.csv.
pub fn run_generate(cfg: &RunConfig) -> Result<GenerateOutput> {
    cfg.validate()?;
    let gen = cfg
        .synthgen
        .as_ref()
        .ok_or_else(|| Error::Config("generate requires a [synthgen] section".into()))?;
    let population = synthgen::generate_population(gen)?;
    let pair = synthgen::subsample(&population, gen.n_x, exec::block_seed(gen.seed, &"subsample"))?;
    let (x, _summary) = synthgen::perturb(&pair.file_x, gen, exec::block_seed(gen.seed, &"perturb"))?;

    let out_dir = &cfg.run.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let x_path = out_dir.join("X.csv");
    let y_path = out_dir.join("Y.csv");
    let alignment_path = out_dir.join("alignment.csv");
    x.write_csv_path(&x_path)?;
    population.write_csv_path(&y_path)?;

    let file = File::create(&alignment_path).map_err(|e| Error::io(&alignment_path, e))?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    wtr.write_record(["x_entity_id", "y_entity_id"])?;
    for rec in x.records() {
        wtr.write_record([rec.entity_id.as_str(), rec.entity_id.as_str()])?;
    }
    wtr.flush()?;

    Ok(GenerateOutput {
        x_path,
        y_path,
        alignment_path,
        n_x: x.len(),
        n_y: population.len(),
    })
}

// ---------------------------------------------------------------------------
// snapshot dump format
// ---------------------------------------------------------------------------

const SNAPSHOT_MAGIC: &[u8; 8] = b"MACSIMA0";

struct SnapshotWriter {
    w: BufWriter<File>,
    path: PathBuf,
}

impl SnapshotWriter {
    fn create(dir: &Path, key: &str, a0: &AgreementMatrix, n_samples: usize) -> Result<Self> {
        let name: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        let path = dir.join(format!("block_{name}.bin"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let hdr = |w: &mut BufWriter<File>| -> std::io::Result<()> {
            w.write_all(SNAPSHOT_MAGIC)?;
            w.write_all(&1u32.to_le_bytes())?;
            for dim in [a0.n_x(), a0.n_y(), a0.n_vars(), a0.n_matched(), n_samples] {
                w.write_all(&(dim as u64).to_le_bytes())?;
            }
            w.write_all(&[match a0.mode() {
                MatrixMode::Original => 0u8,
                MatrixMode::Extended => 1u8,
            }])?;
            Ok(())
        };
        hdr(&mut w).map_err(|e| Error::io(&path, e))?;
        Ok(SnapshotWriter { w, path })
    }

    fn append(&mut self, matrix: &AgreementMatrix) -> Result<()> {
        for &c in matrix.cells() {
            self.w
                .write_all(&c.to_le_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Read back a snapshot dump written with `dump_snapshots`.
pub fn read_snapshots(path: &Path) -> Result<Vec<AgreementMatrix>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Config(format!("{}: {msg}", path.display()));
    if buf.len() < 8 + 4 + 5 * 8 + 1 || &buf[0..8] != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file"));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != 1 {
        return Err(bad("unsupported snapshot version"));
    }
    let mut at = 12;
    let mut dims = [0u64; 5];
    for d in &mut dims {
        *d = u64::from_le_bytes(buf[at..at + 8].try_into().unwrap());
        at += 8;
    }
    let [n_x, n_y, n_vars, n_matched, n_samples] = dims.map(|d| d as usize);
    let mode = match buf[at] {
        0 => MatrixMode::Original,
        1 => MatrixMode::Extended,
        _ => return Err(bad("unknown matrix mode")),
    };
    at += 1;
    let cells_per = n_x * n_y * n_vars;
    if buf.len() != at + n_samples * cells_per * 8 {
        return Err(bad("truncated snapshot file"));
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut cells = Vec::with_capacity(cells_per);
        for _ in 0..cells_per {
            cells.push(f64::from_le_bytes(buf[at..at + 8].try_into().unwrap()));
            at += 8;
        }
        out.push(AgreementMatrix::new(n_x, n_y, n_vars, n_matched, mode, cells)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// report writers (block-ordered, deterministic)
// ---------------------------------------------------------------------------

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn write_distances_csv(path: &Path, results: &[&BlockResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["block", "sample_index", "distance_to_sample1", "distance_to_a0"])?;
    for r in results {
        for (s, (d1, d0)) in r.distances.iter().enumerate() {
            w.write_record([r.key.clone(), (s + 1).to_string(), format!("{d1}"), format!("{d0}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_per_record_csv(path: &Path, results: &[&BlockResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["block", "x_entity_id", "proportion"])?;
    for r in results {
        for (id, p) in r.x_ids.iter().zip(r.reports[0].per_record()) {
            w.write_record([r.key.clone(), id.clone(), format!("{p}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_per_simulation_csv(path: &Path, results: &[&BlockResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["block", "sample_index", "proportion"])?;
    for r in results {
        for (s, p) in r.reports[0].per_simulation().iter().enumerate() {
            w.write_record([r.key.clone(), (s + 1).to_string(), format!("{p}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_mug_csv(path: &Path, results: &[&BlockResult], specs: &[VariableSpec]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["block", "variable", "m", "u", "g"])?;
    for r in results {
        for (spec, p) in specs.iter().zip(r.mug_raw.iter()) {
            w.write_record([
                r.key.clone(),
                spec.name.clone(),
                format!("{}", p.m),
                format!("{}", p.u),
                format!("{}", p.g),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_observed_links_csv(path: &Path, results: &[&BlockResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["block", "x_entity_id", "y_entity_id", "weight"])?;
    for r in results {
        for link in r.observed[0].links() {
            w.write_record([
                r.key.clone(),
                r.x_ids[link.x].clone(),
                r.y_ids[link.y].clone(),
                format!("{}", link.weight),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_summary_csv(
    path: &Path,
    outcomes: &[BlockOutcome],
    excluded: &std::collections::HashSet<usize>,
    grand_mean: f64,
    n_samples: usize,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "block",
        "status",
        "x_records",
        "y_records",
        "matched_pairs",
        "observed_links",
        "observed_unlinked",
        "grand_mean",
    ])?;
    let mut assessed_idx = 0usize;
    for outcome in outcomes {
        match outcome {
            BlockOutcome::Assessed(r) => {
                let status = if excluded.contains(&assessed_idx) {
                    "excluded: no observed links"
                } else {
                    "ok"
                };
                let report = &r.reports[0];
                w.write_record([
                    r.key.clone(),
                    status.to_string(),
                    r.n_x.to_string(),
                    r.n_y.to_string(),
                    r.n_matched.to_string(),
                    report.observed_links.to_string(),
                    report.observed_unlinked.to_string(),
                    format!("{}", report.grand_mean()),
                ])?;
                assessed_idx += 1;
            }
            BlockOutcome::Skipped { key, n_x, n_y, reason } => {
                w.write_record([
                    key.clone(),
                    format!("skipped: {reason}"),
                    n_x.to_string(),
                    n_y.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?;
            }
        }
    }
    w.write_record([
        "ALL".to_string(),
        format!("aggregate over {n_samples} samples"),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!("{grand_mean}"),
    ])?;
    w.flush()?;
    Ok(())
}

fn write_compare_csv(
    path: &Path,
    outcomes: &[BlockOutcome],
    names: &[String; 2],
    aggregates: &[assessment::Aggregate],
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "block".to_string(),
        "status".to_string(),
        "x_records".to_string(),
        "snapshot_hash".to_string(),
        format!("mean_{}", names[0]),
        format!("mean_{}", names[1]),
        "delta".to_string(),
    ])?;
    for outcome in outcomes {
        match outcome {
            BlockOutcome::Assessed(r) => {
                let a = r.reports[0].grand_mean();
                let b = r.reports[1].grand_mean();
                w.write_record([
                    r.key.clone(),
                    "ok".to_string(),
                    r.n_x.to_string(),
                    format!("{:016x}", r.snapshot_hash),
                    format!("{a}"),
                    format!("{b}"),
                    format!("{}", a - b),
                ])?;
            }
            BlockOutcome::Skipped { key, n_x, reason, .. } => {
                w.write_record([
                    key.clone(),
                    format!("skipped: {reason}"),
                    n_x.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?;
            }
        }
    }
    w.write_record([
        "ALL".to_string(),
        "aggregate".to_string(),
        String::new(),
        String::new(),
        format!("{}", aggregates[0].grand_mean),
        format!("{}", aggregates[1].grand_mean),
        format!("{}", aggregates[0].grand_mean - aggregates[1].grand_mean),
    ])?;
    w.flush()?;
    Ok(())
}
