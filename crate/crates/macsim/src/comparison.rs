//! Similarity weights, agreement thresholds, blocking and agreement-matrix
//! construction.

use std::collections::BTreeMap;

use crate::datamodel::{AgreementMatrix, AlignedPair, MatrixMode, VariableSpec, MISSING};
use crate::{Error, Result};

/// Per-variable agreement thresholds, each in (0.5, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    theta: Vec<f64>,
}

impl Threshold {
    /// `theta_l = 1 - tolerance_l / t_range_l`.
    pub fn from_specs(specs: &[VariableSpec]) -> Result<Self> {
        let theta = specs.iter().map(threshold).collect::<Result<Vec<_>>>()?;
        Ok(Threshold { theta })
    }

    /// Exact-agreement thresholds (theta = 1 everywhere), the original-mode
    /// setting.
    pub fn exact(n_vars: usize) -> Self {
        Threshold { theta: vec![1.0; n_vars] }
    }

    /// Wrap raw threshold values. Consumers that need `theta > 0.5` (the
    /// chain kernel) validate on use.
    pub fn from_values(theta: Vec<f64>) -> Self {
        Threshold { theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn var(&self, l: usize) -> f64 {
        self.theta[l]
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }
}

/// Similarity of two raw values: `1 - |x - y| / t_range`, clamped to [0,1];
/// `None` when either value is missing.
pub fn similarity(x: Option<f64>, y: Option<f64>, spec: &VariableSpec) -> Option<f64> {
    match (x, y) {
        (Some(a), Some(b)) => {
            let v = 1.0 - (a - b).abs() / spec.t_range;
            Some(v.clamp(0.0, 1.0))
        }
        _ => None,
    }
}

/// Agreement threshold for one variable: `1 - tolerance / t_range`.
pub fn threshold(spec: &VariableSpec) -> Result<f64> {
    spec.validate()?;
    Ok(1.0 - spec.tolerance / spec.t_range)
}

/// Agreement decision for a non-missing value.
#[inline]
pub fn agrees(value: f64, theta: f64) -> bool {
    value >= theta
}

/// Agreement decision on an optional cell; missing cells have no agreement
/// status and must be branched on by the caller.
pub fn agrees_cell(cell: Option<f64>, theta: f64) -> Result<bool> {
    match cell {
        Some(v) => Ok(agrees(v, theta)),
        None => Err(Error::UndefinedAgreement(
            "agreement is undefined for a missing cell".into(),
        )),
    }
}

/// Blocking key: the tuple of blocking-variable values. `Residual` keys mark
/// records whose blocking value is missing; each forms a singleton block and
/// is never compared to anything.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockKey {
    Values(Vec<f64>),
    ResidualX(usize),
    ResidualY(usize),
}

impl BlockKey {
    fn sort_token(&self) -> (u8, Vec<u64>, usize) {
        match self {
            // Positive finite floats order correctly by their bit patterns.
            BlockKey::Values(vs) => (0, vs.iter().map(|v| key_bits(*v)).collect(), 0),
            BlockKey::ResidualX(i) => (1, Vec::new(), *i),
            BlockKey::ResidualY(j) => (2, Vec::new(), *j),
        }
    }
}

impl Eq for BlockKey {}

impl Ord for BlockKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_token().cmp(&other.sort_token())
    }
}

impl PartialOrd for BlockKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockKey::Values(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| format!("{v}")).collect();
                write!(f, "{}", parts.join("|"))
            }
            BlockKey::ResidualX(i) => write!(f, "residual-x{i}"),
            BlockKey::ResidualY(j) => write!(f, "residual-y{j}"),
        }
    }
}

fn key_bits(v: f64) -> u64 {
    // Collapse -0.0 onto 0.0 so equal codes share a key.
    let v = if v == 0.0 { 0.0 } else { v };
    let bits = v.to_bits();
    // Flip into a monotone order for negatives.
    if bits >> 63 == 1 {
        !bits
    } else {
        bits ^ (1 << 63)
    }
}

/// One block of comparable records. `x_members` / `y_members` hold global
/// record indices; the first `n_matched` positions of both lists pair each X
/// record with its true match, so the leading diagonal of the block's
/// agreement matrix addresses matched pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub key: BlockKey,
    pub x_members: Vec<usize>,
    pub y_members: Vec<usize>,
    pub n_matched: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
}

/// Partition a canonicalized pair by the values of `blocking_vars`. Records
/// with a missing blocking value go to singleton residual blocks. An empty
/// variable list yields a single block holding everything.
pub fn block_partition(pair: &AlignedPair, blocking_vars: &[String]) -> Result<BlockPartition> {
    if !pair.is_canonical() {
        return Err(Error::Alignment(
            "block_partition requires a canonicalized pair".into(),
        ));
    }
    let r_x = pair.file_x.len();
    let r_y = pair.file_y.len();

    let mut var_idx = Vec::with_capacity(blocking_vars.len());
    for name in blocking_vars {
        let idx = pair
            .file_x
            .variable_index(name)
            .ok_or_else(|| Error::Config(format!("unknown blocking variable {name}")))?;
        var_idx.push(idx);
    }

    let key_of = |table: &crate::datamodel::RecordTable, row: usize| -> Option<Vec<f64>> {
        let mut key = Vec::with_capacity(var_idx.len());
        for &v in &var_idx {
            key.push(table.value(row, v)?);
        }
        Some(key)
    };

    #[derive(Default)]
    struct Members {
        matched: Vec<usize>,
        x_only: Vec<usize>,
        y_only: Vec<usize>,
    }

    let mut grouped: BTreeMap<Vec<u64>, (Vec<f64>, Members)> = BTreeMap::new();
    let mut residuals: Vec<Block> = Vec::new();

    let x_keys: Vec<Option<Vec<f64>>> =
        (0..r_x).map(|i| key_of(&pair.file_x, i)).collect();
    let y_keys: Vec<Option<Vec<f64>>> =
        (0..r_y).map(|j| key_of(&pair.file_y, j)).collect();

    for i in 0..r_x {
        match &x_keys[i] {
            None => residuals.push(Block {
                key: BlockKey::ResidualX(i),
                x_members: vec![i],
                y_members: Vec::new(),
                n_matched: 0,
            }),
            Some(kx) => {
                let bits: Vec<u64> = kx.iter().map(|v| key_bits(*v)).collect();
                let entry = grouped
                    .entry(bits)
                    .or_insert_with(|| (kx.clone(), Members::default()));
                // Canonical pair: the true match of X record i is Y record i.
                if y_keys[i].as_ref() == Some(kx) {
                    entry.1.matched.push(i);
                } else {
                    entry.1.x_only.push(i);
                }
            }
        }
    }
    for j in 0..r_y {
        let matched_here = j < r_x && x_keys[j].is_some() && y_keys[j] == x_keys[j];
        if matched_here {
            continue; // already placed as the partner of X record j
        }
        match &y_keys[j] {
            None => residuals.push(Block {
                key: BlockKey::ResidualY(j),
                x_members: Vec::new(),
                y_members: vec![j],
                n_matched: 0,
            }),
            Some(ky) => {
                let bits: Vec<u64> = ky.iter().map(|v| key_bits(*v)).collect();
                let entry = grouped
                    .entry(bits)
                    .or_insert_with(|| (ky.clone(), Members::default()));
                entry.1.y_only.push(j);
            }
        }
    }

    let mut blocks = Vec::with_capacity(grouped.len() + residuals.len());
    for (_, (key_vals, members)) in grouped {
        let n_matched = members.matched.len();
        let mut x_members = members.matched.clone();
        x_members.extend(members.x_only);
        let mut y_members = members.matched;
        y_members.extend(members.y_only);
        blocks.push(Block {
            key: BlockKey::Values(key_vals),
            x_members,
            y_members,
            n_matched,
        });
    }
    blocks.extend(residuals);
    blocks.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(BlockPartition { blocks })
}

/// Build a block's agreement matrix. Extended mode stores similarity
/// weights; original mode stores 1/0 exact-equality codes. Either way a
/// missing raw value on either side yields a missing cell.
pub fn build_agreement_matrix(
    pair: &AlignedPair,
    block: &Block,
    specs: &[VariableSpec],
    mode: MatrixMode,
) -> Result<AgreementMatrix> {
    let n_x = block.x_members.len();
    let n_y = block.y_members.len();
    let n_vars = specs.len();
    let mut var_idx = Vec::with_capacity(n_vars);
    for spec in specs {
        let idx = pair
            .file_x
            .variable_index(&spec.name)
            .ok_or_else(|| Error::Config(format!("unknown linking variable {}", spec.name)))?;
        var_idx.push(idx);
    }

    let mut cells = vec![MISSING; n_x * n_y * n_vars];
    let mut at = 0;
    for &xi in &block.x_members {
        for &yj in &block.y_members {
            for (l, spec) in specs.iter().enumerate() {
                let xv = pair.file_x.value(xi, var_idx[l]);
                let yv = pair.file_y.value(yj, var_idx[l]);
                cells[at] = match mode {
                    MatrixMode::Extended => similarity(xv, yv, spec).unwrap_or(MISSING),
                    MatrixMode::Original => match (xv, yv) {
                        (Some(a), Some(b)) => {
                            if a == b {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        _ => MISSING,
                    },
                };
                at += 1;
            }
        }
    }
    AgreementMatrix::new(n_x, n_y, n_vars, block.n_matched, mode, cells)
}

/// Single block over a whole canonicalized pair (no blocking).
pub fn whole_pair_block(pair: &AlignedPair) -> Block {
    Block {
        key: BlockKey::Values(Vec::new()),
        x_members: (0..pair.file_x.len()).collect(),
        y_members: (0..pair.file_y.len()).collect(),
        n_matched: pair.file_x.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Record, RecordTable};
    use approx::assert_relative_eq;

    fn spec(t: f64, d: f64) -> VariableSpec {
        VariableSpec::new("V", t, d).unwrap()
    }

    #[test]
    fn similarity_identical_values() {
        assert_eq!(similarity(Some(1980.0), Some(1980.0), &spec(100.0, 0.0)), Some(1.0));
    }

    #[test]
    fn similarity_missing_side() {
        assert_eq!(similarity(Some(5.0), None, &spec(100.0, 0.0)), None);
        assert_eq!(similarity(None, Some(5.0), &spec(100.0, 0.0)), None);
    }

    #[test]
    fn similarity_hand_value() {
        let v = similarity(Some(1980.0), Some(1983.0), &spec(100.0, 0.0)).unwrap();
        assert_relative_eq!(v, 0.97, max_relative = 1e-12);
    }

    #[test]
    fn similarity_clamps_when_difference_exceeds_range() {
        assert_eq!(similarity(Some(0.0), Some(500.0), &spec(100.0, 0.0)), Some(0.0));
    }

    #[test]
    fn threshold_values() {
        assert_eq!(threshold(&spec(100.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(threshold(&spec(100.0, 2.0)).unwrap(), 0.98, max_relative = 1e-12);
        // a tolerance at or above t_range/2 would push theta to 0.5 or below
        let bad = VariableSpec {
            name: "V".into(),
            t_range: 100.0,
            tolerance: 60.0,
            missing_token: None,
            blocking: false,
        };
        assert!(threshold(&bad).is_err());
    }

    #[test]
    fn agrees_boundary() {
        assert!(agrees(0.99, 0.98));
        assert!(!agrees(0.97, 0.98));
        assert!(agrees(1.0, 1.0));
        assert!(agrees_cell(Some(1.0), 1.0).unwrap());
        assert!(matches!(
            agrees_cell(None, 0.9),
            Err(crate::Error::UndefinedAgreement(_))
        ));
    }

    fn pair_with(table_x: Vec<(&str, Vec<Option<f64>>)>, table_y: Vec<(&str, Vec<Option<f64>>)>, vars: &[&str]) -> AlignedPair {
        let make = |rows: Vec<(&str, Vec<Option<f64>>)>| {
            RecordTable::new(
                vars.iter().map(|v| v.to_string()).collect(),
                rows.into_iter()
                    .map(|(id, values)| Record { entity_id: id.into(), values })
                    .collect(),
            )
            .unwrap()
        };
        AlignedPair::new(make(table_x), make(table_y)).unwrap().canonicalize()
    }

    #[test]
    fn partition_by_single_variable() {
        let pair = pair_with(
            vec![
                ("x1", vec![Some(1.0)]),
                ("x2", vec![Some(2.0)]),
                ("x3", vec![Some(3.0)]),
            ],
            vec![
                ("x1", vec![Some(1.0)]),
                ("x2", vec![Some(2.0)]),
                ("x3", vec![Some(3.0)]),
                ("y4", vec![Some(1.0)]),
            ],
            &["SA1"],
        );
        let part = block_partition(&pair, &["SA1".to_string()]).unwrap();
        assert_eq!(part.blocks.len(), 3);
        let first = &part.blocks[0];
        assert_eq!(first.x_members, vec![0]);
        assert_eq!(first.y_members, vec![0, 3]);
        assert_eq!(first.n_matched, 1);
    }

    #[test]
    fn partition_by_combined_key() {
        let pair = pair_with(
            vec![("a", vec![Some(1.0), Some(1.0)]), ("b", vec![Some(1.0), Some(2.0)])],
            vec![("a", vec![Some(1.0), Some(1.0)]), ("b", vec![Some(1.0), Some(2.0)])],
            &["SA1", "SEX"],
        );
        let part = block_partition(&pair, &["SA1".to_string(), "SEX".to_string()]).unwrap();
        assert_eq!(part.blocks.len(), 2);
        assert_eq!(part.blocks[0].key, BlockKey::Values(vec![1.0, 1.0]));
        assert_eq!(part.blocks[1].key, BlockKey::Values(vec![1.0, 2.0]));
    }

    #[test]
    fn empty_blocking_list_gives_single_block() {
        let pair = pair_with(
            vec![("a", vec![Some(1.0)]), ("b", vec![Some(2.0)])],
            vec![("a", vec![Some(1.0)]), ("b", vec![Some(2.0)]), ("c", vec![Some(9.0)])],
            &["SA1"],
        );
        let part = block_partition(&pair, &[]).unwrap();
        assert_eq!(part.blocks.len(), 1);
        assert_eq!(part.blocks[0].x_members, vec![0, 1]);
        assert_eq!(part.blocks[0].y_members, vec![0, 1, 2]);
        assert_eq!(part.blocks[0].n_matched, 2);
    }

    #[test]
    fn missing_blocking_values_become_singletons() {
        let pair = pair_with(
            vec![("a", vec![Some(1.0)]), ("b", vec![None])],
            vec![("a", vec![Some(1.0)]), ("b", vec![None])],
            &["SA1"],
        );
        let part = block_partition(&pair, &["SA1".to_string()]).unwrap();
        // one value block, one residual X singleton, one residual Y singleton
        assert_eq!(part.blocks.len(), 3);
        assert!(matches!(part.blocks[1].key, BlockKey::ResidualX(1)));
        assert!(matches!(part.blocks[2].key, BlockKey::ResidualY(1)));
    }

    #[test]
    fn unknown_blocking_variable_errors() {
        let pair = pair_with(vec![("a", vec![Some(1.0)])], vec![("a", vec![Some(1.0)])], &["SA1"]);
        assert!(block_partition(&pair, &["NOPE".to_string()]).is_err());
    }

    #[test]
    fn perturbed_blocking_value_separates_matched_pair() {
        // X record b was perturbed: its key differs from its true match's.
        let pair = pair_with(
            vec![("a", vec![Some(1.0)]), ("b", vec![Some(2.0)])],
            vec![("a", vec![Some(1.0)]), ("b", vec![Some(1.0)])],
            &["SA1"],
        );
        let part = block_partition(&pair, &["SA1".to_string()]).unwrap();
        assert_eq!(part.blocks.len(), 2);
        let b1 = &part.blocks[0];
        assert_eq!(b1.key, BlockKey::Values(vec![1.0]));
        assert_eq!(b1.x_members, vec![0]);
        assert_eq!(b1.y_members, vec![0, 1]);
        assert_eq!(b1.n_matched, 1);
        let b2 = &part.blocks[1];
        assert_eq!(b2.key, BlockKey::Values(vec![2.0]));
        assert_eq!(b2.x_members, vec![1]);
        assert!(b2.y_members.is_empty());
        assert_eq!(b2.n_matched, 0);
    }

    fn specs3() -> Vec<VariableSpec> {
        vec![
            VariableSpec::new("A", 100.0, 2.0).unwrap(),
            VariableSpec::new("B", 100.0, 0.0).unwrap(),
            VariableSpec::new("C", 100.0, 0.0).unwrap(),
        ]
    }

    #[test]
    fn matrix_identity_case() {
        let pair = pair_with(
            vec![("a", vec![Some(1.0), Some(2.0), Some(3.0)])],
            vec![("a", vec![Some(1.0), Some(2.0), Some(3.0)])],
            &["A", "B", "C"],
        );
        let block = whole_pair_block(&pair);
        let m = build_agreement_matrix(&pair, &block, &specs3(), MatrixMode::Extended).unwrap();
        for l in 0..3 {
            assert_eq!(m.get(0, 0, l), Some(1.0));
        }
    }

    #[test]
    fn matrix_extended_partial_agreement() {
        let pair = pair_with(
            vec![("a", vec![Some(1980.0), Some(2.0), Some(3.0)])],
            vec![("a", vec![Some(1983.0), Some(2.0), Some(3.0)])],
            &["A", "B", "C"],
        );
        let block = whole_pair_block(&pair);
        let m = build_agreement_matrix(&pair, &block, &specs3(), MatrixMode::Extended).unwrap();
        assert_relative_eq!(m.get(0, 0, 0).unwrap(), 0.97, max_relative = 1e-12);
    }

    #[test]
    fn matrix_original_exact_equality() {
        let pair = pair_with(
            vec![("a", vec![Some(1980.0), Some(2.0), None])],
            vec![("a", vec![Some(1983.0), Some(2.0), Some(3.0)])],
            &["A", "B", "C"],
        );
        let block = whole_pair_block(&pair);
        let m = build_agreement_matrix(&pair, &block, &specs3(), MatrixMode::Original).unwrap();
        assert_eq!(m.get(0, 0, 0), Some(0.0));
        assert_eq!(m.get(0, 0, 1), Some(1.0));
        assert_eq!(m.get(0, 0, 2), None);
    }

    #[test]
    fn zero_tolerance_extended_matches_original_decisions() {
        // On data without rounding artifacts, extended agreement at theta=1
        // coincides with original-mode exact-equality coding.
        let pair = pair_with(
            vec![("a", vec![Some(10.0), Some(5.0), Some(7.0)]), ("b", vec![Some(11.0), Some(5.0), None])],
            vec![("a", vec![Some(10.0), Some(6.0), Some(7.0)]), ("b", vec![Some(11.0), Some(5.0), Some(2.0)])],
            &["A", "B", "C"],
        );
        let block = whole_pair_block(&pair);
        let specs = vec![
            VariableSpec::new("A", 100.0, 0.0).unwrap(),
            VariableSpec::new("B", 100.0, 0.0).unwrap(),
            VariableSpec::new("C", 100.0, 0.0).unwrap(),
        ];
        let ext = build_agreement_matrix(&pair, &block, &specs, MatrixMode::Extended).unwrap();
        let orig = build_agreement_matrix(&pair, &block, &specs, MatrixMode::Original).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..3 {
                    match (ext.get(i, j, l), orig.get(i, j, l)) {
                        (Some(e), Some(o)) => assert_eq!(agrees(e, 1.0), agrees(o, 1.0)),
                        (None, None) => {}
                        other => panic!("missing pattern diverged: {other:?}"),
                    }
                }
            }
        }
    }
}
