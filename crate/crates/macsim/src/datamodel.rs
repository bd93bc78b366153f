//! Core domain types shared by the whole pipeline: linking-variable
//! metadata, record tables with their CSV form, the aligned file pair, the
//! 3-D agreement matrix and the probability/link containers.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sentinel stored in [`AgreementMatrix`] cells when either raw value of the
/// pair is missing. Non-missing cells live in `[0, 1]`.
pub const MISSING: f64 = -1.0;

/// Per-linking-variable metadata. All variables are numeric codes; a value
/// equal to the configured missing token is treated as absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    /// Difference between the maximum and minimum value of the variable.
    pub t_range: f64,
    /// Maximum accepted value difference still counting as agreement.
    #[serde(default)]
    pub tolerance: f64,
    /// Raw-data token meaning "missing"; empty CSV fields always count.
    #[serde(default)]
    pub missing_token: Option<String>,
    /// Whether this variable participates in the blocking key by default.
    #[serde(default)]
    pub blocking: bool,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, t_range: f64, tolerance: f64) -> Result<Self> {
        let spec = VariableSpec {
            name: name.into(),
            t_range,
            tolerance,
            missing_token: None,
            blocking: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The threshold rule needs `theta > 0.5`, hence `tolerance < t_range/2`.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_range > 0.0) || !self.t_range.is_finite() {
            return Err(Error::Config(format!(
                "variable {}: t_range must be a positive finite number, got {}",
                self.name, self.t_range
            )));
        }
        if !(self.tolerance >= 0.0) || self.tolerance >= self.t_range / 2.0 {
            return Err(Error::Config(format!(
                "variable {}: tolerance must satisfy 0 <= tolerance < t_range/2, got {} (t_range {})",
                self.name, self.tolerance, self.t_range
            )));
        }
        Ok(())
    }
}

/// One record: an entity id plus one optional numeric value per declared
/// variable, in table column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub entity_id: String,
    pub values: Vec<Option<f64>>,
}

/// An ordered set of records sharing one variable layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    variables: Vec<String>,
    records: Vec<Record>,
}

impl RecordTable {
    /// Entity ids must be unique and every record must carry a value slot
    /// for every declared variable.
    pub fn new(variables: Vec<String>, records: Vec<Record>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(records.len());
        for (idx, rec) in records.iter().enumerate() {
            if rec.values.len() != variables.len() {
                return Err(Error::Config(format!(
                    "record {} has {} values, expected {}",
                    rec.entity_id,
                    rec.values.len(),
                    variables.len()
                )));
            }
            if let Some(prev) = seen.insert(rec.entity_id.clone(), idx) {
                return Err(Error::Config(format!(
                    "duplicate entity id {} at rows {} and {}",
                    rec.entity_id, prev, idx
                )));
            }
        }
        Ok(RecordTable { variables, records })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Value of variable `var` for record `row`.
    pub fn value(&self, row: usize, var: usize) -> Option<f64> {
        self.records[row].values[var]
    }

    /// Read a table from CSV. The first column holds the entity id; the
    /// remaining columns are matched to `specs` by header name (extra file
    /// columns are ignored, missing ones are an error). A field is missing
    /// when empty or equal to the variable's missing token.
    pub fn read_csv<R: Read>(reader: R, specs: &[VariableSpec]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            return Err(Error::Config("CSV file has no columns".into()));
        }
        let mut columns = Vec::with_capacity(specs.len());
        for spec in specs {
            let col = headers
                .iter()
                .position(|h| h == spec.name)
                .ok_or_else(|| {
                    Error::Config(format!("CSV is missing declared variable column {}", spec.name))
                })?;
            if col == 0 {
                return Err(Error::Config(format!(
                    "variable {} collides with the entity-id column",
                    spec.name
                )));
            }
            columns.push(col);
        }

        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let entity_id = row
                .get(0)
                .ok_or_else(|| Error::Config(format!("row {line}: missing entity id")))?
                .to_string();
            let mut values = Vec::with_capacity(specs.len());
            for (spec, &col) in specs.iter().zip(&columns) {
                let raw = row.get(col).unwrap_or("");
                let token = spec.missing_token.as_deref().unwrap_or("");
                if raw.is_empty() || raw == token {
                    values.push(None);
                } else {
                    let v: f64 = raw.parse().map_err(|_| {
                        Error::Config(format!(
                            "row {line}: variable {} has non-numeric value {raw:?}",
                            spec.name
                        ))
                    })?;
                    values.push(Some(v));
                }
            }
            records.push(Record { entity_id, values });
        }
        RecordTable::new(specs.iter().map(|s| s.name.clone()).collect(), records)
    }

    pub fn read_csv_path(path: &Path, specs: &[VariableSpec]) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, specs)
    }

    /// Write the table as CSV; missing values become empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["RECID".to_string()];
        header.extend(self.variables.iter().cloned());
        wtr.write_record(&header)?;
        for rec in &self.records {
            let mut row = vec![rec.entity_id.clone()];
            for v in &rec.values {
                row.push(match v {
                    Some(x) => format!("{x}"),
                    None => String::new(),
                });
            }
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(Error::from)?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// Two record tables plus, for each X record, the Y index of its true match.
/// File X must be a subsample of Y: every X record has exactly one match.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    pub file_x: RecordTable,
    pub file_y: RecordTable,
    alignment: Vec<usize>,
}

impl AlignedPair {
    /// Align by entity id. Errors when an X record has no counterpart in Y.
    pub fn new(file_x: RecordTable, file_y: RecordTable) -> Result<Self> {
        if file_x.variables() != file_y.variables() {
            return Err(Error::Config(
                "file X and file Y declare different variable sets".into(),
            ));
        }
        let mut y_index: HashMap<&str, usize> = HashMap::with_capacity(file_y.len());
        for (j, rec) in file_y.records().iter().enumerate() {
            y_index.insert(rec.entity_id.as_str(), j);
        }
        let mut alignment = Vec::with_capacity(file_x.len());
        for rec in file_x.records() {
            match y_index.get(rec.entity_id.as_str()) {
                Some(&j) => alignment.push(j),
                None => {
                    return Err(Error::Alignment(format!(
                        "X record {} has no true match in file Y",
                        rec.entity_id
                    )))
                }
            }
        }
        Ok(AlignedPair {
            file_x,
            file_y,
            alignment,
        })
    }

    /// Y index of the true match of X record `i`.
    pub fn match_of(&self, i: usize) -> usize {
        self.alignment[i]
    }

    pub fn is_canonical(&self) -> bool {
        self.alignment.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Reorder file Y so the true match of X record `i` sits at Y index `i`;
    /// the remaining Y records follow in their original order. Idempotent.
    pub fn canonicalize(self) -> AlignedPair {
        if self.is_canonical() {
            return self;
        }
        let r_y = self.file_y.len();
        let mut taken = vec![false; r_y];
        let mut order = Vec::with_capacity(r_y);
        for &j in &self.alignment {
            taken[j] = true;
            order.push(j);
        }
        order.extend((0..r_y).filter(|&j| !taken[j]));

        let y_records = self.file_y.records().to_vec();
        let reordered: Vec<Record> = order.into_iter().map(|j| y_records[j].clone()).collect();
        let file_y = RecordTable::new(self.file_y.variables().to_vec(), reordered)
            .expect("reordering preserves table invariants");
        let alignment = (0..self.file_x.len()).collect();
        AlignedPair {
            file_x: self.file_x,
            file_y,
            alignment,
        }
    }
}

/// Matrix coding mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    /// Binary exact-equality coding: cells in {0, 1} or missing.
    Original,
    /// Similarity-weight coding: cells in [0, 1] or missing.
    Extended,
}

impl std::fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixMode::Original => write!(f, "original"),
            MatrixMode::Extended => write!(f, "extended"),
        }
    }
}

/// 3-D array of per-variable agreement values over the (X record, Y record)
/// pairs of one block. The leading `n_matched` indices pair each X record
/// with its true match, so cell `(k, k, l)` for `k < n_matched` addresses a
/// matched pair; every other cell is a non-match pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMatrix {
    n_x: usize,
    n_y: usize,
    n_vars: usize,
    n_matched: usize,
    mode: MatrixMode,
    cells: Vec<f64>,
}

impl AgreementMatrix {
    pub fn new(
        n_x: usize,
        n_y: usize,
        n_vars: usize,
        n_matched: usize,
        mode: MatrixMode,
        cells: Vec<f64>,
    ) -> Result<Self> {
        if cells.len() != n_x * n_y * n_vars {
            return Err(Error::DimensionMismatch(format!(
                "expected {} cells, got {}",
                n_x * n_y * n_vars,
                cells.len()
            )));
        }
        if n_matched > n_x || n_matched > n_y {
            return Err(Error::DimensionMismatch(format!(
                "n_matched {n_matched} exceeds dims {n_x}x{n_y}"
            )));
        }
        for &c in &cells {
            let ok = c == MISSING
                || match mode {
                    MatrixMode::Original => c == 0.0 || c == 1.0,
                    MatrixMode::Extended => (0.0..=1.0).contains(&c),
                };
            if !ok {
                return Err(Error::Config(format!(
                    "agreement value {c} invalid in {mode} mode"
                )));
            }
        }
        Ok(AgreementMatrix {
            n_x,
            n_y,
            n_vars,
            n_matched,
            mode,
            cells,
        })
    }

    /// Matrix filled with a single value, matched on the leading diagonal.
    pub fn filled(n_x: usize, n_y: usize, n_vars: usize, mode: MatrixMode, value: f64) -> Self {
        let n_matched = n_x.min(n_y);
        AgreementMatrix::new(n_x, n_y, n_vars, n_matched, mode, vec![value; n_x * n_y * n_vars])
            .expect("uniform fill is valid")
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

    /// Number of leading indices whose diagonal cell is a true matched pair.
    pub fn n_matched(&self) -> usize {
        self.n_matched
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n_y + j) * self.n_vars + l
    }

    /// `None` when the cell is missing.
    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> Option<f64> {
        let v = self.cells[self.index(i, j, l)];
        if v == MISSING {
            None
        } else {
            Some(v)
        }
    }

    #[inline]
    pub fn raw(&self, idx: usize) -> f64 {
        self.cells[idx]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn set(&mut self, i: usize, j: usize, l: usize, value: f64) {
        let idx = self.index(i, j, l);
        self.cells[idx] = value;
    }
}

/// Per-variable agreement probabilities: `m` for matched pairs, `u` for
/// non-matched pairs, `g` for missing comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mug {
    pub m: f64,
    pub u: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MugProfile {
    per_variable: Vec<Mug>,
}

impl MugProfile {
    pub fn new(per_variable: Vec<Mug>) -> Result<Self> {
        for (l, p) in per_variable.iter().enumerate() {
            for (name, v) in [("m", p.m), ("u", p.u), ("g", p.g)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Config(format!(
                        "variable {l}: {name} = {v} is not a probability"
                    )));
                }
            }
            if p.m + p.g > 1.0 || p.u + p.g > 1.0 {
                return Err(Error::Config(format!(
                    "variable {l}: m+g and u+g must not exceed 1 (m={}, u={}, g={})",
                    p.m, p.u, p.g
                )));
            }
        }
        Ok(MugProfile { per_variable })
    }

    pub fn len(&self) -> usize {
        self.per_variable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_variable.is_empty()
    }

    pub fn var(&self, l: usize) -> Mug {
        self.per_variable[l]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mug> {
        self.per_variable.iter()
    }

    /// Audit CSV: variable, m, u, g.
    pub fn write_csv<W: Write>(&self, names: &[String], writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["variable", "m", "u", "g"])?;
        for (name, p) in names.iter().zip(&self.per_variable) {
            wtr.write_record([name.clone(), format!("{}", p.m), format!("{}", p.u), format!("{}", p.g)])?;
        }
        wtr.flush().map_err(Error::from)?;
        Ok(())
    }
}

/// Per-variable transition probabilities of the chain kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionParams {
    per_variable: Vec<Transition>,
}

impl TransitionParams {
    pub fn new(per_variable: Vec<Transition>) -> Result<Self> {
        for (l, t) in per_variable.iter().enumerate() {
            for (name, v) in [("p1", t.p1), ("p2", t.p2), ("q1", t.q1), ("q2", t.q2), ("q3", t.q3)]
            {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InfeasibleMarginals(format!(
                        "variable {l}: {name} = {v} is not a probability"
                    )));
                }
            }
            if t.q3 != 1.0 {
                return Err(Error::InfeasibleMarginals(format!(
                    "variable {l}: q3 must be 1, got {}",
                    t.q3
                )));
            }
        }
        Ok(TransitionParams { per_variable })
    }

    pub fn len(&self) -> usize {
        self.per_variable.len()
    }

    pub fn var(&self, l: usize) -> Transition {
        self.per_variable[l]
    }
}

/// One accepted link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub x: usize,
    pub y: usize,
    pub weight: f64,
}

/// A 1-1 partial mapping from X records to Y records; X indices not linked
/// are listed in `unlinked_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    n_x: usize,
    links: Vec<Link>,
    /// Y partner per X index, `None` when unlinked.
    partner: Vec<Option<usize>>,
}

impl LinkSet {
    /// Enforces the 1-1 constraint and `weight > cutoff` for every link.
    pub fn new(n_x: usize, links: Vec<Link>, cutoff: f64) -> Result<Self> {
        let mut partner = vec![None; n_x];
        let mut used_y = HashMap::with_capacity(links.len());
        for link in &links {
            if link.x >= n_x {
                return Err(Error::DimensionMismatch(format!(
                    "link x index {} out of range {n_x}",
                    link.x
                )));
            }
            if !(link.weight > cutoff) {
                return Err(Error::Config(format!(
                    "link ({}, {}) weight {} does not exceed cutoff {cutoff}",
                    link.x, link.y, link.weight
                )));
            }
            if partner[link.x].is_some() {
                return Err(Error::Config(format!("X index {} linked twice", link.x)));
            }
            if used_y.insert(link.y, link.x).is_some() {
                return Err(Error::Config(format!("Y index {} linked twice", link.y)));
            }
            partner[link.x] = Some(link.y);
        }
        Ok(LinkSet { n_x, links, partner })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn partner(&self, x: usize) -> Option<usize> {
        self.partner[x]
    }

    pub fn unlinked_x(&self) -> Vec<usize> {
        (0..self.n_x).filter(|&i| self.partner[i].is_none()).collect()
    }

    /// CSV export: x_entity_id, y_entity_id, weight. Id lookup is supplied
    /// by the caller since the set stores block-local indices.
    pub fn write_csv<W: Write>(
        &self,
        writer: W,
        x_id: impl Fn(usize) -> String,
        y_id: impl Fn(usize) -> String,
    ) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["x_entity_id", "y_entity_id", "weight"])?;
        for link in &self.links {
            wtr.write_record([x_id(link.x), y_id(link.y), format!("{}", link.weight)])?;
        }
        wtr.flush().map_err(Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(ids: &[&str]) -> RecordTable {
        let records = ids
            .iter()
            .map(|id| Record {
                entity_id: id.to_string(),
                values: vec![Some(1.0)],
            })
            .collect();
        RecordTable::new(vec!["V".into()], records).unwrap()
    }

    fn ids(t: &RecordTable) -> Vec<&str> {
        t.records().iter().map(|r| r.entity_id.as_str()).collect()
    }

    #[test]
    fn variable_spec_bounds() {
        assert!(VariableSpec::new("BYEAR", 100.0, 2.0).is_ok());
        assert!(VariableSpec::new("BYEAR", 100.0, 0.0).is_ok());
        // tolerance >= t_range/2 breaks theta > 0.5
        assert!(VariableSpec::new("BYEAR", 100.0, 60.0).is_err());
        assert!(VariableSpec::new("BYEAR", 100.0, 50.0).is_err());
        assert!(VariableSpec::new("BYEAR", 0.0, 0.0).is_err());
        assert!(VariableSpec::new("BYEAR", 100.0, -1.0).is_err());
    }

    #[test]
    fn record_table_rejects_duplicate_ids() {
        let records = vec![
            Record { entity_id: "e1".into(), values: vec![Some(1.0)] },
            Record { entity_id: "e1".into(), values: vec![Some(2.0)] },
        ];
        assert!(RecordTable::new(vec!["V".into()], records).is_err());
    }

    #[test]
    fn canonicalize_reorders_y() {
        let pair = AlignedPair::new(table(&["e5", "e2"]), table(&["e2", "e9", "e5"])).unwrap();
        let canon = pair.canonicalize();
        assert_eq!(ids(&canon.file_y), vec!["e5", "e2", "e9"]);
        assert!(canon.is_canonical());
    }

    #[test]
    fn canonicalize_identity_on_diagonal_input() {
        let pair = AlignedPair::new(table(&["a", "b"]), table(&["a", "b", "c"])).unwrap();
        assert!(pair.is_canonical());
        let canon = pair.clone().canonicalize();
        assert_eq!(ids(&canon.file_y), ids(&pair.file_y));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let pair = AlignedPair::new(table(&["e5", "e2"]), table(&["e2", "e9", "e5"])).unwrap();
        let once = pair.canonicalize();
        let twice = once.clone().canonicalize();
        assert_eq!(ids(&once.file_y), ids(&twice.file_y));
        for i in 0..once.file_x.len() {
            assert_eq!(
                once.file_x.records()[i].entity_id,
                once.file_y.records()[i].entity_id
            );
        }
    }

    #[test]
    fn alignment_error_when_match_absent() {
        let err = AlignedPair::new(table(&["e7"]), table(&["e2", "e9"])).unwrap_err();
        assert!(matches!(err, Error::Alignment(_)));
    }

    #[test]
    fn csv_round_trip_preserves_missing() {
        let specs = vec![
            VariableSpec::new("A", 10.0, 0.0).unwrap(),
            VariableSpec::new("B", 10.0, 0.0).unwrap(),
        ];
        let records = vec![
            Record { entity_id: "1".into(), values: vec![Some(3.0), None] },
            Record { entity_id: "2".into(), values: vec![None, Some(7.0)] },
        ];
        let t = RecordTable::new(vec!["A".into(), "B".into()], records).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = RecordTable::read_csv(buf.as_slice(), &specs).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn csv_honors_missing_token() {
        let mut spec = VariableSpec::new("A", 10.0, 0.0).unwrap();
        spec.missing_token = Some("NA".into());
        let data = "RECID,A\n1,NA\n2,4\n";
        let t = RecordTable::read_csv(data.as_bytes(), &[spec]).unwrap();
        assert_eq!(t.value(0, 0), None);
        assert_eq!(t.value(1, 0), Some(4.0));
    }

    #[test]
    fn csv_missing_column_is_config_error() {
        let specs = vec![VariableSpec::new("Z", 10.0, 0.0).unwrap()];
        let err = RecordTable::read_csv("RECID,A\n1,2\n".as_bytes(), &specs).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn matrix_mode_domains() {
        assert!(AgreementMatrix::new(1, 1, 1, 1, MatrixMode::Original, vec![0.5]).is_err());
        assert!(AgreementMatrix::new(1, 1, 1, 1, MatrixMode::Extended, vec![0.5]).is_ok());
        assert!(AgreementMatrix::new(1, 1, 1, 1, MatrixMode::Extended, vec![MISSING]).is_ok());
        assert!(AgreementMatrix::new(1, 1, 1, 1, MatrixMode::Extended, vec![1.5]).is_err());
    }

    #[test]
    fn mug_profile_invariants() {
        assert!(MugProfile::new(vec![Mug { m: 0.9, u: 0.2, g: 0.05 }]).is_ok());
        assert!(MugProfile::new(vec![Mug { m: 0.9, u: 0.2, g: 0.2 }]).is_err());
        assert!(MugProfile::new(vec![Mug { m: 1.1, u: 0.2, g: 0.0 }]).is_err());
    }

    #[test]
    fn link_set_rejects_duplicates_and_cutoff_violations() {
        let ok = LinkSet::new(
            2,
            vec![Link { x: 0, y: 1, weight: 2.0 }, Link { x: 1, y: 0, weight: 1.0 }],
            0.0,
        );
        assert!(ok.is_ok());
        assert!(LinkSet::new(
            2,
            vec![Link { x: 0, y: 1, weight: 2.0 }, Link { x: 0, y: 0, weight: 1.0 }],
            0.0
        )
        .is_err());
        assert!(LinkSet::new(
            2,
            vec![Link { x: 0, y: 1, weight: 2.0 }, Link { x: 1, y: 1, weight: 1.0 }],
            0.0
        )
        .is_err());
        assert!(LinkSet::new(1, vec![Link { x: 0, y: 0, weight: 0.0 }], 0.0).is_err());
    }
}
