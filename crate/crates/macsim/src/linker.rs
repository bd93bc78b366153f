//! Fellegi-Sunter field weights, composite pair weights and the greedy 1-1
//! linking method.

use crate::comparison::{agrees, Threshold};
use crate::datamodel::{AgreementMatrix, Link, LinkSet, Mug, MugProfile};
use crate::{Error, Result};

/// Composite weight per (X record, Y record) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_x: usize,
    n_y: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(n_x: usize, n_y: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n_x * n_y {
            return Err(Error::DimensionMismatch(format!(
                "expected {} weights, got {}",
                n_x * n_y,
                weights.len()
            )));
        }
        Ok(WeightMatrix { n_x, n_y, weights })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n_y + j]
    }
}

/// Per-field agreement and disagreement log-likelihood-ratio weights. The
/// weights use natural logarithms; the cutoff has to be chosen on the same
/// scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWeights {
    pub agree: f64,
    pub disagree: f64,
}

/// `ln(m/u)` on agreement, `ln((1-m-g)/(1-u-g))` on disagreement. Requires a
/// smoothed profile so both ratios are positive and finite.
pub fn field_weights(mug: Mug) -> Result<FieldWeights> {
    let Mug { m, u, g } = mug;
    if !(m > 0.0 && u > 0.0 && m + g < 1.0 && u + g < 1.0) {
        return Err(Error::Estimation(format!(
            "degenerate profile (m={m}, u={u}, g={g}) must be smoothed before weighting"
        )));
    }
    Ok(FieldWeights {
        agree: (m / u).ln(),
        disagree: ((1.0 - m - g) / (1.0 - u - g)).ln(),
    })
}

/// Weight of one cell: agreement weight when the value meets the threshold,
/// disagreement weight otherwise, exactly 0 when the comparison is missing.
pub fn field_weight(cell: Option<f64>, theta: f64, mug: Mug) -> Result<f64> {
    let w = field_weights(mug)?;
    Ok(match cell {
        None => 0.0,
        Some(v) => {
            if agrees(v, theta) {
                w.agree
            } else {
                w.disagree
            }
        }
    })
}

/// Composite weights: the per-variable field weights summed under
/// conditional independence.
pub fn composite_weights(
    matrix: &AgreementMatrix,
    theta: &Threshold,
    mug: &MugProfile,
) -> Result<WeightMatrix> {
    if theta.len() != matrix.n_vars() || mug.len() != matrix.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} variables, got {} thresholds and {} profiles",
            matrix.n_vars(),
            theta.len(),
            mug.len()
        )));
    }
    let per_var: Vec<FieldWeights> = (0..mug.len())
        .map(|l| field_weights(mug.var(l)))
        .collect::<Result<_>>()?;

    let mut weights = Vec::with_capacity(matrix.n_x() * matrix.n_y());
    for i in 0..matrix.n_x() {
        for j in 0..matrix.n_y() {
            let mut w = 0.0;
            for (l, fw) in per_var.iter().enumerate() {
                w += match matrix.get(i, j, l) {
                    None => 0.0,
                    Some(v) => {
                        if agrees(v, theta.var(l)) {
                            fw.agree
                        } else {
                            fw.disagree
                        }
                    }
                };
            }
            weights.push(w);
        }
    }
    WeightMatrix::new(matrix.n_x(), matrix.n_y(), weights)
}

/// Greedy 1-1 linking: scan the pairs in descending weight order (ties
/// broken by ascending `(x, y)`), accept a pair when its weight exceeds the
/// cutoff and neither record is taken yet.
pub fn greedy_link(weights: &WeightMatrix, cutoff: f64) -> Result<LinkSet> {
    let mut order: Vec<(usize, usize)> = Vec::new();
    for i in 0..weights.n_x() {
        for j in 0..weights.n_y() {
            let w = weights.get(i, j);
            if !w.is_finite() {
                return Err(Error::Config(format!("non-finite weight at ({i}, {j}): {w}")));
            }
            if w > cutoff {
                order.push((i, j));
            }
        }
    }
    order.sort_unstable_by(|&(ai, aj), &(bi, bj)| {
        weights
            .get(bi, bj)
            .total_cmp(&weights.get(ai, aj))
            .then(ai.cmp(&bi))
            .then(aj.cmp(&bj))
    });

    let mut used_x = vec![false; weights.n_x()];
    let mut used_y = vec![false; weights.n_y()];
    let mut links = Vec::new();
    for (i, j) in order {
        if used_x[i] || used_y[j] {
            continue;
        }
        used_x[i] = true;
        used_y[j] = true;
        links.push(Link { x: i, y: j, weight: weights.get(i, j) });
    }
    LinkSet::new(weights.n_x(), links, cutoff)
}
