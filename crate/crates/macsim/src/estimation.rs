//! Estimate the m/u/g agreement probabilities from a block's agreement
//! matrix and derive the chain's transition parameters from them.

use crate::comparison::{agrees, Threshold};
use crate::datamodel::{AgreementMatrix, Mug, MugProfile, Transition, TransitionParams};
use crate::{Error, Result};

/// Count-based m/u/g estimates for one block.
///
/// Matched-pair cells are the leading diagonal `(k, k, l)`, `k < n_matched`;
/// every other cell belongs to a non-matched pair. A missing cell never
/// agrees but stays in the m/u denominators; `g` is the missing fraction
/// over all cells of the variable.
pub fn estimate_mug(matrix: &AgreementMatrix, theta: &Threshold) -> Result<MugProfile> {
    if theta.len() != matrix.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} variables",
            theta.len(),
            matrix.n_vars()
        )));
    }
    let n_matched = matrix.n_matched();
    if n_matched == 0 {
        return Err(Error::Estimation(
            "block has no matched pairs; m is undefined".into(),
        ));
    }
    let total = matrix.n_x() * matrix.n_y();
    let n_offdiag = total - n_matched;
    if n_offdiag == 0 {
        return Err(Error::Estimation(
            "block has no non-matched pairs; u is undefined".into(),
        ));
    }

    let mut per_variable = Vec::with_capacity(matrix.n_vars());
    for l in 0..matrix.n_vars() {
        let th = theta.var(l);
        let mut diag_agree = 0usize;
        let mut diag_missing = 0usize;
        let mut off_agree = 0usize;
        let mut missing = 0usize;
        for i in 0..matrix.n_x() {
            for j in 0..matrix.n_y() {
                let on_diag = i == j && i < n_matched;
                match matrix.get(i, j, l) {
                    None => {
                        missing += 1;
                        if on_diag {
                            diag_missing += 1;
                        }
                    }
                    Some(v) => {
                        if agrees(v, th) {
                            if on_diag {
                                diag_agree += 1;
                            } else {
                                off_agree += 1;
                            }
                        }
                    }
                }
            }
        }
        if diag_missing == n_matched {
            return Err(Error::Estimation(format!(
                "variable {l}: every matched-pair cell is missing; m is undefined"
            )));
        }
        per_variable.push(Mug {
            m: diag_agree as f64 / n_matched as f64,
            u: off_agree as f64 / n_offdiag as f64,
            g: missing as f64 / total as f64,
        });
    }
    // The counting conventions can land on m+g > 1 when missingness piles
    // up off the diagonal; such a block carries no usable profile.
    MugProfile::new(per_variable).map_err(|e| Error::Estimation(format!("estimated profile invalid: {e}")))
}

/// Replace boundary estimates that break the weight and parameter formulas.
///
/// `eps = 1 / (2 * n_offdiag)` (half a count): u = 0 becomes eps and m + g
/// pinned at 1 is pulled back to 1 - g - eps. The symmetric degeneracies
/// (m = 0, u + g = 1) get the same treatment; a blocking variable always
/// agrees inside its own block, which lands u + g at 1.
pub fn smooth_profile(profile: &MugProfile, n_offdiag: usize) -> Result<MugProfile> {
    if n_offdiag == 0 {
        return Err(Error::Estimation(
            "cannot smooth a profile from a block with no non-matched pairs".into(),
        ));
    }
    let eps = 1.0 / (2.0 * n_offdiag as f64);
    let mut out = Vec::with_capacity(profile.len());
    for (l, p) in profile.iter().enumerate() {
        if p.g > 1.0 - 2.0 * eps {
            return Err(Error::InfeasibleMarginals(format!(
                "variable {l}: missing fraction {} leaves no room for agreement probabilities",
                p.g
            )));
        }
        // Only genuinely degenerate values move; interior estimates pass
        // through bit-identically.
        let fix = |v: f64| {
            if v == 0.0 {
                eps
            } else if v + p.g >= 1.0 {
                1.0 - p.g - eps
            } else {
                v
            }
        };
        out.push(Mug {
            m: fix(p.m),
            u: fix(p.u),
            g: p.g,
        });
    }
    MugProfile::new(out)
}

const BOUNDARY_SLACK: f64 = 1e-12;

fn unit_prob(x: f64, what: &str, l: usize) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else if x > 1.0 && x <= 1.0 + BOUNDARY_SLACK {
        Ok(1.0)
    } else if x < 0.0 && x >= -BOUNDARY_SLACK {
        Ok(0.0)
    } else {
        Err(Error::InfeasibleMarginals(format!(
            "variable {l}: {what} = {x} is outside [0,1]"
        )))
    }
}

/// Transition probabilities maintaining the m/u/g marginals:
///
/// ```text
/// u <= (1-g)/2:  p1 = (1-m-g)/m          q1 = q2 = u/(1-u-g)
/// otherwise:     p1 = (1-m-g)(1-u-g)     q1 = q2 = 1
///                     / (m(3u+g-1))
/// always:        p2 = p1 * m/(1-m-g)     q3 = 1
/// ```
///
/// In the first branch `p2` reduces algebraically to exactly 1, and in the
/// second to `(1-u-g)/(3u+g-1)`; both are computed in that reduced form.
pub fn transition_params(mug: &MugProfile) -> Result<TransitionParams> {
    let mut out = Vec::with_capacity(mug.len());
    for (l, p) in mug.iter().enumerate() {
        let (m, u, g) = (p.m, p.u, p.g);
        if !(m > 0.0) || !(m + g < 1.0) || !(u + g < 1.0) {
            return Err(Error::InfeasibleMarginals(format!(
                "variable {l}: profile (m={m}, u={u}, g={g}) must be smoothed first"
            )));
        }
        let (p1, p2, q) = if u <= 0.5 * (1.0 - g) {
            let p1 = (1.0 - m - g) / m;
            (p1, 1.0, u / (1.0 - u - g))
        } else {
            let denom = 3.0 * u + g - 1.0;
            if !(denom > 0.0) {
                return Err(Error::InfeasibleMarginals(format!(
                    "variable {l}: 3u+g-1 = {denom} is not positive"
                )));
            }
            let p1 = (1.0 - m - g) * (1.0 - u - g) / (m * denom);
            let p2 = (1.0 - u - g) / denom;
            (p1, p2, 1.0)
        };
        out.push(Transition {
            p1: unit_prob(p1, "p1", l)?,
            p2: unit_prob(p2, "p2", l)?,
            q1: unit_prob(q, "q1", l)?,
            q2: unit_prob(q, "q2", l)?,
            q3: 1.0,
        });
    }
    TransitionParams::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{AgreementMatrix, MatrixMode, MISSING};
    use approx::assert_relative_eq;

    fn matrix_2x2(cells: Vec<f64>) -> AgreementMatrix {
        AgreementMatrix::new(2, 2, 1, 2, MatrixMode::Extended, cells).unwrap()
    }

    #[test]
    fn estimate_exhaustive_2x2() {
        // diagonal agrees, off-diagonal disagrees, nothing missing
        let m = matrix_2x2(vec![1.0, 0.0, 0.0, 1.0]);
        let prof = estimate_mug(&m, &Threshold::exact(1)).unwrap();
        assert_eq!(prof.var(0), crate::datamodel::Mug { m: 1.0, u: 0.0, g: 0.0 });
    }

    #[test]
    fn estimate_counts_one_missing_cell() {
        // the missing matched-pair cell counts against m and toward g
        let m = matrix_2x2(vec![MISSING, 0.0, 0.0, 1.0]);
        let prof = estimate_mug(&m, &Threshold::exact(1)).unwrap();
        assert_eq!(prof.var(0).g, 0.25);
        assert_eq!(prof.var(0).m, 0.5);
        assert_eq!(prof.var(0).u, 0.0);
    }

    #[test]
    fn estimate_rejects_profile_outside_trichotomy() {
        // diagonal fully agrees while half of all cells are missing:
        // m + g = 1.5 cannot feed the weight formulas
        let m = matrix_2x2(vec![1.0, MISSING, MISSING, 1.0]);
        assert!(matches!(
            estimate_mug(&m, &Threshold::exact(1)),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn estimate_errors_when_all_cells_missing() {
        let m = matrix_2x2(vec![MISSING; 4]);
        assert!(matches!(
            estimate_mug(&m, &Threshold::exact(1)),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn estimate_errors_without_matched_pairs() {
        let m = AgreementMatrix::new(1, 2, 1, 0, MatrixMode::Extended, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            estimate_mug(&m, &Threshold::exact(1)),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn estimate_errors_without_offdiagonal_pairs() {
        let m = AgreementMatrix::new(1, 1, 1, 1, MatrixMode::Extended, vec![1.0]).unwrap();
        assert!(matches!(
            estimate_mug(&m, &Threshold::exact(1)),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn estimate_is_reproduced_by_independent_recount() {
        // 3x4x2 fixture with a deliberate mix of agree/disagree/missing
        let n_x = 3;
        let n_y = 4;
        let vals = [
            [0.99, 0.2, 1.0, MISSING],
            [0.0, 1.0, MISSING, 0.97],
            [1.0, 1.0, 0.5, 0.98],
        ];
        let mut cells = Vec::new();
        for i in 0..n_x {
            for j in 0..n_y {
                cells.push(vals[i][j]);
                cells.push(vals[j % 3][i]); // second variable, reshuffled
            }
        }
        let m = AgreementMatrix::new(n_x, n_y, 2, 3, MatrixMode::Extended, cells).unwrap();
        let theta = Threshold::exact(2);
        let prof = estimate_mug(&m, &theta).unwrap();

        for l in 0..2 {
            let mut diag_agree = 0;
            let mut off_agree = 0;
            let mut missing = 0;
            for i in 0..n_x {
                for j in 0..n_y {
                    match m.get(i, j, l) {
                        None => missing += 1,
                        Some(v) if v >= 1.0 => {
                            if i == j {
                                diag_agree += 1;
                            } else {
                                off_agree += 1;
                            }
                        }
                        Some(_) => {}
                    }
                }
            }
            let p = prof.var(l);
            assert_eq!(p.m, diag_agree as f64 / 3.0);
            assert_eq!(p.u, off_agree as f64 / 9.0);
            assert_eq!(p.g, missing as f64 / 12.0);
        }
    }

    #[test]
    fn smoothing_pulls_boundaries_inside() {
        let prof = MugProfile::new(vec![Mug { m: 1.0, u: 0.0, g: 0.0 }]).unwrap();
        let s = smooth_profile(&prof, 10).unwrap();
        let eps = 1.0 / 20.0;
        assert_eq!(s.var(0).m, 1.0 - eps);
        assert_eq!(s.var(0).u, eps);
        // interior values pass through untouched
        let prof = MugProfile::new(vec![Mug { m: 0.9, u: 0.2, g: 0.05 }]).unwrap();
        let s = smooth_profile(&prof, 10).unwrap();
        assert_eq!(s.var(0), Mug { m: 0.9, u: 0.2, g: 0.05 });
    }

    #[test]
    fn params_first_branch() {
        let mug = MugProfile::new(vec![Mug { m: 0.9, u: 0.2, g: 0.05 }]).unwrap();
        let t = transition_params(&mug).unwrap().var(0);
        assert_relative_eq!(t.p1, 0.05 / 0.9, max_relative = 1e-12);
        assert_eq!(t.p2, 1.0);
        assert_relative_eq!(t.q1, 0.2 / 0.75, max_relative = 1e-12);
        assert_eq!(t.q1, t.q2);
        assert_eq!(t.q3, 1.0);
    }

    #[test]
    fn params_second_branch() {
        let mug = MugProfile::new(vec![Mug { m: 0.9, u: 0.6, g: 0.0 }]).unwrap();
        let t = transition_params(&mug).unwrap().var(0);
        assert_relative_eq!(t.p1, 0.1 * 0.4 / (0.9 * 0.8), max_relative = 1e-12);
        assert_relative_eq!(t.p2, 0.5, max_relative = 1e-12);
        assert_eq!(t.q1, 1.0);
        assert_eq!(t.q2, 1.0);
    }

    #[test]
    fn params_boundary_p1_equal_one() {
        let mug = MugProfile::new(vec![Mug { m: 0.5, u: 0.25, g: 0.0 }]).unwrap();
        let t = transition_params(&mug).unwrap().var(0);
        assert_eq!(t.p1, 1.0);
        assert_eq!(t.p2, 1.0);
        assert_relative_eq!(t.q1, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn params_infeasible_when_m_small() {
        // p1 = (1-m)/m = 4 > 1
        let mug = MugProfile::new(vec![Mug { m: 0.2, u: 0.05, g: 0.0 }]).unwrap();
        assert!(matches!(
            transition_params(&mug),
            Err(Error::InfeasibleMarginals(_))
        ));
    }

    #[test]
    fn params_require_smoothed_input() {
        let mug = MugProfile::new(vec![Mug { m: 1.0, u: 0.2, g: 0.0 }]).unwrap();
        assert!(transition_params(&mug).is_err());
        let mug = MugProfile::new(vec![Mug { m: 0.85, u: 0.0, g: 0.1 }]).unwrap();
        // u = 0 itself is fine for the parameters (q1 = 0), not for weights
        assert!(transition_params(&mug).is_ok());
    }

    #[test]
    fn stationarity_identity_across_grid() {
        let mut checked = 0;
        for gi in 0..6 {
            let g = gi as f64 * 0.05;
            for mi in 0..30 {
                let m = 0.5 + mi as f64 * 0.016;
                if m + g >= 1.0 || m < (1.0 - g) / 2.0 {
                    continue;
                }
                for ui in 1..30 {
                    let u = ui as f64 * 0.03;
                    if u + g >= 1.0 {
                        continue;
                    }
                    let mug = MugProfile::new(vec![Mug { m, u, g }]).unwrap();
                    let t = match transition_params(&mug) {
                        Ok(t) => t.var(0),
                        Err(_) => continue,
                    };
                    if u <= 0.5 * (1.0 - g) {
                        assert_eq!(t.p2, 1.0, "p2 must be exactly 1 at m={m} u={u} g={g}");
                    }
                    let lhs = t.p2 / (t.p1 + t.p2);
                    let rhs = m / (1.0 - g);
                    assert!((lhs - rhs).abs() < 1e-12, "stationarity broke at m={m} u={u} g={g}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 200, "grid too sparse: {checked}");
    }
}
