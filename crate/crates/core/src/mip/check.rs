//! Brute-force comparison of a linearization against its source model.

use std::collections::BTreeSet;

use super::LinearModel;
use crate::cp::Model;

/// Largest number of integer points [`check_exhaustive`] will visit.
pub const MAX_POINTS: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TooLarge(pub u128);

impl std::fmt::Display for TooLarge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "box has {} points, limit is {MAX_POINTS}", self.0)
    }
}

/// Feasible integer points of `lm`, projected onto the source variables.
pub fn feasible_points(lm: &LinearModel) -> Result<BTreeSet<Vec<i64>>, TooLarge> {
    let mut size: u128 = 1;
    for v in &lm.vars {
        if v.lo > v.hi {
            return Ok(BTreeSet::new());
        }
        size = size.saturating_mul((v.hi - v.lo + 1) as u128);
    }
    if size > MAX_POINTS {
        return Err(TooLarge(size));
    }
    let mut out = BTreeSet::new();
    let mut a: Vec<i64> = lm.vars.iter().map(|v| v.lo).collect();
    loop {
        if lm.rows.iter().all(|r| r.holds(&a)) {
            out.insert(a[..lm.n_orig].to_vec());
        }
        let mut k = 0;
        loop {
            if k == a.len() {
                return Ok(out);
            }
            if a[k] < lm.vars[k].hi {
                a[k] += 1;
                break;
            }
            a[k] = lm.vars[k].lo;
            k += 1;
        }
    }
}

/// Whether the projection of `lm`'s feasible set equals `model`'s solution
/// set. Refuses boxes over [`MAX_POINTS`].
pub fn check_exhaustive(lm: &LinearModel, model: &Model) -> Result<bool, TooLarge> {
    let got = feasible_points(lm)?;
    let vars: Vec<usize> = (0..model.num_vars()).collect();
    Ok(got == model.enumerate(&vars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::Domain;
    use crate::mip::linearize;

    #[test]
    fn refuses_large_boxes() {
        let mut m = Model::new();
        for _ in 0..3 {
            m.new_var(Domain::range(0, 99));
        }
        let lm = linearize(&m).unwrap();
        assert_eq!(check_exhaustive(&lm, &m), Err(TooLarge(1_000_000)));
    }
}
