use std::fmt;

/// Finite integer domain as sorted, disjoint, non-adjacent closed intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Domain {
    iv: Vec<(i64, i64)>,
}

impl Domain {
    pub fn empty() -> Self {
        Domain { iv: Vec::new() }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        if lo > hi {
            Domain::empty()
        } else {
            Domain { iv: vec![(lo, hi)] }
        }
    }

    pub fn singleton(v: i64) -> Self {
        Domain::range(v, v)
    }

    pub fn from_values<I: IntoIterator<Item = i64>>(vals: I) -> Self {
        let mut vs: Vec<i64> = vals.into_iter().collect();
        vs.sort_unstable();
        vs.dedup();
        let mut iv: Vec<(i64, i64)> = Vec::new();
        for v in vs {
            match iv.last_mut() {
                Some((_, hi)) if *hi + 1 == v => *hi = v,
                _ => iv.push((v, v)),
            }
        }
        Domain { iv }
    }

    pub fn intervals(&self) -> &[(i64, i64)] {
        &self.iv
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn min(&self) -> i64 {
        self.iv.first().map(|p| p.0).expect("min of an empty domain")
    }

    pub fn max(&self) -> i64 {
        self.iv.last().map(|p| p.1).expect("max of an empty domain")
    }

    pub fn size(&self) -> u64 {
        self.iv.iter().map(|&(a, b)| (b - a) as u64 + 1).sum()
    }

    /// The value of a singleton domain.
    pub fn fixed(&self) -> Option<i64> {
        match self.iv.as_slice() {
            [(a, b)] if a == b => Some(*a),
            _ => None,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self.iv.binary_search_by(|&(a, b)| {
            if b < v {
                std::cmp::Ordering::Less
            } else if a > v {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(_) => true,
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.iv.iter().flat_map(|&(a, b)| a..=b)
    }

    /// Smallest value strictly greater than `v`.
    pub fn next_after(&self, v: i64) -> Option<i64> {
        for &(a, b) in &self.iv {
            if b > v {
                return Some(a.max(v + 1));
            }
        }
        None
    }

    pub fn intersect(&self, other: &Domain) -> Domain {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.iv.len() && j < other.iv.len() {
            let (a1, b1) = self.iv[i];
            let (a2, b2) = other.iv[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Domain { iv: out }
    }

    pub fn union(&self, other: &Domain) -> Domain {
        let mut all: Vec<(i64, i64)> = self.iv.iter().chain(other.iv.iter()).copied().collect();
        all.sort_unstable();
        let mut out: Vec<(i64, i64)> = Vec::with_capacity(all.len());
        for (a, b) in all {
            match out.last_mut() {
                Some((_, hi)) if a <= hi.saturating_add(1) => *hi = (*hi).max(b),
                _ => out.push((a, b)),
            }
        }
        Domain { iv: out }
    }

    /// Values of `self` not in `other`.
    pub fn subtract(&self, other: &Domain) -> Domain {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a, b) in &self.iv {
            let mut lo = a;
            while j < other.iv.len() && other.iv[j].1 < lo {
                j += 1;
            }
            let mut k = j;
            while lo <= b {
                if k >= other.iv.len() || other.iv[k].0 > b {
                    out.push((lo, b));
                    break;
                }
                let (c, d) = other.iv[k];
                if c > lo {
                    out.push((lo, c - 1));
                }
                if d >= b {
                    break;
                }
                lo = d + 1;
                k += 1;
            }
        }
        Domain { iv: out }
    }

    /// Restricts to `lo..hi`; returns whether anything was removed.
    pub fn restrict(&mut self, lo: i64, hi: i64) -> bool {
        if self.iv.is_empty() {
            return false;
        }
        if lo <= self.min() && hi >= self.max() {
            return false;
        }
        *self = self.intersect(&Domain::range(lo, hi));
        true
    }

    fn find(&self, v: i64) -> Result<usize, usize> {
        self.iv.binary_search_by(|&(a, b)| {
            if b < v {
                std::cmp::Ordering::Less
            } else if a > v {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        })
    }

    /// Inserts `v`; returns whether it was absent.
    pub fn insert(&mut self, v: i64) -> bool {
        let i = match self.find(v) {
            Ok(_) => return false,
            Err(i) => i,
        };
        let joins_left = i > 0 && self.iv[i - 1].1 == v - 1;
        let joins_right = i < self.iv.len() && self.iv[i].0 == v + 1;
        match (joins_left, joins_right) {
            (true, true) => {
                self.iv[i - 1].1 = self.iv[i].1;
                self.iv.remove(i);
            }
            (true, false) => self.iv[i - 1].1 = v,
            (false, true) => self.iv[i].0 = v,
            (false, false) => self.iv.insert(i, (v, v)),
        }
        true
    }

    /// Removes `v`; returns whether it was present.
    pub fn remove(&mut self, v: i64) -> bool {
        let Ok(i) = self.find(v) else {
            return false;
        };
        let (a, b) = self.iv[i];
        match (a == v, b == v) {
            (true, true) => {
                self.iv.remove(i);
            }
            (true, false) => self.iv[i].0 = v + 1,
            (false, true) => self.iv[i].1 = v - 1,
            (false, false) => {
                self.iv[i].1 = v - 1;
                self.iv.insert(i + 1, (v + 1, b));
            }
        }
        true
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, &(a, b)) in self.iv.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if a == b {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}..{b}")?;
            }
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(d: &Domain) -> BTreeSet<i64> {
        d.iter().collect()
    }

    #[test]
    fn basics() {
        let mut d = Domain::range(1, 5);
        assert!(d.remove(3));
        assert_eq!(d.intervals(), &[(1, 2), (4, 5)]);
        assert_eq!(d.size(), 4);
        assert!(!d.contains(3));
        assert_eq!(d.next_after(2), Some(4));
        assert_eq!(d.to_string(), "{1..2,4..5}");
        assert!(d.restrict(2, 4));
        assert_eq!(set(&d), BTreeSet::from([2, 4]));
    }

    #[test]
    fn intersect_narrows() {
        let a = Domain::range(1, 3);
        let b = Domain::range(2, 5);
        assert_eq!(set(&a.intersect(&b)), BTreeSet::from([2, 3]));
    }

    proptest! {
        #[test]
        fn set_ops_match_btreeset(
            xs in proptest::collection::vec(-20i64..20, 0..15),
            ys in proptest::collection::vec(-20i64..20, 0..15),
        ) {
            let a = Domain::from_values(xs.iter().copied());
            let b = Domain::from_values(ys.iter().copied());
            let sa: BTreeSet<i64> = xs.iter().copied().collect();
            let sb: BTreeSet<i64> = ys.iter().copied().collect();
            prop_assert_eq!(set(&a.intersect(&b)), &sa & &sb);
            prop_assert_eq!(set(&a.union(&b)), &sa | &sb);
            prop_assert_eq!(set(&a.subtract(&b)), &sa - &sb);
            prop_assert_eq!(a.size() as usize, sa.len());
            for v in -21..21 {
                prop_assert_eq!(a.contains(v), sa.contains(&v));
            }
        }
    }

    proptest! {
        #[test]
        fn remove_then_insert_restores(vals in proptest::collection::vec(-20i64..20, 0..30), ops in proptest::collection::vec(-22i64..22, 0..30)) {
            let orig = Domain::from_values(vals);
            let mut d = orig.clone();
            let mut removed = Vec::new();
            for &x in &ops {
                if d.remove(x) {
                    removed.push(x);
                }
                prop_assert!(!d.contains(x));
            }
            for &x in removed.iter().rev() {
                prop_assert!(d.insert(x));
            }
            prop_assert_eq!(d, orig);
        }
    }
}
