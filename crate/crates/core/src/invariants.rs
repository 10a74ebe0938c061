//! Per-branch and pairwise invariants of the resolution.
//!
//! Everything here is computed from chains inside the constellation: the
//! first two maximal contact values, the free-point count `l0`, terminal
//! satellite points, contact pairs, separation of branch pairs, and the
//! point sets that drive the lct formula. A generic curvette at a point
//! is handled by the same code as a real branch, through [`ChainData`].

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::constellation::{Constellation, CurveSpec, IntVector, PointId};
use crate::error::{Error, Result};

/// The invariants of a single branch (or of a generic curvette).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchInvariants {
    pub beta0: BigInt,
    pub beta1: BigInt,
    /// gcd of the two maximal contact values.
    pub e1: BigInt,
    pub l0: usize,
    pub terminal_satellites: Vec<PointId>,
    /// First terminal satellite point, absent exactly for smooth branches.
    pub t_min: Option<PointId>,
    pub smooth: bool,
}

/// Contact pair `(q, c)`: shared terminal satellite points, and shared
/// free points past the last of them (all shared free points when none).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContactPair {
    pub q: usize,
    pub c: usize,
}

/// The three point sets of the formula: first terminal satellites, initial
/// separating points, and the points carrying all lct candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSets {
    pub t: BTreeSet<PointId>,
    pub s: BTreeSet<PointId>,
    pub f: BTreeSet<PointId>,
}

/// Partition of the branch indices by their contact with a curvette.
/// `j41`/`j42` are present exactly when the curvette is smooth.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JPartition {
    pub j1: Vec<usize>,
    pub j2: Vec<usize>,
    pub j3: Vec<usize>,
    pub j4: Vec<usize>,
    pub j41: Option<Vec<usize>>,
    pub j42: Option<Vec<usize>>,
}

/// Chain-level data shared by branches and virtual curvettes.
#[derive(Debug, Clone)]
pub struct ChainData {
    pub at: PointId,
    pub chain: Vec<PointId>,
    pub mult: IntVector,
    pub invariants: BranchInvariants,
}

impl ChainData {
    pub fn ratio_cmp(&self, other: &ChainData) -> std::cmp::Ordering {
        // beta1/beta0 compared by cross multiplication
        let lhs = &self.invariants.beta1 * &other.invariants.beta0;
        let rhs = &other.invariants.beta1 * &self.invariants.beta0;
        lhs.cmp(&rhs)
    }

    pub fn is_terminal_satellite(&self, p: PointId) -> bool {
        self.invariants.terminal_satellites.contains(&p)
    }
}

/// Computes the full chain data of a generic curvette at `at`.
pub fn chain_data(c: &Constellation, at: PointId) -> Result<ChainData> {
    if !c.contains(at) {
        return Err(Error::InvalidPoint(at.index()));
    }
    let chain = c.chain(at);
    let mult = c.curvette_multiplicities(at)?;
    let root = PointId::new(1);
    let beta0 = mult[root].clone();
    let smooth = beta0.is_one();

    let mut terminal_satellites = Vec::new();
    for (idx, &p) in chain.iter().enumerate() {
        if !c.is_satellite(p) {
            continue;
        }
        match chain.get(idx + 1) {
            Some(&next) if c.is_satellite(next) => {}
            // followed by a free point, or by nothing: the curvette
            // continues at a generic free point of the last divisor
            _ => terminal_satellites.push(p),
        }
    }
    let t_min = terminal_satellites.first().copied();
    debug_assert_eq!(smooth, terminal_satellites.is_empty());

    let l0 = if smooth {
        chain.iter().filter(|&&p| c.is_free(p)).count()
    } else {
        let run = chain.iter().take_while(|&&p| c.is_free(p)).count();
        run - 1
    };

    let beta1 = if smooth {
        BigInt::from(chain.len())
    } else {
        let t = t_min.expect("singular chain has a terminal satellite");
        let row_t = c.curvette_multiplicities(t)?;
        let value = row_t.dot(&mult);
        let (beta1, rem) = value.div_rem(&row_t[root]);
        assert!(
            rem.is_zero(),
            "non-integral beta1 at {at}: corrupted constellation"
        );
        beta1
    };
    let e1 = beta0.gcd(&beta1);

    Ok(ChainData {
        at,
        chain,
        mult,
        invariants: BranchInvariants {
            beta0,
            beta1,
            e1,
            l0,
            terminal_satellites,
            t_min,
            smooth,
        },
    })
}

/// Chain data of branch `i`.
pub fn branch_data(spec: &CurveSpec, i: usize) -> Result<ChainData> {
    spec.check_branch(i)?;
    chain_data(&spec.constellation, spec.branches[i].at)
}

pub fn branch_invariants(spec: &CurveSpec, i: usize) -> Result<BranchInvariants> {
    Ok(branch_data(spec, i)?.invariants)
}

pub fn terminal_satellites(spec: &CurveSpec, i: usize) -> Result<Vec<PointId>> {
    Ok(branch_data(spec, i)?.invariants.terminal_satellites)
}

pub fn l0(spec: &CurveSpec, i: usize) -> Result<usize> {
    Ok(branch_data(spec, i)?.invariants.l0)
}

/// The first two maximal contact values of branch `i`.
pub fn beta(spec: &CurveSpec, i: usize) -> Result<(BigInt, BigInt)> {
    let inv = branch_invariants(spec, i)?;
    Ok((inv.beta0, inv.beta1))
}

/// Contact pair of two chains sharing the constellation.
pub fn contact_pair_of(c: &Constellation, a: &ChainData, b: &ChainData) -> ContactPair {
    let in_b: BTreeSet<PointId> = b.chain.iter().copied().collect();
    let common: Vec<PointId> = a
        .chain
        .iter()
        .copied()
        .filter(|p| in_b.contains(p))
        .collect();

    let shared_terminal: Vec<PointId> = common
        .iter()
        .copied()
        .filter(|&p| a.is_terminal_satellite(p) && b.is_terminal_satellite(p))
        .collect();
    let q = shared_terminal.len();

    let c_count = if let Some(&last) = shared_terminal.last() {
        let last_pos = common
            .iter()
            .position(|&p| p == last)
            .expect("last shared terminal satellite lies on the common chain");
        common[last_pos + 1..]
            .iter()
            .filter(|&&p| c.is_free(p))
            .count()
    } else {
        common.iter().filter(|&&p| c.is_free(p)).count()
    };

    ContactPair { q, c: c_count }
}

pub fn contact_pair(spec: &CurveSpec, i: usize, s: usize) -> Result<ContactPair> {
    if i == s {
        return Err(Error::SameBranch);
    }
    let a = branch_data(spec, i)?;
    let b = branch_data(spec, s)?;
    Ok(contact_pair_of(&spec.constellation, &a, &b))
}

/// Separation point of two distinct branches (the maximal common point)
/// and whether they are freely separated there. Branches sharing their
/// maximal point separate at that point: they meet its exceptional divisor
/// at distinct free points.
pub fn separation(spec: &CurveSpec, i1: usize, i2: usize) -> Result<(PointId, bool)> {
    if i1 == i2 {
        return Err(Error::SameBranch);
    }
    let a = branch_data(spec, i1)?;
    let b = branch_data(spec, i2)?;
    let in_b: BTreeSet<PointId> = b.chain.iter().copied().collect();
    let point = *a
        .chain
        .iter()
        .rfind(|p| in_b.contains(p))
        .expect("chains share at least the root");
    let pair = contact_pair_of(&spec.constellation, &a, &b);
    let freely = pair.q == 0 && pair.c <= a.invariants.l0.min(b.invariants.l0);
    Ok((point, freely))
}

/// The sets `T` (first terminal satellites), `S` (initial separating
/// points) and `F` (union of chains up to the `T`-points plus the chains
/// of smooth branches).
pub fn point_sets(spec: &CurveSpec) -> Result<PointSets> {
    let r = spec.branch_count();
    let data: Vec<ChainData> = (0..r)
        .map(|i| branch_data(spec, i))
        .collect::<Result<_>>()?;

    let mut t = BTreeSet::new();
    let mut f = BTreeSet::new();
    for d in &data {
        match d.invariants.t_min {
            Some(ti) => {
                t.insert(ti);
                f.extend(spec.constellation.chain(ti));
            }
            None => f.extend(d.chain.iter().copied()),
        }
    }

    let mut s = BTreeSet::new();
    for i1 in 0..r {
        for i2 in i1 + 1..r {
            let in_b: BTreeSet<PointId> = data[i2].chain.iter().copied().collect();
            let point = *data[i1]
                .chain
                .iter()
                .rfind(|p| in_b.contains(p))
                .expect("chains share the root");
            let pair = contact_pair_of(&spec.constellation, &data[i1], &data[i2]);
            if pair.q == 0 && pair.c <= data[i1].invariants.l0.min(data[i2].invariants.l0) {
                debug_assert!(spec.constellation.is_free(point));
                s.insert(point);
            }
        }
    }

    debug_assert!(t.is_disjoint(&s));
    debug_assert!(t.union(&s).all(|p| f.contains(p)));
    Ok(PointSets { t, s, f })
}

/// Classifies every branch by its contact pair with a generic curvette at
/// `j`, which must lie in `F`. A curvette at a free point of `F` is
/// smooth, and for it the classes `J2` and `J3` are empty.
pub fn j_partition(spec: &CurveSpec, sets: &PointSets, j: PointId) -> Result<JPartition> {
    if !sets.f.contains(&j) {
        return Err(Error::PointNotInF(j.index()));
    }
    let phi = chain_data(&spec.constellation, j)?;
    let mut part = JPartition::default();
    if phi.invariants.smooth {
        part.j41 = Some(Vec::new());
        part.j42 = Some(Vec::new());
    }

    for s in 0..spec.branch_count() {
        let fs = branch_data(spec, s)?;
        let pair = contact_pair_of(&spec.constellation, &phi, &fs);
        if pair.q >= 1 {
            assert_eq!(
                pair.q, 1,
                "curvette at a point of F has one terminal satellite"
            );
            part.j3.push(s);
            continue;
        }
        let l_phi = phi.invariants.l0;
        let l_s = fs.invariants.l0;
        if pair.c <= l_phi.min(l_s) {
            part.j4.push(s);
            if phi.invariants.smooth {
                if pair.c < l_phi {
                    part.j41.as_mut().unwrap().push(s);
                } else {
                    assert!(pair.c == l_phi && l_phi <= l_s);
                    part.j42.as_mut().unwrap().push(s);
                }
            }
            continue;
        }
        assert_eq!(
            pair.c,
            (l_phi + 1).min(l_s + 1),
            "contact of {} with branch {} escapes the case analysis",
            j,
            s
        );
        match phi.ratio_cmp(&fs) {
            std::cmp::Ordering::Greater => part.j1.push(s),
            std::cmp::Ordering::Less => part.j2.push(s),
            std::cmp::Ordering::Equal => {
                unreachable!("equal contact ratios with no shared terminal satellite")
            }
        }
    }

    if phi.invariants.smooth {
        debug_assert!(part.j2.is_empty() && part.j3.is_empty());
    }
    Ok(part)
}
