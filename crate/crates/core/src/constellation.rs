//! Constellations of infinitely near points with their proximity structure.
//!
//! A constellation records the centers of a composition of point blowups:
//! every point except the root sits on the exceptional divisor of its
//! parent, and a *satellite* point additionally sits on the strict
//! transform of an earlier exceptional divisor. The proximity matrix is
//! unit lower triangular with `-1` at each proximity, and its inverse
//! carries all multiplicity data: row `j` lists the multiplicities of a
//! generic curvette through point `j`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Index of a blowup center, 1-based in blowup order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(usize);

impl PointId {
    pub fn new(index: usize) -> PointId {
        PointId(index)
    }

    /// 1-based index as it appears in input files and reports.
    pub fn index(self) -> usize {
        self.0
    }

    /// 0-based position into point-indexed vectors.
    pub fn pos(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// One blowup center: its parent (absent only for the root) and, when the
/// point is a satellite, the earlier point whose exceptional divisor it
/// also lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointRecord {
    pub id: PointId,
    pub parent: Option<PointId>,
    pub satellite_of: Option<PointId>,
}

impl PointRecord {
    pub fn root() -> PointRecord {
        PointRecord {
            id: PointId(1),
            parent: None,
            satellite_of: None,
        }
    }

    pub fn free(id: usize, parent: usize) -> PointRecord {
        PointRecord {
            id: PointId(id),
            parent: Some(PointId(parent)),
            satellite_of: None,
        }
    }

    pub fn satellite(id: usize, parent: usize, second: usize) -> PointRecord {
        PointRecord {
            id: PointId(id),
            parent: Some(PointId(parent)),
            satellite_of: Some(PointId(second)),
        }
    }
}

/// Vector of arbitrary-precision integers indexed by [`PointId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVector {
    entries: Vec<BigInt>,
}

impl IntVector {
    pub fn zeros(len: usize) -> IntVector {
        IntVector {
            entries: vec![BigInt::zero(); len],
        }
    }

    pub fn ones(len: usize) -> IntVector {
        IntVector {
            entries: vec![BigInt::one(); len],
        }
    }

    pub fn from_entries(entries: Vec<BigInt>) -> IntVector {
        IntVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: PointId) -> &BigInt {
        &self.entries[id.pos()]
    }

    pub fn set(&mut self, id: PointId, value: BigInt) {
        self.entries[id.pos()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &BigInt)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(pos, v)| (PointId(pos + 1), v))
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        assert_eq!(self.len(), other.len());
        IntVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: &BigInt) -> IntVector {
        IntVector {
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn sum(&self) -> BigInt {
        self.entries.iter().sum()
    }
}

impl std::ops::Index<PointId> for IntVector {
    type Output = BigInt;

    fn index(&self, id: PointId) -> &BigInt {
        self.get(id)
    }
}

/// A validated constellation: ordered point records whose proximities are
/// mutually compatible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constellation {
    points: Vec<PointRecord>,
}

impl Constellation {
    /// Validates the records and builds the constellation.
    ///
    /// The records must come sorted by id with ids exactly `1..=m`, every
    /// non-root point needs a parent that precedes it, and a second
    /// proximity must target the parent's parent or the parent's own
    /// second proximity (no other divisor passes through the new point).
    /// Two distinct satellites may not occupy the same position: the
    /// intersection of two exceptional divisors is a single point.
    pub fn from_records(records: Vec<PointRecord>) -> Result<Constellation> {
        if records.is_empty() {
            return Err(Error::MissingRoot);
        }
        for (pos, rec) in records.iter().enumerate() {
            if rec.id.index() != pos + 1 {
                return Err(Error::NonContiguousIds {
                    expected: records.len(),
                    got: rec.id.index(),
                    pos: pos + 1,
                });
            }
        }
        if records[0].parent.is_some() || records[0].satellite_of.is_some() {
            return Err(Error::MissingRoot);
        }
        for rec in records.iter().skip(1) {
            let id = rec.id;
            let parent = rec.parent.ok_or(Error::dangling(id))?;
            if parent.index() >= id.index() {
                return Err(Error::OrderViolation {
                    id: id.index(),
                    referenced: parent.index(),
                });
            }
            if let Some(sat) = rec.satellite_of {
                if sat.index() >= id.index() {
                    return Err(Error::OrderViolation {
                        id: id.index(),
                        referenced: sat.index(),
                    });
                }
                if sat == parent {
                    return Err(Error::InvalidSatellite {
                        id: id.index(),
                        reason: "second proximity equals the parent".into(),
                    });
                }
                let parent_rec = &records[parent.pos()];
                let compatible =
                    parent_rec.parent == Some(sat) || parent_rec.satellite_of == Some(sat);
                if !compatible {
                    return Err(Error::InvalidSatellite {
                        id: id.index(),
                        reason: format!("{} does not pass through the divisor of {}", id, sat),
                    });
                }
            }
        }
        // Two satellites with the same (parent, second) pair would both be
        // the unique intersection point of the two divisors.
        let mut positions: std::collections::BTreeMap<(PointId, PointId), PointId> =
            std::collections::BTreeMap::new();
        for rec in &records {
            if let (Some(parent), Some(sat)) = (rec.parent, rec.satellite_of) {
                if let Some(&taken) = positions.get(&(parent, sat)) {
                    return Err(Error::InvalidSatellite {
                        id: rec.id.index(),
                        reason: format!("satellite position already taken by {}", taken),
                    });
                }
                positions.insert((parent, sat), rec.id);
            }
        }
        Ok(Constellation { points: records })
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> {
        (1..=self.len()).map(PointId)
    }

    pub fn record(&self, id: PointId) -> &PointRecord {
        &self.points[id.pos()]
    }

    pub fn records(&self) -> &[PointRecord] {
        &self.points
    }

    pub fn contains(&self, id: PointId) -> bool {
        id.index() >= 1 && id.index() <= self.len()
    }

    pub fn parent(&self, id: PointId) -> Option<PointId> {
        self.record(id).parent
    }

    pub fn satellite_of(&self, id: PointId) -> Option<PointId> {
        self.record(id).satellite_of
    }

    /// Points this point is proximate to: the parent and, for satellites,
    /// the second target.
    pub fn proximities(&self, id: PointId) -> impl Iterator<Item = PointId> {
        let rec = self.record(id);
        rec.parent.into_iter().chain(rec.satellite_of)
    }

    pub fn is_satellite(&self, id: PointId) -> bool {
        self.record(id).satellite_of.is_some()
    }

    /// Free means proximate to at most one point; the root counts as free.
    pub fn is_free(&self, id: PointId) -> bool {
        !self.is_satellite(id)
    }

    /// The parent chain from the root up to `id`, inclusive.
    pub fn chain(&self, id: PointId) -> Vec<PointId> {
        let mut chain = Vec::new();
        let mut cur = Some(id);
        while let Some(p) = cur {
            chain.push(p);
            cur = self.parent(p);
        }
        chain.reverse();
        chain
    }

    /// The proximity matrix in dense form: `1` on the diagonal, `-1` at
    /// `(k, j)` when point `k` is proximate to point `j`.
    pub fn proximity_matrix(&self) -> Vec<Vec<i64>> {
        let m = self.len();
        let mut mat = vec![vec![0i64; m]; m];
        for id in self.ids() {
            mat[id.pos()][id.pos()] = 1;
            for target in self.proximities(id) {
                mat[id.pos()][target.pos()] = -1;
            }
        }
        mat
    }

    /// Applies the inverse proximity matrix by forward substitution:
    /// `w_j = v_j + sum of w_q over the proximity targets q of j`.
    pub fn apply_p_inverse(&self, v: &IntVector) -> IntVector {
        assert_eq!(v.len(), self.len());
        let mut w = IntVector::zeros(self.len());
        for id in self.ids() {
            let mut value = v[id].clone();
            for target in self.proximities(id) {
                value += &w[target];
            }
            w.set(id, value);
        }
        w
    }

    /// Log discrepancies `a = P^{-1} (1,...,1)^t`.
    pub fn log_discrepancies(&self) -> IntVector {
        self.apply_p_inverse(&IntVector::ones(self.len()))
    }

    /// Multiplicities of a generic curvette through `j`: the `j`th row of
    /// the inverse proximity matrix. Unit at `j`, proximity equality
    /// downwards along the chain, zero off the chain.
    pub fn curvette_multiplicities(&self, j: PointId) -> Result<IntVector> {
        if !self.contains(j) {
            return Err(Error::InvalidPoint(j.index()));
        }
        let chain = self.chain(j);
        let mut mult = IntVector::zeros(self.len());
        mult.set(j, BigInt::one());
        for (idx, &p) in chain.iter().enumerate().rev().skip(1) {
            let mut value = BigInt::zero();
            for &q in &chain[idx + 1..] {
                if self.proximities(q).any(|t| t == p) {
                    value += &mult[q];
                }
            }
            mult.set(p, value);
        }
        Ok(mult)
    }
}

/// A branch of the curve, determined by the maximal constellation point it
/// passes through: the branch is a generic curvette there. Distinct
/// branches may share the maximal point; they then meet its exceptional
/// divisor at distinct free points. The multiplicity field is 1 for
/// reduced curves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub name: String,
    pub at: PointId,
    pub multiplicity: u64,
}

impl Branch {
    pub fn new(name: impl Into<String>, at: PointId) -> Branch {
        Branch {
            name: name.into(),
            at,
            multiplicity: 1,
        }
    }

    pub fn with_multiplicity(name: impl Into<String>, at: PointId, multiplicity: u64) -> Branch {
        Branch {
            name: name.into(),
            at,
            multiplicity,
        }
    }
}

/// A constellation together with the branches it resolves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    pub constellation: Constellation,
    pub branches: Vec<Branch>,
}

/// Why a blowup center is necessary for a log resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NecessityReason {
    /// Some branch still has multiplicity at least 2 here.
    HighMultiplicity,
    /// At least three curve germs (branches plus exceptional divisors) meet.
    CrowdedPoint,
    /// Exactly two germs meet and they share the next infinitely near point.
    TangentGerms,
}

/// Degenerate global shapes the lct formula excludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcludedKind {
    /// A single smooth branch: the curve is non-singular.
    SmoothCurve,
    /// Exactly two smooth branches meeting transversally.
    TwoSmoothTransversal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointVerdict {
    pub point: PointId,
    pub necessary: bool,
    pub reasons: Vec<NecessityReason>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityReport {
    pub verdicts: Vec<PointVerdict>,
    pub minimal: bool,
    pub excluded: Option<ExcludedKind>,
}

impl MinimalityReport {
    pub fn unnecessary_points(&self) -> Vec<PointId> {
        self.verdicts
            .iter()
            .filter(|v| !v.necessary)
            .map(|v| v.point)
            .collect()
    }
}

impl CurveSpec {
    /// Validates branch references and the covering condition: every
    /// constellation point must lie on some branch chain.
    pub fn new(constellation: Constellation, branches: Vec<Branch>) -> Result<CurveSpec> {
        if branches.is_empty() {
            return Err(Error::InvalidBranch(0));
        }
        for b in &branches {
            if !constellation.contains(b.at) {
                return Err(Error::BranchOffConstellation { at: b.at.index() });
            }
            assert!(b.multiplicity >= 1, "branch multiplicity must be positive");
        }
        let mut covered = vec![false; constellation.len()];
        for b in &branches {
            for p in constellation.chain(b.at) {
                covered[p.pos()] = true;
            }
        }
        if let Some(pos) = covered.iter().position(|c| !c) {
            return Err(Error::UncoveredPoint(pos + 1));
        }
        Ok(CurveSpec {
            constellation,
            branches,
        })
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn check_branch(&self, i: usize) -> Result<()> {
        if i < self.branches.len() {
            Ok(())
        } else {
            Err(Error::InvalidBranch(i))
        }
    }

    /// The points of the constellation the branch passes through, in
    /// blowup order.
    pub fn branch_chain(&self, i: usize) -> Result<Vec<PointId>> {
        self.check_branch(i)?;
        Ok(self.constellation.chain(self.branches[i].at))
    }

    /// The branch's multiplicity vector: 1 at the maximal point, proximity
    /// equality downwards, zero off the chain. Unweighted by the branch
    /// multiplicity field.
    pub fn branch_multiplicities(&self, i: usize) -> Result<IntVector> {
        self.check_branch(i)?;
        self.constellation
            .curvette_multiplicities(self.branches[i].at)
    }

    /// Total multiplicity of the curve at each point, weighted by branch
    /// multiplicities.
    pub fn total_multiplicities(&self) -> IntVector {
        let mut total = IntVector::zeros(self.constellation.len());
        for (i, b) in self.branches.iter().enumerate() {
            let n = self
                .branch_multiplicities(i)
                .expect("branch index in range");
            total = total.add(&n.scale(&BigInt::from(b.multiplicity)));
        }
        total
    }

    /// Curve valuations `b = P^{-1} (sum of branch multiplicity vectors)`.
    pub fn curve_valuations(&self) -> IntVector {
        self.constellation
            .apply_p_inverse(&self.total_multiplicities())
    }

    /// Intersection multiplicity of two distinct branches by Noether's
    /// formula: the sum over common points of the products of
    /// multiplicities.
    pub fn intersection_number(&self, i: usize, s: usize) -> Result<BigInt> {
        self.check_branch(i)?;
        self.check_branch(s)?;
        if i == s {
            return Err(Error::SameBranch);
        }
        let ni = self.branch_multiplicities(i)?;
        let ns = self.branch_multiplicities(s)?;
        Ok(ni.dot(&ns))
    }

    /// Branch indices whose chain passes through `j`.
    pub fn branches_through(&self, j: PointId) -> Vec<usize> {
        (0..self.branches.len())
            .filter(|&i| self.constellation.chain(self.branches[i].at).contains(&j))
            .collect()
    }

    /// Per-point necessity verdicts plus the global excluded-case flags.
    ///
    /// A point is necessary exactly when the total transform fails to be a
    /// simple normal crossing there: a branch multiplicity of at least 2,
    /// three or more germs through the point, or two germs sharing the
    /// next infinitely near point.
    pub fn check_minimality(&self) -> MinimalityReport {
        let c = &self.constellation;
        let mults: Vec<IntVector> = (0..self.branches.len())
            .map(|i| self.branch_multiplicities(i).expect("valid branch"))
            .collect();
        let chains: Vec<Vec<PointId>> = (0..self.branches.len())
            .map(|i| self.branch_chain(i).expect("valid branch"))
            .collect();

        let mut verdicts = Vec::with_capacity(c.len());
        for j in c.ids() {
            let through: Vec<usize> = (0..self.branches.len())
                .filter(|&i| chains[i].contains(&j))
                .collect();
            let exceptional: Vec<PointId> = c.proximities(j).collect();
            let mut reasons = Vec::new();
            if through.iter().any(|&i| mults[i][j] >= BigInt::from(2)) {
                reasons.push(NecessityReason::HighMultiplicity);
            }
            if through.len() + exceptional.len() >= 3 {
                reasons.push(NecessityReason::CrowdedPoint);
            }
            if through.len() + exceptional.len() == 2
                && !reasons.contains(&NecessityReason::CrowdedPoint)
            {
                // successor of j on each branch chain, when the branch continues
                let successor = |i: usize| -> Option<PointId> {
                    let chain = &chains[i];
                    chain
                        .iter()
                        .position(|&p| p == j)
                        .and_then(|idx| chain.get(idx + 1).copied())
                };
                let tangent = match (through.len(), exceptional.len()) {
                    (2, 0) => {
                        let s0 = successor(through[0]);
                        let s1 = successor(through[1]);
                        s0.is_some() && s0 == s1
                    }
                    (1, 1) => match successor(through[0]) {
                        Some(next) => c.proximities(next).any(|t| t == exceptional[0]),
                        None => false,
                    },
                    _ => false,
                };
                if tangent {
                    reasons.push(NecessityReason::TangentGerms);
                }
            }
            verdicts.push(PointVerdict {
                point: j,
                necessary: !reasons.is_empty(),
                reasons,
            });
        }

        let smooth: Vec<bool> = mults
            .iter()
            .map(|n| n[PointId(1)] == BigInt::one())
            .collect();
        let excluded = if self.branches.len() == 1 && smooth[0] {
            Some(ExcludedKind::SmoothCurve)
        } else if self.branches.len() == 2 && smooth[0] && smooth[1] {
            let common = chains[0].iter().filter(|p| chains[1].contains(p)).count();
            if common == 1 {
                Some(ExcludedKind::TwoSmoothTransversal)
            } else {
                None
            }
        } else {
            None
        };

        MinimalityReport {
            minimal: verdicts.iter().all(|v| v.necessary),
            verdicts,
            excluded,
        }
    }
}
