//! The log-canonical threshold, by every route the theory provides.
//!
//! Four methods are implemented and reconciled exactly: the divisorial
//! minimum of the candidates `(a_j + 1)/b_j`, its restriction to the
//! point set `F`, the closed-form expression at the distinguished vertex,
//! and the two-branch piecewise formula. Extensions cover non-reduced
//! curves and complete ideals through curvette duplication.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::constellation::{
    Branch, Constellation, CurveSpec, ExcludedKind, IntVector, MinimalityReport, PointId,
};
use crate::dualgraph::{
    build_dual_graph, distinguished_vertex, sigma_table, vertex_families, DualGraph, SigmaTable,
    VertexFamilies,
};
use crate::error::{Error, Result};
use crate::invariants::{branch_data, point_sets, BranchInvariants, ChainData, PointSets};

pub type Rat = BigRational;

fn rat(n: BigInt, d: BigInt) -> Rat {
    Rat::new(n, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Formula,
    TwoBranch,
    Divisorial,
    AllAgree,
    /// Degenerate input outside the formula's hypotheses; the wrapper
    /// answers from first principles.
    Excluded,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Formula => "formula",
            Method::TwoBranch => "two_branch",
            Method::Divisorial => "divisorial",
            Method::AllAgree => "all_agree",
            Method::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    TerminalSatellite,
    InitialSeparating,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::TerminalSatellite => "terminal_satellite",
            VertexKind::InitialSeparating => "initial_separating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    SmoothInput,
    ExcludedCase,
    NonMinimal,
    NonReducedInput,
    /// A strict-transform bound `1/n_i` attains the minimum.
    MultiplicityBound,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::SmoothInput => "SmoothInput",
            Flag::ExcludedCase => "ExcludedCase",
            Flag::NonMinimal => "NonMinimal",
            Flag::NonReducedInput => "NonReducedInput",
            Flag::MultiplicityBound => "MultiplicityBound",
        }
    }
}

/// Which piece of the two-branch formula applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TwoBranchCase {
    NotFreelySeparatedHigh,
    NotFreelySeparatedLow,
    FreelyBalanced,
    FreelyFirstDominates,
    FreelySecondDominates,
}

/// The case-split table of the closed formula at a terminal satellite:
/// `delta[(i,s)]` is the beta product when the branches share a terminal
/// satellite (equivalently, when the contact ratios are proportional and
/// bounded by the intersection number), otherwise the intersection number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaTable {
    pub values: BTreeMap<(usize, usize), BigInt>,
}

impl DeltaTable {
    pub fn get(&self, i: usize, s: usize) -> &BigInt {
        &self.values[&(i, s)]
    }

    pub fn row_sum(&self, i: usize, r: usize) -> BigInt {
        (0..r).map(|s| self.get(i, s)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LctReport {
    pub lct: Rat,
    pub distinguished_vertex: Option<PointId>,
    pub vertex_kind: Option<VertexKind>,
    pub method: Method,
    pub methods_run: Vec<Method>,
    /// Candidates over the point set `F`.
    pub candidate_table: BTreeMap<PointId, Rat>,
    pub sigma_table: Option<SigmaTable>,
    pub branch_invariants: Vec<BranchInvariants>,
    /// Pairwise intersection numbers; the diagonal is zero.
    pub intersection_matrix: Vec<Vec<BigInt>>,
    pub delta_table: Option<DeltaTable>,
    /// All points attaining the divisorial minimum.
    pub argmin: Vec<PointId>,
    pub flags: Vec<Flag>,
}

/// Everything computed once per spec: chains, valuation vectors, point
/// sets, the dual graph and the weight table.
pub struct Analysis<'a> {
    pub spec: &'a CurveSpec,
    pub log_discrepancies: IntVector,
    pub valuations: IntVector,
    pub branch_data: Vec<ChainData>,
    pub sets: PointSets,
    pub graph: DualGraph,
    pub families: VertexFamilies,
    pub sigma: SigmaTable,
    pub intersections: Vec<Vec<BigInt>>,
}

impl<'a> Analysis<'a> {
    pub fn new(spec: &'a CurveSpec) -> Result<Analysis<'a>> {
        let log_discrepancies = spec.constellation.log_discrepancies();
        let valuations = spec.curve_valuations();
        let branch_data: Vec<ChainData> = (0..spec.branch_count())
            .map(|i| branch_data(spec, i))
            .collect::<Result<_>>()?;
        let sets = point_sets(spec)?;
        let graph = build_dual_graph(spec)?;
        let families = vertex_families(spec, &graph, &sets);
        let invariants: Vec<BranchInvariants> =
            branch_data.iter().map(|d| d.invariants.clone()).collect();
        let sigma = sigma_table(spec, &graph, &families, &invariants)?;
        let r = spec.branch_count();
        let mut intersections = vec![vec![BigInt::zero(); r]; r];
        for i in 0..r {
            for s in i + 1..r {
                let value = branch_data[i].mult.dot(&branch_data[s].mult);
                intersections[i][s] = value.clone();
                intersections[s][i] = value;
            }
        }
        Ok(Analysis {
            spec,
            log_discrepancies,
            valuations,
            branch_data,
            sets,
            graph,
            families,
            sigma,
            intersections,
        })
    }

    pub fn invariants(&self) -> Vec<BranchInvariants> {
        self.branch_data
            .iter()
            .map(|d| d.invariants.clone())
            .collect()
    }

    pub fn beta0(&self, i: usize) -> &BigInt {
        &self.branch_data[i].invariants.beta0
    }

    pub fn beta1(&self, i: usize) -> &BigInt {
        &self.branch_data[i].invariants.beta1
    }

    /// Candidate `(a_j + 1)/b_j` for the log-canonical threshold.
    pub fn candidate(&self, j: PointId) -> Result<Rat> {
        if !self.spec.constellation.contains(j) {
            return Err(Error::InvalidPoint(j.index()));
        }
        let b = &self.valuations[j];
        if b.is_zero() {
            return Err(Error::ZeroValuation(j.index()));
        }
        Ok(rat(&self.log_discrepancies[j] + 1, b.clone()))
    }

    pub fn candidate_table_over_f(&self) -> Result<BTreeMap<PointId, Rat>> {
        self.sets
            .f
            .iter()
            .map(|&j| Ok((j, self.candidate(j)?)))
            .collect()
    }

    /// Exact minimum of the candidates over the given points, with every
    /// attaining point.
    pub fn divisorial_min<I: IntoIterator<Item = PointId>>(
        &self,
        points: I,
    ) -> Result<(Rat, Vec<PointId>)> {
        let mut best: Option<Rat> = None;
        let mut argmin = Vec::new();
        for j in points {
            let value = self.candidate(j)?;
            match &best {
                Some(current) if &value > current => {}
                Some(current) if &value == current => argmin.push(j),
                _ => {
                    best = Some(value);
                    argmin = vec![j];
                }
            }
        }
        Ok((best.expect("at least one candidate"), argmin))
    }

    pub fn lct_divisorial(&self) -> Result<(Rat, Vec<PointId>)> {
        self.divisorial_min(self.spec.constellation.ids())
    }

    pub fn lct_divisorial_over_f(&self) -> Result<(Rat, Vec<PointId>)> {
        self.divisorial_min(self.sets.f.iter().copied())
    }

    /// Shared terminal satellites of two branches.
    fn contact_q(&self, i: usize, s: usize) -> usize {
        let a = &self.branch_data[i];
        let b = &self.branch_data[s];
        a.invariants
            .terminal_satellites
            .iter()
            .filter(|p| b.invariants.terminal_satellites.contains(p))
            .count()
    }

    /// Case table of the closed formula, with the case detected through
    /// shared terminal satellites and cross-checked against the
    /// proportionality-and-bound characterization.
    pub fn delta_table(&self) -> DeltaTable {
        let r = self.spec.branch_count();
        let mut values = BTreeMap::new();
        for i in 0..r {
            for s in 0..r {
                let value = if i == s {
                    self.beta0(i) * self.beta1(i)
                } else {
                    let cross_is = self.beta0(i) * self.beta1(s);
                    let cross_si = self.beta1(i) * self.beta0(s);
                    let proportional_and_bounded =
                        cross_is == cross_si && cross_is <= self.intersections[i][s];
                    // detection through shared terminal satellites must agree,
                    // except for two smooth branches with the same chain: the
                    // smooth beta1 convention makes the test pass with q = 0,
                    // and there both case values coincide anyway
                    let q = self.contact_q(i, s);
                    let both_smooth = self.branch_data[i].invariants.smooth
                        && self.branch_data[s].invariants.smooth;
                    if both_smooth {
                        assert_eq!(q, 0);
                        if proportional_and_bounded {
                            assert_eq!(cross_is, self.intersections[i][s]);
                        }
                    } else {
                        assert_eq!(
                            q >= 1,
                            proportional_and_bounded,
                            "shared terminal satellites must match the proportionality \
                             test for branches {i} and {s}"
                        );
                    }
                    if proportional_and_bounded {
                        cross_is
                    } else {
                        self.intersections[i][s].clone()
                    }
                };
                values.insert((i, s), value);
            }
        }
        DeltaTable { values }
    }

    fn separation_of(&self, i1: usize, i2: usize) -> (PointId, bool) {
        let a = &self.branch_data[i1];
        let b = &self.branch_data[i2];
        let in_b: BTreeSet<PointId> = b.chain.iter().copied().collect();
        let point = *a
            .chain
            .iter()
            .rfind(|p| in_b.contains(p))
            .expect("chains share the root");
        let pair = crate::invariants::contact_pair_of(&self.spec.constellation, a, b);
        let freely = pair.q == 0 && pair.c <= a.invariants.l0.min(b.invariants.l0);
        (point, freely)
    }

    /// The closed formula: distinguished vertex plus the case expression
    /// there. Requires a minimal resolution outside the excluded shapes.
    pub fn lct_formula(&self) -> Result<(Rat, PointId, VertexKind, Option<DeltaTable>)> {
        let v_k = distinguished_vertex(&self.graph, &self.families, &self.sigma)?;
        if self.families.v_t.contains(&v_k) {
            let delta = self.delta_table();
            let r = self.spec.branch_count();
            let mut value: Option<Rat> = None;
            for i in 0..r {
                if self.branch_data[i].invariants.t_min != Some(v_k) {
                    continue;
                }
                let numerator = self.beta0(i) + self.beta1(i);
                let candidate = rat(numerator, delta.row_sum(i, r));
                match &value {
                    Some(existing) => assert_eq!(
                        existing, &candidate,
                        "all branches with the same first terminal satellite must agree"
                    ),
                    None => value = Some(candidate),
                }
            }
            let value = value.expect("some branch has its first terminal satellite at v_k");
            Ok((value, v_k, VertexKind::TerminalSatellite, Some(delta)))
        } else {
            debug_assert!(self.families.v_s.contains(&v_k));
            let value = self.separating_vertex_value(v_k)?;
            self.cross_check_pair_expression(v_k, &value);
            Ok((value, v_k, VertexKind::InitialSeparating, None))
        }
    }

    /// Value at an initial separating point, from contact data alone: a
    /// generic curvette there is smooth through `d_k` free points, and
    /// each branch meets it in `c` shared free points (weight `c *
    /// beta0`) unless its whole free run is shared (weight `beta1`).
    fn separating_vertex_value(&self, v_k: PointId) -> Result<Rat> {
        let phi = crate::invariants::chain_data(&self.spec.constellation, v_k)?;
        assert!(phi.invariants.smooth, "initial separating points are free");
        let d_k = phi.chain.len();
        let mut denominator = BigInt::zero();
        for data in &self.branch_data {
            let pair = crate::invariants::contact_pair_of(&self.spec.constellation, &phi, data);
            debug_assert_eq!(pair.q, 0);
            if pair.c <= data.invariants.l0 {
                denominator += BigInt::from(pair.c) * &data.invariants.beta0;
            } else {
                debug_assert_eq!(pair.c, data.invariants.l0 + 1);
                denominator += &data.invariants.beta1;
            }
        }
        Ok(rat(BigInt::from(d_k + 1), denominator))
    }

    /// The pairwise expression
    /// `(b01*b02 + I12) / (b01*I12 + b02 * sum_{s != i1} I(f_i1, f_s))`
    /// holds whenever the first branch meets every other branch exactly
    /// the way a curvette at the vertex does. Its derivation silently
    /// assumes that, so it is asserted only under that hypothesis; a
    /// branch travelling together with a third one past the vertex
    /// genuinely breaks it.
    fn cross_check_pair_expression(&self, v_k: PointId, value: &Rat) {
        let phi = crate::invariants::chain_data(&self.spec.constellation, v_k)
            .expect("vertex of the graph");
        let r = self.spec.branch_count();
        for i1 in 0..r {
            let like_curvette = (0..r).filter(|&s| s != i1).all(|s| {
                self.intersections[i1][s]
                    == self.beta0(i1) * phi.mult.dot(&self.branch_data[s].mult)
            });
            if !like_curvette {
                continue;
            }
            for i2 in 0..r {
                if i1 == i2 {
                    continue;
                }
                let (point, freely) = self.separation_of(i1, i2);
                if point != v_k || !freely {
                    continue;
                }
                let b01 = self.beta0(i1);
                let b02 = self.beta0(i2);
                let i12 = &self.intersections[i1][i2];
                let others: BigInt = (0..r)
                    .filter(|&s| s != i1)
                    .map(|s| &self.intersections[i1][s])
                    .sum();
                let candidate = rat(b01 * b02 + i12, b01 * i12 + b02 * others);
                assert_eq!(
                    &candidate, value,
                    "pair expression for ({i1},{i2}) at {v_k} must match"
                );
            }
        }
    }

    /// The piecewise two-branch formula.
    pub fn lct_two_branch(&self) -> Result<(Rat, TwoBranchCase)> {
        if self.spec.branch_count() != 2 {
            return Err(Error::NotTwoBranches(self.spec.branch_count()));
        }
        // order so that beta1/beta0 of the first does not exceed the second's
        let (first, second) = if self.beta1(0) * self.beta0(1) <= self.beta1(1) * self.beta0(0) {
            (0, 1)
        } else {
            (1, 0)
        };
        let (b01, b11) = (self.beta0(first), self.beta1(first));
        let (b02, b12) = (self.beta0(second), self.beta1(second));
        let inter = &self.intersections[0][1];

        let (_point, freely) = self.separation_of(first, second);
        if !freely {
            if b11 >= b02 {
                Ok((
                    rat(b11 + b01, b11 * (b01 + b02)),
                    TwoBranchCase::NotFreelySeparatedHigh,
                ))
            } else {
                Ok((
                    rat(b12 + b02, b02 * (b11 + b12)),
                    TwoBranchCase::NotFreelySeparatedLow,
                ))
            }
        } else {
            let pair = crate::invariants::contact_pair_of(
                &self.spec.constellation,
                &self.branch_data[first],
                &self.branch_data[second],
            );
            debug_assert_eq!(pair.q, 0);
            let c = BigInt::from(pair.c);
            // 1/c <= beta0(second)/beta0(first) <= c, by cross multiplication
            let lower_ok = b01 <= &(&c * b02);
            let upper_ok = b02 <= &(&c * b01);
            if lower_ok && upper_ok {
                Ok((
                    rat(b01 * b02 + inter, (b01 + b02) * inter),
                    TwoBranchCase::FreelyBalanced,
                ))
            } else if !lower_ok {
                // beta0(second)/beta0(first) < 1/c
                Ok((
                    rat(b11 + b01, b01 * b11 + inter),
                    TwoBranchCase::FreelyFirstDominates,
                ))
            } else {
                Ok((
                    rat(b12 + b02, b02 * b12 + inter),
                    TwoBranchCase::FreelySecondDominates,
                ))
            }
        }
    }
}

fn one() -> Rat {
    Rat::one()
}

fn report_flagged(
    analysis: &Analysis<'_>,
    flags: Vec<Flag>,
    method: Method,
    lct: Rat,
    argmin: Vec<PointId>,
) -> Result<LctReport> {
    Ok(LctReport {
        lct,
        distinguished_vertex: None,
        vertex_kind: None,
        method,
        methods_run: vec![method],
        candidate_table: analysis.candidate_table_over_f()?,
        sigma_table: Some(analysis.sigma.clone()),
        branch_invariants: analysis.invariants(),
        intersection_matrix: analysis.intersections.clone(),
        delta_table: None,
        argmin,
        flags,
    })
}

fn reconcile_reduced(spec: &CurveSpec) -> Result<LctReport> {
    let analysis = Analysis::new(spec)?;
    let minimality = spec.check_minimality();

    match minimality.excluded {
        Some(ExcludedKind::SmoothCurve) => {
            return report_flagged(
                &analysis,
                vec![Flag::SmoothInput],
                Method::Excluded,
                one(),
                vec![],
            );
        }
        Some(ExcludedKind::TwoSmoothTransversal) => {
            return report_flagged(
                &analysis,
                vec![Flag::ExcludedCase],
                Method::Excluded,
                one(),
                vec![],
            );
        }
        None => {}
    }

    if !minimality.minimal {
        // still a log resolution, so the divisorial minimum is exact
        let (value, argmin) = analysis.lct_divisorial()?;
        return report_flagged(
            &analysis,
            vec![Flag::NonMinimal],
            Method::Divisorial,
            value,
            argmin,
        );
    }

    let (div_value, argmin) = analysis.lct_divisorial()?;
    let (f_value, _) = analysis.lct_divisorial_over_f()?;
    let (formula_value, v_k, kind, delta) = analysis.lct_formula()?;
    let mut methods_run = vec![Method::Divisorial, Method::Formula];

    let mut disagreement = Vec::new();
    if f_value != div_value {
        disagreement.push(format!(
            "restricted minimum {f_value} != divisorial {div_value}"
        ));
    }
    if formula_value != div_value {
        disagreement.push(format!("formula {formula_value} != divisorial {div_value}"));
    }
    if spec.branch_count() == 2 {
        let (two_branch_value, _case) = analysis.lct_two_branch()?;
        methods_run.push(Method::TwoBranch);
        if two_branch_value != div_value {
            disagreement.push(format!(
                "two-branch value {two_branch_value} != divisorial {div_value}"
            ));
        }
    }
    if !disagreement.is_empty() {
        return Err(Error::MethodDisagreement(disagreement.join("; ")));
    }
    if !argmin.contains(&v_k) {
        return Err(Error::MethodDisagreement(format!(
            "distinguished vertex {v_k} does not attain the divisorial minimum"
        )));
    }
    assert!(div_value.is_positive(), "lct must be positive");
    assert!(div_value <= one(), "lct of a reduced curve is at most 1");

    Ok(LctReport {
        lct: div_value,
        distinguished_vertex: Some(v_k),
        vertex_kind: Some(kind),
        method: Method::AllAgree,
        methods_run,
        candidate_table: analysis.candidate_table_over_f()?,
        sigma_table: Some(analysis.sigma.clone()),
        branch_invariants: analysis.invariants(),
        intersection_matrix: analysis.intersections.clone(),
        delta_table: delta,
        argmin,
        flags: Vec::new(),
    })
}

/// Replaces each branch by `multiplicity` curvettes at its maximal point;
/// they meet the exceptional divisor there at distinct free points.
pub fn duplicate_to_reduced(spec: &CurveSpec) -> CurveSpec {
    let mut branches = Vec::new();
    for b in &spec.branches {
        for copy in 0..b.multiplicity {
            let name = if b.multiplicity == 1 {
                b.name.clone()
            } else {
                format!("{}_{}", b.name, copy + 1)
            };
            branches.push(Branch::new(name, b.at));
        }
    }
    CurveSpec::new(spec.constellation.clone(), branches).expect("duplication preserves validity")
}

fn reconcile_nonreduced(spec: &CurveSpec) -> Result<LctReport> {
    let reduced = duplicate_to_reduced(spec);
    let mut report = reconcile(&reduced)?;

    let mut value = report.lct.clone();
    for b in &spec.branches {
        let bound = rat(BigInt::one(), BigInt::from(b.multiplicity));
        if bound < value {
            value = bound;
        }
    }

    // independent route: weighted divisorial candidates plus the
    // strict-transform bounds
    let analysis = Analysis::new(spec)?;
    let mut oracle = spec
        .branches
        .iter()
        .map(|b| rat(BigInt::one(), BigInt::from(b.multiplicity)))
        .min()
        .expect("at least one branch");
    for j in spec.constellation.ids() {
        let candidate = analysis.candidate(j)?;
        if candidate < oracle {
            oracle = candidate;
        }
    }
    if oracle != value {
        return Err(Error::MethodDisagreement(format!(
            "non-reduced value {value} != weighted divisorial {oracle}"
        )));
    }

    if value < report.lct {
        report.flags.push(Flag::MultiplicityBound);
    }
    report.flags.push(Flag::NonReducedInput);
    report.lct = value;
    Ok(report)
}

/// Log-canonical threshold of a possibly non-reduced curve: the minimum
/// of the reciprocal multiplicities and the threshold of the curve with
/// every component replaced by that many distinct curvettes.
pub fn lct_nonreduced(spec: &CurveSpec) -> Result<Rat> {
    Ok(reconcile(spec)?.lct)
}

/// The reduced curve a product of simple complete ideals denotes:
/// exponent-many general curves of each marked ideal, realized as
/// curvettes meeting the divisor at distinct points, over the
/// subconstellation their chains span (unused points are trimmed and
/// the rest reindexed in order).
pub fn complete_ideal_spec(
    constellation: &Constellation,
    exponents: &BTreeMap<PointId, u64>,
) -> Result<CurveSpec> {
    if exponents.is_empty() || exponents.values().all(|&n| n == 0) {
        return Err(Error::EmptyIdeal);
    }
    for &j in exponents.keys() {
        if !constellation.contains(j) {
            return Err(Error::InvalidPoint(j.index()));
        }
    }

    let mut keep: BTreeSet<PointId> = BTreeSet::new();
    for (&j, &n) in exponents {
        if n > 0 {
            keep.extend(constellation.chain(j));
        }
    }
    let mut remap: BTreeMap<PointId, PointId> = BTreeMap::new();
    for (new_pos, &old) in keep.iter().enumerate() {
        remap.insert(old, PointId::new(new_pos + 1));
    }
    let records = keep
        .iter()
        .map(|&old| {
            let rec = constellation.record(old);
            crate::constellation::PointRecord {
                id: remap[&old],
                parent: rec.parent.map(|p| remap[&p]),
                satellite_of: rec.satellite_of.map(|p| remap[&p]),
            }
        })
        .collect();
    let trimmed = Constellation::from_records(records)?;

    let mut branches = Vec::new();
    for (&j, &n) in exponents {
        for copy in 1..=n {
            branches.push(Branch::new(format!("p{}_{}", j.index(), copy), remap[&j]));
        }
    }
    CurveSpec::new(trimmed, branches)
}

/// Log-canonical threshold of a product of simple complete ideals: the
/// threshold of the associated reduced curve.
pub fn lct_complete_ideal(
    constellation: &Constellation,
    exponents: &BTreeMap<PointId, u64>,
) -> Result<LctReport> {
    let spec = complete_ideal_spec(constellation, exponents)?;
    reconcile(&spec)
}

/// Runs every applicable method and requires exact agreement.
pub fn reconcile(spec: &CurveSpec) -> Result<LctReport> {
    if spec.branches.iter().any(|b| b.multiplicity > 1) {
        reconcile_nonreduced(spec)
    } else {
        reconcile_reduced(spec)
    }
}

/// Convenience wrapper: exact lct of a reduced or non-reduced curve spec.
pub fn lct(spec: &CurveSpec) -> Result<Rat> {
    Ok(reconcile(spec)?.lct)
}

/// Minimality wrapper used by the command line: verdicts plus flags.
pub fn minimality(spec: &CurveSpec) -> MinimalityReport {
    spec.check_minimality()
}
