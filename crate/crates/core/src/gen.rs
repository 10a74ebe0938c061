//! Construction of branches from numerical data, the worked 17-point
//! fixture, and seeded random generation of valid curve specs for the
//! property suite.

use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constellation::{Branch, Constellation, CurveSpec, PointId, PointRecord};
use crate::error::{Error, Result};

/// Numerical description of a branch: one characteristic pair, or a
/// smooth branch through a given number of points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRecipe {
    OnePair { beta0: u64, beta1: u64 },
    Smooth { length: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_points: usize,
    pub max_branches: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_points: 40,
            max_branches: 6,
        }
    }
}

/// Multiplicity sequence of the branch with maximal contact values
/// `(beta0, beta1)`: repeated Euclidean division, `y = q*x + r`
/// contributing `q` copies of `x`.
pub fn multiplicity_sequence(beta0: u64, beta1: u64) -> Vec<u64> {
    let mut seq = Vec::new();
    let (mut x, mut y) = (beta0, beta1);
    while x > 0 {
        let q = y / x;
        let r = y % x;
        for _ in 0..q {
            seq.push(x);
        }
        y = x;
        x = r;
    }
    seq
}

/// Builds the minimal resolution chain of a branch from its recipe.
///
/// For a characteristic pair the chain realizes the Euclidean
/// multiplicity sequence: each new point is proximate to its parent, plus
/// to the unique earlier point whose proximity equality is not yet
/// saturated. The chain ends at the last terminal satellite, which is
/// where the minimal log resolution of the branch stops.
pub fn branch_from_beta(recipe: BranchRecipe) -> Result<(Vec<PointRecord>, Branch)> {
    match recipe {
        BranchRecipe::Smooth { length } => {
            if length < 1 {
                return Err(Error::BadOrder(1, length as u64));
            }
            let mut records = vec![PointRecord::root()];
            for id in 2..=length {
                records.push(PointRecord::free(id, id - 1));
            }
            let at = PointId::new(length);
            Ok((records, Branch::new("B", at)))
        }
        BranchRecipe::OnePair { beta0, beta1 } => {
            if beta0 < 2 || beta1 <= beta0 {
                return Err(Error::BadOrder(beta0, beta1));
            }
            if beta0.gcd(&beta1) != 1 {
                return Err(Error::NotCoprime(beta0, beta1));
            }
            let seq = multiplicity_sequence(beta0, beta1);
            let mut records = vec![PointRecord::root()];
            // remaining proximity budget of each placed point
            let mut budget: Vec<u64> = vec![seq[0]];
            for k in 1..seq.len() {
                let id = k + 1;
                let parent = PointId::new(k);
                let prev = records[k - 1];
                let mut second = None;
                for candidate in [prev.parent, prev.satellite_of].into_iter().flatten() {
                    if budget[candidate.pos()] > 0 {
                        assert!(second.is_none(), "ambiguous satellite anchor");
                        second = Some(candidate);
                    }
                }
                records.push(PointRecord {
                    id: PointId::new(id),
                    parent: Some(parent),
                    satellite_of: second,
                });
                budget[parent.pos()] -= seq[k];
                if let Some(q) = second {
                    budget[q.pos()] -= seq[k];
                }
                budget.push(seq[k]);
            }
            let last = records.last().expect("nonempty sequence");
            assert!(
                last.satellite_of.is_some(),
                "one-pair chain must end at a satellite"
            );
            assert!(
                budget[..budget.len() - 1].iter().all(|&b| b == 0),
                "proximity equality must be saturated below the maximal point"
            );
            let at = PointId::new(seq.len());
            Ok((records, Branch::new("B", at)))
        }
    }
}

/// Worked 17-point, 8-branch example curve: five singular
/// branches with beta pairs (5,17), (3,11), (2,11), (2,13), (2,5) and
/// three smooth ones, sharing a common trunk of free points.
pub fn example_figure1() -> CurveSpec {
    let records = vec![
        PointRecord::root(),
        PointRecord::free(2, 1),
        PointRecord::free(3, 2),
        PointRecord::free(4, 3),
        PointRecord::satellite(5, 4, 3),
        PointRecord::satellite(6, 5, 3),
        PointRecord::satellite(7, 6, 5),
        PointRecord::satellite(8, 5, 4),
        PointRecord::free(9, 4),
        PointRecord::free(10, 9),
        PointRecord::satellite(11, 10, 9),
        PointRecord::free(12, 10),
        PointRecord::satellite(13, 12, 10),
        PointRecord::free(14, 4),
        PointRecord::free(15, 14),
        PointRecord::free(16, 2),
        PointRecord::satellite(17, 16, 2),
    ];
    let constellation = Constellation::from_records(records).expect("fixture is valid");
    let at = |j: usize| PointId::new(j);
    let branches = vec![
        Branch::new("C1", at(7)),
        Branch::new("C2", at(8)),
        Branch::new("C3", at(11)),
        Branch::new("C4", at(13)),
        Branch::new("C5", at(17)),
        Branch::new("C6", at(15)),
        Branch::new("C7", at(15)),
        Branch::new("C8", at(16)),
    ];
    CurveSpec::new(constellation, branches).expect("fixture is valid")
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mutable record list for random growth.
struct TreeBuilder {
    records: Vec<PointRecord>,
}

impl TreeBuilder {
    fn new() -> TreeBuilder {
        TreeBuilder {
            records: vec![PointRecord::root()],
        }
    }

    fn from_records(records: Vec<PointRecord>) -> TreeBuilder {
        TreeBuilder { records }
    }

    fn len(&self) -> usize {
        self.records.len()
    }

    fn add_free(&mut self, parent: PointId) -> PointId {
        let id = PointId::new(self.len() + 1);
        self.records.push(PointRecord {
            id,
            parent: Some(parent),
            satellite_of: None,
        });
        id
    }

    /// Second-proximity targets compatible at a child of `parent` whose
    /// satellite position is still unoccupied.
    fn satellite_candidates(&self, parent: PointId) -> Vec<PointId> {
        let rec = self.records[parent.pos()];
        [rec.parent, rec.satellite_of]
            .into_iter()
            .flatten()
            .filter(|&q| {
                !self
                    .records
                    .iter()
                    .any(|r| r.parent == Some(parent) && r.satellite_of == Some(q))
            })
            .collect()
    }

    fn add_satellite(&mut self, parent: PointId, second: PointId) -> PointId {
        let id = PointId::new(self.len() + 1);
        self.records.push(PointRecord {
            id,
            parent: Some(parent),
            satellite_of: Some(second),
        });
        id
    }

    /// Appends the records of a fresh chain, identifying its first
    /// `depth` points with the chain of `graft[depth-1]`. `graft` must
    /// be structurally identical to the chain prefix being replaced.
    fn graft(&mut self, graft: &[PointId], chain: &[PointRecord]) -> PointId {
        let depth = graft.len();
        assert!(depth >= 1 && depth <= chain.len());
        let mut map: Vec<PointId> = graft.to_vec();
        for rec in &chain[depth..] {
            let parent = map[rec.parent.expect("non-root").pos()];
            let id = match rec.satellite_of {
                Some(q) => self.add_satellite(parent, map[q.pos()]),
                None => self.add_free(parent),
            };
            map.push(id);
        }
        *map.last().expect("nonempty chain")
    }
}

/// Length of the longest common structural prefix of two chains.
fn structural_prefix(a: &[PointRecord], b: &[PointRecord]) -> usize {
    let mut d = 0;
    while d < a.len() && d < b.len() {
        let (ra, rb) = (a[d], b[d]);
        let same = ra.parent.map(PointId::index) == rb.parent.map(PointId::index)
            && ra.satellite_of.map(PointId::index) == rb.satellite_of.map(PointId::index);
        if !same {
            break;
        }
        d += 1;
    }
    d
}

fn random_recipe(rng: &mut ChaCha8Rng, allow_smooth: bool) -> BranchRecipe {
    if allow_smooth && rng.gen_bool(0.35) {
        BranchRecipe::Smooth {
            length: rng.gen_range(1..=6),
        }
    } else {
        loop {
            let beta0 = rng.gen_range(2..=7u64);
            let beta1 = rng.gen_range(beta0 + 1..=(beta0 * 6).min(45));
            if beta0.gcd(&beta1) == 1 {
                return BranchRecipe::OnePair { beta0, beta1 };
            }
        }
    }
}

/// Grows a short random tail from `start`: a free point followed by a few
/// satellites, ending at a satellite. Used to produce branches with more
/// than one characteristic pair.
fn grow_tail(
    rng: &mut ChaCha8Rng,
    tree: &mut TreeBuilder,
    start: PointId,
    steps: usize,
) -> PointId {
    let mut cur = tree.add_free(start);
    for _ in 0..steps {
        let candidates = tree.satellite_candidates(cur);
        if !candidates.is_empty() && rng.gen_bool(0.75) {
            let q = candidates[rng.gen_range(0..candidates.len())];
            cur = tree.add_satellite(cur, q);
        } else {
            cur = tree.add_free(cur);
        }
    }
    if tree.records[cur.pos()].satellite_of.is_none() {
        let candidates = tree.satellite_candidates(cur);
        if candidates.is_empty() {
            return cur;
        }
        let q = candidates[rng.gen_range(0..candidates.len())];
        cur = tree.add_satellite(cur, q);
    }
    cur
}

fn try_generate(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Option<CurveSpec> {
    let two_branch = cfg.max_branches == 2;
    let mode = if two_branch {
        1
    } else if cfg.max_branches == 1 {
        0
    } else {
        rng.gen_range(0..6)
    };

    let mut tree;
    let mut branch_points: Vec<PointId> = Vec::new();

    match mode {
        // single singular branch, sometimes with a second characteristic pair
        0 => {
            let recipe = random_recipe(rng, false);
            let (records, branch) = branch_from_beta(recipe).ok()?;
            tree = TreeBuilder::from_records(records);
            let mut max = branch.at;
            if rng.gen_bool(0.35) {
                let steps = rng.gen_range(1..=3);
                max = grow_tail(rng, &mut tree, max, steps);
            }
            branch_points.push(max);
        }
        // two branches glued along a compatible prefix
        1 => {
            let ra = random_recipe(rng, true);
            let rb = random_recipe(rng, true);
            let (rec_a, br_a) = branch_from_beta(ra).ok()?;
            let (rec_b, _) = branch_from_beta(rb).ok()?;
            let limit = structural_prefix(&rec_a, &rec_b);
            tree = TreeBuilder::from_records(rec_a.clone());
            let a_chain: Vec<PointId> = (1..=rec_a.len()).map(PointId::new).collect();
            let mut depth = if rng.gen_bool(0.4) {
                limit
            } else {
                rng.gen_range(1..=limit)
            };
            // avoid landing on an occupied satellite position
            while depth < limit
                && depth < rec_b.len()
                && rec_b[depth].satellite_of.is_some()
                && rec_a.get(depth).is_some_and(|r| {
                    r.parent == rec_b[depth].parent && r.satellite_of == rec_b[depth].satellite_of
                })
            {
                depth += 1;
            }
            let max_b = if depth >= rec_b.len() {
                PointId::new(depth.min(rec_b.len()))
            } else {
                tree.graft(&a_chain[..depth], &rec_b)
            };
            branch_points.push(br_a.at);
            branch_points.push(max_b);
        }
        // star of smooth branches sharing free prefixes
        2 => {
            tree = TreeBuilder::new();
            let count = rng.gen_range(2..=cfg.max_branches.min(5));
            let mut first_chain = vec![PointId::new(1)];
            let first_len = rng.gen_range(1..=5usize);
            for _ in 1..first_len {
                let p = *first_chain.last().unwrap();
                first_chain.push(tree.add_free(p));
            }
            branch_points.push(*first_chain.last().unwrap());
            for _ in 1..count {
                let depth = rng.gen_range(1..=first_chain.len());
                let mut cur = first_chain[depth - 1];
                for _ in 0..rng.gen_range(0..=3usize) {
                    cur = tree.add_free(cur);
                }
                branch_points.push(cur);
            }
        }
        // duplicated curvettes: shared terminal satellites and multiple points
        3 => {
            let recipe = random_recipe(rng, false);
            let (records, branch) = branch_from_beta(recipe).ok()?;
            tree = TreeBuilder::from_records(records);
            branch_points.push(branch.at);
            let copies = rng.gen_range(1..=2usize);
            for _ in 0..copies {
                if rng.gen_bool(0.6) {
                    branch_points.push(branch.at);
                } else {
                    let j = PointId::new(rng.gen_range(1..=tree.len()));
                    branch_points.push(j);
                }
            }
        }
        // free random growth
        _ => {
            tree = TreeBuilder::new();
            let target = rng.gen_range(4..=cfg.max_points.min(24));
            while tree.len() < target {
                let base = if rng.gen_bool(0.7) && tree.len() > 1 {
                    PointId::new(rng.gen_range(tree.len().saturating_sub(3).max(1)..=tree.len()))
                } else {
                    PointId::new(rng.gen_range(1..=tree.len()))
                };
                let candidates = tree.satellite_candidates(base);
                if !candidates.is_empty() && rng.gen_bool(0.45) {
                    let q = candidates[rng.gen_range(0..candidates.len())];
                    tree.add_satellite(base, q);
                } else {
                    tree.add_free(base);
                }
            }
        }
    }

    // every childless point carries a branch, so chains cover the tree
    let is_parent: Vec<bool> = {
        let mut flags = vec![false; tree.len()];
        for r in &tree.records {
            if let Some(p) = r.parent {
                flags[p.pos()] = true;
            }
        }
        flags
    };
    for (pos, taken) in is_parent.iter().enumerate() {
        let id = PointId::new(pos + 1);
        if !taken && !branch_points.contains(&id) {
            branch_points.push(id);
        }
    }

    if tree.len() > cfg.max_points {
        return None;
    }

    // repair non-minimal or excluded shapes by adding curvette branches
    for _round in 0..24 {
        if branch_points.len() > cfg.max_branches {
            return None;
        }
        let constellation =
            Constellation::from_records(tree.records.clone()).expect("generated records are valid");
        let branches: Vec<Branch> = branch_points
            .iter()
            .enumerate()
            .map(|(i, &at)| Branch::new(format!("C{}", i + 1), at))
            .collect();
        let spec = CurveSpec::new(constellation, branches).expect("chains cover the tree");
        let report = spec.check_minimality();
        if report.minimal && report.excluded.is_none() {
            return Some(spec);
        }
        match report.excluded {
            Some(crate::constellation::ExcludedKind::SmoothCurve) => {
                branch_points.push(*branch_points.first().unwrap());
                continue;
            }
            Some(crate::constellation::ExcludedKind::TwoSmoothTransversal) => {
                branch_points.push(PointId::new(1));
                continue;
            }
            None => {}
        }
        match report.unnecessary_points().first() {
            Some(&p) => branch_points.push(p),
            None => return Some(spec),
        }
    }
    None
}

/// Deterministic random curve spec: identical seed, identical spec. The
/// output is always a valid, minimal resolution outside the excluded
/// degenerate shapes.
pub fn random_spec(cfg: &GenConfig) -> Result<CurveSpec> {
    for attempt in 0..256u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(
            cfg.seed
                .wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15)),
        ));
        if let Some(spec) = try_generate(&mut rng, cfg) {
            return Ok(spec);
        }
    }
    Err(Error::GenerationFailed { seed: cfg.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{beta, branch_invariants};
    use num_bigint::BigInt;

    #[test]
    fn euclid_sequences() {
        assert_eq!(multiplicity_sequence(2, 3), vec![2, 1, 1]);
        assert_eq!(multiplicity_sequence(5, 17), vec![5, 5, 5, 2, 2, 1, 1]);
        assert_eq!(multiplicity_sequence(2, 5), vec![2, 2, 1, 1]);
        assert_eq!(multiplicity_sequence(3, 11), vec![3, 3, 3, 2, 1, 1]);
    }

    #[test]
    fn cusp_from_beta() {
        let (records, branch) =
            branch_from_beta(BranchRecipe::OnePair { beta0: 2, beta1: 3 }).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[2], PointRecord::satellite(3, 2, 1));
        assert_eq!(branch.at, PointId::new(3));
    }

    #[test]
    fn five_seventeen_has_one_terminal_satellite() {
        let (records, branch) = branch_from_beta(BranchRecipe::OnePair {
            beta0: 5,
            beta1: 17,
        })
        .unwrap();
        let c = Constellation::from_records(records).unwrap();
        let spec = CurveSpec::new(c, vec![branch]).unwrap();
        let inv = branch_invariants(&spec, 0).unwrap();
        assert_eq!(inv.terminal_satellites, vec![PointId::new(7)]);
        assert_eq!(inv.beta0, BigInt::from(5));
        assert_eq!(inv.beta1, BigInt::from(17));
    }

    #[test]
    fn smooth_recipe_round_trip() {
        let (records, branch) = branch_from_beta(BranchRecipe::Smooth { length: 3 }).unwrap();
        let c = Constellation::from_records(records).unwrap();
        let spec = CurveSpec::new(c, vec![branch]).unwrap();
        assert_eq!(beta(&spec, 0).unwrap(), (BigInt::from(1), BigInt::from(3)));
    }

    #[test]
    fn bad_recipes_are_rejected() {
        assert_eq!(
            branch_from_beta(BranchRecipe::OnePair { beta0: 2, beta1: 4 }),
            Err(Error::NotCoprime(2, 4))
        );
        assert_eq!(
            branch_from_beta(BranchRecipe::OnePair { beta0: 3, beta1: 2 }),
            Err(Error::BadOrder(3, 2))
        );
    }

    #[test]
    fn figure1_fixture_footprint() {
        let spec = example_figure1();
        assert_eq!(spec.constellation.len(), 17);
        assert_eq!(spec.branch_count(), 8);
        assert!(spec.check_minimality().minimal);
        let satellites: Vec<usize> = spec
            .constellation
            .ids()
            .filter(|&j| spec.constellation.is_satellite(j))
            .map(PointId::index)
            .collect();
        assert_eq!(satellites, vec![5, 6, 7, 8, 11, 13, 17]);
    }

    #[test]
    fn random_specs_are_deterministic_and_minimal() {
        for seed in 0..40u64 {
            let cfg = GenConfig {
                seed,
                ..GenConfig::default()
            };
            let a = random_spec(&cfg).unwrap();
            let b = random_spec(&cfg).unwrap();
            assert_eq!(a, b, "seed {seed} must be reproducible");
            let report = a.check_minimality();
            assert!(report.minimal, "seed {seed} not minimal");
            assert!(report.excluded.is_none(), "seed {seed} excluded");
            assert!(a.constellation.len() <= cfg.max_points);
            assert!(a.branch_count() <= cfg.max_branches);
        }
    }

    #[test]
    fn beta_round_trip_on_a_sample() {
        for (b0, b1) in [(2u64, 3u64), (2, 5), (3, 4), (5, 17), (7, 16), (11, 59)] {
            let (records, branch) = branch_from_beta(BranchRecipe::OnePair {
                beta0: b0,
                beta1: b1,
            })
            .unwrap();
            let c = Constellation::from_records(records).unwrap();
            let spec = CurveSpec::new(c, vec![branch]).unwrap();
            assert_eq!(
                beta(&spec, 0).unwrap(),
                (BigInt::from(b0), BigInt::from(b1)),
                "round trip of ({b0},{b1})"
            );
        }
    }
}
