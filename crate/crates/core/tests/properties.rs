//! Property tests: algebraic identities of the proximity calculus and
//! round trips of the branch constructor.

use num_bigint::BigInt;
use proptest::prelude::*;

use lct_core::constellation::IntVector;
use lct_core::gen::{branch_from_beta, random_spec, BranchRecipe, GenConfig};
use lct_core::invariants::{beta, contact_pair};
use lct_core::{Constellation, CurveSpec, PointId};

fn spec_for_seed(seed: u64) -> CurveSpec {
    random_spec(&GenConfig {
        seed,
        ..GenConfig::default()
    })
    .expect("generator succeeds")
}

fn apply_matrix(c: &Constellation, v: &IntVector) -> Vec<BigInt> {
    let m = c.proximity_matrix();
    (0..c.len())
        .map(|row| {
            (0..c.len())
                .map(|col| BigInt::from(m[row][col]) * &v[PointId::new(col + 1)])
                .sum()
        })
        .collect()
}

proptest! {
    #[test]
    fn p_inverse_is_linear(seed in 0u64..500, raw in prop::collection::vec(-50i64..50, 40)) {
        let spec = spec_for_seed(seed);
        let c = &spec.constellation;
        let m = c.len();
        let u = IntVector::from_entries(raw[..m].iter().map(|&x| BigInt::from(x)).collect());
        let v = IntVector::from_entries(raw[..m].iter().rev().map(|&x| BigInt::from(x)).collect());
        let sum = c.apply_p_inverse(&u.add(&v));
        let parts = c.apply_p_inverse(&u).add(&c.apply_p_inverse(&v));
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn p_inverse_inverts_the_matrix(seed in 0u64..500, raw in prop::collection::vec(0i64..30, 40)) {
        let spec = spec_for_seed(seed);
        let c = &spec.constellation;
        let m = c.len();
        let v = IntVector::from_entries(raw[..m].iter().map(|&x| BigInt::from(x)).collect());
        let w = c.apply_p_inverse(&v);
        let back = apply_matrix(c, &w);
        for j in c.ids() {
            prop_assert_eq!(&back[j.pos()], &v[j]);
        }
    }

    #[test]
    fn contact_pairs_are_symmetric(seed in 0u64..500) {
        let spec = spec_for_seed(seed);
        let r = spec.branch_count();
        for i in 0..r {
            for s in i + 1..r {
                prop_assert_eq!(
                    contact_pair(&spec, i, s).unwrap(),
                    contact_pair(&spec, s, i).unwrap()
                );
            }
        }
    }
}

/// Exhaustive round trip of the one-pair constructor over the stated
/// parameter box.
#[test]
fn beta_round_trip_exhaustive() {
    let mut checked = 0usize;
    for beta0 in 2u64..=12 {
        for beta1 in beta0 + 1..=60 {
            if num_integer::gcd(beta0, beta1) != 1 {
                continue;
            }
            let (records, branch) =
                branch_from_beta(BranchRecipe::OnePair { beta0, beta1 }).unwrap();
            let c = Constellation::from_records(records).unwrap();
            let spec = CurveSpec::new(c, vec![branch]).unwrap();
            assert_eq!(
                beta(&spec, 0).unwrap(),
                (BigInt::from(beta0), BigInt::from(beta1)),
                "round trip of ({beta0},{beta1})"
            );
            assert!(spec.check_minimality().minimal, "({beta0},{beta1}) minimal");
            checked += 1;
        }
    }
    assert!(checked > 300, "swept {checked} coprime pairs");
}

/// The independent reconstruction of the second contact value: the sum
/// of the multiplicities over the initial free run.
#[test]
fn beta1_equals_free_run_sum() {
    for (b0, b1) in [(2u64, 3u64), (2, 7), (3, 8), (5, 12), (7, 30), (9, 64)] {
        let (records, branch) = branch_from_beta(BranchRecipe::OnePair {
            beta0: b0,
            beta1: b1,
        })
        .unwrap();
        let c = Constellation::from_records(records).unwrap();
        let spec = CurveSpec::new(c, vec![branch]).unwrap();
        let mult = spec.branch_multiplicities(0).unwrap();
        let run_sum: BigInt = spec
            .branch_chain(0)
            .unwrap()
            .into_iter()
            .take_while(|&p| spec.constellation.is_free(p))
            .map(|p| mult[p].clone())
            .sum();
        assert_eq!(run_sum, BigInt::from(b1));
    }
}
