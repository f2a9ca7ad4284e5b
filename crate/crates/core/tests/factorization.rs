//! Markov factorization, d-separation soundness and the network reductions.

use std::collections::BTreeMap;

use causalgap::sampling::{
    g2_in_g1_driver, lemma1_driver, lemma3_driver, random_dag, random_distribution, random_factorized_table,
    random_g1_conditioned_table, rng, theorem1_driver,
};
use causalgap::scenarios::{build_g1, lemma1_reduction_check, ScenarioError};
use causalgap::{Alphabet, Cpd, JointTable, Rational};
use num_traits::Zero;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Conditional independence by explicit conditional probabilities:
/// `P(x | y, z) = P(x | z)` wherever `P(y, z) > 0`.
fn ci_oracle(t: &JointTable<Rational>, x: &str, y: &str, z: &[&str]) -> bool {
    let cards = t.cards();
    let ix = t.var_index(x).unwrap();
    let iy = t.var_index(y).unwrap();
    let iz: Vec<usize> = z.iter().map(|n| t.var_index(n).unwrap()).collect();
    let mut p_xyz: BTreeMap<(usize, usize, Vec<usize>), Rational> = BTreeMap::new();
    for (a, p) in t.iter() {
        let key = (a[ix], a[iy], iz.iter().map(|&i| a[i]).collect::<Vec<_>>());
        *p_xyz.entry(key).or_insert_with(Rational::zero) += p;
    }
    let get = |xv: Option<usize>, yv: Option<usize>, zv: &[usize]| -> Rational {
        p_xyz
            .iter()
            .filter(|((a, b, c), _)| xv.is_none_or(|v| v == *a) && yv.is_none_or(|v| v == *b) && c == zv)
            .map(|(_, p)| p.clone())
            .sum()
    };
    let zs: Vec<Vec<usize>> =
        causalgap::table::assignments(&iz.iter().map(|&i| cards[i]).collect::<Vec<_>>()).collect();
    for zv in &zs {
        let pz = get(None, None, zv);
        for yv in 0..cards[iy] {
            let pyz = get(None, Some(yv), zv);
            if pyz.is_zero() {
                continue;
            }
            for xv in 0..cards[ix] {
                if get(Some(xv), Some(yv), zv) / &pyz != get(Some(xv), None, zv) / &pz {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn theorem1_forward_property() {
    let report = theorem1_driver(1, 120, 5).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert!(report.checks > 120);
}

#[test]
fn cond_independence_agrees_with_oracle() {
    let mut g = rng(3);
    let mut positives = 0;
    for _ in 0..150 {
        let dag = random_dag(&mut g, 5, 0.5);
        let t = random_factorized_table(&mut g, &dag, 2);
        let names: Vec<String> = dag.node_names().map(String::from).collect();
        let z: Vec<&str> = names[2..]
            .iter()
            .map(|s| s.as_str())
            .filter(|_| rand::Rng::gen_bool(&mut g, 0.5))
            .collect();
        let fast = t
            .is_cond_independent(&[names[0].as_str()], &[names[1].as_str()], &z)
            .unwrap();
        assert_eq!(fast, ci_oracle(&t, &names[0], &names[1], &z));
        positives += fast as usize;
    }
    assert!(positives > 0);
}

#[test]
fn lemma1_property() {
    let report = lemma1_driver(7, 220);
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn lemma3_property() {
    let report = lemma3_driver(8, 220);
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn g2_distributions_are_g1_distributions() {
    let report = g2_in_g1_driver(9, 100).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn lemma1_example_matches_direct_sum() {
    // Independent reconstruction: Σ_{a,b} of the generating product, here
    // checked against the library's marginal of a conditioned table.
    let mut g = rng(12);
    let q = random_g1_conditioned_table(&mut g);
    let direct = q.marginal_ordered(&["C", "D", "E", "F_O"]).unwrap();
    assert_eq!(direct.total(), r(1, 1));
    assert!(lemma1_reduction_check(&q).unwrap());
}

#[test]
fn condition2_violation_is_a_precondition_error() {
    // E copies C instead of A.
    let g1 = build_g1();
    let half = || vec![r(1, 2), r(1, 2)];
    let mut cpds = BTreeMap::new();
    for v in ["A", "B", "C"] {
        cpds.insert(v.to_string(), Cpd::prior(half()));
    }
    cpds.insert("D".into(), Cpd::from_fn(2, &[2, 2], |_, _| r(1, 2)));
    cpds.insert("E".into(), Cpd::deterministic(2, &[2, 2, 2], |pa| pa[1]));
    cpds.insert("F".into(), Cpd::deterministic(4, &[2, 2], |pa| pa[0]));
    let q = JointTable::build_from_conditionals(&g1, &cpds)
        .unwrap()
        .split_variable("F", &[("F_O", 2), ("F_S", 2)])
        .unwrap();
    assert!(matches!(
        lemma1_reduction_check(&q),
        Err(ScenarioError::PreconditionViolated(_))
    ));
}

#[test]
fn non_factorizing_table_is_rejected() {
    let vars: Vec<Alphabet> = ["A", "B", "C", "D", "E", "F_O", "F_S"]
        .iter()
        .map(|n| Alphabet::new(*n, 2))
        .collect();
    // A and B perfectly correlated although both are roots.
    let q = JointTable::from_fn(vars, |a| if a.iter().all(|&v| v == a[0]) { r(1, 2) } else { r(0, 1) }).unwrap();
    assert!(matches!(
        lemma1_reduction_check(&q),
        Err(ScenarioError::PreconditionViolated(_))
    ));
}

#[test]
fn marginalize_and_condition_commute() {
    let mut g = rng(21);
    for _ in 0..100 {
        let dag = random_dag(&mut g, 5, 0.5);
        if dag.len() < 3 {
            continue;
        }
        let t = random_factorized_table(&mut g, &dag, 2);
        let names: Vec<&str> = dag.node_names().collect();
        let on = [(names[0], 1usize)];
        if t.prob_of(&on).unwrap().is_zero() {
            continue;
        }
        let keep: Vec<&str> = names[..names.len() - 1].to_vec();
        let kept_after: Vec<&str> = keep[1..].to_vec();
        let a = t.condition(&on).unwrap().marginalize(&kept_after).unwrap();
        let b = t.marginalize(&keep).unwrap().condition(&on).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn split_merge_and_json_round_trip() {
    let mut g = rng(4);
    let vars = vec![Alphabet::new("X", 4), Alphabet::new("Y", 2)];
    let mut dist = random_distribution(&mut g, 8).into_iter();
    let t = JointTable::from_fn(vars, |_| dist.next().unwrap()).unwrap();
    let split = t.split_variable("X", &[("X1", 2), ("X2", 2)]).unwrap();
    assert_eq!(split.merge_variables(&["X1", "X2"], "X").unwrap(), t);
    let back = JointTable::<Rational>::from_json_str(&t.to_json_string()).unwrap();
    assert_eq!(back, t);
}
