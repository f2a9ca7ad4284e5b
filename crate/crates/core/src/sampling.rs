//! Seeded random instances for the property drivers: DAGs, exact
//! conditionals and classical tables obeying the reduction side
//! conditions.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CausalGraph, NodeKind};
use crate::scalar::Scalar;
use crate::scenarios::{build_g1, build_g2, build_triangle};
use crate::table::{Cpd, JointTable, TableError};

pub const DEFAULT_SEED: u64 = 0x5eed_ca05;
/// Largest denominator used for random conditionals.
pub const MAX_DENOMINATOR: i64 = 16;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random distribution over `card` outcomes with common denominator at
/// most [`MAX_DENOMINATOR`]; entries may be zero.
pub fn random_distribution<R: Rng>(rng: &mut R, card: usize) -> Vec<BigRational> {
    let d = rng.gen_range(card.max(1) as i64..=MAX_DENOMINATOR.max(card as i64));
    // Cut points of a weak composition of d into `card` parts.
    let mut cuts: Vec<i64> = (0..card - 1).map(|_| rng.gen_range(0..=d)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(card);
    for c in cuts.into_iter().chain(std::iter::once(d)) {
        out.push(BigRational::from_ratio(c - prev, d));
        prev = c;
    }
    out
}

pub fn random_cpd<R: Rng>(rng: &mut R, card: usize, parent_cards: &[usize]) -> Cpd<BigRational> {
    let rows: usize = parent_cards.iter().product();
    Cpd {
        card,
        rows: (0..rows).map(|_| random_distribution(rng, card)).collect(),
    }
}

/// Random DAG on `2..=max_nodes` nodes `X0, X1, ...`: a random
/// topological order, each forward edge present with probability
/// `density`, each node latent with probability 1/4.
pub fn random_dag<R: Rng>(rng: &mut R, max_nodes: usize, density: f64) -> CausalGraph {
    let n = rng.gen_range(2..=max_nodes.max(2));
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((names[order[i]].clone(), names[order[j]].clone()));
            }
        }
    }
    let nodes: Vec<(String, NodeKind)> = names
        .iter()
        .map(|s| {
            let kind = if rng.gen_bool(0.25) {
                NodeKind::Latent
            } else {
                NodeKind::Observed
            };
            (s.clone(), kind)
        })
        .collect();
    CausalGraph::new(nodes, edges).expect("forward edges are acyclic")
}

/// Random conditionals for every node of `g`, each of alphabet `card`.
pub fn random_cpds<R: Rng>(rng: &mut R, g: &CausalGraph, card: usize) -> BTreeMap<String, Cpd<BigRational>> {
    (0..g.len())
        .map(|v| {
            let parent_cards = vec![card; g.parent_ids(v).len()];
            (g.name(v).to_string(), random_cpd(rng, card, &parent_cards))
        })
        .collect()
}

pub fn random_factorized_table<R: Rng>(rng: &mut R, g: &CausalGraph, card: usize) -> JointTable<BigRational> {
    JointTable::build_from_conditionals(g, &random_cpds(rng, g, card)).expect("random conditionals are valid")
}

fn random_map<R: Rng>(rng: &mut R) -> [usize; 2] {
    [rng.gen_range(0..2), rng.gen_range(0..2)]
}

/// Classical G₁ table over `A, B, C, D, E, F_O, F_S` with
/// `E = F_S = g(A)` for a random `g` and `E` ignoring `C, D`, so that both
/// side conditions hold.
pub fn random_g1_conditioned_table<R: Rng>(rng: &mut R) -> JointTable<BigRational> {
    let g1 = build_g1();
    let g = random_map(rng);
    let mut cpds = BTreeMap::new();
    cpds.insert("A".to_string(), Cpd::prior(random_distribution(rng, 2)));
    cpds.insert("B".to_string(), Cpd::prior(random_distribution(rng, 2)));
    cpds.insert("C".to_string(), Cpd::prior(random_distribution(rng, 2)));
    cpds.insert("D".to_string(), random_cpd(rng, 2, &[2, 2]));
    // E's parents in graph order: A, C, D.
    cpds.insert("E".to_string(), Cpd::deterministic(2, &[2, 2, 2], |pa| g[pa[0]]));
    // F = (F_O, F_S) with parents A, B.
    let f_o = random_cpd(rng, 2, &[2, 2]);
    cpds.insert(
        "F".to_string(),
        Cpd::from_fn(4, &[2, 2], |pa, f| {
            let (o, s) = (f / 2, f % 2);
            if s == g[pa[0]] {
                f_o.rows[pa[0] * 2 + pa[1]][o].clone()
            } else {
                BigRational::zero()
            }
        }),
    );
    JointTable::build_from_conditionals(&g1, &cpds)
        .and_then(|t| t.split_variable("F", &[("F_O", 2), ("F_S", 2)]))
        .expect("conditionals are valid")
}

/// Classical triangle table over `A, B, C, S1, O1, S1', S2', S2, O2` with
/// `S1 = S1' = h(C)` and `S2 = S2' = g(A)`.
pub fn random_triangle_conditioned_table<R: Rng>(rng: &mut R) -> JointTable<BigRational> {
    let tri = build_triangle();
    let g = random_map(rng);
    let h = random_map(rng);
    let mut cpds = BTreeMap::new();
    for latent in ["A", "B", "C"] {
        cpds.insert(latent.to_string(), Cpd::prior(random_distribution(rng, 2)));
    }
    // D = (S1, O1) with parents B, C.
    let o1 = random_cpd(rng, 2, &[2, 2]);
    cpds.insert(
        "D".to_string(),
        Cpd::from_fn(4, &[2, 2], |pa, d| {
            if d / 2 == h[pa[1]] {
                o1.rows[pa[0] * 2 + pa[1]][d % 2].clone()
            } else {
                BigRational::zero()
            }
        }),
    );
    // E = (S1', S2') with parents A, C.
    cpds.insert(
        "E".to_string(),
        Cpd::deterministic(4, &[2, 2], |pa| h[pa[1]] * 2 + g[pa[0]]),
    );
    // F = (S2, O2) with parents A, B.
    let o2 = random_cpd(rng, 2, &[2, 2]);
    cpds.insert(
        "F".to_string(),
        Cpd::from_fn(4, &[2, 2], |pa, f| {
            if f / 2 == g[pa[0]] {
                o2.rows[pa[0] * 2 + pa[1]][f % 2].clone()
            } else {
                BigRational::zero()
            }
        }),
    );
    JointTable::build_from_conditionals(&tri, &cpds)
        .and_then(|t| t.split_variable("D", &[("S1", 2), ("O1", 2)]))
        .and_then(|t| t.split_variable("E", &[("S1'", 2), ("S2'", 2)]))
        .and_then(|t| t.split_variable("F", &[("S2", 2), ("O2", 2)]))
        .expect("conditionals are valid")
}

/// Unrestricted classical G₂ table (binary nodes, `F` of size 4).
pub fn random_g2_table<R: Rng>(rng: &mut R) -> JointTable<BigRational> {
    let g2 = build_g2();
    let mut cpds = random_cpds(rng, &g2, 2);
    cpds.insert("F".to_string(), random_cpd(rng, 4, &[2, 2]));
    JointTable::build_from_conditionals(&g2, &cpds).expect("conditionals are valid")
}

/// Outcome of a property driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: &'static str,
    pub samples: usize,
    pub checks: usize,
    /// Human-readable description of each failing instance.
    pub failures: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Every `all_dseps` triple of a random DAG (≤ `max_nodes` nodes) holds as
/// an exact conditional independence of a random binary factorized table.
pub fn theorem1_driver(seed: u64, samples: usize, max_nodes: usize) -> Result<PropertyReport, TableError> {
    let mut rng = rng(seed);
    let mut checks = 0;
    let mut failures = Vec::new();
    for sample in 0..samples {
        let g = random_dag(&mut rng, max_nodes, 0.5);
        let t = random_factorized_table(&mut rng, &g, 2);
        let names: Vec<&str> = g.node_names().collect();
        for d in g.all_dseps(&names).expect("nodes exist") {
            checks += 1;
            let z: Vec<&str> = d.given.iter().map(|s| s.as_str()).collect();
            if !t.is_cond_independent(&[d.x.as_str()], &[d.y.as_str()], &z)? {
                failures.push(format!(
                    "sample {sample}: {} _|_ {} | {{{}}}",
                    d.x.as_str(),
                    d.y.as_str(),
                    z.join(",")
                ));
            }
        }
    }
    Ok(PropertyReport {
        property: "theorem1",
        samples,
        checks,
        failures,
    })
}

/// `d_separated` agrees with path enumeration on every singleton pair and
/// a random conditioning set.
pub fn dsep_oracle_driver(seed: u64, samples: usize, max_nodes: usize) -> PropertyReport {
    let mut rng = rng(seed);
    let mut checks = 0;
    let mut failures = Vec::new();
    for sample in 0..samples {
        let g = random_dag(&mut rng, max_nodes, 0.4);
        for x in 0..g.len() {
            for y in 0..g.len() {
                if x == y {
                    continue;
                }
                let z: std::collections::BTreeSet<usize> = (0..g.len())
                    .filter(|&v| v != x && v != y && rng.gen_bool(0.3))
                    .collect();
                let fast = g.d_separated_ids(&[x].into(), &[y].into(), &z).expect("valid sets");
                let oracle = g
                    .simple_paths(x, y)
                    .iter()
                    .all(|p| g.is_blocked(p, &z).expect("valid path"));
                checks += 1;
                if fast != oracle {
                    failures.push(format!(
                        "sample {sample}: {} vs {} given {:?}",
                        g.name(x),
                        g.name(y),
                        g.names_of(&z)
                    ));
                }
            }
        }
    }
    PropertyReport {
        property: "dsep-oracle",
        samples,
        checks,
        failures,
    }
}

pub fn lemma1_driver(seed: u64, samples: usize) -> PropertyReport {
    let mut rng = rng(seed);
    let mut failures = Vec::new();
    for sample in 0..samples {
        let q = random_g1_conditioned_table(&mut rng);
        match crate::scenarios::lemma1_reduction_check(&q) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("sample {sample}: reduction mismatch")),
            Err(e) => failures.push(format!("sample {sample}: {e}")),
        }
    }
    PropertyReport {
        property: "lemma1",
        samples,
        checks: samples,
        failures,
    }
}

pub fn lemma3_driver(seed: u64, samples: usize) -> PropertyReport {
    let mut rng = rng(seed);
    let mut failures = Vec::new();
    for sample in 0..samples {
        let q = random_triangle_conditioned_table(&mut rng);
        match crate::scenarios::lemma3_reduction_check(&q) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("sample {sample}: reduction mismatch")),
            Err(e) => failures.push(format!("sample {sample}: {e}")),
        }
    }
    PropertyReport {
        property: "lemma3",
        samples,
        checks: samples,
        failures,
    }
}

/// Random classical G₂ tables factorize on G₁ as well.
pub fn g2_in_g1_driver(seed: u64, samples: usize) -> Result<PropertyReport, TableError> {
    let mut rng = rng(seed);
    let g1 = build_g1();
    let mut failures = Vec::new();
    for sample in 0..samples {
        if !random_g2_table(&mut rng).factorize_check(&g1)? {
            failures.push(format!("sample {sample}"));
        }
    }
    Ok(PropertyReport {
        property: "g2-in-g1",
        samples,
        checks: samples,
        failures,
    })
}

/// Whether `t` is exactly normalized; used by the drivers' self-checks.
pub fn is_exact_distribution<S: Scalar>(t: &JointTable<S>) -> bool {
    t.total() == S::one() && t.probs().iter().all(|p| !p.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{check_conditions, ConditionSpec};

    #[test]
    fn distributions_are_exact() {
        let mut r = rng(1);
        for card in 1..5 {
            for _ in 0..50 {
                let d = random_distribution(&mut r, card);
                assert_eq!(d.len(), card);
                assert_eq!(crate::scalar::sum(&d), BigRational::from_ratio(1, 1));
                assert!(d.iter().all(|p| *p.denom() <= 16.into() && !p.is_negative()));
            }
        }
    }

    #[test]
    fn conditioned_tables_satisfy_conditions() {
        let mut r = rng(2);
        for _ in 0..10 {
            let t = random_g1_conditioned_table(&mut r);
            assert!(is_exact_distribution(&t));
            assert!(check_conditions(&t, &ConditionSpec::g1()).unwrap().iter().all(|c| c.1));
            let t = random_triangle_conditioned_table(&mut r);
            assert!(is_exact_distribution(&t));
            assert!(check_conditions(&t, &ConditionSpec::triangle())
                .unwrap()
                .iter()
                .all(|c| c.1));
        }
    }

    #[test]
    fn drivers_are_deterministic() {
        assert_eq!(lemma1_driver(7, 5), lemma1_driver(7, 5));
        let a = rng(9).gen::<u64>();
        assert_eq!(a, rng(9).gen::<u64>());
    }
}
