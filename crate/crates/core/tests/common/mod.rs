//! Random generators and brute-force oracles shared by the integration tests.
//! Oracles here use only parent pointers and plain integer arithmetic.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gdf_core::config::{AutStarProduct, Configuration, GroupElement};
use gdf_core::divisors::{BaseCurve, GraphDivisor};
use gdf_core::rational::frac;
use gdf_core::tree::RootedTree;
use gdf_core::Rat;
use num::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Principal lattice as the oracle sees it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lat {
    Full(usize),
    Zero(usize),
    /// Multiples of one generator.
    Rank1(Vec<i64>),
}

impl Lat {
    pub fn dim(&self) -> usize {
        match self {
            Lat::Full(n) | Lat::Zero(n) => *n,
            Lat::Rank1(g) => g.len(),
        }
    }

    pub fn contains(&self, c: &[i64]) -> bool {
        match self {
            Lat::Full(_) => true,
            Lat::Zero(_) => c.iter().all(|&x| x == 0),
            Lat::Rank1(g) => {
                let Some(j) = g.iter().position(|&x| x != 0) else {
                    return c.iter().all(|&x| x == 0);
                };
                if c[j] % g[j] != 0 {
                    return false;
                }
                let k = c[j] / g[j];
                c.iter().zip(g).all(|(&x, &y)| x == k * y)
            }
        }
    }

    pub fn generators(&self) -> Vec<Vec<i64>> {
        match self {
            Lat::Full(n) => (0..*n)
                .map(|i| (0..*n).map(|j| i64::from(i == j)).collect())
                .collect(),
            Lat::Zero(_) => Vec::new(),
            Lat::Rank1(g) => vec![g.clone()],
        }
    }

    pub fn base(&self) -> BaseCurve {
        let n = self.dim();
        BaseCurve::new(
            (1..=n).map(|i| format!("b{i}")).collect(),
            self.generators(),
            Vec::new(),
        )
        .expect("valid base")
    }

    /// A small random lattice element.
    pub fn sample(&self, rng: &mut Rng8) -> Vec<i64> {
        match self {
            Lat::Full(n) => (0..*n).map(|_| rng.gen_range(-2..=2)).collect(),
            Lat::Zero(n) => vec![0; *n],
            Lat::Rank1(g) => {
                let k = rng.gen_range(-1..=1);
                g.iter().map(|x| k * x).collect()
            }
        }
    }
}

pub fn random_lat(rng: &mut Rng8, n: usize) -> Lat {
    match rng.gen_range(0..3) {
        0 => Lat::Full(n),
        1 => Lat::Zero(n),
        _ => loop {
            let g: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            if g.iter().any(|&x| x != 0) {
                break Lat::Rank1(g);
            }
        },
    }
}

/// Level of every vertex, by walking parent pointers.
pub fn levels(t: &RootedTree) -> Vec<usize> {
    (0..t.len())
        .map(|mut v| {
            let mut l = 0;
            while let Some(p) = t.parent(v) {
                v = p;
                l += 1;
            }
            l
        })
        .collect()
}

fn child_counts(t: &RootedTree) -> Vec<usize> {
    let mut c = vec![0; t.len()];
    for v in 0..t.len() {
        if let Some(p) = t.parent(v) {
            c[p] += 1;
        }
    }
    c
}

/// Levels of the vertices without children (the root alone for a single
/// vertex), sorted.
pub fn leaf_levels(t: &RootedTree) -> Vec<usize> {
    let c = child_counts(t);
    let l = levels(t);
    let mut out: Vec<usize> = (0..t.len()).filter(|&v| c[v] == 0).map(|v| l[v]).collect();
    out.sort_unstable();
    out
}

pub fn is_chain(t: &RootedTree) -> bool {
    child_counts(t).iter().all(|&c| c <= 1)
}

pub fn edge_count(t: &RootedTree) -> usize {
    (0..t.len()).filter(|&v| t.parent(v).is_some()).count()
}

/// A random tree whose leaves sit exactly on `levels` (a single vertex for
/// `[0]`). Leaves are added deepest first, each on a fresh path hanging off
/// a random inner vertex.
pub fn tree_with_levels(rng: &mut Rng8, levels: &[usize]) -> RootedTree {
    let mut want = levels.to_vec();
    want.sort_unstable_by(|a, b| b.cmp(a));
    if want == [0] {
        return RootedTree::single_vertex();
    }
    assert!(want.iter().all(|&l| l >= 1), "leaf levels must be positive");
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut level = vec![0usize];
    let mut inner = vec![true];
    for &l in &want {
        let choices: Vec<usize> = (0..parent.len())
            .filter(|&v| inner[v] && level[v] < l)
            .collect();
        let mut at = *choices.choose(rng).expect("the root is always inner");
        for _ in level[at]..l {
            parent.push(Some(at));
            level.push(level[at] + 1);
            inner.push(false);
            inner[at] = true;
            at = parent.len() - 1;
        }
    }
    // shuffle vertex indices so that label order carries no information
    let n = parent.len();
    let mut perm: Vec<usize> = (1..n).collect();
    perm.shuffle(rng);
    let mut new_of = vec![0; n];
    for (k, &v) in perm.iter().enumerate() {
        new_of[v] = k + 1;
    }
    let mut shuffled = vec![None; n];
    for v in 1..n {
        shuffled[new_of[v]] = parent[v].map(|p| new_of[p]);
    }
    RootedTree::from_parent_indices(shuffled).expect("valid tree")
}

pub fn random_levels(rng: &mut Rng8, max_leaves: usize, max_height: usize) -> Vec<usize> {
    if rng.gen_ratio(1, 12) {
        return vec![0];
    }
    let k = rng.gen_range(1..=max_leaves);
    (0..k).map(|_| rng.gen_range(1..=max_height)).collect()
}

pub fn random_tree(rng: &mut Rng8, max_leaves: usize, max_height: usize) -> RootedTree {
    let l = random_levels(rng, max_leaves, max_height);
    tree_with_levels(rng, &l)
}

pub fn random_divisor(
    rng: &mut Rng8,
    lat: &Lat,
    max_leaves: usize,
    max_height: usize,
) -> GraphDivisor {
    let trees = (0..lat.dim())
        .map(|_| random_tree(rng, max_leaves, max_height))
        .collect();
    GraphDivisor::new(lat.base(), trees).expect("valid divisor")
}

pub fn small_rat(rng: &mut Rng8) -> Rat {
    frac(rng.gen_range(-6..=6), rng.gen_range(1..=3))
}

pub fn random_config(rng: &mut Rng8, d: &GraphDivisor) -> Configuration {
    let sets = d
        .trees()
        .iter()
        .map(|t| {
            let counts = child_counts(t);
            (0..t.len())
                .filter(|&v| counts[v] > 0)
                .map(|v| {
                    let mut s: Vec<Rat> = Vec::new();
                    while s.len() < counts[v] {
                        let x = small_rat(rng);
                        if !s.contains(&x) {
                            s.push(x);
                        }
                    }
                    (v, s)
                })
                .collect::<BTreeMap<_, _>>()
        })
        .collect();
    Configuration::new(sets)
}

pub fn random_group_element(rng: &mut Rng8, d: &GraphDivisor) -> GroupElement {
    let alpha = loop {
        let a = small_rat(rng);
        if !a.is_zero() {
            break a;
        }
    };
    let beta = d
        .trees()
        .iter()
        .map(|t| (0..t.height()).map(|_| small_rat(rng)).collect())
        .collect();
    let prod = AutStarProduct::new(d, 1_000_000).expect("small groups");
    let autos = prod.element(rng.gen_range(0..prod.len()));
    GroupElement { alpha, beta, autos }
}

/// `s'(v) = α · s(a(v)) + β_{i, level(v)}`, computed directly.
pub fn oracle_act(g: &GroupElement, s: &Configuration, d: &GraphDivisor) -> Configuration {
    let sets = s
        .sets
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let lv = levels(d.tree(i));
            m.keys()
                .map(|&v| {
                    let src = &s.sets[i][&g.autos[i].map[v]];
                    let mut img: Vec<Rat> = src
                        .iter()
                        .map(|x| &g.alpha * x + &g.beta[i][lv[v]])
                        .collect();
                    img.sort();
                    (v, img)
                })
                .collect()
        })
        .collect();
    Configuration { sets }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Brute force: some shift `c ∈ [-10, 10]^n` in the lattice and, per point,
/// a bijection `σ` of components with `level_Y(σ(j)) = level_X(j) - c_i`.
/// Returns the feasible shift per point (all candidates).
pub fn brute_force_shifts(x: &[Vec<usize>], y: &[Vec<usize>]) -> Vec<Vec<i64>> {
    x.iter()
        .zip(y)
        .map(|(lx, ly)| {
            if lx.len() != ly.len() {
                return Vec::new();
            }
            let perms = permutations(lx.len());
            (-10i64..=10)
                .filter(|&c| {
                    perms
                        .iter()
                        .any(|s| (0..lx.len()).all(|j| ly[s[j]] as i64 == lx[j] as i64 - c))
                })
                .collect()
        })
        .collect()
}

pub fn brute_force_iso(lat: &Lat, x: &[Vec<usize>], y: &[Vec<usize>]) -> Option<Vec<i64>> {
    let per_point = brute_force_shifts(x, y);
    let mut found = None;
    let mut cur = Vec::new();
    fn go(
        i: usize,
        per_point: &[Vec<i64>],
        lat: &Lat,
        cur: &mut Vec<i64>,
        found: &mut Option<Vec<i64>>,
    ) {
        if found.is_some() {
            return;
        }
        if i == per_point.len() {
            if lat.contains(cur) {
                *found = Some(cur.clone());
            }
            return;
        }
        for &c in &per_point[i] {
            cur.push(c);
            go(i + 1, per_point, lat, cur, found);
            cur.pop();
        }
    }
    go(0, &per_point, lat, &mut cur, &mut found);
    found
}

/// Integer polynomial `Π (u - r)`, coefficients low degree first.
pub fn int_poly_from_roots(roots: &[i64]) -> Vec<i64> {
    let mut p = vec![1i64];
    for &r in roots {
        let mut q = vec![0i64; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            q[k + 1] += c;
            q[k] -= r * c;
        }
        p = q;
    }
    p
}

pub fn as_ints(coeffs: &[Rat]) -> Vec<i64> {
    coeffs
        .iter()
        .map(|c| {
            assert!(c.is_integer(), "non-integer coefficient {c}");
            c.numer().to_i64().expect("small coefficient")
        })
        .collect()
}
