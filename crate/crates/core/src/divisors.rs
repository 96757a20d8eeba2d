//! Base curves, graph divisors, Danielewski-Fieseler quotients and type
//! divisors.
//!
//! The base curve is never represented through its function field. All that
//! linear-equivalence questions need is the lattice `L ⊆ Z^n` of principal
//! divisors supported on the marked points `b_1, ..., b_n`, plus a finite
//! list of permutations of the marked points induced by automorphisms of
//! the base.
//!
//! Sign convention: a [`TypeDivisor`] stores the non-negative levels
//! `l_{i,j}` of the fiber components; the divisor it stands for is the
//! anti-effective `-Σ l_{i,j} b_{i,j}`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::tree::RootedTree;

#[derive(Clone, Debug)]
pub struct BaseCurve {
    points: Vec<String>,
    lattice: Lattice,
    /// 0-based permutations; `perm[i]` is the image of point `i`.
    base_autos: Vec<Vec<usize>>,
    units_trivial: bool,
}

impl BaseCurve {
    pub fn new(
        points: Vec<String>,
        principal_lattice: Vec<Vec<i64>>,
        base_autos: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Structural(
                "a base curve needs at least one marked point".into(),
            ));
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(Error::Structural(
                "marked point labels must be distinct".into(),
            ));
        }
        let lattice = Lattice::new(n, principal_lattice)?;
        for p in &base_autos {
            let mut seen = vec![false; n];
            if p.len() != n
                || p.iter()
                    .any(|&x| x >= n || std::mem::replace(&mut seen[x], true))
            {
                return Err(Error::Structural(format!(
                    "base automorphism {p:?} is not a permutation of the {n} marked points"
                )));
            }
            if !lattice.is_invariant_under(p)? {
                return Err(Error::Structural(format!(
                    "principal lattice is not closed under base automorphism {p:?}"
                )));
            }
        }
        Ok(Self {
            points,
            lattice,
            base_autos,
            units_trivial: true,
        })
    }

    /// Affine line: every divisor is principal (`L = Z^n`).
    pub fn affine_line(n: usize) -> Self {
        Self::with_lattice(n, Lattice::full(n))
    }

    /// No nonzero principal divisor supported on the marked points.
    pub fn rigid(n: usize) -> Self {
        Self::with_lattice(n, Lattice::zero(n))
    }

    fn with_lattice(n: usize, lattice: Lattice) -> Self {
        Self {
            points: (1..=n).map(|i| format!("b{i}")).collect(),
            lattice,
            base_autos: Vec::new(),
            units_trivial: true,
        }
    }

    pub fn with_units_trivial(mut self, units_trivial: bool) -> Self {
        self.units_trivial = units_trivial;
        self
    }

    pub fn with_autos(self, base_autos: Vec<Vec<usize>>) -> Result<Self> {
        let units = self.units_trivial;
        Ok(
            Self::new(self.points, self.lattice.generators().to_vec(), base_autos)?
                .with_units_trivial(units),
        )
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn base_autos(&self) -> &[Vec<usize>] {
        &self.base_autos
    }

    /// Whether `O(B)^× = k^*` is declared for this base.
    pub fn units_trivial(&self) -> bool {
        self.units_trivial
    }

    /// Same marked points, same lattice (as a set) and same automorphisms.
    pub fn same_as(&self, other: &BaseCurve) -> bool {
        self.points == other.points
            && self.lattice.basis() == other.lattice.basis()
            && self.base_autos == other.base_autos
    }

    pub fn to_json(&self) -> Value {
        let autos: Vec<Vec<usize>> = self
            .base_autos
            .iter()
            .map(|p| p.iter().map(|x| x + 1).collect())
            .collect();
        json!({
            "points": self.points,
            "principal_lattice": self.lattice.generators(),
            "base_autos": autos,
            "units_trivial": self.units_trivial,
        })
    }

    /// Parses `{"points": [...], "principal_lattice": [[...]] | "affine-line" |
    /// "rigid", "base_autos": [[perm], ...], "units_trivial": bool}`.
    /// Permutations are 1-based, as in `[2, 1]` for a swap.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| Error::Parse(format!("base curve: bad or missing field {k:?}"));
        let points: Vec<String> = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| field("points"))?
            .iter()
            .map(|p| p.as_str().map(str::to_owned).ok_or_else(|| field("points")))
            .collect::<Result<_>>()?;
        let n = points.len();
        let lattice: Vec<Vec<i64>> = match v.get("principal_lattice") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::String(s)) if s == "affine-line" => Lattice::full(n).generators().to_vec(),
            Some(Value::String(s)) if s == "rigid" => Vec::new(),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| int_vec(r).ok_or_else(|| field("principal_lattice")))
                .collect::<Result<_>>()?,
            _ => return Err(field("principal_lattice")),
        };
        let autos: Vec<Vec<usize>> = match v.get("base_autos") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| {
                    let p = int_vec(r).ok_or_else(|| field("base_autos"))?;
                    p.into_iter()
                        .map(|x| usize::try_from(x - 1).map_err(|_| field("base_autos")))
                        .collect()
                })
                .collect::<Result<_>>()?,
            _ => return Err(field("base_autos")),
        };
        let units = match v.get("units_trivial") {
            None | Some(Value::Null) => true,
            Some(Value::Bool(b)) => *b,
            _ => return Err(field("units_trivial")),
        };
        Ok(Self::new(points, lattice, autos)?.with_units_trivial(units))
    }
}

fn int_vec(v: &Value) -> Option<Vec<i64>> {
    v.as_array()?.iter().map(Value::as_i64).collect()
}

/// A fiber tree at each marked point.
#[derive(Clone, Debug)]
pub struct GraphDivisor {
    base: BaseCurve,
    trees: Vec<RootedTree>,
}

impl GraphDivisor {
    pub fn new(base: BaseCurve, trees: Vec<RootedTree>) -> Result<Self> {
        if trees.len() != base.num_points() {
            return Err(Error::Structural(format!(
                "{} trees given for {} marked points",
                trees.len(),
                base.num_points()
            )));
        }
        Ok(Self { base, trees })
    }

    /// One tree over a one-point affine line.
    pub fn single(tree: RootedTree) -> Self {
        Self {
            base: BaseCurve::affine_line(1),
            trees: vec![tree],
        }
    }

    pub fn base(&self) -> &BaseCurve {
        &self.base
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.trees
    }

    pub fn tree(&self, i: usize) -> &RootedTree {
        &self.trees[i]
    }

    pub fn num_points(&self) -> usize {
        self.trees.len()
    }

    /// `ht(D)`: the largest tree height.
    pub fn height(&self) -> usize {
        self.trees.iter().map(RootedTree::height).max().unwrap_or(0)
    }

    /// `h(D) = Σ ht(Γ_i)`.
    pub fn total_height(&self) -> usize {
        self.trees.iter().map(RootedTree::height).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.trees.iter().map(RootedTree::num_edges).sum()
    }

    pub fn with_trees(&self, trees: Vec<RootedTree>) -> Result<Self> {
        Self::new(self.base.clone(), trees)
    }

    /// Moves the tree at point `i` to point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut trees = self.trees.clone();
        for (i, &j) in perm.iter().enumerate() {
            trees[j] = self.trees[i].clone();
        }
        Self {
            base: self.base.clone(),
            trees,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_json(),
            "trees": self.trees.iter().map(RootedTree::to_nested).collect::<Vec<_>>(),
        })
    }

    /// `{"base": {...}, "trees": ["[[],[]]", {"parent": {...}}, ...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let base = BaseCurve::from_json(
            v.get("base")
                .ok_or_else(|| Error::Parse("graph divisor: missing \"base\"".into()))?,
        )?;
        let trees = v
            .get("trees")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("graph divisor: missing \"trees\" array".into()))?
            .iter()
            .enumerate()
            .map(|(i, t)| {
                match t {
                    Value::String(s) => RootedTree::from_nested(s),
                    Value::Object(_) => RootedTree::from_adjacency_json(t),
                    _ => Err(Error::Parse(
                        "tree must be a nested-list string or adjacency object".into(),
                    )),
                }
                .map_err(|e| Error::Parse(format!("trees[{i}]: {e}")))
            })
            .collect::<Result<_>>()?;
        Self::new(base, trees)
    }
}

/// One point of a Danielewski-Fieseler quotient over a marked point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DfPoint {
    /// Vertex index of the leaf (the root for an irreducible fiber).
    pub leaf: usize,
    pub label: String,
    pub level: usize,
}

/// Points of `DF(π)` over each marked point, in leaf index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DfQuotient {
    pub points: Vec<Vec<DfPoint>>,
}

impl DfQuotient {
    /// `N_i` per marked point.
    pub fn counts(&self) -> Vec<usize> {
        self.points.iter().map(Vec::len).collect()
    }
}

pub fn df_quotient(d: &GraphDivisor) -> DfQuotient {
    let points = d
        .trees
        .iter()
        .map(|t| {
            t.components()
                .into_iter()
                .map(|v| DfPoint {
                    leaf: v,
                    label: t.label(v).to_owned(),
                    level: t.level(v),
                })
                .collect()
        })
        .collect();
    DfQuotient { points }
}

/// Levels of the fiber components per marked point, in component order.
/// Stands for the anti-effective divisor `-Σ l_{i,j} b_{i,j}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeDivisor {
    pub levels: Vec<Vec<usize>>,
}

impl TypeDivisor {
    pub fn sorted(&self) -> Vec<Vec<usize>> {
        self.levels
            .iter()
            .map(|l| {
                let mut l = l.clone();
                l.sort_unstable();
                l
            })
            .collect()
    }

    /// Coefficients of the divisor itself (non-positive).
    pub fn coefficients(&self) -> Vec<Vec<i64>> {
        self.levels
            .iter()
            .map(|l| l.iter().map(|&x| -(x as i64)).collect())
            .collect()
    }
}

pub fn type_divisor(d: &GraphDivisor) -> TypeDivisor {
    TypeDivisor {
        levels: df_quotient(d)
            .points
            .into_iter()
            .map(|pts| pts.into_iter().map(|p| p.level).collect())
            .collect(),
    }
}

/// `ρ = Σ (N_j - 1)`, the rank excess of `Pic DF(π)` over `Pic B`.
pub fn pic_rank_excess(d: &GraphDivisor) -> usize {
    df_quotient(d).counts().iter().map(|n| n - 1).sum()
}

pub fn is_chain_divisor(d: &GraphDivisor) -> bool {
    d.trees.iter().all(RootedTree::is_chain)
}

/// Divisor `Σ a_i b_i` on the base, supported on the marked points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntDivisor(pub Vec<i64>);

pub fn is_principal(d: &IntDivisor, base: &BaseCurve) -> Result<bool> {
    base.lattice().contains(&d.0)
}

/// Why two type divisors fail to be linearly equivalent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inequivalence {
    /// Different numbers of components over this point.
    PointCount { point: usize },
    /// Sorted level differences are not constant over this point.
    ShiftNotConstant { point: usize },
    /// The forced shift is not a principal divisor.
    ShiftNotPrincipal { shift: Vec<i64> },
}

/// Compares two type divisors. On success returns the forced shift `c` with
/// `levels_2(i) = { l - c_i : l ∈ levels_1(i) }` and `c` principal.
pub fn compare_type_divisors(
    t1: &TypeDivisor,
    t2: &TypeDivisor,
    base: &BaseCurve,
) -> Result<std::result::Result<Vec<i64>, Inequivalence>> {
    let n = base.num_points();
    if t1.levels.len() != n || t2.levels.len() != n {
        return Err(Error::Structural(format!(
            "type divisors over {} and {} points compared on a base with {n} points",
            t1.levels.len(),
            t2.levels.len()
        )));
    }
    let (s1, s2) = (t1.sorted(), t2.sorted());
    let mut shift = Vec::with_capacity(n);
    for i in 0..n {
        if s1[i].len() != s2[i].len() {
            return Ok(Err(Inequivalence::PointCount { point: i }));
        }
        if s1[i].is_empty() {
            return Err(Error::Structural(format!(
                "no fiber components over point {i}"
            )));
        }
        let c = s1[i][0] as i64 - s2[i][0] as i64;
        if s1[i]
            .iter()
            .zip(&s2[i])
            .any(|(a, b)| *a as i64 - *b as i64 != c)
        {
            return Ok(Err(Inequivalence::ShiftNotConstant { point: i }));
        }
        shift.push(c);
    }
    if !base.lattice().contains(&shift)? {
        return Ok(Err(Inequivalence::ShiftNotPrincipal { shift }));
    }
    Ok(Ok(shift))
}

/// The shift vector witnessing linear equivalence, if any.
pub fn linear_equivalent(
    t1: &TypeDivisor,
    t2: &TypeDivisor,
    base: &BaseCurve,
) -> Result<Option<Vec<i64>>> {
    Ok(compare_type_divisors(t1, t2, base)?.ok())
}
