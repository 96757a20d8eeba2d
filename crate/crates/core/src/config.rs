//! Configuration spaces of graph divisors and the group acting on them.
//!
//! A configuration assigns to every vertex `v` of `D*` with `r₊(v) ≥ 1`
//! children a set of `r₊(v)` distinct rationals. The group
//! `G(D) = G_a^{h(D)} ⋊ (G_m × Aut*_B(D))` acts by
//! `s'(v) = { α x + β_{i,l(v)} : x ∈ s(a(v)) }`, and its orbits classify
//! surfaces over `B` with graph divisor `D`.
//!
//! Everything is exact over `Q`. In particular a stabilizing scalar `α` must
//! send some nonzero coordinate to another one, so it is rational and only
//! `α = ±1` can have finite order.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::divisors::{is_chain_divisor, GraphDivisor};
use crate::error::{Error, Result};
use crate::rational::{format_rat, int, parse_rat, Rat};
use crate::tree::{aut_cap_from_env, AutStar, TreeIso};

/// Per marked point, vertex index to its sorted configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub sets: Vec<BTreeMap<usize, Vec<Rat>>>,
}

impl Configuration {
    /// Sorts every set; duplicates are kept so that validation can see them.
    pub fn new(mut sets: Vec<BTreeMap<usize, Vec<Rat>>>) -> Self {
        for m in &mut sets {
            for s in m.values_mut() {
                s.sort();
            }
        }
        Self { sets }
    }

    pub fn get(&self, point: usize, v: usize) -> &[Rat] {
        self.sets
            .get(point)
            .and_then(|m| m.get(&v))
            .map_or(&[], Vec::as_slice)
    }

    fn values(&self) -> impl Iterator<Item = &Rat> {
        self.sets.iter().flat_map(|m| m.values().flatten())
    }

    pub fn is_zero(&self) -> bool {
        self.values().all(Zero::is_zero)
    }

    pub fn scaled(&self, k: &Rat) -> Self {
        Self::new(
            self.sets
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(&v, s)| (v, s.iter().map(|x| x * k).collect()))
                        .collect()
                })
                .collect(),
        )
    }

    /// Keys `"point:vertex"`; a bare vertex label when the base has a
    /// single point.
    pub fn to_json(&self, d: &GraphDivisor) -> Value {
        let mut out = Map::new();
        for (i, m) in self.sets.iter().enumerate() {
            for (&v, s) in m {
                let key = vertex_key(d, i, v);
                out.insert(
                    key,
                    s.iter().map(|x| Value::String(format_rat(x))).collect(),
                );
            }
        }
        Value::Object(out)
    }

    pub fn from_json(v: &Value, d: &GraphDivisor) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("configuration must be a JSON object".into()))?;
        let mut sets = vec![BTreeMap::new(); d.num_points()];
        for (key, vals) in obj {
            let (i, vx) = parse_vertex_key(d, key)?;
            let arr = vals.as_array().ok_or_else(|| {
                Error::Parse(format!("configuration at {key:?} must be an array"))
            })?;
            let set = arr
                .iter()
                .map(|x| match x {
                    Value::String(s) => parse_rat(s),
                    Value::Number(n) => n
                        .as_i64()
                        .map(int)
                        .ok_or_else(|| Error::Parse(format!("{key}: non-integer number {n}"))),
                    _ => Err(Error::Parse(format!(
                        "{key}: values must be \"p/q\" strings"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            sets[i].insert(vx, set);
        }
        Ok(Self::new(sets))
    }
}

fn vertex_key(d: &GraphDivisor, i: usize, v: usize) -> String {
    let label = d.tree(i).label(v);
    if d.num_points() == 1 {
        label.to_owned()
    } else {
        format!("{}:{label}", d.base().points()[i])
    }
}

fn parse_vertex_key(d: &GraphDivisor, key: &str) -> Result<(usize, usize)> {
    let (i, label) = match key.split_once(':') {
        Some((p, l)) => {
            let i = d
                .base()
                .points()
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| Error::Parse(format!("unknown marked point {p:?} in {key:?}")))?;
            (i, l)
        }
        None if d.num_points() == 1 => (0, key),
        None => {
            return Err(Error::Parse(format!(
                "key {key:?} must have the form \"point:vertex\""
            )))
        }
    };
    let v = d
        .tree(i)
        .index_of(label)
        .ok_or_else(|| Error::Parse(format!("unknown vertex {label:?} in {key:?}")))?;
    Ok((i, v))
}

/// Vertices carrying a configuration: those with at least one child.
pub fn domain(d: &GraphDivisor, i: usize) -> Vec<usize> {
    let t = d.tree(i);
    (0..t.len())
        .filter(|&v| !t.children(v).is_empty())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

pub fn validate_configuration(s: &Configuration, d: &GraphDivisor) -> Validation {
    let mut diag = Vec::new();
    if s.sets.len() != d.num_points() {
        diag.push(format!(
            "configuration covers {} points, divisor has {}",
            s.sets.len(),
            d.num_points()
        ));
        return Validation {
            valid: false,
            diagnostics: diag,
        };
    }
    for (i, m) in s.sets.iter().enumerate() {
        let t = d.tree(i);
        let dom = domain(d, i);
        for &v in &dom {
            let key = vertex_key(d, i, v);
            match m.get(&v) {
                None => diag.push(format!("{key}: missing")),
                Some(set) => {
                    let r = t.children(v).len();
                    if set.len() != r {
                        diag.push(format!("{key}: {} points for {r} children", set.len()));
                    }
                    if set.windows(2).any(|w| w[0] == w[1]) {
                        diag.push(format!("{key}: repeated point (discriminant locus)"));
                    }
                }
            }
        }
        for &v in m.keys() {
            if v >= t.len() || !dom.contains(&v) {
                diag.push(format!("point {i}: vertex {v} is outside the domain"));
            }
        }
    }
    Validation {
        valid: diag.is_empty(),
        diagnostics: diag,
    }
}

fn require_valid(s: &Configuration, d: &GraphDivisor) -> Result<()> {
    let v = validate_configuration(s, d);
    if v.valid {
        Ok(())
    } else {
        Err(Error::InvalidConfiguration(v.diagnostics.join("; ")))
    }
}

/// `dim S(D)`: the number of edges.
pub fn config_space_dim(d: &GraphDivisor) -> usize {
    d.num_edges()
}

/// `(α, β, a)`: scalar, per point and level shift, and per tree an
/// automorphism (only its class in `Aut*` matters).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub alpha: Rat,
    /// `beta[i][l]` for `l < ht(Γ_i)`.
    pub beta: Vec<Vec<Rat>>,
    pub autos: Vec<TreeIso>,
}

impl GroupElement {
    pub fn identity(d: &GraphDivisor) -> Self {
        Self {
            alpha: Rat::one(),
            beta: d
                .trees()
                .iter()
                .map(|t| vec![Rat::zero(); t.height()])
                .collect(),
            autos: d
                .trees()
                .iter()
                .map(|t| TreeIso::identity(t.len()))
                .collect(),
        }
    }

    pub fn validate(&self, d: &GraphDivisor) -> Result<()> {
        let bad = |s: String| Err(Error::Structural(s));
        if self.alpha.is_zero() {
            return bad("alpha must be nonzero".into());
        }
        if self.beta.len() != d.num_points() || self.autos.len() != d.num_points() {
            return bad("group element does not match the number of points".into());
        }
        for (i, t) in d.trees().iter().enumerate() {
            if self.beta[i].len() != t.height() {
                return bad(format!("beta at point {i} needs {} levels", t.height()));
            }
            if !self.autos[i].is_valid(t, t) {
                return bad(format!("auto at point {i} is not an automorphism"));
            }
        }
        Ok(())
    }

    /// `g⁻¹ = (1/α, -β/α, a⁻¹)`.
    pub fn inverse(&self) -> Self {
        let inv = self.alpha.recip();
        Self {
            beta: self
                .beta
                .iter()
                .map(|b| b.iter().map(|x| -(x * &inv)).collect())
                .collect(),
            autos: self.autos.iter().map(TreeIso::inverse).collect(),
            alpha: inv,
        }
    }

    pub fn to_json(&self, d: &GraphDivisor) -> Value {
        json!({
            "alpha": format_rat(&self.alpha),
            "beta": self.beta.iter().map(|b| b.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "auto": self.autos.iter().zip(d.trees()).map(|(a, t)| {
                (0..t.len()).map(|v| (t.label(v).to_owned(), Value::String(t.label(a.apply(v)).to_owned())))
                    .collect::<Map<_, _>>()
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, d: &GraphDivisor) -> Result<Self> {
        let bad = |k: &str| Error::Parse(format!("group element: bad field {k:?}"));
        let rat = |x: &Value| -> Result<Rat> { parse_rat(x.as_str().ok_or_else(|| bad("beta"))?) };
        let alpha = parse_rat(
            v.get("alpha")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("alpha"))?,
        )?;
        let beta = v
            .get("beta")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("beta"))?
            .iter()
            .map(|b| {
                b.as_array()
                    .ok_or_else(|| bad("beta"))?
                    .iter()
                    .map(rat)
                    .collect()
            })
            .collect::<Result<Vec<Vec<Rat>>>>()?;
        let autos = match v.get("auto") {
            None | Some(Value::Null) => d
                .trees()
                .iter()
                .map(|t| TreeIso::identity(t.len()))
                .collect(),
            Some(Value::Array(a)) => a
                .iter()
                .zip(d.trees())
                .map(|(m, t)| {
                    let m = m.as_object().ok_or_else(|| bad("auto"))?;
                    let mut map: Vec<usize> = (0..t.len()).collect();
                    for (from, to) in m {
                        let f = t.index_of(from).ok_or_else(|| bad("auto"))?;
                        let g = to
                            .as_str()
                            .and_then(|l| t.index_of(l))
                            .ok_or_else(|| bad("auto"))?;
                        map[f] = g;
                    }
                    Ok(TreeIso { map })
                })
                .collect::<Result<_>>()?,
            _ => return Err(bad("auto")),
        };
        let g = Self { alpha, beta, autos };
        g.validate(d)?;
        Ok(g)
    }
}

pub fn act(g: &GroupElement, s: &Configuration, d: &GraphDivisor) -> Result<Configuration> {
    g.validate(d)?;
    if s.sets.len() != d.num_points() {
        return Err(Error::Structural(
            "configuration and divisor differ in point count".into(),
        ));
    }
    let sets = s
        .sets
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let t = d.tree(i);
            m.keys()
                .map(|&v| {
                    let beta = &g.beta[i][t.level(v)];
                    let src = s.get(i, g.autos[i].apply(v));
                    (v, src.iter().map(|x| &g.alpha * x + beta).collect())
                })
                .collect()
        })
        .collect();
    Ok(Configuration::new(sets))
}

/// `g1 ∘ g2`, so that `act(g1 ∘ g2, s) = act(g1, act(g2, s))`.
pub fn compose(g1: &GroupElement, g2: &GroupElement) -> GroupElement {
    GroupElement {
        alpha: &g1.alpha * &g2.alpha,
        beta: g1
            .beta
            .iter()
            .zip(&g2.beta)
            .map(|(b1, b2)| b1.iter().zip(b2).map(|(x, y)| &g1.alpha * y + x).collect())
            .collect(),
        autos: g1
            .autos
            .iter()
            .zip(&g2.autos)
            .map(|(a1, a2)| a1.then(a2))
            .collect(),
    }
}

/// Moves every (point, level) so that the barycentres of its configurations
/// average to zero. Returns the slice and the shifts `β` with
/// `slice = s + β_{i,l}` levelwise.
pub fn barycentric_slice(s: &Configuration, d: &GraphDivisor) -> (Configuration, Vec<Vec<Rat>>) {
    let mut shifts = Vec::with_capacity(s.sets.len());
    let mut sets = Vec::with_capacity(s.sets.len());
    for (i, m) in s.sets.iter().enumerate() {
        let t = d.tree(i);
        let h = t.height();
        let mut sum = vec![Rat::zero(); h];
        let mut count = vec![0i64; h];
        for (&v, set) in m {
            if set.is_empty() {
                continue;
            }
            let bary = set.iter().sum::<Rat>() / int(set.len() as i64);
            sum[t.level(v)] += bary;
            count[t.level(v)] += 1;
        }
        let beta: Vec<Rat> = sum
            .into_iter()
            .zip(&count)
            .map(|(s, &c)| if c == 0 { Rat::zero() } else { -(s / int(c)) })
            .collect();
        sets.push(
            m.iter()
                .map(|(&v, set)| (v, set.iter().map(|x| x + &beta[t.level(v)]).collect()))
                .collect(),
        );
        shifts.push(beta);
    }
    (Configuration::new(sets), shifts)
}

/// Lazily enumerates `Aut*_B(D) = Π Aut*(Γ_i)` as tuples of lifted tree
/// automorphisms, identity first.
pub struct AutStarProduct {
    factors: Vec<AutStar>,
    orders: Vec<u64>,
    total: u64,
}

impl AutStarProduct {
    pub fn new(d: &GraphDivisor, cap: u64) -> Result<Self> {
        let factors: Vec<AutStar> = d.trees().iter().map(AutStar::new).collect();
        let orders = factors
            .iter()
            .map(|f| f.order_capped(cap))
            .collect::<Result<Vec<_>>>()?;
        let total = orders
            .iter()
            .try_fold(1u64, |acc, &o| acc.checked_mul(o).filter(|&t| t <= cap));
        let total = total.ok_or_else(|| Error::AutCapExceeded {
            order: factors
                .iter()
                .fold(num::BigUint::one(), |acc, f| acc * f.order())
                .to_string(),
            cap,
        })?;
        Ok(Self {
            factors,
            orders,
            total,
        })
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn element(&self, mut k: u64) -> Vec<TreeIso> {
        self.factors
            .iter()
            .zip(&self.orders)
            .map(|(f, &o)| {
                let e = f.element(k % o);
                k /= o;
                e
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<TreeIso>> + '_ {
        (0..self.total).map(|k| self.element(k))
    }
}

/// Whether `α · s1(a(v)) = s2(v)` at every vertex.
fn matches_scaled(s1: &Configuration, s2: &Configuration, autos: &[TreeIso], alpha: &Rat) -> bool {
    s2.sets.iter().enumerate().all(|(i, m)| {
        m.iter().all(|(&v, target)| {
            let mut img: Vec<Rat> = s1
                .get(i, autos[i].apply(v))
                .iter()
                .map(|x| alpha * x)
                .collect();
            img.sort();
            &img == target
        })
    })
}

/// Candidates for `α` under fixed automorphisms: the first vertex where `s2`
/// has a nonzero entry `y` forces `α = y / x` for a nonzero `x` of `s1(a(v))`.
fn alpha_candidates(s1: &Configuration, s2: &Configuration, autos: &[TreeIso]) -> Vec<Rat> {
    for (i, m) in s2.sets.iter().enumerate() {
        for (&v, target) in m {
            if let Some(y) = target.iter().find(|y| !y.is_zero()) {
                return s1
                    .get(i, autos[i].apply(v))
                    .iter()
                    .filter(|x| !x.is_zero())
                    .map(|x| y / x)
                    .collect();
            }
        }
    }
    vec![Rat::one()]
}

fn same_shape(s1: &Configuration, s2: &Configuration, d: &GraphDivisor) -> Result<()> {
    require_valid(s1, d)?;
    require_valid(s2, d)
}

/// A group element carrying `s1` to `s2`, if they lie in one orbit.
pub fn orbit_equivalent(
    s1: &Configuration,
    s2: &Configuration,
    d: &GraphDivisor,
) -> Result<Option<GroupElement>> {
    orbit_equivalent_capped(s1, s2, d, aut_cap_from_env())
}

pub fn orbit_equivalent_capped(
    s1: &Configuration,
    s2: &Configuration,
    d: &GraphDivisor,
    cap: u64,
) -> Result<Option<GroupElement>> {
    same_shape(s1, s2, d)?;
    let (c1, b1) = barycentric_slice(s1, d);
    let (c2, b2) = barycentric_slice(s2, d);
    let autos = AutStarProduct::new(d, cap)?;
    for a in autos.iter() {
        for alpha in alpha_candidates(&c1, &c2, &a) {
            if matches_scaled(&c1, &c2, &a, &alpha) {
                let beta = b1
                    .iter()
                    .zip(&b2)
                    .map(|(x, y)| x.iter().zip(y).map(|(p, q)| &alpha * p - q).collect())
                    .collect();
                return Ok(Some(GroupElement {
                    alpha,
                    beta,
                    autos: a,
                }));
            }
        }
    }
    Ok(None)
}

/// Order of the scalar part of the stabilizer of a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stabilizer {
    /// `None` when all of `G_m` stabilizes (chain divisors).
    pub d: Option<u64>,
    /// Over an algebraically closed field; equals `d` for rational data.
    pub geometric_d: Option<u64>,
    pub note: String,
}

pub fn mu_d_stabilizer(s: &Configuration, d: &GraphDivisor) -> Result<Stabilizer> {
    require_valid(s, d)?;
    let (c, _) = barycentric_slice(s, d);
    if is_chain_divisor(d) || c.is_zero() {
        return Ok(Stabilizer {
            d: None,
            geometric_d: None,
            note: "slice is a single point; the whole multiplicative group stabilizes".into(),
        });
    }
    let minus = -Rat::one();
    let autos = AutStarProduct::new(d, aut_cap_from_env())?;
    let flips = autos.iter().any(|a| matches_scaled(&c, &c, &a, &minus));
    let order = if flips { 2 } else { 1 };
    Ok(Stabilizer {
        d: Some(order),
        geometric_d: Some(order),
        note: "computed over Q: a stabilizing scalar maps a nonzero coordinate to another, \
               so it is rational and only -1 can have finite order > 1"
            .into(),
    })
}

/// `dim M(D) = max(#edges - h(D) - 1, 0)`. Refused when the base may have
/// nonconstant units and more than one marked point.
pub fn moduli_dim(d: &GraphDivisor) -> Result<usize> {
    if !(d.base().units_trivial() || d.num_points() == 1) {
        return Err(Error::Refused(
            "base has nontrivial units and several marked points; the quotient is not separated"
                .into(),
        ));
    }
    Ok(d.num_edges().saturating_sub(d.total_height() + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VectorGroupReport {
    /// Coefficients of `D_m = Σ h_i b_i`.
    pub d_m: Vec<usize>,
    /// `(l, coefficients of D_l)` with `m_{i,l} = min(l, h_i)`, for
    /// `l = 1..=ht(D)`.
    pub d_l: Vec<(usize, Vec<usize>)>,
}

pub fn aut_vector_group_report(d: &GraphDivisor) -> VectorGroupReport {
    let hs: Vec<usize> = d.trees().iter().map(|t| t.height()).collect();
    VectorGroupReport {
        d_l: (1..=d.height())
            .map(|l| (l, hs.iter().map(|&h| h.min(l)).collect()))
            .collect(),
        d_m: hs,
    }
}

/// A blown-up point: the child `child` of `vertex` sits over `coord`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Center {
    pub point: usize,
    pub vertex: String,
    pub child: String,
    #[serde(serialize_with = "ser_rat")]
    pub coord: Rat,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rat(r))
}

/// Centers grouped by level `0..ht(D)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Centers {
    pub levels: Vec<Vec<Center>>,
}

/// Children of each domain vertex, in canonical order, are matched with the
/// sorted points of its configuration.
pub fn modification_centers(d: &GraphDivisor, s: &Configuration) -> Result<Centers> {
    if s.sets.len() != d.num_points() {
        return Err(Error::Structural(
            "configuration and divisor differ in point count".into(),
        ));
    }
    let mut levels = vec![Vec::new(); d.height()];
    for (i, t) in d.trees().iter().enumerate() {
        let codes = t.canonical_codes();
        for v in domain(d, i) {
            let kids = t.canonical_children(v, &codes);
            let set = s.get(i, v);
            if set.len() != kids.len() {
                return Err(Error::InvalidConfiguration(format!(
                    "{}: {} points for {} children",
                    vertex_key(d, i, v),
                    set.len(),
                    kids.len()
                )));
            }
            for (w, x) in kids.into_iter().zip(set) {
                levels[t.level(v)].push(Center {
                    point: i,
                    vertex: t.label(v).to_owned(),
                    child: t.label(w).to_owned(),
                    coord: x.clone(),
                });
            }
        }
    }
    Ok(Centers { levels })
}

/// Reads a configuration back from center data: `s(v)` is the set of
/// coordinates of the children of `v`.
pub fn configuration_from_centers(d: &GraphDivisor, c: &Centers) -> Result<Configuration> {
    let mut sets = vec![BTreeMap::new(); d.num_points()];
    for center in c.levels.iter().flatten() {
        let t = d.trees().get(center.point).ok_or_else(|| {
            Error::Structural(format!("center on unknown point {}", center.point))
        })?;
        let v = t
            .index_of(&center.vertex)
            .ok_or_else(|| Error::Structural(format!("unknown vertex {}", center.vertex)))?;
        sets[center.point]
            .entry(v)
            .or_insert_with(Vec::new)
            .push(center.coord.clone());
    }
    Ok(Configuration::new(sets))
}
