//! Accompanying sequences of bushes and spring bushes and the explicit
//! surface models they define.
//!
//! A bush `Γ` of height `m` with a choice of distinct rational roots, one per
//! branch, gives monic polynomials `p_i = Π_{l(α) ≥ i} (u - α)` and
//! `r_i = p_1 / p_i`. The surface `z t_1 = p_1(u)`, `z t_i = r_i(u) t_{i-1}`
//! has `Γ` as its fiber tree over `z = 0`.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{MPoly, RatPoly};
use crate::rational::{format_rat, int, parse_rat, Rat};
use crate::tree::RootedTree;

const U: &str = "u";
const V: &str = "v";

/// A root of `p_1` and the branch it labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqRoot {
    pub alpha: Rat,
    /// `l(α)`, the height of the branch.
    pub length: usize,
    /// Label of the branch's first vertex in the source tree, if known.
    pub branch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccompanyingSequence {
    pub m: usize,
    /// `p[i-1] = p_i`.
    pub p: Vec<RatPoly>,
    /// `r[i-1] = r_i`.
    pub r: Vec<RatPoly>,
    pub roots: Vec<SeqRoot>,
}

impl AccompanyingSequence {
    /// Builds `(p_i, r_i)` from roots with their branch lengths.
    pub fn from_roots(roots: Vec<SeqRoot>) -> Result<Self> {
        let m = roots.iter().map(|r| r.length).max().unwrap_or(0);
        if m == 0 || roots.iter().any(|r| r.length == 0) {
            return Err(Error::InvalidSequence(
                "branch lengths must be at least 1".into(),
            ));
        }
        check_distinct(roots.iter().map(|r| &r.alpha))?;
        let p: Vec<RatPoly> = (1..=m)
            .map(|i| {
                RatPoly::from_roots(roots.iter().filter(|r| r.length >= i).map(|r| &r.alpha), U)
            })
            .collect();
        let r = p
            .iter()
            .map(|pi| p[0].exact_divide(pi))
            .collect::<Result<_>>()?;
        Ok(Self { m, p, r, roots })
    }

    pub fn p(&self, i: usize) -> &RatPoly {
        &self.p[i - 1]
    }

    pub fn r(&self, i: usize) -> &RatPoly {
        &self.r[i - 1]
    }

    /// Checks the defining relations; reports the first violation.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidSequence(s));
        if self.m == 0 || self.p.len() != self.m || self.r.len() != self.m {
            return bad(format!("need m >= 1 pairs, got m = {}", self.m));
        }
        for i in 1..=self.m {
            let (p, r) = (self.p(i), self.r(i));
            if !p.is_monic() || !r.is_monic() {
                return bad(format!("p_{i} and r_{i} must be monic"));
            }
            if !p.is_squarefree() {
                return bad(format!("p_{i} has a repeated root"));
            }
            if &(r * p) != self.p(1) {
                return bad(format!("r_{i} * p_{i} != p_1"));
            }
            if i < self.m && !self.p(i + 1).divides(p) {
                return bad(format!("p_{} does not divide p_{i}", i + 1));
            }
        }
        check_distinct(self.roots.iter().map(|r| &r.alpha))?;
        if &RatPoly::from_roots(self.roots.iter().map(|r| &r.alpha), U) != self.p(1) {
            return bad("listed roots do not multiply out to p_1".into());
        }
        for root in &self.roots {
            let l = branch_length(self, &root.alpha)?;
            if l != root.length {
                return bad(format!(
                    "root {} is listed with length {} but p_i vanish up to {l}",
                    format_rat(&root.alpha),
                    root.length
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "p": self.p.iter().map(RatPoly::to_json).collect::<Vec<_>>(),
            "r": self.r.iter().map(RatPoly::to_json).collect::<Vec<_>>(),
            "roots": self.roots.iter().map(|r| json!({
                "alpha": format_rat(&r.alpha),
                "length": r.length,
                "branch": r.branch,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |k: &str| Error::Parse(format!("accompanying sequence: bad field {k:?}"));
        let polys = |k: &str| -> Result<Vec<RatPoly>> {
            v.get(k)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(k))?
                .iter()
                .map(|p| RatPoly::from_json(p, U))
                .collect()
        };
        let roots = v
            .get("roots")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("roots"))?
            .iter()
            .map(|r| {
                Ok(SeqRoot {
                    alpha: parse_rat(
                        r.get("alpha")
                            .and_then(Value::as_str)
                            .ok_or_else(|| bad("alpha"))?,
                    )?,
                    length: r
                        .get("length")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| bad("length"))? as usize,
                    branch: r.get("branch").and_then(Value::as_str).map(str::to_owned),
                })
            })
            .collect::<Result<_>>()?;
        let seq = Self {
            m: v.get("m").and_then(Value::as_u64).ok_or_else(|| bad("m"))? as usize,
            p: polys("p")?,
            r: polys("r")?,
            roots,
        };
        seq.validate()?;
        Ok(seq)
    }
}

fn check_distinct<'a>(it: impl Iterator<Item = &'a Rat>) -> Result<()> {
    let mut v: Vec<&Rat> = it.collect();
    v.sort();
    match v.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::InvalidSequence(format!(
            "duplicate root {}",
            format_rat(w[0])
        ))),
        None => Ok(()),
    }
}

/// Branches at the root in default order: decreasing length, then input
/// order.
fn branches_by_length(t: &RootedTree) -> Vec<usize> {
    let mut b = t.children(t.root()).to_vec();
    b.sort_by_key(|&c| std::cmp::Reverse(t.subtree_height(c)));
    b
}

/// `roots`, when given, are assigned to the branches in default order.
pub fn accompanying_sequence(
    t: &RootedTree,
    roots: Option<&[Rat]>,
) -> Result<AccompanyingSequence> {
    if !t.is_bush() {
        return Err(Error::Precondition(
            "accompanying sequences are defined for bushes".into(),
        ));
    }
    if t.height() == 0 {
        return Err(Error::Precondition(
            "a bush of height 0 has no accompanying sequence".into(),
        ));
    }
    let branches = branches_by_length(t);
    let alphas: Vec<Rat> = match roots {
        Some(r) if r.len() != branches.len() => {
            return Err(Error::Precondition(format!(
                "{} roots given for {} branches",
                r.len(),
                branches.len()
            )))
        }
        Some(r) => r.to_vec(),
        None => (0..branches.len() as i64).map(int).collect(),
    };
    AccompanyingSequence::from_roots(
        branches
            .iter()
            .zip(alphas)
            .map(|(&b, alpha)| SeqRoot {
                alpha,
                length: t.subtree_height(b) + 1,
                branch: Some(t.label(b).to_owned()),
            })
            .collect(),
    )
}

/// `l(α)`: the largest `l` with `p_1(α) = ... = p_l(α) = 0`.
pub fn branch_length(seq: &AccompanyingSequence, alpha: &Rat) -> Result<usize> {
    let l = seq
        .p
        .iter()
        .take_while(|p| p.evaluate(alpha).is_zero())
        .count();
    if l == 0 {
        return Err(Error::Precondition(format!(
            "{} is not a root of p_1",
            format_rat(alpha)
        )));
    }
    Ok(l)
}

/// The bush with one branch of length `l(α)` per listed root, branches in
/// root order.
pub fn tree_from_sequence(seq: &AccompanyingSequence) -> Result<RootedTree> {
    seq.validate()?;
    let mut parent = vec![None];
    for root in &seq.roots {
        let l = branch_length(seq, &root.alpha)?;
        let mut prev = 0;
        for _ in 0..l {
            parent.push(Some(prev));
            prev = parent.len() - 1;
        }
    }
    RootedTree::from_parent_indices(parent)
}

/// Equations in named variables, all set to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModel {
    pub vars: Vec<String>,
    pub equations: Vec<MPoly>,
    /// Factored text of each equation, e.g. `z*t1 - (u^2 - u)`.
    pub text: Vec<String>,
}

impl SurfaceModel {
    pub fn to_json(&self) -> Value {
        json!({
            "vars": self.vars,
            "equations": self.equations.iter().map(MPoly::to_json).collect::<Vec<_>>(),
            "text": self.text,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let vars: Vec<String> = v
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("model: missing vars".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::Parse("model: bad var".into()))
            })
            .collect::<Result<_>>()?;
        let equations = v
            .get("equations")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("model: missing equations".into()))?
            .iter()
            .map(|e| MPoly::from_json(e, &vars))
            .collect::<Result<Vec<_>>>()?;
        let text: Vec<String> = match v.get("text").and_then(Value::as_array) {
            Some(t) => t
                .iter()
                .filter_map(Value::as_str)
                .map(str::to_owned)
                .collect(),
            None => equations.iter().map(ToString::to_string).collect(),
        };
        if text.len() != equations.len() {
            return Err(Error::Parse(
                "model: text and equations differ in length".into(),
            ));
        }
        Ok(Self {
            vars,
            equations,
            text,
        })
    }

    /// One equation per line, `... = 0` implied.
    pub fn to_text(&self) -> String {
        self.text.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn evaluate(&self, point: &[Rat]) -> Result<Vec<Rat>> {
        self.equations.iter().map(|e| e.evaluate(point)).collect()
    }
}

fn t_vars(j: usize) -> impl Iterator<Item = String> {
    (1..=j).map(|i| format!("t{i}"))
}

/// Pairs `(p_i, r_i)` become `z t_1 - p_1(u)` and `z t_i - r_i(u) t_{i-1}`.
fn chain_equations(
    p1: &RatPoly,
    r: &[&RatPoly],
    vars: &[String],
) -> Result<(Vec<MPoly>, Vec<String>)> {
    let z = MPoly::var("z", vars)?;
    let mut eqs = Vec::with_capacity(r.len() + 1);
    let mut text = Vec::with_capacity(r.len() + 1);
    let t1 = MPoly::var("t1", vars)?;
    eqs.push(&(&z * &t1) - &MPoly::from_univariate(p1, vars)?);
    text.push(format!("z*t1 - {}", paren(p1)));
    for (k, ri) in r.iter().enumerate() {
        let i = k + 2;
        let ti = MPoly::var(&format!("t{i}"), vars)?;
        let prev = MPoly::var(&format!("t{}", i - 1), vars)?;
        eqs.push(&(&z * &ti) - &(&MPoly::from_univariate(ri, vars)? * &prev));
        text.push(if ri.degree() == Some(0) && ri.is_monic() {
            format!("z*t{i} - t{}", i - 1)
        } else {
            format!("z*t{i} - {}*t{}", paren(ri), i - 1)
        });
    }
    Ok((eqs, text))
}

fn paren(p: &RatPoly) -> String {
    let s = p.to_string();
    if s.contains(' ') {
        format!("({s})")
    } else {
        s
    }
}

/// Model at level `j` (default `m`), in variables `z, u, t_1, ..., t_j`.
pub fn surface_equations(seq: &AccompanyingSequence, j: Option<usize>) -> Result<SurfaceModel> {
    let j = j.unwrap_or(seq.m);
    if j == 0 || j > seq.m {
        return Err(Error::Precondition(format!(
            "target level {j} outside 1..={}",
            seq.m
        )));
    }
    let vars: Vec<String> = ["z".to_owned(), U.to_owned()]
        .into_iter()
        .chain(t_vars(j))
        .collect();
    let r: Vec<&RatPoly> = (2..=j).map(|i| seq.r(i)).collect();
    let (equations, text) = chain_equations(seq.p(1), &r, &vars)?;
    Ok(SurfaceModel {
        vars,
        equations,
        text,
    })
}

/// `z^m t - p(u)` together with its fiber tree, the uniform bush with
/// `deg p` branches of length `m`.
pub fn danielewski_model(m: usize, p: &RatPoly) -> Result<(SurfaceModel, RootedTree)> {
    if m == 0 {
        return Err(Error::Precondition("exponent m must be positive".into()));
    }
    if !p.is_monic() || !p.is_squarefree() || p.degree() == Some(0) {
        return Err(Error::Precondition(
            "p must be monic with simple roots and positive degree".into(),
        ));
    }
    let p = p.clone().with_var(U);
    let vars: Vec<String> = ["z", U, "t"].iter().map(|s| s.to_string()).collect();
    let mut zm = MPoly::constant(Rat::one(), &vars);
    let z = MPoly::var("z", &vars)?;
    for _ in 0..m {
        zm = &zm * &z;
    }
    let eq = &(&zm * &MPoly::var("t", &vars)?) - &MPoly::from_univariate(&p, &vars)?;
    let zpow = if m == 1 {
        "z".to_owned()
    } else {
        format!("z^{m}")
    };
    let text = vec![format!("{zpow}*t - {}", paren(&p))];
    let d = p.degree().unwrap_or(0);
    let mut parent = vec![None];
    for _ in 0..d {
        let mut prev = 0;
        for _ in 0..m {
            parent.push(Some(prev));
            prev = parent.len() - 1;
        }
    }
    Ok((
        SurfaceModel {
            vars,
            equations: vec![eq],
            text,
        },
        RootedTree::from_parent_indices(parent)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub checks: Vec<Check>,
}

impl FiberReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Algebraic checks behind the fiber structure of the model: the relations
/// among `(p_i, r_i)`, squarefreeness, the vanishing pattern of `r_i(α)` and
/// the degree count. Never fails; violations are report entries.
pub fn verify_fiber_structure(seq: &AccompanyingSequence) -> FiberReport {
    let mut rep = FiberReport { checks: Vec::new() };
    let m = seq.m.min(seq.p.len()).min(seq.r.len());
    if m == 0 {
        rep.push("shape", false, "empty sequence");
        return rep;
    }
    let p1 = &seq.p[0];
    rep.push("r_1 = 1", seq.r[0] == RatPoly::one(U), seq.r[0].to_string());
    for i in 1..=m {
        let (p, r) = (&seq.p[i - 1], &seq.r[i - 1]);
        rep.push(
            format!("p_{i} squarefree"),
            p.is_squarefree(),
            p.to_string(),
        );
        rep.push(
            format!("r_{i} * p_{i} = p_1"),
            &(r * p) == p1,
            String::new(),
        );
        if i < m {
            let (pn, rn) = (&seq.p[i], &seq.r[i]);
            rep.push(format!("p_{} | p_{i}", i + 1), pn.divides(p), String::new());
            rep.push(format!("r_{i} | r_{}", i + 1), r.divides(rn), String::new());
        }
    }
    for root in &seq.roots {
        let a = format_rat(&root.alpha);
        let l = seq
            .p
            .iter()
            .take_while(|p| p.evaluate(&root.alpha).is_zero())
            .count();
        let pattern: Vec<bool> = seq.r[..m]
            .iter()
            .map(|r| !r.evaluate(&root.alpha).is_zero())
            .collect();
        let ok = l >= 1 && pattern.iter().enumerate().all(|(k, nz)| *nz == (k < l));
        rep.push(
            format!("vanishing of r_i at {a}"),
            ok,
            format!(
                "l = {l}, r_i({a}) != 0 for i = {:?}",
                (1..=m).filter(|&i| pattern[i - 1]).collect::<Vec<_>>()
            ),
        );
    }
    for i in 1..=m {
        let want = seq
            .roots
            .iter()
            .filter(|r| {
                seq.p
                    .iter()
                    .take_while(|p| p.evaluate(&r.alpha).is_zero())
                    .count()
                    >= i
            })
            .count();
        let got = seq.p[i - 1].degree().unwrap_or(0);
        rep.push(
            format!("deg p_{i} = #{{l(a) >= {i}}}"),
            got == want,
            format!("{got} vs {want}"),
        );
    }
    rep
}

/// Accompanying data of a spring bush on top of the sequence of its
/// truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpringData {
    /// Height of the spring bush.
    pub top: usize,
    pub p_top: RatPoly,
    pub r_top: RatPoly,
    /// `n(α)`: top leaves above the branch, or 1 if it stops below the top.
    pub n_alpha: BTreeMap<Rat, usize>,
    /// `l_h(α)`: the top level if the branch carries top leaves, else `l(α)`.
    pub l_top: BTreeMap<Rat, usize>,
    pub q_alpha: BTreeMap<Rat, RatPoly>,
    /// `q(u, v) = Σ q_α(v) p_1(u) / (u - α)`, in variables `(u, v)`.
    pub q: MPoly,
}

impl SpringData {
    pub fn to_json(&self) -> Value {
        let by_root = |f: &dyn Fn(&Rat) -> Value| -> Value {
            self.n_alpha
                .keys()
                .map(|a| (format_rat(a), f(a)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        json!({
            "top": self.top,
            "p_top": self.p_top.to_json(),
            "r_top": self.r_top.to_json(),
            "n_alpha": by_root(&|a| json!(self.n_alpha[a])),
            "l_top": by_root(&|a| json!(self.l_top[a])),
            "q_alpha": by_root(&|a| self.q_alpha[a].to_json()),
            "q": self.q.to_json(),
            "q_text": self.q.to_string(),
        })
    }
}

/// `N = Σ n(α)` and `N_i = Σ_{l_h(α) ≥ i+1} n(α)` computed both from the
/// spring data and from the type of the spring bush.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpringCounts {
    pub total_from_roots: usize,
    pub total_from_type: usize,
    /// Indexed by `i = 0..top`.
    pub level_from_roots: Vec<usize>,
    pub level_from_type: Vec<usize>,
}

impl SpringCounts {
    pub fn consistent(&self) -> bool {
        self.total_from_roots == self.total_from_type
            && self.level_from_roots == self.level_from_type
    }
}

/// Default `q_α`: `v` when `n = 1`, else `Π_{k<n} (v - k)`.
pub fn default_q_alpha(n: usize) -> RatPoly {
    if n == 1 {
        return RatPoly::x(V);
    }
    let roots: Vec<Rat> = (0..n as i64).map(int).collect();
    RatPoly::from_roots(&roots, V)
}

/// Spring data of `hat` over the sequence `seq` of its truncation. The
/// sequence's roots must carry branch labels of `hat` (as produced by
/// [`accompanying_sequence`] on the truncation). `leaf_counts`, when given,
/// must agree with the tree; `q_override` replaces individual `q_α`.
pub fn spring_q(
    hat: &RootedTree,
    seq: &AccompanyingSequence,
    leaf_counts: Option<&BTreeMap<Rat, usize>>,
    q_override: Option<&BTreeMap<Rat, RatPoly>>,
) -> Result<SpringData> {
    if !hat.is_spring_bush()? {
        return Err(Error::Precondition("not a spring bush".into()));
    }
    let top = hat.height();
    if top < 2 || seq.m != top - 1 {
        return Err(Error::Precondition(format!(
            "spring bush of height {top} needs a sequence of height {} >= 1, got {}",
            top.saturating_sub(1),
            seq.m
        )));
    }
    seq.validate()?;
    let mut n_alpha = BTreeMap::new();
    let mut l_top = BTreeMap::new();
    let mut top_roots = Vec::new();
    let mut seen = Vec::new();
    for root in &seq.roots {
        let label = root
            .branch
            .as_deref()
            .ok_or_else(|| Error::Precondition("sequence roots carry no branch labels".into()))?;
        let b = hat
            .index_of(label)
            .filter(|&b| hat.parent(b) == Some(hat.root()))
            .ok_or_else(|| {
                Error::Precondition(format!("{label} is not a branch of the spring bush"))
            })?;
        seen.push(b);
        // walk the branch to its vertex at the truncation height
        let mut v = b;
        while hat.level(v) < root.length {
            v = *hat.children(v).first().ok_or_else(|| {
                Error::Precondition(format!("branch {label} is shorter than {}", root.length))
            })?;
        }
        let tops = hat.children(v).len();
        if tops > 0 && root.length != top - 1 {
            return Err(Error::Precondition(format!(
                "branch {label} sprouts below the top"
            )));
        }
        let (n, lh) = if tops > 0 {
            (tops, top)
        } else {
            (1, root.length)
        };
        if tops > 0 {
            top_roots.push(root.alpha.clone());
        }
        n_alpha.insert(root.alpha.clone(), n);
        l_top.insert(root.alpha.clone(), lh);
    }
    if seen.len() != hat.children(hat.root()).len() {
        return Err(Error::Precondition(
            "sequence roots do not cover every branch".into(),
        ));
    }
    if let Some(given) = leaf_counts {
        if given != &n_alpha {
            return Err(Error::Precondition(format!(
                "leaf counts {:?} disagree with the tree",
                given
                    .iter()
                    .map(|(a, n)| (format_rat(a), *n))
                    .collect::<Vec<_>>()
            )));
        }
    }
    let p_top = RatPoly::from_roots(&top_roots, U);
    let r_top = seq.p(1).exact_divide(&p_top)?;
    let mut q_alpha = BTreeMap::new();
    for (a, &n) in &n_alpha {
        let q = match q_override.and_then(|o| o.get(a)) {
            Some(q) => {
                let q = q.clone().with_var(V);
                if q.degree() != Some(n) || !q.is_monic() || !q.is_squarefree() {
                    return Err(Error::Precondition(format!(
                        "q_{} must be monic with simple roots and degree {n}",
                        format_rat(a)
                    )));
                }
                if n == 1 && q != RatPoly::x(V) {
                    return Err(Error::Precondition(format!(
                        "q_{} must be v when n = 1",
                        format_rat(a)
                    )));
                }
                q
            }
            None => default_q_alpha(n),
        };
        q_alpha.insert(a.clone(), q);
    }
    let vars: Vec<String> = vec![U.into(), V.into()];
    let mut q = MPoly::zero(&vars);
    for (a, qa) in &q_alpha {
        let lin = RatPoly::from_roots([a], U);
        let cof = seq.p(1).exact_divide(&lin)?;
        q = &q + &(&MPoly::from_univariate(qa, &vars)? * &MPoly::from_univariate(&cof, &vars)?);
    }
    Ok(SpringData {
        top,
        p_top,
        r_top,
        n_alpha,
        l_top,
        q_alpha,
        q,
    })
}

/// Both sides of the count identities for `N` and `N_i`.
pub fn spring_counts(hat: &RootedTree, sd: &SpringData) -> SpringCounts {
    let tp = hat.tree_type();
    let n = tp.counts();
    let level_from_roots = (0..sd.top)
        .map(|i| {
            sd.n_alpha
                .iter()
                .filter(|(a, _)| sd.l_top[*a] > i)
                .map(|(_, k)| k)
                .sum()
        })
        .collect();
    let level_from_type = (0..sd.top).map(|i| n[i + 1..].iter().sum()).collect();
    SpringCounts {
        total_from_roots: sd.n_alpha.values().sum(),
        total_from_type: n.iter().sum(),
        level_from_roots,
        level_from_type,
    }
}

/// Equations of the extended sequence `(p_i, r_i)_{i ≤ top}` plus
/// `z w - q(u, v)`, in variables `z, u, t_1, ..., t_top, v, w`.
pub fn spring_model(sd: &SpringData, seq: &AccompanyingSequence) -> Result<SurfaceModel> {
    if sd.top != seq.m + 1 {
        return Err(Error::Precondition(
            "spring data and sequence heights differ".into(),
        ));
    }
    let vars: Vec<String> = ["z".to_owned(), U.to_owned()]
        .into_iter()
        .chain(t_vars(sd.top))
        .chain([V.to_owned(), "w".to_owned()])
        .collect();
    let r: Vec<&RatPoly> = (2..=seq.m).map(|i| seq.r(i)).chain([&sd.r_top]).collect();
    let (mut equations, mut text) = chain_equations(seq.p(1), &r, &vars)?;
    let z = MPoly::var("z", &vars)?;
    let w = MPoly::var("w", &vars)?;
    let mut q = MPoly::zero(&vars);
    for (e, c) in sd.q.terms() {
        let mut mono = MPoly::constant(c.clone(), &vars);
        for (name, &k) in [U, V].iter().zip(e) {
            for _ in 0..k {
                mono = &mono * &MPoly::var(name, &vars)?;
            }
        }
        q = &q + &mono;
    }
    equations.push(&(&z * &w) - &q);
    text.push(format!("z*w - ({})", sd.q));
    Ok(SurfaceModel {
        vars,
        equations,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUSH_0212: &str = "[[[[]]],[[[]]],[[]],[],[]]";
    const SPRING_00312: &str = "[[[[[],[]]]],[[[]]],[[]],[[]],[[]]]";

    fn roots(r: &[i64]) -> RatPoly {
        let r: Vec<Rat> = r.iter().map(|&x| int(x)).collect();
        RatPoly::from_roots(&r, U)
    }

    fn bush_0212_seq() -> AccompanyingSequence {
        accompanying_sequence(&RootedTree::from_nested(BUSH_0212).unwrap(), None).unwrap()
    }

    #[test]
    fn bush_0212_sequence() {
        let s = bush_0212_seq();
        assert_eq!(s.m, 3);
        assert_eq!(s.p(1), &roots(&[0, 1, 2, 3, 4]));
        assert_eq!(s.p(2), &roots(&[0, 1, 2]));
        assert_eq!(s.p(3), &roots(&[0, 1]));
        assert_eq!(s.r(1), &RatPoly::one(U));
        assert_eq!(s.r(3), &roots(&[2, 3, 4]));
        s.validate().unwrap();
        let lens: Vec<usize> = (0..5)
            .map(|a| branch_length(&s, &int(a)).unwrap())
            .collect();
        assert_eq!(lens, vec![3, 3, 2, 1, 1]);
        assert!(branch_length(&s, &int(9)).is_err());
        let back = tree_from_sequence(&s).unwrap();
        assert!(
            crate::tree::tree_iso(&back, &RootedTree::from_nested(BUSH_0212).unwrap()).is_some()
        );
        assert!(verify_fiber_structure(&s).all_passed());
    }

    #[test]
    fn chains_and_uniform_bushes() {
        let s = accompanying_sequence(&RootedTree::chain(4), None).unwrap();
        assert!(s.p.iter().all(|p| p == &roots(&[0])));
        assert!(s.r.iter().all(|r| r == &RatPoly::one(U)));
        let u = RootedTree::from_nested("[[[]],[[]],[[]]]").unwrap();
        let s = accompanying_sequence(&u, Some(&[int(1), int(-1), int(5)])).unwrap();
        assert!(s.p.iter().all(|p| p == &roots(&[1, -1, 5])));
        assert!(accompanying_sequence(&u, Some(&[int(1), int(1), int(5)])).is_err());
        assert!(
            accompanying_sequence(&RootedTree::from_nested("[[[],[]]]").unwrap(), None).is_err()
        );
    }

    #[test]
    fn bush_equations() {
        let s = accompanying_sequence(&RootedTree::chain(1), None).unwrap();
        let m = surface_equations(&s, None).unwrap();
        assert_eq!(m.to_text(), "z*t1 - u\n");
        let m = surface_equations(&bush_0212_seq(), None).unwrap();
        assert_eq!(m.equations.len(), 3);
        assert_eq!(m.vars, vec!["z", "u", "t1", "t2", "t3"]);
        assert_eq!(
            m.equations[0].to_string(),
            "-u^5 + 10*u^4 - 35*u^3 + z*t1 + 50*u^2 - 24*u"
        );
        assert_eq!(m.text[0], "z*t1 - (u^5 - 10u^4 + 35u^3 - 50u^2 + 24u)");
        assert_eq!(m.text[1], "z*t2 - (u^2 - 7u + 12)*t1");
        assert_eq!(SurfaceModel::from_json(&m.to_json()).unwrap(), m);
        assert!(surface_equations(&bush_0212_seq(), Some(4)).is_err());
    }

    #[test]
    fn danielewski() {
        let (m, t) = danielewski_model(2, &roots(&[0, 1])).unwrap();
        assert_eq!(m.to_text(), "z^2*t - (u^2 - u)\n");
        assert_eq!(m.equations[0].to_string(), "z^2*t - u^2 + u");
        assert_eq!(t.tree_type().to_string(), "(0,0,2)");
        let s = accompanying_sequence(&t, None).unwrap();
        assert!(s.p.iter().all(|p| p == &roots(&[0, 1])));
        assert!(s.r.iter().all(|r| r == &RatPoly::one(U)));
    }

    #[test]
    fn corrupted_sequences_fail_checks() {
        let mut s = bush_0212_seq();
        s.p[1] = &s.p[1] * &roots(&[0]);
        let rep = verify_fiber_structure(&s);
        assert!(!rep.all_passed());
        assert!(rep
            .checks
            .iter()
            .any(|c| c.name == "p_2 squarefree" && !c.passed));
        let mut s = bush_0212_seq();
        s.r[0] = roots(&[7]);
        let rep = verify_fiber_structure(&s);
        assert!(rep
            .checks
            .iter()
            .any(|c| c.name == "r_1 | r_2" && !c.passed));
        assert!(s.validate().is_err());
    }

    #[test]
    fn spring_00312() {
        let hat = RootedTree::from_nested(SPRING_00312).unwrap();
        let seq = accompanying_sequence(&hat.truncate(3), None).unwrap();
        let sd = spring_q(&hat, &seq, None, None).unwrap();
        assert_eq!(sd.p_top, roots(&[0]));
        assert_eq!(sd.r_top, seq.p(1).exact_divide(&roots(&[0])).unwrap());
        assert_eq!(sd.n_alpha[&int(0)], 2);
        assert_eq!(sd.q_alpha[&int(0)], default_q_alpha(2));
        let c = spring_counts(&hat, &sd);
        assert!(c.consistent());
        assert_eq!(c.total_from_type, 6);
        let model = spring_model(&sd, &seq).unwrap();
        assert_eq!(model.equations.len(), 5);
        let mut wrong = sd.n_alpha.clone();
        wrong.insert(int(0), 1);
        assert!(spring_q(&hat, &seq, Some(&wrong), None).is_err());
    }

    #[test]
    fn q_vanishing_at_roots() {
        let hat = RootedTree::from_nested(SPRING_00312).unwrap();
        let seq = accompanying_sequence(&hat.truncate(3), None).unwrap();
        let sd = spring_q(&hat, &seq, None, None).unwrap();
        for a in sd.n_alpha.keys() {
            for b in -2..4 {
                let val = sd.q.evaluate(&[a.clone(), int(b)]).unwrap();
                assert_eq!(val.is_zero(), sd.q_alpha[a].evaluate(&int(b)).is_zero());
            }
        }
    }

    #[test]
    fn trivial_spring_is_a_chain() {
        let hat = RootedTree::chain(3);
        let seq = accompanying_sequence(&hat.truncate(2), None).unwrap();
        let sd = spring_q(&hat, &seq, None, None).unwrap();
        let model = spring_model(&sd, &seq).unwrap();
        let chain = surface_equations(&accompanying_sequence(&hat, None).unwrap(), None).unwrap();
        assert_eq!(&model.text[..3], &chain.text[..]);
        assert_eq!(model.equations[3].to_string(), "z*w - v");
    }
}
