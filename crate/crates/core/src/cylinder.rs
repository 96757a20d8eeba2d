//! Cylinder isomorphism over the base, with certificates.
//!
//! Two GDF surfaces `X`, `Y` over the same marked base have `B`-isomorphic
//! cylinders exactly when their Danielewski-Fieseler quotients have the same
//! number of points over every marked point and their type divisors are
//! linearly equivalent. The second condition forces a shift `c_i` per point;
//! the certificate records it together with a pairing of fiber components.
//!
//! Certificate convention: `level_Y(sigma_i(j)) = level_X(j) - c_i` and `c`
//! lies in the principal lattice.

use serde::Serialize;
use serde_json::{json, Value};

use crate::divisors::{
    compare_type_divisors, type_divisor, GraphDivisor, Inequivalence, TypeDivisor,
};
use crate::error::{Error, Result};
use crate::tree::{bush_of_type, RootedTree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CylIsoCertificate {
    /// `sigma[i][j]`: component of `Y` over point `i` paired with component
    /// `j` of `X` (indices into component order).
    pub sigma: Vec<Vec<usize>>,
    pub shift: Vec<i64>,
    /// `shift = Σ_k lattice_witness[k] * generators[k]`.
    pub lattice_witness: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    PointCountMismatch,
    ShiftNotConstant,
    ShiftNotPrincipal,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::PointCountMismatch => "point-count-mismatch",
            Reason::ShiftNotConstant => "shift-not-constant",
            Reason::ShiftNotPrincipal => "shift-not-principal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Isomorphic(CylIsoCertificate),
    NotIsomorphic {
        reason: Reason,
        /// Offending marked point, when the failure is local.
        point: Option<usize>,
    },
}

impl Decision {
    pub fn certificate(&self) -> Option<&CylIsoCertificate> {
        match self {
            Decision::Isomorphic(c) => Some(c),
            Decision::NotIsomorphic { .. } => None,
        }
    }

    pub fn is_isomorphic(&self) -> bool {
        matches!(self, Decision::Isomorphic(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Decision::Isomorphic(c) => json!({
                "isomorphic": true,
                "sigma": c.sigma,
                "shift": c.shift,
                "lattice_witness": c.lattice_witness,
                "reason": Value::Null,
            }),
            Decision::NotIsomorphic { reason, point } => json!({
                "isomorphic": false,
                "sigma": Value::Null,
                "shift": Value::Null,
                "lattice_witness": Value::Null,
                "reason": reason.as_str(),
                "point": point,
            }),
        }
    }
}

fn same_base(dx: &GraphDivisor, dy: &GraphDivisor) -> Result<()> {
    if dx.base().same_as(dy.base()) {
        Ok(())
    } else {
        Err(Error::Structural(
            "graph divisors live over different bases".into(),
        ))
    }
}

/// Stable sort of component indices by level.
fn order_by_level(levels: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..levels.len()).collect();
    idx.sort_by_key(|&j| levels[j]);
    idx
}

pub fn decide_types(tx: &TypeDivisor, ty: &TypeDivisor, dx: &GraphDivisor) -> Result<Decision> {
    let base = dx.base();
    let shift = match compare_type_divisors(tx, ty, base)? {
        Ok(c) => c,
        Err(Inequivalence::PointCount { point }) => {
            return Ok(Decision::NotIsomorphic {
                reason: Reason::PointCountMismatch,
                point: Some(point),
            })
        }
        Err(Inequivalence::ShiftNotConstant { point }) => {
            return Ok(Decision::NotIsomorphic {
                reason: Reason::ShiftNotConstant,
                point: Some(point),
            })
        }
        Err(Inequivalence::ShiftNotPrincipal { .. }) => {
            return Ok(Decision::NotIsomorphic {
                reason: Reason::ShiftNotPrincipal,
                point: None,
            })
        }
    };
    let lattice_witness = base
        .lattice()
        .express(&shift)?
        .ok_or_else(|| Error::Structural("principal shift without a witness".into()))?;
    let sigma = tx
        .levels
        .iter()
        .zip(&ty.levels)
        .map(|(lx, ly)| {
            let mut s = vec![0; lx.len()];
            for (a, b) in order_by_level(lx).into_iter().zip(order_by_level(ly)) {
                s[a] = b;
            }
            s
        })
        .collect();
    Ok(Decision::Isomorphic(CylIsoCertificate {
        sigma,
        shift,
        lattice_witness,
    }))
}

pub fn cylinders_isomorphic_over_b(dx: &GraphDivisor, dy: &GraphDivisor) -> Result<Decision> {
    same_base(dx, dy)?;
    decide_types(&type_divisor(dx), &type_divisor(dy), dx)
}

/// Re-checks a certificate from scratch: bijectivity of each `sigma_i`, the
/// level equation, and the lattice witness.
pub fn verify_certificate(dx: &GraphDivisor, dy: &GraphDivisor, cert: &CylIsoCertificate) -> bool {
    let (tx, ty) = (type_divisor(dx), type_divisor(dy));
    let n = dx.num_points();
    if cert.sigma.len() != n || cert.shift.len() != n || ty.levels.len() != n {
        return false;
    }
    for i in 0..n {
        let (lx, ly, s) = (&tx.levels[i], &ty.levels[i], &cert.sigma[i]);
        if s.len() != lx.len() || ly.len() != lx.len() {
            return false;
        }
        let mut hit = vec![false; ly.len()];
        for (j, &k) in s.iter().enumerate() {
            if k >= ly.len() || std::mem::replace(&mut hit[k], true) {
                return false;
            }
            if ly[k] as i64 != lx[j] as i64 - cert.shift[i] {
                return false;
            }
        }
    }
    let gens = dx.base().lattice().generators();
    if cert.lattice_witness.len() != gens.len() {
        return false;
    }
    (0..n).all(|j| {
        let sum: Option<i64> = gens
            .iter()
            .zip(&cert.lattice_witness)
            .try_fold(0i64, |acc, (g, w)| acc.checked_add(g[j].checked_mul(*w)?));
        sum == Some(cert.shift[j])
    })
}

/// Result of the fiberwise search: the base permutation used and the
/// certificate for `DX` moved along it versus `DY`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberwiseMatch {
    pub perm: Vec<usize>,
    pub certificate: CylIsoCertificate,
}

/// Tries the identity, then each listed base automorphism, in order. Only the
/// supplied automorphisms are searched.
pub fn cylinders_isomorphic_fiberwise(
    dx: &GraphDivisor,
    dy: &GraphDivisor,
) -> Result<Option<FiberwiseMatch>> {
    same_base(dx, dy)?;
    let n = dx.num_points();
    let identity: Vec<usize> = (0..n).collect();
    let mut tried: Vec<&[usize]> = Vec::new();
    for perm in
        std::iter::once(identity.as_slice()).chain(dx.base().base_autos().iter().map(Vec::as_slice))
    {
        if tried.contains(&perm) {
            continue;
        }
        tried.push(perm);
        if let Decision::Isomorphic(cert) = cylinders_isomorphic_over_b(&dx.permuted(perm), dy)? {
            return Ok(Some(FiberwiseMatch {
                perm: perm.to_vec(),
                certificate: cert,
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StretchSpec {
    a: Vec<usize>,
    principal: bool,
}

impl StretchSpec {
    /// `principal` asks for `A` to be checked against the base lattice when
    /// the stretch is applied.
    pub fn new(a: Vec<i64>, principal: bool) -> Result<Self> {
        let a = a
            .into_iter()
            .map(|x| {
                usize::try_from(x).map_err(|_| {
                    Error::Precondition(format!("stretching divisor must be effective, got {x}"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { a, principal })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.a.iter().map(|&x| x as i64).collect()
    }

    pub fn principal(&self) -> bool {
        self.principal
    }
}

pub fn stretch(d: &GraphDivisor, s: &StretchSpec) -> Result<GraphDivisor> {
    if s.a.len() != d.num_points() {
        return Err(Error::Structural(format!(
            "stretching divisor has {} entries for {} points",
            s.a.len(),
            d.num_points()
        )));
    }
    if s.principal && !d.base().lattice().contains(&s.as_i64())? {
        return Err(Error::Precondition(format!(
            "stretching divisor {:?} is flagged principal but is not",
            s.a
        )));
    }
    let trees = d
        .trees()
        .iter()
        .zip(&s.a)
        .map(|(t, &a)| t.stretched(a))
        .collect();
    d.with_trees(trees)
}

/// Levels over point `i` after stretching are the old levels plus `a_i`.
pub fn stretch_type_law_check(d: &GraphDivisor, s: &StretchSpec) -> Result<bool> {
    let after = type_divisor(&stretch(d, s)?);
    let before = type_divisor(d);
    Ok(before
        .levels
        .iter()
        .zip(&s.a)
        .map(|(l, &a)| l.iter().map(|x| x + a).collect::<Vec<_>>())
        .eq(after.levels))
}

/// Replaces every fiber tree by the bush of the same type. The cylinder is
/// unchanged since type divisors agree level by level.
pub fn bushify(d: &GraphDivisor) -> GraphDivisor {
    let trees = d.trees().iter().map(bush_of_tree).collect();
    d.with_trees(trees).expect("same number of trees")
}

fn bush_of_tree(t: &RootedTree) -> RootedTree {
    bush_of_type(&t.tree_type()).expect("type of a valid tree")
}

/// Complete invariant of the cylinder over the base: sorted level multisets
/// after moving the vector of per-point minima to its canonical coset
/// representative modulo the principal lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CanonicalRecord {
    pub levels: Vec<Vec<i64>>,
}

pub fn cylinder_canonical_invariant(d: &GraphDivisor) -> Result<CanonicalRecord> {
    let sorted = type_divisor(d).sorted();
    let mins: Vec<i64> = sorted.iter().map(|l| l[0] as i64).collect();
    let (residue, _) = d.base().lattice().reduce(&mins)?;
    let levels = sorted
        .iter()
        .zip(mins.iter().zip(&residue))
        .map(|(l, (m, r))| l.iter().map(|&x| x as i64 - m + r).collect())
        .collect();
    Ok(CanonicalRecord { levels })
}
