//! Exact polynomials over `Q`.
//!
//! [`RatPoly`] is dense and univariate, which is all accompanying sequences
//! need. [`MPoly`] is a small sparse multivariate type used only to write
//! down model equations and evaluate them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rat, int, parse_rat, Rat};

/// Coefficients low degree first; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
    var: String,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>, var: &str) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self {
            coeffs,
            var: var.to_owned(),
        }
    }

    pub fn zero(var: &str) -> Self {
        Self::new(Vec::new(), var)
    }

    pub fn constant(c: Rat, var: &str) -> Self {
        Self::new(vec![c], var)
    }

    pub fn one(var: &str) -> Self {
        Self::constant(Rat::one(), var)
    }

    /// The variable itself.
    pub fn x(var: &str) -> Self {
        Self::new(vec![Rat::zero(), Rat::one()], var)
    }

    /// `Π (x - r)`.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Rat>, var: &str) -> Self {
        roots.into_iter().fold(Self::one(var), |acc, r| {
            &acc * &Self::new(vec![-r.clone(), Rat::one()], var)
        })
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn with_var(mut self, var: &str) -> Self {
        self.var = var.to_owned();
        self
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn evaluate(&self, x: &Rat) -> Rat {
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * int(k as i64))
            .collect();
        Self::new(c, &self.var)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect(), &self.var)
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => self.clone(),
        }
    }

    /// Quotient and remainder; the divisor must be nonzero.
    pub fn div_rem(&self, d: &RatPoly) -> Result<(RatPoly, RatPoly)> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::Precondition("division by the zero polynomial".into()))?;
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let n = rem.len();
        if n <= dd {
            return Ok((Self::zero(&self.var), self.clone()));
        }
        let mut q = vec![Rat::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        Ok((Self::new(q, &self.var), Self::new(rem, &self.var)))
    }

    /// `self / d`, failing unless the remainder is zero.
    pub fn exact_divide(&self, d: &RatPoly) -> Result<RatPoly> {
        let (q, r) = self.div_rem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NotDivisible(self.to_string(), d.to_string()))
        }
    }

    pub fn divides(&self, other: &RatPoly) -> bool {
        other.div_rem(self).is_ok_and(|(_, r)| r.is_zero())
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// No repeated roots over an algebraic closure: `gcd(p, p') = 1`.
    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Coefficients as `"p/q"` strings, low degree first.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|c| Value::String(format_rat(c)))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, var: &str) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("polynomial must be an array of coefficients".into()))?;
        let coeffs = arr
            .iter()
            .map(|c| match c {
                Value::String(s) => parse_rat(s),
                Value::Number(n) => n
                    .as_i64()
                    .map(int)
                    .ok_or_else(|| Error::Parse(format!("non-integer coefficient {n}"))),
                _ => Err(Error::Parse(
                    "coefficient must be a string or integer".into(),
                )),
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(coeffs, var))
    }

    fn terms(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
    }
}

/// Writes `c·x^k` terms highest degree first, e.g. `u^3 - 3u^2 + 2u`.
impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            let show = !mag.is_one() || k == 0;
            if show {
                write!(f, "{}", format_rat(&mag))?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}", self.var)?,
                _ => write!(f, "{}^{}", self.var, k)?,
            }
        }
        Ok(())
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero);
                let b = o.coeffs.get(k).cloned().unwrap_or_else(Rat::zero);
                a + b
            })
            .collect();
        RatPoly::new(c, &self.var)
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect(), &self.var)
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, o: &RatPoly) -> RatPoly {
        self + &(-o)
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, o: &RatPoly) -> RatPoly {
        if self.is_zero() || o.is_zero() {
            return RatPoly::zero(&self.var);
        }
        let mut c = vec![Rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RatPoly::new(c, &self.var)
    }
}

/// Sparse polynomial in named variables; monomials are exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MPoly {
    pub fn zero(vars: &[String]) -> Self {
        Self {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rat, vars: &[String]) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    pub fn var(name: &str, vars: &[String]) -> Result<Self> {
        let k = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Structural(format!("unknown variable {name}")))?;
        let mut e = vec![0; vars.len()];
        e[k] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, Rat::one());
        Ok(p)
    }

    /// Embeds a univariate polynomial in the variable of the same name.
    pub fn from_univariate(p: &RatPoly, vars: &[String]) -> Result<Self> {
        let k = vars
            .iter()
            .position(|v| v == p.var())
            .ok_or_else(|| Error::Structural(format!("unknown variable {}", p.var())))?;
        let mut out = Self::zero(vars);
        for (d, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; vars.len()];
            e[k] = d as u32;
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rat> {
        &self.terms
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        let slot = self.terms.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at a point given in variable order.
    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat> {
        if point.len() != self.vars.len() {
            return Err(Error::Structural(format!(
                "point has {} coordinates for {} variables",
                point.len(),
                self.vars.len()
            )));
        }
        Ok(self.terms.iter().fold(Rat::zero(), |acc, (e, c)| {
            let m = e
                .iter()
                .zip(point)
                .fold(c.clone(), |m, (&k, x)| m * num::pow(x.clone(), k as usize));
            acc + m
        }))
    }

    /// Terms as `[{"exp": [..], "coeff": "p/q"}]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .rev()
                .map(|(e, c)| serde_json::json!({"exp": e, "coeff": format_rat(c)}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, vars: &[String]) -> Result<Self> {
        let bad =
            || Error::Parse("polynomial terms must be {\"exp\": [...], \"coeff\": \"p/q\"}".into());
        let mut p = Self::zero(vars);
        for t in v.as_array().ok_or_else(bad)? {
            let e: Vec<u32> = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .and_then(|x| u32::try_from(x).ok())
                        .ok_or_else(bad)
                })
                .collect::<Result<_>>()?;
            if e.len() != vars.len() {
                return Err(bad());
            }
            let c = parse_rat(t.get("coeff").and_then(Value::as_str).ok_or_else(bad)?)?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // graded reverse order keeps the leading monomials first
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            let mono: Vec<String> = e
                .iter()
                .zip(&self.vars)
                .filter(|(k, _)| **k > 0)
                .map(|(k, v)| {
                    if *k == 1 {
                        v.clone()
                    } else {
                        format!("{v}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rat(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, o: &MPoly) -> MPoly {
        self + &(-o)
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    // exponent vectors add under multiplication
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: &MPoly) -> MPoly {
        let mut out = MPoly::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(r: &[i64]) -> RatPoly {
        let r: Vec<Rat> = r.iter().map(|&x| int(x)).collect();
        RatPoly::from_roots(&r, "u")
    }

    #[test]
    fn arithmetic() {
        let p1 = roots(&[0, 1, 2, 3, 4]);
        let p2 = roots(&[0, 1, 2]);
        assert_eq!(p1.exact_divide(&p2).unwrap(), roots(&[3, 4]));
        assert_eq!(p2.evaluate(&int(3)), int(6));
        assert!(roots(&[0, 0]).exact_divide(&roots(&[1])).is_err());
        assert_eq!(&(&p1 - &p2) + &p2, p1);
        assert_eq!(p1.degree(), Some(5));
        assert!(p1.is_monic());
    }

    #[test]
    fn squarefree() {
        assert!(!roots(&[0, 0]).is_squarefree());
        assert!(roots(&[0, 1, 5]).is_squarefree());
        assert!(RatPoly::one("u").is_squarefree());
        assert!(!RatPoly::zero("u").is_squarefree());
    }

    #[test]
    fn gcd_of_products() {
        let g = roots(&[0, 1, 2]).gcd(&roots(&[1, 2, 7]));
        assert_eq!(g, roots(&[1, 2]));
    }

    #[test]
    fn text_form() {
        assert_eq!(
            roots(&[0, 1, 2, 3, 4]).to_string(),
            "u^5 - 10u^4 + 35u^3 - 50u^2 + 24u"
        );
        assert_eq!(
            RatPoly::new(vec![crate::rational::frac(-1, 2)], "v").to_string(),
            "-1/2"
        );
        assert_eq!(RatPoly::zero("u").to_string(), "0");
    }

    #[test]
    fn json_roundtrip() {
        let p = RatPoly::new(vec![crate::rational::frac(1, 3), int(-2), int(1)], "u");
        let v = p.to_json();
        assert_eq!(v, serde_json::json!(["1/3", "-2", "1"]));
        assert_eq!(RatPoly::from_json(&v, "u").unwrap(), p);
    }

    #[test]
    fn multivariate() {
        let vars: Vec<String> = ["z", "u", "t1"].iter().map(|s| s.to_string()).collect();
        let z = MPoly::var("z", &vars).unwrap();
        let t = MPoly::var("t1", &vars).unwrap();
        let p = MPoly::from_univariate(&roots(&[0, 1]), &vars).unwrap();
        let e = &(&z * &t) - &p;
        assert_eq!(e.to_string(), "z*t1 - u^2 + u");
        assert_eq!(e.evaluate(&[int(2), int(3), int(3)]).unwrap(), int(0));
        assert_eq!(MPoly::from_json(&e.to_json(), &vars).unwrap(), e);
    }
}
