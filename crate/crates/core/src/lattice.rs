//! Integer lattices in `Z^n` given by generators.
//!
//! The generator matrix is brought to row Hermite normal form by unimodular
//! row operations. The transform is kept so that membership answers come
//! with an integer combination of the original generators.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    generators: Vec<Vec<i64>>,
    /// Echelon rows with positive pivots, entries above each pivot reduced
    /// into `[0, pivot)`.
    hnf: Vec<Vec<i128>>,
    pivots: Vec<usize>,
    /// `hnf[r] = sum_k transform[r][k] * generators[k]`.
    transform: Vec<Vec<i128>>,
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

/// `row_i -= q * row_j` on both the matrix and the transform.
fn axpy(rows: &mut [Vec<i128>], i: usize, j: usize, q: i128) -> Result<()> {
    if q == 0 {
        return Ok(());
    }
    for c in 0..rows[i].len() {
        rows[i][c] = sub(rows[i][c], mul(q, rows[j][c])?)?;
    }
    Ok(())
}

impl Lattice {
    pub fn new(dim: usize, generators: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != dim) {
            return Err(Error::Structural(format!(
                "lattice generator {g:?} does not have length {dim}"
            )));
        }
        let k = generators.len();
        let mut m: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let mut u: Vec<Vec<i128>> = (0..k)
            .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..dim {
            if r == k {
                break;
            }
            loop {
                // smallest nonzero |entry| in column c among rows r..k moves to r
                let best = (r..k)
                    .filter(|&i| m[i][c] != 0)
                    .min_by_key(|&i| m[i][c].unsigned_abs());
                let Some(b) = best else { break };
                m.swap(r, b);
                u.swap(r, b);
                let mut clean = true;
                for i in r + 1..k {
                    if m[i][c] != 0 {
                        let q = m[i][c].div_euclid(m[r][c]);
                        axpy(&mut m, i, r, q)?;
                        axpy(&mut u, i, r, q)?;
                        if m[i][c] != 0 {
                            clean = false;
                        }
                    }
                }
                if clean {
                    break;
                }
            }
            if m[r][c] == 0 {
                continue;
            }
            if m[r][c] < 0 {
                for x in m[r].iter_mut().chain(u[r].iter_mut()) {
                    *x = -*x;
                }
            }
            for i in 0..r {
                let q = m[i][c].div_euclid(m[r][c]);
                axpy(&mut m, i, r, q)?;
                axpy(&mut u, i, r, q)?;
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        u.truncate(r);
        Ok(Self {
            dim,
            generators,
            hnf: m,
            pivots,
            transform: u,
        })
    }

    /// `Z^n`.
    pub fn full(dim: usize) -> Self {
        let gens = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::new(dim, gens).expect("identity basis")
    }

    /// `{0}`.
    pub fn zero(dim: usize) -> Self {
        Self::new(dim, Vec::new()).expect("empty basis")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.hnf.len()
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    /// Hermite basis rows (as `i64`).
    pub fn basis(&self) -> Vec<Vec<i64>> {
        self.hnf
            .iter()
            .map(|r| r.iter().map(|&x| x as i64).collect())
            .collect()
    }

    /// Reduces `v` modulo the lattice: returns `(residue, coefficients on the
    /// Hermite rows)` with `v = residue + sum coeff_j * hnf_j` and every pivot
    /// coordinate of the residue in `[0, pivot)`.
    fn reduce_raw(&self, v: &[i64]) -> Result<(Vec<i128>, Vec<i128>)> {
        if v.len() != self.dim {
            return Err(Error::Structural(format!(
                "vector of length {} in a lattice of dimension {}",
                v.len(),
                self.dim
            )));
        }
        let mut res: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut coeff = Vec::with_capacity(self.rank());
        for (row, &c) in self.hnf.iter().zip(&self.pivots) {
            let q = res[c].div_euclid(row[c]);
            for j in 0..self.dim {
                res[j] = sub(res[j], mul(q, row[j])?)?;
            }
            coeff.push(q);
        }
        Ok((res, coeff))
    }

    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        Ok(self.reduce_raw(v)?.0.iter().all(|&x| x == 0))
    }

    /// Integer coefficients `w` with `v = sum_k w_k * generators[k]`, or
    /// `None` when `v` is not in the lattice.
    pub fn express(&self, v: &[i64]) -> Result<Option<Vec<i64>>> {
        let (res, coeff) = self.reduce_raw(v)?;
        if res.iter().any(|&x| x != 0) {
            return Ok(None);
        }
        let k = self.generators.len();
        let mut w = vec![0i128; k];
        for (q, urow) in coeff.iter().zip(&self.transform) {
            for j in 0..k {
                w[j] = w[j].checked_add(mul(*q, urow[j])?).ok_or(Error::Overflow)?;
            }
        }
        w.into_iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Canonical coset representative of `v + L` and the lattice vector
    /// `shift = v - residue`.
    pub fn reduce(&self, v: &[i64]) -> Result<(Vec<i64>, Vec<i64>)> {
        let (res, _) = self.reduce_raw(v)?;
        let res: Vec<i64> = res
            .into_iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::Overflow))
            .collect::<Result<_>>()?;
        let shift = v.iter().zip(&res).map(|(a, b)| a - b).collect();
        Ok((res, shift))
    }

    /// Lattice closed under the coordinate permutation `perm` (image of
    /// coordinate `i` is `perm[i]`), checked on generators.
    pub fn is_invariant_under(&self, perm: &[usize]) -> Result<bool> {
        for g in &self.generators {
            let mut img = vec![0; self.dim];
            for (i, &x) in g.iter().enumerate() {
                img[perm[i]] = x;
            }
            if !self.contains(&img)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
