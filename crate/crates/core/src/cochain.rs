//! Bar cochains `C^n(F, X)` of a subgroup `F` with values in a module.
//!
//! A degree-`n` cochain is stored densely: the value at `(f_1, …, f_n)` occupies
//! the `d` coordinates starting at `((i_1·k + i_2)·k + … + i_n)·d`, where `i_j` is
//! the position of `f_j` in the sorted element list of `F` and `k = |F|`. The
//! leftmost argument varies slowest.

use std::collections::BTreeMap;

use num::{One, Zero};
use rand::Rng;

use crate::algebra::{same_group, GroupAlgebraElement};
use crate::error::{Error, Result};
use crate::group::Subgroup;
use crate::linalg::float::{svd_rank, RANK_TOL};
use crate::linalg::{exact, QMatrix, SparseMatrix};
use crate::module::{random_vector, BanachModule};
use crate::rational::{add_assign_scaled, fmt_q, parse_q, vec_sub, Q};

pub const DEFAULT_DEGREE_CAP: usize = 3;
pub const DEFAULT_FLAT_CAP: usize = 2_000_000;
/// Largest matrix (rows × cols) handed to the dense SVD in float mode.
pub const FLOAT_ENTRY_CAP: usize = 25_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub degree: usize,
    pub flat: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            degree: DEFAULT_DEGREE_CAP,
            flat: DEFAULT_FLAT_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    degree: usize,
    dim: usize,
    domain: Vec<usize>,
    values: Vec<Q>,
}

impl Cochain {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Q> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        assert_eq!(
            (self.degree, self.dim, &self.domain),
            (other.degree, other.dim, &other.domain)
        );
        Cochain {
            values: vec_sub(&self.values, &other.values),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        assert_eq!(
            (self.degree, self.dim, &self.domain),
            (other.degree, other.dim, &other.domain)
        );
        Cochain {
            values: crate::rational::vec_add(&self.values, &other.values),
            ..self.clone()
        }
    }

    pub fn scale(&self, s: &Q) -> Cochain {
        Cochain {
            values: self.values.iter().map(|x| x * s).collect(),
            ..self.clone()
        }
    }

    fn position(&self, g: usize) -> Option<usize> {
        self.domain.binary_search(&g).ok()
    }

    fn offset(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.degree {
            return Err(Error::InvalidArgument(format!(
                "expected {} arguments, got {}",
                self.degree,
                tuple.len()
            )));
        }
        let k = self.domain.len();
        let mut idx = 0;
        for &g in tuple {
            let i = self
                .position(g)
                .ok_or_else(|| Error::InvalidArgument(format!("element {g} outside the domain")))?;
            idx = idx * k + i;
        }
        Ok(idx * self.dim)
    }

    /// `φ(g_1, …, g_n)`.
    pub fn value(&self, tuple: &[usize]) -> Result<&[Q]> {
        let o = self.offset(tuple)?;
        Ok(&self.values[o..o + self.dim])
    }

    /// All argument tuples in flat order.
    pub fn tuples(&self) -> TupleIter {
        TupleIter::from_domain(&self.domain, self.degree)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut values = serde_json::Map::new();
        for (i, t) in self.tuples().enumerate() {
            let key = t.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            let v = self.values[i * self.dim..(i + 1) * self.dim]
                .iter()
                .map(|x| serde_json::Value::String(fmt_q(x)));
            values.insert(key, serde_json::Value::Array(v.collect()));
        }
        serde_json::json!({ "degree": self.degree, "values": values })
    }
}

/// Iterates `domain^n` in flat order (leftmost slowest).
pub struct TupleIter {
    domain: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl TupleIter {
    pub fn from_domain(domain: &[usize], n: usize) -> Self {
        TupleIter {
            domain: domain.to_vec(),
            idx: vec![0; n],
            done: domain.is_empty() && n > 0,
        }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.domain[i]).collect();
        let mut j = self.idx.len();
        loop {
            if j == 0 {
                self.done = true;
                break;
            }
            j -= 1;
            self.idx[j] += 1;
            if self.idx[j] < self.domain.len() {
                break;
            }
            self.idx[j] = 0;
        }
        Some(out)
    }
}

/// The complex `C^•(F, X)` for a subgroup `F` of the module's group.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    module: BanachModule,
    sub: Subgroup,
    caps: Caps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    /// Ranks modulo 2^61 − 1 whose sum equals `dim C^n`; since rational ranks are
    /// at least the modular ones and `∂∂ = 0`, both are exact.
    ModularCertified,
    ExactElimination,
    FloatSvd,
}

#[derive(Clone, Debug)]
pub struct CohomologyReport {
    pub degree: usize,
    pub dim_c: usize,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
    pub method: RankMethod,
    pub basis_z: Option<Vec<Vec<Q>>>,
    pub basis_b: Option<Vec<Vec<Q>>>,
}

impl CochainComplex {
    pub fn new(module: &BanachModule, sub: &Subgroup) -> Result<Self> {
        Self::with_caps(module, sub, Caps::default())
    }

    pub fn with_caps(module: &BanachModule, sub: &Subgroup, caps: Caps) -> Result<Self> {
        if !same_group(module.group(), sub.group()) {
            return Err(Error::GroupMismatch);
        }
        Ok(CochainComplex {
            module: module.clone(),
            sub: sub.clone(),
            caps,
        })
    }

    pub fn over_group(module: &BanachModule) -> Self {
        CochainComplex {
            module: module.clone(),
            sub: Subgroup::whole(module.group()),
            caps: Caps::default(),
        }
    }

    pub fn module(&self) -> &BanachModule {
        &self.module
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.sub
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    /// `dim C^n = k^n · d`, refused above the flat-size cap.
    pub fn flat_len(&self, n: usize) -> Result<usize> {
        let k = self.sub.order();
        let mut len: usize = self.dim();
        for _ in 0..n {
            len = len.saturating_mul(k);
        }
        if len > self.caps.flat {
            return Err(Error::CapExceeded {
                what: format!("dim C^{n}"),
                requested: len,
                cap: self.caps.flat,
            });
        }
        Ok(len)
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.caps.degree {
            return Err(Error::CapExceeded {
                what: "degree".into(),
                requested: n,
                cap: self.caps.degree,
            });
        }
        Ok(())
    }

    fn check_cochain(&self, phi: &Cochain) -> Result<()> {
        if phi.domain != self.sub.elements() || phi.dim != self.dim() {
            return Err(Error::InvalidArgument(
                "cochain belongs to a different complex".into(),
            ));
        }
        Ok(())
    }

    pub fn cochain(&self, degree: usize, values: Vec<Q>) -> Result<Cochain> {
        let len = self.flat_len(degree)?;
        if values.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} values, got {}",
                values.len()
            )));
        }
        Ok(Cochain {
            degree,
            dim: self.dim(),
            domain: self.sub.elements().to_vec(),
            values,
        })
    }

    pub fn zero(&self, degree: usize) -> Result<Cochain> {
        let len = self.flat_len(degree)?;
        self.cochain(degree, vec![Q::zero(); len])
    }

    pub fn from_fn(&self, degree: usize, mut f: impl FnMut(&[usize]) -> Vec<Q>) -> Result<Cochain> {
        let len = self.flat_len(degree)?;
        let mut values = Vec::with_capacity(len);
        for t in TupleIter::from_domain(self.sub.elements(), degree) {
            let v = f(&t);
            if v.len() != self.dim() {
                return Err(Error::InvalidArgument(
                    "value has the wrong dimension".into(),
                ));
            }
            values.extend(v);
        }
        self.cochain(degree, values)
    }

    /// Random cochain with entries `k/den`, `|k| ≤ range`.
    pub fn random(
        &self,
        degree: usize,
        rng: &mut impl Rng,
        range: i64,
        den: i64,
    ) -> Result<Cochain> {
        let len = self.flat_len(degree)?;
        self.cochain(degree, random_vector(rng, len, range, den))
    }

    /// Direct alternating-sum formula:
    /// `(∂φ)(g_1..g_{n+1}) = −π(g_1)φ(g_2..) + (−1)^n φ(g_1..g_n) − Σ_i (−1)^i φ(.., g_i g_{i+1}, ..)`.
    pub fn coboundary(&self, phi: &Cochain) -> Result<Cochain> {
        self.check_cochain(phi)?;
        let n = phi.degree;
        let g = self.module.group().clone();
        let sign_last = if n.is_multiple_of(2) { Q::one() } else { -Q::one() };
        self.from_fn(n + 1, |t| {
            let mut out = self.module.act(t[0], phi.value(&t[1..]).unwrap());
            out.iter_mut().for_each(|x| *x = -&*x);
            add_assign_scaled(&mut out, phi.value(&t[..n]).unwrap(), &sign_last);
            let mut merged = Vec::with_capacity(n);
            for i in 1..=n {
                merged.clear();
                merged.extend_from_slice(&t[..i - 1]);
                merged.push(g.mul(t[i - 1], t[i]));
                merged.extend_from_slice(&t[i + 1..]);
                let s = if i % 2 == 1 { Q::one() } else { -Q::one() };
                add_assign_scaled(&mut out, phi.value(&merged).unwrap(), &s);
            }
            out
        })
    }

    /// Sparse matrix of `∂: C^n → C^{n+1}` in flat coordinates.
    pub fn coboundary_matrix(&self, n: usize) -> Result<SparseMatrix> {
        let ncols = self.flat_len(n)?;
        let nrows = self.flat_len(n + 1)?;
        let d = self.dim();
        let k = self.sub.order();
        let elems = self.sub.elements();
        let g = self.module.group().clone();
        let pos = |x: usize| {
            elems
                .binary_search(&x)
                .expect("subgroup closed under products")
        };
        let flat = |t: &[usize]| t.iter().fold(0usize, |acc, &x| acc * k + pos(x));
        let sign_last = if n.is_multiple_of(2) { Q::one() } else { -Q::one() };
        let mut rows = Vec::with_capacity(nrows);
        for t in TupleIter::from_domain(elems, n + 1) {
            let head = flat(&t[1..]) * d;
            let tail = flat(&t[..n]) * d;
            let mut merged_offsets = Vec::with_capacity(n);
            for i in 1..=n {
                let mut m = t[..i - 1].to_vec();
                m.push(g.mul(t[i - 1], t[i]));
                m.extend_from_slice(&t[i + 1..]);
                let s = if i % 2 == 1 { Q::one() } else { -Q::one() };
                merged_offsets.push((flat(&m) * d, s));
            }
            let pm = self.module.matrix(t[0]);
            for r in 0..d {
                let mut row = Vec::with_capacity(d + n + 1);
                for j in 0..d {
                    if !pm[(r, j)].is_zero() {
                        row.push((head + j, -pm[(r, j)].clone()));
                    }
                }
                row.push((tail + r, sign_last.clone()));
                for (o, s) in &merged_offsets {
                    row.push((o + r, s.clone()));
                }
                rows.push(row);
            }
        }
        Ok(SparseMatrix::from_rows(ncols, rows))
    }

    /// `Z^n`, `B^n` and `H^n` dimensions. Exact mode first tries modular ranks
    /// and falls back to fraction-free elimination when they do not certify.
    pub fn cohomology(&self, n: usize, mode: Mode, with_bases: bool) -> Result<CohomologyReport> {
        self.check_degree(n)?;
        let dim_c = self.flat_len(n)?;
        let out = self.coboundary_matrix(n)?;
        let inc = if n == 0 {
            None
        } else {
            Some(self.coboundary_matrix(n - 1)?)
        };
        let (rank_in, rank_out, method) = match mode {
            Mode::Float => {
                let too_big =
                    |m: &SparseMatrix| m.nrows().saturating_mul(m.ncols()) > FLOAT_ENTRY_CAP;
                if too_big(&out) || inc.as_ref().is_some_and(too_big) {
                    return Err(Error::CapExceeded {
                        what: "dense float matrix entries".into(),
                        requested: out.nrows() * out.ncols(),
                        cap: FLOAT_ENTRY_CAP,
                    });
                }
                let ri = inc.as_ref().map_or(0, |m| svd_rank(&m.to_f64(), RANK_TOL));
                (ri, svd_rank(&out.to_f64(), RANK_TOL), RankMethod::FloatSvd)
            }
            Mode::Exact => {
                let modular = (|| -> Result<(usize, usize)> {
                    let ri = match &inc {
                        Some(m) => m.rank_mod_p()?,
                        None => 0,
                    };
                    Ok((ri, out.rank_mod_p()?))
                })();
                match modular {
                    Ok((ri, ro)) if ri + ro == dim_c => (ri, ro, RankMethod::ModularCertified),
                    _ => {
                        let ri = inc.as_ref().map_or(0, SparseMatrix::rank_exact);
                        (ri, out.rank_exact(), RankMethod::ExactElimination)
                    }
                }
            }
        };
        let dim_z = dim_c - rank_out;
        if rank_in > dim_z {
            return Err(Error::Invariant(format!(
                "rank of the incoming map exceeds dim Z^{n}"
            )));
        }
        let (basis_z, basis_b) = if with_bases && mode == Mode::Exact {
            let bz = out.echelon().into_rref().kernel_basis();
            let bb = match &inc {
                Some(m) => m.transpose().echelon().basis(),
                None => Vec::new(),
            };
            if bz.len() != dim_z || bb.len() != rank_in {
                return Err(Error::Invariant("basis sizes disagree with ranks".into()));
            }
            if let Some(b) = bb
                .iter()
                .find(|b| !out.mul_vec(b).iter().all(Zero::is_zero))
            {
                let _ = b;
                return Err(Error::Invariant(format!(
                    "a coboundary of degree {n} is not a cocycle"
                )));
            }
            (Some(bz), Some(bb))
        } else {
            (None, None)
        };
        Ok(CohomologyReport {
            degree: n,
            dim_c,
            dim_z,
            dim_b: rank_in,
            dim_h: dim_z - rank_in,
            method,
            basis_z,
            basis_b,
        })
    }

    pub fn is_cocycle(&self, phi: &Cochain) -> Result<bool> {
        Ok(self.coboundary(phi)?.is_zero())
    }

    /// Exact membership of `φ` in `B^n`.
    pub fn is_coboundary(&self, phi: &Cochain) -> Result<bool> {
        self.check_cochain(phi)?;
        if phi.degree == 0 {
            return Ok(phi.is_zero());
        }
        let m = self.coboundary_matrix(phi.degree - 1)?;
        let e = m.transpose().echelon();
        Ok(e.contains_q(&phi.values))
    }

    /// A primitive `ψ` with `∂ψ = φ`, when one exists.
    pub fn solve_primitive(&self, phi: &Cochain) -> Result<Option<Cochain>> {
        self.check_cochain(phi)?;
        if phi.degree == 0 {
            return Err(Error::InvalidArgument(
                "degree-0 cochains have no primitive".into(),
            ));
        }
        let m = self.coboundary_matrix(phi.degree - 1)?.to_dense();
        match exact::solve(&m, &phi.values) {
            Some((x, _)) => Ok(Some(self.cochain(phi.degree - 1, x)?)),
            None => Ok(None),
        }
    }

    fn check_arguments(&self, phi: &Cochain, xis: &[GroupAlgebraElement]) -> Result<()> {
        self.check_cochain(phi)?;
        if xis.len() != phi.degree {
            return Err(Error::InvalidArgument(format!(
                "degree {} cochain takes {} arguments, got {}",
                phi.degree,
                phi.degree,
                xis.len()
            )));
        }
        for xi in xis {
            if !same_group(xi.group(), self.module.group()) {
                return Err(Error::GroupMismatch);
            }
            if let Some(g) = xi.support().into_iter().find(|&g| !self.sub.contains(g)) {
                return Err(Error::InvalidArgument(format!(
                    "argument support element {g} outside the subgroup"
                )));
            }
        }
        Ok(())
    }

    /// Multilinear sum `Σ ξ_1(g_1)⋯ξ_n(g_n) φ(g_1..g_n)` with no affinity check.
    pub fn linear_eval(&self, phi: &Cochain, xis: &[GroupAlgebraElement]) -> Result<Vec<Q>> {
        self.check_arguments(phi, xis)?;
        let d = self.dim();
        if phi.degree == 0 {
            return Ok(phi.values.clone());
        }
        let supports: Vec<Vec<(usize, Q)>> = xis
            .iter()
            .map(|x| x.terms().map(|(g, t)| (g, t.clone())).collect())
            .collect();
        let mut out = vec![Q::zero(); d];
        let mut idx = vec![0usize; phi.degree];
        if supports.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        let mut tuple = vec![0usize; phi.degree];
        loop {
            let mut w = Q::one();
            for (j, &i) in idx.iter().enumerate() {
                tuple[j] = supports[j][i].0;
                w *= &supports[j][i].1;
            }
            add_assign_scaled(&mut out, phi.value(&tuple)?, &w);
            let mut j = phi.degree;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < supports[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// `φ̂(ξ_1, …, ξ_n)`: the multiaffine extension to arguments in the affine space.
    pub fn multiaffine_eval(&self, phi: &Cochain, xis: &[GroupAlgebraElement]) -> Result<Vec<Q>> {
        for xi in xis {
            xi.require_affine()?;
        }
        self.linear_eval(phi, xis)
    }

    /// The coboundary formula with affine-space arguments:
    /// `−π(ξ_1)φ̂(ξ_2..) + (−1)^n φ̂(ξ_1..ξ_n) − Σ_i (−1)^i φ̂(.., ξ_i ξ_{i+1}, ..)`.
    pub fn affine_coboundary_eval(
        &self,
        phi: &Cochain,
        xis: &[GroupAlgebraElement],
    ) -> Result<Vec<Q>> {
        for xi in xis {
            xi.require_affine()?;
        }
        self.linear_coboundary_eval(phi, xis)
    }

    /// The same formula with the multilinear extension and arbitrary group-algebra
    /// arguments; off the affine space it differs from the extension of `∂φ`.
    pub fn linear_coboundary_eval(
        &self,
        phi: &Cochain,
        xis: &[GroupAlgebraElement],
    ) -> Result<Vec<Q>> {
        let n = phi.degree;
        if xis.len() != n + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} arguments",
                n + 1
            )));
        }
        let p1 = self.module.apply_algebra(&xis[0])?;
        let mut out = p1.mul_vec(&self.linear_eval(phi, &xis[1..])?);
        out.iter_mut().for_each(|x| *x = -&*x);
        let sign_last = if n.is_multiple_of(2) { Q::one() } else { -Q::one() };
        add_assign_scaled(&mut out, &self.linear_eval(phi, &xis[..n])?, &sign_last);
        for i in 1..=n {
            let mut args: Vec<GroupAlgebraElement> = xis[..i - 1].to_vec();
            args.push(xis[i - 1].convolve(&xis[i])?);
            args.extend_from_slice(&xis[i + 1..]);
            let s = if i % 2 == 1 { Q::one() } else { -Q::one() };
            add_assign_scaled(&mut out, &self.linear_eval(phi, &args)?, &s);
        }
        Ok(out)
    }

    /// `φ|_F` as a cochain of `target`, whose subgroup must lie inside this one.
    pub fn restrict(&self, phi: &Cochain, target: &CochainComplex) -> Result<Cochain> {
        self.check_cochain(phi)?;
        if !same_group(self.module.group(), target.module.group())
            || target.module.matrices() != self.module.matrices()
        {
            return Err(Error::GroupMismatch);
        }
        if let Some(&f) = target
            .sub
            .elements()
            .iter()
            .find(|&&f| !self.sub.contains(f))
        {
            return Err(Error::InvalidArgument(format!(
                "element {f} of the target lies outside the domain"
            )));
        }
        target.from_fn(phi.degree, |t| phi.value(t).unwrap().to_vec())
    }

    /// Parses `{"degree": n, "values": {"g1,g2": ["p/q", ...]}}`; missing tuples are zero.
    pub fn cochain_from_json(&self, v: &serde_json::Value) -> Result<Cochain> {
        let degree = v
            .get("degree")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Parse("cochain needs an integer degree".into()))?
            as usize;
        let mut phi = self.zero(degree)?;
        let values = v
            .get("values")
            .and_then(serde_json::Value::as_object)
            .ok_or_else(|| Error::Parse("cochain needs a values object".into()))?;
        let mut seen = BTreeMap::new();
        for (key, val) in values {
            let tuple: Vec<usize> = if key.trim().is_empty() {
                Vec::new()
            } else {
                key.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad tuple key '{key}'")))
                    })
                    .collect::<Result<_>>()?
            };
            let arr = val
                .as_array()
                .ok_or_else(|| Error::Parse(format!("value at '{key}' must be an array")))?;
            if arr.len() != self.dim() {
                return Err(Error::Parse(format!(
                    "value at '{key}' has the wrong length"
                )));
            }
            let o = phi.offset(&tuple)?;
            if seen.insert(o, ()).is_some() {
                return Err(Error::Parse(format!("duplicate tuple '{key}'")));
            }
            for (j, x) in arr.iter().enumerate() {
                phi.values[o + j] = match x {
                    serde_json::Value::String(s) => parse_q(s)?,
                    serde_json::Value::Number(n) => parse_q(&n.to_string())?,
                    _ => return Err(Error::Parse(format!("bad scalar at '{key}'"))),
                };
            }
        }
        Ok(phi)
    }
}

/// Dense matrix of a linear map given on basis vectors.
pub fn matrix_of(ncols: usize, nrows: usize, f: impl Fn(&[Q]) -> Vec<Q>) -> QMatrix {
    let mut m = QMatrix::zeros(nrows, ncols);
    let mut e = vec![Q::zero(); ncols];
    for j in 0..ncols {
        e[j] = Q::one();
        for (i, x) in f(&e).into_iter().enumerate() {
            m[(i, j)] = x;
        }
        e[j] = Q::zero();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::module::NormParam;
    use crate::rational::{q, qf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn regular_z2() -> CochainComplex {
        CochainComplex::over_group(&BanachModule::regular(
            &FiniteGroup::cyclic(2),
            NormParam::two(),
        ))
    }

    #[test]
    fn degree_zero_coboundary_matches_definition() {
        let c = regular_z2();
        let x = c.cochain(0, vec![q(3), q(-1)]).unwrap();
        let dx = c.coboundary(&x).unwrap();
        assert_eq!(dx.value(&[0]).unwrap(), &[q(0), q(0)]);
        assert_eq!(dx.value(&[1]).unwrap(), &[q(4), q(-4)]);
        let m = c.coboundary_matrix(0).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (4, 2));
        assert_eq!(m.mul_vec(x.values()), dx.values().to_vec());
    }

    #[test]
    fn coboundary_squares_to_zero_on_z3() {
        let c = CochainComplex::over_group(&BanachModule::regular(
            &FiniteGroup::cyclic(3),
            NormParam::two(),
        ));
        for n in 0..=2 {
            let a = c.coboundary_matrix(n).unwrap();
            let b = c.coboundary_matrix(n + 1).unwrap();
            assert!(b.mul(&a).is_zero(), "degree {n}");
        }
    }

    #[test]
    fn trivial_coefficients_have_no_cohomology() {
        let z3 = FiniteGroup::cyclic(3);
        let c = CochainComplex::over_group(&BanachModule::trivial(&z3, 1, NormParam::two()));
        let h0 = c.cohomology(0, Mode::Exact, true).unwrap();
        assert_eq!((h0.dim_z, h0.dim_h), (1, 1));
        for n in 1..=3 {
            let h = c.cohomology(n, Mode::Exact, false).unwrap();
            assert_eq!(h.dim_h, 0, "degree {n}");
            assert_eq!(c.cohomology(n, Mode::Float, false).unwrap().dim_z, h.dim_z);
        }
        assert!(matches!(
            c.cohomology(4, Mode::Exact, false),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn multiaffine_evaluation() {
        let c = regular_z2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = c.random(1, &mut rng, 5, 3).unwrap();
        let g = c.module().group().clone();
        let half = GroupAlgebraElement::new(&g, [(0, qf(1, 2)), (1, qf(1, 2))]).unwrap();
        let v = c.multiaffine_eval(&phi, &[half]).unwrap();
        let expect: Vec<Q> = phi
            .value(&[0])
            .unwrap()
            .iter()
            .zip(phi.value(&[1]).unwrap())
            .map(|(a, b)| (a + b) * qf(1, 2))
            .collect();
        assert_eq!(v, expect);
        let not_affine = GroupAlgebraElement::new(&g, [(0, q(1)), (1, q(1))]).unwrap();
        assert!(c.multiaffine_eval(&phi, &[not_affine]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = regular_z2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = c.random(2, &mut rng, 4, 2).unwrap();
        assert_eq!(c.cochain_from_json(&phi.to_json()).unwrap(), phi);
    }

    #[test]
    fn flat_cap_enforced() {
        let c = CochainComplex::with_caps(
            &BanachModule::regular(&FiniteGroup::cyclic(4), NormParam::two()),
            &Subgroup::whole(&FiniteGroup::cyclic(4)),
            Caps {
                degree: 3,
                flat: 100,
            },
        );
        assert!(c.unwrap().flat_len(3).is_err());
    }
}
