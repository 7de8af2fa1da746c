//! Finite-dimensional isometric representations on ℓ^p spaces.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{same_group, uniform_average, GroupAlgebraElement};
use crate::error::{Error, Result};
use crate::group::{GroupRef, Subgroup};
use crate::linalg::float::{mat_vec, norm_p, sigma_max};
use crate::linalg::{exact, QMatrix};
use crate::rational::{fmt_q, parse_q, q, to_f64, vec_to_f64, Q};

/// The exponent `p` of an ℓ^p norm: a rational `p ≥ 1` or `∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormParam {
    Finite(Q),
    Infinity,
}

impl NormParam {
    pub fn two() -> Self {
        NormParam::Finite(q(2))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(NormParam::Infinity);
        }
        let p = parse_q(&t)?;
        if p < Q::one() {
            return Err(Error::InvalidArgument(format!(
                "norm exponent {s} is below 1"
            )));
        }
        Ok(NormParam::Finite(p))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            NormParam::Finite(p) => to_f64(p),
            NormParam::Infinity => f64::INFINITY,
        }
    }

    pub fn is_two(&self) -> bool {
        matches!(self, NormParam::Finite(p) if *p == q(2))
    }

    /// `1 < p < ∞`, where ℓ^p is uniformly convex.
    pub fn is_uniformly_convex(&self) -> bool {
        matches!(self, NormParam::Finite(p) if *p > Q::one())
    }
}

impl fmt::Display for NormParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormParam::Finite(p) => f.write_str(&fmt_q(p)),
            NormParam::Infinity => f.write_str("inf"),
        }
    }
}

/// Coordinates of a submodule: vectors `c` are measured as `‖E c‖_p` in the ambient space.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub basis: QMatrix,
    pub gram: QMatrix,
}

#[derive(Clone, Debug)]
pub struct BanachModule {
    group: GroupRef,
    dim: usize,
    matrices: Vec<QMatrix>,
    p: NormParam,
    embedding: Option<Embedding>,
}

impl BanachModule {
    /// Extends generator matrices to all of `G` by breadth-first products and
    /// checks the homomorphism and isometry conditions.
    ///
    /// `M(xs) = M(x)M(s)` for every element `x` and generator `s`, together with
    /// `M(e) = I`, implies the homomorphism property on all pairs by induction on
    /// word length.
    pub fn from_generator_matrices(
        group: &GroupRef,
        gens: &[(usize, QMatrix)],
        p: NormParam,
    ) -> Result<Self> {
        Self::build(group, gens, p, None)
    }

    fn build(
        group: &GroupRef,
        gens: &[(usize, QMatrix)],
        p: NormParam,
        embedding: Option<Embedding>,
    ) -> Result<Self> {
        let n = group.order();
        let dim = match gens.first() {
            Some((_, m)) => m.rows(),
            None => embedding.as_ref().map_or(0, |e| e.basis.cols()),
        };
        for (g, m) in gens {
            if *g >= n {
                return Err(Error::InvalidRepresentation(format!(
                    "element {g} out of range"
                )));
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "matrix for element {g} is not {dim}x{dim}"
                )));
            }
        }
        let mut mats: Vec<Option<QMatrix>> = vec![None; n];
        mats[group.identity()] = Some(QMatrix::identity(dim));
        let mut queue = VecDeque::from([group.identity()]);
        while let Some(x) = queue.pop_front() {
            for (s, ms) in gens {
                let y = group.mul(x, *s);
                let my = mats[x].as_ref().unwrap().mul(ms);
                match &mats[y] {
                    Some(existing) if *existing != my => {
                        return Err(Error::InvalidRepresentation(format!(
                            "matrices disagree with the group table at element {y}"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        mats[y] = Some(my);
                        queue.push_back(y);
                    }
                }
            }
        }
        if let Some(missing) = mats.iter().position(Option::is_none) {
            return Err(Error::InvalidRepresentation(format!(
                "given elements do not generate the group (element {missing} unreached)"
            )));
        }
        let matrices: Vec<QMatrix> = mats.into_iter().map(Option::unwrap).collect();
        let module = BanachModule {
            group: group.clone(),
            dim,
            matrices,
            p,
            embedding,
        };
        module.check_isometries()?;
        Ok(module)
    }

    fn check_isometries(&self) -> Result<()> {
        let gram = self.gram();
        for (g, m) in self.matrices.iter().enumerate() {
            let ok = if self.p.is_two() {
                m.transpose().mul(&gram).mul(m) == gram
            } else if self.embedding.is_some() {
                true
            } else {
                m.is_signed_permutation()
            };
            if !ok {
                return Err(Error::NotIsometric {
                    element: g,
                    p: self.p.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Matrices given for every element.
    pub fn from_element_matrices(
        group: &GroupRef,
        matrices: Vec<QMatrix>,
        p: NormParam,
    ) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation(
                "one matrix per element required".into(),
            ));
        }
        let gens: Vec<(usize, QMatrix)> = matrices.iter().cloned().enumerate().collect();
        let m = Self::build(group, &gens, p, None)?;
        if m.matrices != matrices {
            return Err(Error::InvalidRepresentation(
                "matrices are not a homomorphism".into(),
            ));
        }
        Ok(m)
    }

    /// Left translation `e_h ↦ e_{gh}` on `ℝ^G`.
    pub fn regular(group: &GroupRef, p: NormParam) -> Self {
        let n = group.order();
        let matrices = group
            .elements()
            .map(|g| {
                let mut m = QMatrix::zeros(n, n);
                for h in 0..n {
                    m[(group.mul(g, h), h)] = Q::one();
                }
                m
            })
            .collect();
        BanachModule {
            group: group.clone(),
            dim: n,
            matrices,
            p,
            embedding: None,
        }
    }

    pub fn trivial(group: &GroupRef, dim: usize, p: NormParam) -> Self {
        BanachModule {
            group: group.clone(),
            dim,
            matrices: vec![QMatrix::identity(dim); group.order()],
            p,
            embedding: None,
        }
    }

    /// Permutation matrices `e_i ↦ e_{σ(i)}`, one image sequence per listed element.
    pub fn from_permutation_action(
        group: &GroupRef,
        action: &[(usize, Vec<usize>)],
        p: NormParam,
    ) -> Result<Self> {
        let gens = action
            .iter()
            .map(|(g, sigma)| Ok((*g, permutation_matrix(sigma)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::build(group, &gens, p, None)
    }

    /// Invariant subspace spanned by the columns of `basis` (in this module's
    /// coordinates), with the inherited norm.
    pub fn submodule(&self, basis: &[Vec<Q>]) -> Result<Self> {
        let k = basis.len();
        if k == 0 {
            return Err(Error::InvalidRepresentation("empty submodule basis".into()));
        }
        if basis.iter().any(|v| v.len() != self.dim) {
            return Err(Error::InvalidRepresentation(
                "basis vectors have the wrong length".into(),
            ));
        }
        if exact::rank_of_vectors(basis, self.dim) != k {
            return Err(Error::InvalidRepresentation(
                "submodule basis is linearly dependent".into(),
            ));
        }
        let b = QMatrix::from_columns(basis, self.dim);
        let mut gens = Vec::new();
        let gen_list: Vec<usize> = if self.group.generators().is_empty() {
            vec![self.group.identity()]
        } else {
            self.group.generators().to_vec()
        };
        for &s in &gen_list {
            let image = self.matrices[s].mul(&b);
            let mut a = QMatrix::zeros(k, k);
            for j in 0..k {
                let (x, _) = exact::solve(&b, &image.column(j)).ok_or_else(|| {
                    Error::InvalidRepresentation(format!(
                        "subspace is not invariant under element {s}"
                    ))
                })?;
                for i in 0..k {
                    a[(i, j)] = x[i].clone();
                }
            }
            gens.push((s, a));
        }
        let ambient = match &self.embedding {
            Some(e) => e.basis.mul(&b),
            None => b,
        };
        let gram = ambient.transpose().mul(&ambient);
        Self::build(
            &self.group,
            &gens,
            self.p.clone(),
            Some(Embedding {
                basis: ambient,
                gram,
            }),
        )
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> &NormParam {
        &self.p
    }

    pub fn with_p(&self, p: NormParam) -> Result<Self> {
        let m = BanachModule { p, ..self.clone() };
        m.check_isometries()?;
        Ok(m)
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn matrix(&self, g: usize) -> &QMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[QMatrix] {
        &self.matrices
    }

    /// `EᵀE`, or the identity without an embedding.
    pub fn gram(&self) -> QMatrix {
        match &self.embedding {
            Some(e) => e.gram.clone(),
            None => QMatrix::identity(self.dim),
        }
    }

    pub fn act(&self, g: usize, v: &[Q]) -> Vec<Q> {
        self.matrices[g].mul_vec(v)
    }

    pub fn apply_algebra(&self, xi: &GroupAlgebraElement) -> Result<QMatrix> {
        if !same_group(&self.group, xi.group()) {
            return Err(Error::GroupMismatch);
        }
        let mut out = QMatrix::zeros(self.dim, self.dim);
        for (g, t) in xi.terms() {
            out.add_scaled_assign(&self.matrices[g], t);
        }
        Ok(out)
    }

    /// Ambient coordinates of a vector (identity without an embedding).
    pub fn ambient_f64(&self, v: &[f64]) -> Vec<f64> {
        match &self.embedding {
            Some(e) => mat_vec(&e.basis.to_f64(), v),
            None => v.to_vec(),
        }
    }

    pub fn norm_f64(&self, v: &[f64]) -> f64 {
        norm_p(&self.ambient_f64(v), self.p.to_f64())
    }

    pub fn norm(&self, v: &[Q]) -> f64 {
        self.norm_f64(&vec_to_f64(v))
    }

    /// Exact `‖v‖²` for `p = 2`.
    pub fn norm_sq_exact(&self, v: &[Q]) -> Option<Q> {
        if !self.p.is_two() {
            return None;
        }
        let g = self.gram();
        Some(crate::rational::dot(v, &g.mul_vec(v)))
    }

    /// `X^H`: common kernel of `I − π(h)` over generators of `H`.
    pub fn invariants(&self, h: &Subgroup) -> Vec<Vec<Q>> {
        let gens = h.generators();
        if gens.is_empty() {
            return QMatrix::identity(self.dim).row_vecs();
        }
        let mut rows = Vec::with_capacity(gens.len() * self.dim);
        let id = QMatrix::identity(self.dim);
        for &g in gens {
            rows.extend(id.sub(&self.matrices[g]).row_vecs());
        }
        exact::kernel(&QMatrix::from_rows(rows))
    }

    pub fn invariants_and_decomposition(&self, h: &Subgroup) -> Result<Decomposition> {
        let invariant_basis = self.invariants(h);
        let projector = self.apply_algebra(&uniform_average(h.group(), h.elements())?)?;
        let complement_basis = exact::kernel(&projector);
        let d = self.dim;
        if projector.mul(&projector) != projector {
            return Err(Error::Invariant(
                "averaging operator is not idempotent".into(),
            ));
        }
        if !exact::same_span(&exact::column_space(&projector), &invariant_basis, d) {
            return Err(Error::Invariant(
                "averaging image differs from the invariant vectors".into(),
            ));
        }
        if invariant_basis.len() + complement_basis.len() != d {
            return Err(Error::Invariant(
                "invariant vectors and complement do not span".into(),
            ));
        }
        let mut joint = invariant_basis.clone();
        joint.extend(complement_basis.iter().cloned());
        if exact::rank_of_vectors(&joint, d) != d {
            return Err(Error::Invariant(
                "sum of invariant vectors and complement is not direct".into(),
            ));
        }
        let invariant_under = |elems: &[usize], basis: &[Vec<Q>]| {
            elems
                .iter()
                .all(|&g| basis.iter().all(|v| exact::in_span(basis, &self.act(g, v))))
        };
        if !invariant_under(h.elements(), &invariant_basis)
            || !invariant_under(h.elements(), &complement_basis)
        {
            return Err(Error::Invariant("summands are not invariant".into()));
        }
        let all: Vec<usize> = self.group.elements().collect();
        let g_invariant = if h.is_normal() {
            let ok =
                invariant_under(&all, &invariant_basis) && invariant_under(&all, &complement_basis);
            if !ok {
                return Err(Error::Invariant(
                    "summands for a normal subgroup are not G-invariant".into(),
                ));
            }
            Some(true)
        } else {
            Some(
                invariant_under(&all, &invariant_basis) && invariant_under(&all, &complement_basis),
            )
        };
        Ok(Decomposition {
            invariant_basis,
            complement_basis,
            projector,
            g_invariant,
        })
    }

    /// Bounds on `‖A‖_{p→p}` for a matrix acting on this module, inherited norm included.
    pub fn operator_norm_of(&self, a: &QMatrix, seed: u64) -> NormBounds {
        let af = a.to_f64();
        match &self.embedding {
            None => operator_norm(&af, self.p.to_f64(), seed),
            Some(e) => {
                let gram = e.gram.to_f64();
                if self.p.is_two() {
                    let chol = gram
                        .clone()
                        .cholesky()
                        .expect("gram matrix of an injective basis");
                    let lt = chol.l().transpose();
                    let lt_inv = lt
                        .clone()
                        .try_inverse()
                        .expect("triangular factor invertible");
                    let s = sigma_max(&(&lt * &af * lt_inv));
                    return NormBounds {
                        lower: s,
                        upper: s,
                        exact: true,
                    };
                }
                let ef = e.basis.to_f64();
                let pinv = gram.try_inverse().expect("gram invertible") * ef.transpose();
                let ambient = &ef * &af * pinv;
                let upper = operator_norm(&ambient, self.p.to_f64(), seed).upper;
                let lower = subspace_ratio_search(&ef, &af, self.p.to_f64(), seed).min(upper);
                NormBounds {
                    lower,
                    upper,
                    exact: false,
                }
            }
        }
    }

    /// Exact test of `‖A‖_2 ≤ b` via positive semidefiniteness of `b²G − AᵀGA`.
    pub fn certify_p2_bound(&self, a: &QMatrix, b: &Q) -> Option<bool> {
        if !self.p.is_two() {
            return None;
        }
        let g = self.gram();
        let m = g.scale(&(b * b)).sub(&a.transpose().mul(&g).mul(a));
        Some(exact::is_positive_semidefinite(&m))
    }

    pub fn almost_invariant_check(&self, h: &Subgroup, seed: u64) -> Result<AlmostInvariantReport> {
        let invariant_dim = self.invariants(h).len();
        let strict_convexity_warning = !self.p.is_uniformly_convex();
        if invariant_dim > 0 {
            return Ok(AlmostInvariantReport {
                has_invariant_unit: true,
                invariant_dim,
                gap_witness: None,
                norm_bound: None,
                probe_bound: None,
                invertible_exact: false,
                conditions_agree: true,
                strict_convexity_warning,
            });
        }
        let xi = uniform_average(h.group(), h.elements())?;
        let pxi = self.apply_algebra(&xi)?;
        let bound = self.operator_norm_of(&pxi, seed);
        let invertible_exact = exact::rank(&QMatrix::identity(self.dim).sub(&pxi)) == self.dim;
        let k = h.order() as i64;
        let total = k * (k + 1) / 2;
        let probe = GroupAlgebraElement::new(
            h.group(),
            h.elements()
                .iter()
                .enumerate()
                .map(|(i, &g)| (g, Q::new((i as i64 + 1).into(), total.into()))),
        )?;
        let probe_bound = self
            .operator_norm_of(&self.apply_algebra(&probe)?, seed)
            .upper;
        let conditions_agree = invertible_exact
            && bound.upper < 1.0
            && (strict_convexity_warning || probe_bound < 1.0);
        Ok(AlmostInvariantReport {
            has_invariant_unit: false,
            invariant_dim,
            gap_witness: Some(xi),
            norm_bound: Some(bound.upper),
            probe_bound: Some(probe_bound),
            invertible_exact,
            conditions_agree,
            strict_convexity_warning,
        })
    }

    /// `X / X^H` with the induced action; requires `X^H` to be `G`-invariant.
    pub fn quotient_module(&self, h: &Subgroup) -> Result<QuotientModule> {
        let subspace = self.invariants(h);
        for g in self.group.elements() {
            if subspace
                .iter()
                .any(|v| !exact::in_span(&subspace, &self.act(g, v)))
            {
                return Err(Error::InvalidArgument(
                    "invariant subspace is not G-invariant".into(),
                ));
            }
        }
        let d = self.dim;
        let complement = if self.p.is_two() {
            let g = self.gram();
            let rows: Vec<Vec<Q>> = subspace.iter().map(|z| g.mul_vec(z)).collect();
            if rows.is_empty() {
                QMatrix::identity(d).row_vecs()
            } else {
                exact::kernel(&QMatrix::from_rows(rows))
            }
        } else {
            let dec = self.invariants_and_decomposition(h)?;
            dec.complement_basis
        };
        let k = complement.len();
        let mut full = complement.clone();
        full.extend(subspace.iter().cloned());
        let basis = QMatrix::from_columns(&full, d);
        let inv = exact::inverse(&basis)
            .ok_or_else(|| Error::Invariant("quotient basis is singular".into()))?;
        let matrices = self
            .group
            .elements()
            .map(|g| {
                let coords = inv
                    .mul(&self.matrices[g])
                    .mul(&QMatrix::from_columns(&complement, d));
                let mut m = QMatrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..k {
                        m[(i, j)] = coords[(i, j)].clone();
                    }
                }
                m
            })
            .collect::<Vec<_>>();
        for a in self.group.elements() {
            for b in self.group.elements() {
                if matrices[a].mul(&matrices[b]) != matrices[self.group.mul(a, b)] {
                    return Err(Error::Invariant(
                        "quotient action is not a homomorphism".into(),
                    ));
                }
            }
        }
        Ok(QuotientModule {
            base: self.clone(),
            subspace,
            complement,
            lift_inverse: inv,
            matrices,
        })
    }
}

pub fn permutation_matrix(sigma: &[usize]) -> Result<QMatrix> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    let mut m = QMatrix::zeros(n, n);
    for (i, &s) in sigma.iter().enumerate() {
        if s >= n || seen[s] {
            return Err(Error::InvalidRepresentation(
                "action is not a permutation".into(),
            ));
        }
        seen[s] = true;
        m[(s, i)] = Q::one();
    }
    Ok(m)
}

/// Signed permutation with `π e_j = sign(s_j) e_{|s_j|−1}`.
pub fn signed_permutation_matrix(images: &[i64]) -> Result<QMatrix> {
    let n = images.len();
    let mut m = QMatrix::zeros(n, n);
    let mut seen = vec![false; n];
    for (j, &s) in images.iter().enumerate() {
        let t = s.unsigned_abs() as usize;
        if s == 0 || t > n || seen[t - 1] {
            return Err(Error::InvalidRepresentation(
                "not a signed permutation".into(),
            ));
        }
        seen[t - 1] = true;
        m[(t - 1, j)] = if s > 0 { Q::one() } else { -Q::one() };
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub invariant_basis: Vec<Vec<Q>>,
    pub complement_basis: Vec<Vec<Q>>,
    pub projector: QMatrix,
    /// Whether both summands are invariant under all of `G`.
    pub g_invariant: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl NormBounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug)]
pub struct AlmostInvariantReport {
    pub has_invariant_unit: bool,
    pub invariant_dim: usize,
    pub gap_witness: Option<GroupAlgebraElement>,
    pub norm_bound: Option<f64>,
    /// Norm bound for a non-uniform full-support element of the simplex.
    pub probe_bound: Option<f64>,
    pub invertible_exact: bool,
    /// Invertibility, the norm bound and the full-support probe all agree.
    pub conditions_agree: bool,
    pub strict_convexity_warning: bool,
}

fn max_col_sum(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_row_sum(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn dual_map(y: &[f64], p: f64) -> Vec<f64> {
    let n = norm_p(y, p);
    if n == 0.0 {
        return vec![0.0; y.len()];
    }
    y.iter()
        .map(|v| v.signum() * (v.abs() / n).powf(p - 1.0))
        .collect()
}

/// Bounds on `‖A‖_{p→p}`: exact for `p ∈ {1, 2, ∞}`; otherwise a lower bound
/// from Boyd's power iteration over several starts and an upper bound from
/// Riesz–Thorin interpolation and norm equivalence.
pub fn operator_norm(a: &DMatrix<f64>, p: f64, seed: u64) -> NormBounds {
    if a.nrows() == 0 || a.ncols() == 0 {
        return NormBounds {
            lower: 0.0,
            upper: 0.0,
            exact: true,
        };
    }
    assert!(a.iter().all(|x| x.is_finite()), "non-finite matrix entry");
    let n1 = max_col_sum(a);
    let ninf = max_row_sum(a);
    if p == 1.0 {
        return NormBounds {
            lower: n1,
            upper: n1,
            exact: true,
        };
    }
    if p.is_infinite() {
        return NormBounds {
            lower: ninf,
            upper: ninf,
            exact: true,
        };
    }
    let n2 = sigma_max(a);
    if p == 2.0 {
        return NormBounds {
            lower: n2,
            upper: n2,
            exact: true,
        };
    }
    let d = a.ncols().max(a.nrows()) as f64;
    let inv_p = 1.0 / p;
    let mut upper = n1.powf(inv_p) * ninf.powf(1.0 - inv_p);
    if p < 2.0 {
        let theta = 2.0 - 2.0 * inv_p;
        upper = upper.min(n1.powf(1.0 - theta) * n2.powf(theta));
    } else {
        let theta = 2.0 * inv_p;
        upper = upper.min(n2.powf(theta) * ninf.powf(1.0 - theta));
    }
    upper = upper.min(d.powf((0.5 - inv_p).abs()) * n2);
    let lower = boyd_lower_bound(a, p, seed).min(upper);
    NormBounds {
        lower,
        upper,
        exact: false,
    }
}

fn boyd_lower_bound(a: &DMatrix<f64>, p: f64, seed: u64) -> f64 {
    let n = a.ncols();
    let q = p / (p - 1.0);
    let at = a.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    starts.push(vec![1.0; n]);
    for _ in 0..8 {
        starts.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let mut best: f64 = 0.0;
    for mut x in starts {
        let nx = norm_p(&x, p);
        if nx == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        for _ in 0..200 {
            let y = mat_vec(a, &x);
            let val = norm_p(&y, p);
            best = best.max(val);
            if val == 0.0 {
                break;
            }
            let z = mat_vec(&at, &dual_map(&y, p));
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if norm_p(&z, q) <= zx * (1.0 + 1e-14) {
                break;
            }
            x = dual_map(&z, q);
        }
    }
    best
}

/// Best ratio `‖E A c‖ / ‖E c‖` found by random search with local refinement.
fn subspace_ratio_search(e: &DMatrix<f64>, a: &DMatrix<f64>, p: f64, seed: u64) -> f64 {
    let k = a.ncols();
    let ea = e * a;
    let ratio = |c: &[f64]| {
        let den = norm_p(&mat_vec(e, c), p);
        if den == 0.0 {
            0.0
        } else {
            norm_p(&mat_vec(&ea, c), p) / den
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for start in 0..(k + 16) {
        let mut c: Vec<f64> = if start < k {
            (0..k).map(|i| if i == start { 1.0 } else { 0.0 }).collect()
        } else {
            (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let mut val = ratio(&c);
        let mut step = 0.5;
        while step > 1e-9 {
            let mut improved = false;
            for i in 0..k {
                for s in [step, -step] {
                    let mut t = c.clone();
                    t[i] += s;
                    let v = ratio(&t);
                    if v > val {
                        val = v;
                        c = t;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(val);
    }
    best
}

#[derive(Clone, Debug)]
pub struct QuotientModule {
    pub base: BanachModule,
    /// Basis of the subspace quotiented out.
    pub subspace: Vec<Vec<Q>>,
    /// Representatives of the quotient coordinates.
    pub complement: Vec<Vec<Q>>,
    lift_inverse: QMatrix,
    pub matrices: Vec<QMatrix>,
}

impl QuotientModule {
    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    /// Quotient coordinates of `x` with respect to the complement basis.
    pub fn project(&self, x: &[Q]) -> Vec<Q> {
        let c = self.lift_inverse.mul_vec(x);
        c[..self.dim()].to_vec()
    }

    pub fn lift(&self, c: &[Q]) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.base.dim()];
        for (ci, w) in c.iter().zip(&self.complement) {
            crate::rational::add_assign_scaled(&mut v, w, ci);
        }
        v
    }

    /// Exact squared quotient norm `inf_z ‖x + z‖²` for `p = 2`.
    pub fn norm_sq_exact(&self, x: &[Q]) -> Option<Q> {
        if !self.base.p().is_two() {
            return None;
        }
        let g = self.base.gram();
        let gx = g.mul_vec(x);
        let xx = crate::rational::dot(x, &gx);
        if self.subspace.is_empty() {
            return Some(xx);
        }
        let k = self.subspace.len();
        let gz: Vec<Vec<Q>> = self.subspace.iter().map(|z| g.mul_vec(z)).collect();
        let mut m = QMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = crate::rational::dot(&self.subspace[i], &gz[j]);
            }
        }
        let rhs: Vec<Q> = self
            .subspace
            .iter()
            .map(|z| crate::rational::dot(z, &gx))
            .collect();
        let (a, _) = exact::solve(&m, &rhs)?;
        Some(xx - crate::rational::dot(&rhs, &a))
    }

    /// `inf_{z ∈ subspace} ‖x + z‖`: exact for `p = 2`, otherwise the best value found
    /// by subgradient descent followed by coordinate golden-section refinement.
    pub fn norm(&self, x: &[Q]) -> f64 {
        if let Some(s) = self.norm_sq_exact(x) {
            return to_f64(&s).max(0.0).sqrt();
        }
        self.norm_numeric(&vec_to_f64(x))
    }

    pub fn norm_numeric(&self, x: &[f64]) -> f64 {
        let k = self.subspace.len();
        let f = |a: &[f64]| {
            let mut v = x.to_vec();
            for (ai, z) in a.iter().zip(&self.subspace) {
                for (vi, zi) in v.iter_mut().zip(z) {
                    *vi += ai * to_f64(zi);
                }
            }
            self.base.norm_f64(&v)
        };
        let base = f(&vec![0.0; k]);
        if k == 0 || base == 0.0 {
            return base;
        }
        minimize_convex(&f, k, base, 10_000, 1e-8)
    }

    pub fn apply(&self, g: usize, c: &[Q]) -> Vec<Q> {
        self.matrices[g].mul_vec(c)
    }
}

/// Minimizes a convex function on `ℝ^k` starting from 0; returns the best value seen.
pub fn minimize_convex(
    f: &dyn Fn(&[f64]) -> f64,
    k: usize,
    scale: f64,
    iters: usize,
    tol: f64,
) -> f64 {
    let mut a = vec![0.0; k];
    let mut best_a = a.clone();
    let mut best = f(&a);
    let h = 1e-7 * scale.max(1e-12);
    for t in 1..=iters.min(2000) {
        let fa = f(&a);
        let grad: Vec<f64> = (0..k)
            .map(|i| {
                let mut b = a.clone();
                b[i] += h;
                (f(&b) - fa) / h
            })
            .collect();
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gn < 1e-14 {
            break;
        }
        let step = scale / (t as f64).sqrt();
        for i in 0..k {
            a[i] -= step * grad[i] / gn;
        }
        let v = f(&a);
        if v < best {
            best = v;
            best_a = a.clone();
        }
    }
    let mut a = best_a;
    let mut radius = scale;
    for _ in 0..200 {
        let before = best;
        for i in 0..k {
            let line = |s: f64| {
                let mut b = a.clone();
                b[i] = s;
                f(&b)
            };
            let (s, v) = golden_section(&line, a[i] - radius, a[i] + radius, tol * 1e-3);
            if v < best {
                best = v;
                a[i] = s;
            }
        }
        if before - best < tol * 1e-3 {
            radius *= 0.5;
            if radius < tol * 1e-3 {
                break;
            }
        }
    }
    best
}

pub fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (hi - lo).abs() < tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Exact,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub p: NormParam,
    pub epsilon: f64,
    /// Exact `δ(ε)` for `p = 2`; otherwise the smallest `1 − ‖(x+y)/2‖` over the
    /// sampled feasible pairs, which bounds `δ(ε)` from above.
    pub delta_estimate: f64,
    pub method: EstimateMethod,
    /// Sampled witness for the sup-form modulus: `ω(omega_t) ≥ omega_lower`.
    pub omega_t: f64,
    pub omega_lower: f64,
}

fn unit(v: &[f64], p: f64) -> Vec<f64> {
    let n = norm_p(v, p);
    v.iter().map(|x| x / n).collect()
}

/// Pair family `x(s), y(s)` of unit vectors; the parameter is tuned so that
/// `‖x − y‖ = ε` by bisection (the distance grows with `s` on `[0, 1]`).
fn family_value(
    p: f64,
    eps: f64,
    family: &dyn Fn(f64) -> (Vec<f64>, Vec<f64>),
) -> Option<(f64, f64)> {
    let dist = |s: f64| {
        let (x, y) = family(s);
        let (x, y) = (unit(&x, p), unit(&y, p));
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        norm_p(&diff, p)
    };
    if dist(1.0) < eps - 1e-15 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) >= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (x, y) = family(hi);
    let (x, y) = (unit(&x, p), unit(&y, p));
    let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
    Some((1.0 - norm_p(&mid, p), dist(hi)))
}

pub fn convexity_modulus(
    p: &NormParam,
    epsilon: f64,
    dim: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if !(0.0..=2.0).contains(&epsilon) || epsilon.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside [0, 2]"
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "convexity modulus needs dim >= 2".into(),
        ));
    }
    if p.is_two() {
        let delta = 1.0 - (1.0 - epsilon * epsilon / 4.0).max(0.0).sqrt();
        return Ok(ConvexityReport {
            p: p.clone(),
            epsilon,
            delta_estimate: delta,
            method: EstimateMethod::Exact,
            omega_t: 2.0 * (1.0 - delta),
            omega_lower: epsilon,
        });
    }
    let pf = p.to_f64();
    let pad = |v: [f64; 2]| {
        let mut w = vec![0.0; dim];
        w[0] = v[0];
        w[1] = v[1];
        w
    };
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |cand: Option<(f64, f64)>| {
        if let Some((v, d)) = cand {
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, d));
            }
        }
    };
    consider(family_value(pf, epsilon, &|s| {
        (pad([1.0, s]), pad([1.0, -s]))
    }));
    consider(family_value(pf, epsilon, &|s| {
        (pad([1.0, 1.0 - s]), pad([1.0 - s, 1.0]))
    }));
    consider(family_value(pf, epsilon, &|s| {
        (pad([1.0 + s, 1.0 - s]), pad([1.0 - s, 1.0 + s]))
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        consider(family_value(pf, epsilon, &|s| {
            let x = u.iter().zip(&w).map(|(a, b)| a + s * b).collect();
            let y = u.iter().zip(&w).map(|(a, b)| a - s * b).collect();
            (x, y)
        }));
    }
    let (delta, dist) = best.unwrap_or((1.0, 2.0));
    Ok(ConvexityReport {
        p: p.clone(),
        epsilon,
        delta_estimate: delta.clamp(0.0, 1.0),
        method: EstimateMethod::Sampled,
        omega_t: 2.0 * (1.0 - delta),
        omega_lower: dist,
    })
}

/// Estimates over a sweep of `ε`, made monotone by taking suffix minima; a pair
/// feasible for a larger `ε` is feasible for every smaller one.
pub fn convexity_sweep(
    p: &NormParam,
    eps: &[f64],
    dim: usize,
    seed: u64,
) -> Result<Vec<ConvexityReport>> {
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap());
    let mut reports: Vec<ConvexityReport> = eps
        .iter()
        .map(|&e| convexity_modulus(p, e, dim, seed))
        .collect::<Result<_>>()?;
    let mut running = f64::INFINITY;
    for &i in order.iter().rev() {
        running = running.min(reports[i].delta_estimate);
        reports[i].delta_estimate = running;
    }
    Ok(reports)
}

/// Small random rational vector with entries `k/den`, `|k| ≤ range`.
pub fn random_vector(rng: &mut impl Rng, dim: usize, range: i64, den: i64) -> Vec<Q> {
    (0..dim)
        .map(|_| Q::new(rng.gen_range(-range..=range).into(), den.into()))
        .collect()
}

pub fn is_nonzero(v: &[Q]) -> bool {
    v.iter().any(|x| !x.is_zero())
}

pub fn abs_max(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}
