//! Explicit chain homotopies built from averaging elements of the group algebra.

use nalgebra::DMatrix;
use num::{One, Zero};
use rand::Rng;

use crate::algebra::{same_group, uniform_average, GroupAlgebraElement};
use crate::cochain::{Cochain, CochainComplex, TupleIter};
use crate::error::{Error, Result};
use crate::group::{f_conjugacy_classes, Subgroup};
use crate::linalg::{exact, QMatrix, SparseMatrix};
use crate::module::{operator_norm, BanachModule};
use crate::rational::{add_assign_scaled, Q};

/// `R_ξ(φ) = Σ t_i φ(g_i)` for a degree-1 cochain and `ξ = Σ t_i g_i` in the simplex.
pub fn r_xi(cx: &CochainComplex, phi: &Cochain, xi: &GroupAlgebraElement) -> Result<Vec<Q>> {
    xi.require_simplex()?;
    if phi.degree() != 1 {
        return Err(Error::InvalidArgument(
            "R_xi takes a degree-1 cochain".into(),
        ));
    }
    cx.linear_eval(phi, std::slice::from_ref(xi))
}

pub fn one_minus(module: &BanachModule, xi: &GroupAlgebraElement) -> Result<QMatrix> {
    Ok(QMatrix::identity(module.dim()).sub(&module.apply_algebra(xi)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InverseMethod {
    Direct,
    Neumann { k_max: usize, tol: f64 },
}

#[derive(Clone, Debug)]
pub struct OneMinusInverse {
    /// Exact inverse (direct method).
    pub exact: Option<QMatrix>,
    /// Floating-point inverse or Neumann partial sum.
    pub approx: DMatrix<f64>,
    pub terms: usize,
    /// `‖π(ξ)‖^{k+1} / (1 − ‖π(ξ)‖)`; zero for the direct method.
    pub residual_bound: f64,
    /// Upper bounds on `‖π(ξ)^{k+1}‖ = ‖I − (I − π(ξ))S_k‖` for each partial sum `S_k`.
    pub residuals: Vec<f64>,
    pub norm_bound: Option<f64>,
}

/// `(I − π(ξ))⁻¹` either exactly or as a certified Neumann partial sum.
pub fn invert_one_minus(
    module: &BanachModule,
    xi: &GroupAlgebraElement,
    method: InverseMethod,
    seed: u64,
) -> Result<OneMinusInverse> {
    let a = module.apply_algebra(xi)?;
    match method {
        InverseMethod::Direct => {
            let t = QMatrix::identity(module.dim()).sub(&a);
            let inv = exact::inverse(&t)
                .ok_or_else(|| Error::Singular("I - pi(xi) is not invertible".into()))?;
            Ok(OneMinusInverse {
                approx: inv.to_f64(),
                exact: Some(inv),
                terms: 0,
                residual_bound: 0.0,
                residuals: Vec::new(),
                norm_bound: None,
            })
        }
        InverseMethod::Neumann { k_max, tol } => {
            let b = module.operator_norm_of(&a, seed).upper;
            if !(b < 1.0) {
                return Err(Error::NormNotContracting { bound: b });
            }
            let af = a.to_f64();
            let d = module.dim();
            let mut sum = DMatrix::<f64>::identity(d, d);
            let mut power = DMatrix::<f64>::identity(d, d);
            let mut residuals = Vec::new();
            let mut k = 0;
            let bound = |k: usize| b.powi(k as i32 + 1) / (1.0 - b);
            while bound(k) >= tol && k < k_max {
                power = &power * &af;
                sum += &power;
                k += 1;
                let next = &power * &af;
                residuals.push(module_norm_f64(module, &next, seed));
            }
            let residual_bound = bound(k);
            if residual_bound >= tol {
                return Err(Error::BudgetExhausted {
                    steps: k,
                    best_bound: residual_bound,
                });
            }
            Ok(OneMinusInverse {
                exact: None,
                approx: sum,
                terms: k,
                residual_bound,
                residuals,
                norm_bound: Some(b),
            })
        }
    }
}

fn module_norm_f64(module: &BanachModule, m: &DMatrix<f64>, seed: u64) -> f64 {
    match module.embedding() {
        None => operator_norm(m, module.p().to_f64(), seed).upper,
        Some(e) => {
            let ef = e.basis.to_f64();
            let pinv = e.gram.to_f64().try_inverse().expect("gram invertible") * ef.transpose();
            operator_norm(&(&ef * m * pinv), module.p().to_f64(), seed).upper
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplittingReport {
    pub degree: usize,
    pub projector: QMatrix,
    pub dim_c: usize,
    pub dim_b: usize,
    pub dim_ker_r: usize,
    pub idempotent: bool,
    pub image_is_b: bool,
    pub kernel_is_ker_r: bool,
    /// `"0"` when `P² − P` vanishes exactly.
    pub idempotency_residual: String,
}

impl SplittingReport {
    pub fn passed(&self) -> bool {
        self.idempotent
            && self.image_is_b
            && self.kernel_is_ker_r
            && self.dim_c == self.dim_b + self.dim_ker_r
    }
}

/// Matrix of `R_ξ: C¹ → X`.
fn r_xi_matrix(cx: &CochainComplex, xi: &GroupAlgebraElement) -> QMatrix {
    let d = cx.dim();
    let elems = cx.subgroup().elements();
    let mut m = QMatrix::zeros(d, elems.len() * d);
    for (g, t) in xi.terms() {
        let pos = elems.binary_search(&g).expect("support inside the domain");
        for r in 0..d {
            m[(r, pos * d + r)] = t.clone();
        }
    }
    m
}

/// `P = ∂¹ ∘ (I − π(ξ))⁻¹ ∘ R_ξ` on `C¹(G, X)`.
pub fn nowak_projection(
    module: &BanachModule,
    xi: &GroupAlgebraElement,
) -> Result<SplittingReport> {
    xi.require_simplex()?;
    let cx = CochainComplex::over_group(module);
    let t_inv = exact::inverse(&one_minus(module, xi)?)
        .ok_or_else(|| Error::Singular("I - pi(xi) is not invertible".into()))?;
    let d0 = cx.coboundary_matrix(0)?;
    let r = r_xi_matrix(&cx, xi);
    let p = d0.mul(&SparseMatrix::from_dense(&t_inv.mul(&r)));
    let dim_c = cx.flat_len(1)?;
    let p2 = p.mul(&p);
    let diff = p2.sub(&p);
    let idempotent = diff.is_zero();
    let pd = p.to_dense();
    let image = exact::column_space(&pd);
    let b1 = exact::column_space(&d0.to_dense());
    let image_is_b = exact::same_span(&image, &b1, dim_c);
    let ker_r = exact::kernel(&r);
    let ker_p = exact::kernel(&pd);
    let kernel_is_ker_r = exact::same_span(&ker_p, &ker_r, dim_c);
    let residual = if idempotent {
        "0".to_string()
    } else {
        crate::rational::fmt_q(
            diff.rows()
                .flat_map(|row| row.iter().map(|(_, x)| x.clone()))
                .max()
                .as_ref()
                .unwrap(),
        )
    };
    Ok(SplittingReport {
        degree: 1,
        projector: pd,
        dim_c,
        dim_b: b1.len(),
        dim_ker_r: ker_r.len(),
        idempotent,
        image_is_b,
        kernel_is_ker_r,
        idempotency_residual: residual,
    })
}

fn require_commutes(xi: &GroupAlgebraElement, f: &Subgroup) -> Result<()> {
    if let Some(&g) = f.elements().iter().find(|&&g| !xi.commutes_with(g)) {
        return Err(Error::NotInSet(format!(
            "xi does not commute with element {g}"
        )));
    }
    Ok(())
}

/// `(R^{m}φ)(f_1..f_{m−1}) = Σ_{i=1}^{m} (−1)^{i+1} φ̂(f_1..f_{i−1}, ξ, f_i..f_{m−1})`.
///
/// `g_cx` is the complex over `G` holding `φ`; the result lives in `f_cx`.
/// Degree-0 inputs map to the zero object, returned as `None`.
pub fn homotopy_r(
    g_cx: &CochainComplex,
    f_cx: &CochainComplex,
    phi: &Cochain,
    xi: &GroupAlgebraElement,
) -> Result<Option<Cochain>> {
    xi.require_simplex()?;
    require_commutes(xi, f_cx.subgroup())?;
    if !same_group(g_cx.module().group(), f_cx.module().group()) {
        return Err(Error::GroupMismatch);
    }
    let m = phi.degree();
    if m == 0 {
        return Ok(None);
    }
    let group = g_cx.module().group().clone();
    let out = f_cx.from_fn(m - 1, |t| {
        let mut acc = vec![Q::zero(); g_cx.dim()];
        for i in 1..=m {
            let mut args: Vec<GroupAlgebraElement> = t[..i - 1]
                .iter()
                .map(|&f| GroupAlgebraElement::dirac(&group, f))
                .collect();
            args.push(xi.clone());
            args.extend(
                t[i - 1..]
                    .iter()
                    .map(|&f| GroupAlgebraElement::dirac(&group, f)),
            );
            let v = g_cx
                .multiaffine_eval(phi, &args)
                .expect("arguments in the affine space");
            let s = if i % 2 == 1 { Q::one() } else { -Q::one() };
            add_assign_scaled(&mut acc, &v, &s);
        }
        acc
    })?;
    Ok(Some(out))
}

/// Sparse matrix of `post ∘ R^m: C^m(G) → C^{m−1}(F)`, with `post` applied pointwise.
pub fn homotopy_matrix(
    g_cx: &CochainComplex,
    f_cx: &CochainComplex,
    xi: &GroupAlgebraElement,
    m: usize,
    post: Option<&QMatrix>,
) -> Result<SparseMatrix> {
    assert!(m >= 1);
    let ncols = g_cx.flat_len(m)?;
    f_cx.flat_len(m - 1)?;
    let d = g_cx.dim();
    let elems = g_cx.subgroup().elements();
    let k = elems.len();
    let pos = |x: usize| elems.binary_search(&x).expect("element in domain");
    let terms: Vec<(usize, Q)> = xi.terms().map(|(g, t)| (pos(g), t.clone())).collect();
    let mut rows = Vec::new();
    for t in TupleIter::from_domain(f_cx.subgroup().elements(), m - 1) {
        let tpos: Vec<usize> = t.iter().map(|&x| pos(x)).collect();
        let mut blocks: Vec<(usize, Q)> = Vec::with_capacity(m * terms.len());
        for i in 1..=m {
            let s = if i % 2 == 1 { Q::one() } else { -Q::one() };
            for (g, w) in &terms {
                let idx = tpos[..i - 1]
                    .iter()
                    .chain(std::iter::once(g))
                    .chain(&tpos[i - 1..])
                    .fold(0usize, |acc, &x| acc * k + x);
                blocks.push((idx * d, &s * w));
            }
        }
        for r in 0..d {
            let mut row = Vec::with_capacity(blocks.len() * d);
            for (base, w) in &blocks {
                match post {
                    None => row.push((base + r, w.clone())),
                    Some(pm) => {
                        for j in 0..d {
                            if !pm[(r, j)].is_zero() {
                                row.push((base + j, w * &pm[(r, j)]));
                            }
                        }
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(SparseMatrix::from_rows(ncols, rows))
}

#[derive(Clone, Debug)]
pub struct HomotopyDegreeResult {
    pub degree: usize,
    pub samples: usize,
    pub zero_residual: bool,
    /// First argument tuple (over `F`) where the residual is nonzero.
    pub first_failure: Option<Vec<usize>>,
}

/// Checks `φ|_F − π(ξ)∘φ|_F = ∂R^nφ + R^{n+1}∂φ` on random exact cochains.
pub fn verify_homotopy_identity(
    module: &BanachModule,
    xi: &GroupAlgebraElement,
    f: &Subgroup,
    degrees: &[usize],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<Vec<HomotopyDegreeResult>> {
    xi.require_simplex()?;
    require_commutes(xi, f)?;
    let g_cx = CochainComplex::over_group(module);
    let f_cx = CochainComplex::new(module, f)?;
    let pxi = module.apply_algebra(xi)?;
    let mut out = Vec::new();
    for &n in degrees {
        let mut first_failure = None;
        for _ in 0..samples {
            let phi = g_cx.random(n, rng, 6, 5)?;
            let restricted = g_cx.restrict(&phi, &f_cx)?;
            let lhs = f_cx.from_fn(n, |t| {
                let v = restricted.value(t).unwrap();
                crate::rational::vec_sub(v, &pxi.mul_vec(v))
            })?;
            let mut rhs = f_cx.zero(n)?;
            if let Some(r) = homotopy_r(&g_cx, &f_cx, &phi, xi)? {
                rhs = rhs.add(&f_cx.coboundary(&r)?);
            }
            let dphi = g_cx.coboundary(&phi)?;
            let r2 = homotopy_r(&g_cx, &f_cx, &dphi, xi)?.expect("positive degree");
            rhs = rhs.add(&r2);
            let diff = lhs.sub(&rhs);
            if !diff.is_zero() && first_failure.is_none() {
                first_failure = diff
                    .tuples()
                    .find(|t| diff.value(t).unwrap().iter().any(|x| !x.is_zero()));
            }
        }
        out.push(HomotopyDegreeResult {
            degree: n,
            samples,
            zero_residual: first_failure.is_none(),
            first_failure,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ContractingHomotopy {
    pub xi: GroupAlgebraElement,
    pub inverse: QMatrix,
    /// `K^n: C^n → C^{n−1}` for `n = 1..=max_degree + 1`; `K^0 = 0`.
    pub k: Vec<SparseMatrix>,
    /// Whether `∂K + K∂ = I` holds exactly on `C^n`, for `n = 0..=max_degree`.
    pub identity_holds: Vec<bool>,
}

impl ContractingHomotopy {
    pub fn all_hold(&self) -> bool {
        self.identity_holds.iter().all(|&b| b)
    }

    pub fn k_matrix(&self, n: usize) -> Option<&SparseMatrix> {
        if n == 0 {
            None
        } else {
            self.k.get(n - 1)
        }
    }
}

/// `K = (I − π(ξ))⁻¹ ∘ R` for central `ξ` in the simplex, with `I = ∂K + K∂`
/// checked by exact sparse products in degrees `0..=max_degree`.
pub fn contracting_homotopy(
    module: &BanachModule,
    xi: &GroupAlgebraElement,
    max_degree: usize,
) -> Result<ContractingHomotopy> {
    xi.require_simplex()?;
    let whole = Subgroup::whole(module.group());
    require_commutes(xi, &whole)?;
    let inverse = exact::inverse(&one_minus(module, xi)?)
        .ok_or_else(|| Error::Singular("I - pi(xi) is not invertible".into()))?;
    let cx = CochainComplex::over_group(module);
    let k: Vec<SparseMatrix> = (1..=max_degree + 1)
        .map(|m| homotopy_matrix(&cx, &cx, xi, m, Some(&inverse)))
        .collect::<Result<_>>()?;
    let mut identity_holds = Vec::new();
    let mut d_prev: Option<SparseMatrix> = None;
    for n in 0..=max_degree {
        let d_n = cx.coboundary_matrix(n)?;
        let mut total = k[n].mul(&d_n);
        if let Some(dp) = &d_prev {
            total = total.add(&dp.mul(&k[n - 1]));
        }
        identity_holds.push(total == SparseMatrix::identity(cx.flat_len(n)?));
        d_prev = Some(d_n);
    }
    Ok(ContractingHomotopy {
        xi: xi.clone(),
        inverse,
        k,
        identity_holds,
    })
}

#[derive(Clone, Debug)]
pub struct ContractingPair {
    pub xi: GroupAlgebraElement,
    pub zeta: GroupAlgebraElement,
    pub norm_bound: f64,
    /// Exact certificate `‖π(ξζ)‖ ≤ norm_bound` (only for `p = 2`).
    pub certified_exact: bool,
}

/// `ξ` uniform over `F` and `ζ` uniform over a union of `F`-classes with
/// `supp(ξζ) = G`, such that `‖π(ξ)π(ζ)‖ < 1`.
pub fn find_contracting_pair(
    module: &BanachModule,
    f: &Subgroup,
    seed: u64,
) -> Result<ContractingPair> {
    let group = module.group();
    let whole = Subgroup::whole(group);
    let inv_dim = module.invariants(&whole).len();
    if inv_dim > 0 {
        return Err(Error::InvariantVectors(inv_dim));
    }
    let xi = uniform_average(group, f.elements())?;
    let cd = f_conjugacy_classes(f);
    let n = group.order();
    let mut covered = vec![false; n];
    let mut chosen: Vec<usize> = Vec::new();
    for class in cd.classes() {
        if covered.iter().all(|&c| c) {
            break;
        }
        let adds = f
            .elements()
            .iter()
            .any(|&a| class.iter().any(|&b| !covered[group.mul(a, b)]));
        if adds {
            for &a in f.elements() {
                for &b in class {
                    covered[group.mul(a, b)] = true;
                }
            }
            chosen.extend_from_slice(class);
        }
    }
    let attempt = |set: &[usize]| -> Result<ContractingPair> {
        let zeta = uniform_average(group, set)?;
        require_commutes(&zeta, f)?;
        let prod = module.apply_algebra(&xi.convolve(&zeta)?)?;
        let bound = module.operator_norm_of(&prod, seed).upper;
        let (norm_bound, certified_exact) = certify(module, &prod, bound);
        Ok(ContractingPair {
            xi: xi.clone(),
            zeta,
            norm_bound,
            certified_exact,
        })
    };
    let first = attempt(&chosen)?;
    if first.norm_bound < 1.0 {
        return Ok(first);
    }
    let all: Vec<usize> = group.elements().collect();
    let second = attempt(&all)?;
    if second.norm_bound < 1.0 {
        return Ok(second);
    }
    Err(Error::NormNotContracting {
        bound: second.norm_bound,
    })
}

/// Rounds a float bound up to a rational and certifies it exactly when `p = 2`.
pub fn certify(module: &BanachModule, a: &QMatrix, bound: f64) -> (f64, bool) {
    if !module.p().is_two() {
        return (bound, false);
    }
    let den: i64 = 1 << 40;
    let mut num = ((bound * den as f64).ceil() as i64).max(0);
    for _ in 0..8 {
        let b = Q::new(num.into(), den.into());
        if module.certify_p2_bound(a, &b) == Some(true) {
            return (crate::rational::to_f64(&b), true);
        }
        num += (num / 1_000_000).max(16);
    }
    (bound, false)
}

/// `ψ = (I − π(ξ))⁻¹ ∘ R^nφ` for a cocycle `φ ∈ Z^n(G, X)`; satisfies `∂ψ = φ|_F`.
pub fn restriction_nullifier(
    module: &BanachModule,
    phi: &Cochain,
    f: &Subgroup,
    xi: &GroupAlgebraElement,
) -> Result<Cochain> {
    let g_cx = CochainComplex::over_group(module);
    let f_cx = CochainComplex::new(module, f)?;
    if phi.degree() == 0 {
        return Err(Error::InvalidArgument(
            "restriction nullifier needs degree >= 1".into(),
        ));
    }
    if !g_cx.is_cocycle(phi)? {
        return Err(Error::NotCocycle(format!(
            "degree {} cochain has nonzero coboundary",
            phi.degree()
        )));
    }
    xi.require_simplex()?;
    require_commutes(xi, f)?;
    let inverse = exact::inverse(&one_minus(module, xi)?)
        .ok_or_else(|| Error::Singular("I - pi(xi) is not invertible".into()))?;
    let r = homotopy_r(&g_cx, &f_cx, phi, xi)?.expect("positive degree");
    let psi = f_cx.from_fn(r.degree(), |t| inverse.mul_vec(r.value(t).unwrap()))?;
    let check = f_cx.coboundary(&psi)?;
    if check != g_cx.restrict(phi, &f_cx)? {
        return Err(Error::Invariant(
            "coboundary of the nullifier differs from the restriction".into(),
        ));
    }
    Ok(psi)
}
