//! Affine isometric actions and the cocycle correspondence.

use nalgebra::{DMatrix, DVector};
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{uniform_average, GroupAlgebraElement};
use crate::approx::NormModel;
use crate::cochain::{Cochain, CochainComplex, Mode};
use crate::error::{Error, Result};
use crate::group::Subgroup;
use crate::linalg::{exact, QMatrix};
use crate::module::{random_vector, BanachModule};
use crate::rational::{add_assign_scaled, fmt_q, vec_add, vec_sub, vec_to_f64, Q};

/// `α(g)x = π(g)x + φ(g)` for a 1-cocycle `φ`.
#[derive(Clone, Debug)]
pub struct AffineAction {
    module: BanachModule,
    cocycle: Cochain,
}

pub fn action_from_cocycle(module: &BanachModule, phi: &Cochain) -> Result<AffineAction> {
    let cx = CochainComplex::over_group(module);
    if phi.degree() != 1 {
        return Err(Error::NotCocycle(format!(
            "degree {} cochain",
            phi.degree()
        )));
    }
    if !cx.is_cocycle(phi)? {
        return Err(Error::NotCocycle("cocycle identity fails".into()));
    }
    Ok(AffineAction {
        module: module.clone(),
        cocycle: phi.clone(),
    })
}

/// `φ(g) = α(g)0`.
pub fn cocycle_from_action(alpha: &AffineAction) -> Result<Cochain> {
    let cx = CochainComplex::over_group(&alpha.module);
    let zero = vec![Q::zero(); alpha.module.dim()];
    cx.from_fn(1, |t| alpha.apply(t[0], &zero))
}

impl AffineAction {
    pub fn module(&self) -> &BanachModule {
        &self.module
    }

    pub fn cocycle(&self) -> &Cochain {
        &self.cocycle
    }

    pub fn apply(&self, g: usize, x: &[Q]) -> Vec<Q> {
        vec_add(
            &self.module.act(g, x),
            self.cocycle.value(&[g]).expect("group element"),
        )
    }

    /// `α(ξ)x = π(ξ)x + φ̂(ξ)` for `ξ` in the affine space.
    pub fn apply_algebra(&self, xi: &GroupAlgebraElement, x: &[Q]) -> Result<Vec<Q>> {
        let cx = CochainComplex::over_group(&self.module);
        let shift = cx.multiaffine_eval(&self.cocycle, std::slice::from_ref(xi))?;
        Ok(vec_add(&self.module.apply_algebra(xi)?.mul_vec(x), &shift))
    }

    /// Affine maps `(A_g, b_g)` in floating point, for the given elements.
    fn float_maps(&self, elems: &[usize]) -> Vec<(DMatrix<f64>, Vec<f64>)> {
        elems
            .iter()
            .map(|&g| {
                (
                    self.module.matrix(g).to_f64(),
                    vec_to_f64(self.cocycle.value(&[g]).unwrap()),
                )
            })
            .collect()
    }
}

/// An affine subspace `point + span(directions)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedSet {
    pub point: Vec<Q>,
    pub directions: Vec<Vec<Q>>,
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    pub fixed: Option<FixedSet>,
    /// Mean of the orbit of 0.
    pub barycenter: Vec<Q>,
    pub barycenter_fixed: bool,
    pub is_coboundary: bool,
}

impl FixedPointReport {
    pub fn unique(&self) -> bool {
        self.fixed.as_ref().is_some_and(|f| f.directions.is_empty())
    }
}

/// Solves `(I − π(s))x = φ(s)` over the generators.
pub fn solve_fixed(mats: &[QMatrix], shifts: &[Vec<Q>], dim: usize) -> Option<FixedSet> {
    if mats.is_empty() {
        return Some(FixedSet {
            point: vec![Q::zero(); dim],
            directions: QMatrix::identity(dim).row_vecs(),
        });
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (a, b) in mats.iter().zip(shifts) {
        rows.extend(QMatrix::identity(dim).sub(a).row_vecs());
        rhs.extend(b.iter().cloned());
    }
    exact::solve(&QMatrix::from_rows(rows), &rhs)
        .map(|(point, directions)| FixedSet { point, directions })
}

pub fn fixed_points(alpha: &AffineAction) -> Result<FixedPointReport> {
    let m = &alpha.module;
    let group = m.group();
    let gens = group.generators();
    let mats: Vec<QMatrix> = gens.iter().map(|&g| m.matrix(g).clone()).collect();
    let shifts: Vec<Vec<Q>> = gens
        .iter()
        .map(|&g| alpha.cocycle.value(&[g]).unwrap().to_vec())
        .collect();
    let fixed = solve_fixed(&mats, &shifts, m.dim());
    if let Some(f) = &fixed {
        if group
            .elements()
            .any(|g| alpha.apply(g, &f.point) != f.point)
        {
            return Err(Error::Invariant(
                "generator fixed point is not fixed by the whole group".into(),
            ));
        }
    }
    let all: Vec<usize> = group.elements().collect();
    let u = uniform_average(group, &all)?;
    let barycenter = alpha.apply_algebra(&u, &vec![Q::zero(); m.dim()])?;
    let barycenter_fixed = group
        .elements()
        .all(|g| alpha.apply(g, &barycenter) == barycenter);
    let is_coboundary = CochainComplex::over_group(m).is_coboundary(&alpha.cocycle)?;
    Ok(FixedPointReport {
        fixed,
        barycenter,
        barycenter_fixed,
        is_coboundary,
    })
}

#[derive(Clone, Debug)]
pub struct AlmostFixedReport {
    pub point: Vec<f64>,
    /// `max_{g∈E} ‖x − α(g)x‖` at the returned point.
    pub value: f64,
    pub below_eps: bool,
    /// The point is an exact fixed point.
    pub exact_fixed: bool,
    pub restarts: usize,
    pub seed: u64,
}

pub const RESTARTS: usize = 16;
pub const DESCENT_ITERS: usize = 10_000;

/// Minimizes `max_j ‖x − (A_j x + b_j)‖` by subgradient descent with step
/// `c/√t` from several starting points; returns the best point and value.
pub fn minimize_displacement(
    maps: &[(DMatrix<f64>, Vec<f64>)],
    model: &NormModel,
    dim: usize,
    seed: u64,
    restarts: usize,
    iters: usize,
) -> (Vec<f64>, f64) {
    let residual = |x: &DVector<f64>, (a, b): &(DMatrix<f64>, Vec<f64>)| -> Vec<f64> {
        let ax = a * x;
        (0..dim).map(|i| x[i] - ax[i] - b[i]).collect()
    };
    let value = |x: &DVector<f64>| {
        maps.iter()
            .map(|m| model.norm(&residual(x, m)))
            .fold(0.0, f64::max)
    };
    if maps.is_empty() {
        return (vec![0.0; dim], 0.0);
    }
    let radius = 1.0
        + maps
            .iter()
            .flat_map(|(_, b)| b.iter().map(|v| v.abs()))
            .fold(0.0, f64::max);
    let mut best_x = DVector::zeros(dim);
    let mut best = value(&best_x);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut x = if r == 0 {
            DVector::zeros(dim)
        } else {
            DVector::from_fn(dim, |_, _| rng.gen_range(-radius..=radius))
        };
        let c = 0.5 * value(&x).max(1e-12);
        for t in 1..=iters {
            let (j, fx) = maps
                .iter()
                .enumerate()
                .map(|(j, m)| (j, model.norm(&residual(&x, m))))
                .fold((0, -1.0), |b, (j, v)| if v > b.1 { (j, v) } else { b });
            if fx < best {
                best = fx;
                best_x = x.clone();
            }
            if fx < 1e-14 {
                break;
            }
            let (_, g) = model.sq_and_grad(&residual(&x, &maps[j]));
            let gr = DVector::from_vec(g) / (2.0 * fx);
            let sub = (DMatrix::identity(dim, dim) - &maps[j].0).transpose() * gr;
            let n = sub.norm();
            if n < 1e-15 {
                break;
            }
            x -= sub * (c / (t as f64).sqrt() / n);
        }
        let fx = value(&x);
        if fx < best {
            best = fx;
            best_x = x;
        }
    }
    (best_x.iter().copied().collect(), best)
}

/// Point minimizing the displacement over `E`; exact when a fixed point exists.
pub fn almost_fixed_point(
    alpha: &AffineAction,
    e: &[usize],
    eps: f64,
    seed: u64,
) -> Result<AlmostFixedReport> {
    let m = &alpha.module;
    if let Some(&g) = e.iter().find(|&&g| g >= m.group().order()) {
        return Err(Error::InvalidArgument(format!("element {g} out of range")));
    }
    let report = fixed_points(alpha)?;
    if let Some(f) = report.fixed {
        return Ok(AlmostFixedReport {
            point: vec_to_f64(&f.point),
            value: 0.0,
            below_eps: 0.0 < eps,
            exact_fixed: true,
            restarts: 0,
            seed,
        });
    }
    let (point, value) = minimize_displacement(
        &alpha.float_maps(e),
        &NormModel::new(m),
        m.dim(),
        seed,
        RESTARTS,
        DESCENT_ITERS,
    );
    Ok(AlmostFixedReport {
        point,
        value,
        below_eps: value < eps,
        exact_fixed: false,
        restarts: RESTARTS,
        seed,
    })
}

#[derive(Clone, Debug)]
pub struct HullReport {
    pub trials: usize,
    pub passed: bool,
    pub first_failure: Option<String>,
}

fn random_simplex_element(
    group: &crate::group::GroupRef,
    rng: &mut impl Rng,
) -> GroupAlgebraElement {
    let weights: Vec<i64> = group.elements().map(|_| rng.gen_range(0..=4)).collect();
    let total: i64 = weights.iter().sum();
    if total == 0 {
        return GroupAlgebraElement::dirac(group, group.identity());
    }
    GroupAlgebraElement::new(
        group,
        weights
            .iter()
            .enumerate()
            .map(|(g, &w)| (g, Q::new(w.into(), total.into()))),
    )
    .expect("valid element")
}

/// Checks `conv(α(G)x) = α(ΔG)x` through the biaffine identity
/// `Σ_g ξ(g)α(g)x = π(ξ)x + φ̂(ξ)`, in both directions.
pub fn delta_orbit_hull_check(
    alpha: &AffineAction,
    x: &[Q],
    trials: usize,
    rng: &mut impl Rng,
) -> Result<HullReport> {
    let group = alpha.module.group().clone();
    let orbit: Vec<Vec<Q>> = group.elements().map(|g| alpha.apply(g, x)).collect();
    let combine = |xi: &GroupAlgebraElement| {
        let mut y = vec![Q::zero(); x.len()];
        for (g, t) in xi.terms() {
            add_assign_scaled(&mut y, &orbit[g], t);
        }
        y
    };
    for trial in 0..trials {
        // a point of α(ΔG)x lies in the hull with weights ξ
        let xi = random_simplex_element(&group, rng);
        if alpha.apply_algebra(&xi, x)? != combine(&xi) {
            return Ok(HullReport {
                trials,
                passed: false,
                first_failure: Some(format!("trial {trial}: xi {}", xi.to_json())),
            });
        }
        // a hull point is α(λ)x for its weights λ
        let lam = random_simplex_element(&group, rng);
        let y = combine(&lam);
        if y != alpha.apply_algebra(&lam, x)? {
            return Ok(HullReport {
                trials,
                passed: false,
                first_failure: Some(format!("trial {trial}: weights {}", lam.to_json())),
            });
        }
    }
    Ok(HullReport {
        trials,
        passed: true,
        first_failure: None,
    })
}

#[derive(Clone, Debug)]
pub struct DisplacementViolation {
    pub x: Vec<String>,
    pub g: usize,
    pub cocycle_form: bool,
}

#[derive(Clone, Debug)]
pub struct QuotientDisplacementReport {
    pub samples: usize,
    pub violations: usize,
    pub cocycle_samples: usize,
    pub cocycle_violations: usize,
    pub exact: bool,
    pub first_violation: Option<DisplacementViolation>,
    pub quotient_dim: usize,
}

impl QuotientDisplacementReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cocycle_violations == 0
    }
}

/// Checks `½‖y‖ ≤ ‖ȳ‖ ≤ ‖y‖` for `y = x − π(g)x` and for `y = φ(g)` with `φ ∈ Z¹`.
pub fn quotient_displacement_check(
    module: &BanachModule,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<QuotientDisplacementReport> {
    let group = module.group();
    let whole = Subgroup::whole(group);
    let quotient = module.quotient_module(&whole)?;
    let cx = CochainComplex::over_group(module);
    let z1 = cx
        .cohomology(1, Mode::Exact, true)?
        .basis_z
        .unwrap_or_default();
    let exact_mode = module.p().is_two();
    let holds = |y: &[Q]| -> bool {
        if exact_mode {
            let a2 = module.norm_sq_exact(y).unwrap();
            let q2 = quotient.norm_sq_exact(y).unwrap();
            &a2 / Q::from_integer(4.into()) <= q2 && q2 <= a2
        } else {
            let a = module.norm(y);
            let q = quotient.norm(y);
            let tol = 1e-9 * a.max(1.0);
            0.5 * a <= q + tol && q <= a + tol
        }
    };
    let mut report = QuotientDisplacementReport {
        samples,
        violations: 0,
        cocycle_samples: 0,
        cocycle_violations: 0,
        exact: exact_mode,
        first_violation: None,
        quotient_dim: quotient.dim(),
    };
    for _ in 0..samples {
        let den = rng.gen_range(1..=4);
        let x = random_vector(rng, module.dim(), 9, den);
        let g = rng.gen_range(0..group.order());
        let y = vec_sub(&x, &module.act(g, &x));
        if !holds(&y) {
            report.violations += 1;
            report.first_violation.get_or_insert(DisplacementViolation {
                x: x.iter().map(fmt_q).collect(),
                g,
                cocycle_form: false,
            });
        }
        if !z1.is_empty() {
            let mut phi = vec![Q::zero(); z1[0].len()];
            for b in &z1 {
                add_assign_scaled(&mut phi, b, &Q::from_integer(rng.gen_range(-3..=3).into()));
            }
            let d = module.dim();
            let pos = cx.subgroup().elements().binary_search(&g).unwrap();
            let v = &phi[pos * d..(pos + 1) * d];
            report.cocycle_samples += 1;
            if !holds(v) {
                report.cocycle_violations += 1;
                report.first_violation.get_or_insert(DisplacementViolation {
                    x: v.iter().map(fmt_q).collect(),
                    g,
                    cocycle_form: true,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct GuichardetReport {
    pub invariant_dim: usize,
    pub quotient_dim: usize,
    pub dim_b1: usize,
    /// Coboundaries form a subspace of a finite-dimensional space, hence closed.
    pub b1_closed: bool,
    pub quotient_invariant_dim: usize,
    /// Bound on `‖π̄(uniform)‖` in the quotient norm.
    pub averaging_bound: f64,
    pub averaging_bound_exact: bool,
    pub no_almost_invariant: bool,
    /// `dim B¹(G, X) = dim B¹(G, X/X^G)`.
    pub coboundary_dims_match: bool,
}

impl GuichardetReport {
    pub fn passed(&self) -> bool {
        self.b1_closed == self.no_almost_invariant && self.coboundary_dims_match
    }
}

pub fn guichardet_criterion(module: &BanachModule, seed: u64) -> Result<GuichardetReport> {
    let group = module.group();
    let whole = Subgroup::whole(group);
    let quotient = module.quotient_module(&whole)?;
    let k = quotient.dim();
    let invariant_dim = module.dim() - k;
    let cx = CochainComplex::over_group(module);
    let dim_b1 = cx.cohomology(1, Mode::Exact, false)?.dim_b;
    let dim_b1_check = exact::rank(&cx.coboundary_matrix(0)?.to_dense());
    let n = Q::from_integer((group.order() as i64).into());
    let mut avg = QMatrix::zeros(k, k);
    for g in group.elements() {
        avg.add_scaled_assign(&quotient.matrices[g], &(Q::one() / &n));
    }
    let quotient_invariant_dim = if k == 0 {
        0
    } else {
        let rows: Vec<Vec<Q>> = quotient
            .matrices
            .iter()
            .flat_map(|a| QMatrix::identity(k).sub(a).row_vecs())
            .collect();
        exact::kernel(&QMatrix::from_rows(rows)).len()
    };
    let (averaging_bound, averaging_bound_exact) = if avg.is_zero() {
        (0.0, true)
    } else {
        let lifted = QMatrix::from_columns(&quotient.complement, module.dim());
        let amb = lifted.mul(&avg);
        let m = QMatrix::from_columns(
            &(0..k)
                .map(|j| amb.column(j))
                .chain(std::iter::repeat_n(vec![Q::zero(); module.dim()], invariant_dim))
                .collect::<Vec<_>>(),
            module.dim(),
        );
        (module.operator_norm_of(&m, seed).upper, false)
    };
    let dim_b1_quotient = k - quotient_invariant_dim;
    Ok(GuichardetReport {
        invariant_dim,
        quotient_dim: k,
        dim_b1,
        b1_closed: dim_b1 == dim_b1_check,
        quotient_invariant_dim,
        averaging_bound,
        averaging_bound_exact,
        no_almost_invariant: k == 0 || averaging_bound < 1.0,
        coboundary_dims_match: dim_b1 == dim_b1_quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::module::NormParam;
    use crate::rational::q;

    fn rotation_z4() -> BanachModule {
        let z4 = FiniteGroup::cyclic(4);
        BanachModule::from_generator_matrices(
            &z4,
            &[(1, QMatrix::from_i64(&[&[0, -1], &[1, 0]]))],
            NormParam::two(),
        )
        .unwrap()
    }

    #[test]
    fn coboundary_action_fixes_its_point() {
        let m = rotation_z4();
        let cx = CochainComplex::over_group(&m);
        let x = vec![q(2), q(5)];
        let phi = cx.coboundary(&cx.cochain(0, x.clone()).unwrap()).unwrap();
        let alpha = action_from_cocycle(&m, &phi).unwrap();
        assert_eq!(cocycle_from_action(&alpha).unwrap(), phi);
        let rep = fixed_points(&alpha).unwrap();
        assert!(rep.unique() && rep.barycenter_fixed && rep.is_coboundary);
        assert_eq!(rep.fixed.unwrap().point, x);
    }

    #[test]
    fn regular_z2_displacement_is_tight_on_the_right() {
        let z2 = FiniteGroup::cyclic(2);
        let m = BanachModule::regular(&z2, NormParam::two());
        let quotient = m.quotient_module(&Subgroup::whole(&z2)).unwrap();
        let y = vec_sub(&[q(1), q(0)], &m.act(1, &[q(1), q(0)]));
        assert_eq!(m.norm_sq_exact(&y).unwrap(), q(2));
        assert_eq!(quotient.norm_sq_exact(&y).unwrap(), q(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(quotient_displacement_check(&m, 100, &mut rng)
            .unwrap()
            .passed());
        let m3 = m.with_p(NormParam::Finite(q(3))).unwrap();
        assert!(quotient_displacement_check(&m3, 50, &mut rng)
            .unwrap()
            .passed());
    }

    #[test]
    fn guichardet_on_small_modules() {
        let z3 = FiniteGroup::cyclic(3);
        let reg = BanachModule::regular(&z3, NormParam::two());
        let r = guichardet_criterion(&reg, 0).unwrap();
        assert!(r.passed() && r.averaging_bound == 0.0 && r.quotient_dim == 2);
        let triv = BanachModule::trivial(&z3, 2, NormParam::two());
        let t = guichardet_criterion(&triv, 0).unwrap();
        assert!(t.passed() && t.quotient_dim == 0);
    }

    #[test]
    fn hull_identity_and_scaling() {
        let m = rotation_z4();
        let cx = CochainComplex::over_group(&m);
        let phi = cx
            .coboundary(&cx.cochain(0, vec![q(1), q(-3)]).unwrap())
            .unwrap();
        let alpha = action_from_cocycle(&m, &phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(
            delta_orbit_hull_check(&alpha, &[q(7), q(1)], 50, &mut rng)
                .unwrap()
                .passed
        );
        let model = NormModel::with_basis(2.0, None);
        let maps = vec![(DMatrix::identity(1, 1), vec![3.0])];
        let (_, v) = minimize_displacement(&maps, &model, 1, 0, 4, 1000);
        assert!((v - 3.0).abs() < 1e-12);
        let maps = vec![(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            vec![1.0, 1.0],
        )];
        let (x, v) = minimize_displacement(&maps, &model, 2, 0, 4, 10_000);
        assert!(v < 1e-3, "{v} at {x:?}");
    }
}
