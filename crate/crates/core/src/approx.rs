//! Constructive approximation: shrinking averages, almost-coboundary witnesses
//! and generator-average decay.

use nalgebra::DMatrix;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{class_average, uniform_average, GroupAlgebraElement};
use crate::cochain::{Cochain, CochainComplex};
use crate::error::{Error, Result};
use crate::group::{f_conjugacy_classes, Subgroup};
use crate::homotopy::homotopy_r;
use crate::linalg::{exact, QMatrix};
use crate::module::BanachModule;
use crate::rational::{from_f64_grid, vec_to_f64, Q};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Greedy steps allowed per target vector.
    pub max_steps: usize,
    pub max_word_len: usize,
    /// Cap on the number of words examined per greedy step.
    pub max_candidates: usize,
    pub refine_iters: usize,
    /// Run even when `p` is 1 or ∞.
    pub force: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 200,
            max_word_len: 8,
            max_candidates: 4096,
            refine_iters: 10_000,
            force: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShrinkResult {
    pub xi: GroupAlgebraElement,
    pub steps: usize,
    /// `‖π(ξ)x‖` for each target vector.
    pub norms: Vec<f64>,
    pub max_norm: f64,
    /// All bounds `‖π(ξ)x‖ < ε` verified in exact arithmetic (`p = 2`).
    pub certified_exact: bool,
    pub strict_convexity_warning: bool,
}

fn check_norm_param(module: &BanachModule, budget: &Budget) -> Result<bool> {
    let ok = module.p().is_uniformly_convex();
    if !ok && !budget.force {
        return Err(Error::StrictConvexityRequired(format!(
            "p = {}",
            module.p()
        )));
    }
    Ok(!ok)
}

/// Squared ambient p-norm and its gradient in module coordinates.
pub struct NormModel {
    p: f64,
    basis: Option<DMatrix<f64>>,
}

impl NormModel {
    pub(crate) fn new(module: &BanachModule) -> Self {
        NormModel {
            p: module.p().to_f64(),
            basis: module.embedding().map(|e| e.basis.to_f64()),
        }
    }

    pub(crate) fn with_basis(p: f64, basis: Option<DMatrix<f64>>) -> Self {
        NormModel { p, basis }
    }

    fn ambient(&self, z: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => z.to_vec(),
            Some(b) => (b * nalgebra::DVector::from_column_slice(z))
                .iter()
                .copied()
                .collect(),
        }
    }

    pub(crate) fn norm(&self, z: &[f64]) -> f64 {
        crate::linalg::float::norm_p(&self.ambient(z), self.p)
    }

    pub(crate) fn sq_and_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let a = self.ambient(z);
        let n = crate::linalg::float::norm_p(&a, self.p);
        let mut g = vec![0.0; a.len()];
        if n > 0.0 {
            if self.p.is_infinite() {
                let (i, _) = a.iter().enumerate().fold((0, -1.0), |b, (i, x)| {
                    if x.abs() > b.1 {
                        (i, x.abs())
                    } else {
                        b
                    }
                });
                g[i] = 2.0 * n * a[i].signum();
            } else {
                for (gi, ai) in g.iter_mut().zip(&a) {
                    *gi = 2.0 * n * ai.signum() * (ai.abs() / n).powf(self.p - 1.0);
                }
            }
        }
        let grad = match &self.basis {
            None => g,
            Some(b) => (b.transpose() * nalgebra::DVector::from_vec(g))
                .iter()
                .copied()
                .collect(),
        };
        (n * n, grad)
    }
}

fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// Projected gradient for `min ‖Σ λ_j v_j‖` over the simplex, from vertex `start`.
fn refine_weights(
    model: &NormModel,
    images: &[Vec<f64>],
    start: usize,
    tol: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let m = images.len();
    let d = images[0].len();
    let combine = |lam: &[f64]| {
        let mut z = vec![0.0; d];
        for (l, v) in lam.iter().zip(images) {
            if *l != 0.0 {
                z.iter_mut().zip(v).for_each(|(a, b)| *a += l * b);
            }
        }
        z
    };
    let mut lam = vec![0.0; m];
    lam[start] = 1.0;
    let (mut h, _) = model.sq_and_grad(&combine(&lam));
    let mut step = 1.0;
    for _ in 0..iters {
        if h.sqrt() < tol {
            break;
        }
        let (_, gz) = model.sq_and_grad(&combine(&lam));
        let grad: Vec<f64> = images
            .iter()
            .map(|v| v.iter().zip(&gz).map(|(a, b)| a * b).sum())
            .collect();
        let mut improved = false;
        while step > 1e-18 {
            let mut trial: Vec<f64> = lam.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
            project_simplex(&mut trial);
            let (ht, _) = model.sq_and_grad(&combine(&trial));
            if ht < h {
                lam = trial;
                h = ht;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (lam, h.sqrt())
}

/// Rounds weights to a dyadic grid and renormalizes exactly onto the simplex.
fn rational_weights(lam: &[f64]) -> Vec<(usize, Q)> {
    let raw: Vec<(usize, Q)> = lam
        .iter()
        .enumerate()
        .map(|(i, &l)| (i, from_f64_grid(l, 1 << 30)))
        .filter(|(_, q)| q.is_positive())
        .collect();
    let total: Q = raw.iter().map(|(_, q)| q.clone()).sum();
    raw.into_iter().map(|(i, q)| (i, q / &total)).collect()
}

fn word_element(gens: &[GroupAlgebraElement], word: &[usize]) -> Result<GroupAlgebraElement> {
    let mut acc = gens[word[0]].clone();
    for &s in &word[1..] {
        acc = acc.convolve(&gens[s])?;
    }
    Ok(acc)
}

/// Words over `m` generators of length `1..=L`, in lexicographic order, with `L`
/// reduced until the count fits the candidate cap.
fn enumerate_words(m: usize, max_len: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut len = max_len.max(1);
    while len > 1
        && (1..=len)
            .map(|k| m.saturating_pow(k as u32))
            .fold(0usize, |a, b| a.saturating_add(b))
            > cap
    {
        len -= 1;
    }
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..m).rev().map(|s| vec![s]).collect();
    while let Some(w) = stack.pop() {
        if w.len() < len {
            for s in (0..m).rev() {
                let mut c = w.clone();
                c.push(s);
                stack.push(c);
            }
        }
        out.push(w);
    }
    out
}

/// Finds `ξ` in the convex semigroup generated by `gens` with `‖π(ξ)x‖ < ε` for every `x ∈ E`.
///
/// Vectors are handled in turn; each greedy step picks the best word up to the
/// length limit, then refines by convex weights over all candidate words.
pub fn shrinking_average(
    module: &BanachModule,
    gens: &[GroupAlgebraElement],
    commuting: Option<&Subgroup>,
    targets: &[Vec<Q>],
    eps: f64,
    budget: &Budget,
) -> Result<ShrinkResult> {
    let warning = check_norm_param(module, budget)?;
    if gens.is_empty() {
        return Err(Error::InvalidArgument("no semigroup generators".into()));
    }
    let mats: Vec<QMatrix> = gens
        .iter()
        .map(|s| {
            s.require_simplex()?;
            if let Some(f) = commuting {
                if let Some(&g) = f.elements().iter().find(|&&g| !s.commutes_with(g)) {
                    return Err(Error::NotInSet(format!(
                        "generator does not commute with element {g}"
                    )));
                }
            }
            module.apply_algebra(s)
        })
        .collect::<Result<_>>()?;
    let d = module.dim();
    let stacked: Vec<Vec<Q>> = mats
        .iter()
        .flat_map(|a| QMatrix::identity(d).sub(a).row_vecs())
        .collect();
    let fixed = exact::kernel(&QMatrix::from_rows(stacked));
    if !fixed.is_empty() {
        return Err(Error::InvariantVectors(fixed.len()));
    }
    let model = NormModel::new(module);
    let fmats: Vec<DMatrix<f64>> = mats.iter().map(QMatrix::to_f64).collect();
    let words = enumerate_words(gens.len(), budget.max_word_len, budget.max_candidates);
    let group = module.group();
    let mut xi = GroupAlgebraElement::dirac(group, group.identity());
    let mut steps = 0;
    for x in targets {
        let mut y = module.apply_algebra(&xi)?.mul_vec(x);
        let mut local = 0;
        loop {
            let yf = vec_to_f64(&y);
            let current = model.norm(&yf);
            if current < eps {
                break;
            }
            if local >= budget.max_steps {
                return Err(Error::BudgetExhausted {
                    steps,
                    best_bound: current,
                });
            }
            let images: Vec<Vec<f64>> = words
                .iter()
                .map(|w| {
                    let mut v = nalgebra::DVector::from_vec(yf.clone());
                    for &s in w.iter().rev() {
                        v = &fmats[s] * v;
                    }
                    v.iter().copied().collect()
                })
                .collect();
            let values: Vec<f64> = images.iter().map(|v| model.norm(v)).collect();
            // first minimal word in lexicographic order
            let best = (0..words.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
            let mut step_el = word_element(gens, &words[best])?;
            if values[best] >= eps {
                let (lam, refined) =
                    refine_weights(&model, &images, best, eps / 10.0, budget.refine_iters);
                if refined < values[best] {
                    let mut combo = GroupAlgebraElement::zero(group);
                    for (i, w) in rational_weights(&lam) {
                        combo = combo.add(&word_element(gens, &words[i])?.scale(&w))?;
                    }
                    let candidate = module.apply_algebra(&combo)?.mul_vec(&y);
                    if model.norm(&vec_to_f64(&candidate)) < values[best] {
                        step_el = combo;
                    }
                }
            }
            let next = module.apply_algebra(&step_el)?.mul_vec(&y);
            if model.norm(&vec_to_f64(&next)) >= current {
                return Err(Error::BudgetExhausted {
                    steps,
                    best_bound: current,
                });
            }
            y = next;
            xi = step_el.convolve(&xi)?;
            steps += 1;
            local += 1;
        }
    }
    let pxi = module.apply_algebra(&xi)?;
    let images: Vec<Vec<Q>> = targets.iter().map(|x| pxi.mul_vec(x)).collect();
    let norms: Vec<f64> = images.iter().map(|v| module.norm(v)).collect();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let certified_exact = module.p().is_two() && {
        let e = Q::from_float(eps).expect("finite epsilon");
        let e2 = &e * &e;
        images.iter().all(|v| module.norm_sq_exact(v).unwrap() < e2)
    };
    Ok(ShrinkResult {
        xi,
        steps,
        norms,
        max_norm,
        certified_exact,
        strict_convexity_warning: warning,
    })
}

#[derive(Clone, Debug)]
pub struct CoboundaryWitness {
    /// `ψ = (φ − π(ξ)∘φ)|_F`.
    pub psi: Cochain,
    /// `R^nφ` over `F`, with `∂` of it equal to `ψ`.
    pub primitive: Cochain,
    pub xi: GroupAlgebraElement,
    pub sup_bound: f64,
    pub certified_exact: bool,
    pub in_coboundaries: bool,
    pub steps: usize,
}

/// `ψ ∈ B^n(F, X)` close to `φ` on the tuples `E`, built from a shrinking average
/// over the semigroup generated by `F`-class averages.
pub fn almost_coboundary_witness(
    module: &BanachModule,
    phi: &Cochain,
    f: &Subgroup,
    tuples: &[Vec<usize>],
    eps: f64,
    budget: &Budget,
) -> Result<CoboundaryWitness> {
    check_norm_param(module, budget)?;
    let whole = Subgroup::whole(module.group());
    let inv = module.invariants(&whole).len();
    if inv > 0 {
        return Err(Error::InvariantVectors(inv));
    }
    let g_cx = CochainComplex::over_group(module);
    let f_cx = CochainComplex::new(module, f)?;
    if phi.degree() == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if !g_cx.is_cocycle(phi)? {
        return Err(Error::NotCocycle(format!(
            "degree {} cochain has nonzero coboundary",
            phi.degree()
        )));
    }
    let values: Vec<Vec<Q>> = tuples
        .iter()
        .map(|t| {
            if t.iter().any(|&x| !f.contains(x)) {
                return Err(Error::InvalidArgument(format!("tuple {t:?} not in F^n")));
            }
            phi.value(t).map(<[Q]>::to_vec)
        })
        .collect::<Result<_>>()?;
    let cd = f_conjugacy_classes(f);
    let gens: Vec<GroupAlgebraElement> = (0..cd.classes().len())
        .filter(|&i| cd.classes()[i].len() > 1 || cd.classes()[i][0] != module.group().identity())
        .map(|i| class_average(&cd, i))
        .collect::<Result<_>>()?;
    let shrink = shrinking_average(module, &gens, Some(f), &values, eps, budget)?;
    let pxi = module.apply_algebra(&shrink.xi)?;
    let restricted = g_cx.restrict(phi, &f_cx)?;
    let psi = f_cx.from_fn(phi.degree(), |t| {
        let v = restricted.value(t).unwrap();
        crate::rational::vec_sub(v, &pxi.mul_vec(v))
    })?;
    let primitive = homotopy_r(&g_cx, &f_cx, phi, &shrink.xi)?.expect("positive degree");
    let in_coboundaries = f_cx.coboundary(&primitive)? == psi;
    Ok(CoboundaryWitness {
        psi,
        primitive,
        xi: shrink.xi,
        sup_bound: shrink.max_norm,
        certified_exact: shrink.certified_exact,
        in_coboundaries,
        steps: shrink.steps,
    })
}

#[derive(Clone, Debug)]
pub struct DecayResult {
    pub x: Vec<Q>,
    pub xi: GroupAlgebraElement,
    /// `Σ_{g∈Σ} (φ − ∂x)(g)`, computed directly.
    pub residual_sum: Vec<Q>,
    pub bound: f64,
    pub certified_exact: bool,
    /// `∂x(σ) = (I − π(ξ))φ̂(σ)` holds exactly.
    pub identity_holds: bool,
    pub steps: usize,
}

/// `x = φ̂(ξ)` for `ξ ∈ conv{σ^n}`, `σ` uniform over `Σ ∪ {e}`, with
/// `‖Σ_{g∈Σ}(φ − ∂x)(g)‖ < ε`.
pub fn generator_average_decay(
    module: &BanachModule,
    phi: &Cochain,
    sigma: &[usize],
    eps: f64,
    budget: &Budget,
) -> Result<DecayResult> {
    check_norm_param(module, budget)?;
    let group = module.group();
    let whole = Subgroup::whole(group);
    let inv = module.invariants(&whole).len();
    if inv > 0 {
        return Err(Error::InvariantVectors(inv));
    }
    let cx = CochainComplex::over_group(module);
    if phi.degree() != 1 || !cx.is_cocycle(phi)? {
        return Err(Error::NotCocycle("expected a degree-1 cocycle".into()));
    }
    let mut set: Vec<usize> = sigma.to_vec();
    set.push(group.identity());
    set.sort_unstable();
    set.dedup();
    let s = uniform_average(group, &set)?;
    let phi_s = cx.linear_eval(phi, std::slice::from_ref(&s))?;
    let n = set.len() as f64;
    let shrink = shrinking_average(
        module,
        std::slice::from_ref(&s),
        None,
        std::slice::from_ref(&phi_s),
        eps / n,
        budget,
    )?;
    let x = cx.linear_eval(phi, std::slice::from_ref(&shrink.xi))?;
    let dx = cx.coboundary(&cx.cochain(0, x.clone())?)?;
    let mut residual_sum = vec![Q::zero(); module.dim()];
    for &g in &set {
        let diff = crate::rational::vec_sub(phi.value(&[g])?, dx.value(&[g])?);
        crate::rational::add_assign_scaled(&mut residual_sum, &diff, &Q::one());
    }
    let dx_sigma = cx.linear_eval(&dx, std::slice::from_ref(&s))?;
    let pxi = module.apply_algebra(&shrink.xi)?;
    let identity_holds = dx_sigma == crate::rational::vec_sub(&phi_s, &pxi.mul_vec(&phi_s));
    let bound = module.norm(&residual_sum);
    let certified_exact = module.p().is_two() && {
        let e = Q::from_float(eps).expect("finite epsilon");
        module.norm_sq_exact(&residual_sum).unwrap() < &e * &e
    };
    Ok(DecayResult {
        x,
        xi: shrink.xi,
        residual_sum,
        bound,
        certified_exact,
        identity_holds,
        steps: shrink.steps,
    })
}
