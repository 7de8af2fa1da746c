use cochain_lab::affine::{action_from_cocycle, cocycle_from_action, fixed_points};
use cochain_lab::algebra::{class_average, commutant_basis, GroupAlgebraElement};
use cochain_lab::cochain::{CochainComplex, Mode};
use cochain_lab::group::{
    f_conjugacy_classes, fc_data, subgroup_closure, word_lengths, GroupRef, Subgroup,
};
use cochain_lab::homotopy::{invert_one_minus, verify_homotopy_identity, InverseMethod};
use cochain_lab::linalg::{exact, QMatrix};
use cochain_lab::module::{BanachModule, NormParam};
use cochain_lab::rational::{q, qf, Q};
use cochain_lab::samples::{regular_modules, rotation_module, sample_groups};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn group(i: usize) -> GroupRef {
    sample_groups()[i % 8].1.clone()
}

fn module(i: usize, regular: bool) -> BanachModule {
    let (name, g) = sample_groups()[i % 8].clone();
    if regular {
        BanachModule::regular(&g, NormParam::two())
    } else {
        rotation_module(name, &NormParam::two()).unwrap()
    }
}

fn element(g: &GroupRef, coeffs: &[(usize, i64)]) -> GroupAlgebraElement {
    GroupAlgebraElement::new(g, coeffs.iter().map(|&(x, c)| (x % g.order(), q(c)))).unwrap()
}

/// A point of the simplex from nonnegative weights (falls back to the identity).
fn simplex(g: &GroupRef, weights: &[(usize, u8)]) -> GroupAlgebraElement {
    let total: i64 = weights.iter().map(|&(_, w)| w as i64).sum();
    if total == 0 {
        return GroupAlgebraElement::dirac(g, g.identity());
    }
    GroupAlgebraElement::new(
        g,
        weights
            .iter()
            .map(|&(x, w)| (x % g.order(), qf(w as i64, total))),
    )
    .unwrap()
}

/// A point of the affine space: coefficients summing to 1.
fn affine(g: &GroupRef, coeffs: &[(usize, i64)]) -> GroupAlgebraElement {
    let e = element(g, coeffs);
    let shift = Q::from_integer(1.into()) - e.augmentation();
    e.add(&GroupAlgebraElement::new(g, [(g.identity(), shift)]).unwrap())
        .unwrap()
}

fn terms() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..12, -4i64..5), 0..6)
}

fn weights() -> impl Strategy<Value = Vec<(usize, u8)>> {
    prop::collection::vec((0usize..12, 0u8..6), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_is_associative_and_distributive(gi in 0usize..8, a in terms(), b in terms(), c in terms()) {
        let g = group(gi);
        let (x, y, z) = (element(&g, &a), element(&g, &b), element(&g, &c));
        let left = x.convolve(&y).unwrap().convolve(&z).unwrap();
        let right = x.convolve(&y.convolve(&z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let dist = x.convolve(&y.add(&z).unwrap()).unwrap();
        prop_assert_eq!(dist, x.convolve(&y).unwrap().add(&x.convolve(&z).unwrap()).unwrap());
    }

    #[test]
    fn augmentation_is_multiplicative(gi in 0usize..8, a in terms(), b in terms()) {
        let g = group(gi);
        let (x, y) = (element(&g, &a), element(&g, &b));
        let direct: Q = g.elements().map(|h| x.convolve(&y).unwrap().coeff(h)).sum();
        prop_assert_eq!(direct, x.augmentation() * y.augmentation());
    }

    #[test]
    fn simplex_closed_under_products_and_mixtures(gi in 0usize..8, a in weights(), b in weights(), t in 0i64..=8) {
        let g = group(gi);
        let (x, y) = (simplex(&g, &a), simplex(&g, &b));
        prop_assert!(x.convolve(&y).unwrap().classify().in_simplex);
        let mix = x.scale(&qf(t, 8)).add(&y.scale(&qf(8 - t, 8))).unwrap();
        let c = mix.classify();
        prop_assert!(c.in_simplex && c.in_affine_space && !c.in_augmentation_ideal);
    }

    #[test]
    fn representation_is_an_algebra_homomorphism(gi in 0usize..8, regular: bool, a in terms(), b in terms()) {
        let m = module(gi, regular);
        let g = m.group().clone();
        let (x, y) = (element(&g, &a), element(&g, &b));
        let lhs = m.apply_algebra(&x.convolve(&y).unwrap()).unwrap();
        let rhs = m.apply_algebra(&x).unwrap().mul(&m.apply_algebra(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert!(m.apply_algebra(&GroupAlgebraElement::dirac(&g, g.identity())).unwrap().is_identity());
    }

    #[test]
    fn orbit_stabilizer_and_fc_closure(gi in 0usize..8, gens in prop::collection::vec(0usize..12, 0..3)) {
        let g = group(gi);
        let gens: Vec<usize> = gens.iter().map(|&x| x % g.order()).collect();
        let f = subgroup_closure(&g, &gens).unwrap();
        let cd = f_conjugacy_classes(&f);
        let fc = fc_data(&f).unwrap();
        for x in g.elements() {
            let class = &cd.classes()[cd.class_of(x)];
            let centralizer = f.elements().iter().filter(|&&y| g.mul(x, y) == g.mul(y, x)).count();
            prop_assert_eq!(class.len() * centralizer, f.order());
            prop_assert_eq!(fc.centralizer_indices[x], class.len());
            let orbit: std::collections::BTreeSet<usize> = f.elements().iter().map(|&y| g.conj(y, x)).collect();
            prop_assert_eq!(orbit.into_iter().collect::<Vec<_>>(), { let mut c = class.clone(); c.sort(); c });
        }
        for &a in fc.fc_subgroup.elements() {
            prop_assert!(fc.fc_subgroup.contains(g.inv(a)));
            for &b in fc.fc_subgroup.elements() {
                prop_assert!(fc.fc_subgroup.contains(g.mul(a, b)));
            }
        }
        let again = f_conjugacy_classes(&f);
        prop_assert_eq!(again.classes(), cd.classes());
    }

    #[test]
    fn word_length_triangle_inequality(gi in 0usize..8, sigma in prop::collection::vec(0usize..12, 1..3)) {
        let g = group(gi);
        let sigma: Vec<usize> = sigma.iter().map(|&x| x % g.order()).collect();
        let len = word_lengths(&g, &sigma);
        for a in g.elements() {
            for b in g.elements() {
                if let (Some(la), Some(lb)) = (len[a], len[b]) {
                    prop_assert!(len[g.mul(a, b)].unwrap() <= la + lb);
                }
            }
        }
    }

    #[test]
    fn commutant_elements_commute_with_f(gi in 0usize..8, gens in prop::collection::vec(0usize..12, 0..3)) {
        let g = group(gi);
        let gens: Vec<usize> = gens.iter().map(|&x| x % g.order()).collect();
        let f = subgroup_closure(&g, &gens).unwrap();
        let cb = commutant_basis(&f).unwrap();
        for b in &cb.basis {
            prop_assert!(f.elements().iter().all(|&x| b.commutes_with(x)));
        }
        for (i, a) in cb.basis.iter().enumerate() {
            for b in &cb.basis[i + 1..] {
                prop_assert!(a.support().iter().all(|x| !b.support().contains(x)));
            }
        }
    }

    #[test]
    fn decomposition_is_a_direct_sum(gi in 0usize..8, regular: bool, gens in prop::collection::vec(0usize..12, 0..3)) {
        let m = module(gi, regular);
        let g = m.group().clone();
        let gens: Vec<usize> = gens.iter().map(|&x| x % g.order()).collect();
        let h = subgroup_closure(&g, &gens).unwrap();
        let dec = m.invariants_and_decomposition(&h).unwrap();
        let d = m.dim();
        prop_assert_eq!(dec.projector.mul(&dec.projector), dec.projector.clone());
        prop_assert!(exact::same_span(&exact::column_space(&dec.projector), &dec.invariant_basis, d));
        prop_assert_eq!(dec.invariant_basis.len() + dec.complement_basis.len(), d);
        let mut all = dec.invariant_basis.clone();
        all.extend(dec.complement_basis.iter().cloned());
        prop_assert_eq!(exact::rank_of_vectors(&all, d), d);
        let acting: Vec<usize> = if h.is_normal() { g.elements().collect() } else { h.elements().to_vec() };
        for &x in &acting {
            for v in &dec.complement_basis {
                prop_assert!(exact::in_span(&dec.complement_basis, &m.act(x, v)));
            }
            for v in &dec.invariant_basis {
                prop_assert!(exact::in_span(&dec.invariant_basis, &m.act(x, v)));
            }
        }
    }

    #[test]
    fn coboundary_squares_to_zero(gi in 0usize..8, regular: bool, seed: u64) {
        let m = module(gi, regular);
        let cx = CochainComplex::over_group(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in 0..2 {
            let phi = cx.random(n, &mut rng, 5, 3).unwrap();
            prop_assert!(cx.coboundary(&cx.coboundary(&phi).unwrap()).unwrap().is_zero());
            let flat = cx.coboundary_matrix(n).unwrap().mul_vec(phi.values());
            let direct = cx.coboundary(&phi).unwrap();
            prop_assert_eq!(&flat[..], direct.values());
        }
    }

    #[test]
    fn extension_commutes_with_coboundary(gi in 0usize..8, seed: u64, a in terms(), b in terms()) {
        let m = module(gi, false);
        let g = m.group().clone();
        let cx = CochainComplex::over_group(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = cx.random(1, &mut rng, 5, 2).unwrap();
        let xis = [affine(&g, &a), affine(&g, &b)];
        let lhs = cx.affine_coboundary_eval(&phi, &xis).unwrap();
        let rhs = cx.multiaffine_eval(&cx.coboundary(&phi).unwrap(), &xis).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn commuting_simplex_pairs_satisfy_the_exchange_identity(gi in 0usize..8, regular: bool, seed: u64, a in weights(), b in weights()) {
        let m = module(gi, regular);
        let g = m.group().clone();
        let cx = CochainComplex::over_group(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Q> = cochain_lab::module::random_vector(&mut rng, m.dim(), 5, 1);
        let phi = cx.coboundary(&cx.cochain(0, x).unwrap()).unwrap();
        // class averages of G commute with everything
        let cd = f_conjugacy_classes(&Subgroup::whole(&g));
        let avg = |w: &[(usize, u8)]| -> GroupAlgebraElement {
            let mut acc = GroupAlgebraElement::zero(&g);
            let total: i64 = w.iter().map(|&(_, t)| t as i64 + 1).sum();
            for &(i, t) in w {
                let c = class_average(&cd, i % cd.classes().len()).unwrap();
                acc = acc.add(&c.scale(&qf(t as i64 + 1, total))).unwrap();
            }
            acc
        };
        let (xi, zeta) = (avg(&a), avg(&b));
        let one_minus = |e: &GroupAlgebraElement| QMatrix::identity(m.dim()).sub(&m.apply_algebra(e).unwrap());
        let lhs = one_minus(&zeta).mul_vec(&cx.multiaffine_eval(&phi, std::slice::from_ref(&xi)).unwrap());
        let rhs = one_minus(&xi).mul_vec(&cx.multiaffine_eval(&phi, std::slice::from_ref(&zeta)).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homotopy_identity_on_random_subgroups(gi in 0usize..8, regular: bool, gens in prop::collection::vec(0usize..12, 0..2), seed: u64) {
        let m = module(gi, regular);
        let g = m.group().clone();
        let gens: Vec<usize> = gens.iter().map(|&x| x % g.order()).collect();
        let f = subgroup_closure(&g, &gens).unwrap();
        let cd = f_conjugacy_classes(&f);
        let xi = class_average(&cd, (seed as usize) % cd.classes().len()).unwrap();
        let res = verify_homotopy_identity(&m, &xi, &f, &[0, 1], 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(res.iter().all(|r| r.zero_residual));
    }

    #[test]
    fn cocycle_and_action_correspond(gi in 0usize..8, regular: bool, seed: u64) {
        let m = module(gi, regular);
        let cx = CochainComplex::over_group(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Q> = cochain_lab::module::random_vector(&mut rng, m.dim(), 5, 2);
        let phi = cx.coboundary(&cx.cochain(0, x).unwrap()).unwrap();
        let alpha = action_from_cocycle(&m, &phi).unwrap();
        prop_assert_eq!(cocycle_from_action(&alpha).unwrap(), phi.clone());
        let report = fixed_points(&alpha).unwrap();
        let fixed = report.fixed.expect("coboundaries have fixed points");
        prop_assert!(report.barycenter_fixed);
        let g = m.group();
        for s in g.elements() {
            prop_assert_eq!(alpha.apply(s, &fixed.point), fixed.point.clone());
        }
        let inv = m.invariants(&Subgroup::whole(g)).len();
        prop_assert_eq!(fixed.directions.len(), inv);
    }
}

#[test]
fn group_axioms_on_samples() {
    for (name, g) in sample_groups() {
        let e = g.identity();
        for a in g.elements() {
            assert_eq!(g.mul(e, a), a, "{name}");
            assert_eq!(g.mul(a, e), a, "{name}");
            assert_eq!(g.mul(a, g.inv(a)), e, "{name}");
            for b in g.elements() {
                for c in g.elements() {
                    assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)), "{name}");
                }
            }
        }
    }
}

#[test]
fn float_and_exact_ranks_agree() {
    for s in regular_modules(&NormParam::two()).into_iter().take(6) {
        let cx = CochainComplex::over_group(&s.module);
        for n in 0..2 {
            let a = cx.cohomology(n, Mode::Exact, false).unwrap();
            let b = cx.cohomology(n, Mode::Float, false).unwrap();
            assert_eq!(
                (a.dim_z, a.dim_b),
                (b.dim_z, b.dim_b),
                "{} degree {n}",
                s.name
            );
        }
    }
}

#[test]
fn neumann_residuals_decrease() {
    for (name, g) in sample_groups() {
        let m = rotation_module(name, &NormParam::two()).unwrap();
        let all: Vec<usize> = g.elements().collect();
        let cd = f_conjugacy_classes(&Subgroup::whole(&g));
        // a non-uniform full-support element so the series does not stop after one term
        let mut xi = cochain_lab::algebra::uniform_average(&g, &all)
            .unwrap()
            .scale(&qf(1, 2));
        xi = xi
            .add(
                &class_average(&cd, cd.class_of(g.identity()))
                    .unwrap()
                    .scale(&qf(1, 2)),
            )
            .unwrap();
        let inv = invert_one_minus(
            &m,
            &xi,
            InverseMethod::Neumann {
                k_max: 60,
                tol: 1e-12,
            },
            1,
        )
        .unwrap();
        for w in inv.residuals.windows(2).skip(1) {
            assert!(w[1] <= w[0] + 1e-15, "{name}: {:?}", inv.residuals);
        }
        let exact_inv = invert_one_minus(&m, &xi, InverseMethod::Direct, 1)
            .unwrap()
            .exact
            .unwrap();
        let t = QMatrix::identity(m.dim()).sub(&m.apply_algebra(&xi).unwrap());
        assert!(t.mul(&exact_inv).is_identity());
    }
}
