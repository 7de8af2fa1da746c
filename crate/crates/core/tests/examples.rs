//! Worked examples checked against independent computations in this file.

use std::collections::{BTreeSet, HashSet, VecDeque};

use cochain_lab::affine::{
    action_from_cocycle, cocycle_from_action, fixed_points, guichardet_criterion,
    quotient_displacement_check,
};
use cochain_lab::algebra::{class_average, commutant_basis, uniform_average, GroupAlgebraElement};
use cochain_lab::approx::{generator_average_decay, shrinking_average, Budget};
use cochain_lab::cochain::{CochainComplex, Mode};
use cochain_lab::fp::{
    fp_almost_fixed_point, fp_cocycle_space, fp_fixed_points, FpModule, FpPresentation,
};
use cochain_lab::group::{
    f_conjugacy_classes, fc_data, subgroup_closure, word_length, FiniteGroup, Subgroup,
};
use cochain_lab::homotopy::{
    contracting_homotopy, find_contracting_pair, invert_one_minus, nowak_projection,
    restriction_nullifier, verify_homotopy_identity, InverseMethod,
};
use cochain_lab::linalg::{exact, QMatrix};
use cochain_lab::module::{convexity_modulus, random_vector, BanachModule, NormParam};
use cochain_lab::rational::{q, qf, Q};
use cochain_lab::samples::{rotation_module, s3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compose(g: &[usize], f: &[usize]) -> Vec<usize> {
    f.iter().map(|&i| g[i]).collect()
}

fn rotation_z4() -> BanachModule {
    rotation_module("Z4", &NormParam::two()).unwrap()
}

fn augmentation_part_z3() -> BanachModule {
    rotation_module("Z3", &NormParam::two()).unwrap()
}

fn three_cycle_subgroup() -> Subgroup {
    let g = s3();
    let c = g.elements().find(|&x| g.element_order(x) == 3).unwrap();
    subgroup_closure(&g, &[c]).unwrap()
}

fn involution_class_average(f: &Subgroup) -> GroupAlgebraElement {
    let g = f.group();
    let cd = f_conjugacy_classes(f);
    let id = (0..cd.classes().len())
        .find(|&i| g.element_order(cd.classes()[i][0]) == 2)
        .unwrap();
    class_average(&cd, id).unwrap()
}

#[test]
fn transposition_and_three_cycle_generate_order_six() {
    let gens = [vec![1, 0, 2], vec![1, 2, 0]];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([vec![0, 1, 2]]);
    let mut queue = VecDeque::from([vec![0, 1, 2]]);
    while let Some(p) = queue.pop_front() {
        for s in &gens {
            let r = compose(s, &p);
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    let g = FiniteGroup::from_permutations(3, &gens, 64).unwrap();
    assert_eq!(g.order(), seen.len());
    assert_eq!(g.order(), 6);
    assert_eq!(three_cycle_subgroup().order(), 3);
}

#[test]
fn conjugacy_classes_by_brute_force() {
    let g = s3();
    let oracle = |f: &Subgroup| -> BTreeSet<BTreeSet<usize>> {
        g.elements()
            .map(|x| {
                f.elements()
                    .iter()
                    .map(|&y| g.mul(g.mul(y, x), g.inv(y)))
                    .collect()
            })
            .collect()
    };
    let whole = Subgroup::whole(&g);
    let cd = f_conjugacy_classes(&whole);
    let got: BTreeSet<BTreeSet<usize>> = cd
        .classes()
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    assert_eq!(got, oracle(&whole));
    let mut sizes = cd.sizes();
    sizes.sort();
    assert_eq!(sizes, vec![1, 2, 3]);

    let a3 = three_cycle_subgroup();
    let cd = f_conjugacy_classes(&a3);
    let got: BTreeSet<BTreeSet<usize>> = cd
        .classes()
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    assert_eq!(got, oracle(&a3));
    let mut sizes = cd.sizes();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 1, 3]);
    let big = cd.classes().iter().find(|c| c.len() == 3).unwrap();
    assert!(big.iter().all(|&x| g.element_order(x) == 2));

    let fc = fc_data(&whole).unwrap();
    let inv = g.elements().find(|&x| g.element_order(x) == 2).unwrap();
    assert_eq!(fc.centralizer_indices[inv], 3);
}

#[test]
fn word_length_in_z5_by_bfs() {
    let table: Vec<Vec<usize>> = (0..5)
        .map(|a| (0..5).map(|b| (a + b) % 5).collect())
        .collect();
    let g = FiniteGroup::from_table(&table, 64).unwrap();
    // oracle: smallest k with 2 a sum of k terms from {1, 4}
    let reach = |k: usize| (0..=k).any(|i| (i + 4 * (k - i)) % 5 == 2);
    let expected = (0..).find(|&k| reach(k)).unwrap();
    assert_eq!(word_length(&g, &[1, 4], 2).unwrap(), expected);
    assert_eq!(expected, 2);
}

#[test]
fn class_averages_are_conjugation_invariant() {
    let g = s3();
    let whole = Subgroup::whole(&g);
    let cd = f_conjugacy_classes(&whole);
    for i in 0..cd.classes().len() {
        let b = class_average(&cd, i).unwrap();
        for f in g.elements() {
            let conj = GroupAlgebraElement::dirac(&g, f)
                .convolve(&b)
                .unwrap()
                .convolve(&GroupAlgebraElement::dirac(&g, g.inv(f)))
                .unwrap();
            assert_eq!(conj, b);
        }
    }
    assert_eq!(commutant_basis(&whole).unwrap().basis.len(), 3);
}

#[test]
fn uniform_average_of_z3() {
    let g = FiniteGroup::cyclic(3);
    let u = uniform_average(&g, &[0, 1, 2]).unwrap();
    assert_eq!(u.convolve(&u).unwrap(), u);
    let m = BanachModule::regular(&g, NormParam::two());
    let ones = QMatrix::from_rows(vec![vec![qf(1, 3); 3]; 3]);
    let sum = (0..3).fold(QMatrix::zeros(3, 3), |acc, x| acc.add(m.matrix(x)));
    assert_eq!(sum.scale(&qf(1, 3)), ones);
    assert_eq!(m.apply_algebra(&u).unwrap(), ones);
}

#[test]
fn isometry_acceptance() {
    let r = rotation_z4();
    assert!(r.matrix(1).pow(4).is_identity());
    let z2 = FiniteGroup::cyclic(2);
    let shear = QMatrix::from_i64(&[&[1, 1], &[0, -1]]);
    // the image of e2 has norm sqrt(2)
    assert_eq!(shear.column(1), vec![q(1), q(-1)]);
    assert!(BanachModule::from_generator_matrices(&z2, &[(1, shear)], NormParam::two()).is_err());
}

#[test]
fn rotation_has_no_invariants_and_zero_average() {
    let m = rotation_z4();
    let whole = Subgroup::whole(m.group());
    let dec = m.invariants_and_decomposition(&whole).unwrap();
    assert!(dec.invariant_basis.is_empty());
    assert!(dec.projector.is_zero());
    let report = m.almost_invariant_check(&whole, 1).unwrap();
    assert!(!report.has_invariant_unit);
    assert_eq!(report.norm_bound, Some(0.0));
}

#[test]
fn half_sum_norms_on_regular_z2() {
    let g = FiniteGroup::cyclic(2);
    let m = BanachModule::regular(&g, NormParam::two());
    let half = GroupAlgebraElement::new(&g, [(0, qf(1, 2)), (1, qf(1, 2))]).unwrap();
    let a = m.apply_algebra(&half).unwrap();
    let b = m.operator_norm_of(&a, 3);
    assert!((b.upper - 1.0).abs() < 1e-12 && (b.lower - 1.0).abs() < 1e-12);
    // on X_G = span(1, -1) the half sum vanishes
    assert_eq!(a.mul_vec(&[q(1), q(-1)]), vec![q(0), q(0)]);
    let quotient = m.quotient_module(&Subgroup::whole(&g)).unwrap();
    let x = [q(1), q(0)];
    assert!((quotient.norm(&x) - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn convexity_modulus_of_the_euclidean_plane() {
    let r = convexity_modulus(&NormParam::two(), 1.0, 2, 5).unwrap();
    let closed = 1.0 - 3f64.sqrt() / 2.0;
    assert!(
        (r.delta_estimate - closed).abs() < 1e-6,
        "{}",
        r.delta_estimate
    );
    let flat = convexity_modulus(&NormParam::Finite(q(1)), 1.0, 2, 5).unwrap();
    assert!(flat.delta_estimate.abs() < 1e-9);
}

#[test]
fn coboundary_matrix_of_regular_z2_in_degree_zero() {
    let m = BanachModule::regular(&FiniteGroup::cyclic(2), NormParam::two());
    let cx = CochainComplex::over_group(&m);
    let d0 = cx.coboundary_matrix(0).unwrap().to_dense();
    // rows for g = e vanish, rows for the swap are I − swap
    let expected = QMatrix::from_i64(&[&[0, 0], &[0, 0], &[1, -1], &[-1, 1]]);
    assert_eq!(d0, expected);
}

#[test]
fn consecutive_coboundary_matrices_compose_to_zero_on_z3() {
    let m = BanachModule::regular(&FiniteGroup::cyclic(3), NormParam::two());
    let cx = CochainComplex::over_group(&m);
    for n in 0..=2 {
        let a = cx.coboundary_matrix(n).unwrap();
        let b = cx.coboundary_matrix(n + 1).unwrap();
        assert!(b.mul(&a).is_zero(), "degree {n}");
    }
}

#[test]
fn trivial_coefficients_on_cyclic_groups() {
    for m in 2..=6 {
        let g = FiniteGroup::cyclic(m);
        let module = BanachModule::trivial(&g, 1, NormParam::two());
        let cx = CochainComplex::over_group(&module);
        // oracle: solve φ(a + b) = φ(a) + φ(b) over the unknowns φ(0), ..., φ(m − 1)
        let mut rows = Vec::new();
        for a in 0..m {
            for b in 0..m {
                let mut row = vec![q(0); m];
                row[(a + b) % m] += q(1);
                row[a] -= q(1);
                row[b] -= q(1);
                rows.push(row);
            }
        }
        let homs = exact::kernel(&QMatrix::from_rows(rows)).len();
        let h = cx.cohomology(1, Mode::Exact, false).unwrap();
        assert_eq!(h.dim_z, homs, "Z/{m}");
        assert_eq!((h.dim_z, h.dim_h), (0, 0), "Z/{m}");
    }
    let reg = BanachModule::regular(&FiniteGroup::cyclic(2), NormParam::two());
    let cx = CochainComplex::over_group(&reg);
    for n in 1..=2 {
        assert_eq!(cx.cohomology(n, Mode::Exact, false).unwrap().dim_h, 0);
    }
}

#[test]
fn restriction_commutes_with_coboundary() {
    let m = rotation_module("S3", &NormParam::two()).unwrap();
    let g_cx = CochainComplex::over_group(&m);
    let f_cx = CochainComplex::new(&m, &three_cycle_subgroup()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..2 {
        let phi = g_cx.random(n, &mut rng, 4, 3).unwrap();
        let lhs = f_cx
            .coboundary(&g_cx.restrict(&phi, &f_cx).unwrap())
            .unwrap();
        let rhs = g_cx
            .restrict(&g_cx.coboundary(&phi).unwrap(), &f_cx)
            .unwrap();
        assert_eq!(lhs, rhs);
        let cocycle = g_cx.coboundary(&phi).unwrap();
        assert!(f_cx
            .is_cocycle(&g_cx.restrict(&cocycle, &f_cx).unwrap())
            .unwrap());
    }
}

#[test]
fn inverse_and_projection_on_rotation() {
    let m = rotation_z4();
    let xi = uniform_average(m.group(), &[0, 1, 2, 3]).unwrap();
    let inv = invert_one_minus(&m, &xi, InverseMethod::Direct, 0).unwrap();
    assert!(inv.exact.unwrap().is_identity());
    let rep = nowak_projection(&m, &xi).unwrap();
    assert_eq!((rep.dim_c, rep.dim_b, rep.dim_ker_r), (8, 2, 6));
    assert!(rep.passed());
    let cx = CochainComplex::over_group(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_vector(&mut rng, 2, 9, 4);
    let dx = cx.coboundary(&cx.cochain(0, x).unwrap()).unwrap();
    assert_eq!(rep.projector.mul_vec(dx.values()), dx.values().to_vec());

    let zg = augmentation_part_z3();
    let half = GroupAlgebraElement::new(zg.group(), [(0, qf(1, 2)), (1, qf(1, 2))]).unwrap();
    assert!(invert_one_minus(&zg, &half, InverseMethod::Direct, 0)
        .unwrap()
        .exact
        .is_some());
}

#[test]
fn homotopy_identity_on_s3_over_the_three_cycles() {
    let a3 = three_cycle_subgroup();
    let xi = involution_class_average(&a3);
    for m in [
        rotation_module("S3", &NormParam::two()).unwrap(),
        BanachModule::regular(&s3(), NormParam::two()),
    ] {
        let res = verify_homotopy_identity(
            &m,
            &xi,
            &a3,
            &[0, 1, 2],
            20,
            &mut ChaCha8Rng::seed_from_u64(4),
        )
        .unwrap();
        assert!(res.iter().all(|r| r.zero_residual && r.samples == 20));
    }
}

#[test]
fn contracting_homotopy_on_the_augmentation_part_of_z3() {
    let m = augmentation_part_z3();
    let xi = uniform_average(m.group(), &[0, 1, 2]).unwrap();
    let ch = contracting_homotopy(&m, &xi, 3).unwrap();
    assert!(ch.all_hold());
    let cx = CochainComplex::over_group(&m);
    for n in 0..=3 {
        assert_eq!(cx.cohomology(n, Mode::Exact, false).unwrap().dim_h, 0);
    }
    let trivial = BanachModule::trivial(m.group(), 1, NormParam::two());
    assert!(contracting_homotopy(&trivial, &xi, 1).is_err());
}

#[test]
fn contracting_pair_for_s3_over_three_cycles() {
    let m = rotation_module("S3", &NormParam::two()).unwrap();
    let pair = find_contracting_pair(&m, &three_cycle_subgroup(), 1).unwrap();
    assert!(pair.norm_bound < 1.0 && pair.certified_exact);
    // independent check: I − π(ξζ) is invertible
    let prod = pair.xi.convolve(&pair.zeta).unwrap();
    let t = QMatrix::identity(m.dim()).sub(&m.apply_algebra(&prod).unwrap());
    assert!(exact::inverse(&t).is_some());
}

#[test]
fn nullifier_matches_the_linear_solve() {
    let m = rotation_module("D4", &NormParam::two()).unwrap();
    let g = m.group().clone();
    let cx = CochainComplex::over_group(&m);
    let whole = Subgroup::whole(&g);
    let xi = uniform_average(&g, &g.elements().collect::<Vec<_>>()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_vector(&mut rng, m.dim(), 7, 3);
    let phi = cx.coboundary(&cx.cochain(0, x).unwrap()).unwrap();
    let psi = restriction_nullifier(&m, &phi, &whole, &xi).unwrap();
    let d0 = cx.coboundary_matrix(0).unwrap().to_dense();
    let (solution, kernel) = exact::solve(&d0, phi.values()).unwrap();
    assert!(kernel.is_empty());
    assert_eq!(psi.values(), &solution[..]);

    let z3 = augmentation_part_z3();
    let cx = CochainComplex::over_group(&z3);
    let chi = cx.random(1, &mut rng, 5, 2).unwrap();
    let phi2 = cx.coboundary(&chi).unwrap();
    let xi3 = uniform_average(z3.group(), &[0, 1, 2]).unwrap();
    let psi2 = restriction_nullifier(&z3, &phi2, &Subgroup::whole(z3.group()), &xi3).unwrap();
    assert_eq!(cx.coboundary(&psi2).unwrap(), phi2);
}

#[test]
fn shrinking_three_vectors_and_averaging_decay() {
    let m = rotation_z4();
    let g = m.group().clone();
    let half = GroupAlgebraElement::new(&g, [(0, qf(1, 2)), (1, qf(1, 2))]).unwrap();
    let targets = vec![vec![q(1), q(0)], vec![q(3), q(-2)], vec![qf(1, 2), q(5)]];
    let eps = 1e-6;
    let r =
        shrinking_average(&m, std::slice::from_ref(&half), None, &targets, eps, &Budget::default()).unwrap();
    let a = m.apply_algebra(&r.xi).unwrap();
    for t in &targets {
        assert!(m.norm(&a.mul_vec(t)) < eps);
    }

    // single-letter words only: the composite is a power of a map of norm 1/sqrt(2)
    let budget = Budget {
        max_word_len: 1,
        ..Budget::default()
    };
    let r = shrinking_average(&m, &[half], None, &targets, eps, &budget).unwrap();
    let expected = targets
        .iter()
        .map(|t| (2.0 * (m.norm(t) / eps).ln() / 2f64.ln()).floor() as usize + 1)
        .max()
        .unwrap();
    assert_eq!(r.steps, expected);
    let a = m.apply_algebra(&r.xi).unwrap();
    assert!(targets.iter().all(|t| m.norm(&a.mul_vec(t)) < eps));

    let cx = CochainComplex::over_group(&m);
    let phi = cx
        .coboundary(&cx.cochain(0, vec![q(2), q(1)]).unwrap())
        .unwrap();
    let d = generator_average_decay(&m, &phi, &[0, 1, 2, 3], eps, &Budget::default()).unwrap();
    assert_eq!(d.bound, 0.0);
    assert!(d.identity_holds);
}

#[test]
fn affine_round_trip_and_unique_fixed_points() {
    let m = rotation_z4();
    let cx = CochainComplex::over_group(&m);
    let basis = cx
        .cohomology(1, Mode::Exact, true)
        .unwrap()
        .basis_z
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let c = random_vector(&mut rng, basis.len(), 6, 5);
        let mut v = vec![q(0); cx.flat_len(1).unwrap()];
        for (ci, b) in c.iter().zip(&basis) {
            for (o, x) in v.iter_mut().zip(b) {
                *o += ci * x;
            }
        }
        let phi = cx.cochain(1, v).unwrap();
        let alpha = action_from_cocycle(&m, &phi).unwrap();
        assert_eq!(cocycle_from_action(&alpha).unwrap(), phi);
        let report = fixed_points(&alpha).unwrap();
        assert!(report.unique());
        // oracle: (I − R) x = φ(r) for the rotation r
        let t = QMatrix::identity(2).sub(m.matrix(1));
        let x = exact::solve(&t, phi.value(&[1]).unwrap()).unwrap().0;
        assert_eq!(report.fixed.unwrap().point, x);
    }
}

#[test]
fn presented_groups_hand_values() {
    let free = FpPresentation::parse(&["a", "b"], &[] as &[&str]).unwrap();
    let s = fp_cocycle_space(&FpModule::trivial(&free, 1, NormParam::two()).unwrap());
    assert_eq!((s.dim_z, s.dim_b, s.dim_h), (2, 0, 2));

    let z2 = FpPresentation::parse(&["a", "b"], &["abAB"]).unwrap();
    assert_eq!(
        fp_cocycle_space(&FpModule::trivial(&z2, 1, NormParam::two()).unwrap()).dim_h,
        2
    );

    let z = FpPresentation::parse(&["a"], &[] as &[&str]).unwrap();
    let rot = FpModule::new(
        &z,
        vec![QMatrix::from_i64(&[&[0, -1], &[1, 0]])],
        NormParam::two(),
    )
    .unwrap();
    assert_eq!(fp_cocycle_space(&rot).dim_h, 0);
    let v = vec![vec![q(3), q(-1)]];
    let fixed = fp_fixed_points(&rot, &v).unwrap().unwrap();
    assert!(fixed.directions.is_empty());
    let moved = rot.generator_matrix(0).mul_vec(&fixed.point);
    assert_eq!(
        moved
            .iter()
            .zip(&v[0])
            .map(|(a, b)| a + b)
            .collect::<Vec<Q>>(),
        fixed.point
    );
}

#[test]
fn translation_displacement_scales() {
    let z = FpPresentation::parse(&["a"], &[] as &[&str]).unwrap();
    let m = FpModule::trivial(&z, 1, NormParam::two()).unwrap();
    assert!(fp_fixed_points(&m, &[vec![q(1)]]).unwrap().is_none());
    for t in [1i64, 3, -2] {
        let r = fp_almost_fixed_point(&m, &[vec![q(t)]], 1e-6, 9).unwrap();
        assert!((r.value - t.abs() as f64).abs() < 1e-6, "{t}: {}", r.value);
        assert!(!r.below_eps);
    }
}

#[test]
fn quotient_displacement_and_guichardet_examples() {
    let reg2 = BanachModule::regular(&FiniteGroup::cyclic(2), NormParam::two());
    let x = [q(1), q(0)];
    let y: Vec<Q> = x.iter().zip(reg2.act(1, &x)).map(|(a, b)| a - b).collect();
    assert!((reg2.norm(&y) - 2f64.sqrt()).abs() < 1e-12);
    let quotient = reg2
        .quotient_module(&Subgroup::whole(reg2.group()))
        .unwrap();
    assert!((quotient.norm(&y) - 2f64.sqrt()).abs() < 1e-12);
    let report =
        quotient_displacement_check(&reg2, 200, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!(report.passed() && report.exact);

    let reg3 = BanachModule::regular(&FiniteGroup::cyclic(3), NormParam::two());
    let trivial = BanachModule::trivial(&FiniteGroup::cyclic(3), 2, NormParam::two());
    for m in [reg3, rotation_z4(), trivial] {
        let gc = guichardet_criterion(&m, 0).unwrap();
        assert!(gc.passed());
        assert_eq!(gc.averaging_bound, 0.0);
    }
}
