//! Small groups and modules used by the verification suites.

use crate::error::Result;
use crate::fp::{FpModule, FpPresentation};
use crate::group::{FiniteGroup, GroupRef, Subgroup, DEFAULT_ORDER_CAP};
use crate::linalg::QMatrix;
use crate::module::{permutation_matrix, BanachModule, NormParam};
use crate::rational::q;

pub fn cyclic(n: usize) -> GroupRef {
    FiniteGroup::cyclic(n)
}

pub fn klein() -> GroupRef {
    let z2 = cyclic(2);
    FiniteGroup::direct_product(&z2, &z2, DEFAULT_ORDER_CAP).expect("order 4")
}

/// Symmetric group on three points.
pub fn s3() -> GroupRef {
    FiniteGroup::from_permutations(3, &[vec![1, 0, 2], vec![1, 2, 0]], DEFAULT_ORDER_CAP)
        .expect("order 6")
}

/// Symmetries of the square acting on its vertices `0..4` in cyclic order.
pub fn d4() -> GroupRef {
    FiniteGroup::from_permutations(4, &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]], DEFAULT_ORDER_CAP)
        .expect("order 8")
}

/// Rotations of the tetrahedron as signed permutations of `±e_i` in ℝ³,
/// point `2i` being `e_i` and `2i+1` being `−e_i`.
pub fn a4() -> GroupRef {
    FiniteGroup::from_permutations(
        6,
        &[vec![0, 1, 3, 2, 5, 4], vec![2, 3, 4, 5, 0, 1]],
        DEFAULT_ORDER_CAP,
    )
    .expect("order 12")
}

/// The eight sample groups of order at most 12.
pub fn sample_groups() -> Vec<(&'static str, GroupRef)> {
    vec![
        ("Z2", cyclic(2)),
        ("Z3", cyclic(3)),
        ("Z4", cyclic(4)),
        ("Z2xZ2", klein()),
        ("S3", s3()),
        ("Z6", cyclic(6)),
        ("D4", d4()),
        ("A4", a4()),
    ]
}

/// Matrix of a permutation of the `2d` points `±e_i`.
pub fn signed_point_matrix(perm: &[usize]) -> QMatrix {
    let d = perm.len() / 2;
    let mut m = QMatrix::zeros(d, d);
    for i in 0..d {
        let image = perm[2 * i];
        m[(image / 2, i)] = if image.is_multiple_of(2) { q(1) } else { q(-1) };
    }
    m
}

fn rotation() -> QMatrix {
    QMatrix::from_i64(&[&[0, -1], &[1, 0]])
}

fn sign(perm: &[usize]) -> i64 {
    let mut seen = vec![false; perm.len()];
    let mut s = 1;
    for i in 0..perm.len() {
        if !seen[i] {
            let mut len = 0;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = perm[j];
                len += 1;
            }
            if len % 2 == 0 {
                s = -s;
            }
        }
    }
    s
}

fn perms(g: &GroupRef) -> &[Vec<usize>] {
    g.permutations().expect("permutation group")
}

fn element_matrices(g: &GroupRef, f: impl Fn(usize) -> QMatrix, p: &NormParam) -> BanachModule {
    BanachModule::from_element_matrices(g, g.elements().map(f).collect(), p.clone())
        .expect("sample module is valid")
}

/// A representation without nonzero invariant vectors, by isometries for every `p`
/// except the embedded ℤ/3 example.
pub fn rotation_module(name: &str, p: &NormParam) -> Option<BanachModule> {
    let m = match name {
        "Z2" => element_matrices(
            &cyclic(2),
            |g| QMatrix::from_i64(&[&[if g == 0 { 1 } else { -1 }]]),
            p,
        ),
        "Z3" => {
            let reg = BanachModule::regular(&cyclic(3), p.clone());
            reg.submodule(&[vec![q(1), q(-1), q(0)], vec![q(0), q(1), q(-1)]])
                .expect("augmentation submodule")
        }
        "Z4" => element_matrices(&cyclic(4), |g| rotation().pow(g), p),
        "Z2xZ2" => element_matrices(
            &klein(),
            |g| {
                let s = |b: usize| if b == 0 { 1 } else { -1 };
                QMatrix::from_i64(&[&[s(g / 2), 0], &[0, s(g % 2)]])
            },
            p,
        ),
        "S3" => {
            let g = s3();
            let ps = perms(&g).to_vec();
            element_matrices(
                &g,
                |x| permutation_matrix(&ps[x]).unwrap().scale(&q(sign(&ps[x]))),
                p,
            )
        }
        "Z6" => {
            let c = permutation_matrix(&[1, 2, 0]).unwrap().scale(&q(-1));
            element_matrices(&cyclic(6), |g| c.pow(g), p)
        }
        "D4" => {
            let g = d4();
            let ps = perms(&g).to_vec();
            let vertex = |v: usize| [(1, 0), (0, 1), (-1, 0), (0, -1)][v];
            element_matrices(
                &g,
                |x| {
                    let (a, b) = vertex(ps[x][0]);
                    let (c, d) = vertex(ps[x][1]);
                    QMatrix::from_i64(&[&[a, c], &[b, d]])
                },
                p,
            )
        }
        "A4" => {
            let g = a4();
            let ps = perms(&g).to_vec();
            element_matrices(&g, |x| signed_point_matrix(&ps[x]), p)
        }
        _ => return None,
    };
    Some(m)
}

#[derive(Clone, Debug)]
pub struct SampleModule {
    pub name: String,
    pub module: BanachModule,
}

/// Regular modules of all sample groups.
pub fn regular_modules(p: &NormParam) -> Vec<SampleModule> {
    sample_groups()
        .into_iter()
        .map(|(n, g)| SampleModule {
            name: format!("{n}-regular"),
            module: BanachModule::regular(&g, p.clone()),
        })
        .collect()
}

/// Rotation-type modules of all sample groups; each has no nonzero invariants.
pub fn rotation_modules(p: &NormParam) -> Vec<SampleModule> {
    sample_groups()
        .into_iter()
        .map(|(n, _)| SampleModule {
            name: format!("{n}-rotation"),
            module: rotation_module(n, p).unwrap(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ProductSample {
    pub name: String,
    pub module: BanachModule,
    pub left: Subgroup,
    pub right: Subgroup,
}

fn factor(g: &GroupRef, nb: usize, left: bool) -> Subgroup {
    let elems: Vec<usize> = g
        .elements()
        .filter(|&x| if left { x % nb == 0 } else { x / nb == 0 })
        .collect();
    Subgroup::from_elements(g, &elems).expect("factor subgroup")
}

/// Direct products `F × G` acting with no invariants for either factor.
pub fn product_samples(p: &NormParam) -> Vec<ProductSample> {
    let mut out = Vec::new();
    let mut push = |name: &str, a: &GroupRef, b: &GroupRef, f: &dyn Fn(usize, usize) -> QMatrix| {
        let g = FiniteGroup::direct_product(a, b, DEFAULT_ORDER_CAP).unwrap();
        let nb = b.order();
        let module = element_matrices(&g, |x| f(x / nb, x % nb), p);
        out.push(ProductSample {
            name: name.to_string(),
            left: factor(&g, nb, false),
            right: factor(&g, nb, true),
            module,
        });
    };
    let sgn = |a: usize| if a == 0 { 1 } else { -1 };
    push("Z2xZ4", &cyclic(2), &cyclic(4), &|a, b| {
        rotation().pow(b).scale(&q(sgn(a)))
    });
    push("Z2xZ2-line", &cyclic(2), &cyclic(2), &|a, b| {
        QMatrix::from_i64(&[&[sgn(a) * sgn(b)]])
    });
    push("Z4xZ4", &cyclic(4), &cyclic(4), &|a, b| {
        rotation().pow(a + b)
    });
    let s = s3();
    let ps = perms(&s).to_vec();
    push("Z2xS3", &cyclic(2), &s, &|a, b| {
        permutation_matrix(&ps[b])
            .unwrap()
            .scale(&q(sgn(a) * sign(&ps[b])))
    });
    out
}

/// A finite sample group together with a presentation and the element of each generator.
#[derive(Clone, Debug)]
pub struct FpSample {
    pub name: String,
    pub presentation: FpPresentation,
    pub group: GroupRef,
    pub generator_elements: Vec<usize>,
}

impl FpSample {
    pub fn fp_module(&self, m: &BanachModule) -> Result<FpModule> {
        let mats = self
            .generator_elements
            .iter()
            .map(|&g| m.matrix(g).clone())
            .collect();
        match m.embedding() {
            Some(e) => FpModule::embedded(&self.presentation, mats, e.clone(), m.p().clone()),
            None => FpModule::new(&self.presentation, mats, m.p().clone()),
        }
    }
}

/// `⟨a | a^m⟩` for the sample cyclic groups and `⟨a, b | a², b², abAB⟩` for ℤ/2 × ℤ/2.
pub fn fp_samples() -> Vec<FpSample> {
    let mut out: Vec<FpSample> = [2usize, 3, 4, 6]
        .iter()
        .map(|&m| FpSample {
            name: format!("Z{m}"),
            presentation: FpPresentation::parse(&["a".to_string()], &["a".repeat(m)]).unwrap(),
            group: cyclic(m),
            generator_elements: vec![1],
        })
        .collect();
    out.push(FpSample {
        name: "Z2xZ2".into(),
        presentation: FpPresentation::parse(&["a", "b"], &["aa", "bb", "abAB"]).unwrap(),
        group: klein(),
        generator_elements: vec![2, 1],
    });
    out
}
