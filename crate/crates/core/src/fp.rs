//! Degree-1 cohomology of finitely presented groups by relator evaluation.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::affine::{
    minimize_displacement, solve_fixed, AlmostFixedReport, FixedSet, DESCENT_ITERS, RESTARTS,
};
use crate::approx::NormModel;
use crate::error::{Error, Result};
use crate::linalg::{exact, QMatrix};
use crate::module::{Embedding, NormParam};
use crate::rational::{vec_to_f64, Q};

/// A letter: generator index and whether it is inverted.
pub type Letter = (usize, bool);

#[derive(Clone, Debug, PartialEq)]
pub struct FpPresentation {
    generators: Vec<char>,
    relators: Vec<Vec<Letter>>,
}

fn free_reduce(word: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in word {
        match out.last() {
            Some(&(g, inv)) if g == l.0 && inv != l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

impl FpPresentation {
    /// Generators are single lowercase letters; in relators a capital letter is the inverse.
    pub fn parse<S: AsRef<str>>(generators: &[S], relators: &[S]) -> Result<Self> {
        let mut gens = Vec::new();
        for g in generators {
            let mut chars = g.as_ref().chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => {
                    if gens.contains(&c) {
                        return Err(Error::InvalidPresentation(format!(
                            "duplicate generator {c}"
                        )));
                    }
                    gens.push(c);
                }
                _ => {
                    return Err(Error::InvalidPresentation(format!(
                        "generator {:?} is not a single lowercase letter",
                        g.as_ref()
                    )))
                }
            }
        }
        let mut rels = Vec::new();
        for r in relators {
            let word = r
                .as_ref()
                .chars()
                .map(|c| {
                    let lower = c.to_ascii_lowercase();
                    gens.iter()
                        .position(|&g| g == lower)
                        .map(|i| (i, c.is_ascii_uppercase()))
                        .ok_or_else(|| {
                            Error::InvalidPresentation(format!(
                                "unknown symbol {c} in relator {}",
                                r.as_ref()
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            let reduced = free_reduce(&word);
            if !reduced.is_empty() {
                rels.push(reduced);
            }
        }
        Ok(FpPresentation {
            generators: gens,
            relators: rels,
        })
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn relators(&self) -> &[Vec<Letter>] {
        &self.relators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Relator exponent sums, one row per relator.
    pub fn exponent_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; self.rank()];
                for &(g, inv) in r {
                    row[g] += if inv { -1 } else { 1 };
                }
                row
            })
            .collect()
    }

    pub fn word_to_string(&self, word: &[Letter]) -> String {
        word.iter()
            .map(|&(g, inv)| {
                if inv {
                    self.generators[g].to_ascii_uppercase()
                } else {
                    self.generators[g]
                }
            })
            .collect()
    }
}

/// Invariant factors of an integer matrix (nonzero diagonal of its Smith normal form).
pub fn smith_invariants(rows: &[Vec<i64>], ncols: usize) -> Vec<BigInt> {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let nrows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < nrows.min(ncols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if !m[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..nrows {
                let q = m[i][t].div_floor(&m[t][t]);
                if !q.is_zero() {
                    for j in t..ncols {
                        let v = &q * &m[t][j];
                        m[i][j] -= v;
                    }
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..ncols {
                let q = m[t][j].div_floor(&m[t][t]);
                if !q.is_zero() {
                    for i in t..nrows {
                        let v = &q * &m[i][t];
                        m[i][j] -= v;
                    }
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // divisibility condition on the remaining block
                let bad = (t + 1..nrows)
                    .flat_map(|i| (t + 1..ncols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&m[i][j] % &m[t][t]).is_zero());
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..ncols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                    }
                }
            } else {
                // move the smallest remaining entry of row/column t to the pivot
                let mut best = (t, t);
                for i in t..nrows {
                    if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..ncols {
                    if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.1 == t {
                    m.swap(t, best.0);
                } else {
                    for row in m.iter_mut() {
                        row.swap(t, best.1);
                    }
                }
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

#[derive(Clone, Debug, PartialEq)]
pub struct Abelianization {
    pub free_rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
}

pub fn abelianization(pres: &FpPresentation) -> Abelianization {
    let inv = smith_invariants(&pres.exponent_matrix(), pres.rank());
    Abelianization {
        free_rank: pres.rank() - inv.len(),
        torsion: inv.into_iter().filter(|d| d > &BigInt::one()).collect(),
    }
}

/// Generator matrices for a presentation, with relators acting trivially.
#[derive(Clone, Debug)]
pub struct FpModule {
    presentation: FpPresentation,
    dim: usize,
    gens: Vec<QMatrix>,
    inverses: Vec<QMatrix>,
    p: NormParam,
    embedding: Option<Embedding>,
}

impl FpModule {
    pub fn new(presentation: &FpPresentation, gens: Vec<QMatrix>, p: NormParam) -> Result<Self> {
        Self::build(presentation, gens, p, None)
    }

    /// Generators acting on a subspace with coordinates in `embedding.basis`;
    /// the norm is the ambient one.
    pub fn embedded(
        presentation: &FpPresentation,
        gens: Vec<QMatrix>,
        embedding: Embedding,
        p: NormParam,
    ) -> Result<Self> {
        if embedding.basis.cols() != embedding.gram.rows() {
            return Err(Error::InvalidRepresentation(
                "embedding basis and gram sizes differ".into(),
            ));
        }
        Self::build(presentation, gens, p, Some(embedding))
    }

    fn build(
        presentation: &FpPresentation,
        gens: Vec<QMatrix>,
        p: NormParam,
        embedding: Option<Embedding>,
    ) -> Result<Self> {
        if gens.len() != presentation.rank() {
            return Err(Error::InvalidRepresentation(format!(
                "{} matrices for {} generators",
                gens.len(),
                presentation.rank()
            )));
        }
        let dim = gens.first().map_or(0, QMatrix::rows);
        let mut inverses = Vec::new();
        for (i, a) in gens.iter().enumerate() {
            if !a.is_square() || a.rows() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "generator {i} matrix has the wrong shape"
                )));
            }
            let isometric = match (&embedding, p.is_two()) {
                (None, true) => a.transpose().mul(a).is_identity(),
                (None, false) => a.is_signed_permutation(),
                (Some(e), true) => a.transpose().mul(&e.gram).mul(a) == e.gram,
                (Some(_), false) => true,
            };
            if !isometric {
                return Err(Error::NotIsometric {
                    element: i,
                    p: p.to_string(),
                });
            }
            inverses
                .push(exact::inverse(a).ok_or_else(|| Error::Singular(format!("generator {i}")))?);
        }
        if embedding.as_ref().is_some_and(|e| e.gram.rows() != dim) {
            return Err(Error::InvalidRepresentation(
                "embedding does not match the generator size".into(),
            ));
        }
        let m = FpModule {
            presentation: presentation.clone(),
            dim,
            gens,
            inverses,
            p,
            embedding,
        };
        for r in presentation.relators() {
            if !m.word_matrix(r).is_identity() {
                return Err(Error::InvalidRepresentation(format!(
                    "relator {} does not act trivially",
                    presentation.word_to_string(r)
                )));
            }
        }
        Ok(m)
    }

    /// The trivial module `ℝ^dim`.
    pub fn trivial(presentation: &FpPresentation, dim: usize, p: NormParam) -> Result<Self> {
        FpModule::new(
            presentation,
            vec![QMatrix::identity(dim); presentation.rank()],
            p,
        )
    }

    pub fn presentation(&self) -> &FpPresentation {
        &self.presentation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> &NormParam {
        &self.p
    }

    pub fn generator_matrix(&self, i: usize) -> &QMatrix {
        &self.gens[i]
    }

    fn letter_matrix(&self, (g, inv): Letter) -> &QMatrix {
        if inv {
            &self.inverses[g]
        } else {
            &self.gens[g]
        }
    }

    pub fn word_matrix(&self, word: &[Letter]) -> QMatrix {
        word.iter().fold(QMatrix::identity(self.dim), |acc, &l| {
            acc.mul(self.letter_matrix(l))
        })
    }

    /// Matrix `d × kd` sending generator values `(v_1..v_k)` to `φ(word)`, using
    /// `φ(uw) = π(u)φ(w) + φ(u)` and `φ(s⁻¹) = −π(s⁻¹)φ(s)`.
    pub fn cocycle_eval_matrix(&self, word: &[Letter]) -> QMatrix {
        let d = self.dim;
        let k = self.presentation.rank();
        let mut prefix = QMatrix::identity(d);
        let mut c = QMatrix::zeros(d, k * d);
        for &(g, inv) in word {
            let block = if inv {
                self.inverses[g].scale(&-Q::one())
            } else {
                QMatrix::identity(d)
            };
            let contrib = prefix.mul(&block);
            for i in 0..d {
                for j in 0..d {
                    let v = contrib[(i, j)].clone();
                    c[(i, g * d + j)] += v;
                }
            }
            prefix = prefix.mul(self.letter_matrix((g, inv)));
        }
        c
    }

    /// Stacked relator conditions on the generator values.
    pub fn relator_system(&self) -> QMatrix {
        let rows: Vec<Vec<Q>> = self
            .presentation
            .relators()
            .iter()
            .flat_map(|r| self.cocycle_eval_matrix(r).row_vecs())
            .collect();
        if rows.is_empty() {
            QMatrix::zeros(0, self.presentation.rank() * self.dim)
        } else {
            QMatrix::from_rows(rows)
        }
    }

    /// Common kernel of `I − π(s)` over the generators.
    pub fn invariants(&self) -> Vec<Vec<Q>> {
        let rows: Vec<Vec<Q>> = self
            .gens
            .iter()
            .flat_map(|a| QMatrix::identity(self.dim).sub(a).row_vecs())
            .collect();
        if rows.is_empty() {
            return QMatrix::identity(self.dim).row_vecs();
        }
        exact::kernel(&QMatrix::from_rows(rows))
    }

    fn flatten(&self, values: &[Vec<Q>]) -> Result<Vec<Q>> {
        if values.len() != self.presentation.rank() || values.iter().any(|v| v.len() != self.dim) {
            return Err(Error::InvalidArgument(
                "one value of module dimension per generator expected".into(),
            ));
        }
        Ok(values.concat())
    }

    pub fn is_cocycle(&self, values: &[Vec<Q>]) -> Result<bool> {
        let flat = self.flatten(values)?;
        let sys = self.relator_system();
        Ok(sys.rows() == 0 || sys.mul_vec(&flat).iter().all(Zero::is_zero))
    }

    /// `φ(word)` for the cocycle with the given generator values.
    pub fn evaluate(&self, values: &[Vec<Q>], word: &[Letter]) -> Result<Vec<Q>> {
        Ok(self
            .cocycle_eval_matrix(word)
            .mul_vec(&self.flatten(values)?))
    }
}

#[derive(Clone, Debug)]
pub struct FpCocycleSpace {
    /// Flattened generator-value tuples.
    pub z_basis: Vec<Vec<Q>>,
    pub b_basis: Vec<Vec<Q>>,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
}

pub fn fp_cocycle_space(m: &FpModule) -> FpCocycleSpace {
    let d = m.dim;
    let k = m.presentation.rank();
    let sys = m.relator_system();
    let z_basis = if sys.rows() == 0 {
        QMatrix::identity(k * d).row_vecs()
    } else {
        exact::kernel(&sys)
    };
    let boundary_cols: Vec<Vec<Q>> = (0..d)
        .map(|j| {
            let mut e = vec![Q::zero(); d];
            e[j] = Q::one();
            m.gens
                .iter()
                .flat_map(|a| crate::rational::vec_sub(&e, &a.mul_vec(&e)))
                .collect()
        })
        .collect();
    let b_basis = if k == 0 || d == 0 {
        Vec::new()
    } else {
        exact::column_space(&QMatrix::from_columns(&boundary_cols, k * d))
    };
    let (dim_z, dim_b) = (z_basis.len(), b_basis.len());
    FpCocycleSpace {
        z_basis,
        b_basis,
        dim_z,
        dim_b,
        dim_h: dim_z - dim_b,
    }
}

pub fn fp_fixed_points(m: &FpModule, values: &[Vec<Q>]) -> Result<Option<FixedSet>> {
    if !m.is_cocycle(values)? {
        return Err(Error::NotCocycle("relator conditions fail".into()));
    }
    Ok(solve_fixed(&m.gens, values, m.dim))
}

/// Minimizes the largest generator displacement `max_s ‖x − α(s)x‖`.
pub fn fp_almost_fixed_point(
    m: &FpModule,
    values: &[Vec<Q>],
    eps: f64,
    seed: u64,
) -> Result<AlmostFixedReport> {
    if let Some(f) = fp_fixed_points(m, values)? {
        return Ok(AlmostFixedReport {
            point: vec_to_f64(&f.point),
            value: 0.0,
            below_eps: 0.0 < eps,
            exact_fixed: true,
            restarts: 0,
            seed,
        });
    }
    let maps: Vec<_> = m
        .gens
        .iter()
        .zip(values)
        .map(|(a, v)| (a.to_f64(), vec_to_f64(v)))
        .collect();
    let model = NormModel::with_basis(m.p.to_f64(), m.embedding.as_ref().map(|e| e.basis.to_f64()));
    let (point, value) = minimize_displacement(&maps, &model, m.dim, seed, RESTARTS, DESCENT_ITERS);
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
pub struct HomFreeReport {
    pub abelianization: Abelianization,
    /// `dim H¹` with trivial real coefficients.
    pub trivial_h1: usize,
    /// No homomorphism to ℝ, by both computations.
    pub homomorphism_free: bool,
    /// Dimension of the kernel of `φ ↦ φ̄` on `Z¹(G, X)`.
    pub kernel_dim: usize,
    pub injective: bool,
}

/// Checks injectivity of `Z¹(G, X) → Z¹(G, X/X^G)` for groups without homomorphisms to ℝ.
pub fn homomorphism_free_check(m: &FpModule) -> Result<HomFreeReport> {
    let pres = &m.presentation;
    let ab = abelianization(pres);
    let trivial_h1 = fp_cocycle_space(&FpModule::trivial(pres, 1, NormParam::two())?).dim_h;
    let homomorphism_free = ab.free_rank == 0 && trivial_h1 == 0;
    let d = m.dim;
    let k = pres.rank();
    let inv = m.invariants();
    // functionals vanishing on X^G give the quotient coordinates
    let annihilator = if inv.is_empty() {
        QMatrix::identity(d).row_vecs()
    } else {
        exact::kernel(&QMatrix::from_rows(inv))
    };
    let space = fp_cocycle_space(m);
    let kernel_dim = if space.z_basis.is_empty() {
        0
    } else {
        let images: Vec<Vec<Q>> = space
            .z_basis
            .iter()
            .map(|z| {
                (0..k)
                    .flat_map(|s| {
                        let block = &z[s * d..(s + 1) * d];
                        annihilator
                            .iter()
                            .map(move |f| crate::rational::dot(f, block))
                            .collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        let rows = k * annihilator.len();
        if rows == 0 {
            space.z_basis.len()
        } else {
            space.z_basis.len() - exact::rank(&QMatrix::from_columns(&images, rows))
        }
    };
    Ok(HomFreeReport {
        abelianization: ab,
        trivial_h1,
        homomorphism_free,
        kernel_dim,
        injective: kernel_dim == 0,
    })
}

/// Exponent of `BigInt` invariant factors as `u64`, for reports.
pub fn torsion_u64(ab: &Abelianization) -> Vec<u64> {
    ab.torsion
        .iter()
        .map(|t| u64::try_from(t.clone()).unwrap_or(u64::MAX))
        .collect()
}
