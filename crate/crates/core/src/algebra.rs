//! The real group algebra with exact rational coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{f_conjugacy_classes, ConjugacyData, FiniteGroup, GroupRef, Subgroup};
use crate::linalg::{exact, QMatrix};
use crate::rational::{fmt_q, parse_q, Q};

/// `Σ t_g g` with zero coefficients never stored.
#[derive(Clone, Debug)]
pub struct GroupAlgebraElement {
    group: GroupRef,
    coeffs: BTreeMap<usize, Q>,
}

pub fn same_group(a: &GroupRef, b: &GroupRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl PartialEq for GroupAlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.coeffs == other.coeffs
    }
}

impl GroupAlgebraElement {
    /// Sums repeated indices and drops zeros.
    pub fn new<I: IntoIterator<Item = (usize, Q)>>(group: &GroupRef, terms: I) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (g, t) in terms {
            if g >= group.order() {
                return Err(Error::InvalidArgument(format!("element {g} out of range")));
            }
            *coeffs.entry(g).or_insert_with(Q::zero) += t;
        }
        coeffs.retain(|_, t: &mut Q| !t.is_zero());
        Ok(GroupAlgebraElement {
            group: group.clone(),
            coeffs,
        })
    }

    pub fn zero(group: &GroupRef) -> Self {
        GroupAlgebraElement {
            group: group.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn dirac(group: &GroupRef, g: usize) -> Self {
        assert!(g < group.order(), "element {g} out of range");
        GroupAlgebraElement {
            group: group.clone(),
            coeffs: BTreeMap::from([(g, Q::one())]),
        }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn coeff(&self, g: usize) -> Q {
        self.coeffs.get(&g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.coeffs.iter().map(|(g, t)| (*g, t))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_group(&self, other: &Self) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_group(other)?;
        Self::new(
            &self.group,
            self.coeffs
                .iter()
                .chain(&other.coeffs)
                .map(|(g, t)| (*g, t.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_group(other)?;
        Self::new(
            &self.group,
            self.coeffs
                .iter()
                .map(|(g, t)| (*g, t.clone()))
                .chain(other.coeffs.iter().map(|(g, t)| (*g, -t))),
        )
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::new(&self.group, self.coeffs.iter().map(|(g, t)| (*g, t * s)))
            .expect("indices in range")
    }

    /// `(ξ∗ζ)(h) = Σ_g ξ(g) ζ(g⁻¹h)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_group(other)?;
        let mut out: BTreeMap<usize, Q> = BTreeMap::new();
        for (g, a) in &self.coeffs {
            for (f, b) in &other.coeffs {
                *out.entry(self.group.mul(*g, *f)).or_insert_with(Q::zero) += a * b;
            }
        }
        out.retain(|_, t| !t.is_zero());
        Ok(GroupAlgebraElement {
            group: self.group.clone(),
            coeffs: out,
        })
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::dirac(&self.group, self.group.identity());
        for _ in 0..k {
            out = out.convolve(self).expect("same group");
        }
        out
    }

    /// `f·ξ·f⁻¹`.
    pub fn conjugate_by(&self, f: usize) -> Self {
        Self::new(
            &self.group,
            self.coeffs
                .iter()
                .map(|(g, t)| (self.group.conj(f, *g), t.clone())),
        )
        .expect("indices in range")
    }

    pub fn commutes_with(&self, f: usize) -> bool {
        self.conjugate_by(f) == *self
    }

    pub fn augmentation(&self) -> Q {
        self.coeffs.values().fold(Q::zero(), |acc, t| acc + t)
    }

    pub fn classify(&self) -> AlgebraClassification {
        let a = self.augmentation();
        let in_affine_space = a.is_one();
        AlgebraClassification {
            in_augmentation_ideal: a.is_zero(),
            in_affine_space,
            in_simplex: in_affine_space && self.coeffs.values().all(|t| !t.is_negative()),
            augmentation_value: a,
        }
    }

    pub fn require_affine(&self) -> Result<()> {
        if self.classify().in_affine_space {
            Ok(())
        } else {
            Err(Error::NotInSet(format!(
                "augmentation {} is not 1",
                fmt_q(&self.augmentation())
            )))
        }
    }

    pub fn require_simplex(&self) -> Result<()> {
        if self.classify().in_simplex {
            Ok(())
        } else {
            Err(Error::NotInSet(
                "not a convex combination of group elements".into(),
            ))
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(g, t)| (g.to_string(), serde_json::Value::String(fmt_q(t))))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(group: &GroupRef, v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("algebra element must be an object".into()))?;
        let mut terms = Vec::with_capacity(obj.len());
        for (k, val) in obj {
            let g: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad element index '{k}'")))?;
            let t = match val {
                serde_json::Value::String(s) => parse_q(s)?,
                serde_json::Value::Number(n) => parse_q(&n.to_string())?,
                _ => return Err(Error::Parse(format!("bad coefficient for element {g}"))),
            };
            terms.push((g, t));
        }
        Self::new(group, terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraClassification {
    pub in_augmentation_ideal: bool,
    pub in_affine_space: bool,
    pub in_simplex: bool,
    pub augmentation_value: Q,
}

pub fn uniform_average(group: &GroupRef, set: &[usize]) -> Result<GroupAlgebraElement> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidArgument(
            "uniform average of an empty set".into(),
        ));
    }
    let w = Q::new(1.into(), s.len().into());
    GroupAlgebraElement::new(group, s.into_iter().map(|g| (g, w.clone())))
}

pub fn class_sum(cd: &ConjugacyData, id: usize) -> Result<GroupAlgebraElement> {
    let class = cd.class(id)?;
    GroupAlgebraElement::new(cd.acting().group(), class.iter().map(|&g| (g, Q::one())))
}

pub fn class_average(cd: &ConjugacyData, id: usize) -> Result<GroupAlgebraElement> {
    uniform_average(cd.acting().group(), cd.class(id)?)
}

/// Class sums spanning the commutant of `F`, checked against an independent
/// kernel computation of the commutation system.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub acting: Subgroup,
    pub basis: Vec<GroupAlgebraElement>,
    pub averages: Vec<GroupAlgebraElement>,
    pub kernel_dim: usize,
}

/// Rows `t_{f⁻¹h} − t_{hf⁻¹} = 0` for each generator `f` and each `h`.
pub fn commutation_system(group: &FiniteGroup, fs: &[usize]) -> QMatrix {
    let n = group.order();
    let mut m = QMatrix::zeros(fs.len() * n, n);
    for (k, &f) in fs.iter().enumerate() {
        let fi = group.inv(f);
        for h in 0..n {
            m[(k * n + h, group.mul(fi, h))] += Q::one();
            m[(k * n + h, group.mul(h, fi))] -= Q::one();
        }
    }
    m
}

pub fn commutant_basis(acting: &Subgroup) -> Result<CommutantBasis> {
    let group = acting.group();
    let cd = f_conjugacy_classes(acting);
    let ids = 0..cd.classes().len();
    let basis: Vec<_> = ids
        .clone()
        .map(|i| class_sum(&cd, i))
        .collect::<Result<_>>()?;
    let averages: Vec<_> = ids.map(|i| class_average(&cd, i)).collect::<Result<_>>()?;
    for b in &basis {
        if let Some(&f) = acting.elements().iter().find(|&&f| !b.commutes_with(f)) {
            return Err(Error::Invariant(format!(
                "class sum fails to commute with {f}"
            )));
        }
    }
    let n = group.order();
    let system = commutation_system(group, acting.generators());
    let kernel = if system.rows() == 0 {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Q::one() } else { Q::zero() })
                    .collect()
            })
            .collect()
    } else {
        exact::kernel(&system)
    };
    let dense: Vec<Vec<Q>> = basis
        .iter()
        .map(|b| (0..n).map(|g| b.coeff(g)).collect())
        .collect();
    if kernel.len() != basis.len() || !exact::same_span(&dense, &kernel, n) {
        return Err(Error::Invariant(format!(
            "class sums span dimension {} but the commutation system has kernel dimension {}",
            basis.len(),
            kernel.len()
        )));
    }
    Ok(CommutantBasis {
        acting: acting.clone(),
        basis,
        averages,
        kernel_dim: kernel.len(),
    })
}
