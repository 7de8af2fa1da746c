//! Finite groups as multiplication tables over dense indices `0..N`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_ORDER_CAP: usize = 64;

pub type GroupRef = Arc<FiniteGroup>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    identity: usize,
    inv: Vec<usize>,
    generators: Vec<usize>,
    permutations: Option<Vec<Vec<usize>>>,
}

impl FiniteGroup {
    /// Validates a multiplication table: closure, associativity, identity, inverses.
    pub fn from_table(table: &[Vec<usize>], cap: usize) -> Result<GroupRef> {
        Ok(Arc::new(Self::validate_table(table, cap)?))
    }

    fn validate_table(table: &[Vec<usize>], cap: usize) -> Result<FiniteGroup> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if n > cap {
            return Err(Error::GroupTooLarge { order: n, cap });
        }
        let mut mul = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroup(format!(
                    "entry {bad} in row {i} is out of range"
                )));
            }
            mul.extend_from_slice(row);
        }
        let at = |a: usize, b: usize| mul[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| Error::InvalidGroup("no two-sided identity".into()))?;
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        let mut g = FiniteGroup {
            order: n,
            mul,
            identity,
            inv,
            generators: Vec::new(),
            permutations: None,
        };
        g.generators = g.greedy_generators();
        Ok(g)
    }

    /// Closes permutation generators (image sequences) under composition.
    ///
    /// Products compose right to left, `(g·f)(i) = g(f(i))`. The identity gets
    /// index 0 and the remaining elements follow breadth-first order.
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>], cap: usize) -> Result<GroupRef> {
        for (k, p) in gens.iter().enumerate() {
            if p.len() != degree {
                return Err(Error::InvalidGroup(format!(
                    "generator {k} has degree {}, expected {degree}",
                    p.len()
                )));
            }
            let mut seen = vec![false; degree];
            for &x in p {
                if x >= degree || seen[x] {
                    return Err(Error::InvalidGroup(format!(
                        "generator {k} is not a permutation"
                    )));
                }
                seen[x] = true;
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let mut perms = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for s in gens {
                let next: Vec<usize> = (0..degree).map(|x| perms[i][s[x]]).collect();
                if !index.contains_key(&next) {
                    if perms.len() >= cap {
                        return Err(Error::GroupTooLarge {
                            order: perms.len() + 1,
                            cap,
                        });
                    }
                    index.insert(next.clone(), perms.len());
                    queue.push_back(perms.len());
                    perms.push(next);
                }
            }
        }
        let n = perms.len();
        let table: Vec<Vec<usize>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let ab: Vec<usize> = (0..degree).map(|x| perms[a][perms[b][x]]).collect();
                        index[&ab]
                    })
                    .collect()
            })
            .collect();
        let mut g = Self::validate_table(&table, cap)?;
        let mut generators: Vec<usize> =
            gens.iter().map(|p| index[p]).filter(|&i| i != 0).collect();
        generators.sort_unstable();
        generators.dedup();
        g.generators = generators;
        g.permutations = Some(perms);
        Ok(Arc::new(g))
    }

    pub fn cyclic(n: usize) -> GroupRef {
        assert!(n > 0);
        let table: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let mut g = Self::validate_table(&table, usize::MAX).expect("cyclic table is a group");
        g.generators = if n > 1 { vec![1] } else { Vec::new() };
        Arc::new(g)
    }

    /// `G × H` with `(g, h)` at index `g·|H| + h`.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup, cap: usize) -> Result<GroupRef> {
        let (na, nb) = (a.order, b.order);
        if na * nb > cap {
            return Err(Error::GroupTooLarge {
                order: na * nb,
                cap,
            });
        }
        let table: Vec<Vec<usize>> = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
                    .collect()
            })
            .collect();
        let mut g = Self::validate_table(&table, cap)?;
        let mut gens: Vec<usize> = a.generators.iter().map(|&s| s * nb + b.identity).collect();
        gens.extend(b.generators.iter().map(|&t| a.identity * nb + t));
        g.generators = gens;
        Ok(Arc::new(g))
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut reached = vec![false; self.order];
        reached[self.identity] = true;
        for g in 0..self.order {
            if !reached[g] {
                gens.push(g);
                for x in self.closure_of(&gens) {
                    reached[x] = true;
                }
            }
        }
        gens
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `f g f⁻¹`.
    pub fn conj(&self, f: usize, g: usize) -> usize {
        self.mul(self.mul(f, g), self.inv[f])
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn permutations(&self) -> Option<&[Vec<usize>]> {
        self.permutations.as_deref()
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn closure_of(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&x| seen[x]).collect()
    }
}

/// Subgroup given by its sorted element list and a generating set.
#[derive(Clone, Debug)]
pub struct Subgroup {
    group: GroupRef,
    elements: Vec<usize>,
    generators: Vec<usize>,
}

impl Subgroup {
    pub fn whole(group: &GroupRef) -> Subgroup {
        Subgroup {
            group: group.clone(),
            elements: group.elements().collect(),
            generators: group.generators().to_vec(),
        }
    }

    pub fn trivial(group: &GroupRef) -> Subgroup {
        Subgroup {
            group: group.clone(),
            elements: vec![group.identity()],
            generators: Vec::new(),
        }
    }

    /// Validates that `elements` is closed under products and inverses.
    pub fn from_elements(group: &GroupRef, elements: &[usize]) -> Result<Subgroup> {
        let mut el = elements.to_vec();
        el.sort_unstable();
        el.dedup();
        if let Some(&bad) = el.iter().find(|&&x| x >= group.order()) {
            return Err(Error::InvalidArgument(format!(
                "element {bad} out of range"
            )));
        }
        let closure = group.closure_of(&el);
        if closure != el {
            return Err(Error::InvalidArgument(
                "element set is not a subgroup".into(),
            ));
        }
        let s = subgroup_closure(group, &el)?;
        Ok(s)
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    pub fn is_whole(&self) -> bool {
        self.elements.len() == self.group.order()
    }

    pub fn is_normal(&self) -> bool {
        self.group.elements().all(|g| {
            self.elements
                .iter()
                .all(|&h| self.contains(self.group.conj(g, h)))
        })
    }
}

/// Smallest subgroup containing `gens`.
pub fn subgroup_closure(group: &GroupRef, gens: &[usize]) -> Result<Subgroup> {
    if let Some(&bad) = gens.iter().find(|&&x| x >= group.order()) {
        return Err(Error::InvalidArgument(format!(
            "element {bad} out of range"
        )));
    }
    let elements = group.closure_of(gens);
    let mut generators = Vec::new();
    let mut reached = vec![group.identity()];
    for &g in gens {
        if reached.binary_search(&g).is_err() {
            generators.push(g);
            reached = group.closure_of(&generators);
        }
    }
    Ok(Subgroup {
        group: group.clone(),
        elements,
        generators,
    })
}

/// Orbits of `G` under conjugation by a subgroup `F`.
#[derive(Clone, Debug)]
pub struct ConjugacyData {
    acting: Subgroup,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl ConjugacyData {
    pub fn acting(&self) -> &Subgroup {
        &self.acting
    }

    /// Classes in order of their smallest element; members sorted.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn class(&self, id: usize) -> Result<&[usize]> {
        self.classes
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("class id {id} out of range")))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

pub fn f_conjugacy_classes(acting: &Subgroup) -> ConjugacyData {
    let g = acting.group();
    let n = g.order();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let mut orbit: Vec<usize> = acting.elements().iter().map(|&f| g.conj(f, x)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &y in &orbit {
            class_of[y] = classes.len();
        }
        classes.push(orbit);
    }
    ConjugacyData {
        acting: acting.clone(),
        classes,
        class_of,
    }
}

#[derive(Clone, Debug)]
pub struct FcData {
    pub fc_subgroup: Subgroup,
    /// `[F : C_F(g)]` for every element `g`.
    pub centralizer_indices: Vec<usize>,
}

/// Elements with finite `F`-class (all of `G` here) and centralizer indices.
///
/// Closure of the FC set and the orbit-stabilizer identity are checked rather
/// than assumed.
pub fn fc_data(acting: &Subgroup) -> Result<FcData> {
    let g = acting.group();
    let cd = f_conjugacy_classes(acting);
    let fc: Vec<usize> = g
        .elements()
        .filter(|&x| cd.classes()[cd.class_of(x)].len() <= acting.order())
        .collect();
    if g.closure_of(&fc) != fc {
        return Err(Error::Invariant("FC set is not closed".into()));
    }
    let fc_subgroup = subgroup_closure(g, &fc)?;
    let mut indices = Vec::with_capacity(g.order());
    for x in g.elements() {
        let centralizer = acting
            .elements()
            .iter()
            .filter(|&&f| g.mul(f, x) == g.mul(x, f))
            .count();
        let index = acting.order() / centralizer;
        if index * centralizer != acting.order() || index != cd.classes()[cd.class_of(x)].len() {
            return Err(Error::Invariant(format!(
                "orbit-stabilizer fails at element {x}"
            )));
        }
        indices.push(index);
    }
    Ok(FcData {
        fc_subgroup,
        centralizer_indices: indices,
    })
}

/// Breadth-first distances from the identity in the Cayley graph of the
/// symmetrized set `Σ ∪ Σ⁻¹`; `None` outside `⟨Σ⟩`.
pub fn word_lengths(group: &FiniteGroup, sigma: &[usize]) -> Vec<Option<usize>> {
    let mut sym: Vec<usize> = sigma.iter().flat_map(|&s| [s, group.inv(s)]).collect();
    sym.sort_unstable();
    sym.dedup();
    let mut dist = vec![None; group.order()];
    dist[group.identity()] = Some(0);
    let mut queue = VecDeque::from([group.identity()]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for &s in &sym {
            let y = group.mul(x, s);
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

pub fn word_length(group: &FiniteGroup, sigma: &[usize], g: usize) -> Result<usize> {
    if g >= group.order() || sigma.iter().any(|&s| s >= group.order()) {
        return Err(Error::InvalidArgument("element out of range".into()));
    }
    word_lengths(group, sigma)[g].ok_or(Error::NotGenerated(g))
}
