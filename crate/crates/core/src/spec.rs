//! JSON descriptions of groups, presentations and representations.
//!
//! Groups: `{"type":"table","mul":[[..]]}`, `{"type":"permutation","degree":k,"generators":[[..]]}`,
//! `{"type":"cyclic","n":m}`, `{"type":"product","factors":[a,b]}`, `{"type":"sample","name":"S3"}`
//! and `{"type":"fp","generators":["a"],"relators":["aaa"]}`.
//!
//! Representations carry a `"kind"` and an optional `"p"` (default `"2"`).

use serde_json::Value;

use crate::error::{Error, Result};
use crate::fp::{FpModule, FpPresentation};
use crate::group::{FiniteGroup, GroupRef};
use crate::linalg::QMatrix;
use crate::module::{signed_permutation_matrix, BanachModule, NormParam};
use crate::rational::{parse_q, Q};
use crate::samples;

/// A finite group with the generators in the order the spec listed them.
#[derive(Clone, Debug)]
pub struct FiniteSpec {
    pub group: GroupRef,
    pub generators: Vec<usize>,
    /// Name when built from the sample list.
    pub sample: Option<String>,
}

#[derive(Clone, Debug)]
pub enum GroupSpec {
    Finite(FiniteSpec),
    Fp(FpPresentation),
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| spec_err(format!("missing field '{key}'")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| spec_err(format!("{what} must be a nonnegative integer")))
}

fn usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| spec_err(format!("{what} must be an array")))?
        .iter()
        .map(|x| as_usize(x, what))
        .collect()
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| spec_err(format!("{what} must be an array of strings")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| spec_err(format!("{what} must be an array of strings")))
        })
        .collect()
}

/// A rational from a JSON string (`"p/q"`, decimal) or an integer.
pub fn scalar(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_q(&n.to_string()),
        _ => Err(spec_err(format!("expected a rational, got {v}"))),
    }
}

pub fn vector(v: &Value) -> Result<Vec<Q>> {
    v.as_array()
        .ok_or_else(|| spec_err("expected an array of rationals"))?
        .iter()
        .map(scalar)
        .collect()
}

pub fn matrix(v: &Value) -> Result<QMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| spec_err("matrix must be an array of rows"))?
        .iter()
        .map(vector)
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(spec_err("matrix must be square"));
    }
    Ok(QMatrix::from_rows(rows))
}

pub fn parse_group(v: &Value, cap: usize) -> Result<GroupSpec> {
    let ty = field(v, "type")?
        .as_str()
        .ok_or_else(|| spec_err("group type must be a string"))?;
    if ty == "fp" {
        let gens = string_list(field(v, "generators")?, "generators")?;
        let rels = match v.get("relators") {
            Some(r) => string_list(r, "relators")?,
            None => Vec::new(),
        };
        return Ok(GroupSpec::Fp(FpPresentation::parse(&gens, &rels)?));
    }
    parse_finite(v, cap).map(GroupSpec::Finite)
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        return Err(Error::GroupTooLarge { order, cap });
    }
    Ok(())
}

pub fn parse_finite(v: &Value, cap: usize) -> Result<FiniteSpec> {
    let ty = field(v, "type")?
        .as_str()
        .ok_or_else(|| spec_err("group type must be a string"))?;
    match ty {
        "table" => {
            let rows = field(v, "mul")?
                .as_array()
                .ok_or_else(|| spec_err("mul must be an array of rows"))?
                .iter()
                .map(|r| usize_list(r, "mul row"))
                .collect::<Result<Vec<_>>>()?;
            check_cap(rows.len(), cap)?;
            let group = FiniteGroup::from_table(&rows, cap)?;
            let generators = group.generators().to_vec();
            Ok(FiniteSpec {
                group,
                generators,
                sample: None,
            })
        }
        "permutation" => {
            let degree = as_usize(field(v, "degree")?, "degree")?;
            let perms = field(v, "generators")?
                .as_array()
                .ok_or_else(|| spec_err("generators must be an array"))?
                .iter()
                .map(|r| usize_list(r, "generator"))
                .collect::<Result<Vec<_>>>()?;
            let group = FiniteGroup::from_permutations(degree, &perms, cap)?;
            let all = group.permutations().expect("permutation group");
            let generators = perms
                .iter()
                .map(|p| {
                    all.iter()
                        .position(|q| q == p)
                        .expect("generator is an element")
                })
                .collect();
            Ok(FiniteSpec {
                group,
                generators,
                sample: None,
            })
        }
        "cyclic" => {
            let n = as_usize(field(v, "n")?, "n")?;
            if n == 0 {
                return Err(Error::InvalidGroup("cyclic group of order 0".into()));
            }
            check_cap(n, cap)?;
            let group = FiniteGroup::cyclic(n);
            let generators = if n == 1 { vec![] } else { vec![1] };
            Ok(FiniteSpec {
                group,
                generators,
                sample: None,
            })
        }
        "product" => {
            let factors = field(v, "factors")?
                .as_array()
                .ok_or_else(|| spec_err("factors must be an array"))?;
            if factors.len() != 2 {
                return Err(spec_err("product needs exactly two factors"));
            }
            let a = parse_finite(&factors[0], cap)?;
            let b = parse_finite(&factors[1], cap)?;
            let group = FiniteGroup::direct_product(&a.group, &b.group, cap)?;
            let nb = b.group.order();
            let mut generators: Vec<usize> = a
                .generators
                .iter()
                .map(|&x| x * nb + b.group.identity())
                .collect();
            generators.extend(b.generators.iter().map(|&y| a.group.identity() * nb + y));
            Ok(FiniteSpec {
                group,
                generators,
                sample: None,
            })
        }
        "sample" => {
            let name = field(v, "name")?
                .as_str()
                .ok_or_else(|| spec_err("sample name must be a string"))?;
            let (_, group) = samples::sample_groups()
                .into_iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| spec_err(format!("unknown sample group '{name}'")))?;
            check_cap(group.order(), cap)?;
            let generators = group.generators().to_vec();
            Ok(FiniteSpec {
                group,
                generators,
                sample: Some(name.to_string()),
            })
        }
        "fp" => Err(spec_err(
            "this task needs a finite group, not a presentation",
        )),
        other => Err(spec_err(format!("unknown group type '{other}'"))),
    }
}

pub fn parse_norm(rep: &Value) -> Result<NormParam> {
    match rep.get("p") {
        None => Ok(NormParam::two()),
        Some(Value::String(s)) => NormParam::parse(s),
        Some(Value::Number(n)) => NormParam::parse(&n.to_string()),
        Some(other) => Err(spec_err(format!("bad norm exponent {other}"))),
    }
}

/// Entries keyed by element index (object) or listed in generator order (array).
fn keyed<T>(
    v: &Value,
    generators: &[usize],
    key: impl Fn(&str) -> Result<usize>,
    parse: impl Fn(&Value) -> Result<T>,
) -> Result<Vec<(usize, T)>> {
    match v {
        Value::Object(map) => map.iter().map(|(k, x)| Ok((key(k)?, parse(x)?))).collect(),
        Value::Array(items) => {
            if items.len() != generators.len() {
                return Err(spec_err(format!(
                    "expected {} entries, one per generator, got {}",
                    generators.len(),
                    items.len()
                )));
            }
            generators
                .iter()
                .zip(items)
                .map(|(&g, x)| Ok((g, parse(x)?)))
                .collect()
        }
        _ => Err(spec_err(
            "expected an object keyed by element or an array in generator order",
        )),
    }
}

fn signed_images(v: &Value) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| spec_err("signed images must be an array"))?
        .iter()
        .map(|x| {
            x.as_i64()
                .ok_or_else(|| spec_err("signed images must be integers"))
        })
        .collect()
}

fn kind(rep: &Value) -> Result<&str> {
    field(rep, "kind")?
        .as_str()
        .ok_or_else(|| spec_err("rep kind must be a string"))
}

pub fn parse_module(rep: &Value, g: &FiniteSpec) -> Result<BanachModule> {
    let p = parse_norm(rep)?;
    let group = &g.group;
    let element = |k: &str| -> Result<usize> {
        let e: usize = k
            .trim()
            .parse()
            .map_err(|_| spec_err(format!("bad element index '{k}'")))?;
        if e >= group.order() {
            return Err(spec_err(format!("element {e} out of range")));
        }
        Ok(e)
    };
    match kind(rep)? {
        "regular" => Ok(BanachModule::regular(group, p)),
        "trivial" => {
            let dim = rep.get("dim").map_or(Ok(1), |d| as_usize(d, "dim"))?;
            Ok(BanachModule::trivial(group, dim, p))
        }
        "permutation" => {
            let action = keyed(field(rep, "action")?, &g.generators, element, |x| {
                usize_list(x, "action")
            })?;
            BanachModule::from_permutation_action(group, &action, p)
        }
        "signed-permutation" => {
            let action = keyed(field(rep, "action")?, &g.generators, element, |x| {
                signed_permutation_matrix(&signed_images(x)?)
            })?;
            BanachModule::from_generator_matrices(group, &action, p)
        }
        "matrices" => {
            let entries = keyed(field(rep, "entries")?, &g.generators, element, matrix)?;
            BanachModule::from_generator_matrices(group, &entries, p)
        }
        "submodule" => {
            let mut base = field(rep, "of")?.clone();
            if let Some(obj) = base.as_object_mut() {
                if !obj.contains_key("p") {
                    if let Some(pv) = rep.get("p") {
                        obj.insert("p".into(), pv.clone());
                    }
                }
            }
            let parent = parse_module(&base, g)?;
            let basis = field(rep, "basis")?
                .as_array()
                .ok_or_else(|| spec_err("basis must be an array of vectors"))?
                .iter()
                .map(vector)
                .collect::<Result<Vec<_>>>()?;
            parent.submodule(&basis)
        }
        "rotation" => {
            let name = g
                .sample
                .as_deref()
                .ok_or_else(|| spec_err("rotation rep needs a sample group"))?;
            samples::rotation_module(name, &p)
                .ok_or_else(|| spec_err(format!("no rotation rep for '{name}'")))
        }
        other => Err(spec_err(format!("unknown rep kind '{other}'"))),
    }
}

/// Representation of a presented group: `trivial`, `matrices` or `signed-permutation`,
/// keyed by generator letter or listed in generator order.
pub fn parse_fp_module(rep: &Value, pres: &FpPresentation) -> Result<FpModule> {
    let p = parse_norm(rep)?;
    let order: Vec<usize> = (0..pres.rank()).collect();
    let letter = |k: &str| -> Result<usize> {
        let mut cs = k.trim().chars();
        let c = cs.next().filter(|_| cs.next().is_none());
        c.and_then(|c| pres.generators().iter().position(|&x| x == c))
            .ok_or_else(|| spec_err(format!("unknown generator '{k}'")))
    };
    let collect = |items: Vec<(usize, QMatrix)>| -> Result<Vec<QMatrix>> {
        let mut mats: Vec<Option<QMatrix>> = vec![None; pres.rank()];
        for (i, m) in items {
            if mats[i].replace(m).is_some() {
                return Err(spec_err("generator listed twice"));
            }
        }
        mats.into_iter()
            .enumerate()
            .map(|(i, m)| {
                m.ok_or_else(|| {
                    spec_err(format!(
                        "no matrix for generator '{}'",
                        pres.generators()[i]
                    ))
                })
            })
            .collect()
    };
    match kind(rep)? {
        "trivial" => {
            let dim = rep.get("dim").map_or(Ok(1), |d| as_usize(d, "dim"))?;
            FpModule::trivial(pres, dim, p)
        }
        "matrices" => {
            let items = keyed(field(rep, "entries")?, &order, letter, matrix)?;
            FpModule::new(pres, collect(items)?, p)
        }
        "signed-permutation" => {
            let items = keyed(field(rep, "action")?, &order, letter, |x| {
                signed_permutation_matrix(&signed_images(x)?)
            })?;
            FpModule::new(pres, collect(items)?, p)
        }
        other => Err(spec_err(format!(
            "rep kind '{other}' is not available for presented groups"
        ))),
    }
}
