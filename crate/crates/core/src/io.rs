//! Canonical JSON files for modules, permutation descriptors and complexes.
//!
//! Objects are written with sorted keys, no whitespace and a trailing newline,
//! so parsing and re-serializing a canonical file reproduces it byte for byte.
//!
//! Module and descriptor files hold dense row lists. Inside complex files every
//! matrix is sparse: `{"cols", "entries": [i, j, v, ...], "rows"}` with the
//! nonzero entries in row-major order.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::complex::{Augmentation, Complex};
use crate::error::{Error, Result};
use crate::field::{Matrix, PrimeField};
use crate::group::{Caps, Group};
use crate::module::Module;
use crate::perm::{PermutationDescriptor, Subgroup};

/// Metadata stored with a complex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplexMeta {
    pub m: Option<usize>,
    pub digest: Option<String>,
}

/// Any of the three file kinds.
#[derive(Clone, Debug)]
pub enum AnyFile {
    Module(Module),
    Descriptor(PermutationDescriptor),
    Complex(Complex, ComplexMeta),
}

pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("values always serialize");
    s.push('\n');
    s
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| malformed(format!("invalid JSON: {e}")))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("writing to a string");
    }
    out
}

fn matrix_value(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|&x| Value::from(x)).collect()))
            .collect(),
    )
}

fn sparse_value(m: &Matrix) -> Value {
    let mut entries = Vec::with_capacity(3 * m.nnz());
    for i in 0..m.rows() {
        for (j, &x) in m.row(i).iter().enumerate() {
            if x != 0 {
                entries.extend([Value::from(i), Value::from(j), Value::from(x)]);
            }
        }
    }
    json!({"cols": m.cols(), "entries": entries, "rows": m.rows()})
}

/// Reads a sparse rows x cols matrix; entries must be in row-major order,
/// nonzero and reduced.
fn parse_sparse(v: &Value, field: PrimeField, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
    let obj = as_object(v, what)?;
    let (r, c) = (as_usize(get(obj, "rows")?, what)?, as_usize(get(obj, "cols")?, what)?);
    if (r, c) != (rows, cols) {
        return Err(Error::DimensionMismatch(format!("{what} is {r}x{c}, expected {rows}x{cols}")));
    }
    let entries = get(obj, "entries")?
        .as_array()
        .ok_or_else(|| malformed(format!("{what}.entries must be a list")))?;
    if entries.len() % 3 != 0 {
        return Err(malformed(format!("{what}.entries must be (row, column, value) triples")));
    }
    let mut m = Matrix::zeros(field, rows, cols);
    let mut last: Option<(usize, usize)> = None;
    for t in entries.chunks(3) {
        let i = as_usize(&t[0], what)?;
        let j = as_usize(&t[1], what)?;
        let x = t[2]
            .as_u64()
            .ok_or_else(|| malformed(format!("{what}: entries must be non-negative integers")))?;
        if i >= rows || j >= cols {
            return Err(Error::DimensionMismatch(format!("{what}: entry ({i}, {j}) out of range")));
        }
        if x == 0 || last.is_some_and(|l| l >= (i, j)) {
            return Err(malformed(format!("{what}: entries must be nonzero and in row-major order")));
        }
        if x >= field.p() as u64 {
            return Err(Error::UnreducedEntry { value: x, p: field.p() });
        }
        m.set(i, j, x as u32);
        last = Some((i, j));
    }
    Ok(m)
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| malformed(format!("missing key \"{key}\"")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| malformed(format!("{what} must be an object")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| malformed(format!("{what} must be a non-negative integer")))
}

/// Reads a rows x cols matrix of reduced entries.
fn parse_matrix(v: &Value, field: PrimeField, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
    let arr = v
        .as_array()
        .ok_or_else(|| malformed(format!("{what} must be a list of rows")))?;
    if arr.len() != rows {
        return Err(Error::DimensionMismatch(format!("{what} has {} rows, expected {rows}", arr.len())));
    }
    let mut data = Vec::with_capacity(rows);
    for row in arr {
        let row = row
            .as_array()
            .ok_or_else(|| malformed(format!("{what}: rows must be lists")))?;
        let row = row
            .iter()
            .map(|x| x.as_u64().ok_or_else(|| malformed(format!("{what}: entries must be non-negative integers"))))
            .collect::<Result<Vec<u64>>>()?;
        data.push(row);
    }
    Matrix::from_rows(field, cols, &data).map_err(|e| match e {
        Error::DimensionMismatch(msg) => Error::DimensionMismatch(format!("{what}: {msg}")),
        other => other,
    })
}

fn parse_group(obj: &Map<String, Value>, caps: Caps) -> Result<Group> {
    let p = get(obj, "p")?
        .as_u64()
        .ok_or_else(|| malformed("p must be a positive integer"))?;
    let rank = as_usize(get(obj, "rank")?, "rank")?;
    Group::with_caps(p, rank, caps)
}

fn module_body(m: &Module, encode: fn(&Matrix) -> Value) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("dim".into(), m.dim().into());
    obj.insert("generators".into(), m.generators().iter().map(encode).collect());
    obj
}

type Decoder = fn(&Value, PrimeField, usize, usize, &str) -> Result<Matrix>;

/// Parses {dim, generators}; `validate` runs the module identities.
fn parse_module_body(obj: &Map<String, Value>, group: Group, decode: Decoder, validate: bool, what: &str) -> Result<Module> {
    let dim = as_usize(get(obj, "dim")?, &format!("{what}.dim"))?;
    group.check_dim("module dimension", dim)?;
    let gens = get(obj, "generators")?
        .as_array()
        .ok_or_else(|| malformed(format!("{what}.generators must be a list")))?;
    if gens.len() != group.rank() {
        return Err(malformed(format!(
            "{what} has {} generators, group rank is {}",
            gens.len(),
            group.rank()
        )));
    }
    let gens = gens
        .iter()
        .enumerate()
        .map(|(i, g)| decode(g, group.field(), dim, dim, &format!("{what} generator {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    if validate {
        Module::new(group, dim, gens)
    } else {
        Ok(Module::new_unchecked(group, dim, gens))
    }
}

pub fn module_to_value(m: &Module) -> Value {
    let mut obj = module_body(m, matrix_value);
    obj.insert("p".into(), m.group().p().into());
    obj.insert("rank".into(), m.group().rank().into());
    Value::Object(obj)
}

pub fn module_from_value(v: &Value, caps: Caps) -> Result<Module> {
    let obj = as_object(v, "module file")?;
    let group = parse_group(obj, caps)?;
    parse_module_body(obj, group, parse_matrix, true, "module")
}

fn parts_value(d: &PermutationDescriptor) -> Value {
    d.parts().iter().map(|h| matrix_value(h.basis())).collect()
}

fn parse_parts(v: &Value, group: Group, what: &str) -> Result<PermutationDescriptor> {
    let parts = v
        .as_array()
        .ok_or_else(|| malformed(format!("{what} must be a list of subgroup bases")))?;
    let subgroups = parts
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            let n = rows
                .as_array()
                .ok_or_else(|| malformed(format!("{what} part {i} must be a list of rows")))?
                .len();
            let basis = parse_matrix(rows, group.field(), n, group.rank(), &format!("{what} part {i}"))?;
            Subgroup::span(group, &basis)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = PermutationDescriptor::new(group, subgroups)?;
    group.check_dim("descriptor dimension", d.dim())?;
    Ok(d)
}

pub fn descriptor_to_value(d: &PermutationDescriptor) -> Value {
    json!({
        "p": d.group().p(),
        "rank": d.group().rank(),
        "parts": parts_value(d),
    })
}

pub fn descriptor_from_value(v: &Value, caps: Caps) -> Result<PermutationDescriptor> {
    let obj = as_object(v, "descriptor file")?;
    let group = parse_group(obj, caps)?;
    parse_parts(get(obj, "parts")?, group, "parts")
}

/// Everything except `meta`; this is what the digest covers.
fn complex_body(c: &Complex) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("p".into(), c.group().p().into());
    obj.insert("rank".into(), c.group().rank().into());
    obj.insert(
        "terms".into(),
        c.terms().iter().map(|t| Value::Object(module_body(t, sparse_value))).collect(),
    );
    obj.insert("differentials".into(), c.differentials().iter().map(sparse_value).collect());
    obj.insert(
        "augmentation".into(),
        match c.augmentation() {
            Some(a) => json!({
                "target": Value::Object(module_body(&a.target, sparse_value)),
                "matrix": sparse_value(&a.matrix),
            }),
            None => Value::Null,
        },
    );
    obj.insert(
        "tags".into(),
        match c.tags() {
            Some(tags) => tags.iter().map(parts_value).collect(),
            None => Value::Null,
        },
    );
    obj
}

/// sha256 of the canonical body.
pub fn complex_digest(c: &Complex) -> String {
    sha256_hex(to_canonical_string(&Value::Object(complex_body(c))).as_bytes())
}

/// Writes the complex with its digest and the certified degree `m`.
pub fn complex_to_value(c: &Complex, m: Option<usize>) -> Value {
    let mut obj = complex_body(c);
    let mut meta = Map::new();
    meta.insert("digest".into(), complex_digest(c).into());
    meta.insert("m".into(), m.map_or(Value::Null, Value::from));
    obj.insert("meta".into(), Value::Object(meta));
    Value::Object(obj)
}

/// Parses a complex without checking module identities, so that a verifier
/// can report them.
pub fn complex_from_value(v: &Value, caps: Caps) -> Result<(Complex, ComplexMeta)> {
    let obj = as_object(v, "complex file")?;
    let group = parse_group(obj, caps)?;
    let field = group.field();
    let terms = get(obj, "terms")?
        .as_array()
        .ok_or_else(|| malformed("terms must be a list"))?
        .iter()
        .enumerate()
        .map(|(j, t)| parse_module_body(as_object(t, "term")?, group, parse_sparse, false, &format!("term {j}")))
        .collect::<Result<Vec<_>>>()?;
    let diffs = get(obj, "differentials")?
        .as_array()
        .ok_or_else(|| malformed("differentials must be a list"))?;
    if diffs.len() != terms.len().saturating_sub(1) {
        return Err(malformed(format!(
            "{} terms need {} differentials, found {}",
            terms.len(),
            terms.len().saturating_sub(1),
            diffs.len()
        )));
    }
    let differentials = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let j = i + 1;
            parse_sparse(d, field, terms[j - 1].dim(), terms[j].dim(), &format!("d_{j}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let augmentation = match get(obj, "augmentation")? {
        Value::Null => None,
        a => {
            let a = as_object(a, "augmentation")?;
            let target = parse_module_body(
                as_object(get(a, "target")?, "augmentation target")?,
                group,
                parse_sparse,
                false,
                "augmentation target",
            )?;
            let c0 = terms.first().map_or(0, Module::dim);
            let matrix = parse_sparse(get(a, "matrix")?, field, target.dim(), c0, "augmentation matrix")?;
            Some(Augmentation { target, matrix })
        }
    };
    let tags = match obj.get("tags").unwrap_or(&Value::Null) {
        Value::Null => None,
        t => Some(
            t.as_array()
                .ok_or_else(|| malformed("tags must be a list"))?
                .iter()
                .enumerate()
                .map(|(j, parts)| parse_parts(parts, group, &format!("tag {j}")))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let meta = match obj.get("meta") {
        None | Some(Value::Null) => ComplexMeta::default(),
        Some(m) => {
            let m = as_object(m, "meta")?;
            ComplexMeta {
                m: match m.get("m") {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(as_usize(v, "meta.m")?),
                },
                digest: match m.get("digest") {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(v.as_str().ok_or_else(|| malformed("meta.digest must be a string"))?.to_owned()),
                },
            }
        }
    };
    let complex = Complex::new(group, terms, differentials, augmentation, tags)?;
    Ok((complex, meta))
}

/// Dispatches on the keys present: `terms`, `parts` or `generators`.
pub fn any_from_value(v: &Value, caps: Caps) -> Result<AnyFile> {
    let obj = as_object(v, "file")?;
    if obj.contains_key("terms") {
        let (c, meta) = complex_from_value(v, caps)?;
        Ok(AnyFile::Complex(c, meta))
    } else if obj.contains_key("parts") {
        Ok(AnyFile::Descriptor(descriptor_from_value(v, caps)?))
    } else if obj.contains_key("generators") {
        Ok(AnyFile::Module(module_from_value(v, caps)?))
    } else {
        Err(malformed("not a module, descriptor or complex file"))
    }
}
