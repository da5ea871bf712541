//! Command implementations behind the `permres` binary.
//!
//! Each command returns the text for standard output and an exit status; the
//! binary only parses arguments and maps errors to exit codes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::complex::{Certificate, Complex};
use crate::error::{Error, Result};
use crate::group::{Caps, Group};
use crate::io::{self, AnyFile, ComplexMeta};
use crate::module::{IsoProbe, Module, ModuleMap};
use crate::perm::PermutationDescriptor;
use crate::random::random_module;
use crate::resolution::{good_resolution, trim};

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub caps: Caps,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            caps: Caps::default(),
            seed: 0,
            trials: 64,
        }
    }
}

/// Text for the two output streams plus the exit status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, cfg: &RunConfig) -> Result<AnyFile> {
    io::any_from_value(&io::parse_json(&read_file(path)?)?, cfg.caps)
}

fn load_module(path: &Path, cfg: &RunConfig) -> Result<Module> {
    io::module_from_value(&io::parse_json(&read_file(path)?)?, cfg.caps)
}

fn load_descriptor(path: &Path, cfg: &RunConfig) -> Result<PermutationDescriptor> {
    io::descriptor_from_value(&io::parse_json(&read_file(path)?)?, cfg.caps)
}

fn load_complex(path: &Path, cfg: &RunConfig) -> Result<(Complex, ComplexMeta)> {
    io::complex_from_value(&io::parse_json(&read_file(path)?)?, cfg.caps)
}

/// Writes to `out`, or returns the text when there is no path.
fn emit(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Parts grouped by subgroup, e.g. `{0} x4 + <(1 0)> x2`.
pub fn compact_descriptor(d: &PermutationDescriptor) -> String {
    if d.parts().is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    let mut i = 0;
    while i < d.parts().len() {
        let h = &d.parts()[i];
        let n = d.parts()[i..].iter().take_while(|x| *x == h).count();
        if !out.is_empty() {
            out.push_str(" + ");
        }
        if n == 1 {
            write!(out, "{h}").unwrap();
        } else {
            write!(out, "{h} x{n}").unwrap();
        }
        i += n;
    }
    out
}

fn free_degree_text(c: &Complex) -> String {
    let k = c.free_prefix();
    if k == c.len() {
        "every degree".into()
    } else if k == 0 {
        "none".into()
    } else {
        format!("{}", k - 1)
    }
}

fn dims_text(dims: &[usize]) -> String {
    let s: Vec<String> = dims.iter().map(usize::to_string).collect();
    format!("({})", s.join(","))
}

fn certificate_text(c: &Complex, cert: &Certificate, extra: &[String]) -> String {
    let mut out = String::new();
    writeln!(out, "group: {}", c.group()).unwrap();
    writeln!(out, "term dims: {}", dims_text(&cert.term_dims)).unwrap();
    match cert.target_dim {
        Some(t) => writeln!(out, "target dim: {t}").unwrap(),
        None => writeln!(out, "target dim: none").unwrap(),
    }
    writeln!(out, "euler characteristic: {}", cert.euler).unwrap();
    writeln!(
        out,
        "homology dims: {}{}",
        dims_text(&cert.homology.degrees),
        cert.homology.target.map(|t| format!(", cokernel of eps {t}")).unwrap_or_default()
    )
    .unwrap();
    writeln!(out, "free up to degree: {}", free_degree_text(c)).unwrap();
    if let Some(m) = cert.requested_m {
        writeln!(out, "requested m: {m}").unwrap();
    }
    let failures: Vec<String> = cert.failures.iter().map(ToString::to_string).chain(extra.iter().cloned()).collect();
    if failures.is_empty() {
        writeln!(out, "verdict: PASS").unwrap();
    } else {
        writeln!(out, "verdict: FAIL").unwrap();
        writeln!(out, "first violation: {}", failures[0]).unwrap();
        for f in &failures[1..] {
            writeln!(out, "  also: {f}").unwrap();
        }
    }
    out
}

fn tags_text(c: &Complex) -> String {
    let mut out = String::new();
    match c.tags() {
        Some(tags) => {
            for (j, t) in tags.iter().enumerate() {
                writeln!(out, "  C_{j}: dim {} = {}", t.dim(), compact_descriptor(t)).unwrap();
            }
        }
        None => writeln!(out, "  (untagged)").unwrap(),
    }
    out
}

/// `build`: a certified good resolution of the module in `input`.
pub fn cmd_build(input: &Path, m: usize, out: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let module = load_module(input, cfg)?;
    let res = good_resolution(&module, m)?;
    write_file(out, &io::to_canonical_string(&io::complex_to_value(&res.complex, Some(m))))?;
    let mut summary = certificate_text(&res.complex, &res.certificate, &[]);
    summary.push_str("tags:\n");
    summary.push_str(&tags_text(&res.complex));
    writeln!(summary, "digest: {}", io::complex_digest(&res.complex)).unwrap();
    Ok(Outcome::ok(summary))
}

/// `verify`: recomputes every certificate. Exit 1 on any failure.
pub fn cmd_verify(input: &Path, m: Option<usize>, cfg: &RunConfig) -> Result<Outcome> {
    let (c, meta) = load_complex(input, cfg)?;
    let m = m.or(meta.m);
    let cert = c.certify(m);
    let mut extra = Vec::new();
    if let Some(d) = &meta.digest {
        if *d != io::complex_digest(&c) {
            extra.push("digest does not match file contents".to_string());
        }
    }
    let stdout = certificate_text(&c, &cert, &extra);
    let code = if cert.passed() && extra.is_empty() { 0 } else { 1 };
    Ok(Outcome {
        stdout,
        stderr: String::new(),
        code,
    })
}

/// `omega`: the n-th Heller loop, optionally compared against another module.
pub fn cmd_omega(input: &Path, n: usize, out: Option<&Path>, compare: Option<&Path>, cfg: &RunConfig) -> Result<Outcome> {
    let module = load_module(input, cfg)?;
    let omega = module.omega_n(n)?;
    let text = io::to_canonical_string(&io::module_to_value(&omega));
    let mut report = String::new();
    writeln!(report, "omega^{n}: dim {}, free rank {}", omega.dim(), omega.free_rank()).unwrap();
    if let Some(other) = compare {
        let other = load_module(other, cfg)?;
        let probe = omega.iso_probe(&other, cfg.trials, cfg.seed)?;
        writeln!(report, "iso probe: {}", probe_word(&probe)).unwrap();
    }
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(Outcome::ok(report))
        }
        None => Ok(Outcome {
            stdout: text,
            stderr: report,
            code: 0,
        }),
    }
}

fn probe_word(p: &IsoProbe) -> &'static str {
    match p {
        IsoProbe::Iso(_) => "Iso",
        IsoProbe::NotIsomorphic => "NotIsomorphic",
        IsoProbe::Inconclusive => "Inconclusive",
    }
}

/// `tensor`: Mackey product of two descriptors.
pub fn cmd_tensor(a: &Path, b: &Path, out: Option<&Path>, cfg: &RunConfig) -> Result<Outcome> {
    let d = load_descriptor(a, cfg)?.tensor(&load_descriptor(b, cfg)?)?;
    d.group().check_dim("descriptor dimension", d.dim())?;
    let text = io::to_canonical_string(&io::descriptor_to_value(&d));
    Ok(Outcome::ok(emit(out, text)?))
}

/// `random`: a seeded random module.
pub fn cmd_random(p: u64, r: usize, dim: usize, out: Option<&Path>, cfg: &RunConfig) -> Result<Outcome> {
    let group = Group::with_caps(p, r, cfg.caps)?;
    let m = random_module(group, dim, cfg.seed)?;
    let text = io::to_canonical_string(&io::module_to_value(&m));
    Ok(Outcome::ok(emit(out, text)?))
}

/// `trim`: splits the free summands off the resolved module and removes them
/// from degree 0.
pub fn cmd_trim(input: &Path, m: Option<usize>, out: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let (c, meta) = load_complex(input, cfg)?;
    let m = m.or(meta.m);
    let target = c
        .target()
        .ok_or_else(|| Error::NotResolution("complex is not augmented".into()))?;
    let stripped = target.strip_free()?;
    let back = stripped
        .iso
        .matrix()
        .inverse()
        .ok_or_else(|| Error::Internal("free splitting is not invertible".into()))?;
    let project = |i: usize| -> Result<ModuleMap> {
        let pr = &stripped.split.projections[i];
        Ok(ModuleMap::new_unchecked(target.clone(), pr.target().clone(), pr.matrix().mul(&back)?))
    };
    let trimmed = trim(&c, &project(0)?, &project(1)?)?;
    let cert = trimmed.certify(m);
    write_file(out, &io::to_canonical_string(&io::complex_to_value(&trimmed, m)))?;
    let mut summary = format!("removed free rank: {}\n", stripped.free_rank);
    summary.push_str(&certificate_text(&trimmed, &cert, &[]));
    let code = if cert.passed() { 0 } else { 4 };
    Ok(Outcome {
        stdout: summary,
        stderr: String::new(),
        code,
    })
}

/// `info`: a short human-readable summary of any file.
pub fn cmd_info(input: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let text = match load(input, cfg)? {
        AnyFile::Module(m) => module_info(&m)?,
        AnyFile::Descriptor(d) => descriptor_info(&d),
        AnyFile::Complex(c, meta) => complex_info(&c, &meta)?,
    };
    Ok(Outcome::ok(text))
}

/// Dimensions rad^0 M > rad^1 M > ... > 0.
pub fn radical_series_dims(m: &Module) -> Result<Vec<usize>> {
    let mut dims = vec![m.dim()];
    let mut current = m.clone();
    while current.dim() > 0 {
        current = current.radical()?.0;
        dims.push(current.dim());
    }
    Ok(dims)
}

fn module_info(m: &Module) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "module over {}", m.group()).unwrap();
    writeln!(out, "dim: {}", m.dim()).unwrap();
    writeln!(out, "free rank: {}", m.free_rank()).unwrap();
    let rad = radical_series_dims(m)?;
    writeln!(out, "radical series dims: {}", dims_text(&rad)).unwrap();
    writeln!(out, "radical length: {}", rad.len() - 1).unwrap();
    writeln!(out, "trivial action: {}", if m.is_trivial_action() { "yes" } else { "no" }).unwrap();
    Ok(out)
}

fn descriptor_info(d: &PermutationDescriptor) -> String {
    let mut out = String::new();
    writeln!(out, "permutation descriptor over {}", d.group()).unwrap();
    writeln!(out, "parts: {}", d.parts().len()).unwrap();
    writeln!(out, "dim: {}", d.dim()).unwrap();
    writeln!(out, "free parts: {}", d.free_parts()).unwrap();
    writeln!(out, "summary: {}", compact_descriptor(d)).unwrap();
    out
}

fn complex_info(c: &Complex, meta: &ComplexMeta) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "complex over {}", c.group()).unwrap();
    writeln!(out, "terms: {}", c.len()).unwrap();
    writeln!(out, "term dims: {}", dims_text(&c.term_dims())).unwrap();
    match c.target() {
        Some(t) => writeln!(out, "target: dim {}, free rank {}", t.dim(), t.free_rank()).unwrap(),
        None => writeln!(out, "target: none").unwrap(),
    }
    writeln!(out, "free up to degree: {}", free_degree_text(c)).unwrap();
    if let Some(m) = meta.m {
        writeln!(out, "certified m: {m}").unwrap();
    }
    out.push_str("tags:\n");
    out.push_str(&tags_text(c));
    Ok(out)
}
