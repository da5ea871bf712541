//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always reach stdout.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permres::complex::{lift_chain_map, Augmentation, Complex};
use permres::io;
use permres::module::IsoProbe;
use permres::perm::{mackey_tensor, realize, recognize, PermutationDescriptor, Subgroup};
use permres::random::random_module;
use permres::resolution::{good_resolution, periodic_complex, splice, syzygy_checks, trim, trivial_resolution};
use permres::series::ses_from_flag;
use permres::{Caps, Group, Matrix, Module, ModuleMap};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn group(p: u64, r: usize) -> Group {
    Group::new(p, r).expect("valid group")
}

fn periodic_exactness() -> Check {
    let mut n = 0;
    for p in [2, 3, 5] {
        for ell in [2, 4, 6] {
            let c = periodic_complex(group(p, 1), 1, ell).map_err(e2s)?;
            let h = c.homology_dims();
            ensure(h.is_zero(), || format!("p={p} ell={ell}: homology {h:?}"))?;
            ensure(c.len() == ell + 1, || format!("p={p} ell={ell}: {} terms", c.len()))?;
            n += 1;
        }
    }
    Ok(format!("{n} periodic complexes exact"))
}

fn trivial_construction() -> Check {
    let mut n = 0;
    for (p, r) in [(2, 1), (3, 1), (2, 2), (3, 2), (2, 3)] {
        let g = group(p, r);
        for m in 0..=2 {
            let res = trivial_resolution(g, m).map_err(|e| format!("p={p} r={r} m={m}: {e}"))?;
            let c = &res.complex;
            let ctx = || format!("p={p} r={r} m={m}");
            ensure(c.free_up_to(m), || format!("{}: not free up to m", ctx()))?;
            ensure(c.tags().is_some(), || format!("{}: untagged", ctx()))?;
            let free = realize(&PermutationDescriptor::free(g, 1)).map_err(e2s)?.module;
            ensure(c.term(0) == Some(&free), || format!("{}: degree 0 is not kE", ctx()))?;
            ensure(c.euler_characteristic() == 1, || format!("{}: euler {}", ctx(), c.euler_characteristic()))?;
            if (p, r, m) == (2, 2, 1) {
                ensure(c.term_dims() == vec![4, 8, 8, 4, 1], || format!("dims {:?}", c.term_dims()))?;
            }
            n += 1;
        }
    }
    Ok(format!("{n} resolutions of k certified"))
}

fn all_subgroups(g: Group) -> Vec<Subgroup> {
    let vectors: Vec<Vec<u64>> = g.elements().map(|v| v.into_iter().map(u64::from).collect()).collect();
    let mut found = BTreeSet::new();
    let mut frontier = vec![Subgroup::trivial(g)];
    found.insert(Subgroup::trivial(g));
    while let Some(h) = frontier.pop() {
        for v in &vectors {
            let k = Subgroup::from_rows(g, std::slice::from_ref(v)).expect("row");
            let s = h.sum(&k).expect("same group");
            if found.insert(s.clone()) {
                frontier.push(s);
            }
        }
    }
    found.into_iter().collect()
}

fn mackey_formula() -> Check {
    let mut pairs = 0;
    for (p, r, expected) in [(2, 3, 16), (3, 2, 6)] {
        let g = group(p, r);
        let subs = all_subgroups(g);
        ensure(subs.len() == expected, || format!("{} subgroups of ({p},{r})", subs.len()))?;
        for h in &subs {
            for k in &subs {
                let a = realize(&PermutationDescriptor::single(h.clone())).map_err(e2s)?.module;
                let b = realize(&PermutationDescriptor::single(k.clone())).map_err(e2s)?.module;
                let product = a.tensor(&b).map_err(e2s)?;
                let seen = recognize(&product).map_err(e2s)?;
                let predicted = mackey_tensor(h, k).map_err(e2s)?;
                ensure(seen == predicted, || format!("{h} x {k}: saw {seen}, predicted {predicted}"))?;
                let realized = realize(&predicted).map_err(e2s)?;
                ensure(realized.module.dim() == a.dim() * b.dim(), || format!("{h} x {k}: dims"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} subgroup pairs"))
}

fn heller_periodicity() -> Check {
    for p in [2, 3] {
        let g = group(p, 1);
        let k = Module::trivial(g, 1).map_err(e2s)?;
        let omega1 = k.omega_n(1).map_err(e2s)?;
        ensure(omega1.dim() == p as usize - 1, || format!("p={p}: dim omega k = {}", omega1.dim()))?;
        let omega2 = k.omega_n(2).map_err(e2s)?;
        match omega2.iso_probe(&k, 16, 0).map_err(e2s)? {
            IsoProbe::Iso(_) => {}
            other => return Err(format!("p={p}: omega^2 k vs k: {other}")),
        }
    }
    Ok("omega^2 k = k for C_2, C_3".into())
}

/// A random proper nonzero submodule, generated by one vector pushed deep
/// into the radical series.
fn random_proper_submodule(m: &Module, rng: &mut ChaCha8Rng) -> Option<ModuleMap> {
    let f = m.field();
    let id = Matrix::identity(f, m.dim());
    for _ in 0..100 {
        let mut v: Vec<u32> = (0..m.dim()).map(|_| rng.gen_range(0..f.p())).collect();
        for a in m.generators() {
            let low = a.sub(&id).expect("square");
            for _ in 0..rng.gen_range(0..3) {
                v = low.mul_vec(&v);
            }
        }
        let (sub, incl) = m.submodule_generated_by(&Matrix::column_vector(f, &v)).expect("submodule");
        if sub.dim() > 0 && sub.dim() < m.dim() {
            return Some(incl);
        }
    }
    None
}

fn two_out_of_three() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    let mut seed = 0u64;
    let mut lift_degrees = 0;
    while done < 20 {
        seed += 1;
        let p = [2, 3][done % 2];
        let r = 1 + (done / 2) % 2;
        let max_dim = if r == 1 { 6 } else { 4 };
        let dim = rng.gen_range(2..=max_dim);
        let g = group(p, r);
        let m = random_module(g, dim, seed).map_err(e2s)?;
        let Some(incl) = random_proper_submodule(&m, &mut rng) else {
            continue;
        };
        let ses = ses_from_flag(&incl).map_err(e2s)?;
        let ctx = format!("p={p} r={r} dim M={dim} dim L={} seed={seed}", ses.sub().dim());
        let res_m = good_resolution(ses.middle(), 0).map_err(|e| format!("{ctx}: {e}"))?.complex;
        let ell = res_m.top_degree().unwrap_or(0);
        let res_l = good_resolution(ses.sub(), ell).map_err(|e| format!("{ctx}: {e}"))?.complex;
        let lift = lift_chain_map(ses.incl.matrix(), &res_l, &res_m, ell).map_err(|e| format!("{ctx}: {e}"))?;
        lift.check(Some(ses.incl.matrix())).map_err(|e| format!("{ctx}: {e}"))?;
        lift_degrees += res_l.len().max(res_m.len()) + 1;
        let out = splice(&res_l, &res_m, &ses.incl, &ses.proj).map_err(|e| format!("{ctx}: {e}"))?;
        ensure(out.target() == Some(ses.quotient()), || format!("{ctx}: wrong target"))?;
        ensure(out.certify(None).passed(), || format!("{ctx}: splice not certified"))?;
        done += 1;
    }
    Ok(format!("20 splices certified, chain identities checked in {lift_degrees} degrees"))
}

fn end_to_end() -> Check {
    let mut runs = 0;
    for i in 0..20u64 {
        let p = [2, 3][(i % 2) as usize];
        let r = 1 + ((i / 2) % 2) as usize;
        let dim = 1 + (i / 4) as usize % 5;
        let g = group(p, r);
        let module = random_module(g, dim, 1000 + i).map_err(e2s)?;
        for m in 0..=2 {
            let ctx = format!("p={p} r={r} dim={dim} seed={} m={m}", 1000 + i);
            let res = good_resolution(&module, m).map_err(|e| format!("{ctx}: {e}"))?;
            let c = &res.complex;
            ensure(res.certificate.passed(), || format!("{ctx}: certificate failed"))?;
            ensure(c.tags().is_some() && c.free_up_to(m), || format!("{ctx}: tags or freeness"))?;
            ensure(c.euler_characteristic() == dim as i64, || format!("{ctx}: euler"))?;
            for s in syzygy_checks(c, m).map_err(e2s)? {
                ensure(s.holds(g.order()), || format!("{ctx}: syzygy {s:?}"))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} resolutions certified"))
}

fn free_unit(g: Group, t: usize) -> Complex {
    let f = Module::free(g, t).expect("free");
    Complex::concentrated(
        f.clone(),
        Some(Augmentation {
            target: f.clone(),
            matrix: Matrix::identity(g.field(), f.dim()),
        }),
        Some(PermutationDescriptor::free(g, t)),
    )
    .expect("shapes")
}

fn trimming() -> Check {
    for i in 0..10u64 {
        let t = 1 + (i % 2) as usize;
        let pipeline = i % 4 >= 2;
        let (p, r) = if pipeline { ([2, 3][(i % 2) as usize], 1) } else { ([2, 3][(i / 4 % 2) as usize], 1 + (i / 2 % 2) as usize) };
        let g = group(p, r);
        let m = (i % 3) as usize;
        let dim = 1 + (i % 3) as usize;
        let module = random_module(g, dim, 2000 + i).map_err(e2s)?;
        let q = Module::free(g, t).map_err(e2s)?;
        let split = module.direct_sum(&q).map_err(e2s)?;
        let res = if pipeline {
            good_resolution(&split.module, m).map_err(e2s)?.complex
        } else {
            let rm = good_resolution(&module, m).map_err(e2s)?.complex;
            rm.direct_sum(&free_unit(g, t)).map_err(e2s)?
        };
        let ctx = format!("case {i}: p={p} r={r} t={t} m={m} pipeline={pipeline}");
        ensure(res.certify(Some(m)).passed(), || format!("{ctx}: input not certified"))?;
        let out = trim(&res, &split.projections[0], &split.projections[1]).map_err(|e| format!("{ctx}: {e}"))?;
        let cert = out.certify(Some(m));
        ensure(cert.passed(), || format!("{ctx}: {:?}", cert.failures))?;
        ensure(out.target() == Some(&module), || format!("{ctx}: wrong target"))?;
        let (before, after) = (res.tag(0).expect("tag"), out.tag(0).expect("tag"));
        ensure(before.free_parts() == after.free_parts() + t, || format!("{ctx}: free parts"))?;
        ensure(before.dim() == after.dim() + t * g.order(), || format!("{ctx}: dims"))?;
        ensure(out.free_prefix() >= res.free_prefix().min(out.len()), || format!("{ctx}: freeness degree dropped"))?;
    }
    Ok("10 trims certified".into())
}

fn run(bin: &Path, args: &[&str], dir: &Path) -> Result<(i32, String), String> {
    let out = Command::new(bin).args(args).current_dir(dir).output().map_err(e2s)?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn read(dir: &Path, name: &str) -> Result<String, String> {
    std::fs::read_to_string(dir.join(name)).map_err(e2s)
}

fn round_trips(text: &str) -> Result<(), String> {
    let v = io::parse_json(text).map_err(e2s)?;
    let again = match io::any_from_value(&v, Caps::default()).map_err(e2s)? {
        io::AnyFile::Module(m) => io::module_to_value(&m),
        io::AnyFile::Descriptor(d) => io::descriptor_to_value(&d),
        io::AnyFile::Complex(c, meta) => io::complex_to_value(&c, meta.m),
    };
    ensure(io::to_canonical_string(&again) == text, || "round trip changed bytes".into())
}

fn determinism() -> Check {
    let bin = Path::new(env!("CARGO_BIN_EXE_permres"));
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let dir = tmp.path();
    let mut files = Vec::new();
    for (p, r, dim, seed) in [("2", "1", "3", "7"), ("3", "2", "3", "1"), ("2", "2", "2", "4")] {
        let a = format!("m_{p}_{r}_{seed}_a.json");
        let b = format!("m_{p}_{r}_{seed}_b.json");
        for name in [&a, &b] {
            let (code, _) = run(bin, &["random", "--p", p, "--r", r, "--dim", dim, "--seed", seed, "--out", name], dir)?;
            ensure(code == 0, || format!("random exit {code}"))?;
        }
        ensure(read(dir, &a)? == read(dir, &b)?, || format!("random {p} {r} {dim} {seed} not reproducible"))?;
        let res_a = format!("r_{p}_{r}_{seed}_a.json");
        let res_b = format!("r_{p}_{r}_{seed}_b.json");
        for name in [&res_a, &res_b] {
            let (code, _) = run(bin, &["build", &a, "--m", "1", "--out", name], dir)?;
            ensure(code == 0, || format!("build exit {code}"))?;
        }
        ensure(read(dir, &res_a)? == read(dir, &res_b)?, || "build not reproducible".into())?;
        let (code, report) = run(bin, &["verify", &res_a], dir)?;
        ensure(code == 0 && report.contains("verdict: PASS"), || format!("verify failed: {report}"))?;
        let trimmed = format!("t_{p}_{r}_{seed}.json");
        let (code, _) = run(bin, &["trim", &res_a, "--out", &trimmed], dir)?;
        ensure(code == 0, || format!("trim exit {code}"))?;
        let (code, _) = run(bin, &["verify", &trimmed], dir)?;
        ensure(code == 0, || "trimmed output does not verify".into())?;
        let omega = format!("o_{p}_{r}_{seed}.json");
        let (code, _) = run(bin, &["omega", &a, "--n", "2", "--out", &omega], dir)?;
        ensure(code == 0, || format!("omega exit {code}"))?;
        files.extend([a, res_a, trimmed, omega]);
    }
    let g = group(2, 3);
    for (name, d) in [
        ("h1.json", PermutationDescriptor::single(Subgroup::coordinate_hyperplane(g, 1).map_err(e2s)?)),
        ("h2.json", PermutationDescriptor::single(Subgroup::coordinate_hyperplane(g, 2).map_err(e2s)?)),
    ] {
        std::fs::write(dir.join(name), io::to_canonical_string(&io::descriptor_to_value(&d))).map_err(e2s)?;
    }
    let (code, _) = run(bin, &["tensor", "h1.json", "h2.json", "--out", "h12.json"], dir)?;
    ensure(code == 0, || format!("tensor exit {code}"))?;
    files.push("h12.json".into());
    for name in &files {
        round_trips(&read(dir, name)?).map_err(|e| format!("{name}: {e}"))?;
        let (code, _) = run(bin, &["info", name], dir)?;
        ensure(code == 0, || format!("info {name} exit {code}"))?;
    }
    Ok(format!("{} output files reproduced, re-verified and round-tripped", files.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("periodic exactness", periodic_exactness, Duration::from_secs(1)),
        ("trivial-module construction", trivial_construction, Duration::from_secs(10)),
        ("Mackey formula", mackey_formula, Duration::from_secs(30)),
        ("Heller periodicity", heller_periodicity, Duration::from_secs(1)),
        ("two-out-of-three splicing", two_out_of_three, Duration::from_secs(60)),
        ("end-to-end good resolutions", end_to_end, Duration::from_secs(300)),
        ("free-summand trimming", trimming, Duration::from_secs(30)),
        ("determinism and round-trip", determinism, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= *budget => format!("PASS  {detail}"),
            Ok(detail) => format!("FAIL  {detail}, but took longer than {budget:?}"),
            Err(why) => format!("FAIL  {why}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!("criterion {} ({name}): {verdict} [{:.2}s]", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
