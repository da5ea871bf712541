//! Permutation resolutions: periodic complexes, the tensor resolution of the
//! trivial module, rotation and splicing along short exact sequences, and
//! free-summand trimming.

use crate::complex::{cone, lift_chain_map, Augmentation, Certificate, Complex};
use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::group::Group;
use crate::module::{Module, ModuleMap};
use crate::perm::{orbits, realize, PermutationDescriptor, Subgroup};
use crate::series::{CompositionSeries, ShortExactSequence};

/// An augmented, tagged resolution certified free up to degree `m`.
#[derive(Clone, Debug)]
pub struct GoodResolution {
    pub complex: Complex,
    pub m: usize,
    pub certificate: Certificate,
}

impl GoodResolution {
    /// Certifies `complex` from scratch and wraps it.
    pub fn certify(complex: Complex, m: usize) -> Result<Self> {
        let certificate = complex.certify(Some(m)).into_result()?;
        Ok(GoodResolution { complex, m, certificate })
    }
}

/// Smallest even integer >= m + 1.
pub fn periodic_length(m: usize) -> usize {
    (m + 2) & !1
}

/// Q(i): k(E/H_i) in degrees 0..ell-1 and k in degree ell, with d alternating
/// between g - 1 and the norm, where g translates by e_i.
pub fn periodic_complex(group: Group, i: usize, ell: usize) -> Result<Complex> {
    let c = periodic_complex_unchecked(group, i, ell)?;
    c.certify(None).into_result()?;
    Ok(c)
}

fn periodic_complex_unchecked(group: Group, i: usize, ell: usize) -> Result<Complex> {
    if ell == 0 || ell % 2 == 1 {
        return Err(Error::OddLength(ell));
    }
    let h = Subgroup::coordinate_hyperplane(group, i)?;
    let tagged = realize(&PermutationDescriptor::single(h.clone()))?;
    let f = group.field();
    let p = group.p() as usize;
    let g = tagged.module.generator(i - 1).clone();
    let id = Matrix::identity(f, p);
    let g_minus_1 = g.sub(&id)?;
    let mut norm = id.clone();
    let mut power = id;
    for _ in 1..p {
        power = power.mul(&g)?;
        norm = norm.add(&power)?;
    }
    let k = Module::trivial(group, 1)?;
    let mut terms = vec![tagged.module.clone(); ell];
    terms.push(k.clone());
    let mut differentials: Vec<Matrix> = (1..ell)
        .map(|j| if j % 2 == 1 { g_minus_1.clone() } else { norm.clone() })
        .collect();
    differentials.push(Matrix::from_fn(f, p, 1, |_, _| 1));
    let mut tags = vec![tagged.descriptor.clone(); ell];
    tags.push(PermutationDescriptor::single(Subgroup::whole(group)));
    Complex::new(
        group,
        terms,
        differentials,
        Some(Augmentation {
            target: k,
            matrix: Matrix::from_fn(f, 1, p, |_, _| 1),
        }),
        Some(tags),
    )
}

/// Q(1) (x) ... (x) Q(r), each of length `periodic_length(m)`.
pub fn trivial_resolution(group: Group, m: usize) -> Result<GoodResolution> {
    GoodResolution::certify(trivial_resolution_unchecked(group, m)?, m)
}

fn trivial_resolution_unchecked(group: Group, m: usize) -> Result<Complex> {
    let ell = periodic_length(m);
    let mut acc = periodic_complex_unchecked(group, 1, ell)?;
    for i in 2..=group.rank() {
        acc = crate::complex::tensor_complexes(&acc, &periodic_complex_unchecked(group, i, ell)?)?;
    }
    Ok(acc)
}

/// The rotated sequence 0 -> Omega N -> L + P -> M -> 0 of a sequence
/// 0 -> L -> M -> N -> 0, where P -> N is the projective cover.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub ses: ShortExactSequence,
    /// The projective cover P -> N.
    pub cover: ModuleMap,
    /// The lift P -> M of the cover through M -> N.
    pub phi: ModuleMap,
    /// Omega N -> P.
    pub omega_incl: ModuleMap,
}

pub fn rotate(ses: &ShortExactSequence) -> Result<Rotation> {
    let cover = ses.quotient().projective_cover()?;
    rotate_with_cover(ses, cover.map)
}

/// `cover` must be a surjection from a free module onto the quotient.
fn rotate_with_cover(ses: &ShortExactSequence, cover: ModuleMap) -> Result<Rotation> {
    let group = ses.middle().group();
    let order = group.order();
    let free = cover.source().clone();
    let rank = free.dim() / order;
    let proj = ses.proj.matrix();
    let m = ses.middle();
    let action = m.action();
    let mut phi = Matrix::zeros(m.field(), m.dim(), free.dim());
    for b in 0..rank {
        let target = cover.matrix().select_cols(&[b * order]);
        let preimage = proj.solve(&target)?;
        for (u, col) in action.orbit(&group, &preimage.column(0)).iter().enumerate() {
            for (row, &v) in col.iter().enumerate() {
                if v != 0 {
                    phi.set(row, b * order + u, v);
                }
            }
        }
    }
    let phi = ModuleMap::new(free.clone(), m.clone(), phi)?;
    let (omega, omega_incl) = cover.kernel()?;
    let phi_on_omega = phi.matrix().mul(omega_incl.matrix())?;
    let corestricted = ses
        .incl
        .matrix()
        .solve(&phi_on_omega)
        .map_err(|_| Error::Internal("lift of the cover does not map Omega into L".into()))?;
    let sum = ses.sub().direct_sum(&free)?;
    let into_sum = Matrix::vstack(&[&corestricted.neg(), omega_incl.matrix()])?;
    let outof_sum = Matrix::hstack(&[ses.incl.matrix(), phi.matrix()])?;
    let new_ses = ShortExactSequence::new(
        ModuleMap::new(omega, sum.module.clone(), into_sum)?,
        ModuleMap::new(sum.module, m.clone(), outof_sum)?,
    )?;
    Ok(Rotation {
        ses: new_ses,
        cover,
        phi,
        omega_incl,
    })
}

/// Given resolutions of L' and M', an injection f : L' -> M' and the
/// quotient map M' -> N, lifts f and returns its cone augmented onto N.
pub fn splice(res_l: &Complex, res_m: &Complex, f: &ModuleMap, quotient: &ModuleMap) -> Result<Complex> {
    let c = splice_unchecked(res_l, res_m, f, quotient)?;
    c.certify(None).into_result()?;
    Ok(c)
}

fn splice_unchecked(res_l: &Complex, res_m: &Complex, f: &ModuleMap, quotient: &ModuleMap) -> Result<Complex> {
    let (Some(tl), Some(tm)) = (res_l.target(), res_m.target()) else {
        return Err(Error::NotResolution("splice needs augmented complexes".into()));
    };
    if tl != f.source() || tm != f.target() || quotient.source() != f.target() {
        return Err(Error::DimensionMismatch("splice maps do not match the resolved modules".into()));
    }
    let ell = res_m.top_degree().unwrap_or(0);
    let lift = lift_chain_map(f.matrix(), res_l, res_m, ell)?;
    lift.check(Some(f.matrix()))?;
    let c = cone(&lift)?;
    let eps = res_m.augmentation().expect("checked above");
    let matrix = quotient.matrix().mul(&eps.matrix)?;
    let matrix = if c.is_empty() {
        Matrix::zeros(matrix.field(), matrix.rows(), 0)
    } else {
        matrix
    };
    c.with_augmentation(Some(Augmentation {
        target: quotient.target().clone(),
        matrix,
    }))
}

/// A permutation resolution of `module` that is free up to degree `m`,
/// built along a composition series by rotating and splicing.
pub fn good_resolution(module: &Module, m: usize) -> Result<GoodResolution> {
    let group = module.group();
    let f = module.field();
    if module.dim() == 0 {
        return GoodResolution::certify(Complex::empty(module.clone()), m);
    }
    if module.is_free() {
        let cover = module.projective_cover()?;
        let complex = Complex::concentrated(
            cover.free_module().clone(),
            Some(Augmentation {
                target: module.clone(),
                matrix: cover.map.into_matrix(),
            }),
            Some(PermutationDescriptor::free(group, cover.rank)),
        )?;
        return GoodResolution::certify(complex, m);
    }
    let series = CompositionSeries::new(module)?;
    let kfree = Module::free(group, 1)?;
    let ones = Matrix::from_fn(f, 1, group.order(), |_, _| 1);
    let free_unit = Complex::concentrated(
        kfree.clone(),
        Some(Augmentation {
            target: kfree.clone(),
            matrix: Matrix::identity(f, group.order()),
        }),
        Some(PermutationDescriptor::free(group, 1)),
    )?;
    // L_1 is k with the same 1 x 1 identity generators.
    let mut res = trivial_resolution_unchecked(group, m)?;
    let l1 = series.step(1);
    let eps = res.augmentation().expect("augmented").matrix.clone();
    res = res.with_augmentation(Some(Augmentation { target: l1, matrix: eps }))?;
    for i in 2..=series.len() {
        let ses = series.ses(i)?;
        let n = ses.quotient();
        // N is k, so its cover is the augmentation of kE.
        let cover = ModuleMap::new(kfree.clone(), n.clone(), ones.clone())?;
        let rot = rotate_with_cover(&ses, cover)?;
        let res_middle = res.direct_sum(&free_unit)?;
        if res_middle.target() != Some(rot.ses.middle()) {
            return Err(Error::Internal("direct sum target differs from rotated middle term".into()));
        }
        let ell = res_middle.top_degree().unwrap_or(0);
        let res_omega = trivial_resolution_unchecked(group, m.max(ell) + 1)?.truncate()?;
        if res_omega.target() != Some(rot.ses.sub()) {
            return Err(Error::Internal("truncated trivial resolution does not resolve the rotated Omega".into()));
        }
        res = splice_unchecked(&res_omega, &res_middle, &rot.ses.incl, &rot.ses.proj)?;
    }
    let eps = res.augmentation().expect("augmented").matrix.clone();
    let res = res.with_augmentation(Some(Augmentation {
        target: module.clone(),
        matrix: series.basis.mul(&eps)?,
    }))?;
    GoodResolution::certify(res, m)
}

/// One row of the syzygy check: K_j = ker of the boundary leaving C_{j-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyzygyCheck {
    pub degree: usize,
    pub kernel_dim: usize,
    pub kernel_free_rank: usize,
    pub omega_dim: usize,
}

impl SyzygyCheck {
    pub fn holds(&self, order: usize) -> bool {
        self.kernel_dim as i64 - (order * self.kernel_free_rank) as i64 == self.omega_dim as i64
    }
}

/// For 1 <= j <= m, compares ker(d_{j-1}) (with d_0 = eps) against Omega^j M
/// up to free summands.
pub fn syzygy_checks(res: &Complex, m: usize) -> Result<Vec<SyzygyCheck>> {
    let target = res
        .target()
        .ok_or_else(|| Error::NotResolution("syzygies need an augmentation".into()))?;
    let mut omega = target.clone();
    let mut out = Vec::with_capacity(m);
    for j in 1..=m {
        omega = omega.omega()?.0;
        let kernel = if j == 1 {
            let Some(c0) = res.term(0) else {
                out.push(SyzygyCheck {
                    degree: j,
                    kernel_dim: 0,
                    kernel_free_rank: 0,
                    omega_dim: omega.dim(),
                });
                continue;
            };
            ModuleMap::new_unchecked(c0.clone(), target.clone(), res.augmentation().expect("checked").matrix.clone()).kernel()?.0
        } else {
            match (res.term(j - 1), res.term(j - 2)) {
                (Some(src), Some(dst)) => {
                    let d = res.differential(j - 1).cloned().unwrap_or_else(|| Matrix::zeros(src.field(), dst.dim(), src.dim()));
                    ModuleMap::new_unchecked(src.clone(), dst.clone(), d).kernel()?.0
                }
                (Some(src), None) => src.clone(),
                _ => Module::zero(res.group()),
            }
        };
        out.push(SyzygyCheck {
            degree: j,
            kernel_dim: kernel.dim(),
            kernel_free_rank: kernel.free_rank(),
            omega_dim: omega.dim(),
        });
    }
    Ok(out)
}

/// Removes a free summand Q of the resolved module X = M + Q.
///
/// `pi_m : X -> M` and `pi_q : X -> Q` are the projections. Free orbits of the
/// degree-0 term are chosen greedily until their images span Q modulo its
/// radical; the remaining orbits form the new degree-0 term.
pub fn trim(res: &Complex, pi_m: &ModuleMap, pi_q: &ModuleMap) -> Result<Complex> {
    let aug = res
        .augmentation()
        .ok_or_else(|| Error::SelectionFailed("resolution is not augmented".into()))?;
    if pi_m.source() != &aug.target || pi_q.source() != &aug.target {
        return Err(Error::SelectionFailed("projections do not start at the resolved module".into()));
    }
    let q = pi_q.target();
    let group = res.group();
    let f = group.field();
    let order = group.order();
    if !q.is_free() {
        return Err(Error::SelectionFailed("summand to remove is not free".into()));
    }
    let t = q.dim() / order;
    if t == 0 {
        return res
            .clone()
            .with_augmentation(Some(Augmentation {
                target: pi_m.target().clone(),
                matrix: pi_m.matrix().mul(&aug.matrix)?,
            }));
    }
    let c0 = res
        .term(0)
        .ok_or_else(|| Error::SelectionFailed("resolution has no degree-0 term".into()))?;
    let orbs = orbits(c0).map_err(|e| Error::SelectionFailed(format!("degree-0 term: {e}")))?;
    let to_q = pi_q.matrix().mul(&aug.matrix)?;
    let mut span = q.radical()?.1.into_matrix();
    let mut chosen: Vec<usize> = Vec::new();
    for (idx, o) in orbs.iter().enumerate() {
        if chosen.len() == t {
            break;
        }
        if !o.stabilizer.is_trivial() {
            continue;
        }
        let image = to_q.select_cols(&[o.points[0]]);
        let candidate = Matrix::hstack(&[&span, &image])?;
        if candidate.rank() > span.rank() {
            span = candidate;
            chosen.push(idx);
        }
    }
    if chosen.len() < t {
        return Err(Error::SelectionFailed(format!(
            "found {} of {t} free orbits covering the summand",
            chosen.len()
        )));
    }
    let mut sel_points = Vec::with_capacity(t * order);
    for &idx in &chosen {
        sel_points.extend(&orbs[idx].points);
    }
    let mut is_selected = vec![false; c0.dim()];
    for &pt in &sel_points {
        is_selected[pt] = true;
    }
    let rest_points: Vec<usize> = (0..c0.dim()).filter(|&i| !is_selected[i]).collect();
    let iota_sel = Matrix::identity(f, c0.dim()).select_cols(&sel_points);
    let alpha = to_q.mul(&iota_sel)?;
    let alpha_inv = alpha
        .inverse()
        .ok_or_else(|| Error::SelectionFailed("selected orbits do not map isomorphically onto the summand".into()))?;
    let e = iota_sel.mul(&alpha_inv)?.mul(&to_q)?;
    let iota_rest = Matrix::identity(f, c0.dim()).select_cols(&rest_points);
    let complement = Matrix::identity(f, c0.dim()).sub(&e)?.mul(&iota_rest)?;
    let new_eps = pi_m.matrix().mul(&aug.matrix)?.mul(&complement)?;
    let rest_module = Module::new(
        group,
        rest_points.len(),
        c0.generators()
            .iter()
            .map(|a| a.select_rows(&rest_points).select_cols(&rest_points))
            .collect(),
    )?;
    let mut terms = res.terms().to_vec();
    terms[0] = rest_module;
    let mut differentials = res.differentials().to_vec();
    if let Some(d1) = differentials.first_mut() {
        *d1 = d1.select_rows(&rest_points);
    }
    let tags = match res.tags() {
        Some(tags) => {
            let mut tags = tags.to_vec();
            let removed = PermutationDescriptor::free(group, t);
            let mut parts = tags[0].parts().to_vec();
            for h in removed.parts() {
                let pos = parts
                    .iter()
                    .position(|x| x == h)
                    .ok_or_else(|| Error::SelectionFailed("degree-0 tag has too few free parts".into()))?;
                parts.remove(pos);
            }
            tags[0] = PermutationDescriptor::new(group, parts)?;
            Some(tags)
        }
        None => None,
    };
    let out = Complex::new(
        group,
        terms,
        differentials,
        Some(Augmentation {
            target: pi_m.target().clone(),
            matrix: new_eps,
        }),
        tags,
    )?;
    Ok(out.trim_top())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: u64, r: usize) -> Group {
        Group::new(p, r).unwrap()
    }

    #[test]
    fn periodic_lengths() {
        assert_eq!(periodic_length(0), 2);
        assert_eq!(periodic_length(1), 2);
        assert_eq!(periodic_length(2), 4);
        assert_eq!(periodic_length(3), 4);
    }

    #[test]
    fn periodic_c2() {
        let c = periodic_complex(g(2, 1), 1, 2).unwrap();
        assert_eq!(c.term_dims(), vec![2, 2, 1]);
        assert_eq!(c.differential(1).unwrap().to_rows(), vec![vec![1, 1], vec![1, 1]]);
        assert!(c.is_resolution());
    }

    #[test]
    fn periodic_c3() {
        let c = periodic_complex(g(3, 1), 1, 2).unwrap();
        assert_eq!(c.term_dims(), vec![3, 3, 1]);
        assert_eq!(c.differential(1).unwrap().rank(), 2);
        assert_eq!(c.differential(2).unwrap().rank(), 1);
        assert!(c.homology_dims().is_zero());
    }

    #[test]
    fn periodic_rejects_odd_length() {
        assert!(matches!(periodic_complex(g(2, 1), 1, 3), Err(Error::OddLength(3))));
        assert!(matches!(periodic_complex(g(2, 1), 2, 2), Err(Error::BadCoordinate { .. })));
    }

    #[test]
    fn trivial_resolution_c2_squared() {
        let r = trivial_resolution(g(2, 2), 1).unwrap();
        assert_eq!(r.complex.term_dims(), vec![4, 8, 8, 4, 1]);
        assert!(r.complex.free_up_to(1));
        assert!(!r.complex.free_up_to(2));
        assert_eq!(r.complex.term(0).unwrap(), &Module::free(g(2, 2), 1).unwrap());
        let r2 = trivial_resolution(g(2, 2), 2).unwrap();
        assert_eq!(r2.complex.len(), 9);
        assert_eq!(r2.complex.free_prefix(), 4);
        assert_eq!(r2.complex.euler_characteristic(), 1);
    }

    #[test]
    fn trivial_resolution_c2_is_periodic_complex() {
        let r = trivial_resolution(g(2, 1), 0).unwrap();
        assert_eq!(r.complex, periodic_complex(g(2, 1), 1, 2).unwrap());
        assert_eq!(r.complex.free_prefix(), 2);
    }

    #[test]
    fn truncated_c3_resolves_omega() {
        let r = trivial_resolution(g(3, 1), 1).unwrap();
        let t = r.complex.truncate().unwrap();
        assert_eq!(t.target().unwrap().dim(), 2);
        assert!(t.is_resolution());
    }

    fn regular_c2_ses() -> ShortExactSequence {
        let kc2 = Module::free(g(2, 1), 1).unwrap();
        CompositionSeries::new(&kc2).unwrap().ses(2).unwrap()
    }

    #[test]
    fn rotate_regular_c2() {
        let rot = rotate(&regular_c2_ses()).unwrap();
        assert_eq!(rot.ses.sub().dim(), 1);
        assert_eq!(rot.ses.middle().dim(), 3);
        assert_eq!(rot.ses.quotient().dim(), 2);
    }

    #[test]
    fn rotate_with_free_quotient() {
        let e = g(3, 1);
        let k = Module::trivial(e, 1).unwrap();
        let kc3 = Module::free(e, 1).unwrap();
        let sum = k.direct_sum(&kc3).unwrap();
        let ses = ShortExactSequence::new(sum.injections[0].clone(), sum.projections[1].clone()).unwrap();
        let rot = rotate(&ses).unwrap();
        assert_eq!(rot.ses.sub().dim(), 0);
        assert_eq!(rot.ses.middle().dim(), 4);
    }

    #[test]
    fn rotate_with_zero_quotient() {
        let e = g(2, 1);
        let k = Module::trivial(e, 1).unwrap();
        let ses = ShortExactSequence::new(ModuleMap::identity(&k), ModuleMap::zero(&k, &Module::zero(e))).unwrap();
        let rot = rotate(&ses).unwrap();
        assert_eq!(rot.ses.middle().dim(), 1);
        assert_eq!(rot.ses.sub().dim(), 0);
    }

    #[test]
    fn good_resolution_regular_c2() {
        let kc2 = Module::free(g(2, 1), 1).unwrap();
        let r = good_resolution(&kc2, 3).unwrap();
        assert_eq!(r.complex.len(), 1);
        let k = Module::trivial(g(2, 1), 1).unwrap();
        let r = good_resolution(&k, 1).unwrap();
        assert_eq!(r.complex.euler_characteristic(), 1);
    }

    #[test]
    fn good_resolution_non_free() {
        let e = g(3, 1);
        let (omega, _) = Module::trivial(e, 1).unwrap().omega().unwrap();
        let r = good_resolution(&omega, 1).unwrap();
        assert!(r.certificate.passed());
        assert_eq!(r.complex.euler_characteristic(), 2);
        for s in syzygy_checks(&r.complex, 1).unwrap() {
            assert!(s.holds(3), "{s:?}");
        }
        let k2 = Module::trivial(g(2, 2), 2).unwrap();
        let r = good_resolution(&k2, 1).unwrap();
        assert!(r.complex.free_up_to(1));
    }

    #[test]
    fn splice_along_socle() {
        let ses = regular_c2_ses();
        let rot = rotate(&ses).unwrap();
        let e = g(2, 1);
        let triv = trivial_resolution(e, 1).unwrap().complex;
        let res_l = triv.clone().with_augmentation(Some(Augmentation {
            target: ses.sub().clone(),
            matrix: triv.augmentation().unwrap().matrix.clone(),
        }))
        .unwrap();
        let unit = Complex::concentrated(
            Module::free(e, 1).unwrap(),
            Some(Augmentation {
                target: Module::free(e, 1).unwrap(),
                matrix: Matrix::identity(e.field(), 2),
            }),
            Some(PermutationDescriptor::free(e, 1)),
        )
        .unwrap();
        let res_m = res_l.direct_sum(&unit).unwrap();
        let ell = res_m.top_degree().unwrap();
        let res_omega = trivial_resolution(e, ell + 1).unwrap().complex.truncate().unwrap();
        let out = splice(&res_omega, &res_m, &rot.ses.incl, &rot.ses.proj).unwrap();
        assert_eq!(out.target().unwrap().dim(), 2);
        assert!(out.is_resolution());
    }

    #[test]
    fn trim_free_summand() {
        let e = g(2, 1);
        let k = Module::trivial(e, 1).unwrap();
        let kc2 = Module::free(e, 1).unwrap();
        let rk = good_resolution(&k, 1).unwrap().complex;
        let rq = good_resolution(&kc2, 1).unwrap().complex;
        let sum = rk.direct_sum(&rq).unwrap();
        let split = k.direct_sum(&kc2).unwrap();
        let trimmed = trim(&sum, &split.projections[0], &split.projections[1]).unwrap();
        let cert = trimmed.certify(Some(1));
        assert!(cert.passed(), "{:?}", cert.failures);
        assert_eq!(trimmed.tag(0).unwrap().free_parts(), sum.tag(0).unwrap().free_parts() - 1);
    }

    #[test]
    fn trim_everything() {
        let e = g(3, 1);
        let kc3 = Module::free(e, 1).unwrap();
        let r = good_resolution(&kc3, 0).unwrap().complex;
        let zero = Module::zero(e);
        let trimmed = trim(&r, &ModuleMap::zero(&kc3, &zero), &ModuleMap::identity(&kc3)).unwrap();
        assert!(trimmed.is_empty());
        assert!(trimmed.is_resolution());
    }
}
