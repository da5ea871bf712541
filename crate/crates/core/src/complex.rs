//! Bounded chain complexes of E-modules.
//!
//! Indexing is homological: `C_0, ..., C_n` with `d_j : C_j -> C_{j-1}`. An
//! optional augmentation `eps : C_0 -> target` plays the role of `d_0` in all
//! exactness checks. Terms may carry permutation tags, which certification
//! re-derives from the term's own basis via [`recognize`].

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::group::Group;
use crate::module::{Module, ModuleMap};
use crate::perm::{orbits, recognize, PermutationDescriptor};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Augmentation {
    pub target: Module,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    group: Group,
    terms: Vec<Module>,
    differentials: Vec<Matrix>,
    augmentation: Option<Augmentation>,
    tags: Option<Vec<PermutationDescriptor>>,
}

impl Complex {
    /// Checks shapes and group consistency; algebraic identities are left to
    /// [`Complex::certify`].
    pub fn new(
        group: Group,
        terms: Vec<Module>,
        differentials: Vec<Matrix>,
        augmentation: Option<Augmentation>,
        tags: Option<Vec<PermutationDescriptor>>,
    ) -> Result<Self> {
        let c = Complex {
            group,
            terms,
            differentials,
            augmentation,
            tags,
        };
        c.check_shapes()?;
        Ok(c)
    }

    fn check_shapes(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::DimensionMismatch(msg));
        if self.terms.iter().any(|t| t.group() != self.group) {
            return Err(Error::GroupMismatch);
        }
        if self.differentials.len() != self.terms.len().saturating_sub(1) {
            return bad(format!(
                "{} terms need {} differentials, found {}",
                self.terms.len(),
                self.terms.len().saturating_sub(1),
                self.differentials.len()
            ));
        }
        for (idx, d) in self.differentials.iter().enumerate() {
            let j = idx + 1;
            if d.shape() != (self.terms[j - 1].dim(), self.terms[j].dim()) {
                return bad(format!("d_{j} has shape {}x{}", d.rows(), d.cols()));
            }
        }
        if let Some(aug) = &self.augmentation {
            if aug.target.group() != self.group {
                return Err(Error::GroupMismatch);
            }
            if aug.matrix.shape() != (aug.target.dim(), self.term_dim(0)) {
                return bad(format!("augmentation has shape {}x{}", aug.matrix.rows(), aug.matrix.cols()));
            }
        }
        if let Some(tags) = &self.tags {
            if tags.len() != self.terms.len() {
                return bad(format!("{} tags for {} terms", tags.len(), self.terms.len()));
            }
            for (j, (t, m)) in tags.iter().zip(&self.terms).enumerate() {
                if t.group() != self.group {
                    return Err(Error::GroupMismatch);
                }
                if t.dim() != m.dim() {
                    return bad(format!("tag of degree {j} has dim {}, term has dim {}", t.dim(), m.dim()));
                }
            }
        }
        Ok(())
    }

    /// The complex with no terms, augmented onto `target` (exact iff target = 0).
    pub fn empty(target: Module) -> Self {
        let matrix = Matrix::zeros(target.field(), target.dim(), 0);
        Complex {
            group: target.group(),
            terms: Vec::new(),
            differentials: Vec::new(),
            augmentation: Some(Augmentation { target, matrix }),
            tags: Some(Vec::new()),
        }
    }

    /// A single term in degree 0.
    pub fn concentrated(term: Module, augmentation: Option<Augmentation>, tag: Option<PermutationDescriptor>) -> Result<Self> {
        Complex::new(term.group(), vec![term], Vec::new(), augmentation, tag.map(|t| vec![t]))
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// Number of terms (top degree + 1).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.terms.len().checked_sub(1)
    }

    pub fn terms(&self) -> &[Module] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> Option<&Module> {
        self.terms.get(j)
    }

    /// Dimension of C_j, zero outside the stored range.
    pub fn term_dim(&self, j: usize) -> usize {
        self.terms.get(j).map_or(0, Module::dim)
    }

    pub fn term_dims(&self) -> Vec<usize> {
        self.terms.iter().map(Module::dim).collect()
    }

    pub fn differentials(&self) -> &[Matrix] {
        &self.differentials
    }

    /// d_j : C_j -> C_{j-1} for 1 <= j <= top.
    pub fn differential(&self, j: usize) -> Option<&Matrix> {
        j.checked_sub(1).and_then(|i| self.differentials.get(i))
    }

    /// d_j as a matrix, with zero matrices of the right shape out of range.
    fn differential_or_zero(&self, j: usize) -> Matrix {
        match self.differential(j) {
            Some(d) => d.clone(),
            None => Matrix::zeros(self.group.field(), self.term_dim(j.wrapping_sub(1)), self.term_dim(j)),
        }
    }

    pub fn augmentation(&self) -> Option<&Augmentation> {
        self.augmentation.as_ref()
    }

    pub fn target(&self) -> Option<&Module> {
        self.augmentation.as_ref().map(|a| &a.target)
    }

    pub fn tags(&self) -> Option<&[PermutationDescriptor]> {
        self.tags.as_deref()
    }

    pub fn tag(&self, j: usize) -> Option<&PermutationDescriptor> {
        self.tags.as_ref().and_then(|t| t.get(j))
    }

    pub fn with_augmentation(mut self, augmentation: Option<Augmentation>) -> Result<Self> {
        self.augmentation = augmentation;
        self.check_shapes()?;
        Ok(self)
    }

    pub fn with_tags(mut self, tags: Option<Vec<PermutationDescriptor>>) -> Result<Self> {
        self.tags = tags;
        self.check_shapes()?;
        Ok(self)
    }

    /// Tags every term by reading its permutation basis.
    pub fn with_recognized_tags(self) -> Result<Self> {
        let tags = self.terms.iter().map(recognize).collect::<Result<Vec<_>>>()?;
        self.with_tags(Some(tags))
    }

    /// sum_j (-1)^j dim C_j.
    pub fn euler_characteristic(&self) -> i64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(j, t)| if j % 2 == 0 { t.dim() as i64 } else { -(t.dim() as i64) })
            .sum()
    }

    /// Ranks of d_1, ..., d_n, with rank(eps) in slot 0 (0 when unaugmented).
    fn differential_ranks(&self) -> Vec<usize> {
        let mut ranks = Vec::with_capacity(self.terms.len() + 1);
        ranks.push(self.augmentation.as_ref().map_or(0, |a| a.matrix.rank()));
        ranks.extend(self.differentials.iter().map(Matrix::rank));
        ranks
    }

    /// dim H_j = dim C_j - rank d_j - rank d_{j+1}, with d_0 = eps when
    /// augmented; `target` is the cokernel dimension of eps. Only meaningful
    /// when d d = 0; otherwise the counts saturate at zero.
    pub fn homology_dims(&self) -> HomologyDims {
        homology_from_ranks(self, &self.differential_ranks())
    }

    pub fn is_resolution(&self) -> bool {
        self.augmentation.is_some() && self.homology_dims().is_zero()
    }

    /// Number of leading terms that are free (tag is free when tagged, else
    /// the norm element has full rank).
    pub fn free_prefix(&self) -> usize {
        (0..self.terms.len())
            .take_while(|&j| match self.tag(j) {
                Some(t) => t.is_free(),
                None => self.terms[j].is_free(),
            })
            .count()
    }

    /// Terms in degrees 0..=m are free (terms above the top are zero).
    pub fn free_up_to(&self, m: usize) -> bool {
        let k = self.free_prefix();
        k == self.terms.len() || k > m
    }

    /// Recomputes every certificate from scratch.
    pub fn certify(&self, m: Option<usize>) -> Certificate {
        let mut failures = Vec::new();
        let fail = |failures: &mut Vec<Failure>, degree: Option<isize>, identity: String| {
            failures.push(Failure { degree, identity });
        };
        for (j, t) in self.terms.iter().enumerate() {
            if let Err(v) = t.validate() {
                fail(&mut failures, Some(j as isize), format!("module identity: {v}"));
            }
        }
        if let Some(aug) = &self.augmentation {
            if let Err(v) = aug.target.validate() {
                fail(&mut failures, Some(-1), format!("module identity: {v}"));
            }
        }
        match &self.tags {
            Some(tags) => {
                for (j, (t, m)) in tags.iter().zip(&self.terms).enumerate() {
                    match recognize(m) {
                        Ok(found) if &found == t => {}
                        Ok(found) => fail(&mut failures, Some(j as isize), format!("tag mismatch: term is {found}, tag says {t}")),
                        Err(e) => fail(&mut failures, Some(j as isize), format!("tag: {e}")),
                    }
                }
            }
            None => fail(&mut failures, None, "terms are not tagged as permutation modules".into()),
        }
        for j in 1..self.terms.len() {
            let d = &self.differentials[j - 1];
            if let Some(i) = first_non_intertwining(d, &self.terms[j], &self.terms[j - 1]) {
                fail(&mut failures, Some(j as isize), format!("d_{j} fails to commute with generator {i}"));
            }
        }
        if let (Some(aug), Some(c0)) = (&self.augmentation, self.terms.first()) {
            if let Some(i) = first_non_intertwining(&aug.matrix, c0, &aug.target) {
                fail(&mut failures, Some(0), format!("augmentation fails to commute with generator {i}"));
            }
        }
        for j in 2..self.terms.len() {
            let dd = self.differentials[j - 2].mul(&self.differentials[j - 1]).expect("shapes checked");
            if !dd.is_zero() {
                fail(&mut failures, Some(j as isize), format!("d_{} d_{} != 0", j - 1, j));
            }
        }
        if let (Some(aug), Some(d1)) = (&self.augmentation, self.differentials.first()) {
            if !aug.matrix.mul(d1).expect("shapes checked").is_zero() {
                fail(&mut failures, Some(1), "eps d_1 != 0".into());
            }
        }
        let ranks = self.differential_ranks();
        let homology = homology_from_ranks(self, &ranks);
        let euler = self.euler_characteristic();
        let target_dim = self.target().map(Module::dim);
        match target_dim {
            Some(t) => {
                if let Some(h) = homology.target.filter(|&h| h != 0) {
                    fail(&mut failures, Some(-1), format!("eps not surjective: cokernel dim {h}"));
                }
                for (j, &h) in homology.degrees.iter().enumerate() {
                    if h != 0 {
                        fail(&mut failures, Some(j as isize), format!("H_{j} != 0 (dim {h})"));
                    }
                }
                if euler != t as i64 {
                    fail(&mut failures, None, format!("euler characteristic {euler} != dim target {t}"));
                }
            }
            None => fail(&mut failures, None, "complex is not augmented".into()),
        }
        let free_prefix = self.free_prefix();
        if let Some(m) = m {
            if !self.free_up_to(m) {
                fail(&mut failures, Some(free_prefix as isize), format!("term in degree {free_prefix} <= {m} is not free"));
            }
        }
        Certificate {
            term_dims: self.term_dims(),
            target_dim,
            homology,
            euler,
            free_prefix,
            all_free: free_prefix == self.terms.len(),
            requested_m: m,
            failures,
        }
    }

    /// Degree-wise direct sum; augmentations combine block-diagonally onto the
    /// direct sum of the targets when both are present.
    pub fn direct_sum(&self, other: &Complex) -> Result<Complex> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let f = self.group.field();
        let n = self.len().max(other.len());
        let zero = Module::zero(self.group);
        let term = |c: &'_ Complex, j: usize| -> Module { c.terms.get(j).cloned().unwrap_or_else(|| zero.clone()) };
        let terms = (0..n)
            .map(|j| Module::direct_sum_many(self.group, &[&term(self, j), &term(other, j)]))
            .collect::<Result<Vec<_>>>()?;
        let differentials = (1..n)
            .map(|j| Matrix::block_diag(f, &[&self.differential_or_zero(j), &other.differential_or_zero(j)]))
            .collect();
        let augmentation = match (&self.augmentation, &other.augmentation) {
            (Some(a), Some(b)) => Some(Augmentation {
                target: a.target.direct_sum(&b.target)?.module,
                matrix: Matrix::block_diag(f, &[&a.matrix, &b.matrix]),
            }),
            _ => None,
        };
        let tags = match (&self.tags, &other.tags) {
            (Some(a), Some(b)) => {
                let empty = PermutationDescriptor::empty(self.group);
                Some(
                    (0..n)
                        .map(|j| a.get(j).unwrap_or(&empty).union(b.get(j).unwrap_or(&empty)))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            _ => None,
        };
        Complex::new(self.group, terms, differentials, augmentation, tags)
    }

    /// Drops C_0 and makes d_1, corestricted onto K = ker(eps), the new
    /// augmentation. The result resolves K when `self` resolves its target.
    pub fn truncate(&self) -> Result<Complex> {
        let aug = self
            .augmentation
            .as_ref()
            .ok_or_else(|| Error::NotResolution("truncation needs an augmentation".into()))?;
        if self.terms.is_empty() {
            return Err(Error::NotResolution("cannot truncate the empty complex".into()));
        }
        if aug.matrix.rank() != aug.target.dim() {
            return Err(Error::NotResolution("augmentation is not surjective".into()));
        }
        let eps = ModuleMap::new(self.terms[0].clone(), aug.target.clone(), aug.matrix.clone())?;
        let (kernel, incl) = eps.kernel()?;
        let new_matrix = match self.differentials.first() {
            Some(d1) => incl
                .matrix()
                .solve(d1)
                .map_err(|_| Error::NotResolution("image of d_1 is not inside ker eps".into()))?,
            None => Matrix::zeros(self.group.field(), kernel.dim(), 0),
        };
        if new_matrix.rank() != kernel.dim() {
            return Err(Error::NotResolution("image of d_1 is smaller than ker eps".into()));
        }
        Complex::new(
            self.group,
            self.terms[1..].to_vec(),
            self.differentials.get(1..).map(<[Matrix]>::to_vec).unwrap_or_default(),
            Some(Augmentation {
                target: kernel,
                matrix: new_matrix,
            }),
            self.tags.as_ref().map(|t| t[1..].to_vec()),
        )
    }

    /// Removes zero-dimensional terms above the last nonzero one.
    pub(crate) fn trim_top(mut self) -> Self {
        while self.terms.last().is_some_and(|t| t.dim() == 0) {
            self.terms.pop();
            self.differentials.pop();
            if let Some(tags) = &mut self.tags {
                tags.pop();
            }
        }
        self
    }
}

fn homology_from_ranks(c: &Complex, ranks: &[usize]) -> HomologyDims {
    let n = c.terms.len();
    let degrees = (0..n)
        .map(|j| {
            let in_rank = ranks.get(j + 1).copied().unwrap_or(0);
            c.terms[j].dim().saturating_sub(ranks[j] + in_rank)
        })
        .collect();
    let target = c.augmentation.as_ref().map(|a| a.target.dim() - ranks[0]);
    HomologyDims { degrees, target }
}

/// 1-based index of the first generator with `d A != B d`.
fn first_non_intertwining(d: &Matrix, source: &Module, target: &Module) -> Option<usize> {
    source
        .generators()
        .iter()
        .zip(target.generators())
        .position(|(a, b)| d.mul(a).expect("shape") != b.mul(d).expect("shape"))
        .map(|i| i + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyDims {
    /// dim H_j for j = 0..=top.
    pub degrees: Vec<usize>,
    /// dim of target / im eps, when augmented.
    pub target: Option<usize>,
}

impl HomologyDims {
    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(|&h| h == 0) && self.target.unwrap_or(0) == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// Degree where the identity fails (-1 for the augmentation target).
    pub degree: Option<isize>,
    pub identity: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.degree {
            Some(d) => write!(f, "degree {d}: {}", self.identity),
            None => write!(f, "{}", self.identity),
        }
    }
}

/// Outcome of [`Complex::certify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub term_dims: Vec<usize>,
    pub target_dim: Option<usize>,
    pub homology: HomologyDims,
    pub euler: i64,
    pub free_prefix: usize,
    pub all_free: bool,
    pub requested_m: Option<usize>,
    pub failures: Vec<Failure>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }

    pub fn into_result(self) -> Result<Certificate> {
        match self.failures.first() {
            None => Ok(self),
            Some(f) => Err(Error::CertificationFailed(f.to_string())),
        }
    }
}

/// Degree-wise maps f_j : Q_j -> P_j, zero where absent.
#[derive(Clone, Debug)]
pub struct ChainMap<'a> {
    pub source: &'a Complex,
    pub target: &'a Complex,
    components: Vec<Matrix>,
}

impl<'a> ChainMap<'a> {
    /// Components indexed by source degree; missing ones are zero.
    pub fn new(source: &'a Complex, target: &'a Complex, mut components: Vec<Matrix>) -> Result<Self> {
        if source.group != target.group {
            return Err(Error::GroupMismatch);
        }
        let f = source.group.field();
        for j in components.len()..source.len() {
            components.push(Matrix::zeros(f, target.term_dim(j), source.term_dim(j)));
        }
        components.truncate(source.len());
        for (j, c) in components.iter().enumerate() {
            if c.shape() != (target.term_dim(j), source.term_dim(j)) {
                return Err(Error::DimensionMismatch(format!("chain map component {j} has shape {}x{}", c.rows(), c.cols())));
            }
        }
        Ok(ChainMap {
            source,
            target,
            components,
        })
    }

    pub fn component(&self, j: usize) -> Matrix {
        match self.components.get(j) {
            Some(c) => c.clone(),
            None => Matrix::zeros(self.source.group.field(), self.target.term_dim(j), self.source.term_dim(j)),
        }
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    /// Checks d^P_j f_j = f_{j-1} d^Q_j in every degree up to one past the
    /// top of either complex, and eps_P f_0 = base eps_Q when `base` is given.
    pub fn check(&self, base: Option<&Matrix>) -> Result<()> {
        let top = self.source.len().max(self.target.len());
        for j in 1..=top {
            let left = self.target.differential_or_zero(j).mul(&self.component(j))?;
            let right = self.component(j - 1).mul(&self.source.differential_or_zero(j))?;
            if left != right {
                return Err(Error::LiftFailed(format!("d f != f d in degree {j}")));
            }
        }
        for (j, c) in self.components.iter().enumerate() {
            let (Some(s), Some(t)) = (self.source.term(j), self.target.term(j)) else {
                continue;
            };
            if first_non_intertwining(c, s, t).is_some() {
                return Err(Error::LiftFailed(format!("component {j} is not a module map")));
            }
        }
        if let Some(base) = base {
            let (Some(ep), Some(eq)) = (self.target.augmentation(), self.source.augmentation()) else {
                return Err(Error::LiftFailed("augmentations missing".into()));
            };
            let left = ep.matrix.mul(&self.component(0))?;
            let right = base.mul(&eq.matrix)?;
            if left != right {
                return Err(Error::LiftFailed("eps_P f_0 != f eps_Q".into()));
            }
        }
        Ok(())
    }
}

/// cone_j = Q_{j-1} + P_j with d(q, p) = (-d_Q q, f_{j-1} q + d_P p).
pub fn cone(f: &ChainMap<'_>) -> Result<Complex> {
    let (q, p) = (f.source, f.target);
    let group = q.group;
    let field = group.field();
    let zero = Module::zero(group);
    let n = (q.len() + 1).max(p.len());
    let qterm = |j: isize| -> &Module { if j < 0 { &zero } else { q.terms.get(j as usize).unwrap_or(&zero) } };
    let pterm = |j: usize| -> &Module { p.terms.get(j).unwrap_or(&zero) };
    let terms = (0..n)
        .map(|j| Module::direct_sum_many(group, &[qterm(j as isize - 1), pterm(j)]))
        .collect::<Result<Vec<_>>>()?;
    let mut differentials = Vec::with_capacity(n.saturating_sub(1));
    for j in 1..n {
        let (qa, qb) = (qterm(j as isize - 1).dim(), qterm(j as isize - 2).dim());
        let (pa, pb) = (pterm(j).dim(), pterm(j - 1).dim());
        let mut d = Matrix::zeros(field, qb + pb, qa + pa);
        if j >= 2 {
            if let Some(dq) = q.differential(j - 1) {
                d.set_block(0, 0, &dq.neg());
            }
        }
        if qa > 0 && pb > 0 {
            d.set_block(qb, 0, &f.component(j - 1));
        }
        if let Some(dp) = p.differential(j) {
            d.set_block(qb, qa, dp);
        }
        differentials.push(d);
    }
    let tags = match (&q.tags, &p.tags) {
        (Some(qt), Some(pt)) => {
            let empty = PermutationDescriptor::empty(group);
            Some(
                (0..n)
                    .map(|j| {
                        let a = if j == 0 { &empty } else { qt.get(j - 1).unwrap_or(&empty) };
                        a.union(pt.get(j).unwrap_or(&empty))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        _ => None,
    };
    Ok(Complex::new(group, terms, differentials, None, tags)?.trim_top())
}

/// (A (x) B)_n = sum_{i+j=n} A_i (x) B_j, blocks by increasing i, with
/// d(a (x) b) = da (x) b + (-1)^i a (x) db.
pub fn tensor_complexes(a: &Complex, b: &Complex) -> Result<Complex> {
    if a.group != b.group {
        return Err(Error::GroupMismatch);
    }
    let group = a.group;
    let field = group.field();
    if a.is_empty() || b.is_empty() {
        let target = match (a.target(), b.target()) {
            (Some(x), Some(y)) => x.tensor(y)?,
            _ => Module::zero(group),
        };
        let aug = (a.augmentation.is_some() && b.augmentation.is_some()).then(|| Augmentation {
            matrix: Matrix::zeros(field, target.dim(), 0),
            target,
        });
        return Complex::new(group, Vec::new(), Vec::new(), aug, Some(Vec::new()));
    }
    let (na, nb) = (a.len() - 1, b.len() - 1);
    let blocks = |n: usize| -> Vec<(usize, usize)> {
        let lo = n.saturating_sub(nb);
        let hi = n.min(na);
        (lo..=hi).map(|i| (i, n - i)).collect()
    };
    let mut terms = Vec::with_capacity(na + nb + 1);
    let mut offsets: Vec<Vec<usize>> = Vec::with_capacity(na + nb + 1);
    for n in 0..=na + nb {
        let mut parts = Vec::new();
        let mut offs = Vec::new();
        let mut acc = 0;
        for (i, j) in blocks(n) {
            offs.push(acc);
            let t = a.terms[i].tensor(&b.terms[j])?;
            acc += t.dim();
            parts.push(t);
        }
        group.check_dim("tensor complex term", acc)?;
        terms.push(Module::direct_sum_many(group, &parts.iter().collect::<Vec<_>>())?);
        offsets.push(offs);
    }
    let mut differentials = Vec::with_capacity(na + nb);
    for n in 1..=na + nb {
        let mut d = Matrix::zeros(field, terms[n - 1].dim(), terms[n].dim());
        let lo_prev = (n - 1).saturating_sub(nb);
        for (k, (i, j)) in blocks(n).into_iter().enumerate() {
            let col0 = offsets[n][k];
            let bj = b.term_dim(j);
            if i >= 1 {
                // d_A (x) 1 into block (i - 1, j)
                let row0 = offsets[n - 1][i - 1 - lo_prev];
                let da = a.differential(i).expect("in range");
                for r in 0..da.rows() {
                    for c in 0..da.cols() {
                        let v = da.get(r, c);
                        if v != 0 {
                            for s in 0..bj {
                                d.set(row0 + r * bj + s, col0 + c * bj + s, v);
                            }
                        }
                    }
                }
            }
            if j >= 1 {
                // (-1)^i 1 (x) d_B into block (i, j - 1)
                let row0 = offsets[n - 1][i - lo_prev];
                let db = b.differential(j).expect("in range");
                let db = if i % 2 == 1 { db.neg() } else { db.clone() };
                let bj1 = b.term_dim(j - 1);
                for s in 0..a.term_dim(i) {
                    for r in 0..db.rows() {
                        for c in 0..db.cols() {
                            let v = db.get(r, c);
                            if v != 0 {
                                d.set(row0 + s * bj1 + r, col0 + s * bj + c, v);
                            }
                        }
                    }
                }
            }
        }
        differentials.push(d);
    }
    let augmentation = match (&a.augmentation, &b.augmentation) {
        (Some(x), Some(y)) => Some(Augmentation {
            target: x.target.tensor(&y.target)?,
            matrix: x.matrix.kronecker(&y.matrix),
        }),
        _ => None,
    };
    let tags = match (&a.tags, &b.tags) {
        (Some(ta), Some(tb)) => Some(
            (0..=na + nb)
                .map(|n| {
                    let mut acc = PermutationDescriptor::empty(group);
                    for (i, j) in blocks(n) {
                        acc = acc.union(&ta[i].tensor(&tb[j])?)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    Complex::new(group, terms, differentials, augmentation, tags)
}

/// How a free source term is generated: base points of free orbits, or a
/// projective cover isomorphism when the term has no permutation basis.
enum FreeFrame {
    Orbits(Vec<crate::perm::Orbit>),
    Cover { generators: Vec<Vec<u32>>, inverse: Matrix },
}

fn free_frame(m: &Module) -> Result<FreeFrame> {
    let not_free = || Error::LiftFailed("source term below the lifting degree is not free".into());
    if let Ok(orbs) = orbits(m) {
        if orbs.iter().all(|o| o.stabilizer.is_trivial()) {
            return Ok(FreeFrame::Orbits(orbs));
        }
        return Err(not_free());
    }
    if !m.is_free() {
        return Err(not_free());
    }
    let cover = m.projective_cover()?;
    let order = m.group().order();
    let generators = (0..cover.rank).map(|b| cover.map.matrix().column(b * order)).collect();
    let inverse = cover
        .map
        .matrix()
        .inverse()
        .ok_or_else(|| Error::Internal("cover of a free module is not invertible".into()))?;
    Ok(FreeFrame::Cover { generators, inverse })
}

/// Lifts `base : L -> M` to a chain map between resolutions Q of L and P of
/// M, where Q is free up to `ell` and P vanishes above `ell`.
///
/// Each component is fixed on free generators by solving against the next
/// differential of P, then extended equivariantly.
pub fn lift_chain_map<'a>(base: &Matrix, q: &'a Complex, p: &'a Complex, ell: usize) -> Result<ChainMap<'a>> {
    let (Some(eq), Some(ep)) = (q.augmentation(), p.augmentation()) else {
        return Err(Error::LiftFailed("both complexes must be augmented".into()));
    };
    if base.shape() != (ep.target.dim(), eq.target.dim()) {
        return Err(Error::LiftFailed("base map does not match the augmentation targets".into()));
    }
    if p.len() > ell + 1 {
        return Err(Error::LiftFailed(format!("target has terms above degree {ell}")));
    }
    let group = q.group;
    let field = group.field();
    let mut components: Vec<Matrix> = Vec::with_capacity(q.len());
    for j in 0..q.len() {
        let (dq, dp) = (q.term_dim(j), p.term_dim(j));
        if j > ell {
            components.push(Matrix::zeros(field, dp, dq));
            continue;
        }
        if dq == 0 {
            components.push(Matrix::zeros(field, dp, 0));
            continue;
        }
        let frame = free_frame(&q.terms[j])?;
        let gen_vectors: Vec<Vec<u32>> = match &frame {
            FreeFrame::Orbits(orbs) => orbs
                .iter()
                .map(|o| {
                    let mut v = vec![0u32; dq];
                    v[o.points[0]] = 1;
                    v
                })
                .collect(),
            FreeFrame::Cover { generators, .. } => generators.clone(),
        };
        let gens = Matrix::from_fn(field, dq, gen_vectors.len(), |i, b| gen_vectors[b][i] as i64);
        // Where each generator must land one degree down.
        let (rhs, solver) = if j == 0 {
            (base.mul(&eq.matrix)?.mul(&gens)?, ep.matrix.clone())
        } else {
            let below = components[j - 1].mul(&q.differentials[j - 1])?.mul(&gens)?;
            (below, p.differential_or_zero(j))
        };
        let images = if dp == 0 {
            if !rhs.is_zero() {
                return Err(Error::LiftFailed(format!("degree {j}: nonzero obstruction with zero target term")));
            }
            Matrix::zeros(field, 0, gens.cols())
        } else {
            solver.solve(&rhs).map_err(|e| match e {
                Error::NoSolution => Error::LiftFailed(format!("degree {j}: no preimage (target not exact?)")),
                other => other,
            })?
        };
        let action = p
            .terms
            .get(j)
            .map(Module::action)
            .unwrap_or_else(|| Module::zero(group).action());
        let mut x = Matrix::zeros(field, dp, dq);
        match &frame {
            FreeFrame::Orbits(orbs) => {
                for (b, o) in orbs.iter().enumerate() {
                    if dp == 0 {
                        break;
                    }
                    let orbit = action.orbit(&group, &images.column(b));
                    for (point, label) in o.points.iter().zip(&o.labels) {
                        let col = &orbit[group.index_of(label)];
                        for (r, &v) in col.iter().enumerate() {
                            if v != 0 {
                                x.set(r, *point, v);
                            }
                        }
                    }
                }
            }
            FreeFrame::Cover { inverse, .. } => {
                let order = group.order();
                let mut on_free = Matrix::zeros(field, dp, inverse.rows());
                for b in 0..gens.cols() {
                    if dp == 0 {
                        break;
                    }
                    for (u, col) in action.orbit(&group, &images.column(b)).iter().enumerate() {
                        for (r, &v) in col.iter().enumerate() {
                            if v != 0 {
                                on_free.set(r, b * order + u, v);
                            }
                        }
                    }
                }
                x = on_free.mul(inverse)?;
            }
        }
        components.push(x);
    }
    if q.len() > ell + 1 {
        let obstruction = components[ell].mul(&q.differentials[ell])?;
        if !obstruction.is_zero() {
            return Err(Error::LiftFailed(format!(
                "f_{ell} d_{} != 0 although P vanishes above {ell}",
                ell + 1
            )));
        }
    }
    ChainMap::new(q, p, components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{realize, Subgroup};

    fn c2() -> Group {
        Group::new(2, 1).unwrap()
    }

    /// 0 -> k -> kC_2 -> kC_2 -> k, built by hand.
    fn periodic_c2() -> Complex {
        let g = c2();
        let f = g.field();
        let kc2 = Module::free(g, 1).unwrap();
        let k = Module::trivial(g, 1).unwrap();
        let one_plus_g = Matrix::from_rows(f, 2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let embed = Matrix::from_rows(f, 1, &[vec![1], vec![1]]).unwrap();
        let aug = Matrix::from_rows(f, 2, &[vec![1, 1]]).unwrap();
        let hyper = PermutationDescriptor::free(g, 1);
        let whole = PermutationDescriptor::single(Subgroup::whole(g));
        Complex::new(
            g,
            vec![kc2.clone(), kc2, k.clone()],
            vec![one_plus_g, embed],
            Some(Augmentation { target: k, matrix: aug }),
            Some(vec![hyper.clone(), hyper, whole]),
        )
        .unwrap()
    }

    #[test]
    fn single_term_identity_resolution_is_exact() {
        let m = Module::free(Group::new(3, 1).unwrap(), 1).unwrap();
        let c = Complex::concentrated(
            m.clone(),
            Some(Augmentation {
                target: m.clone(),
                matrix: Matrix::identity(m.field(), 3),
            }),
            None,
        )
        .unwrap();
        assert!(c.homology_dims().is_zero());
        assert!(c.is_resolution());
    }

    #[test]
    fn hand_built_periodic_piece_is_exact() {
        let c = periodic_c2();
        let h = c.homology_dims();
        assert_eq!(h.degrees, vec![0, 0, 0]);
        assert_eq!(h.target, Some(0));
        let cert = c.certify(Some(1));
        assert!(cert.passed(), "{:?}", cert.failures);
        assert_eq!(cert.euler, 1);
        assert!(!c.free_up_to(2));
    }

    #[test]
    fn zero_differentials_give_full_homology() {
        let g = c2();
        let k = Module::trivial(g, 2).unwrap();
        let c = Complex::new(g, vec![k.clone(), k], vec![Matrix::zeros(g.field(), 2, 2)], None, None).unwrap();
        assert_eq!(c.homology_dims().degrees, vec![2, 2]);
    }

    #[test]
    fn cone_of_identity_is_exact() {
        let c = periodic_c2().with_augmentation(None).unwrap();
        let id: Vec<Matrix> = c.terms().iter().map(|t| Matrix::identity(t.field(), t.dim())).collect();
        let f = ChainMap::new(&c, &c, id).unwrap();
        f.check(None).unwrap();
        let cone = cone(&f).unwrap();
        assert_eq!(cone.len(), 4);
        assert!(cone.homology_dims().is_zero());
        let cert = cone.certify(None);
        assert!(cert.failures.iter().all(|x| x.identity.contains("not augmented")), "{:?}", cert.failures);
    }

    #[test]
    fn cone_of_map_from_zero_is_target() {
        let p = periodic_c2();
        let zero = Complex::empty(Module::zero(c2()));
        let f = ChainMap::new(&zero, &p, vec![]).unwrap();
        let c = cone(&f).unwrap();
        assert_eq!(c.terms(), p.terms());
        assert_eq!(c.differentials(), p.differentials());
        assert_eq!(c.tags(), p.tags());
    }

    #[test]
    fn tensor_with_unit_complex_is_identity() {
        let a = periodic_c2();
        let k = Module::trivial(c2(), 1).unwrap();
        let unit = Complex::concentrated(
            k.clone(),
            Some(Augmentation {
                target: k.clone(),
                matrix: Matrix::identity(k.field(), 1),
            }),
            Some(PermutationDescriptor::single(Subgroup::whole(c2()))),
        )
        .unwrap();
        let t = tensor_complexes(&a, &unit).unwrap();
        assert_eq!(t, a);
    }

    #[test]
    fn tensor_euler_characteristics_multiply() {
        let a = periodic_c2();
        let t = tensor_complexes(&a, &a).unwrap();
        assert_eq!(t.euler_characteristic(), a.euler_characteristic().pow(2));
        assert_eq!(t.term_dims(), vec![4, 8, 8, 4, 1]);
        assert!(t.certify(None).passed());
    }

    #[test]
    fn truncate_gives_resolution_of_kernel() {
        let c = periodic_c2();
        let t = c.truncate().unwrap();
        assert_eq!(t.target().unwrap().dim(), 1);
        assert!(t.is_resolution());
        let single = Complex::concentrated(
            Module::free(c2(), 1).unwrap(),
            Some(Augmentation {
                target: Module::free(c2(), 1).unwrap(),
                matrix: Matrix::identity(c2().field(), 2),
            }),
            Some(PermutationDescriptor::free(c2(), 1)),
        )
        .unwrap();
        let empty = single.truncate().unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.target().unwrap().dim(), 0);
        assert!(empty.is_resolution());
    }

    #[test]
    fn truncate_rejects_non_surjective_augmentation() {
        let c = periodic_c2();
        let aug = c.augmentation().unwrap().clone();
        let broken = c
            .with_augmentation(Some(Augmentation {
                matrix: Matrix::zeros(aug.matrix.field(), 1, 2),
                ..aug
            }))
            .unwrap();
        assert!(matches!(broken.truncate(), Err(Error::NotResolution(_))));
    }

    #[test]
    fn lift_needs_free_source() {
        let c = periodic_c2();
        let zero = Matrix::zeros(c2().field(), 1, 1);
        assert!(matches!(lift_chain_map(&zero, &c, &c, 2), Err(Error::LiftFailed(_))));
    }

    #[test]
    fn lift_of_zero_map_is_zero() {
        let c = periodic_c2();
        let q = c.truncate().unwrap().truncate().unwrap();
        let zero = Matrix::zeros(c2().field(), 1, 1);
        let q_free = Complex::new(
            c2(),
            c.terms()[..2].to_vec(),
            c.differentials()[..1].to_vec(),
            c.augmentation().cloned(),
            c.tags().map(|t| t[..2].to_vec()),
        )
        .unwrap();
        assert_eq!(q.len(), 1);
        let f = lift_chain_map(&zero, &q_free, &c, 2).unwrap();
        f.check(Some(&zero)).unwrap();
        assert!(f.components().iter().all(Matrix::is_zero));
    }

    #[test]
    fn lift_identity_on_free_prefix() {
        let g = Group::new(3, 1).unwrap();
        let kc3 = realize(&PermutationDescriptor::free(g, 1)).unwrap().module;
        let res = Complex::concentrated(
            kc3.clone(),
            Some(Augmentation {
                target: kc3.clone(),
                matrix: Matrix::identity(g.field(), 3),
            }),
            Some(PermutationDescriptor::free(g, 1)),
        )
        .unwrap();
        let id = Matrix::identity(g.field(), 3);
        let f = lift_chain_map(&id, &res, &res, 0).unwrap();
        f.check(Some(&id)).unwrap();
        assert_eq!(f.component(0), id);
    }
}
