//! Finite-dimensional modules over the group algebra of E = (C_p)^r.
//!
//! A module is a tuple of r commuting d x d matrices of order dividing p,
//! acting on column vectors. Every constructor that can produce a module
//! checks the dimension cap of its group.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Matrix, PrimeField};
use crate::group::Group;

/// First failed module identity, as reported by [`Module::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    GeneratorCount { expected: usize, found: usize },
    Shape { generator: usize, rows: usize, cols: usize, dim: usize },
    /// A_i^p != I (1-based index).
    Order { generator: usize },
    /// A_i A_j != A_j A_i (1-based indices).
    Commutativity { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GeneratorCount { expected, found } => {
                write!(f, "generator count: expected {expected}, found {found}")
            }
            Violation::Shape { generator, rows, cols, dim } => {
                write!(f, "shape i={generator}: {rows}x{cols} generator in a module of dim {dim}")
            }
            Violation::Order { generator } => write!(f, "order i={generator}: A_i^p != I"),
            Violation::Commutativity { i, j } => write!(f, "commutativity i={i} j={j}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Module {
    group: Group,
    dim: usize,
    gens: Vec<Matrix>,
}

impl fmt::Debug for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Module")
            .field("group", &format_args!("{}", self.group))
            .field("dim", &self.dim)
            .field("gens", &self.gens)
            .finish()
    }
}

impl Module {
    /// Builds and validates a module from its generator matrices.
    pub fn new(group: Group, dim: usize, gens: Vec<Matrix>) -> Result<Self> {
        group.check_dim("module dimension", dim)?;
        let m = Module { group, dim, gens };
        m.validate().map_err(Error::InvalidModule)?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(group: Group, dim: usize, gens: Vec<Matrix>) -> Self {
        debug_assert_eq!(gens.len(), group.rank());
        debug_assert!(gens.iter().all(|g| g.shape() == (dim, dim)));
        Module { group, dim, gens }
    }

    pub fn zero(group: Group) -> Self {
        Self::trivial(group, 0).expect("zero module is within every cap")
    }

    /// k^n with identity action.
    pub fn trivial(group: Group, n: usize) -> Result<Self> {
        group.check_dim("trivial module dimension", n)?;
        let id = Matrix::identity(group.field(), n);
        Ok(Module::new_unchecked(group, n, vec![id; group.rank()]))
    }

    /// The free module (kE)^t in the group-element basis, blocks of size p^r,
    /// elements in lexicographic order; e_i acts by x -> x + e_i.
    pub fn free(group: Group, t: usize) -> Result<Self> {
        let order = group.order();
        let dim = t
            .checked_mul(order)
            .ok_or(Error::CapExceeded {
                what: "free module dimension",
                requested: usize::MAX,
                cap: group.caps().max_dim,
            })?;
        group.check_dim("free module dimension", dim)?;
        let p = group.p() as usize;
        let gens = (0..group.rank())
            .map(|i| {
                let stride = p.pow((group.rank() - 1 - i) as u32);
                let mut a = Matrix::zeros(group.field(), dim, dim);
                for block in 0..t {
                    for x in 0..order {
                        let digit = (x / stride) % p;
                        let y = if digit + 1 == p { x - digit * stride } else { x + stride };
                        a.set(block * order + y, block * order + x, 1);
                    }
                }
                a
            })
            .collect();
        Ok(Module::new_unchecked(group, dim, gens))
    }

    #[inline]
    pub fn group(&self) -> Group {
        self.group
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.group.field()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &Matrix {
        &self.gens[i]
    }

    /// Checks A_i^p = I and pairwise commutativity exactly.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let r = self.group.rank();
        if self.gens.len() != r {
            return Err(Violation::GeneratorCount {
                expected: r,
                found: self.gens.len(),
            });
        }
        for (i, g) in self.gens.iter().enumerate() {
            if g.shape() != (self.dim, self.dim) || g.field() != self.field() {
                return Err(Violation::Shape {
                    generator: i + 1,
                    rows: g.rows(),
                    cols: g.cols(),
                    dim: self.dim,
                });
            }
        }
        let id = Matrix::identity(self.field(), self.dim);
        for (i, g) in self.gens.iter().enumerate() {
            let ok = match g.as_permutation() {
                Some(perm) => perm_order_divides(&perm, self.group.p() as usize),
                None => g.pow(self.group.p() as u64).expect("square") == id,
            };
            if !ok {
                return Err(Violation::Order { generator: i + 1 });
            }
        }
        for i in 0..r {
            for j in i + 1..r {
                let ab = self.gens[i].mul(&self.gens[j]).expect("square");
                let ba = self.gens[j].mul(&self.gens[i]).expect("square");
                if ab != ba {
                    return Err(Violation::Commutativity { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn is_trivial_action(&self) -> bool {
        let id = Matrix::identity(self.field(), self.dim);
        self.gens.iter().all(|g| *g == id)
    }

    pub(crate) fn action(&self) -> Action {
        Action::new(self)
    }

    fn same_group(&self, other: &Module) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    /// The submodule spanned by the columns of `span`, which must already be
    /// invariant. The basis is canonical: the transposed rref of the span.
    pub fn submodule(&self, span: &Matrix) -> Result<(Module, ModuleMap)> {
        let basis = column_space_basis(span);
        let gens = self
            .gens
            .iter()
            .map(|a| {
                basis
                    .solve(&a.mul(&basis)?)
                    .map_err(|_| Error::Internal("spanning set is not invariant".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = Module::new_unchecked(self.group, basis.cols(), gens);
        let incl = ModuleMap::new_unchecked(sub.clone(), self.clone(), basis);
        Ok((sub, incl))
    }

    /// The smallest submodule containing the columns of `vectors`.
    pub fn submodule_generated_by(&self, vectors: &Matrix) -> Result<(Module, ModuleMap)> {
        let mut basis = column_space_basis(vectors);
        loop {
            let mut blocks = vec![&basis];
            let images: Vec<Matrix> = self.gens.iter().map(|a| a.mul(&basis)).collect::<Result<_>>()?;
            blocks.extend(images.iter());
            let next = column_space_basis(&Matrix::hstack(&blocks)?);
            if next.cols() == basis.cols() {
                break;
            }
            basis = next;
        }
        self.submodule(&basis)
    }

    /// Radical sum_i (A_i - I) M with its inclusion.
    pub fn radical(&self) -> Result<(Module, ModuleMap)> {
        self.submodule(&self.radical_span())
    }

    fn radical_span(&self) -> Matrix {
        let id = Matrix::identity(self.field(), self.dim);
        let blocks: Vec<Matrix> = self.gens.iter().map(|a| a.sub(&id).expect("square")).collect();
        if blocks.is_empty() {
            return Matrix::zeros(self.field(), self.dim, 0);
        }
        Matrix::hstack(&blocks.iter().collect::<Vec<_>>()).expect("same rows")
    }

    /// Quotient by the image of an injective map, on the complement basis
    /// given by the non-pivot coordinates of the image's rref.
    pub fn quotient(&self, incl: &ModuleMap) -> Result<(Module, ModuleMap)> {
        if incl.target != *self {
            return Err(Error::DimensionMismatch("inclusion does not land in this module".into()));
        }
        if incl.matrix.rank() != incl.matrix.cols() {
            return Err(Error::NotInjective);
        }
        let (proj, section) = complement_projection(&incl.matrix);
        let gens = self
            .gens
            .iter()
            .map(|a| proj.mul(a)?.mul(&section))
            .collect::<Result<Vec<_>>>()?;
        let q = Module::new_unchecked(self.group, proj.rows(), gens);
        let proj = ModuleMap::new_unchecked(self.clone(), q.clone(), proj);
        Ok((q, proj))
    }

    /// Direct sum with injections and projections.
    pub fn direct_sum(&self, other: &Module) -> Result<DirectSum> {
        self.same_group(other)?;
        let sum = Module::direct_sum_many(self.group, &[self, other])?;
        let f = self.field();
        let (a, b) = (self.dim, other.dim);
        let inj_a = Matrix::vstack(&[&Matrix::identity(f, a), &Matrix::zeros(f, b, a)])?;
        let inj_b = Matrix::vstack(&[&Matrix::zeros(f, a, b), &Matrix::identity(f, b)])?;
        let proj_a = inj_a.transpose();
        let proj_b = inj_b.transpose();
        Ok(DirectSum {
            injections: [
                ModuleMap::new_unchecked(self.clone(), sum.clone(), inj_a),
                ModuleMap::new_unchecked(other.clone(), sum.clone(), inj_b),
            ],
            projections: [
                ModuleMap::new_unchecked(sum.clone(), self.clone(), proj_a),
                ModuleMap::new_unchecked(sum.clone(), other.clone(), proj_b),
            ],
            module: sum,
        })
    }

    /// Block-diagonal sum of several modules, in order.
    pub fn direct_sum_many(group: Group, parts: &[&Module]) -> Result<Module> {
        if parts.iter().any(|m| m.group != group) {
            return Err(Error::GroupMismatch);
        }
        let dim = parts.iter().map(|m| m.dim).sum();
        group.check_dim("direct sum dimension", dim)?;
        let gens = (0..group.rank())
            .map(|i| {
                let blocks: Vec<&Matrix> = parts.iter().map(|m| &m.gens[i]).collect();
                Matrix::block_diag(group.field(), &blocks)
            })
            .collect();
        Ok(Module::new_unchecked(group, dim, gens))
    }

    /// Tensor product with diagonal action; basis index (a, b) -> a * dim(N) + b.
    pub fn tensor(&self, other: &Module) -> Result<Module> {
        self.same_group(other)?;
        let dim = self.dim.saturating_mul(other.dim);
        self.group.check_dim("tensor product dimension", dim)?;
        let gens = self
            .gens
            .iter()
            .zip(&other.gens)
            .map(|(a, b)| a.kronecker(b))
            .collect();
        Ok(Module::new_unchecked(self.group, dim, gens))
    }

    /// Contragredient module: A_i acts by the transpose of A_i^{p-1}.
    pub fn dual(&self) -> Module {
        let p = self.group.p() as u64;
        let gens = self
            .gens
            .iter()
            .map(|a| a.pow(p - 1).expect("square").transpose())
            .collect();
        Module::new_unchecked(self.group, self.dim, gens)
    }

    /// Product over generators of 1 + A_i + ... + A_i^{p-1}, i.e. the action
    /// of the sum of all group elements.
    pub fn norm_matrix(&self) -> Matrix {
        let f = self.field();
        let mut total = Matrix::identity(f, self.dim);
        for a in &self.gens {
            let mut sum = Matrix::identity(f, self.dim);
            let mut power = Matrix::identity(f, self.dim);
            for _ in 1..self.group.p() {
                power = power.mul(a).expect("square");
                sum = sum.add(&power).expect("square");
            }
            total = total.mul(&sum).expect("square");
        }
        total
    }

    /// Number of free direct summands: the rank of the norm element.
    pub fn free_rank(&self) -> usize {
        if self.dim == 0 {
            return 0;
        }
        self.norm_matrix().rank()
    }

    pub fn is_free(&self) -> bool {
        self.free_rank() * self.group.order() == self.dim
    }

    /// Minimal free cover. The j-th free generator maps to the lift of the
    /// j-th canonical basis vector of M / rad M.
    pub fn projective_cover(&self) -> Result<ProjectiveCover> {
        let rad = column_space_basis(&self.radical_span());
        let tops = complement_coordinates(&rad);
        let rank = tops.len();
        let free = Module::free(self.group, rank)?;
        let action = self.action();
        let order = self.group.order();
        let mut pi = Matrix::zeros(self.field(), self.dim, rank * order);
        for (j, &c) in tops.iter().enumerate() {
            let mut seed = vec![0u32; self.dim];
            seed[c] = 1;
            for (u, image) in action.orbit(&self.group, &seed).into_iter().enumerate() {
                for (row, &v) in image.iter().enumerate() {
                    if v != 0 {
                        pi.set(row, j * order + u, v);
                    }
                }
            }
        }
        if pi.rank() != self.dim {
            return Err(Error::Internal("projective cover is not surjective".into()));
        }
        Ok(ProjectiveCover {
            rank,
            map: ModuleMap::new_unchecked(free, self.clone(), pi),
        })
    }

    /// Heller loop: the kernel of the projective cover, with its inclusion into
    /// the cover.
    pub fn omega(&self) -> Result<(Module, ModuleMap)> {
        self.projective_cover()?.map.kernel()
    }

    pub fn omega_n(&self, n: usize) -> Result<Module> {
        let mut m = self.clone();
        for _ in 0..n {
            m = m.omega()?.0;
        }
        Ok(m)
    }

    /// Splits off all free summands: returns M' and t with M = M' + (kE)^t.
    pub fn strip_free(&self) -> Result<StrippedModule> {
        let f = self.field();
        let order = self.group.order();
        let mut current = self.clone();
        let mut embedding = Matrix::identity(f, self.dim);
        let mut free_blocks: Vec<Matrix> = Vec::new();
        loop {
            let norm = current.norm_matrix();
            let Some(col) = (0..current.dim).find(|&j| (0..current.dim).any(|i| norm.get(i, j) != 0)) else {
                break;
            };
            let action = current.action();
            let mut seed = vec![0u32; current.dim];
            seed[col] = 1;
            let orbit = action.orbit(&self.group, &seed);
            let w = Matrix::from_fn(f, current.dim, order, |i, u| orbit[u][i] as i64);
            let mut unit = vec![0u32; order];
            unit[0] = 1;
            let functional = w
                .transpose()
                .solve(&Matrix::column_vector(f, &unit))
                .map_err(|_| Error::Internal("cyclic summand generated by a norm-detected vector is not free".into()))?;
            let dual = current.dual().action();
            let rows = dual.orbit(&self.group, &functional.column(0));
            let retraction = Matrix::from_fn(f, order, current.dim, |u, j| rows[u][j] as i64);
            let kfree = Module::free(self.group, 1)?;
            let rho = ModuleMap::new(current.clone(), kfree, retraction)
                .map_err(|e| Error::Internal(format!("retraction is not a module map: {e}")))?;
            if rho.matrix.mul(&w)? != Matrix::identity(f, order) {
                return Err(Error::Internal("retraction does not split the free summand".into()));
            }
            free_blocks.push(embedding.mul(&w)?);
            let (k, incl) = rho.kernel()?;
            embedding = embedding.mul(&incl.matrix)?;
            current = k;
        }
        let t = free_blocks.len();
        let mut blocks = vec![&embedding];
        blocks.extend(free_blocks.iter());
        let iso = Matrix::hstack(&blocks)?;
        let split = current.direct_sum(&Module::free(self.group, t)?)?;
        let iso = ModuleMap::new(split.module.clone(), self.clone(), iso)?;
        Ok(StrippedModule {
            rest: current,
            free_rank: t,
            split,
            iso,
        })
    }

    /// Basis of Hom_E(M, N) as d_N x d_M matrices, canonical from the
    /// nullspace of the stacked commutation system.
    pub fn hom_space(&self, other: &Module) -> Result<Vec<Matrix>> {
        self.same_group(other)?;
        let (dm, dn) = (self.dim, other.dim);
        let f = self.field();
        let unknowns = dm * dn;
        if unknowns == 0 {
            return Ok(Vec::new());
        }
        let r = self.group.rank();
        let mut system = Matrix::zeros(f, r * unknowns, unknowns);
        for (i, (a, b)) in self.gens.iter().zip(&other.gens).enumerate() {
            for row in 0..dn {
                for col in 0..dm {
                    let eq = i * unknowns + row * dm + col;
                    // (X A)_{row,col} = sum_c X_{row,c} A_{c,col}
                    for c in 0..dm {
                        let v = a.get(c, col);
                        if v != 0 {
                            let idx = row * dm + c;
                            system.set(eq, idx, f.add(system.get(eq, idx), v));
                        }
                    }
                    // - (B X)_{row,col} = - sum_c B_{row,c} X_{c,col}
                    for c in 0..dn {
                        let v = b.get(row, c);
                        if v != 0 {
                            let idx = c * dm + col;
                            system.set(eq, idx, f.sub(system.get(eq, idx), v));
                        }
                    }
                }
            }
        }
        let null = system.nullspace();
        Ok((0..null.cols())
            .map(|k| Matrix::from_fn(f, dn, dm, |i, j| null.get(i * dm + j, k) as i64))
            .collect())
    }

    /// Searches for an isomorphism M -> N among combinations of the Hom basis.
    pub fn iso_probe(&self, other: &Module, trials: usize, seed: u64) -> Result<IsoProbe> {
        self.same_group(other)?;
        if self.dim != other.dim {
            return Ok(IsoProbe::NotIsomorphic);
        }
        if self.dim == 0 {
            let zero = Matrix::zeros(self.field(), 0, 0);
            return Ok(IsoProbe::Iso(ModuleMap::new_unchecked(self.clone(), other.clone(), zero)));
        }
        let hom = self.hom_space(other)?;
        if hom.len() != other.hom_space(self)?.len() || hom.is_empty() {
            return Ok(IsoProbe::NotIsomorphic);
        }
        let f = self.field();
        let p = f.p() as u64;
        let combine = |coeffs: &[u32]| -> Matrix {
            hom.iter()
                .zip(coeffs)
                .filter(|(_, &c)| c != 0)
                .fold(Matrix::zeros(f, other.dim, self.dim), |acc, (h, &c)| {
                    acc.add(&h.scale(c)).expect("same shape")
                })
        };
        let accept = |m: Matrix| -> Option<IsoProbe> {
            (m.rank() == self.dim).then(|| IsoProbe::Iso(ModuleMap::new_unchecked(self.clone(), other.clone(), m)))
        };
        let space = p.checked_pow(hom.len() as u32);
        if let Some(size) = space.filter(|&s| s <= 16) {
            for code in 0..size {
                let mut c = code;
                let coeffs: Vec<u32> = (0..hom.len())
                    .map(|_| {
                        let d = (c % p) as u32;
                        c /= p;
                        d
                    })
                    .collect();
                if let Some(found) = accept(combine(&coeffs)) {
                    return Ok(found);
                }
            }
            return Ok(IsoProbe::NotIsomorphic);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let coeffs: Vec<u32> = (0..hom.len()).map(|_| rng.gen_range(0..f.p())).collect();
            if let Some(found) = accept(combine(&coeffs)) {
                return Ok(found);
            }
        }
        Ok(IsoProbe::Inconclusive)
    }
}

fn perm_order_divides(perm: &[usize], p: usize) -> bool {
    (0..perm.len()).all(|start| {
        let mut x = start;
        for _ in 0..p {
            x = perm[x];
        }
        x == start
    })
}

/// Canonical basis of a column space: transposed nonzero rows of the rref of
/// the transpose.
pub fn column_space_basis(span: &Matrix) -> Matrix {
    let r = span.transpose().rref();
    r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>()).transpose()
}

/// Coordinates not hit by pivots of the (canonical) column-space basis.
fn complement_coordinates(basis: &Matrix) -> Vec<usize> {
    let r = basis.transpose().rref();
    (0..basis.rows()).filter(|c| !r.pivots.contains(c)).collect()
}

/// For a subspace given by columns, the projection onto the quotient in the
/// non-pivot coordinate basis, together with the section e_c.
pub(crate) fn complement_projection(span: &Matrix) -> (Matrix, Matrix) {
    let f = span.field();
    let d = span.rows();
    let r = span.transpose().rref();
    let comp: Vec<usize> = (0..d).filter(|c| !r.pivots.contains(c)).collect();
    let mut proj = Matrix::zeros(f, comp.len(), d);
    let mut section = Matrix::zeros(f, d, comp.len());
    for (k, &c) in comp.iter().enumerate() {
        proj.set(k, c, 1);
        section.set(c, k, 1);
        for (i, &pc) in r.pivots.iter().enumerate() {
            let v = r.reduced.get(i, c);
            if v != 0 {
                proj.set(k, pc, f.neg(v));
            }
        }
    }
    (proj, section)
}

/// Generator actions with a fast path for permutation matrices.
pub(crate) struct Action {
    gens: Vec<GenAction>,
    field: PrimeField,
}

enum GenAction {
    Perm(Vec<usize>),
    Dense(Matrix),
}

impl Action {
    fn new(m: &Module) -> Self {
        let gens = m
            .gens
            .iter()
            .map(|g| match g.as_permutation() {
                Some(perm) => GenAction::Perm(perm),
                None => GenAction::Dense(g.clone()),
            })
            .collect();
        Action { gens, field: m.field() }
    }

    pub(crate) fn apply(&self, i: usize, v: &[u32]) -> Vec<u32> {
        match &self.gens[i] {
            GenAction::Perm(perm) => {
                let mut out = vec![0u32; v.len()];
                for (j, &x) in v.iter().enumerate() {
                    out[perm[j]] = x;
                }
                out
            }
            GenAction::Dense(a) => a.mul_vec(v),
        }
    }

    /// Images g . v for all g in E, in lexicographic element order.
    pub(crate) fn orbit(&self, group: &Group, v: &[u32]) -> Vec<Vec<u32>> {
        let p = group.p() as usize;
        let r = group.rank();
        let order = group.order();
        let mut out: Vec<Vec<u32>> = Vec::with_capacity(order);
        out.push(v.to_vec());
        for idx in 1..order {
            // Predecessor: lower the last nonzero coordinate by one.
            let mut rem = idx;
            let mut coord = r - 1;
            let mut stride = 1;
            while rem % p == 0 {
                rem /= p;
                coord -= 1;
                stride *= p;
            }
            out.push(self.apply(coord, &out[idx - stride]));
        }
        debug_assert!(self.field.p() as usize == p);
        out
    }
}

/// A linear map between modules, acting on column coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    source: Module,
    target: Module,
    matrix: Matrix,
}

impl ModuleMap {
    /// Checks shape and the intertwining identity exactly.
    pub fn new(source: Module, target: Module, matrix: Matrix) -> Result<Self> {
        source.same_group(&target)?;
        if matrix.shape() != (target.dim, source.dim) {
            return Err(Error::DimensionMismatch(format!(
                "map matrix {}x{} between modules of dims {} -> {}",
                matrix.rows(),
                matrix.cols(),
                source.dim,
                target.dim
            )));
        }
        for (i, (a, b)) in source.gens.iter().zip(&target.gens).enumerate() {
            if matrix.mul(a)? != b.mul(&matrix)? {
                return Err(Error::NotHomomorphism(format!("fails to intertwine generator {}", i + 1)));
            }
        }
        Ok(ModuleMap { source, target, matrix })
    }

    pub(crate) fn new_unchecked(source: Module, target: Module, matrix: Matrix) -> Self {
        debug_assert_eq!(matrix.shape(), (target.dim, source.dim));
        ModuleMap { source, target, matrix }
    }

    pub fn identity(m: &Module) -> Self {
        ModuleMap::new_unchecked(m.clone(), m.clone(), Matrix::identity(m.field(), m.dim))
    }

    pub fn zero(source: &Module, target: &Module) -> Self {
        let z = Matrix::zeros(source.field(), target.dim, source.dim);
        ModuleMap::new_unchecked(source.clone(), target.clone(), z)
    }

    pub fn source(&self) -> &Module {
        &self.source
    }

    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &ModuleMap) -> Result<ModuleMap> {
        if first.target != self.source {
            return Err(Error::DimensionMismatch("composition of non-adjacent maps".into()));
        }
        Ok(ModuleMap::new_unchecked(
            first.source.clone(),
            self.target.clone(),
            self.matrix.mul(&first.matrix)?,
        ))
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.source.dim
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.target.dim
    }

    pub fn check_intertwines(&self) -> Result<()> {
        ModuleMap::new(self.source.clone(), self.target.clone(), self.matrix.clone()).map(|_| ())
    }

    /// Kernel with induced action on the canonical nullspace basis.
    pub fn kernel(&self) -> Result<(Module, ModuleMap)> {
        let basis = self.matrix.nullspace();
        let gens = self
            .source
            .gens
            .iter()
            .map(|a| {
                basis
                    .solve(&a.mul(&basis)?)
                    .map_err(|_| Error::NotHomomorphism("kernel is not invariant".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = Module::new_unchecked(self.source.group, basis.cols(), gens);
        let incl = ModuleMap::new_unchecked(k.clone(), self.source.clone(), basis);
        Ok((k, incl))
    }
}

#[derive(Clone, Debug)]
pub struct DirectSum {
    pub module: Module,
    pub injections: [ModuleMap; 2],
    pub projections: [ModuleMap; 2],
}

#[derive(Clone, Debug)]
pub struct ProjectiveCover {
    /// Free rank t = dim M / rad M.
    pub rank: usize,
    /// The surjection (kE)^t -> M.
    pub map: ModuleMap,
}

impl ProjectiveCover {
    pub fn free_module(&self) -> &Module {
        self.map.source()
    }
}

/// M' together with an isomorphism M' + (kE)^t -> M.
#[derive(Clone, Debug)]
pub struct StrippedModule {
    pub rest: Module,
    pub free_rank: usize,
    pub split: DirectSum,
    pub iso: ModuleMap,
}

#[derive(Clone, Debug)]
pub enum IsoProbe {
    Iso(ModuleMap),
    NotIsomorphic,
    Inconclusive,
}

impl IsoProbe {
    pub fn is_iso(&self) -> bool {
        matches!(self, IsoProbe::Iso(_))
    }
}

impl fmt::Display for IsoProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoProbe::Iso(_) => write!(f, "Iso"),
            IsoProbe::NotIsomorphic => write!(f, "NotIsomorphic"),
            IsoProbe::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}
