//! Permutation modules over E: sums of transitive pieces k(E/H).
//!
//! Subgroups of E = F_p^r are subspaces, stored by the rows of their reduced
//! row echelon basis. A [`PermutationDescriptor`] is a sorted multiset of
//! subgroups naming the module of its coset spaces; [`realize`] produces that
//! module in a fixed coset basis and [`recognize`] reads a descriptor back off
//! any module whose generators are permutation matrices.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::group::Group;
use crate::module::Module;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    group: Group,
    basis: Matrix,
}

impl Subgroup {
    /// The span of the given row vectors.
    pub fn span(group: Group, rows: &Matrix) -> Result<Self> {
        if rows.cols() != group.rank() || rows.field() != group.field() {
            return Err(Error::DimensionMismatch(format!(
                "subgroup generators must have {} coordinates",
                group.rank()
            )));
        }
        let r = rows.rref();
        let basis = r.reduced.select_rows(&(0..r.rank).collect::<Vec<_>>());
        Ok(Subgroup { group, basis })
    }

    pub fn from_rows(group: Group, rows: &[Vec<u64>]) -> Result<Self> {
        let m = Matrix::from_rows(group.field(), group.rank(), rows)?;
        Self::span(group, &m)
    }

    pub fn trivial(group: Group) -> Self {
        Subgroup {
            group,
            basis: Matrix::zeros(group.field(), 0, group.rank()),
        }
    }

    pub fn whole(group: Group) -> Self {
        Subgroup {
            group,
            basis: Matrix::identity(group.field(), group.rank()),
        }
    }

    /// span{e_j : j != i} for a 1-based coordinate i.
    pub fn coordinate_hyperplane(group: Group, i: usize) -> Result<Self> {
        let r = group.rank();
        if i == 0 || i > r {
            return Err(Error::BadCoordinate { index: i, rank: r });
        }
        let rows: Vec<usize> = (0..r).filter(|&j| j + 1 != i).collect();
        let basis = Matrix::identity(group.field(), r).select_rows(&rows);
        Ok(Subgroup { group, basis })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    /// Rows of the reduced echelon basis.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// [E : H] = p^(r - dim H).
    pub fn index(&self) -> usize {
        (self.group.p() as usize).pow((self.group.rank() - self.dim()) as u32)
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    fn key(&self) -> Vec<u16> {
        self.basis.to_rows().into_iter().flatten().map(|x| x as u16).collect()
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Canonical coset representative of v + H: the unique element of the
    /// coset vanishing on the pivot coordinates of H.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = self.group.field();
        let r = self.basis.rref();
        let mut out = v.to_vec();
        for (i, &pc) in r.pivots.iter().enumerate() {
            let c = out[pc];
            if c != 0 {
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = f.sub(*slot, f.mul(c, self.basis.get(i, j)));
                }
            }
        }
        out
    }

    fn pivots(&self) -> Vec<usize> {
        self.basis.rref().pivots
    }

    /// Coordinates not used as pivots; coset representatives live on these.
    pub fn free_coordinates(&self) -> Vec<usize> {
        let piv = self.pivots();
        (0..self.group.rank()).filter(|c| !piv.contains(c)).collect()
    }

    pub fn sum(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        Subgroup::span(self.group, &Matrix::vstack(&[&self.basis, &other.basis])?)
    }

    pub fn intersection(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        // a H = -b K  <=>  (a, b) in the left kernel of [H; K].
        let stacked = Matrix::vstack(&[&self.basis, &other.basis])?;
        let kernel = stacked.transpose().nullspace();
        let h = self.dim();
        let coeffs = kernel.transpose();
        let a = coeffs.select_cols(&(0..h).collect::<Vec<_>>());
        let vectors = a.mul(&self.basis)?;
        Subgroup::span(self.group, &vectors)
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "{{0}}");
        }
        if self.dim() == self.group.rank() {
            return write!(f, "E");
        }
        write!(f, "<")?;
        for (i, row) in self.basis.to_rows().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let s: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        write!(f, ">")
    }
}

/// Sorted multiset of subgroups naming the sum of the k(E/H_j).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PermutationDescriptor {
    group: Group,
    parts: Vec<Subgroup>,
}

impl PermutationDescriptor {
    pub fn new(group: Group, mut parts: Vec<Subgroup>) -> Result<Self> {
        if parts.iter().any(|h| h.group != group) {
            return Err(Error::GroupMismatch);
        }
        parts.sort();
        Ok(PermutationDescriptor { group, parts })
    }

    pub fn empty(group: Group) -> Self {
        PermutationDescriptor { group, parts: Vec::new() }
    }

    pub fn free(group: Group, t: usize) -> Self {
        PermutationDescriptor {
            group,
            parts: vec![Subgroup::trivial(group); t],
        }
    }

    pub fn single(h: Subgroup) -> Self {
        PermutationDescriptor {
            group: h.group,
            parts: vec![h],
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn parts(&self) -> &[Subgroup] {
        &self.parts
    }

    /// sum_j p^(r - dim H_j).
    pub fn dim(&self) -> usize {
        self.parts.iter().map(Subgroup::index).sum()
    }

    pub fn is_free(&self) -> bool {
        self.parts.iter().all(Subgroup::is_trivial)
    }

    pub fn free_parts(&self) -> usize {
        self.parts.iter().filter(|h| h.is_trivial()).count()
    }

    pub fn union(&self, other: &PermutationDescriptor) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        PermutationDescriptor::new(self.group, parts)
    }

    pub fn union_all<'a>(group: Group, ds: impl IntoIterator<Item = &'a PermutationDescriptor>) -> Result<Self> {
        let mut parts = Vec::new();
        for d in ds {
            if d.group != group {
                return Err(Error::GroupMismatch);
            }
            parts.extend(d.parts.iter().cloned());
        }
        PermutationDescriptor::new(group, parts)
    }

    /// Bilinear extension of [`mackey_tensor`].
    pub fn tensor(&self, other: &PermutationDescriptor) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let mut parts = Vec::new();
        for h in &self.parts {
            for k in &other.parts {
                parts.extend(mackey_tensor(h, k)?.parts);
            }
        }
        PermutationDescriptor::new(self.group, parts)
    }
}

impl fmt::Debug for PermutationDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PermutationDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, h) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{h}")?;
        }
        write!(f, "]")
    }
}

/// k(E/H) (x) k(E/K) = [E : H + K] copies of k(E/(H n K)).
pub fn mackey_tensor(h: &Subgroup, k: &Subgroup) -> Result<PermutationDescriptor> {
    let sum = h.sum(k)?;
    let meet = h.intersection(k)?;
    Ok(PermutationDescriptor {
        group: h.group,
        parts: vec![meet; sum.index()],
    })
}

/// A module with a basis identified with cosets of the descriptor's parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedModule {
    pub module: Module,
    pub descriptor: PermutationDescriptor,
    /// For each basis vector: (part index, coset index within that part).
    pub basis_map: Vec<(usize, usize)>,
}

/// Coset representatives of H in order: all combinations of the non-pivot
/// coordinates, lexicographic.
pub fn coset_representatives(h: &Subgroup) -> Vec<Vec<u32>> {
    let g = h.group;
    let free = h.free_coordinates();
    let p = g.p() as usize;
    let count = p.pow(free.len() as u32);
    (0..count)
        .map(|mut idx| {
            let mut v = vec![0u32; g.rank()];
            for &c in free.iter().rev() {
                v[c] = (idx % p) as u32;
                idx /= p;
            }
            v
        })
        .collect()
}

/// Realizes a descriptor in the coset basis, parts in descriptor order.
pub fn realize(d: &PermutationDescriptor) -> Result<TaggedModule> {
    let g = d.group;
    let dim = d.dim();
    g.check_dim("permutation module dimension", dim)?;
    let f = g.field();
    let mut gens = vec![Matrix::zeros(f, dim, dim); g.rank()];
    let mut basis_map = Vec::with_capacity(dim);
    let mut offset = 0;
    for (part, h) in d.parts.iter().enumerate() {
        let reps = coset_representatives(h);
        let free = h.free_coordinates();
        let p = g.p() as usize;
        let index_of = |v: &[u32]| free.iter().fold(0usize, |acc, &c| acc * p + v[c] as usize);
        for (x, rep) in reps.iter().enumerate() {
            basis_map.push((part, x));
            for (i, gen) in gens.iter_mut().enumerate() {
                let mut moved = rep.clone();
                moved[i] = f.add(moved[i], 1);
                let y = index_of(&h.reduce(&moved));
                gen.set(offset + y, offset + x, 1);
            }
        }
        offset += reps.len();
    }
    Ok(TaggedModule {
        module: Module::new_unchecked(g, dim, gens),
        descriptor: d.clone(),
        basis_map,
    })
}

/// An orbit of the basis under a permutation action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    /// Basis indices, starting at the base point, in discovery order.
    pub points: Vec<usize>,
    /// Group element carrying the base point to each entry of `points`.
    pub labels: Vec<Vec<u32>>,
    pub stabilizer: Subgroup,
}

/// Orbits of the basis of a module whose generators are permutation matrices,
/// ordered by smallest basis index.
pub fn orbits(m: &Module) -> Result<Vec<Orbit>> {
    let g = m.group();
    let f = g.field();
    let perms = m
        .generators()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            a.permutation_or_bad_row()
                .map_err(|row| Error::NotPermutationBasis { generator: i + 1, row })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = m.dim();
    let mut label: Vec<Option<Vec<u32>>> = vec![None; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start].is_some() {
            continue;
        }
        label[start] = Some(vec![0; g.rank()]);
        let mut points = vec![start];
        let mut relations: Vec<Vec<u32>> = Vec::new();
        let mut head = 0;
        while head < points.len() {
            let z = points[head];
            head += 1;
            let lz = label[z].clone().expect("labelled");
            for (i, perm) in perms.iter().enumerate() {
                let y = perm[z];
                let mut ly = lz.clone();
                ly[i] = f.add(ly[i], 1);
                match &label[y] {
                    Some(existing) => {
                        let diff: Vec<u32> = ly.iter().zip(existing).map(|(&a, &b)| f.sub(a, b)).collect();
                        if diff.iter().any(|&x| x != 0) {
                            relations.push(diff);
                        }
                    }
                    None => {
                        label[y] = Some(ly);
                        points.push(y);
                    }
                }
            }
        }
        let rel_rows: Vec<Vec<u64>> = relations
            .iter()
            .map(|v| v.iter().map(|&x| x as u64).collect())
            .collect();
        let stabilizer = if rel_rows.is_empty() {
            Subgroup::trivial(g)
        } else {
            Subgroup::from_rows(g, &rel_rows)?
        };
        if stabilizer.index() != points.len() {
            return Err(Error::Internal(format!(
                "orbit of size {} has stabilizer of index {}",
                points.len(),
                stabilizer.index()
            )));
        }
        let labels = points.iter().map(|&x| label[x].clone().expect("labelled")).collect();
        out.push(Orbit {
            points,
            labels,
            stabilizer,
        });
    }
    Ok(out)
}

/// Reads the permutation structure of `m` in its given basis.
pub fn recognize(m: &Module) -> Result<PermutationDescriptor> {
    let parts = orbits(m)?.into_iter().map(|o| o.stabilizer).collect();
    PermutationDescriptor::new(m.group(), parts)
}
