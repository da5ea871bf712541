//! Composition series and the short exact sequences cut out of them.

use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::module::{column_space_basis, Module, ModuleMap};

/// 0 -> L -> M -> N -> 0.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub incl: ModuleMap,
    pub proj: ModuleMap,
}

impl ShortExactSequence {
    /// Checks the sequence invariants exactly.
    pub fn new(incl: ModuleMap, proj: ModuleMap) -> Result<Self> {
        let ses = ShortExactSequence { incl, proj };
        ses.check()?;
        Ok(ses)
    }

    pub fn check(&self) -> Result<()> {
        if self.incl.target() != self.proj.source() {
            return Err(Error::DimensionMismatch("middle modules differ".into()));
        }
        self.incl.check_intertwines()?;
        self.proj.check_intertwines()?;
        let bad = |what: &str| Err(Error::NotResolution(format!("short exact sequence: {what}")));
        if !self.incl.is_injective() {
            return bad("inclusion not injective");
        }
        if !self.proj.is_surjective() {
            return bad("projection not surjective");
        }
        if !self.proj.matrix().mul(self.incl.matrix())?.is_zero() {
            return bad("proj . incl != 0");
        }
        if self.incl.rank() + self.proj.rank() != self.middle().dim() {
            return bad("rank(incl) + rank(proj) != dim M");
        }
        Ok(())
    }

    pub fn sub(&self) -> &Module {
        self.incl.source()
    }

    pub fn middle(&self) -> &Module {
        self.incl.target()
    }

    pub fn quotient(&self) -> &Module {
        self.proj.target()
    }
}

/// A maximal flag 0 = L_0 < L_1 < ... < L_s = M, every step one-dimensional
/// with trivial quotient.
///
/// `basis` is an invertible dim x dim matrix whose first i columns span L_i;
/// `steps[i - 1]` is L_i written in those first i columns, so every action
/// matrix is upper unitriangular.
#[derive(Clone, Debug)]
pub struct CompositionSeries {
    pub module: Module,
    pub basis: Matrix,
    pub steps: Vec<Module>,
}

impl CompositionSeries {
    /// Refines the radical series M > rad M > rad^2 M > ... > 0, adding
    /// canonical basis vectors of each layer in order.
    pub fn new(module: &Module) -> Result<Self> {
        let f = module.field();
        let dim = module.dim();
        let id = Matrix::identity(f, dim);
        let mut layers = vec![id.clone()];
        loop {
            let last = layers.last().expect("nonempty");
            if last.cols() == 0 {
                break;
            }
            let images: Vec<Matrix> = module
                .generators()
                .iter()
                .map(|a| a.sub(&id)?.mul(last))
                .collect::<Result<_>>()?;
            let next = column_space_basis(&Matrix::hstack(&images.iter().collect::<Vec<_>>())?);
            if next.cols() >= last.cols() {
                return Err(Error::Internal("radical series does not descend".into()));
            }
            layers.push(next);
        }
        let mut chosen = Matrix::zeros(f, dim, 0);
        for layer in layers.iter().rev().skip(1) {
            for j in 0..layer.cols() {
                let v = layer.select_cols(&[j]);
                let candidate = Matrix::hstack(&[&chosen, &v])?;
                if candidate.rank() > chosen.cols() {
                    chosen = candidate;
                }
            }
        }
        let basis = chosen;
        let inv = basis
            .inverse()
            .ok_or_else(|| Error::Internal("flag basis is not invertible".into()))?;
        let adapted: Vec<Matrix> = module
            .generators()
            .iter()
            .map(|a| inv.mul(a)?.mul(&basis))
            .collect::<Result<_>>()?;
        let mut steps = Vec::with_capacity(dim);
        for i in 1..=dim {
            let idx: Vec<usize> = (0..i).collect();
            let gens = adapted.iter().map(|a| a.select_rows(&idx).select_cols(&idx)).collect();
            steps.push(Module::new_unchecked(module.group(), i, gens));
        }
        let series = CompositionSeries {
            module: module.clone(),
            basis,
            steps,
        };
        series.check()?;
        Ok(series)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// L_i for 0 <= i <= s.
    pub fn step(&self, i: usize) -> Module {
        if i == 0 {
            Module::zero(self.module.group())
        } else {
            self.steps[i - 1].clone()
        }
    }

    /// L_{i-1} -> L_i for 1 <= i <= s.
    pub fn inclusion(&self, i: usize) -> ModuleMap {
        let f = self.module.field();
        let m = Matrix::from_fn(f, i, i - 1, |a, b| (a == b) as i64);
        ModuleMap::new_unchecked(self.step(i - 1), self.step(i), m)
    }

    pub fn inclusions(&self) -> Vec<ModuleMap> {
        (1..=self.len()).map(|i| self.inclusion(i)).collect()
    }

    /// L_s -> M, the change of basis onto the original coordinates.
    pub fn to_module(&self) -> ModuleMap {
        ModuleMap::new_unchecked(self.step(self.len()), self.module.clone(), self.basis.clone())
    }

    /// The sequence L_{i-1} -> L_i -> L_i / L_{i-1}.
    pub fn ses(&self, i: usize) -> Result<ShortExactSequence> {
        ses_from_flag(&self.inclusion(i))
    }

    fn check(&self) -> Result<()> {
        let one = Matrix::identity(self.module.field(), 1);
        for i in 1..=self.len() {
            let ses = self.ses(i)?;
            let q = ses.quotient();
            if q.dim() != 1 || q.generators().iter().any(|g| *g != one) {
                return Err(Error::Internal(format!("composition factor {i} is not trivial")));
            }
        }
        self.to_module().check_intertwines()
    }
}

/// The sequence L' -> L -> L / L' for a submodule inclusion.
pub fn ses_from_flag(incl: &ModuleMap) -> Result<ShortExactSequence> {
    let (_, proj) = incl.target().quotient(incl)?;
    ShortExactSequence::new(incl.clone(), proj)
}
