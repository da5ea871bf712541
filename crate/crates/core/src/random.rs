//! Seeded random modules, realized as submodules of free modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Matrix;
use crate::group::Group;
use crate::module::Module;

const ATTEMPTS_PER_SEED: usize = 100;
const SEED_OFFSETS: u64 = 64;

/// A random submodule of dimension `dim` of (kE)^t, t = ceil(dim / |E|) + 1.
///
/// Vectors are drawn one at a time and pushed into deeper radical layers by
/// random factors (g_i - 1); a vector is kept when the generated submodule
/// does not overshoot `dim`. After 100 rejected draws the seed is bumped by one.
pub fn random_module(group: Group, dim: usize, seed: u64) -> Result<Module> {
    group.check_dim("random module dimension", dim)?;
    if dim == 0 {
        return Ok(Module::zero(group));
    }
    let order = group.order();
    let free = Module::free(group, dim.div_ceil(order) + 1)?;
    for offset in 0..SEED_OFFSETS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset));
        if let Some(m) = attempt(&free, dim, &mut rng)? {
            return Ok(m);
        }
    }
    Err(Error::Internal(format!("no {dim}-dimensional submodule found from seed {seed}")))
}

fn attempt(free: &Module, dim: usize, rng: &mut ChaCha8Rng) -> Result<Option<Module>> {
    let f = free.field();
    let p = f.p();
    let n = free.dim();
    let id = Matrix::identity(f, n);
    let lowering: Vec<Matrix> = free
        .generators()
        .iter()
        .map(|a| a.sub(&id))
        .collect::<Result<_>>()?;
    let mut chosen = Matrix::zeros(f, n, 0);
    let mut current = 0;
    for _ in 0..ATTEMPTS_PER_SEED {
        let mut v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        for low in &lowering {
            for _ in 0..rng.gen_range(0..p) {
                v = low.mul_vec(&v);
            }
        }
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        let candidate = Matrix::hstack(&[&chosen, &Matrix::column_vector(f, &v)])?;
        let (sub, _) = free.submodule_generated_by(&candidate)?;
        if sub.dim() > current && sub.dim() <= dim {
            chosen = candidate;
            current = sub.dim();
            if current == dim {
                return Ok(Some(sub));
            }
        }
    }
    Ok(None)
}
