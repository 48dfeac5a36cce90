//! Seeded generators of random tables and kernels.
//!
//! Cell weights are standard-exponential variates normalised to sum to one,
//! which is the uniform law on the simplex. The normalised point is rounded
//! to the dyadic grid `k / 2^20` (largest remainders, no cell left empty), so
//! both arithmetic modes see exactly the same table.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::joint::{JointDistribution, Supports, Variable};
use super::kernel::ModelKernel;
use super::label::Support;
use crate::scalar::Scalar;

const GRID_BITS: u32 = 20;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser; derives independent sub-seeds from `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut x = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Positive integer weights summing to `2^20` whose normalisation is
/// (rounded) uniform on the simplex. Requires `n <= 2^20`.
pub fn simplex_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    let grid = 1u64 << GRID_BITS;
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    let free = (grid - n as u64) as f64;
    let exact: Vec<f64> = e.iter().map(|x| x / total * free).collect();
    let mut w: Vec<u64> = exact.iter().map(|x| x.floor() as u64 + 1).collect();
    let mut short = grid - w.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    for i in order.into_iter().cycle() {
        if short == 0 {
            break;
        }
        w[i] += 1;
        short -= 1;
    }
    w
}

/// A uniformly random point of the `n`-simplex, on the grid `k / 2^20`.
pub fn random_simplex<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    simplex_weights(rng, n).into_iter().map(|k| T::from_count(k, 1 << GRID_BITS)).collect()
}

/// Uniform rational in `[0, 1]` on the grid `k / den`.
pub fn random_grid<T: Scalar, R: Rng>(rng: &mut R, den: u64) -> T {
    T::from_count(rng.gen_range(0..=den), den)
}

/// Random joint table over `supports` with every cell drawn from the simplex.
pub fn random_joint<T: Scalar>(supports: &Supports, seed: u64) -> JointDistribution<T> {
    let mut rng = rng_from_seed(seed);
    let nc = supports.construct.as_ref().map_or(1, Support::len);
    let n = 2 * nc * supports.observed.len() * supports.predicted.len();
    let table = random_simplex(&mut rng, n);
    JointDistribution::from_dense(supports.clone(), table).expect("simplex point is a valid table")
}

/// Random kernel from `input` (Yo or Yc) to `output`, every row independent.
pub fn random_kernel<T: Scalar>(
    input: Variable,
    input_support: &Support,
    output: &Support,
    seed: u64,
) -> ModelKernel<T> {
    let mut rng = rng_from_seed(seed);
    let n = input_support.len();
    let rows: Vec<Vec<T>> = (0..2 * n).map(|_| random_simplex(&mut rng, output.len())).collect();
    ModelKernel::from_fn(input, input_support.clone(), output.clone(), |z, x| rows[z * n + x].clone())
        .expect("simplex rows are valid")
}

/// Random kernel whose rows ignore `Z` (the equalized-odds family when the input is Yo).
pub fn random_group_blind_kernel<T: Scalar>(
    input: Variable,
    input_support: &Support,
    output: &Support,
    seed: u64,
) -> ModelKernel<T> {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<T>> = (0..input_support.len()).map(|_| random_simplex(&mut rng, output.len())).collect();
    ModelKernel::from_fn(input, input_support.clone(), output.clone(), |_, x| rows[x].clone())
        .expect("simplex rows are valid")
}

/// Convenience: a fresh RNG seeded from a derived stream.
pub fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(seed, stream))
}

/// Draws a support size in `lo..=hi`.
pub fn random_size<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}
