//! Seeded randomness and Monte-Carlo plumbing.
//!
//! Every stochastic routine in the crate draws from [`ChaCha8Rng`], a
//! counter-based stream cipher generator, seeded from an explicit `u64`.
//! Standard normal variates are produced with the Marsaglia polar method on
//! top of that stream, so a seed fixes every sample bit for bit.
//!
//! Monte-Carlo loops are split into shards of [`SHARD_SIZE`] samples. Shard
//! `i` is seeded with `seed ^ i`, shards may run on any thread, and the shard
//! partial sums are always combined in shard order.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::hilbert::SelfAdjointOp;
use crate::{Error, Result};

/// Samples per Monte-Carlo shard.
pub const SHARD_SIZE: usize = 1 << 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes `(seed, stream, index)` into a new seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal variates by the Marsaglia polar method.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rng(seed),
            spare: None,
        }
    }

    /// Uniform variate in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = self.next_normal();
        }
    }

    pub fn normal_vector(&mut self, dim: usize) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| self.next_normal())
    }

    /// Uniformly distributed unit vector.
    pub fn unit_vector(&mut self, dim: usize) -> DVector<f64> {
        loop {
            let v = self.normal_vector(dim);
            let n = v.norm();
            if n > 1e-12 {
                return v / n;
            }
        }
    }
}

/// Orthonormal frame drawn from the Haar measure (QR of a Gaussian matrix with
/// the sign of `diag(R)` fixed).
pub fn random_orthonormal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut stream = NormalStream::new(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| stream.next_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Draws `x = Q^{1/2} ξ` with `ξ` standard normal, i.e. `x ~ N(0, Q)`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    sqrt_q: DMatrix<f64>,
    seed: u64,
}

impl GaussianSampler {
    pub fn new(q: &SelfAdjointOp, seed: u64) -> Result<Self> {
        let sqrt_q = q.sqrt()?;
        Ok(Self {
            sqrt_q: sqrt_q.matrix().clone(),
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.sqrt_q.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Noise stream for shard `shard`.
    pub fn shard_stream(&self, shard: u64) -> NormalStream {
        NormalStream::new(self.seed ^ shard)
    }

    pub fn sample_with(&self, stream: &mut NormalStream, xi: &mut DVector<f64>, out: &mut DVector<f64>) {
        stream.fill_normal(xi.as_mut_slice());
        self.sqrt_q.mul_to(xi, out);
    }

    /// Samples `count` vectors from shard `shard`.
    pub fn sample_batch(&self, count: usize, shard: u64) -> Vec<DVector<f64>> {
        let mut stream = self.shard_stream(shard);
        let n = self.dim();
        let mut xi = DVector::zeros(n);
        (0..count)
            .map(|_| {
                let mut x = DVector::zeros(n);
                self.sample_with(&mut stream, &mut xi, &mut x);
                x
            })
            .collect()
    }
}

/// Mean of a Monte-Carlo statistic together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }
}

/// Accumulated first and second moments of a vector of statistics.
#[derive(Debug, Clone)]
pub struct MomentSums {
    pub count: usize,
    pub sums: Vec<f64>,
    pub squares: Vec<f64>,
}

impl MomentSums {
    fn new(stats: usize) -> Self {
        Self {
            count: 0,
            sums: vec![0.0; stats],
            squares: vec![0.0; stats],
        }
    }

    fn merge(&mut self, other: &MomentSums) {
        self.count += other.count;
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            self.squares[i] += other.squares[i];
        }
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        let n = self.count as f64;
        let mean = self.sums[i] / n;
        let var = if self.count > 1 {
            ((self.squares[i] - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: self.count,
        }
    }

    pub fn estimates(&self) -> Vec<Estimate> {
        (0..self.sums.len()).map(|i| self.estimate(i)).collect()
    }
}

/// Runs `samples` draws of `x ~ N(0, Q)` through `stat`, which writes `stats`
/// numbers per sample, and returns the moment sums.
///
/// The result depends only on the sampler seed and `samples`, never on the
/// thread count.
pub fn monte_carlo<F>(sampler: &GaussianSampler, samples: usize, stats: usize, stat: F) -> Result<MomentSums>
where
    F: Fn(&DVector<f64>, &mut [f64]) + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidArgument("Monte-Carlo run needs at least one sample".into()));
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let n = sampler.dim();
    let partials: Vec<MomentSums> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = SHARD_SIZE.min(samples - shard * SHARD_SIZE);
            let mut stream = sampler.shard_stream(shard as u64);
            let mut xi = DVector::zeros(n);
            let mut x = DVector::zeros(n);
            let mut buf = vec![0.0; stats];
            let mut acc = MomentSums::new(stats);
            for _ in 0..count {
                sampler.sample_with(&mut stream, &mut xi, &mut x);
                stat(&x, &mut buf);
                for (i, v) in buf.iter().enumerate() {
                    acc.sums[i] += v;
                    acc.squares[i] += v * v;
                }
            }
            acc.count = count;
            acc
        })
        .collect();
    let mut total = MomentSums::new(stats);
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_method_is_reproducible() {
        let mut a = NormalStream::new(42);
        let mut b = NormalStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_normal().to_bits(), b.next_normal().to_bits());
        }
    }

    #[test]
    fn random_frame_is_orthonormal() {
        let u = random_orthonormal(7, 3);
        let err = (u.transpose() * &u - DMatrix::identity(7, 7)).norm();
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    }

    #[test]
    fn zero_samples_rejected() {
        let q = SelfAdjointOp::identity(2);
        let s = GaussianSampler::new(&q, 1).unwrap();
        assert!(monte_carlo(&s, 0, 1, |_, _| {}).is_err());
    }

    #[test]
    fn standard_normal_moments() {
        let q = SelfAdjointOp::identity(1);
        let s = GaussianSampler::new(&q, 9).unwrap();
        let m = monte_carlo(&s, 200_000, 2, |x, out| {
            out[0] = x[0];
            out[1] = x[0] * x[0];
        })
        .unwrap();
        let mean = m.estimate(0);
        let second = m.estimate(1);
        assert!(mean.z_score(0.0).abs() < 4.0);
        assert!(second.z_score(1.0).abs() < 4.0);
    }
}
