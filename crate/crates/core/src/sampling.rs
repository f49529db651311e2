//! Seeded sampling helpers shared by the condition checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the Euclidean unit sphere S^{n-1}.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    if n == 2 {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        return vec![phi.cos(), phi.sin()];
    }
    loop {
        // Marsaglia-style rejection from the cube, cheap for small n
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    rng.random_range(a..b).exp()
}

/// Direction uniform on the sphere times a log-uniform radius in [1e-2, 1e2].
pub fn scaled_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let r = log_uniform(rng, 1e-2, 1e2);
    unit_sphere(rng, n).into_iter().map(|x| r * x).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
