//! Scaled-integer nested lattice codes and the relay's modulo sum decoder.
//!
//! The fine lattice is `γ·Zⁿ` and the coarse lattice `γq·Zⁿ`. Codewords are
//! the fine points inside the coarse Voronoi cell `[−γq/2, γq/2)ⁿ`, so a code
//! carries `log2 q` bits per dimension. Internally every codebook point is
//! held as integer coordinates in units of `γ`; real vectors are produced by
//! one multiplication, which keeps the noiseless algebra exact.
//!
//! Only the one-dimensional (and its cubic product) construction is
//! provided. It reproduces the algebra of modulo-lattice network coding
//! exactly, but none of the high-dimensional shaping or coding gains, so
//! noisy decoding shows the threshold trend rather than the asymptotic rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::LatticeError;
use crate::exec::{derive_seed, Execution};

/// Relative tolerance when snapping a real vector to the fine lattice.
const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedLatticeCode {
    dim: usize,
    fine_scale: f64,
    nesting_ratio: u64,
}

impl NestedLatticeCode {
    pub fn new(dim: usize, fine_scale: f64, nesting_ratio: u64) -> Result<Self, LatticeError> {
        if dim == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        if !(fine_scale.is_finite() && fine_scale > 0.0) {
            return Err(LatticeError::InvalidScale(fine_scale));
        }
        if nesting_ratio < 2 {
            return Err(LatticeError::InvalidNestingRatio(nesting_ratio));
        }
        // coordinates are kept in i64 and sums of two must not overflow
        if nesting_ratio > 1 << 60 || nesting_ratio.checked_pow(dim as u32).is_none() {
            return Err(LatticeError::CodebookTooLarge { q: nesting_ratio, n: dim });
        }
        Ok(NestedLatticeCode { dim, fine_scale, nesting_ratio })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fine_scale(&self) -> f64 {
        self.fine_scale
    }

    pub fn nesting_ratio(&self) -> u64 {
        self.nesting_ratio
    }

    pub fn coarse_scale(&self) -> f64 {
        self.fine_scale * self.nesting_ratio as f64
    }

    pub fn codebook_size(&self) -> u64 {
        self.nesting_ratio.pow(self.dim as u32)
    }

    /// Bits per dimension.
    pub fn rate(&self) -> f64 {
        (self.nesting_ratio as f64).log2()
    }

    /// Average power per dimension of a dithered codeword.
    pub fn power(&self) -> f64 {
        self.coarse_scale().powi(2) / 12.0
    }

    /// The same code with every scale multiplied by `|f|`.
    pub fn scaled(&self, f: f64) -> Result<Self, LatticeError> {
        if !(f.is_finite() && f != 0.0) {
            return Err(LatticeError::ZeroScaling(f));
        }
        NestedLatticeCode::new(self.dim, self.fine_scale * f.abs(), self.nesting_ratio)
    }

    /// Reduces a real vector into the coarse Voronoi cell.
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        let l = self.coarse_scale();
        x.iter().map(|v| v - l * ((v + l / 2.0) / l).floor()).collect()
    }

    fn reduce_coord(&self, k: i64) -> i64 {
        let q = self.nesting_ratio as i64;
        let r = k.rem_euclid(q);
        if 2 * r < q { r } else { r - q }
    }

    fn to_real(self, k: &[i64]) -> Vec<f64> {
        k.iter().map(|&c| self.fine_scale * c as f64).collect()
    }

    fn check_dim(&self, len: usize) -> Result<(), LatticeError> {
        if len != self.dim {
            return Err(LatticeError::DimensionMismatch { expected: self.dim, actual: len });
        }
        Ok(())
    }

    /// Integer coordinates of a codebook point given as a real vector.
    pub fn coordinates(&self, x: &[f64]) -> Result<Vec<i64>, LatticeError> {
        self.check_dim(x.len())?;
        let q = self.nesting_ratio as f64;
        x.iter()
            .map(|v| {
                let k = v / self.fine_scale;
                let r = k.round();
                if !k.is_finite() || (k - r).abs() > SNAP_TOL * r.abs().max(1.0) || 2.0 * r < -q || 2.0 * r >= q {
                    return Err(LatticeError::NotACodeword(x.to_vec()));
                }
                Ok(r as i64)
            })
            .collect()
    }

    fn index_coords(&self, m: u64) -> Result<Vec<i64>, LatticeError> {
        let size = self.codebook_size();
        if m >= size {
            return Err(LatticeError::IndexOutOfRange { index: m, size });
        }
        let q = self.nesting_ratio;
        let mut rest = m;
        Ok((0..self.dim)
            .map(|_| {
                let digit = (rest % q) as i64;
                rest /= q;
                self.reduce_coord(digit)
            })
            .collect())
    }

    /// Codebook point of message `m`: base-`q` digits, least significant
    /// first, each mapped to its coset representative in `[−q/2, q/2)`.
    pub fn lattice_point(&self, m: u64) -> Result<Vec<f64>, LatticeError> {
        Ok(self.to_real(&self.index_coords(m)?))
    }

    /// Inverse of [`lattice_point`](Self::lattice_point).
    pub fn index_of(&self, x: &[f64]) -> Result<u64, LatticeError> {
        let q = self.nesting_ratio as i64;
        let k = self.coordinates(x)?;
        Ok(k.iter().rev().fold(0u64, |acc, &c| acc * q as u64 + c.rem_euclid(q) as u64))
    }

    /// `x = (λ(m) − d) mod Λc`.
    pub fn encode(&self, m: u64, dither: &Dither) -> Result<Vec<f64>, LatticeError> {
        self.check_dim(dither.0.len())?;
        let lambda = self.lattice_point(m)?;
        let shifted: Vec<f64> = lambda.iter().zip(&dither.0).map(|(l, d)| l - d).collect();
        Ok(self.reduce(&shifted))
    }

    /// `(a + b) mod Λc` for two codebook points.
    pub fn sum_mod(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>, LatticeError> {
        let (ka, kb) = (self.coordinates(a)?, self.coordinates(b)?);
        Ok(self.to_real(&ka.iter().zip(&kb).map(|(x, y)| self.reduce_coord(x + y)).collect::<Vec<_>>()))
    }

    /// The codebook point `λB` with `(own + λB) mod Λc = sum`.
    pub fn extract_partner(&self, sum: &[f64], own: &[f64]) -> Result<Vec<f64>, LatticeError> {
        let (ks, ko) = (self.coordinates(sum)?, self.coordinates(own)?);
        Ok(self.to_real(&ks.iter().zip(&ko).map(|(s, o)| self.reduce_coord(s - o)).collect::<Vec<_>>()))
    }

    /// MMSE factor for two aligned senders of this code in noise `σ²`.
    pub fn mmse_factor(&self, noise_var: f64) -> f64 {
        let p = self.power();
        2.0 * p / (2.0 * p + noise_var)
    }

    /// Estimates `(λA + λB) mod Λc` from `y = xA + xB + z`.
    ///
    /// Scales by the MMSE factor, adds both dithers back, rounds to the fine
    /// lattice (exact midpoints go toward −∞) and reduces modulo the coarse
    /// lattice.
    pub fn relay_decode_sum(
        &self,
        y: &[f64],
        dither_a: &Dither,
        dither_b: &Dither,
        noise_var: f64,
    ) -> Result<Vec<f64>, LatticeError> {
        self.check_dim(y.len())?;
        self.check_dim(dither_a.0.len())?;
        self.check_dim(dither_b.0.len())?;
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(LatticeError::InvalidNoise(noise_var));
        }
        let alpha = self.mmse_factor(noise_var);
        let k: Vec<i64> = y
            .iter()
            .zip(&dither_a.0)
            .zip(&dither_b.0)
            .map(|((y, da), db)| {
                let s = (alpha * y + da + db) / self.fine_scale;
                self.reduce_coord((s - 0.5).ceil() as i64)
            })
            .collect();
        Ok(self.to_real(&k))
    }
}

/// A shared dither, one component per dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dither(pub Vec<f64>);

impl Dither {
    pub fn zero(code: &NestedLatticeCode) -> Dither {
        Dither(vec![0.0; code.dim()])
    }

    /// Uniform over the coarse Voronoi cell.
    pub fn random<R: Rng + ?Sized>(code: &NestedLatticeCode, rng: &mut R) -> Dither {
        let l = code.coarse_scale();
        Dither((0..code.dim()).map(|_| l * (rng.random::<f64>() - 0.5)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatePoint {
    /// Per-sender codeword power over noise variance, in dB; `inf` means
    /// noiseless.
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
}

/// Noise variance giving per-sender SNR `snr_db` for this code.
pub fn noise_variance(code: &NestedLatticeCode, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY { 0.0 } else { code.power() / 10f64.powf(snr_db / 10.0) }
}

fn sum_decode_fails(code: &NestedLatticeCode, noise_var: f64, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = code.codebook_size();
    let (ma, mb) = (rng.random_range(0..size), rng.random_range(0..size));
    let (da, db) = (Dither::random(code, &mut rng), Dither::random(code, &mut rng));
    let xa = code.encode(ma, &da).expect("index in range");
    let xb = code.encode(mb, &db).expect("index in range");
    let noise = Normal::new(0.0, noise_var.sqrt()).expect("finite variance");
    let y: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| a + b + noise.sample(&mut rng)).collect();
    let truth = code
        .sum_mod(&code.lattice_point(ma).unwrap(), &code.lattice_point(mb).unwrap())
        .expect("codebook points");
    code.relay_decode_sum(&y, &da, &db, noise_var).expect("valid inputs") != truth
}

/// Empirical sum-decoding error rate at each SNR, trials drawn uniformly
/// over message pairs and dithers.
pub fn monte_carlo_sum_decode(
    code: &NestedLatticeCode,
    snr_db: &[f64],
    trials: u64,
    seed: u64,
) -> Vec<ErrorRatePoint> {
    monte_carlo_sum_decode_with(Execution::default(), code, snr_db, trials, seed)
}

pub fn monte_carlo_sum_decode_with(
    exec: Execution,
    code: &NestedLatticeCode,
    snr_db: &[f64],
    trials: u64,
    seed: u64,
) -> Vec<ErrorRatePoint> {
    snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let noise_var = noise_variance(code, snr);
            let errors = exec.count(trials, |t| sum_decode_fails(code, noise_var, derive_seed(seed, point as u64, t)));
            ErrorRatePoint {
                snr_db: snr,
                trials,
                errors,
                error_rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            }
        })
        .collect()
}

/// CSV with header `snr_db,trials,errors,error_rate`.
pub fn error_curve_csv(points: &[ErrorRatePoint]) -> String {
    let mut out = String::from("snr_db,trials,errors,error_rate\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.snr_db, p.trials, p.errors, p.error_rate));
    }
    out
}
